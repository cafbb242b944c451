from .config import CREDENTIAL_OVERRIDE_VAR, RunConfig, load_config
from .dataset import (
    EXPORT_FORMATS,
    DatasetRecord,
    export_dataset,
    merge_datasets,
    read_dataset,
    write_dataset,
)
from .manifest import RecordStatus, StageManifest, atomic_write_text
from .runner import build_context, run_all, run_stage
from .stages import STAGE_ORDER, RunContext, get_stage, load_seeds, load_structural_pool

__all__ = [
    "CREDENTIAL_OVERRIDE_VAR",
    "DatasetRecord",
    "EXPORT_FORMATS",
    "RecordStatus",
    "RunConfig",
    "RunContext",
    "STAGE_ORDER",
    "StageManifest",
    "atomic_write_text",
    "build_context",
    "export_dataset",
    "get_stage",
    "load_config",
    "load_seeds",
    "load_structural_pool",
    "merge_datasets",
    "read_dataset",
    "run_all",
    "run_stage",
    "write_dataset",
]
