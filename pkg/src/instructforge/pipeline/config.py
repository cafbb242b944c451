"""Run configuration: one TOML file, env-var credential override."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..curriculum.types import PackingMode
from ..errors import ConfigError
from ..gateway import GatewayConfig
from ..synthesis.calls import GENERATION_TEMPERATURE, JUDGE_TEMPERATURE, StageSettings
from ..synthesis.types import MAX_DIFFICULTY

CREDENTIAL_OVERRIDE_VAR = "FORGE_CREDENTIAL"


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    seeds_path: str
    output_dir: str
    gateway: GatewayConfig
    model_id: str
    max_tokens: int = 1024
    temperature_generation: float = GENERATION_TEMPERATURE
    temperature_judge: float = JUDGE_TEMPERATURE
    reframe_min_variants: int = 3
    max_difficulty: int = MAX_DIFFICULTY
    augment_sample_count: int = 0
    augment_rng_seed: int = 17
    structural_pool_path: str = ""
    packing_mode: PackingMode = field(default_factory=lambda: PackingMode("ascending"))
    internal_sample_count: int = 0
    external_sample_count: int = 0
    feedback_rng_seed: int = 23
    responder_model_id: str = ""
    prompts_dir: str = ""
    concurrency: int = 1

    def __post_init__(self) -> None:
        if not self.run_id or any(sep in self.run_id for sep in ("/", "\\", os.sep)):
            raise ConfigError(f"run_id must be a single path component, got {self.run_id!r}")
        if not self.model_id:
            raise ConfigError("model_id must be set")
        if not 1 <= self.max_difficulty <= MAX_DIFFICULTY:
            raise ConfigError(f"max_difficulty must be in [1, {MAX_DIFFICULTY}]")
        if self.reframe_min_variants < 1:
            raise ConfigError("reframe_min_variants must be positive")
        for name in ("augment_sample_count", "internal_sample_count", "external_sample_count"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.augment_sample_count > 0 and not self.structural_pool_path:
            raise ConfigError("augment_sample_count > 0 requires structural_pool_path")

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / self.run_id

    def settings(self) -> StageSettings:
        return StageSettings(
            model_id=self.model_id,
            max_tokens=self.max_tokens,
            generation_temperature=self.temperature_generation,
            judge_temperature=self.temperature_judge,
        )

    def responder_settings(self) -> StageSettings:
        return StageSettings(
            model_id=self.responder_model_id or self.model_id,
            max_tokens=self.max_tokens,
            generation_temperature=self.temperature_generation,
            judge_temperature=self.temperature_judge,
        )

    def stage_parameters(self) -> dict:
        """The config fields that shape stage output; hashed into manifests."""
        return {
            "model_id": self.model_id,
            "max_tokens": self.max_tokens,
            "temperature_generation": self.temperature_generation,
            "temperature_judge": self.temperature_judge,
            "reframe_min_variants": self.reframe_min_variants,
            "max_difficulty": self.max_difficulty,
            "augment_sample_count": self.augment_sample_count,
            "augment_rng_seed": self.augment_rng_seed,
            "structural_pool_path": self.structural_pool_path,
            "packing_mode": str(self.packing_mode),
            "internal_sample_count": self.internal_sample_count,
            "external_sample_count": self.external_sample_count,
            "feedback_rng_seed": self.feedback_rng_seed,
            "responder_model_id": self.responder_model_id or self.model_id,
            "prompts_dir": self.prompts_dir,
        }


_TOP_KEYS = {
    "run_id",
    "seeds_path",
    "output_dir",
    "model_id",
    "max_tokens",
    "temperature_generation",
    "temperature_judge",
    "reframe_min_variants",
    "max_difficulty",
    "augment_sample_count",
    "augment_rng_seed",
    "structural_pool_path",
    "packing_mode",
    "internal_sample_count",
    "external_sample_count",
    "feedback_rng_seed",
    "responder_model_id",
    "prompts_dir",
    "concurrency",
}
_GATEWAY_KEYS = {
    "endpoint",
    "credential_ref",
    "requests_per_minute",
    "max_retries",
    "backoff_base_ms",
    "mode",
    "cache_dir",
}


def load_config(
    path: str | Path,
    mode: str | None = None,
    concurrency: int | None = None,
) -> RunConfig:
    """Load a TOML run config; CLI flags may override mode and concurrency.

    If the FORGE_CREDENTIAL environment variable is set, it overrides the
    configured credential_ref.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    gateway_data = data.pop("gateway", None)
    if not isinstance(gateway_data, dict):
        raise ConfigError("config needs a [gateway] table")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    unknown = set(gateway_data) - _GATEWAY_KEYS
    if unknown:
        raise ConfigError(f"unknown [gateway] keys: {sorted(unknown)}")

    if os.environ.get(CREDENTIAL_OVERRIDE_VAR):
        gateway_data["credential_ref"] = CREDENTIAL_OVERRIDE_VAR
    if mode is not None:
        gateway_data["mode"] = mode

    try:
        gateway = GatewayConfig(**gateway_data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [gateway] config: {exc}") from exc

    if "packing_mode" in data:
        try:
            data["packing_mode"] = PackingMode.parse(str(data["packing_mode"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        config = RunConfig(gateway=gateway, **data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    if concurrency is not None:
        config = replace(config, concurrency=concurrency)
    return config
