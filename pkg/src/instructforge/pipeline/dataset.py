"""Dataset records: the exported conversation lines, plus merge and export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from ..curriculum.packing import validate_conversation
from ..curriculum.types import Conversation
from ..errors import DatasetValidationError, IoFailure, UnparseableRecord
from .manifest import atomic_write_text

EXPORT_FORMATS = ("jsonl_chat", "sharegpt_json")


@dataclass(frozen=True)
class DatasetRecord:
    conversation: Conversation
    pipeline_version: str = __version__
    run_id: str = ""
    stage: str = "pack"

    def to_dict(self) -> dict:
        data = self.conversation.to_dict()
        data["pipeline_version"] = self.pipeline_version
        data["run_id"] = self.run_id
        data["stage"] = self.stage
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetRecord":
        return cls(
            conversation=Conversation.from_dict(data),
            pipeline_version=data.get("pipeline_version", ""),
            run_id=data.get("run_id", ""),
            stage=data.get("stage", ""),
        )


def dumps_line(data: dict) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_dataset(records: list[DatasetRecord], path: str | Path) -> None:
    text = "".join(dumps_line(record.to_dict()) + "\n" for record in records)
    atomic_write_text(path, text)


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(DatasetRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise UnparseableRecord(f"{path}:{lineno}: {exc}") from exc
    return records


def merge_datasets(paths: list[str | Path]) -> list[DatasetRecord]:
    """Concatenate datasets, keeping per-source order and source argument order.

    Colliding ids get a deterministic ``-N`` suffix (N >= 2), both records
    retained.
    """
    merged: list[DatasetRecord] = []
    seen: set[str] = set()
    for path in paths:
        for record in read_dataset(path):
            cid = record.conversation.id
            if cid in seen:
                n = 2
                while f"{cid}-{n}" in seen:
                    n += 1
                cid = f"{cid}-{n}"
                conversation = Conversation(
                    id=cid,
                    kind=record.conversation.kind,
                    turns=record.conversation.turns,
                    lineage=record.conversation.lineage,
                    difficulty_trace=record.conversation.difficulty_trace,
                )
                record = DatasetRecord(
                    conversation=conversation,
                    pipeline_version=record.pipeline_version,
                    run_id=record.run_id,
                    stage=record.stage,
                )
            seen.add(cid)
            merged.append(record)
    return merged


def _validate_for_export(records: list[DatasetRecord]) -> None:
    for record in records:
        verdict = validate_conversation(record.conversation)
        if not verdict.valid:
            raise DatasetValidationError(
                f"conversation {record.conversation.id}: {'; '.join(verdict.problems)}"
            )
        for turn in record.conversation.turns:
            try:
                turn.content.encode("utf-8")
            except UnicodeEncodeError as exc:
                raise DatasetValidationError(
                    f"conversation {record.conversation.id} has non-UTF8-encodable content: {exc}"
                ) from exc


def export_dataset(records: list[DatasetRecord], fmt: str, out_path: str | Path) -> Path:
    """Export as jsonl_chat (one record per line) or sharegpt_json (one array)."""
    if fmt not in EXPORT_FORMATS:
        raise ValueError(f"format must be one of {EXPORT_FORMATS}, got {fmt!r}")
    _validate_for_export(records)
    out_path = Path(out_path)
    try:
        if fmt == "jsonl_chat":
            write_dataset(records, out_path)
        else:
            payload = [
                {
                    "id": record.conversation.id,
                    "conversations": record.conversation.to_dict()["conversations"],
                }
                for record in records
            ]
            atomic_write_text(
                out_path,
                json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            )
    except OSError as exc:
        raise IoFailure(f"cannot write {out_path}: {exc}") from exc
    return out_path
