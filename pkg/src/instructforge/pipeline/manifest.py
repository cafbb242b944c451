"""Stage manifests and atomic file IO for resumable runs."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

RECORD_STATES = ("done", "dropped", "pending", "failed")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def content_hash(paths: list[Path]) -> str:
    """sha256 over the concatenated bytes of the given files, in order."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(path.read_bytes() if path.is_file() else b"<absent>")
    return digest.hexdigest()


def dict_hash(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RecordStatus:
    state: str
    reason: str = ""

    def __post_init__(self) -> None:
        if self.state not in RECORD_STATES:
            raise ValueError(f"state must be one of {RECORD_STATES}, got {self.state!r}")


@dataclass
class StageManifest:
    stage: str
    input_hash: str
    config_hash: str
    records: dict[str, RecordStatus] = field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""
    processed_this_run: list[str] = field(default_factory=list)

    @property
    def is_complete(self) -> bool:
        return bool(self.finished_at) and not any(
            status.state in ("pending", "failed") for status in self.records.values()
        )

    def count(self, state: str) -> int:
        return sum(1 for status in self.records.values() if status.state == state)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_hash": self.input_hash,
            "config_hash": self.config_hash,
            "records": {
                rid: {"state": status.state, "reason": status.reason}
                for rid, status in sorted(self.records.items())
            },
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "processed_this_run": list(self.processed_this_run),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StageManifest":
        return cls(
            stage=data["stage"],
            input_hash=data["input_hash"],
            config_hash=data["config_hash"],
            records={
                rid: RecordStatus(state=entry["state"], reason=entry.get("reason", ""))
                for rid, entry in data.get("records", {}).items()
            },
            started_at=data.get("started_at", ""),
            finished_at=data.get("finished_at", ""),
            processed_this_run=list(data.get("processed_this_run", [])),
        )

    def save(self, path: str | Path) -> None:
        atomic_write_text(
            path, json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        )

    @classmethod
    def load(cls, path: str | Path) -> "StageManifest | None":
        path = Path(path)
        if not path.is_file():
            return None
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
