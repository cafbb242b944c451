"""Content-addressed request cache: one JSON fixture file per request digest."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .types import CompletionRequest, CompletionResult


def _normalize_content(text: str) -> str:
    # Prompt files get edited by hand across platforms; fold line-ending and
    # trailing-whitespace noise so the same logical prompt keys the same fixture.
    return text.replace("\r\n", "\n").replace("\r", "\n").rstrip()


def canonical_payload(request: CompletionRequest) -> dict:
    """Key-relevant view of a request: fixed field order, normalized message
    content, stage_tag excluded."""
    return {
        "messages": [
            {"role": m.role, "content": _normalize_content(m.content)}
            for m in request.messages
        ],
        "model_id": request.model_id,
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }


def cache_key(request: CompletionRequest) -> str:
    """Hex sha256 digest of the canonical serialization of the request."""
    blob = json.dumps(
        canonical_payload(request), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FixtureStore:
    """Disk-backed fixtures under ``<cache_dir>/<first-2-hex>/<digest>.json``.

    Each file holds the full request and response so fixture diffs stay
    reviewable. Writes are atomic (tmp + rename); concurrent writers for the
    same key produce identical bytes, so the race is benign.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def load(self, key: str) -> CompletionResult | None:
        path = self.path_for(key)
        if not path.is_file():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return CompletionResult.from_dict(data["response"], cached=True)

    def store(self, key: str, request: CompletionRequest, result: CompletionResult) -> None:
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "key": key,
            "request": request.to_dict(),
            "response": result.to_dict(),
        }
        text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
