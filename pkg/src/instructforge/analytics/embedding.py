"""Embedding vectors, cosine similarity, and the embedder interface."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from ..errors import DimensionMismatch, EmbedderFailure, ZeroVector


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if len(self.values) != self.dim:
            raise ValueError(f"vector has {len(self.values)} values, declared dim {self.dim}")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("vector values must be finite")

    @classmethod
    def of(cls, values: Sequence[float]) -> "EmbeddingVector":
        return cls(values=tuple(values), dim=len(values))


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| * |b|), clamped into [-1, 1]."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    norm_a = math.sqrt(sum(x * x for x in a.values))
    norm_b = math.sqrt(sum(y * y for y in b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine undefined for an all-zero vector")
    return max(-1.0, min(1.0, dot / (norm_a * norm_b)))


class Embedder(Protocol):
    """Maps a batch of texts to same-dimension vectors."""

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class HttpEmbedder:
    """Remote embedding endpoint: POST {"texts": [...]} -> {"vectors": [[...]]}.

    A sentence-embedding service (e.g. a 384-dim MiniLM server) plugs in here.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 120.0,
        session: requests.Session | None = None,
    ):
        self._endpoint = endpoint
        self._timeout = timeout
        self._session = session if session is not None else requests.Session()

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        try:
            response = self._session.post(
                self._endpoint, json={"texts": list(texts)}, timeout=self._timeout
            )
            response.raise_for_status()
            vectors = response.json()["vectors"]
        except (requests.RequestException, ValueError, KeyError, TypeError) as exc:
            raise EmbedderFailure(f"embedding endpoint failed: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbedderFailure(
                f"endpoint returned {len(vectors)} vectors for {len(texts)} texts"
            )
        return [EmbeddingVector.of(v) for v in vectors]


class HashEmbedder:
    """Deterministic text-to-vector map for fixtures and offline tests.

    Not a semantic embedding: identical texts map to identical vectors and
    everything is reproducible across platforms, which is all the replayable
    audit paths need.
    """

    def __init__(self, dim: int = 8):
        if not 1 <= dim <= 32:
            raise ValueError("dim must be in [1, 32]")
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        out = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            values = [(byte / 255.0) * 2.0 - 1.0 for byte in digest[: self.dim]]
            if all(v == 0.0 for v in values):
                values[0] = 1.0  # keep cosine defined
            out.append(EmbeddingVector.of(values))
        return out
