"""Contamination checks: embedding similarity scan and rephrase judging."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import EmbedderFailure, ForgeError, ZeroVector
from ..gateway import CompletionGateway
from ..synthesis.calls import StageSettings, call_parsed
from ..synthesis.parsing import parse_yes_no
from ..templates import TemplateSet
from .embedding import Embedder

HISTOGRAM_BUCKET_WIDTH = 0.1


@dataclass(frozen=True)
class TextSample:
    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"sample {self.id!r} has empty text")


def load_text_samples(path: str | Path) -> list[TextSample]:
    """JSONL with {id, text} per line."""
    samples = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        data = json.loads(line)
        samples.append(TextSample(id=str(data["id"]), text=data["text"]))
    return samples


@dataclass
class ContaminationReport:
    pair_scores: dict[str, float] = field(default_factory=dict)
    histogram: dict[str, int] = field(default_factory=dict)
    top_matches: tuple[tuple[str, str, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "pair_scores": {k: self.pair_scores[k] for k in sorted(self.pair_scores)},
            "histogram": {k: self.histogram[k] for k in sorted(self.histogram, key=float)},
            "top_matches": [
                {"train_id": t, "test_id": s, "score": score}
                for t, s, score in self.top_matches
            ],
        }


def _bucket_label(score: float) -> str:
    # Half-open buckets of width 0.1 over [-1, 1]; 1.0 lands in the top bucket.
    idx = math.floor(round(score / HISTOGRAM_BUCKET_WIDTH, 9))
    idx = max(-10, min(9, idx))
    return f"{idx * HISTOGRAM_BUCKET_WIDTH:.1f}"


def _embed_matrix(
    samples: Sequence[TextSample], embedder: Embedder, batch_size: int
) -> np.ndarray:
    rows: list[tuple[float, ...]] = []
    dim: int | None = None
    for start in range(0, len(samples), batch_size):
        batch = samples[start : start + batch_size]
        try:
            vectors = embedder.embed([s.text for s in batch])
        except ForgeError:
            raise
        except Exception as exc:
            raise EmbedderFailure(f"embedder raised: {exc}") from exc
        if len(vectors) != len(batch):
            raise EmbedderFailure(
                f"embedder returned {len(vectors)} vectors for {len(batch)} texts"
            )
        for sample, vector in zip(batch, vectors):
            if dim is None:
                dim = vector.dim
            elif vector.dim != dim:
                raise EmbedderFailure(
                    f"sample {sample.id!r} has dim {vector.dim}, expected {dim}"
                )
            rows.append(vector.values)
    matrix = np.asarray(rows, dtype=np.float64)
    if matrix.size:
        norms = np.linalg.norm(matrix, axis=1)
        zero_rows = np.flatnonzero(norms == 0.0)
        if zero_rows.size:
            raise ZeroVector(f"sample {samples[int(zero_rows[0])].id!r} embedded to a zero vector")
        matrix = matrix / norms[:, np.newaxis]
    return matrix


def similarity_matrix(
    train: Sequence[TextSample],
    test: Sequence[TextSample],
    embedder: Embedder,
    batch_size: int = 64,
) -> np.ndarray:
    """Cosine similarities, shape (len(test), len(train))."""
    train_matrix = _embed_matrix(train, embedder, batch_size)
    test_matrix = _embed_matrix(test, embedder, batch_size)
    if not len(train) or not len(test):
        return np.zeros((len(test), len(train)))
    return np.clip(test_matrix @ train_matrix.T, -1.0, 1.0)


def contamination_scan(
    train: Sequence[TextSample],
    test: Sequence[TextSample],
    embedder: Embedder,
    top_k: int = 10,
    batch_size: int = 64,
) -> ContaminationReport:
    """Per-test-sample max similarity over the train set, plus histogram and
    the k highest-scoring (train, test) pairs."""
    sims = similarity_matrix(train, test, embedder, batch_size)
    if not len(train) or not len(test):
        return ContaminationReport()

    pair_scores = {
        test[j].id: float(sims[j].max()) for j in range(len(test))
    }
    histogram: dict[str, int] = {}
    for score in pair_scores.values():
        label = _bucket_label(score)
        histogram[label] = histogram.get(label, 0) + 1

    flat = [
        (train[i].id, test[j].id, float(sims[j, i]))
        for j in range(len(test))
        for i in range(len(train))
    ]
    flat.sort(key=lambda row: (-row[2], row[0], row[1]))
    return ContaminationReport(
        pair_scores=pair_scores,
        histogram=histogram,
        top_matches=tuple(flat[:top_k]),
    )


@dataclass(frozen=True)
class RephraseReport:
    test_set_name: str
    rephrased_count: int
    percentage: float

    def to_dict(self) -> dict:
        return {
            "test_set_name": self.test_set_name,
            "rephrased_count": self.rephrased_count,
            "percentage": self.percentage,
        }


def detect_rephrase(
    gateway: CompletionGateway,
    templates: TemplateSet,
    train_text: str,
    test_text: str,
    settings: StageSettings,
) -> bool:
    """Judge whether one text rephrases the other.

    Identical texts short-circuit to True without a model call.
    """
    if not train_text.strip() or not test_text.strip():
        raise ValueError("both texts must be non-empty")
    if train_text.strip() == test_text.strip():
        return True
    prompt = templates.render("detect_rephrase", train_text=train_text, test_text=test_text)
    return call_parsed(
        gateway, prompt, settings, parse_yes_no, stage="detect_rephrase", judge=True
    )


def rephrase_report(
    gateway: CompletionGateway,
    templates: TemplateSet,
    train: Sequence[TextSample],
    test: Sequence[TextSample],
    embedder: Embedder,
    settings: StageSettings,
    test_set_name: str = "test",
    prefilter_top_k: int = 3,
    batch_size: int = 64,
) -> RephraseReport:
    """Count test samples judged as rephrases of some train sample.

    Candidate pairs are prefiltered to each test sample's top-k most similar
    train samples, bounding judge calls.
    """
    if prefilter_top_k < 1:
        raise ValueError("prefilter_top_k must be >= 1")
    if not train or not test:
        return RephraseReport(test_set_name=test_set_name, rephrased_count=0, percentage=0.0)
    sims = similarity_matrix(train, test, embedder, batch_size)
    rephrased = 0
    k = min(prefilter_top_k, len(train))
    for j, sample in enumerate(test):
        # Highest similarity first; ties broken by train order for determinism.
        candidates = sorted(range(len(train)), key=lambda i: (-sims[j, i], i))[:k]
        for i in candidates:
            if detect_rephrase(gateway, templates, train[i].text, sample.text, settings):
                rephrased += 1
                break
    return RephraseReport(
        test_set_name=test_set_name,
        rephrased_count=rephrased,
        percentage=100.0 * rephrased / len(test),
    )
