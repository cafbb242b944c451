from .contamination import (
    ContaminationReport,
    RephraseReport,
    TextSample,
    contamination_scan,
    detect_rephrase,
    load_text_samples,
    rephrase_report,
    similarity_matrix,
)
from .embedding import Embedder, EmbeddingVector, HashEmbedder, HttpEmbedder, cosine
from .reports import (
    write_contamination_report,
    write_rephrase_report,
    write_score_report,
    write_stats_report,
)
from .scoring import (
    LlmJudgeScorer,
    SampleScore,
    ScoreReport,
    Scorer,
    render_conversation,
    score_dataset,
    score_sample,
)
from .stats import DatasetStats, compute_stats, merge_stats
from .textstats import length_bucket, word_count

__all__ = [
    "ContaminationReport",
    "DatasetStats",
    "Embedder",
    "EmbeddingVector",
    "HashEmbedder",
    "HttpEmbedder",
    "LlmJudgeScorer",
    "RephraseReport",
    "SampleScore",
    "ScoreReport",
    "Scorer",
    "TextSample",
    "compute_stats",
    "contamination_scan",
    "cosine",
    "detect_rephrase",
    "length_bucket",
    "load_text_samples",
    "merge_stats",
    "render_conversation",
    "rephrase_report",
    "score_dataset",
    "score_sample",
    "similarity_matrix",
    "word_count",
    "write_contamination_report",
    "write_rephrase_report",
    "write_score_report",
    "write_stats_report",
]
