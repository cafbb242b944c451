"""Dataset statistics: per-kind counts, difficulty-degree counts, histograms.

Statistics are a single-pass fold. Partial stats merge associatively and
commutatively, so a scan can be sharded and recombined.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..curriculum.packing import validate_conversation
from ..curriculum.types import CONVERSATION_KINDS, Conversation
from ..errors import InvalidConversation
from .textstats import length_bucket, word_count

LENGTH_BUCKET_WORDS = 50


@dataclass
class DatasetStats:
    n_conversations: int = 0
    n_by_kind: dict[str, int] = field(default_factory=dict)
    dd_counts: dict[int, int] = field(default_factory=dict)
    total_exchanges: int = 0
    turn_histogram: dict[int, int] = field(default_factory=dict)
    instruction_length_histogram: dict[int, int] = field(default_factory=dict)
    response_length_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def avg_turns(self) -> float:
        """Average user-assistant exchanges per conversation."""
        if self.n_conversations == 0:
            return 0.0
        return self.total_exchanges / self.n_conversations

    @property
    def feedback_total(self) -> int:
        return self.n_by_kind.get("internal_feedback", 0) + self.n_by_kind.get(
            "external_feedback", 0
        )

    def to_dict(self) -> dict:
        return {
            "n_conversations": self.n_conversations,
            "n_by_kind": {kind: self.n_by_kind.get(kind, 0) for kind in CONVERSATION_KINDS},
            "feedback_total": self.feedback_total,
            "dd_counts": {str(dd): count for dd, count in sorted(self.dd_counts.items())},
            "total_exchanges": self.total_exchanges,
            "avg_turns": self.avg_turns,
            "turn_histogram": {str(k): v for k, v in sorted(self.turn_histogram.items())},
            "instruction_length_histogram": {
                str(k): v for k, v in sorted(self.instruction_length_histogram.items())
            },
            "response_length_histogram": {
                str(k): v for k, v in sorted(self.response_length_histogram.items())
            },
        }


def compute_stats(
    conversations: Iterable[Conversation], *, validate: bool = True
) -> DatasetStats:
    """Fold the dataset into a DatasetStats.

    Difficulty-degree counts aggregate difficulty_trace entries of
    easy-to-hard conversations; a "turn" is one user-assistant exchange.
    """
    stats = DatasetStats()
    kind_counts: Counter[str] = Counter()
    dd_counts: Counter[int] = Counter()
    turn_hist: Counter[int] = Counter()
    instr_hist: Counter[int] = Counter()
    resp_hist: Counter[int] = Counter()

    for conversation in conversations:
        if validate:
            verdict = validate_conversation(conversation)
            if not verdict.valid:
                raise InvalidConversation(
                    f"conversation {conversation.id}: {'; '.join(verdict.problems)}"
                )
        stats.n_conversations += 1
        kind_counts[conversation.kind] += 1
        exchanges = conversation.exchanges
        stats.total_exchanges += exchanges
        turn_hist[exchanges] += 1
        if conversation.kind == "easy_to_hard":
            for dd in conversation.difficulty_trace:
                dd_counts[dd] += 1
        for turn in conversation.turns:
            bucket = length_bucket(word_count(turn.content), LENGTH_BUCKET_WORDS)
            if turn.role == "user":
                instr_hist[bucket] += 1
            else:
                resp_hist[bucket] += 1

    stats.n_by_kind = dict(kind_counts)
    stats.dd_counts = dict(dd_counts)
    stats.turn_histogram = dict(turn_hist)
    stats.instruction_length_histogram = dict(instr_hist)
    stats.response_length_histogram = dict(resp_hist)
    return stats


def merge_stats(a: DatasetStats, b: DatasetStats) -> DatasetStats:
    """Combine two partial folds; associative and commutative."""

    def merged(x: dict, y: dict) -> dict:
        out = Counter(x)
        out.update(y)
        return dict(out)

    return DatasetStats(
        n_conversations=a.n_conversations + b.n_conversations,
        n_by_kind=merged(a.n_by_kind, b.n_by_kind),
        dd_counts=merged(a.dd_counts, b.dd_counts),
        total_exchanges=a.total_exchanges + b.total_exchanges,
        turn_histogram=merged(a.turn_histogram, b.turn_histogram),
        instruction_length_histogram=merged(
            a.instruction_length_histogram, b.instruction_length_histogram
        ),
        response_length_histogram=merged(
            a.response_length_histogram, b.response_length_histogram
        ),
    )
