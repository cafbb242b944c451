"""Pluggable quality/complexity scoring over packed conversations."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from ..curriculum.types import Conversation
from ..errors import ForgeError, MalformedModelOutput, ScorerFailure
from ..gateway import CompletionGateway
from ..synthesis.calls import StageSettings, call_parsed
from ..templates import TemplateSet

_SCORE_LINE = re.compile(r"(?im)^\s*(complexity|quality)\s*:\s*(-?\d+(?:\.\d+)?)\s*$")


@dataclass(frozen=True)
class SampleScore:
    complexity: float
    quality: float


class Scorer(Protocol):
    """Any service mapping rendered sample text to a complexity/quality pair."""

    def score(self, text: str) -> SampleScore: ...


def render_conversation(conversation: Conversation) -> str:
    return "\n".join(f"{turn.role}: {turn.content}" for turn in conversation.turns)


class LlmJudgeScorer:
    """Default scorer backed by a chat model judging on a declared 1..N scale."""

    def __init__(
        self,
        gateway: CompletionGateway,
        templates: TemplateSet,
        settings: StageSettings,
        scale: tuple[float, float] = (1.0, 10.0),
    ):
        self._gateway = gateway
        self._templates = templates
        self._settings = settings
        self.scale = scale

    def score(self, text: str) -> SampleScore:
        prompt = self._templates.render(
            "score_sample",
            conversation=text,
            scale_min=int(self.scale[0]),
            scale_max=int(self.scale[1]),
        )

        def parse(content: str) -> SampleScore:
            found = {m.group(1).lower(): float(m.group(2)) for m in _SCORE_LINE.finditer(content)}
            if "complexity" not in found or "quality" not in found:
                raise MalformedModelOutput("missing complexity/quality lines", raw=content)
            low, high = self.scale
            for name, value in found.items():
                if not low <= value <= high:
                    raise MalformedModelOutput(
                        f"{name} score {value} outside declared scale [{low}, {high}]",
                        raw=content,
                    )
            return SampleScore(complexity=found["complexity"], quality=found["quality"])

        return call_parsed(
            self._gateway, prompt, self._settings, parse, stage="score_sample", judge=True
        )


@dataclass
class ScoreReport:
    per_sample: dict[str, SampleScore] = field(default_factory=dict)
    summaries: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_sample": {
                cid: {"complexity": s.complexity, "quality": s.quality}
                for cid, s in sorted(self.per_sample.items())
            },
            "summaries": self.summaries,
        }


def score_sample(conversation: Conversation, scorer: Scorer) -> SampleScore:
    """Score one conversation, wrapping scorer errors."""
    try:
        return scorer.score(render_conversation(conversation))
    except ForgeError as exc:
        raise ScorerFailure(f"conversation {conversation.id}: {exc}") from exc
    except Exception as exc:
        raise ScorerFailure(f"conversation {conversation.id}: scorer raised {exc}") from exc


def score_dataset(conversations: Iterable[Conversation], scorer: Scorer) -> ScoreReport:
    """Score every conversation exactly once and summarize the distributions."""
    report = ScoreReport()
    for conversation in conversations:
        report.per_sample[conversation.id] = score_sample(conversation, scorer)
    for axis in ("complexity", "quality"):
        values = [getattr(score, axis) for score in report.per_sample.values()]
        if values:
            report.summaries[axis] = {
                "count": float(len(values)),
                "mean": sum(values) / len(values),
                "min": min(values),
                "max": max(values),
            }
        else:
            report.summaries[axis] = {"count": 0.0, "mean": 0.0, "min": 0.0, "max": 0.0}
    return report
