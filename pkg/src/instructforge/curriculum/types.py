"""Conversation-level types for the progressive learning scheme."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..synthesis.types import LadderLevel

CONVERSATION_KINDS = ("easy_to_hard", "internal_feedback", "external_feedback")
PACKING_VARIANTS = ("ascending", "descending", "shuffled", "easy_only", "hard_only", "single_turn")

TURN_ROLES = ("user", "assistant")
# Chat-schema role names used on disk.
_ROLE_TO_WIRE = {"user": "human", "assistant": "gpt"}
_WIRE_TO_ROLE = {"human": "user", "gpt": "assistant"}


@dataclass(frozen=True)
class Turn:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in TURN_ROLES:
            raise ValueError(f"turn role must be one of {TURN_ROLES}, got {self.role!r}")
        if not self.content:
            raise ValueError("turn content must be non-empty")


@dataclass(frozen=True)
class Conversation:
    id: str
    kind: str
    turns: tuple[Turn, ...]
    lineage: dict = field(default_factory=dict)
    difficulty_trace: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "turns", tuple(self.turns))
        object.__setattr__(self, "difficulty_trace", tuple(self.difficulty_trace))
        if self.kind not in CONVERSATION_KINDS:
            raise ValueError(f"kind must be one of {CONVERSATION_KINDS}, got {self.kind!r}")

    @property
    def exchanges(self) -> int:
        """Number of user-assistant pairs."""
        return len(self.turns) // 2

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "conversations": [
                {"from": _ROLE_TO_WIRE[t.role], "value": t.content} for t in self.turns
            ],
            "lineage": dict(self.lineage),
            "difficulty_trace": list(self.difficulty_trace),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Conversation":
        turns = tuple(
            Turn(role=_WIRE_TO_ROLE[t["from"]], content=t["value"])
            for t in data["conversations"]
        )
        return cls(
            id=data["id"],
            kind=data["kind"],
            turns=turns,
            lineage=dict(data.get("lineage", {})),
            difficulty_trace=tuple(data.get("difficulty_trace", [])),
        )


@dataclass(frozen=True)
class PackingMode:
    """Ordering/selection ablation applied when packing ladders."""

    variant: str
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.variant not in PACKING_VARIANTS:
            raise ValueError(f"variant must be one of {PACKING_VARIANTS}, got {self.variant!r}")
        if self.variant == "shuffled" and self.seed is None:
            raise ValueError("shuffled packing requires an explicit seed")

    @classmethod
    def parse(cls, text: str) -> "PackingMode":
        """Parse the CLI form: ascending | descending | shuffled:<seed> |
        easy-only | hard-only | single-turn."""
        name, _, seed_text = text.partition(":")
        variant = name.strip().replace("-", "_")
        if variant == "shuffled":
            try:
                return cls(variant="shuffled", seed=int(seed_text))
            except ValueError:
                raise ValueError(f"shuffled mode needs an integer seed, got {text!r}") from None
        if seed_text:
            raise ValueError(f"only shuffled takes a seed, got {text!r}")
        return cls(variant=variant)

    def __str__(self) -> str:
        if self.variant == "shuffled":
            return f"shuffled:{self.seed}"
        return self.variant.replace("_", "-")


@dataclass(frozen=True)
class FeedbackQuad:
    """The four-part external-feedback sample built around a hardest-level
    instruction."""

    instruction: LadderLevel
    model_response: str
    judgement: str
    reference_response: str
