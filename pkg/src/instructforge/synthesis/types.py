"""Domain types for the staged instruction-collection pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

POOL_PROVENANCES = ("seed", "synthesized", "accepted")
CONSTRAINT_KINDS = ("format", "numeric")

MIN_DIFFICULTY = 1
MAX_DIFFICULTY = 5


@dataclass(frozen=True)
class SeedQuery:
    id: str
    text: str
    source: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("seed id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"seed {self.id!r} has empty text")

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "source": self.source}

    @classmethod
    def from_dict(cls, data: dict) -> "SeedQuery":
        return cls(id=str(data["id"]), text=data["text"], source=data.get("source", ""))


@dataclass(frozen=True)
class ReframedQuery:
    seed_id: str
    variant_index: int
    text: str

    def __post_init__(self) -> None:
        if self.variant_index < 1:
            raise ValueError("variant_index starts at 1")
        if not self.text.strip():
            raise ValueError("reframed text must be non-empty")

    @property
    def ref(self) -> str:
        """Stable lineage id for this variant."""
        return f"{self.seed_id}/v{self.variant_index}"

    def to_dict(self) -> dict:
        return {"seed_id": self.seed_id, "variant_index": self.variant_index, "text": self.text}

    @classmethod
    def from_dict(cls, data: dict) -> "ReframedQuery":
        return cls(
            seed_id=data["seed_id"],
            variant_index=int(data["variant_index"]),
            text=data["text"],
        )


@dataclass(frozen=True)
class ConstraintCategory:
    name: str
    items: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if not self.name.strip():
            raise ValueError("category name must be non-empty")
        if not self.items:
            raise ValueError(f"category {self.name!r} has no items")
        if len(set(self.items)) != len(self.items):
            raise ValueError(f"category {self.name!r} has duplicate items")

    def to_dict(self) -> dict:
        return {"name": self.name, "items": list(self.items)}

    @classmethod
    def from_dict(cls, data: dict) -> "ConstraintCategory":
        return cls(name=data["name"], items=tuple(data["items"]))


@dataclass(frozen=True)
class ConstraintSet:
    reframed_ref: str
    categories: tuple[ConstraintCategory, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise ValueError("category names must be pairwise distinct within a set")

    def category(self, name: str) -> ConstraintCategory | None:
        for cat in self.categories:
            if cat.name == name:
                return cat
        return None

    def to_dict(self) -> dict:
        return {
            "reframed_ref": self.reframed_ref,
            "categories": [c.to_dict() for c in self.categories],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConstraintSet":
        return cls(
            reframed_ref=data["reframed_ref"],
            categories=tuple(ConstraintCategory.from_dict(c) for c in data["categories"]),
        )


@dataclass(frozen=True)
class LadderLevel:
    difficulty: int
    text: str
    applied: tuple[tuple[str, str], ...] = ()
    structural: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "applied", tuple(tuple(pair) for pair in self.applied))
        object.__setattr__(self, "structural", tuple(self.structural))
        if not self.text.strip():
            raise ValueError("level text must be non-empty")

    @property
    def applied_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.applied)

    @property
    def categories(self) -> frozenset[str]:
        return frozenset(cat for cat, _ in self.applied)

    def to_dict(self) -> dict:
        return {
            "difficulty": self.difficulty,
            "text": self.text,
            "applied": [list(pair) for pair in self.applied],
            "structural": list(self.structural),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LadderLevel":
        return cls(
            difficulty=int(data["difficulty"]),
            text=data["text"],
            applied=tuple((pair[0], pair[1]) for pair in data.get("applied", [])),
            structural=tuple(data.get("structural", [])),
        )


@dataclass(frozen=True)
class InstructionLadder:
    seed_id: str
    reframed_ref: str
    levels: tuple[LadderLevel, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))

    def level_at(self, difficulty: int) -> LadderLevel | None:
        for level in self.levels:
            if level.difficulty == difficulty:
                return level
        return None

    @property
    def max_difficulty(self) -> int:
        return max(level.difficulty for level in self.levels) if self.levels else 0

    def to_dict(self) -> dict:
        return {
            "seed_id": self.seed_id,
            "reframed_ref": self.reframed_ref,
            "levels": [level.to_dict() for level in self.levels],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InstructionLadder":
        return cls(
            seed_id=data["seed_id"],
            reframed_ref=data["reframed_ref"],
            levels=tuple(LadderLevel.from_dict(lv) for lv in data["levels"]),
        )


@dataclass(frozen=True)
class StructuralConstraint:
    id: str
    text: str
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"kind must be one of {CONSTRAINT_KINDS}, got {self.kind!r}")
        if not self.text.strip():
            raise ValueError("constraint text must be non-empty")

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "StructuralConstraint":
        return cls(id=data["id"], text=data["text"], kind=data["kind"])


@dataclass(frozen=True)
class StructuralConstraintPool:
    entries: tuple[StructuralConstraint, ...]
    provenance: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.provenance not in POOL_PROVENANCES:
            raise ValueError(
                f"provenance must be one of {POOL_PROVENANCES}, got {self.provenance!r}"
            )
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("pool entry ids must be unique")

    def to_dict(self) -> dict:
        return {"provenance": self.provenance, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "StructuralConstraintPool":
        return cls(
            entries=tuple(StructuralConstraint.from_dict(e) for e in data["entries"]),
            provenance=data["provenance"],
        )


@dataclass(frozen=True)
class FilterVerdict:
    keep: bool
    reason: str

    def __post_init__(self) -> None:
        if not self.keep and not self.reason.strip():
            raise ValueError("a rejecting verdict must carry a reason")

    def to_dict(self) -> dict:
        return {"keep": self.keep, "reason": self.reason}

    @classmethod
    def from_dict(cls, data: dict) -> "FilterVerdict":
        return cls(keep=bool(data["keep"]), reason=data.get("reason", ""))
