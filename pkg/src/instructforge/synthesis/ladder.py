"""Instruction-ladder invariants and validation.

A ladder is the family of constrained instructions derived from one reframed
query, one level per difficulty degree. Generation-time ladders obey the
strict step rule (each level adds 1-2 new categories and 2-3 new items over
its predecessor); ladders that have been thinned by the conflict filter keep
the superset and monotonicity invariants but may take bigger steps, which is
what ``strict_steps=False`` admits.
"""

from __future__ import annotations

from ..errors import LadderInvariantViolation
from .types import (
    MAX_DIFFICULTY,
    MIN_DIFFICULTY,
    ConstraintSet,
    InstructionLadder,
    LadderLevel,
)

FIRST_LEVEL_CATEGORIES = (1, 2)
FIRST_LEVEL_ITEMS = (2, 3)
STEP_CATEGORIES = (1, 2)
STEP_ITEMS = (2, 3)


def validate_ladder(
    ladder: InstructionLadder,
    *,
    source: ConstraintSet | None = None,
    strict_steps: bool = True,
    max_difficulty: int = MAX_DIFFICULTY,
) -> None:
    """Raise LadderInvariantViolation unless the ladder holds every invariant.

    With ``source`` given, applied pairs must reference categories and items
    present in that constraint set.
    """
    levels = ladder.levels
    if not levels:
        raise LadderInvariantViolation(f"ladder {ladder.reframed_ref}: no levels")
    if len(levels) > max_difficulty:
        raise LadderInvariantViolation(
            f"ladder {ladder.reframed_ref}: {len(levels)} levels exceeds {max_difficulty}"
        )
    for level in levels:
        if not MIN_DIFFICULTY <= level.difficulty <= max_difficulty:
            raise LadderInvariantViolation(
                f"ladder {ladder.reframed_ref}: difficulty {level.difficulty} outside "
                f"[{MIN_DIFFICULTY}, {max_difficulty}]"
            )
    for earlier, later in zip(levels, levels[1:]):
        if later.difficulty <= earlier.difficulty:
            raise LadderInvariantViolation(
                f"ladder {ladder.reframed_ref}: difficulty sequence not strictly increasing "
                f"({earlier.difficulty} then {later.difficulty})"
            )
    for level in levels:
        check_level_embedding(ladder.reframed_ref, level)
        if source is not None:
            _check_source(ladder.reframed_ref, level, source)
    if strict_steps:
        _check_steps(ladder)
    else:
        for earlier, later in zip(levels, levels[1:]):
            if not earlier.applied_set < later.applied_set:
                raise LadderInvariantViolation(
                    f"ladder {ladder.reframed_ref}: level {later.difficulty} does not strictly "
                    f"extend level {earlier.difficulty}"
                )


def _check_steps(ladder: InstructionLadder) -> None:
    first = ladder.levels[0]
    if not FIRST_LEVEL_CATEGORIES[0] <= len(first.categories) <= FIRST_LEVEL_CATEGORIES[1]:
        raise LadderInvariantViolation(
            f"ladder {ladder.reframed_ref}: first level uses {len(first.categories)} categories, "
            f"expected {FIRST_LEVEL_CATEGORIES[0]}-{FIRST_LEVEL_CATEGORIES[1]}"
        )
    if not FIRST_LEVEL_ITEMS[0] <= len(first.applied_set) <= FIRST_LEVEL_ITEMS[1]:
        raise LadderInvariantViolation(
            f"ladder {ladder.reframed_ref}: first level applies {len(first.applied_set)} items, "
            f"expected {FIRST_LEVEL_ITEMS[0]}-{FIRST_LEVEL_ITEMS[1]}"
        )
    for earlier, later in zip(ladder.levels, ladder.levels[1:]):
        if not earlier.applied_set < later.applied_set:
            raise LadderInvariantViolation(
                f"ladder {ladder.reframed_ref}: level {later.difficulty} drops constraints of "
                f"level {earlier.difficulty}"
            )
        new_items = later.applied_set - earlier.applied_set
        new_categories = later.categories - earlier.categories
        if not STEP_CATEGORIES[0] <= len(new_categories) <= STEP_CATEGORIES[1]:
            raise LadderInvariantViolation(
                f"ladder {ladder.reframed_ref}: step to level {later.difficulty} adds "
                f"{len(new_categories)} categories, expected {STEP_CATEGORIES[0]}-{STEP_CATEGORIES[1]}"
            )
        if not STEP_ITEMS[0] <= len(new_items) <= STEP_ITEMS[1]:
            raise LadderInvariantViolation(
                f"ladder {ladder.reframed_ref}: step to level {later.difficulty} adds "
                f"{len(new_items)} items, expected {STEP_ITEMS[0]}-{STEP_ITEMS[1]}"
            )


def check_level_embedding(ref: str, level: LadderLevel) -> None:
    """A level's text must state every applied item and structural constraint."""
    for _, item in level.applied:
        if item not in level.text:
            raise LadderInvariantViolation(
                f"ladder {ref}: level {level.difficulty} text does not state item {item!r}"
            )
    for constraint in level.structural:
        if constraint not in level.text:
            raise LadderInvariantViolation(
                f"ladder {ref}: level {level.difficulty} text does not state structural "
                f"constraint {constraint!r}"
            )


def _check_source(ref: str, level: LadderLevel, source: ConstraintSet) -> None:
    for cat_name, item in level.applied:
        category = source.category(cat_name)
        if category is None:
            raise LadderInvariantViolation(
                f"ladder {ref}: level {level.difficulty} applies unknown category {cat_name!r}"
            )
        if item not in category.items:
            raise LadderInvariantViolation(
                f"ladder {ref}: level {level.difficulty} applies unknown item {item!r} "
                f"under {cat_name!r}"
            )


def relabel_contiguous(ladder: InstructionLadder) -> InstructionLadder:
    """Re-index difficulties to 1..k, preserving level order.

    Used after the conflict filter removes levels so surviving difficulty
    labels stay contiguous from 1.
    """
    levels = tuple(
        LadderLevel(
            difficulty=i + 1,
            text=level.text,
            applied=level.applied,
            structural=level.structural,
        )
        for i, level in enumerate(ladder.levels)
    )
    return InstructionLadder(seed_id=ladder.seed_id, reframed_ref=ladder.reframed_ref, levels=levels)
