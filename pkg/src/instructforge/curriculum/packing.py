"""Pack instruction ladders into multi-turn conversations.

All packing operations are pure functions and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..errors import EmptyLadder, MissingResponse
from ..rng import shuffled_indices
from ..synthesis.types import InstructionLadder, LadderLevel
from .types import Conversation, PackingMode, Turn


def _ordered_levels(ladder: InstructionLadder) -> list[LadderLevel]:
    return sorted(ladder.levels, key=lambda level: level.difficulty)


def _require_responses(
    levels: list[LadderLevel], responses: Mapping[int, str], ref: str
) -> None:
    missing = [level.difficulty for level in levels if not responses.get(level.difficulty)]
    if missing:
        raise MissingResponse(f"ladder {ref}: no response for difficulty {missing}")


def _conversation(
    ladder: InstructionLadder,
    levels: list[LadderLevel],
    responses: Mapping[int, str],
    conversation_id: str,
) -> Conversation:
    turns: list[Turn] = []
    for level in levels:
        turns.append(Turn(role="user", content=level.text))
        turns.append(Turn(role="assistant", content=responses[level.difficulty]))
    return Conversation(
        id=conversation_id,
        kind="easy_to_hard",
        turns=tuple(turns),
        lineage={"seed_id": ladder.seed_id, "reframed_ref": ladder.reframed_ref},
        difficulty_trace=tuple(level.difficulty for level in levels),
    )


def pack_easy_to_hard(
    ladder: InstructionLadder,
    responses: Mapping[int, str],
    conversation_id: str | None = None,
) -> Conversation:
    """One multi-turn sample per ladder, levels in strictly ascending difficulty."""
    levels = _ordered_levels(ladder)
    if not levels:
        raise EmptyLadder(f"ladder {ladder.reframed_ref} has no levels to pack")
    _require_responses(levels, responses, ladder.reframed_ref)
    cid = conversation_id if conversation_id is not None else f"eth-{ladder.reframed_ref}"
    return _conversation(ladder, levels, responses, cid)


def pack_with_mode(
    ladder: InstructionLadder,
    responses: Mapping[int, str],
    mode: PackingMode,
    conversation_id: str | None = None,
) -> list[Conversation]:
    """Pack under an ordering/selection ablation.

    ascending reproduces :func:`pack_easy_to_hard`; descending reverses the
    level order; shuffled applies the seeded reference permutation; easy_only
    keeps levels with difficulty <= ceil(max/2) and hard_only keeps the rest;
    single_turn emits one two-turn conversation per level.
    """
    levels = _ordered_levels(ladder)
    if not levels:
        raise EmptyLadder(f"ladder {ladder.reframed_ref} has no levels to pack")
    _require_responses(levels, responses, ladder.reframed_ref)
    cid = conversation_id if conversation_id is not None else f"eth-{ladder.reframed_ref}"

    if mode.variant == "ascending":
        ordered = levels
    elif mode.variant == "descending":
        ordered = list(reversed(levels))
    elif mode.variant == "shuffled":
        assert mode.seed is not None
        permutation = shuffled_indices(len(levels), mode.seed)
        ordered = [levels[i] for i in permutation]
    elif mode.variant in ("easy_only", "hard_only"):
        max_dd = levels[-1].difficulty
        cut = (max_dd + 1) // 2  # ceil(max_dd / 2)
        if mode.variant == "easy_only":
            ordered = [level for level in levels if level.difficulty <= cut]
        else:
            ordered = [level for level in levels if level.difficulty > cut]
        if not ordered:
            return []
    elif mode.variant == "single_turn":
        return [
            _conversation(ladder, [level], responses, f"{cid}-d{level.difficulty}")
            for level in levels
        ]
    else:  # pragma: no cover - PackingMode validates variants
        raise AssertionError(mode.variant)

    return [_conversation(ladder, ordered, responses, cid)]


@dataclass(frozen=True)
class ConversationVerdict:
    valid: bool
    problems: tuple[str, ...] = ()


def validate_conversation(
    conversation: Conversation, mode: PackingMode | None = None
) -> ConversationVerdict:
    """Structural validation: alternating roles, even length, kind-specific shape."""
    problems: list[str] = []
    turns = conversation.turns
    if not turns:
        problems.append("conversation has no turns")
    if len(turns) % 2 != 0:
        problems.append(f"odd turn count {len(turns)}")
    for i, turn in enumerate(turns):
        expected = "user" if i % 2 == 0 else "assistant"
        if turn.role != expected:
            problems.append(f"turn {i} has role {turn.role}, expected {expected}")
            break
    if any(not turn.content for turn in turns):
        problems.append("empty turn content")

    kind = conversation.kind
    trace = conversation.difficulty_trace
    if kind == "easy_to_hard":
        user_turns = sum(1 for t in turns if t.role == "user")
        if len(trace) != user_turns:
            problems.append(
                f"difficulty_trace length {len(trace)} != user turn count {user_turns}"
            )
        if mode is not None and mode.variant == "ascending":
            if any(a >= b for a, b in zip(trace, trace[1:])):
                problems.append(f"difficulty_trace not strictly ascending: {list(trace)}")
    elif kind == "internal_feedback":
        if len(turns) != 2:
            problems.append(f"internal_feedback must have exactly 2 turns, has {len(turns)}")
        if trace:
            problems.append("feedback conversations carry no difficulty_trace")
    elif kind == "external_feedback":
        if len(turns) != 4:
            problems.append(f"external_feedback must have exactly 4 turns, has {len(turns)}")
        if trace:
            problems.append("feedback conversations carry no difficulty_trace")

    return ConversationVerdict(valid=not problems, problems=tuple(problems))
