import pytest

from fakes import MappingProvider, ScriptedProvider, StaticProvider
from conftest import make_gateway

from instructforge.curriculum import (
    Conversation,
    FeedbackQuad,
    PackingMode,
    Turn,
    build_external_feedback,
    build_internal_feedback,
    judge_response,
    pack_easy_to_hard,
    pack_with_mode,
    validate_conversation,
)
from instructforge.errors import (
    EmptyLadder,
    IncompleteQuad,
    MalformedModelOutput,
    MissingAdherenceSection,
    MissingResponse,
)
from instructforge.synthesis import InstructionLadder, LadderLevel

GOLDEN_SHUFFLE_5_SEED_42 = [1, 4, 2, 0, 3]


def ladder_with(difficulties):
    levels = []
    applied = ()
    for i, dd in enumerate(difficulties):
        applied = applied + ((f"C{i}", f"i{i}a"), (f"C{i}", f"i{i}b"))
        stated = "; ".join(f"{c}={it}" for c, it in applied)
        levels.append(LadderLevel(difficulty=dd, text=f"do level {dd}. {stated}", applied=applied))
    return InstructionLadder(seed_id="s", reframed_ref="s/v1", levels=tuple(levels))


def responses_for(ladder):
    return {level.difficulty: f"answer {level.difficulty}" for level in ladder.levels}


# -- pack_easy_to_hard -------------------------------------------------------------


def test_pack_three_levels():
    ladder = ladder_with([1, 2, 3])
    conversation = pack_easy_to_hard(ladder, responses_for(ladder))
    assert len(conversation.turns) == 6
    assert conversation.difficulty_trace == (1, 2, 3)
    assert conversation.kind == "easy_to_hard"
    assert [t.role for t in conversation.turns] == ["user", "assistant"] * 3
    assert conversation.lineage == {"seed_id": "s", "reframed_ref": "s/v1"}


def test_pack_single_level():
    ladder = ladder_with([1])
    conversation = pack_easy_to_hard(ladder, responses_for(ladder))
    assert len(conversation.turns) == 2
    assert conversation.difficulty_trace == (1,)


def test_pack_partial_ladder_keeps_ascending_trace():
    ladder = ladder_with([1, 3, 4])
    conversation = pack_easy_to_hard(ladder, responses_for(ladder))
    assert conversation.difficulty_trace == (1, 3, 4)


def test_pack_missing_response():
    ladder = ladder_with([1, 2])
    with pytest.raises(MissingResponse):
        pack_easy_to_hard(ladder, {1: "only one"})


def test_pack_empty_ladder():
    empty = InstructionLadder(seed_id="s", reframed_ref="s/v1", levels=())
    with pytest.raises(EmptyLadder):
        pack_easy_to_hard(empty, {})


# -- pack_with_mode ------------------------------------------------------------------


def test_mode_ascending_matches_easy_to_hard():
    ladder = ladder_with([1, 2, 3, 4, 5])
    reference = pack_easy_to_hard(ladder, responses_for(ladder))
    [packed] = pack_with_mode(ladder, responses_for(ladder), PackingMode("ascending"))
    assert packed == reference


def test_mode_descending_reverses():
    ladder = ladder_with([1, 2, 3, 4, 5])
    [packed] = pack_with_mode(ladder, responses_for(ladder), PackingMode("descending"))
    assert packed.difficulty_trace == (5, 4, 3, 2, 1)


def test_mode_single_turn_one_conversation_per_level():
    ladder = ladder_with([1, 2, 3, 4, 5])
    packed = pack_with_mode(ladder, responses_for(ladder), PackingMode("single_turn"))
    assert len(packed) == 5
    assert all(len(c.turns) == 2 for c in packed)
    assert [c.difficulty_trace for c in packed] == [(1,), (2,), (3,), (4,), (5,)]
    assert len({c.id for c in packed}) == 5


def test_mode_shuffled_matches_pinned_golden_permutation():
    ladder = ladder_with([1, 2, 3, 4, 5])
    [packed] = pack_with_mode(ladder, responses_for(ladder), PackingMode("shuffled", seed=42))
    expected = tuple(i + 1 for i in GOLDEN_SHUFFLE_5_SEED_42)
    assert packed.difficulty_trace == expected
    [again] = pack_with_mode(ladder, responses_for(ladder), PackingMode("shuffled", seed=42))
    assert again.difficulty_trace == expected


def test_mode_easy_hard_split_at_ceil_half():
    ladder = ladder_with([1, 2, 3, 4, 5])
    [easy] = pack_with_mode(ladder, responses_for(ladder), PackingMode("easy_only"))
    [hard] = pack_with_mode(ladder, responses_for(ladder), PackingMode("hard_only"))
    assert easy.difficulty_trace == (1, 2, 3)  # ceil(5/2) == 3
    assert hard.difficulty_trace == (4, 5)


def test_mode_easy_hard_partition_partial_ladder():
    ladder = ladder_with([1, 3, 4])
    [easy] = pack_with_mode(ladder, responses_for(ladder), PackingMode("easy_only"))
    [hard] = pack_with_mode(ladder, responses_for(ladder), PackingMode("hard_only"))
    assert easy.difficulty_trace == (1,)  # ceil(4/2) == 2
    assert hard.difficulty_trace == (3, 4)


def test_mode_easy_only_can_be_empty():
    ladder = ladder_with([4, 5])
    assert pack_with_mode(ladder, responses_for(ladder), PackingMode("easy_only")) == []


def test_packing_mode_parse_and_str():
    assert PackingMode.parse("ascending") == PackingMode("ascending")
    assert PackingMode.parse("shuffled:42") == PackingMode("shuffled", seed=42)
    assert PackingMode.parse("easy-only") == PackingMode("easy_only")
    assert str(PackingMode("shuffled", seed=7)) == "shuffled:7"
    assert str(PackingMode("single_turn")) == "single-turn"
    with pytest.raises(ValueError):
        PackingMode.parse("shuffled")
    with pytest.raises(ValueError):
        PackingMode.parse("ascending:3")
    with pytest.raises(ValueError):
        PackingMode("shuffled")


# -- internal feedback ----------------------------------------------------------------


ADHERENT = "The answer.\n\nConstraint adherence:\n- tone: satisfied."


def test_build_internal_feedback():
    level = ladder_with([1]).levels[0]
    conversation = build_internal_feedback(level, ADHERENT)
    assert conversation.kind == "internal_feedback"
    assert len(conversation.turns) == 2
    assert conversation.turns[0].content == level.text


def test_build_internal_feedback_rejects_missing_section():
    level = ladder_with([1]).levels[0]
    with pytest.raises(MissingAdherenceSection):
        build_internal_feedback(level, "a response without the section")


def test_build_internal_feedback_requires_constraints():
    bare = LadderLevel(difficulty=1, text="no constraints at all")
    with pytest.raises(ValueError):
        build_internal_feedback(bare, ADHERENT)


# -- judging ---------------------------------------------------------------------------


def test_judge_names_violated_constraint(tmp_path, templates, settings):
    gateway = make_gateway(tmp_path, "record", ScriptedProvider())
    level = ladder_with([1]).levels[0]
    judgement = judge_response(gateway, templates, level, "Quick answer: nope", settings)
    assert "i0a" in judgement


def test_judge_all_satisfied_marker(tmp_path, templates, settings):
    gateway = make_gateway(tmp_path, "record", ScriptedProvider())
    level = ladder_with([1]).levels[0]
    judgement = judge_response(gateway, templates, level, "A thorough compliant answer.", settings)
    assert "All constraints satisfied" in judgement


def test_judge_rejects_unanchored_judgement(tmp_path, templates, settings):
    gateway = make_gateway(
        tmp_path, "record", StaticProvider("It fails on some stuff, generally.")
    )
    level = ladder_with([1]).levels[0]
    with pytest.raises(MalformedModelOutput):
        judge_response(gateway, templates, level, "whatever", settings)


def test_judge_requires_candidate(tmp_path, templates, settings):
    gateway = make_gateway(tmp_path, "record", ScriptedProvider())
    level = ladder_with([1]).levels[0]
    with pytest.raises(ValueError):
        judge_response(gateway, templates, level, "   ", settings)


# -- external feedback --------------------------------------------------------------------


def quad():
    level = LadderLevel(
        difficulty=5,
        text="hardest instruction. C0=i0a; C0=i0b",
        applied=(("C0", "i0a"), ("C0", "i0b")),
    )
    return FeedbackQuad(
        instruction=level,
        model_response="a failing answer",
        judgement="1. C0: i0a - ignored.",
        reference_response="the corrected answer",
    )


def test_build_external_feedback_shape():
    conversation = build_external_feedback(quad())
    assert conversation.kind == "external_feedback"
    assert [t.role for t in conversation.turns] == ["user", "assistant", "user", "assistant"]
    assert conversation.turns[0].content.startswith("hardest instruction")
    assert conversation.turns[1].content == "a failing answer"
    assert "1. C0: i0a - ignored." in conversation.turns[2].content
    assert "respond again" in conversation.turns[2].content.lower()
    assert conversation.turns[3].content == "the corrected answer"


def test_build_external_feedback_missing_judgement():
    incomplete = FeedbackQuad(
        instruction=quad().instruction,
        model_response="resp",
        judgement="   ",
        reference_response="ref",
    )
    with pytest.raises(IncompleteQuad):
        build_external_feedback(incomplete)


# -- validate_conversation --------------------------------------------------------------


def test_validate_well_formed():
    ladder = ladder_with([1, 2])
    conversation = pack_easy_to_hard(ladder, responses_for(ladder))
    assert validate_conversation(conversation).valid
    assert validate_conversation(conversation, PackingMode("ascending")).valid


def test_validate_rejects_assistant_first():
    conversation = Conversation(
        id="x",
        kind="easy_to_hard",
        turns=(Turn("user", "hello"), Turn("assistant", "there")),
        difficulty_trace=(1,),
    )
    broken = Conversation(
        id="x",
        kind="easy_to_hard",
        turns=(conversation.turns[1], conversation.turns[0]),
        difficulty_trace=(1,),
    )
    verdict = validate_conversation(broken)
    assert not verdict.valid
    assert any("role" in p for p in verdict.problems)


def test_validate_rejects_six_turn_external():
    turns = tuple(
        Turn("user" if i % 2 == 0 else "assistant", f"t{i}") for i in range(6)
    )
    conversation = Conversation(id="x", kind="external_feedback", turns=turns)
    verdict = validate_conversation(conversation)
    assert not verdict.valid
    assert any("4 turns" in p for p in verdict.problems)


def test_validate_rejects_descending_trace_when_mode_ascending():
    ladder = ladder_with([1, 2, 3])
    [conversation] = pack_with_mode(
        ladder, responses_for(ladder), PackingMode("descending")
    )
    assert validate_conversation(conversation).valid
    assert not validate_conversation(conversation, PackingMode("ascending")).valid
