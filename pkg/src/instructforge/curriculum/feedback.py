"""Process-feedback samples: internal adherence and external judged quads."""

from __future__ import annotations

import re

from ..errors import IncompleteQuad, MalformedModelOutput, MissingAdherenceSection
from ..gateway import CompletionGateway
from ..synthesis.calls import StageSettings, call_parsed
from ..synthesis.parsing import has_adherence_section
from ..synthesis.types import LadderLevel
from ..templates import TemplateSet
from .types import Conversation, FeedbackQuad, Turn

ALL_SATISFIED_MARKER = "All constraints satisfied."
_ALL_SATISFIED = re.compile(r"(?i)\ball constraints satisfied\b")

# The judgement turn reads as a natural correction request in the packed
# conversation.
CORRECTION_TEMPLATE = (
    "Here is feedback on your answer: {judgement}\n"
    "Please respond again following all constraints."
)


def build_internal_feedback(
    level: LadderLevel, adherent_response: str, conversation_id: str | None = None
) -> Conversation:
    """Two-turn sample whose response explicitly illustrates its own adherence."""
    if not level.applied and not level.structural:
        raise ValueError("internal feedback requires a level with constraints")
    if not has_adherence_section(adherent_response):
        raise MissingAdherenceSection("response lacks an adherence section")
    cid = conversation_id if conversation_id is not None else f"int-d{level.difficulty}"
    return Conversation(
        id=cid,
        kind="internal_feedback",
        turns=(
            Turn(role="user", content=level.text),
            Turn(role="assistant", content=adherent_response),
        ),
    )


def judge_response(
    gateway: CompletionGateway,
    templates: TemplateSet,
    level: LadderLevel,
    candidate_response: str,
    settings: StageSettings,
) -> str:
    """Judge a candidate response against the level's constraints.

    The judgement must either name at least one of the level's constraints or
    carry the explicit all-satisfied marker.
    """
    if not candidate_response.strip():
        raise ValueError("candidate response must be non-empty")
    constraint_names = [item for _, item in level.applied]
    constraint_names += [cat for cat, _ in level.applied]
    constraint_names += list(level.structural)
    listing = "\n".join(
        f"{cat}: {item}" for cat, item in level.applied
    ) or "(structural only)"
    if level.structural:
        listing += "\n" + "\n".join(f"structural: {text}" for text in level.structural)
    prompt = templates.render(
        "judge_response",
        instruction=level.text,
        constraints=listing,
        response=candidate_response,
    )

    def parse(content: str) -> str:
        text = content.strip()
        if not text:
            raise MalformedModelOutput("empty judgement")
        if _ALL_SATISFIED.search(text):
            return text
        lowered = text.lower()
        if any(name.lower() in lowered for name in constraint_names if name):
            return text
        raise MalformedModelOutput(
            "judgement neither names a violated constraint nor declares all satisfied",
            raw=content,
        )

    return call_parsed(gateway, prompt, settings, parse, stage="judge_response", judge=True)


def build_external_feedback(
    quad: FeedbackQuad, conversation_id: str | None = None
) -> Conversation:
    """Four-turn sample: instruction, failing response, judgement, reference."""
    missing = [
        name
        for name, value in (
            ("instruction", quad.instruction.text if quad.instruction else ""),
            ("model_response", quad.model_response),
            ("judgement", quad.judgement),
            ("reference_response", quad.reference_response),
        )
        if not (value or "").strip()
    ]
    if missing:
        raise IncompleteQuad(f"quad is missing: {', '.join(missing)}")
    cid = conversation_id if conversation_id is not None else f"ext-d{quad.instruction.difficulty}"
    return Conversation(
        id=cid,
        kind="external_feedback",
        turns=(
            Turn(role="user", content=quad.instruction.text),
            Turn(role="assistant", content=quad.model_response),
            Turn(role="user", content=CORRECTION_TEMPLATE.format(judgement=quad.judgement)),
            Turn(role="assistant", content=quad.reference_response),
        ),
    )
