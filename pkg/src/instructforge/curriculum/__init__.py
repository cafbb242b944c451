from .feedback import (
    ALL_SATISFIED_MARKER,
    CORRECTION_TEMPLATE,
    build_external_feedback,
    build_internal_feedback,
    judge_response,
)
from .packing import (
    ConversationVerdict,
    pack_easy_to_hard,
    pack_with_mode,
    validate_conversation,
)
from .types import (
    CONVERSATION_KINDS,
    PACKING_VARIANTS,
    Conversation,
    FeedbackQuad,
    PackingMode,
    Turn,
)

__all__ = [
    "ALL_SATISFIED_MARKER",
    "CONVERSATION_KINDS",
    "CORRECTION_TEMPLATE",
    "Conversation",
    "ConversationVerdict",
    "FeedbackQuad",
    "PACKING_VARIANTS",
    "PackingMode",
    "Turn",
    "build_external_feedback",
    "build_internal_feedback",
    "judge_response",
    "pack_easy_to_hard",
    "pack_with_mode",
    "validate_conversation",
]
