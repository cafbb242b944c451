from .calls import GENERATION_TEMPERATURE, JUDGE_TEMPERATURE, StageSettings
from .ladder import relabel_contiguous, validate_ladder
from .ops import (
    ADHERENCE_MARKER,
    DEFAULT_CONSTRAINT_EXEMPLARS,
    SynthesisClient,
    load_accept_list,
    plan_structural_assignments,
    review_pool,
)
from .types import (
    MAX_DIFFICULTY,
    MIN_DIFFICULTY,
    ConstraintCategory,
    ConstraintSet,
    FilterVerdict,
    InstructionLadder,
    LadderLevel,
    ReframedQuery,
    SeedQuery,
    StructuralConstraint,
    StructuralConstraintPool,
)

__all__ = [
    "ADHERENCE_MARKER",
    "ConstraintCategory",
    "ConstraintSet",
    "DEFAULT_CONSTRAINT_EXEMPLARS",
    "FilterVerdict",
    "GENERATION_TEMPERATURE",
    "InstructionLadder",
    "JUDGE_TEMPERATURE",
    "LadderLevel",
    "MAX_DIFFICULTY",
    "MIN_DIFFICULTY",
    "ReframedQuery",
    "SeedQuery",
    "StageSettings",
    "StructuralConstraint",
    "StructuralConstraintPool",
    "SynthesisClient",
    "load_accept_list",
    "plan_structural_assignments",
    "relabel_contiguous",
    "review_pool",
    "validate_ladder",
]
