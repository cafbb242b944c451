"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes, so new exceptions should subclass the
closest existing family rather than ForgeError directly.
"""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigError(ForgeError):
    """Bad, missing, or inconsistent configuration."""


class TemplateError(ConfigError):
    """Prompt template missing or rendered with unresolved placeholders."""


class ConfigHashMismatch(ConfigError):
    """Stage-relevant config changed since the manifest was written; refusing to
    resume silently."""


# --- gateway ---------------------------------------------------------------

class GatewayError(ForgeError):
    """Base class for completion-gateway failures."""


class ReplayMiss(GatewayError):
    """No recorded fixture for this request; the fixture set has a gap."""

    def __init__(self, key: str, stage_tag: str = "", record_id: str = ""):
        self.key = key
        self.stage_tag = stage_tag
        self.record_id = record_id
        detail = f"no fixture for cache key {key}"
        if stage_tag:
            detail += f" (stage {stage_tag})"
        if record_id:
            detail += f" (record {record_id})"
        super().__init__(detail)


class RetriesExhausted(GatewayError):
    """Transport/provider failure persisted through every allowed attempt."""

    def __init__(self, stage_tag: str, attempts: int, cause: Exception | None = None):
        self.stage_tag = stage_tag
        self.attempts = attempts
        self.cause = cause
        detail = f"provider call failed after {attempts} attempt(s)"
        if stage_tag:
            detail += f" (stage {stage_tag})"
        if cause is not None:
            detail += f": {cause}"
        super().__init__(detail)


# --- model-output contracts -------------------------------------------------

class ModelOutputError(ForgeError):
    """The model's output broke the stage's output contract.

    Operations re-prompt once on these; a second failure drops the record.
    """


class MalformedModelOutput(ModelOutputError):
    """Output could not be parsed under the format the prompt demanded."""

    def __init__(self, reason: str, raw: str = ""):
        self.reason = reason
        self.raw = raw
        super().__init__(reason)


class TooFewVariants(ModelOutputError):
    """Reframing produced fewer distinct variants than required."""


class EmptyConstraintSet(ModelOutputError):
    """Constraint generation yielded no categories, or a category too thin to use."""


class LadderInvariantViolation(ModelOutputError):
    """A produced instruction ladder violates the ladder invariants."""


class MissingAdherenceSection(ModelOutputError):
    """A response requested with explicit adherence lacks the adherence section."""


# --- synthesis / curriculum -------------------------------------------------

class UnknownConstraintId(ForgeError):
    """Accept-list references a constraint id that is not among the candidates."""


class MissingResponse(ForgeError):
    """A ladder level has no generated response to pack."""


class EmptyLadder(ForgeError):
    """Packing was asked to operate on a ladder with no levels."""


class IncompleteQuad(ForgeError):
    """External-feedback quad has an empty field."""


class InvalidConversation(ForgeError):
    """A conversation failed structural validation."""


# --- analytics ----------------------------------------------------------------

class DimensionMismatch(ForgeError):
    """Embedding vectors of different dimensionality were combined."""


class ZeroVector(ForgeError):
    """Cosine similarity is undefined for an all-zero vector."""


class EmbedderFailure(ForgeError):
    """The embedding backend failed or returned an unusable payload."""


class ScorerFailure(ForgeError):
    """The quality/complexity scorer failed on a sample."""


# --- pipeline ----------------------------------------------------------------

class UpstreamIncomplete(ForgeError):
    """A stage was started before its upstream stage finished."""


class UnparseableRecord(ForgeError):
    """A dataset line could not be parsed as a DatasetRecord."""


class DatasetValidationError(ForgeError):
    """Dataset content failed validation prior to export."""


class IoFailure(ForgeError):
    """Filesystem error while writing pipeline outputs."""
