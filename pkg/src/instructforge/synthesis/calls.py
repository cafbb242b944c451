"""Shared plumbing for operations that round-trip through the gateway."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, TypeVar

from ..errors import ModelOutputError
from ..gateway import ChatMessage, CompletionGateway, CompletionRequest

T = TypeVar("T")

# The paper-side pipeline never states decoding parameters; filters and judges
# run cold so verdicts stay as deterministic as the provider allows.
GENERATION_TEMPERATURE = 0.7
JUDGE_TEMPERATURE = 0.0

RETRY_NOTE = (
    "Your previous output did not follow the required format. "
    "Answer again and follow the output format exactly."
)


@dataclass(frozen=True)
class StageSettings:
    """Decoding settings shared by the model-backed operations."""

    model_id: str
    max_tokens: int = 1024
    generation_temperature: float = GENERATION_TEMPERATURE
    judge_temperature: float = JUDGE_TEMPERATURE


def build_request(
    prompt: str,
    settings: StageSettings,
    *,
    stage: str,
    judge: bool = False,
    retry_note: str | None = None,
) -> CompletionRequest:
    content = prompt if retry_note is None else f"{prompt}\n\n{retry_note}"
    return CompletionRequest(
        messages=(ChatMessage("user", content),),
        model_id=settings.model_id,
        temperature=settings.judge_temperature if judge else settings.generation_temperature,
        max_tokens=settings.max_tokens,
        stage_tag=stage,
    )


def call_parsed(
    gateway: CompletionGateway,
    prompt: str,
    settings: StageSettings,
    parse: Callable[[str], T],
    *,
    stage: str,
    judge: bool = False,
) -> T:
    """Run a prompt and parse the reply, re-prompting once on contract failure.

    The retry request carries a format reminder, so it has its own cache key
    and stays deterministic under replay. A second failure propagates; the
    caller decides whether to drop the record.
    """
    first = gateway.complete(build_request(prompt, settings, stage=stage, judge=judge))
    try:
        return parse(first.content)
    except ModelOutputError:
        second = gateway.complete(
            build_request(prompt, settings, stage=stage, judge=judge, retry_note=RETRY_NOTE)
        )
        return parse(second.content)
