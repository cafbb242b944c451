"""Value types for the chat-completion gateway."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

ROLES = ("system", "user", "assistant")
MODES = ("live", "record", "replay")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}

    @classmethod
    def from_dict(cls, data: dict) -> "ChatMessage":
        return cls(role=data["role"], content=data["content"])


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    model_id: str
    temperature: float = 0.7
    max_tokens: int = 1024
    stage_tag: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("request needs at least one message")
        non_system = [m for m in self.messages if m.role != "system"]
        if not non_system or non_system[0].role != "user":
            raise ValueError("first non-system message must come from the user")
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    def to_dict(self) -> dict:
        return {
            "messages": [m.to_dict() for m in self.messages],
            "model_id": self.model_id,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "stage_tag": self.stage_tag,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompletionRequest":
        return cls(
            messages=tuple(ChatMessage.from_dict(m) for m in data["messages"]),
            model_id=data["model_id"],
            temperature=data["temperature"],
            max_tokens=data["max_tokens"],
            stage_tag=data.get("stage_tag", ""),
        )


@dataclass(frozen=True)
class CompletionResult:
    content: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cached: bool = False
    provider_meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "content": self.content,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "provider_meta": dict(self.provider_meta),
        }

    @classmethod
    def from_dict(cls, data: dict, cached: bool = False) -> "CompletionResult":
        return cls(
            content=data["content"],
            prompt_tokens=data.get("prompt_tokens", 0),
            completion_tokens=data.get("completion_tokens", 0),
            cached=cached,
            provider_meta=dict(data.get("provider_meta", {})),
        )


@dataclass(frozen=True)
class GatewayConfig:
    endpoint: str
    credential_ref: str
    requests_per_minute: int = 60
    max_retries: int = 3
    backoff_base_ms: int = 250
    mode: str = "replay"
    cache_dir: str = "fixtures"

    def __post_init__(self) -> None:
        if self.requests_per_minute < 1:
            raise ValueError("requests_per_minute must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backoff_base_ms < 1:
            raise ValueError("backoff_base_ms must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
