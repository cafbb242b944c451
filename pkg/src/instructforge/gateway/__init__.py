from .cache import FixtureStore, cache_key, canonical_payload
from .client import (
    CompletionGateway,
    HttpChatProvider,
    Provider,
    ProviderError,
    TransientProviderError,
)
from .ratelimit import Clock, SlidingWindowLimiter, SystemClock
from .types import ChatMessage, CompletionRequest, CompletionResult, GatewayConfig

__all__ = [
    "ChatMessage",
    "Clock",
    "CompletionGateway",
    "CompletionRequest",
    "CompletionResult",
    "FixtureStore",
    "GatewayConfig",
    "HttpChatProvider",
    "Provider",
    "ProviderError",
    "SlidingWindowLimiter",
    "SystemClock",
    "TransientProviderError",
    "cache_key",
    "canonical_payload",
]
