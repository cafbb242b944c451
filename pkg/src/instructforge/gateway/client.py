"""Provider-agnostic chat-completion gateway.

One front door for every model call in the pipeline: rate limiting, retry
with full-jitter exponential backoff, content-addressed caching, and three
modes:

- ``live``    — straight through to the provider, nothing cached.
- ``record``  — serve from the fixture store when possible; otherwise call the
                provider and persist the result before returning it.
- ``replay``  — fixtures only. The provider is never constructed, so no
                network access can occur; a missing fixture is a ReplayMiss.
"""

from __future__ import annotations

import os
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol

import requests

from ..errors import GatewayError, ReplayMiss, RetriesExhausted
from .cache import FixtureStore, cache_key
from .ratelimit import Clock, SlidingWindowLimiter, SystemClock
from .types import CompletionRequest, CompletionResult, GatewayConfig


class TransientProviderError(Exception):
    """Retryable transport/provider failure (timeouts, 429, 5xx)."""


class ProviderError(Exception):
    """Non-retryable provider failure (auth, bad request, malformed body)."""


class Provider(Protocol):
    """Upstream chat-completion transport."""

    def send(self, request: CompletionRequest) -> CompletionResult: ...


class HttpChatProvider:
    """POSTs OpenAI-style chat payloads to a configurable endpoint.

    The bearer token is read from the environment variable named by
    ``credential_ref`` at call time — never from configuration files.
    """

    def __init__(
        self,
        endpoint: str,
        credential_ref: str,
        timeout: float = 120.0,
        session: requests.Session | None = None,
    ):
        self._endpoint = endpoint
        self._credential_ref = credential_ref
        self._timeout = timeout
        self._session = session if session is not None else requests.Session()

    def send(self, request: CompletionRequest) -> CompletionResult:
        secret = os.environ.get(self._credential_ref, "")
        if not secret:
            raise ProviderError(
                f"credential environment variable {self._credential_ref!r} is not set"
            )
        body = {
            "model": request.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = self._session.post(
                self._endpoint,
                json=body,
                headers={"Authorization": f"Bearer {secret}"},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise TransientProviderError(f"transport failure: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientProviderError(f"provider returned HTTP {response.status_code}")
        if response.status_code >= 400:
            raise ProviderError(f"provider returned HTTP {response.status_code}: {response.text[:200]}")
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        usage = data.get("usage", {}) or {}
        meta = {k: data[k] for k in ("id", "model", "created") if k in data}
        return CompletionResult(
            content=content,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            cached=False,
            provider_meta=meta,
        )


class CompletionGateway:
    """Thread-safe completion client shared by all pipeline workers.

    Shared mutable state is limited to the rate limiter, the fixture store,
    and the per-key in-flight locks; each serializes internally, so callers
    may invoke :meth:`complete` from any number of concurrent tasks.
    """

    def __init__(
        self,
        config: GatewayConfig,
        provider: Provider | None = None,
        clock: Clock | None = None,
        jitter_rng: random.Random | None = None,
    ):
        self._config = config
        self._store = FixtureStore(config.cache_dir)
        self._clock = clock if clock is not None else SystemClock()
        self._limiter = SlidingWindowLimiter(config.requests_per_minute, self._clock)
        self._jitter = jitter_rng if jitter_rng is not None else random.Random()
        if config.mode == "replay":
            # Hard guarantee: replay can never touch the network.
            self._provider: Provider | None = None
        elif provider is not None:
            self._provider = provider
        else:
            self._provider = HttpChatProvider(config.endpoint, config.credential_ref)
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()

    @property
    def mode(self) -> str:
        return self._config.mode

    def complete(self, request: CompletionRequest) -> CompletionResult:
        key = cache_key(request)
        mode = self._config.mode
        if mode == "replay":
            hit = self._store.load(key)
            if hit is None:
                raise ReplayMiss(key, request.stage_tag)
            return hit
        if mode == "record":
            # Serialize concurrent identical requests so at most one upstream
            # call happens per cache lifetime.
            with self._lock_for(key):
                hit = self._store.load(key)
                if hit is not None:
                    return hit
                result = self._call_upstream(request)
                self._store.store(key, request, result)
                return result
        return self._call_upstream(request)

    def batch_complete(
        self,
        requests_: list[CompletionRequest],
        max_in_flight: int,
    ) -> list[CompletionResult | GatewayError]:
        """Complete a batch with bounded parallelism.

        Results align positionally with the inputs; a failed item carries its
        GatewayError in place rather than aborting the batch.
        """
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if not requests_:
            return []

        def one(request: CompletionRequest) -> CompletionResult | GatewayError:
            try:
                return self.complete(request)
            except GatewayError as exc:
                return exc

        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            return list(pool.map(one, requests_))

    def _lock_for(self, key: str) -> threading.Lock:
        with self._key_locks_guard:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def _call_upstream(self, request: CompletionRequest) -> CompletionResult:
        assert self._provider is not None
        attempts = self._config.max_retries + 1
        last: Exception | None = None
        for attempt in range(attempts):
            self._limiter.acquire()
            try:
                return self._provider.send(request)
            except TransientProviderError as exc:
                last = exc
                if attempt + 1 >= attempts:
                    break
                cap = self._config.backoff_base_ms * (2**attempt) / 1000.0
                self._clock.sleep(self._jitter.uniform(0.0, cap))
            except ProviderError as exc:
                # Not retryable; surface as an exhausted call immediately.
                raise RetriesExhausted(request.stage_tag, attempt + 1, exc) from exc
        raise RetriesExhausted(request.stage_tag, attempts, last)
