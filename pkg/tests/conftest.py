from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fakes import ScriptedProvider, SimulatedClock  # noqa: E402

from instructforge.gateway import CompletionGateway, GatewayConfig  # noqa: E402
from instructforge.synthesis.calls import StageSettings  # noqa: E402
from instructforge.templates import TemplateSet  # noqa: E402

MODEL_ID = "test-model"


def make_gateway(
    cache_dir,
    mode: str = "record",
    provider=None,
    requests_per_minute: int = 100000,
    max_retries: int = 2,
    clock=None,
    jitter_rng=None,
) -> CompletionGateway:
    config = GatewayConfig(
        endpoint="http://provider.invalid/v1/chat/completions",
        credential_ref="FORGE_TEST_SECRET",
        requests_per_minute=requests_per_minute,
        max_retries=max_retries,
        backoff_base_ms=10,
        mode=mode,
        cache_dir=str(cache_dir),
    )
    return CompletionGateway(config, provider=provider, clock=clock, jitter_rng=jitter_rng)


@pytest.fixture
def settings() -> StageSettings:
    return StageSettings(model_id=MODEL_ID, max_tokens=512)


@pytest.fixture
def templates() -> TemplateSet:
    return TemplateSet()


@pytest.fixture
def scripted_gateway(tmp_path):
    """Record-mode gateway backed by the deterministic scripted model."""
    return make_gateway(tmp_path / "fixtures", mode="record", provider=ScriptedProvider())


@pytest.fixture
def sim_clock():
    return SimulatedClock()


@pytest.fixture(scope="session")
def recorded_workspace(tmp_path_factory):
    """One record-mode pipeline run against the scripted model.

    Fixtures land in <root>/fixtures and golden outputs in <root>/out-golden;
    replay-mode tests point fresh run directories at the shared fixture set.
    """
    from corpus import write_e2e_workspace
    from instructforge.pipeline.config import load_config
    from instructforge.pipeline.runner import build_context, run_all

    root = tmp_path_factory.mktemp("e2e-recorded")
    config_path = write_e2e_workspace(root, mode="record", out_name="out-golden")
    config = load_config(config_path)
    context = build_context(config, provider=ScriptedProvider())
    run_dir = run_all(config, context=context)
    return {"root": root, "golden": run_dir, "cache": root / "fixtures"}


def replay_config(workspace, out_name, concurrency=1, run_id="e2e"):
    from corpus import write_e2e_workspace
    from instructforge.pipeline.config import load_config

    config_path = write_e2e_workspace(
        workspace["root"],
        run_id=run_id,
        mode="replay",
        concurrency=concurrency,
        cache_dir=workspace["cache"],
        out_name=out_name,
    )
    return load_config(config_path)
