import json

import pytest

from conftest import replay_config
from corpus import run_tree_digest, write_e2e_workspace
from fakes import ScriptedProvider

from instructforge.curriculum.types import Conversation, Turn
from instructforge.errors import (
    ConfigError,
    ConfigHashMismatch,
    DatasetValidationError,
    ReplayMiss,
    UnparseableRecord,
    UpstreamIncomplete,
)
from instructforge.pipeline.config import load_config
from instructforge.pipeline.dataset import (
    DatasetRecord,
    export_dataset,
    merge_datasets,
    read_dataset,
    write_dataset,
)
from instructforge.pipeline.manifest import StageManifest
from instructforge.pipeline.runner import build_context, run_all, run_stage
from instructforge.pipeline.stages import Filter1Stage, get_stage, load_seeds


# -- config ------------------------------------------------------------------------


def test_load_config_round_trip(recorded_workspace):
    config = replay_config(recorded_workspace, "out-cfg")
    assert config.run_id == "e2e"
    assert config.gateway.mode == "replay"
    assert str(config.packing_mode) == "ascending"
    assert config.augment_sample_count == 4


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(
        'run_id = "x"\nseeds_path = "s"\noutput_dir = "o"\nmodel_id = "m"\n'
        'mystery_knob = 3\n[gateway]\nendpoint = "e"\ncredential_ref = "C"\n'
    )
    with pytest.raises(ConfigError) as excinfo:
        load_config(path)
    assert "mystery_knob" in str(excinfo.value)


def test_load_config_rejects_bad_packing_mode(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(
        'run_id = "x"\nseeds_path = "s"\noutput_dir = "o"\nmodel_id = "m"\n'
        'packing_mode = "sideways"\n[gateway]\nendpoint = "e"\ncredential_ref = "C"\n'
    )
    with pytest.raises(ConfigError):
        load_config(path)


def test_credential_env_override(tmp_path, monkeypatch):
    path = tmp_path / "cfg.toml"
    path.write_text(
        'run_id = "x"\nseeds_path = "s"\noutput_dir = "o"\nmodel_id = "m"\n'
        '[gateway]\nendpoint = "e"\ncredential_ref = "ORIGINAL_VAR"\n'
    )
    config = load_config(path)
    assert config.gateway.credential_ref == "ORIGINAL_VAR"
    monkeypatch.setenv("FORGE_CREDENTIAL", "sekrit")
    override = load_config(path)
    assert override.gateway.credential_ref == "FORGE_CREDENTIAL"


def test_mode_and_concurrency_overrides(recorded_workspace):
    config_path = write_e2e_workspace(
        recorded_workspace["root"], mode="record", out_name="out-ovr",
        cache_dir=recorded_workspace["cache"],
    )
    config = load_config(config_path, mode="replay", concurrency=5)
    assert config.gateway.mode == "replay"
    assert config.concurrency == 5


def test_load_seeds_rejects_duplicates_and_garbage(tmp_path):
    path = tmp_path / "seeds.jsonl"
    path.write_text('{"id": "a", "text": "x"}\n{"id": "a", "text": "y"}\n')
    with pytest.raises(ConfigError):
        load_seeds(path)
    path.write_text("not json\n")
    with pytest.raises(ConfigError):
        load_seeds(path)


# -- end-to-end determinism ---------------------------------------------------------


def test_replay_byte_identical_across_concurrency(recorded_workspace):
    serial = run_all(replay_config(recorded_workspace, "out-c1", concurrency=1))
    parallel = run_all(replay_config(recorded_workspace, "out-c8", concurrency=8))
    digest_serial = run_tree_digest(serial)
    assert digest_serial, "digest set must not be empty"
    assert digest_serial == run_tree_digest(parallel)


def test_replay_matches_record_outputs(recorded_workspace):
    replay_dir = run_all(replay_config(recorded_workspace, "out-vs-golden"))
    assert run_tree_digest(replay_dir) == run_tree_digest(recorded_workspace["golden"])


def test_dataset_shape_from_fixture_corpus(recorded_workspace):
    records = read_dataset(recorded_workspace["golden"] / "dataset" / "dataset.jsonl")
    kinds = {}
    for record in records:
        kinds[record.conversation.kind] = kinds.get(record.conversation.kind, 0) + 1
    assert kinds == {"easy_to_hard": 30, "internal_feedback": 3, "external_feedback": 2}
    # seed-03 is dropped wholesale; seed-04 loses variant 2.
    refs = {r.conversation.lineage["reframed_ref"] for r in records}
    assert not any(ref.startswith("seed-03/") for ref in refs)
    assert "seed-04/v2" not in refs
    assert all(record.run_id == "e2e" for record in records)
    assert all(record.pipeline_version for record in records)


def test_lineage_resolves_to_upstream_records(recorded_workspace):
    golden = recorded_workspace["golden"]
    surviving = {
        json.loads(line)["record_id"]
        for line in (golden / "filter1" / "records.jsonl").read_text().splitlines()
    }
    seed_ids = {
        json.loads(line)["seed_id"]
        for line in (golden / "reframe" / "records.jsonl").read_text().splitlines()
    }
    for record in read_dataset(golden / "dataset" / "dataset.jsonl"):
        lineage = record.conversation.lineage
        assert lineage["reframed_ref"] in surviving
        assert lineage["seed_id"] in seed_ids


def test_empty_seed_corpus_yields_empty_dataset(tmp_path):
    (tmp_path / "seeds.jsonl").write_text("")
    config_path = write_e2e_workspace(tmp_path, run_id="empty", mode="replay")
    config = load_config(config_path)
    run_dir = run_all(config)
    assert (run_dir / "dataset" / "dataset.jsonl").read_text() == ""
    stats = json.loads((run_dir / "reports" / "stats.json").read_text())
    assert stats["n_conversations"] == 0


def test_replay_with_missing_fixture_halts_naming_record(tmp_path):
    config_path = write_e2e_workspace(tmp_path, run_id="miss", mode="replay")
    config = load_config(config_path)  # empty fixture dir
    with pytest.raises(ReplayMiss) as excinfo:
        run_all(config)
    assert "seed-" in str(excinfo.value)  # names the record that missed


# -- resume / manifests ---------------------------------------------------------------


def test_rerun_after_completion_is_noop(recorded_workspace):
    config = replay_config(recorded_workspace, "out-noop")
    run_all(config)
    manifest_path = config.run_dir / "reframe" / "manifest.json"
    before = manifest_path.read_bytes()
    manifest = run_stage("reframe", config)
    assert manifest_path.read_bytes() == before
    assert manifest.is_complete


def test_upstream_incomplete(recorded_workspace):
    config = replay_config(recorded_workspace, "out-upstream")
    with pytest.raises(UpstreamIncomplete):
        run_stage("constraints", config)


def test_config_hash_mismatch_refuses_resume(recorded_workspace):
    import dataclasses

    config = replay_config(recorded_workspace, "out-cfghash")
    run_all(config, stop_after="reframe")
    changed = dataclasses.replace(config, reframe_min_variants=4)
    with pytest.raises(ConfigHashMismatch):
        run_stage("reframe", changed)


def test_input_change_restarts_stage(recorded_workspace, tmp_path):
    # Same config shape, new seeds file content: the stage must recompute.
    root = tmp_path
    config_path = write_e2e_workspace(
        root, run_id="inputchange", mode="record", cache_dir=recorded_workspace["cache"]
    )
    config = load_config(config_path)
    context = build_context(config, provider=ScriptedProvider())
    run_stage("reframe", config, context=context)
    first = (config.run_dir / "reframe" / "records.jsonl").read_text()

    seeds = root / "seeds.jsonl"
    seeds.write_text(seeds.read_text().replace("bakery", "tea house"))
    context = build_context(config, provider=ScriptedProvider())
    manifest = run_stage("reframe", config, context=context)
    second = (config.run_dir / "reframe" / "records.jsonl").read_text()
    assert manifest.is_complete
    assert "tea house" in second
    assert first != second


def test_kill_mid_stage_resume_processes_only_pending(recorded_workspace, monkeypatch):
    config = replay_config(recorded_workspace, "out-kill", concurrency=1)
    run_all(config, stop_after="reframe")

    stage = get_stage("filter1")
    real_process = Filter1Stage.process
    calls = {"n": 0}

    def bomb(self, ctx, record_id, state):
        if calls["n"] >= 7:
            raise KeyboardInterrupt("simulated kill")
        calls["n"] += 1
        return real_process(self, ctx, record_id, state)

    monkeypatch.setattr(Filter1Stage, "process", bomb)
    with pytest.raises(BaseException):
        run_stage("filter1", config)
    progress = (config.run_dir / "filter1" / "progress.jsonl").read_text().splitlines()
    done_before = len(progress)
    assert 0 < done_before < 31

    monkeypatch.setattr(Filter1Stage, "process", real_process)
    manifest = run_stage("filter1", config)
    assert manifest.is_complete
    assert len(manifest.processed_this_run) == 31 - done_before

    # Outputs equal an uninterrupted run's.
    clean = replay_config(recorded_workspace, "out-kill-clean", concurrency=1)
    run_all(clean, stop_after="filter1")
    interrupted = (config.run_dir / "filter1" / "records.jsonl").read_bytes()
    uninterrupted = (clean.run_dir / "filter1" / "records.jsonl").read_bytes()
    assert interrupted == uninterrupted


def test_kill_at_each_stage_boundary_resumes_identically(recorded_workspace):
    from instructforge.pipeline.stages import STAGE_ORDER

    golden_digest = run_tree_digest(recorded_workspace["golden"])
    for stage_name in STAGE_ORDER[:-1]:
        out_name = f"out-boundary-{stage_name}"
        config = replay_config(recorded_workspace, out_name)
        run_all(config, stop_after=stage_name)  # simulated kill between stages
        resumed_dir = run_all(config)
        assert run_tree_digest(resumed_dir) == golden_digest, stage_name


def test_manifest_round_trip(tmp_path):
    from instructforge.pipeline.manifest import RecordStatus

    manifest = StageManifest(
        stage="reframe",
        input_hash="aa",
        config_hash="bb",
        records={"r1": RecordStatus("done"), "r2": RecordStatus("dropped", "bad")},
        started_at="2026-01-01T00:00:00+00:00",
        finished_at="2026-01-01T00:00:05+00:00",
        processed_this_run=["r1", "r2"],
    )
    path = tmp_path / "manifest.json"
    manifest.save(path)
    loaded = StageManifest.load(path)
    assert loaded == manifest
    assert loaded.is_complete
    assert loaded.count("dropped") == 1


# -- merge / export -------------------------------------------------------------------


def _record(ident, kind="easy_to_hard", content="hello"):
    trace = (1,) if kind == "easy_to_hard" else ()
    conversation = Conversation(
        id=ident,
        kind=kind,
        turns=(Turn("user", content), Turn("assistant", f"re: {content}")),
        lineage={"seed_id": "s", "reframed_ref": "s/v1"},
        difficulty_trace=trace,
    )
    return DatasetRecord(conversation=conversation, run_id="t")


def test_merge_preserves_order_and_sources(tmp_path):
    a_path, b_path = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_dataset([_record("a1"), _record("a2"), _record("a3")], a_path)
    write_dataset([_record("b1"), _record("b2")], b_path)
    merged = merge_datasets([a_path, b_path])
    assert [r.conversation.id for r in merged] == ["a1", "a2", "a3", "b1", "b2"]


def test_merge_resuffixes_collisions(tmp_path):
    a_path, b_path = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_dataset([_record("x"), _record("y")], a_path)
    write_dataset([_record("x"), _record("x-2")], b_path)
    merged = merge_datasets([a_path, b_path])
    ids = [r.conversation.id for r in merged]
    assert ids == ["x", "y", "x-2", "x-2-2"]
    assert len(set(ids)) == 4


def test_merge_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("this is not a record\n")
    with pytest.raises(UnparseableRecord):
        merge_datasets([bad])


def test_export_round_trip_jsonl(tmp_path):
    records = [_record("r1"), _record("r2")]
    out = tmp_path / "exported.jsonl"
    export_dataset(records, "jsonl_chat", out)
    assert read_dataset(out) == records


def test_export_sharegpt_json(tmp_path):
    out = tmp_path / "export.json"
    export_dataset([_record("only")], "sharegpt_json", out)
    payload = json.loads(out.read_text())
    assert isinstance(payload, list) and len(payload) == 1
    assert payload[0]["id"] == "only"
    assert payload[0]["conversations"][0]["from"] == "human"


def test_export_rejects_unencodable_content(tmp_path):
    broken = _record("bad", content="lone surrogate: \udcff")
    with pytest.raises(DatasetValidationError):
        export_dataset([broken], "jsonl_chat", tmp_path / "never.jsonl")
    assert not (tmp_path / "never.jsonl").exists()


def test_dataset_record_round_trip():
    record = _record("rt", kind="internal_feedback")
    assert DatasetRecord.from_dict(record.to_dict()) == record
