import json

import pytest
from click.testing import CliRunner

from corpus import build_reference_scale_conversations, write_e2e_workspace
from fakes import ScriptedProvider

from instructforge.cli import main
from instructforge.curriculum.types import Conversation, Turn
from instructforge.pipeline.config import load_config
from instructforge.pipeline.dataset import DatasetRecord, write_dataset
from instructforge.pipeline.runner import build_context, run_all


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config_path = write_e2e_workspace(root, run_id="cli", mode="record", out_name="out-rec")
    config = load_config(config_path)
    run_all(config, context=build_context(config, provider=ScriptedProvider()))
    return root


@pytest.fixture
def runner():
    return CliRunner()


def small_dataset(path):
    records = [
        DatasetRecord(
            conversation=Conversation(
                id=f"c{i}",
                kind="easy_to_hard",
                turns=(Turn("user", f"q{i}"), Turn("assistant", f"a{i}")),
                lineage={"seed_id": "s", "reframed_ref": "s/v1"},
                difficulty_trace=(1,),
            ),
            run_id="t",
        )
        for i in range(3)
    ]
    write_dataset(records, path)
    return records


def test_run_replay_exit_zero(cli_workspace, runner):
    config_path = write_e2e_workspace(
        cli_workspace, run_id="cli", mode="replay",
        cache_dir=cli_workspace / "fixtures", out_name="out-replay",
    )
    result = runner.invoke(main, ["--config", str(config_path), "run"])
    assert result.exit_code == 0, result.output
    assert "run complete" in result.output
    assert (cli_workspace / "out-replay" / "cli" / "dataset" / "dataset.jsonl").is_file()


def test_stage_command_requires_upstream(cli_workspace, runner):
    config_path = write_e2e_workspace(
        cli_workspace, run_id="cli2", mode="replay",
        cache_dir=cli_workspace / "fixtures", out_name="out-stagecmd",
    )
    result = runner.invoke(main, ["--config", str(config_path), "stage", "recombine"])
    assert result.exit_code == 4  # upstream incomplete -> stage failure
    ok = runner.invoke(main, ["--config", str(config_path), "stage", "reframe"])
    assert ok.exit_code == 0, ok.output
    assert "done=9" in ok.output


def test_missing_config_is_exit_2(runner):
    result = runner.invoke(main, ["run"])
    assert result.exit_code == 2


def test_bad_config_file_is_exit_2(runner, tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("this = is not : valid toml [")
    result = runner.invoke(main, ["--config", str(path), "run"])
    assert result.exit_code == 2


def test_replay_miss_is_exit_3(runner, tmp_path):
    config_path = write_e2e_workspace(tmp_path, run_id="m", mode="replay")
    result = runner.invoke(main, ["--config", str(config_path), "run"])
    assert result.exit_code == 3


def test_validation_failure_is_exit_5(runner, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("garbage line\n")
    result = runner.invoke(
        main, ["export", str(bad), "-o", str(tmp_path / "out.jsonl")]
    )
    assert result.exit_code == 5


def test_stats_command(cli_workspace, runner, tmp_path):
    dataset = cli_workspace / "out-rec" / "cli" / "dataset" / "dataset.jsonl"
    out_dir = tmp_path / "reports"
    result = runner.invoke(main, ["stats", str(dataset), "--out", str(out_dir)])
    assert result.exit_code == 0, result.output
    assert "n_conversations: 35" in result.output
    assert "kind easy_to_hard: 30" in result.output
    assert (out_dir / "stats.json").is_file()
    assert (out_dir / "turn_histogram.csv").read_text().startswith("exchanges,count")


def test_stats_reference_scale_dataset(runner, tmp_path):
    dataset_path = tmp_path / "reference.jsonl"
    records = [
        DatasetRecord(conversation=c, run_id="ref")
        for c in build_reference_scale_conversations()
    ]
    write_dataset(records, dataset_path)
    result = runner.invoke(main, ["stats", str(dataset_path)])
    assert result.exit_code == 0, result.output
    assert "n_conversations: 13606" in result.output
    assert "DD 1: 9167" in result.output
    assert "DD 5: 5017" in result.output
    assert "feedback_total: 3304" in result.output


def test_contamination_command(runner, tmp_path):
    train = tmp_path / "train.jsonl"
    test = tmp_path / "test.jsonl"
    train.write_text(
        json.dumps({"id": "tr1", "text": "the exact overlap"})
        + "\n"
        + json.dumps({"id": "tr2", "text": "something else"})
        + "\n"
    )
    test.write_text(json.dumps({"id": "te1", "text": "the exact overlap"}) + "\n")
    out_dir = tmp_path / "contamination"
    result = runner.invoke(
        main,
        ["contamination", "--train", str(train), "--test", str(test), "--out", str(out_dir)],
    )
    assert result.exit_code == 0, result.output
    assert "max similarity: 1.0000" in result.output
    report = json.loads((out_dir / "contamination.json").read_text())
    assert report["pair_scores"]["te1"] == pytest.approx(1.0, abs=1e-6)


def test_pool_synthesize_replayed(cli_workspace, runner, tmp_path):
    seeds = ["Use bullet points.", "Answer in 30 words.", "Use two sections."]
    config_path = write_e2e_workspace(
        cli_workspace, run_id="pool", mode="replay",
        cache_dir=cli_workspace / "fixtures", out_name="out-pool",
    )
    # Record the fixture through the library so the CLI can replay it.
    record_config = load_config(config_path, mode="record")
    context = build_context(record_config, provider=ScriptedProvider())
    context.client.synthesize_structural_pool(seeds, 10)

    candidates_path = tmp_path / "candidates.json"
    result = runner.invoke(
        main,
        ["--config", str(config_path), "pool", "synthesize", *seeds,
         "--target-count", "10", "-o", str(candidates_path)],
    )
    assert result.exit_code == 0, result.output
    candidates = json.loads(candidates_path.read_text())
    assert candidates["provenance"] == "synthesized"
    assert len(candidates["entries"]) == 5  # scripted output dedups one duplicate


def test_pool_review_pure(runner, tmp_path):
    candidates = {
        "provenance": "synthesized",
        "entries": [
            {"id": "sc-001", "text": "Use a table.", "kind": "format"},
            {"id": "sc-002", "text": "At most 50 words.", "kind": "numeric"},
        ],
    }
    candidates_path = tmp_path / "candidates.json"
    candidates_path.write_text(json.dumps(candidates))
    accept_path = tmp_path / "accept.txt"
    accept_path.write_text("# keep the numeric one\nsc-002\n")
    out_path = tmp_path / "accepted.json"
    result = runner.invoke(
        main, ["pool", "review", str(candidates_path), str(accept_path), "-o", str(out_path)]
    )
    assert result.exit_code == 0, result.output
    accepted = json.loads(out_path.read_text())
    assert accepted["provenance"] == "accepted"
    assert [e["id"] for e in accepted["entries"]] == ["sc-002"]

    accept_path.write_text("sc-404\n")
    result = runner.invoke(
        main, ["pool", "review", str(candidates_path), str(accept_path), "-o", str(out_path)]
    )
    assert result.exit_code == 4  # unknown constraint id


def test_merge_command(runner, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    small_dataset(a)
    small_dataset(b)
    out = tmp_path / "merged.jsonl"
    result = runner.invoke(main, ["merge", str(a), str(b), "-o", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert len(lines) == 6
    ids = [json.loads(line)["id"] for line in lines]
    assert len(set(ids)) == 6  # collisions re-suffixed


def test_export_command_formats(runner, tmp_path):
    dataset = tmp_path / "data.jsonl"
    small_dataset(dataset)
    out_jsonl = tmp_path / "export.jsonl"
    result = runner.invoke(main, ["export", str(dataset), "-o", str(out_jsonl)])
    assert result.exit_code == 0, result.output
    assert len(out_jsonl.read_text().splitlines()) == 3

    out_json = tmp_path / "export.json"
    result = runner.invoke(
        main,
        ["export", str(dataset), "--format", "sharegpt-json", "-o", str(out_json)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out_json.read_text())
    assert [entry["id"] for entry in payload] == ["c0", "c1", "c2"]
