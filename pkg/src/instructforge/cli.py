"""The ``forge`` command-line interface.

Exit codes: 0 success, 2 config error, 3 replay miss, 4 stage failure,
5 validation failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .analytics.contamination import contamination_scan, load_text_samples
from .analytics.embedding import HashEmbedder, HttpEmbedder
from .analytics.reports import write_contamination_report, write_stats_report
from .analytics.stats import compute_stats
from .errors import (
    ConfigError,
    DatasetValidationError,
    ForgeError,
    InvalidConversation,
    ReplayMiss,
    UnparseableRecord,
)
from .pipeline.config import load_config
from .pipeline.dataset import (
    EXPORT_FORMATS,
    export_dataset,
    merge_datasets,
    read_dataset,
    write_dataset,
)
from .pipeline.manifest import atomic_write_text
from .pipeline.runner import build_context, run_all, run_stage
from .pipeline.stages import STAGE_ORDER, load_structural_pool
from .synthesis.ops import load_accept_list, review_pool

EXIT_CONFIG = 2
EXIT_REPLAY_MISS = 3
EXIT_STAGE_FAILURE = 4
EXIT_VALIDATION = 5


def _exit_code(error: ForgeError) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, ReplayMiss):
        return EXIT_REPLAY_MISS
    if isinstance(error, (DatasetValidationError, InvalidConversation, UnparseableRecord)):
        return EXIT_VALIDATION
    return EXIT_STAGE_FAILURE


def forge_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ForgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_exit_code(exc))

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Run config TOML.")
@click.option("--mode", type=click.Choice(["live", "record", "replay"]), default=None,
              help="Override the gateway mode.")
@click.option("--concurrency", type=int, default=None, help="Worker parallelism within a stage.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, mode: str | None, concurrency: int | None):
    """Forge constraint-rich instruction-tuning datasets from seed queries."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["mode"] = mode
    ctx.obj["concurrency"] = concurrency


def _load_run_config(ctx: click.Context):
    config_path = ctx.obj.get("config_path")
    if not config_path:
        raise ConfigError("this command needs --config <path>")
    return load_config(config_path, mode=ctx.obj.get("mode"), concurrency=ctx.obj.get("concurrency"))


@main.command()
@click.option("--until", "stop_after", type=click.Choice(STAGE_ORDER), default=None,
              help="Stop after this stage completes.")
@click.pass_context
@forge_errors
def run(ctx: click.Context, stop_after: str | None):
    """Run the full stage graph (resumes where it left off)."""
    config = _load_run_config(ctx)
    run_dir = run_all(config, stop_after=stop_after)
    click.echo(f"run complete: {run_dir}")


@main.command()
@click.argument("name", type=click.Choice(STAGE_ORDER))
@click.pass_context
@forge_errors
def stage(ctx: click.Context, name: str):
    """Run a single stage (upstream stages must be complete)."""
    config = _load_run_config(ctx)
    manifest = run_stage(name, config)
    click.echo(
        f"stage {name}: done={manifest.count('done')} dropped={manifest.count('dropped')} "
        f"processed_this_run={len(manifest.processed_this_run)}"
    )


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for stats.json and histogram CSVs.")
@forge_errors
def stats(dataset: str, out_dir: str | None):
    """Compute dataset statistics for a packed JSONL dataset."""
    records = read_dataset(dataset)
    result = compute_stats([record.conversation for record in records])
    data = result.to_dict()
    click.echo(f"n_conversations: {data['n_conversations']}")
    for kind, count in data["n_by_kind"].items():
        click.echo(f"kind {kind}: {count}")
    click.echo(f"feedback_total: {data['feedback_total']}")
    for dd, count in data["dd_counts"].items():
        click.echo(f"DD {dd}: {count}")
    click.echo(f"avg_turns: {data['avg_turns']:.4f}")
    if out_dir:
        paths = write_stats_report(result, out_dir)
        click.echo(f"reports written under {Path(out_dir)} ({len(paths)} files)")


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Training texts, JSONL with {id, text}.")
@click.option("--test", "test_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Test texts, JSONL with {id, text}.")
@click.option("--embedder", "embedder_kind", type=click.Choice(["hash", "http"]), default="hash",
              help="hash = deterministic fixture embedder; http = remote endpoint.")
@click.option("--endpoint", default=None, help="Embedding endpoint URL (for --embedder http).")
@click.option("--top-k", "top_k", type=int, default=10, help="Top pairs to report.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for the contamination report.")
@forge_errors
def contamination(train_path: str, test_path: str, embedder_kind: str, endpoint: str | None,
                  top_k: int, out_dir: str | None):
    """Scan for train/test overlap via embedding cosine similarity."""
    if embedder_kind == "http":
        if not endpoint:
            raise ConfigError("--embedder http requires --endpoint")
        embedder = HttpEmbedder(endpoint)
    else:
        embedder = HashEmbedder()
    train = load_text_samples(train_path)
    test = load_text_samples(test_path)
    report = contamination_scan(train, test, embedder, top_k=top_k)
    scores = sorted(report.pair_scores.values())
    if scores:
        click.echo(f"test samples scanned: {len(scores)}")
        click.echo(f"max similarity: {scores[-1]:.4f}")
        click.echo(f"median similarity: {scores[len(scores) // 2]:.4f}")
    else:
        click.echo("nothing to scan (empty train or test set)")
    for train_id, test_id, score in report.top_matches[:5]:
        click.echo(f"  {score:.4f}  train={train_id}  test={test_id}")
    if out_dir:
        write_contamination_report(report, out_dir)
        click.echo(f"report written under {Path(out_dir)}")


@main.group()
def pool():
    """Structural-constraint pool management."""


@pool.command("synthesize")
@click.argument("seed_constraints", nargs=3)
@click.option("--target-count", type=int, default=40, help="Maximum candidates to keep.")
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@forge_errors
def pool_synthesize(ctx: click.Context, seed_constraints: tuple[str, str, str],
                    target_count: int, out_path: str):
    """Expand three seed format/numeric constraints into a candidate pool."""
    config = _load_run_config(ctx)
    context = build_context(config)
    candidates = context.client.synthesize_structural_pool(list(seed_constraints), target_count)
    _write_json(out_path, candidates.to_dict())
    click.echo(f"{len(candidates.entries)} candidates written to {out_path}")


@pool.command("review")
@click.argument("candidates_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("accept_list_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@forge_errors
def pool_review(candidates_path: str, accept_list_path: str, out_path: str):
    """Apply a reviewed accept-list to a candidate pool."""
    candidates = load_structural_pool(candidates_path)
    accepted = review_pool(candidates, load_accept_list(accept_list_path))
    _write_json(out_path, accepted.to_dict())
    click.echo(f"{len(accepted.entries)} constraints accepted into {out_path}")


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@forge_errors
def merge(inputs: tuple[str, ...], out_path: str):
    """Merge datasets, preserving order and de-duplicating conversation ids."""
    merged = merge_datasets(list(inputs))
    write_dataset(merged, out_path)
    click.echo(f"merged {len(inputs)} file(s) into {out_path} ({len(merged)} records)")


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["jsonl-chat", "sharegpt-json"]),
              default="jsonl-chat")
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@forge_errors
def export(dataset: str, fmt: str, out_path: str):
    """Export a dataset in a trainer-facing format."""
    records = read_dataset(dataset)
    internal_fmt = fmt.replace("-", "_")
    assert internal_fmt in EXPORT_FORMATS
    export_dataset(records, internal_fmt, out_path)
    click.echo(f"exported {len(records)} records to {out_path} ({fmt})")


def _write_json(path: str, data: dict) -> None:
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
