"""Resumable stage execution.

Per-record progress is appended (and flushed) to ``progress.jsonl`` as workers
finish, so a killed run resumes with exactly the previously pending records.
Final outputs — ``records.jsonl`` in record-id order and ``manifest.json`` —
are written atomically once the stage completes.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

from ..errors import (
    ConfigError,
    ConfigHashMismatch,
    ModelOutputError,
    ReplayMiss,
    UpstreamIncomplete,
)
from ..gateway import CompletionGateway
from ..templates import TemplateSet
from .config import RunConfig
from .dataset import dumps_line
from .manifest import (
    RecordStatus,
    StageManifest,
    atomic_write_text,
    content_hash,
    dict_hash,
    utc_now,
)
from .stages import STAGE_ORDER, DropRecord, RunContext, get_stage, upstream_chain


def build_context(
    config: RunConfig,
    provider=None,
    clock=None,
    jitter_rng=None,
) -> RunContext:
    gateway = CompletionGateway(
        config.gateway, provider=provider, clock=clock, jitter_rng=jitter_rng
    )
    templates = TemplateSet(config.prompts_dir or None)
    return RunContext(config=config, gateway=gateway, templates=templates)


def _read_progress(path: Path) -> dict[str, dict]:
    """Latest progress entry per record; tolerates a truncated final line."""
    entries: dict[str, dict] = {}
    if not path.is_file():
        return entries
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError:
            continue  # torn write from a killed run
        entries[entry["record_id"]] = entry
    return entries


def run_stage(stage_name: str, config: RunConfig, context: RunContext | None = None) -> StageManifest:
    """Run one stage, resuming any previous partial attempt.

    Idempotent: a completed stage with matching input and config hashes
    returns its manifest untouched. A config change raises ConfigHashMismatch;
    an input change restarts the stage from scratch.
    """
    ctx = context if context is not None else build_context(config)
    stage = get_stage(stage_name)

    for upstream in upstream_chain(stage_name):
        manifest = StageManifest.load(ctx.stage_dir(upstream) / "manifest.json")
        if manifest is None or not manifest.is_complete:
            raise UpstreamIncomplete(
                f"stage {stage_name!r} needs completed upstream stage {upstream!r}"
            )

    input_hash = content_hash(stage.input_paths(ctx))
    config_hash = dict_hash(config.stage_parameters())

    stage_dir = ctx.stage_dir(stage_name)
    manifest_path = stage_dir / "manifest.json"
    progress_path = stage_dir / "progress.jsonl"
    attempt_path = stage_dir / "attempt.json"

    existing = StageManifest.load(manifest_path)
    if existing is not None:
        if existing.config_hash != config_hash:
            raise ConfigHashMismatch(
                f"stage {stage_name!r}: config changed since the last run; "
                "use a fresh run_id or restore the config"
            )
        if existing.input_hash == input_hash and existing.is_complete:
            return existing

    # A partial attempt is resumable only under the same input and config.
    started_at = utc_now()
    if attempt_path.is_file():
        attempt = json.loads(attempt_path.read_text(encoding="utf-8"))
        if attempt.get("config_hash") != config_hash:
            raise ConfigHashMismatch(
                f"stage {stage_name!r}: config changed mid-run; refusing to resume"
            )
        if attempt.get("input_hash") != input_hash:
            progress_path.unlink(missing_ok=True)
            attempt_path.unlink(missing_ok=True)
        else:
            started_at = attempt.get("started_at", started_at)
    atomic_write_text(
        attempt_path,
        json.dumps(
            {"input_hash": input_hash, "config_hash": config_hash, "started_at": started_at},
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )

    plan = stage.plan(ctx)
    if len(set(plan)) != len(plan):
        raise ConfigError(f"stage {stage_name!r} planned duplicate record ids")
    progress = _read_progress(progress_path)
    terminal = {
        rid: entry for rid, entry in progress.items() if entry.get("status") in ("done", "dropped")
    }
    pending = [rid for rid in plan if rid not in terminal]

    state = stage.setup(ctx)
    write_lock = threading.Lock()
    failures: dict[str, Exception] = {}
    processed: list[str] = []

    stage_dir.mkdir(parents=True, exist_ok=True)
    with progress_path.open("a", encoding="utf-8") as progress_file:

        def record_progress(entry: dict) -> None:
            with write_lock:
                progress_file.write(dumps_line(entry) + "\n")
                progress_file.flush()

        def work(record_id: str) -> None:
            try:
                payload = stage.process(ctx, record_id, state)
            except DropRecord as exc:
                record_progress(
                    {"record_id": record_id, "status": "dropped", "reason": exc.reason}
                )
            except ModelOutputError as exc:
                record_progress(
                    {"record_id": record_id, "status": "dropped", "reason": str(exc)}
                )
            else:
                record_progress(
                    {"record_id": record_id, "status": "done", "payload": payload}
                )

        if pending:
            with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
                futures = {pool.submit(work, rid): rid for rid in pending}
                for future in as_completed(futures):
                    record_id = futures[future]
                    exc = future.exception()
                    if exc is not None:
                        failures[record_id] = exc  # type: ignore[assignment]
                    else:
                        processed.append(record_id)

    progress = _read_progress(progress_path)
    records: dict[str, RecordStatus] = {}
    for rid in plan:
        if rid in failures:
            records[rid] = RecordStatus(state="failed", reason=str(failures[rid]))
        elif rid in progress and progress[rid]["status"] == "done":
            records[rid] = RecordStatus(state="done")
        elif rid in progress and progress[rid]["status"] == "dropped":
            records[rid] = RecordStatus(state="dropped", reason=progress[rid].get("reason", ""))
        else:
            records[rid] = RecordStatus(state="pending")

    manifest = StageManifest(
        stage=stage_name,
        input_hash=input_hash,
        config_hash=config_hash,
        records=records,
        started_at=started_at,
        finished_at="" if failures else utc_now(),
        processed_this_run=sorted(processed),
    )

    if failures:
        manifest.save(manifest_path)
        first_id = min(failures)
        error = failures[first_id]
        if isinstance(error, ReplayMiss):
            raise ReplayMiss(error.key, error.stage_tag, record_id=first_id)
        raise error

    payloads = [
        progress[rid]["payload"] for rid in sorted(plan) if records[rid].state == "done"
    ]
    records_text = "".join(dumps_line(payload) + "\n" for payload in payloads)
    atomic_write_text(ctx.records_path(stage_name), records_text)
    stage.finalize(ctx, payloads)
    manifest.save(manifest_path)
    return manifest


def run_all(
    config: RunConfig,
    stop_after: str | None = None,
    context: RunContext | None = None,
) -> Path:
    """Run every stage in dependency order; returns the run directory."""
    if stop_after is not None:
        get_stage(stop_after)  # validate the name before doing any work
    ctx = context if context is not None else build_context(config)
    for name in STAGE_ORDER:
        run_stage(name, config, context=ctx)
        if name == stop_after:
            break
    return ctx.run_dir
