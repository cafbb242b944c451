"""The fixed stage graph that turns seed queries into the packed dataset.

Stage order: reframe -> filter1 -> constraints -> recombine -> augment ->
filter2 -> respond -> pack -> analytics. Each stage maps independent records
through pure functions plus gateway calls and writes one JSONL line per
surviving record, in record-id order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..analytics.reports import write_stats_report
from ..analytics.stats import compute_stats
from ..curriculum.feedback import (
    build_external_feedback,
    build_internal_feedback,
    judge_response,
)
from ..curriculum.packing import pack_with_mode
from ..curriculum.types import Conversation, FeedbackQuad
from ..errors import ConfigError, MalformedModelOutput
from ..gateway import CompletionGateway
from ..rng import Lcg64, shuffle_in_place
from ..synthesis.calls import call_parsed
from ..synthesis.ladder import relabel_contiguous, validate_ladder
from ..synthesis.ops import DEFAULT_CONSTRAINT_EXEMPLARS, SynthesisClient, plan_structural_assignments
from ..synthesis.types import (
    ConstraintSet,
    InstructionLadder,
    LadderLevel,
    ReframedQuery,
    SeedQuery,
    StructuralConstraintPool,
)
from ..templates import TemplateSet
from .config import RunConfig
from .dataset import DatasetRecord, read_dataset, write_dataset


class DropRecord(Exception):
    """Raised by stage processors to mark the record dropped with a reason."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass
class RunContext:
    """Shared handles for one pipeline run."""

    config: RunConfig
    gateway: CompletionGateway
    templates: TemplateSet
    client: SynthesisClient = field(init=False)

    def __post_init__(self) -> None:
        self.client = SynthesisClient(self.gateway, self.templates, self.config.settings())

    @property
    def run_dir(self) -> Path:
        return self.config.run_dir

    def stage_dir(self, stage: str) -> Path:
        return self.run_dir / stage

    def records_path(self, stage: str) -> Path:
        return self.stage_dir(stage) / "records.jsonl"

    @property
    def dataset_path(self) -> Path:
        return self.run_dir / "dataset" / "dataset.jsonl"

    def read_records(self, stage: str) -> list[dict]:
        path = self.records_path(stage)
        if not path.is_file():
            return []
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records


def load_seeds(path: str | Path) -> list[SeedQuery]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"seeds file not found: {path}")
    seeds = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            seed = SeedQuery.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad seed line: {exc}") from exc
        if seed.id in seen:
            raise ConfigError(f"{path}:{lineno}: duplicate seed id {seed.id!r}")
        seen.add(seed.id)
        seeds.append(seed)
    return seeds


class Stage:
    """One node of the stage graph.

    ``plan`` enumerates record ids from upstream outputs; ``process`` handles
    one record and returns its payload dict; ``setup`` computes shared state
    from the full upstream input (never from the pending subset), keeping
    resumed runs identical to uninterrupted ones.
    """

    name: str = ""
    upstream: str | None = None

    def input_paths(self, ctx: RunContext) -> list[Path]:
        assert self.upstream is not None
        return [ctx.records_path(self.upstream)]

    def plan(self, ctx: RunContext) -> list[str]:
        raise NotImplementedError

    def setup(self, ctx: RunContext) -> Any:
        return None

    def process(self, ctx: RunContext, record_id: str, state: Any) -> dict:
        raise NotImplementedError

    def finalize(self, ctx: RunContext, payloads: list[dict]) -> None:
        pass


class ReframeStage(Stage):
    name = "reframe"
    upstream = None

    def input_paths(self, ctx: RunContext) -> list[Path]:
        return [Path(ctx.config.seeds_path)]

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(seed.id for seed in load_seeds(ctx.config.seeds_path))

    def setup(self, ctx: RunContext) -> dict[str, SeedQuery]:
        return {seed.id: seed for seed in load_seeds(ctx.config.seeds_path)}

    def process(self, ctx: RunContext, record_id: str, state: dict[str, SeedQuery]) -> dict:
        seed = state[record_id]
        variants = ctx.client.reframe(seed, min_variants=ctx.config.reframe_min_variants)
        return {
            "record_id": record_id,
            "seed_id": seed.id,
            "source": seed.source,
            "variants": [
                {"ref": v.ref, "variant_index": v.variant_index, "text": v.text}
                for v in variants
            ],
        }


class Filter1Stage(Stage):
    name = "filter1"
    upstream = "reframe"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(
            variant["ref"]
            for record in ctx.read_records("reframe")
            for variant in record["variants"]
        )

    def setup(self, ctx: RunContext) -> dict[str, dict]:
        state = {}
        for record in ctx.read_records("reframe"):
            for variant in record["variants"]:
                state[variant["ref"]] = {
                    "seed_id": record["seed_id"],
                    "variant_index": variant["variant_index"],
                    "text": variant["text"],
                }
        return state

    def process(self, ctx: RunContext, record_id: str, state: dict) -> dict:
        entry = state[record_id]
        verdict = ctx.client.filter_answerable(entry["text"])
        if not verdict.keep:
            raise DropRecord(verdict.reason)
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "variant_index": entry["variant_index"],
            "text": entry["text"],
            "verdict": verdict.to_dict(),
        }


class ConstraintsStage(Stage):
    name = "constraints"
    upstream = "filter1"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(record["record_id"] for record in ctx.read_records("filter1"))

    def setup(self, ctx: RunContext) -> dict[str, dict]:
        return {record["record_id"]: record for record in ctx.read_records("filter1")}

    def process(self, ctx: RunContext, record_id: str, state: dict) -> dict:
        entry = state[record_id]
        reframed = ReframedQuery(
            seed_id=entry["seed_id"],
            variant_index=entry["variant_index"],
            text=entry["text"],
        )
        constraints = ctx.client.generate_constraints(reframed, DEFAULT_CONSTRAINT_EXEMPLARS)
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "variant_index": entry["variant_index"],
            "text": entry["text"],
            "constraints": constraints.to_dict(),
        }


class RecombineStage(Stage):
    name = "recombine"
    upstream = "constraints"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(record["record_id"] for record in ctx.read_records("constraints"))

    def setup(self, ctx: RunContext) -> dict[str, dict]:
        return {record["record_id"]: record for record in ctx.read_records("constraints")}

    def process(self, ctx: RunContext, record_id: str, state: dict) -> dict:
        entry = state[record_id]
        reframed = ReframedQuery(
            seed_id=entry["seed_id"],
            variant_index=entry["variant_index"],
            text=entry["text"],
        )
        constraints = ConstraintSet.from_dict(entry["constraints"])
        ladder = ctx.client.recombine(
            reframed, constraints, max_difficulty=ctx.config.max_difficulty
        )
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "ladder": ladder.to_dict(),
        }


def load_structural_pool(path: str | Path) -> StructuralConstraintPool:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"structural pool file not found: {path}")
    try:
        pool = StructuralConstraintPool.from_dict(
            json.loads(path.read_text(encoding="utf-8"))
        )
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad structural pool file {path}: {exc}") from exc
    return pool


@dataclass
class AugmentState:
    records: dict[str, dict]
    assignments: dict[tuple[str, int], str]
    pool_by_id: dict[str, Any]


class AugmentStage(Stage):
    name = "augment"
    upstream = "recombine"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(record["record_id"] for record in ctx.read_records("recombine"))

    def setup(self, ctx: RunContext) -> AugmentState:
        config = ctx.config
        records = {r["record_id"]: r for r in ctx.read_records("recombine")}
        if config.augment_sample_count == 0 or not records:
            return AugmentState(records=records, assignments={}, pool_by_id={})
        pool = load_structural_pool(config.structural_pool_path)
        if pool.provenance != "accepted":
            raise ConfigError(
                f"structural pool {config.structural_pool_path} has provenance "
                f"{pool.provenance!r}; run the review step first"
            )
        if not pool.entries:
            raise ConfigError(f"structural pool {config.structural_pool_path} is empty")
        ladders = [
            InstructionLadder.from_dict(records[rid]["ladder"]) for rid in sorted(records)
        ]
        total = sum(len(ladder.levels) for ladder in ladders)
        # The op itself requires sample_count <= total; the pipeline clamps so
        # small corpora still run with a paper-scale config value.
        count = min(config.augment_sample_count, total)
        assignments = plan_structural_assignments(
            ladders, pool, count, config.augment_rng_seed
        )
        return AugmentState(
            records=records,
            assignments=assignments,
            pool_by_id={e.id: e for e in pool.entries},
        )

    def process(self, ctx: RunContext, record_id: str, state: AugmentState) -> dict:
        entry = state.records[record_id]
        ladder = InstructionLadder.from_dict(entry["ladder"])
        augmented: list[int] = []
        levels: list[LadderLevel] = []
        for level in ladder.levels:
            entry_id = state.assignments.get((ladder.reframed_ref, level.difficulty))
            if entry_id is None:
                levels.append(level)
            else:
                levels.append(ctx.client.weave_structural(level, state.pool_by_id[entry_id]))
                augmented.append(level.difficulty)
        new_ladder = InstructionLadder(
            seed_id=ladder.seed_id, reframed_ref=ladder.reframed_ref, levels=tuple(levels)
        )
        if augmented:
            validate_ladder(new_ladder, max_difficulty=ctx.config.max_difficulty)
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "ladder": new_ladder.to_dict(),
            "augmented_levels": augmented,
        }


class Filter2Stage(Stage):
    name = "filter2"
    upstream = "augment"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(record["record_id"] for record in ctx.read_records("augment"))

    def setup(self, ctx: RunContext) -> dict[str, dict]:
        return {record["record_id"]: record for record in ctx.read_records("augment")}

    def process(self, ctx: RunContext, record_id: str, state: dict) -> dict:
        entry = state[record_id]
        ladder = InstructionLadder.from_dict(entry["ladder"])
        surviving: list[LadderLevel] = []
        audit: list[dict] = []
        for level in ladder.levels:
            verdict = ctx.client.filter_conflicts(level)
            audit.append(
                {
                    "original_difficulty": level.difficulty,
                    "keep": verdict.keep,
                    "reason": verdict.reason,
                }
            )
            if verdict.keep:
                surviving.append(level)
        if not surviving:
            raise DropRecord("all levels rejected by the conflict filter")
        thinned = InstructionLadder(
            seed_id=ladder.seed_id,
            reframed_ref=ladder.reframed_ref,
            levels=tuple(surviving),
        )
        # Surviving difficulty labels stay contiguous from 1; bigger constraint
        # steps are expected after removals, hence the relaxed validation.
        relabeled = relabel_contiguous(thinned)
        validate_ladder(relabeled, strict_steps=False, max_difficulty=ctx.config.max_difficulty)
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "ladder": relabeled.to_dict(),
            "level_audit": audit,
        }


class RespondStage(Stage):
    name = "respond"
    upstream = "filter2"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(record["record_id"] for record in ctx.read_records("filter2"))

    def setup(self, ctx: RunContext) -> dict[str, dict]:
        return {record["record_id"]: record for record in ctx.read_records("filter2")}

    def process(self, ctx: RunContext, record_id: str, state: dict) -> dict:
        entry = state[record_id]
        ladder = InstructionLadder.from_dict(entry["ladder"])
        responses = {
            str(level.difficulty): ctx.client.generate_response(level)
            for level in ladder.levels
        }
        return {
            "record_id": record_id,
            "seed_id": entry["seed_id"],
            "reframed_ref": record_id,
            "ladder": entry["ladder"],
            "responses": responses,
        }


def _candidate_answer(ctx: RunContext, level: LadderLevel) -> str:
    """Response from the pluggable responder used for external-feedback quads."""
    prompt = ctx.templates.render("responder", instruction=level.text)

    def parse(content: str) -> str:
        text = content.strip()
        if not text:
            raise MalformedModelOutput("empty responder output")
        return text

    return call_parsed(
        ctx.gateway, prompt, ctx.config.responder_settings(), parse, stage="responder"
    )


@dataclass
class PackState:
    ladders: dict[str, InstructionLadder]
    responses: dict[str, dict[int, str]]
    internal_levels: dict[str, tuple[str, int]]  # record id -> (ref, difficulty)
    external_refs: dict[str, str]  # record id -> ref

    def record_ids(self) -> list[str]:
        ids = [f"eth/{ref}" for ref in self.ladders]
        ids.extend(self.internal_levels)
        ids.extend(self.external_refs)
        return ids


class PackStage(Stage):
    name = "pack"
    upstream = "respond"

    def plan(self, ctx: RunContext) -> list[str]:
        return sorted(self.setup(ctx).record_ids())

    def setup(self, ctx: RunContext) -> PackState:
        config = ctx.config
        ladders: dict[str, InstructionLadder] = {}
        responses: dict[str, dict[int, str]] = {}
        for record in ctx.read_records("respond"):
            ref = record["record_id"]
            ladders[ref] = InstructionLadder.from_dict(record["ladder"])
            responses[ref] = {int(dd): text for dd, text in record["responses"].items()}

        rng = Lcg64(config.feedback_rng_seed)

        # Internal feedback: seeded sample over every constraint-bearing level.
        eligible_internal = sorted(
            (ref, level.difficulty)
            for ref, ladder in ladders.items()
            for level in ladder.levels
            if level.applied or level.structural
        )
        order = list(range(len(eligible_internal)))
        shuffle_in_place(order, rng)
        internal_count = min(config.internal_sample_count, len(eligible_internal))
        internal = {}
        for idx in sorted(order[:internal_count]):
            ref, dd = eligible_internal[idx]
            internal[f"int/{ref}/d{dd}"] = (ref, dd)

        # External feedback: seeded sample over ladders whose hardest level
        # reaches the configured maximum difficulty.
        eligible_external = sorted(
            ref
            for ref, ladder in ladders.items()
            if ladder.levels and ladder.max_difficulty == config.max_difficulty
        )
        order = list(range(len(eligible_external)))
        shuffle_in_place(order, rng)
        external_count = min(config.external_sample_count, len(eligible_external))
        external = {
            f"ext/{eligible_external[idx]}": eligible_external[idx]
            for idx in sorted(order[:external_count])
        }

        state = PackState(
            ladders=ladders,
            responses=responses,
            internal_levels=internal,
            external_refs=external,
        )
        return state

    def process(self, ctx: RunContext, record_id: str, state: PackState) -> dict:
        if record_id.startswith("eth/"):
            ref = record_id[len("eth/") :]
            ladder = state.ladders[ref]
            conversations = pack_with_mode(
                ladder,
                state.responses[ref],
                ctx.config.packing_mode,
                conversation_id=f"eth-{ref}",
            )
        elif record_id.startswith("int/"):
            ref, dd = state.internal_levels[record_id]
            ladder = state.ladders[ref]
            level = ladder.level_at(dd)
            assert level is not None
            adherent = ctx.client.generate_response(level, explicit_adherence=True)
            conversation = build_internal_feedback(
                level, adherent, conversation_id=f"int-{ref}-d{dd}"
            )
            conversations = [_with_lineage(conversation, ladder)]
        elif record_id.startswith("ext/"):
            ref = state.external_refs[record_id]
            ladder = state.ladders[ref]
            level = ladder.levels[-1]
            model_response = _candidate_answer(ctx, level)
            judgement = judge_response(
                ctx.gateway, ctx.templates, level, model_response, ctx.config.settings()
            )
            reference = ctx.client.generate_response(level)
            quad = FeedbackQuad(
                instruction=level,
                model_response=model_response,
                judgement=judgement,
                reference_response=reference,
            )
            conversation = build_external_feedback(quad, conversation_id=f"ext-{ref}")
            conversations = [_with_lineage(conversation, ladder)]
        else:  # pragma: no cover - plan only emits the three prefixes
            raise AssertionError(record_id)
        return {
            "record_id": record_id,
            "conversations": [c.to_dict() for c in conversations],
        }

    def finalize(self, ctx: RunContext, payloads: list[dict]) -> None:
        records = [
            DatasetRecord(
                conversation=Conversation.from_dict(data),
                run_id=ctx.config.run_id,
                stage=self.name,
            )
            for payload in payloads
            for data in payload["conversations"]
        ]
        write_dataset(records, ctx.dataset_path)


def _with_lineage(conversation: Conversation, ladder: InstructionLadder) -> Conversation:
    return Conversation(
        id=conversation.id,
        kind=conversation.kind,
        turns=conversation.turns,
        lineage={"seed_id": ladder.seed_id, "reframed_ref": ladder.reframed_ref},
        difficulty_trace=conversation.difficulty_trace,
    )


class AnalyticsStage(Stage):
    name = "analytics"
    upstream = "pack"

    def input_paths(self, ctx: RunContext) -> list[Path]:
        return [ctx.dataset_path]

    def plan(self, ctx: RunContext) -> list[str]:
        return ["dataset"]

    def process(self, ctx: RunContext, record_id: str, state: Any) -> dict:
        records = read_dataset(ctx.dataset_path) if ctx.dataset_path.is_file() else []
        stats = compute_stats([record.conversation for record in records])
        return {"record_id": record_id, "stats": stats.to_dict()}

    def finalize(self, ctx: RunContext, payloads: list[dict]) -> None:
        records = read_dataset(ctx.dataset_path) if ctx.dataset_path.is_file() else []
        stats = compute_stats([record.conversation for record in records])
        write_stats_report(stats, ctx.run_dir / "reports")


STAGES: tuple[Stage, ...] = (
    ReframeStage(),
    Filter1Stage(),
    ConstraintsStage(),
    RecombineStage(),
    AugmentStage(),
    Filter2Stage(),
    RespondStage(),
    PackStage(),
    AnalyticsStage(),
)
STAGE_ORDER = tuple(stage.name for stage in STAGES)
_BY_NAME = {stage.name: stage for stage in STAGES}


def get_stage(name: str) -> Stage:
    if name not in _BY_NAME:
        raise ConfigError(f"unknown stage {name!r}; stages are: {', '.join(STAGE_ORDER)}")
    return _BY_NAME[name]


def upstream_chain(name: str) -> list[str]:
    """Every stage upstream of ``name``, nearest first."""
    chain = []
    current = get_stage(name).upstream
    while current is not None:
        chain.append(current)
        current = get_stage(current).upstream
    return chain
