"""The staged instruction-collection operations.

Model-backed operations live on :class:`SynthesisClient`; pure operations
(pool review, deterministic sampling plans) are module functions.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import (
    EmptyConstraintSet,
    MalformedModelOutput,
    MissingAdherenceSection,
    TooFewVariants,
    UnknownConstraintId,
)
from ..gateway import CompletionGateway
from ..rng import Lcg64, shuffle_in_place
from ..templates import TemplateSet
from . import parsing
from .calls import StageSettings, call_parsed
from .ladder import check_level_embedding, validate_ladder
from .types import (
    MAX_DIFFICULTY,
    ConstraintCategory,
    ConstraintSet,
    FilterVerdict,
    InstructionLadder,
    LadderLevel,
    ReframedQuery,
    SeedQuery,
    StructuralConstraint,
    StructuralConstraintPool,
)

# In-context examples for constraint generation. The upstream procedure relies
# on hand-written exemplars; these are this repo's own.
DEFAULT_CONSTRAINT_EXEMPLARS = (
    "Example instruction: Suggest a name for my new bakery.\n"
    "Example constraints:\n"
    "1. Cultural Background: Chinese; Continental; Nordic\n"
    "2. Tone: playful; elegant; traditional\n"
    "3. Length: single word; two words; alliterative phrase",
    "Example instruction: Plan a weekend hiking trip near the city.\n"
    "Example constraints:\n"
    "1. Budget: under 50 dollars; under 200 dollars\n"
    "2. Group: solo; family with children; large group\n"
    "3. Season: summer; winter; rainy season",
)

ADHERENCE_MARKER = "Constraint adherence:"


class SynthesisClient:
    """Runs the instruction-collection stages through the completion gateway."""

    def __init__(self, gateway: CompletionGateway, templates: TemplateSet, settings: StageSettings):
        self._gateway = gateway
        self._templates = templates
        self._settings = settings

    # -- reframing -----------------------------------------------------------

    def reframe(self, seed: SeedQuery, min_variants: int = 3) -> list[ReframedQuery]:
        """Reformulate a seed query into at least ``min_variants`` distinct forms."""
        prompt = self._templates.render("reframe", query=seed.text, min_variants=min_variants)

        def parse(content: str) -> list[ReframedQuery]:
            texts = parsing.numbered_items(content)
            distinct: list[str] = []
            seen: set[str] = set()
            for text in texts:
                fold = parsing.normalize_ws(text).lower()
                if fold and fold not in seen:
                    seen.add(fold)
                    distinct.append(text)
            if len(distinct) < min_variants:
                raise TooFewVariants(
                    f"seed {seed.id}: {len(distinct)} distinct variants, need {min_variants}"
                )
            return [
                ReframedQuery(seed_id=seed.id, variant_index=i + 1, text=text)
                for i, text in enumerate(distinct)
            ]

        return call_parsed(self._gateway, prompt, self._settings, parse, stage="reframe")

    # -- filtering -------------------------------------------------------------

    def filter_answerable(self, query: str) -> FilterVerdict:
        """Stage-1 filter: is the query self-contained enough to answer?"""
        if not query.strip():
            raise ValueError("query must be non-empty")
        prompt = self._templates.render("filter_answerable", query=query)
        return call_parsed(
            self._gateway, prompt, self._settings, parsing.parse_verdict,
            stage="filter_answerable", judge=True,
        )

    def filter_conflicts(self, level: LadderLevel) -> FilterVerdict:
        """Stage-2 filter: do the recombined constraints conflict?"""
        prompt = self._templates.render("filter_conflicts", instruction=level.text)
        return call_parsed(
            self._gateway, prompt, self._settings, parsing.parse_verdict,
            stage="filter_conflicts", judge=True,
        )

    # -- constraints -----------------------------------------------------------

    def generate_constraints(
        self, reframed: ReframedQuery, exemplars: list[str] | tuple[str, ...]
    ) -> ConstraintSet:
        """Generate the two-level category/item constraint structure."""
        if not exemplars:
            raise ValueError("constraint generation requires in-context exemplars")
        prompt = self._templates.render(
            "generate_constraints",
            exemplars="\n\n".join(exemplars),
            instruction=reframed.text,
            min_categories=1,
        )

        def parse(content: str) -> ConstraintSet:
            pairs = parsing.parse_constraint_categories(content)
            if not pairs:
                raise EmptyConstraintSet(f"{reframed.ref}: no categories parsed")
            thin = [name for name, items in pairs if len(items) < 2]
            if thin:
                raise EmptyConstraintSet(
                    f"{reframed.ref}: categories with fewer than two items: {thin}"
                )
            categories = tuple(
                ConstraintCategory(name=name, items=items) for name, items in pairs
            )
            return ConstraintSet(reframed_ref=reframed.ref, categories=categories)

        return call_parsed(self._gateway, prompt, self._settings, parse, stage="generate_constraints")

    # -- recombination -----------------------------------------------------------

    def recombine(
        self,
        reframed: ReframedQuery,
        constraints: ConstraintSet,
        max_difficulty: int = MAX_DIFFICULTY,
    ) -> InstructionLadder:
        """Weave constraints into the instruction as a difficulty ladder."""
        if not constraints.categories:
            raise ValueError("constraint set must be non-empty")
        listing = "\n".join(
            f"{cat.name}: {'; '.join(cat.items)}" for cat in constraints.categories
        )
        prompt = self._templates.render(
            "recombine",
            instruction=reframed.text,
            constraints=listing,
            max_difficulty=max_difficulty,
        )

        def parse(content: str) -> InstructionLadder:
            raw_levels = parsing.parse_ladder_levels(content)
            levels = tuple(
                LadderLevel(
                    difficulty=entry["difficulty"],
                    text=entry["text"],
                    applied=tuple(entry["applied"]),
                )
                for entry in raw_levels
            )
            ladder = InstructionLadder(
                seed_id=reframed.seed_id, reframed_ref=reframed.ref, levels=levels
            )
            validate_ladder(ladder, source=constraints, max_difficulty=max_difficulty)
            return ladder

        return call_parsed(self._gateway, prompt, self._settings, parse, stage="recombine")

    # -- structural constraints ---------------------------------------------------

    def synthesize_structural_pool(
        self, seed_constraints: list[str] | tuple[str, ...], target_count: int
    ) -> StructuralConstraintPool:
        """Expand three seed format/numeric constraints into a candidate pool."""
        if len(seed_constraints) != 3:
            raise ValueError(f"exactly 3 seed constraints required, got {len(seed_constraints)}")
        if target_count < 1:
            raise ValueError("target_count must be positive")
        prompt = self._templates.render(
            "synthesize_structural_pool",
            seed_1=seed_constraints[0],
            seed_2=seed_constraints[1],
            seed_3=seed_constraints[2],
            target_count=target_count,
        )

        def parse(content: str) -> StructuralConstraintPool:
            pairs = parsing.parse_structural_candidates(content)
            entries: list[StructuralConstraint] = []
            seen: set[str] = set()
            for kind, text in pairs:
                fold = parsing.normalize_ws(text).lower()
                if fold in seen:
                    continue
                seen.add(fold)
                entries.append(
                    StructuralConstraint(id=f"sc-{len(entries) + 1:03d}", text=text, kind=kind)
                )
                if len(entries) >= target_count:
                    break
            return StructuralConstraintPool(entries=tuple(entries), provenance="synthesized")

        return call_parsed(
            self._gateway, prompt, self._settings, parse, stage="synthesize_structural_pool"
        )

    def augment_structural(
        self,
        ladders: list[InstructionLadder],
        pool: StructuralConstraintPool,
        sample_count: int,
        rng_seed: int,
    ) -> list[InstructionLadder]:
        """Weave structural constraints into a seeded sample of levels.

        Exactly ``sample_count`` levels (chosen without replacement, purely
        from the level ids and ``rng_seed``) are rewritten; every other level
        passes through untouched.
        """
        assignments = plan_structural_assignments(ladders, pool, sample_count, rng_seed)
        out: list[InstructionLadder] = []
        for ladder in ladders:
            rewritten: list[LadderLevel] = []
            changed = False
            for level in ladder.levels:
                entry_id = assignments.get((ladder.reframed_ref, level.difficulty))
                if entry_id is None:
                    rewritten.append(level)
                    continue
                entry = next(e for e in pool.entries if e.id == entry_id)
                rewritten.append(self.weave_structural(level, entry))
                changed = True
            if changed:
                new_ladder = InstructionLadder(
                    seed_id=ladder.seed_id,
                    reframed_ref=ladder.reframed_ref,
                    levels=tuple(rewritten),
                )
                validate_ladder(new_ladder)
                out.append(new_ladder)
            else:
                out.append(ladder)
        return out

    def weave_structural(
        self, level: LadderLevel, constraint: StructuralConstraint
    ) -> LadderLevel:
        """Rewrite one level's text to additionally impose ``constraint``."""
        prompt = self._templates.render(
            "augment_structural", instruction=level.text, constraint=constraint.text
        )

        def parse(content: str) -> LadderLevel:
            new_text = parsing.fenced_block(content)
            candidate = LadderLevel(
                difficulty=level.difficulty,
                text=new_text,
                applied=level.applied,
                structural=level.structural + (constraint.text,),
            )
            # The rewritten text must still state every constraint it carries.
            check_level_embedding("augment", candidate)
            return candidate

        return call_parsed(self._gateway, prompt, self._settings, parse, stage="augment_structural")

    # -- responses -----------------------------------------------------------------

    def generate_response(self, level: LadderLevel, explicit_adherence: bool = False) -> str:
        """Generate the model response for a level.

        With ``explicit_adherence`` the prompt demands a closing section that
        illustrates constraint adherence, and the parser verifies it exists.
        """
        template = "generate_response_adherent" if explicit_adherence else "generate_response"
        prompt = self._templates.render(template, instruction=level.text)

        def parse(content: str) -> str:
            text = content.strip()
            if not text:
                raise MalformedModelOutput("empty response")
            if explicit_adherence and not parsing.has_adherence_section(text):
                raise MissingAdherenceSection(
                    f"response lacks the {ADHERENCE_MARKER!r} section"
                )
            return text

        return call_parsed(self._gateway, prompt, self._settings, parse, stage="generate_response")


# -- pure operations ------------------------------------------------------------


def review_pool(
    candidates: StructuralConstraintPool, accept_ids: list[str] | tuple[str, ...]
) -> StructuralConstraintPool:
    """Keep exactly the accepted candidates, flipping provenance to accepted."""
    known = {entry.id for entry in candidates.entries}
    unknown = [cid for cid in accept_ids if cid not in known]
    if unknown:
        raise UnknownConstraintId(f"accept-list references unknown ids: {unknown}")
    accepted = frozenset(accept_ids)
    entries = tuple(entry for entry in candidates.entries if entry.id in accepted)
    return StructuralConstraintPool(entries=entries, provenance="accepted")


def load_accept_list(path: str | Path) -> list[str]:
    """Accept-list file: one constraint id per line, ``#`` comments allowed."""
    ids: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            ids.append(body)
    return ids


def plan_structural_assignments(
    ladders: list[InstructionLadder],
    pool: StructuralConstraintPool,
    sample_count: int,
    rng_seed: int,
) -> dict[tuple[str, int], str]:
    """Deterministic augmentation plan: (ladder ref, difficulty) -> pool entry id.

    Levels are enumerated in sorted (ref, difficulty) order, shuffled with the
    seeded generator, and the first ``sample_count`` selected; the same stream
    then picks each level's constraint. Pure in (level ids, sample_count,
    rng_seed).
    """
    if pool.provenance != "accepted":
        raise ValueError("augmentation requires an accepted pool")
    if not pool.entries:
        raise ValueError("augmentation requires a non-empty pool")
    level_ids = sorted(
        (ladder.reframed_ref, level.difficulty)
        for ladder in ladders
        for level in ladder.levels
    )
    if not 0 <= sample_count <= len(level_ids):
        raise ValueError(
            f"sample_count {sample_count} outside [0, {len(level_ids)}] available levels"
        )
    rng = Lcg64(rng_seed)
    order = list(range(len(level_ids)))
    shuffle_in_place(order, rng)
    selected = sorted(order[:sample_count])
    return {
        level_ids[idx]: pool.entries[rng.below(len(pool.entries))].id for idx in selected
    }
