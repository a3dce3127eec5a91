"""Generation loop, single runs, replicate sweeps."""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import attrition as attr_mod
from .attrition import AttritionPolicy
from .errors import CoopnetError, InvalidArgumentError, InvalidConfigError
from .evolution import UPDATE_MODE, update_strategies
from .game import FitnessTable, GameParams, fraction_cooperators, score_all
from .growth import GrowthModel, ModelKind, grow_step
from .net import Network, Strategy, degree_distribution, new_founder_network

log = logging.getLogger(__name__)

# Echoed into run metadata so the loop-order choices stay auditable.
DESIGN = {
    "loop_order": ["play", "update", "grow", "prune"],
    "update_mode": UPDATE_MODE,
    "neighbour_draws_per_generation": 1,
    "rng_order": "ascending node id; neighbour draw then acceptance draw",
    "cooperator_fraction_sampled": "after update, before growth",
    "population_sampled": "end of generation",
    "newcomer_strategy": "fair coin",
    "newcomer_eligible_same_generation": True,
    "newcomer_fitness_for_epa_and_prune": 0.0,
    "epa_fitness_source": "scores from the same generation's play step",
    "without_replacement": "sequential weighted draws with renormalisation",
    "shortlist_rounding": "half up",
    "tournament_size": "max(1, round(tournament_fraction * N))",
    "tournament_excludes_shortlisted": True,
    "disconnected_rule": "degree-0 fixpoint",
    "prune_fitness": "generation fitness table, not recomputed",
    "prune_floor": "m + 1",
}


@dataclass(frozen=True)
class SimConfig:
    model: GrowthModel = field(default_factory=GrowthModel)
    founder_strategy: Strategy = Strategy.DEFECT
    founder_size: int = 3
    max_size: int = 1000
    generations: int = 2000
    game: GameParams = field(default_factory=lambda: GameParams(1.3))
    attrition: AttritionPolicy = field(default_factory=AttritionPolicy)
    averaging_window: int = 20
    seed: int = 0
    # 0 keeps only the final degree histogram
    snapshot_every: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "founder_strategy", Strategy.parse(self.founder_strategy))

    def validate(self) -> None:
        if self.founder_size < 2:
            raise InvalidConfigError("founder_size must be >= 2")
        if self.founder_size < self.model.m:
            raise InvalidConfigError("founder_size must be >= m")
        if self.max_size < self.founder_size:
            raise InvalidConfigError("max_size must be >= founder_size")
        if self.generations < 0:
            raise InvalidConfigError("generations must be >= 0")
        if self.averaging_window < 1:
            raise InvalidConfigError("averaging_window must be >= 1")
        if self.snapshot_every < 0:
            raise InvalidConfigError("snapshot_every must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")

    @property
    def attrition_on(self) -> bool:
        return self.attrition.enabled

    def to_dict(self) -> dict:
        return {
            "model": self.model.kind.value,
            "epsilon": self.model.epsilon,
            "m": self.model.m,
            "nodes_per_generation": self.model.nodes_per_generation,
            "founder": self.founder_strategy.letter.lower(),
            "founder_size": self.founder_size,
            "max_size": self.max_size,
            "generations": self.generations,
            "b": self.game.b,
            "attrition": "on" if self.attrition_on else "off",
            "x_percent": self.attrition.x_percent,
            "tournament_fraction": self.attrition.tournament_fraction,
            "remove_split_components": self.attrition.remove_split_components,
            "averaging_window": self.averaging_window,
            "seed": self.seed,
            "snapshot_every": self.snapshot_every,
        }


def make_config(model: str = "cra", attrition: bool = False, founder: str = "d",
                b: float = 1.3, *, seed: int = 0, generations: int = 2000,
                max_size: int = 1000, founder_size: int = 3, m: int = 2,
                epsilon: float = 0.99, nodes_per_generation: int = 10,
                x_percent: float = 2.5, tournament_fraction: float = 0.01,
                remove_split_components: bool = False, averaging_window: int = 20,
                snapshot_every: int = 0) -> SimConfig:
    """Flat-argument constructor; defaults are the paper-scale conditions."""
    return SimConfig(
        model=GrowthModel(ModelKind(model), epsilon, m, nodes_per_generation),
        founder_strategy=Strategy.parse(founder),
        founder_size=founder_size,
        max_size=max_size,
        generations=generations,
        game=GameParams(b),
        attrition=AttritionPolicy(x_percent if attrition else 0.0, tournament_fraction,
                                  remove_split_components),
        averaging_window=averaging_window,
        seed=seed,
        snapshot_every=snapshot_every,
    )


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    population: int
    cooperator_fraction: float
    mean_degree: float
    removed_count: int
    added_count: int = 0


@dataclass
class MetricsSeries:
    records: list[GenerationRecord] = field(default_factory=list)
    degree_snapshots: dict[int, dict[int, int]] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def cooperator_fractions(self) -> np.ndarray:
        return np.array([r.cooperator_fraction for r in self.records])


@dataclass
class SimState:
    net: Network
    cfg: SimConfig
    rng: np.random.Generator
    generation: int = 0
    fitness: FitnessTable | None = None


def _policy(cfg: SimConfig) -> AttritionPolicy:
    return replace(cfg.attrition, min_population=max(cfg.attrition.min_population,
                                                     cfg.model.m + 1))


def new_state(cfg: SimConfig) -> SimState:
    cfg.validate()
    net = new_founder_network(cfg.founder_size, cfg.founder_strategy)
    return SimState(net, cfg, np.random.default_rng(cfg.seed))


def run_generation(state: SimState) -> GenerationRecord:
    """Play, update, grow, then prune if at capacity with attrition on."""
    cfg, net, rng = state.cfg, state.net, state.rng
    fit = score_all(net, cfg.game)
    update_strategies(net, fit, cfg.game, rng)
    coop = fraction_cooperators(net)
    added = grow_step(net, cfg.model, fit, cfg.max_size, rng)
    removed = 0
    if cfg.attrition_on and net.population >= cfg.max_size:
        removed = len(attr_mod.prune(net, fit, _policy(cfg), rng))
    state.generation += 1
    state.fitness = fit
    return GenerationRecord(state.generation, net.population, coop,
                            net.mean_degree(), removed, added)


def run_simulation(cfg: SimConfig,
                   on_generation: Callable[[SimState, GenerationRecord], None] | None = None,
                   ) -> tuple[MetricsSeries, Network]:
    """Run ``cfg.generations`` generations from the founder network."""
    state = new_state(cfg)
    series = MetricsSeries(metadata={"config": cfg.to_dict(), "design": DESIGN})
    for _ in range(cfg.generations):
        rec = run_generation(state)
        series.records.append(rec)
        if cfg.snapshot_every and rec.generation % cfg.snapshot_every == 0:
            series.degree_snapshots[rec.generation] = degree_distribution(state.net)
        if on_generation is not None:
            on_generation(state, rec)
    series.degree_snapshots[state.generation] = degree_distribution(state.net)
    return series, state.net


def mean_final_cooperation(series: MetricsSeries | Sequence[GenerationRecord],
                           window: int) -> float:
    records = series.records if isinstance(series, MetricsSeries) else list(series)
    if window < 1:
        raise InvalidArgumentError("window must be >= 1")
    if len(records) < window:
        raise InvalidArgumentError(f"series of {len(records)} shorter than window {window}")
    return float(np.mean([r.cooperator_fraction for r in records[-window:]]))


# -- sweeps --------------------------------------------------------------

class Variant(NamedTuple):
    model: ModelKind
    attrition: bool
    founder: Strategy

    @property
    def tag(self) -> str:
        return f"{self.model.value}{'+' if self.attrition else ''}_{self.founder.letter.lower()}"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        """``epa+_d``, ``cra_c`` and similar."""
        try:
            head, founder = text.strip().lower().rsplit("_", 1)
        except ValueError:
            raise InvalidConfigError(f"bad variant {text!r}; expected e.g. cra+_d") from None
        attrition = head.endswith("+")
        return cls(ModelKind(head.rstrip("+")), attrition, Strategy.parse(founder))


ALL_VARIANTS = tuple(Variant(k, a, f) for k in (ModelKind.EPA, ModelKind.CRA)
                     for a in (False, True)
                     for f in (Strategy.COOPERATE, Strategy.DEFECT))


def parse_variants(text: str | Iterable[str]) -> list[Variant]:
    items = text.split(",") if isinstance(text, str) else list(text)
    if len(items) == 1 and items[0].strip().lower() == "all":
        return list(ALL_VARIANTS)
    return [Variant.parse(t) for t in items if t.strip()]


def b_key(b: float) -> int:
    """b as fixed-point micro-units, so 1.3 and 1.3000000001 seed alike."""
    return int(round(b * 1_000_000))


def cell_seed(base_seed: int, variant: Variant, b: float, replicate: int) -> int:
    text = f"{base_seed}|{variant.tag}|{b_key(b)}|{replicate}".encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def b_grid(b_min: float = 1.0, b_max: float = 3.0, b_step: float = 0.1) -> list[float]:
    if b_step <= 0:
        raise InvalidConfigError("b_step must be positive")
    n = int(round((b_max - b_min) / b_step))
    return [round(b_min + i * b_step, 10) for i in range(n + 1)]


def cell_config(base: SimConfig, variant: Variant, b: float, replicate: int) -> SimConfig:
    x = base.attrition.x_percent or AttritionPolicy().x_percent
    return replace(
        base,
        model=replace(base.model, kind=variant.model),
        founder_strategy=variant.founder,
        game=GameParams(b),
        attrition=replace(base.attrition, x_percent=x if variant.attrition else 0.0),
        seed=cell_seed(base.seed, variant, b, replicate),
    )


@dataclass(frozen=True)
class SweepRow:
    model: str
    attrition: str
    founder: str
    b: float
    replicate: int
    seed: int
    c_mean: float

    @property
    def variant(self) -> Variant:
        return Variant(ModelKind(self.model), self.attrition == "on",
                       Strategy.parse(self.founder))


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def summary(self) -> dict[tuple[str, float], float]:
        """Replicate mean of ``c_mean`` per (variant tag, b)."""
        groups: dict[tuple[str, float], list[float]] = {}
        for r in self.rows:
            groups.setdefault((r.variant.tag, r.b), []).append(r.c_mean)
        return {k: float(np.mean(v)) for k, v in groups.items()}

    def values(self, variant: Variant | str, b: float) -> np.ndarray:
        tag = variant if isinstance(variant, str) else variant.tag
        return np.array([r.c_mean for r in self.rows
                         if r.variant.tag == tag and b_key(r.b) == b_key(b)])


def run_cell(cfg: SimConfig) -> float:
    series, _ = run_simulation(cfg)
    return mean_final_cooperation(series, cfg.averaging_window)


def _run_cell_job(job):
    key, cfg = job
    try:
        return key, run_cell(cfg)
    except CoopnetError as exc:
        raise type(exc)(f"cell {key}: {exc}") from exc


def run_sweep(base: SimConfig, b_values: Sequence[float], replicates: int,
              variants: Sequence[Variant] = ALL_VARIANTS, workers: int = 1,
              progress: Callable[[int, int], None] | None = None) -> SweepResult:
    """One run per (variant, b, replicate), independently seeded.

    Cell seeds depend only on the cell key, so any ``workers`` count gives
    the same result.
    """
    if replicates < 1:
        raise InvalidArgumentError("replicates must be >= 1")
    base.validate()
    jobs = []
    for vi, v in enumerate(variants):
        for b in b_values:
            for rep in range(replicates):
                cfg = cell_config(base, v, b, rep)
                jobs.append(((vi, b_key(b), rep), cfg))
    configs = dict(jobs)
    log.debug("sweep: %d cells, %d worker(s)", len(jobs), workers)
    results: dict = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, (key, c) in enumerate(pool.map(_run_cell_job, jobs, chunksize=1)):
                results[key] = c
                if progress:
                    progress(i + 1, len(jobs))
    else:
        for i, job in enumerate(jobs):
            key, c = _run_cell_job(job)
            results[key] = c
            if progress:
                progress(i + 1, len(jobs))
    rows = []
    for key in sorted(results):
        vi, _, rep = key
        v, cfg = variants[vi], configs[key]
        rows.append(SweepRow(v.model.value, "on" if v.attrition else "off",
                             v.founder.letter.lower(), cfg.game.b, rep, cfg.seed,
                             results[key]))
    return SweepResult(rows)
