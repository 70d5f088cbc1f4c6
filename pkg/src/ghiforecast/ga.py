"""Generational genetic algorithm over GBDT hyperparameters.

Each generation keeps the ``elite_count`` fittest genomes unchanged and fills
the rest of the population through tournament selection, uniform crossover
and Gaussian mutation. Fitness is the negative MAE on a holdout slice of the
training data, so larger is better.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import audit
from .errors import BadBounds, ConfigError, SchemaMismatch
from .metrics import mae
from .models.gbdt import GbdtConfig, fit_gbdt, predict_gbdt


@dataclass(frozen=True)
class Gene:
    name: str
    kind: str  # "int" or "real"
    lo: float
    hi: float
    value: float

    def __post_init__(self):
        if self.kind not in ("int", "real"):
            raise ConfigError(f"gene kind must be 'int' or 'real', got {self.kind!r}")
        if self.lo > self.hi:
            raise BadBounds(f"gene {self.name}: lo {self.lo} > hi {self.hi}")

    def with_value(self, v: float) -> "Gene":
        v = min(max(v, self.lo), self.hi)
        if self.kind == "int":
            v = float(min(max(round(v), np.ceil(self.lo)), np.floor(self.hi)))
        return replace(self, value=float(v))

    @property
    def in_bounds(self) -> bool:
        ok = self.lo <= self.value <= self.hi
        return ok and (self.kind == "real" or float(self.value).is_integer())


@dataclass(frozen=True)
class Genome:
    genes: tuple[Gene, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.genes)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(g.value for g in self.genes)

    def as_dict(self) -> dict:
        return {g.name: (int(g.value) if g.kind == "int" else g.value) for g in self.genes}

    def in_bounds(self) -> bool:
        return all(g.in_bounds for g in self.genes)

    def decode(self, seed: int = 0) -> GbdtConfig:
        d = self.as_dict()
        eta = float(d.get("eta", 0.3))
        return GbdtConfig(
            n_rounds=int(d.get("n_rounds", 100)),
            eta=eta if eta > 0 else 1e-3,
            max_depth=int(d.get("max_depth", 6)),
            min_child_weight=float(d.get("min_child_weight", 1.0)),
            reg_lambda=float(d.get("lambda", 1.0)),
            gamma=float(d.get("gamma", 0.0)),
            subsample=float(d.get("subsample", 1.0)),
            colsample=float(d.get("colsample", 1.0)),
            seed=seed,
            name="GA",
        )


# name, kind, lo, hi
DEFAULT_BOUNDS = (
    ("n_rounds", "int", 20, 300),
    ("eta", "real", 0.01, 0.5),
    ("max_depth", "int", 2, 10),
    ("min_child_weight", "real", 0.0, 10.0),
    ("lambda", "real", 0.0, 10.0),
    ("gamma", "real", 0.0, 5.0),
    ("subsample", "real", 0.5, 1.0),
    ("colsample", "real", 0.5, 1.0),
)


_GENE_FIELDS = {
    "n_rounds": "n_rounds",
    "eta": "eta",
    "max_depth": "max_depth",
    "min_child_weight": "min_child_weight",
    "lambda": "reg_lambda",
    "gamma": "gamma",
    "subsample": "subsample",
    "colsample": "colsample",
}


def encode(template: Genome, cfg: GbdtConfig) -> Genome:
    """Genome holding ``cfg``'s hyperparameters, clipped to the template's bounds."""
    genes = []
    for g in template.genes:
        if g.name not in _GENE_FIELDS:
            raise SchemaMismatch(f"gene {g.name!r} has no GbdtConfig field")
        genes.append(g.with_value(float(getattr(cfg, _GENE_FIELDS[g.name]))))
    return Genome(tuple(genes))


def make_template(bounds: Sequence[tuple] = DEFAULT_BOUNDS) -> Genome:
    """Genome holding each gene at its lower bound; only the bounds matter."""
    return Genome(tuple(Gene(name, kind, float(lo), float(hi), float(lo)).with_value(lo) for name, kind, lo, hi in bounds))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 16
    generations: int = 10
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_sigma: float = 0.1
    elite_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("population_size must be >= 2")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        if not 1 <= self.elite_count < self.population_size:
            raise ConfigError("elite_count must lie in [1, population_size)")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigError("tournament_size must lie in [1, population_size]")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.mutation_sigma < 0:
            raise ConfigError("mutation_sigma must be >= 0")


GENERATION_PRESETS = (3, 5, 10)


def _rng(cfg: GaConfig, rng):
    return rng if rng is not None else np.random.default_rng(cfg.seed)


def init_population(template: Genome, cfg: GaConfig, rng=None, seeds: Sequence[Genome] = ()) -> list[Genome]:
    """``population_size`` genomes drawn uniformly within the template's bounds.

    ``seeds`` (known-good genomes) take the first slots; the random draws are
    the same either way, so seeding only replaces members.
    """
    rng = _rng(cfg, rng)
    for g in template.genes:
        if g.lo > g.hi:
            raise BadBounds(f"gene {g.name}: lo {g.lo} > hi {g.hi}")
    if len(seeds) > cfg.population_size:
        raise ConfigError(f"{len(seeds)} seed genomes do not fit a population of {cfg.population_size}")
    for sg in seeds:
        if sg.names != template.names:
            raise SchemaMismatch(f"seed genome schema {sg.names} differs from {template.names}")
    pop = []
    for _ in range(cfg.population_size):
        genes = []
        for g in template.genes:
            if g.kind == "int":
                v = float(rng.integers(int(np.ceil(g.lo)), int(np.floor(g.hi)) + 1))
            else:
                v = float(rng.uniform(g.lo, g.hi)) if g.hi > g.lo else g.lo
            genes.append(g.with_value(v))
        pop.append(Genome(tuple(genes)))
    pop[: len(seeds)] = list(seeds)
    return pop


def tournament_select(population: Sequence[Genome], fitnesses, cfg: GaConfig, rng) -> Genome:
    """Fittest of ``tournament_size`` draws with replacement; ties go to the
    earliest draw."""
    fit = np.asarray(fitnesses, dtype=np.float64)
    idx = rng.integers(0, len(population), size=cfg.tournament_size)
    return population[int(idx[int(np.argmax(fit[idx]))])]


def crossover(a: Genome, b: Genome, cfg: GaConfig, rng) -> tuple[Genome, Genome]:
    if a.names != b.names:
        raise SchemaMismatch(f"gene schemas differ: {a.names} vs {b.names}")
    if rng.random() >= cfg.crossover_rate:
        return a, b
    swap = rng.random(len(a.genes)) < 0.5
    c1 = tuple(gb if s else ga for ga, gb, s in zip(a.genes, b.genes, swap))
    c2 = tuple(ga if s else gb for ga, gb, s in zip(a.genes, b.genes, swap))
    return Genome(c1), Genome(c2)


def mutate(genome: Genome, cfg: GaConfig, rng) -> Genome:
    hits = rng.random(len(genome.genes)) < cfg.mutation_rate
    noise = rng.normal(0.0, 1.0, len(genome.genes))
    genes = []
    for g, hit, z in zip(genome.genes, hits, noise):
        if hit:
            genes.append(g.with_value(g.value + z * cfg.mutation_sigma * (g.hi - g.lo)))
        else:
            genes.append(g)
    return Genome(tuple(genes))


def fitness(genome: Genome, train, holdout, cache: dict | None = None, seed: int = 0) -> float:
    """-MAE on ``holdout`` of a GBDT fitted on ``train`` with the genome's
    hyperparameters; memoised on the genome values when ``cache`` is given."""
    key = genome.values
    if cache is not None and key in cache:
        return cache[key]
    audit.record("ga_fitness", train)
    audit.record("ga_fitness", holdout)
    model = fit_gbdt(train, genome.decode(seed))
    value = -mae(holdout.y, predict_gbdt(model, holdout))
    if cache is not None:
        cache[key] = value
    return value


class GbdtFitness:
    """Callable fitness over fixed train/holdout frames with a value cache."""

    def __init__(self, train, holdout, seed: int = 0):
        self.train = train
        self.holdout = holdout
        self.seed = seed
        self.cache: dict = {}

    def __call__(self, genome: Genome) -> float:
        return fitness(genome, self.train, self.holdout, self.cache, self.seed)


@dataclass
class GaHistory:
    best_fitness: list[float] = field(default_factory=list)
    mean_fitness: list[float] = field(default_factory=list)
    best_genome: list[Genome] = field(default_factory=list)
    populations: list[list[Genome]] = field(default_factory=list)
    fitnesses: list[list[float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best_fitness)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "best_fitness", "mean_fitness", "best_genome"])
            for gen, (b, m, g) in enumerate(zip(self.best_fitness, self.mean_fitness, self.best_genome)):
                w.writerow([gen, repr(b), repr(m), json.dumps(g.as_dict(), sort_keys=True)])
        return path


def evolve(
    template: Genome,
    cfg: GaConfig,
    train=None,
    holdout=None,
    fitness_fn: Callable[[Genome], float] | None = None,
    model_seed: int = 0,
    seeds: Sequence[Genome] = (),
) -> tuple[Genome, GaHistory]:
    """Run ``cfg.generations`` generations after the initial one.

    Pass ``fitness_fn`` to optimise something other than GBDT holdout error;
    otherwise ``train``/``holdout`` frames are required. ``seeds`` warm-start
    the initial population.
    """
    if fitness_fn is None:
        if train is None or holdout is None:
            raise ConfigError("evolve needs train/holdout frames or a fitness_fn")
        fitness_fn = GbdtFitness(train, holdout, seed=model_seed)
    rng = np.random.default_rng(cfg.seed)
    population = init_population(template, cfg, rng, seeds)
    history = GaHistory()
    best, best_fit = None, -np.inf
    for gen in range(cfg.generations + 1):
        fits = [float(fitness_fn(g)) for g in population]
        order = sorted(range(len(population)), key=lambda i: -fits[i])
        gen_best = population[order[0]]
        history.best_fitness.append(fits[order[0]])
        history.mean_fitness.append(float(np.mean(fits)))
        history.best_genome.append(gen_best)
        history.populations.append(list(population))
        history.fitnesses.append(fits)
        if fits[order[0]] > best_fit:
            best, best_fit = gen_best, fits[order[0]]
        if gen == cfg.generations:
            break
        nxt = [population[i] for i in order[: cfg.elite_count]]
        while len(nxt) < cfg.population_size:
            a = tournament_select(population, fits, cfg, rng)
            b = tournament_select(population, fits, cfg, rng)
            c1, c2 = crossover(a, b, cfg, rng)
            nxt.append(mutate(c1, cfg, rng))
            if len(nxt) < cfg.population_size:
                nxt.append(mutate(c2, cfg, rng))
        population = nxt
    return best, history


def top_genomes(history: GaHistory, k: int) -> list[Genome]:
    """The ``k`` fittest distinct genomes seen over the whole run, best first.

    Ties keep the order in which the genomes were first evaluated.
    """
    seen: dict = {}
    for pop, fits in zip(history.populations, history.fitnesses):
        for g, f in zip(pop, fits):
            if g.values not in seen:
                seen[g.values] = (f, len(seen), g)
    ranked = sorted(seen.values(), key=lambda t: (-t[0], t[1]))
    return [g for _, _, g in ranked[:k]]


def rerank(candidates: Sequence[Genome], fitness_fn: Callable[[Genome], float]) -> tuple[Genome, list[float]]:
    """Re-score ``candidates`` with a second fitness and return the best.

    Used to re-check a search run on a row-capped slice against the full
    slice; the first candidate wins ties.
    """
    if not candidates:
        raise ConfigError("rerank needs at least one candidate")
    scores = [float(fitness_fn(g)) for g in candidates]
    return candidates[int(np.argmax(scores))], scores
