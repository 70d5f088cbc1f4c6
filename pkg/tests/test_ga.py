import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_frame
from ghiforecast import ga
from ghiforecast.errors import BadBounds, ConfigError, SchemaMismatch
from ghiforecast.models import GbdtConfig, fit_gbdt, four_xgb_presets, predict_gbdt
from ghiforecast.metrics import mae

TEMPLATE = ga.make_template()


def _toy(genome):
    # smooth bowl with its peak inside the bounds
    v = np.array(genome.values)
    lo = np.array([g.lo for g in genome.genes])
    hi = np.array([g.hi for g in genome.genes])
    z = (v - lo) / (hi - lo)
    return -float(np.sum((z - 0.3) ** 2))


def test_template_covers_every_hyperparameter():
    assert TEMPLATE.names == ("n_rounds", "eta", "max_depth", "min_child_weight", "lambda", "gamma", "subsample", "colsample")
    assert isinstance(TEMPLATE.decode(), GbdtConfig)


def test_gene_clamps_and_rounds():
    g = ga.Gene("d", "int", 2, 10, 2)
    assert g.with_value(3.6).value == 4.0
    assert g.with_value(99).value == 10.0
    assert g.with_value(-5).value == 2.0
    r = ga.Gene("eta", "real", 0.01, 0.5, 0.1)
    assert r.with_value(0.7).value == 0.5
    with pytest.raises(BadBounds):
        ga.Gene("x", "real", 1.0, 0.0, 0.5)
    with pytest.raises(ConfigError):
        ga.Gene("x", "float", 0.0, 1.0, 0.5)


def test_init_population():
    cfg = ga.GaConfig(population_size=20, seed=4)
    pop = ga.init_population(TEMPLATE, cfg)
    assert len(pop) == 20 and all(g.in_bounds() for g in pop)
    assert [g.values for g in pop] == [g.values for g in ga.init_population(TEMPLATE, cfg)]


def test_init_population_degenerate_bounds():
    t = ga.make_template((("a", "real", 2.0, 2.0), ("b", "int", 3, 3)))
    for g in ga.init_population(t, ga.GaConfig(population_size=5)):
        assert g.values == (2.0, 3.0)


def test_init_population_with_seeds():
    warm = [ga.encode(TEMPLATE, c) for c in four_xgb_presets()]
    cfg = ga.GaConfig(population_size=8, seed=1)
    plain = ga.init_population(TEMPLATE, cfg)
    seeded = ga.init_population(TEMPLATE, cfg, seeds=warm)
    assert seeded[:4] == warm
    assert seeded[4:] == plain[4:]
    with pytest.raises(ConfigError):
        ga.init_population(TEMPLATE, ga.GaConfig(population_size=3), seeds=warm)


def test_encode_decode_round_trip():
    for cfg in four_xgb_presets():
        back = ga.encode(TEMPLATE, cfg).decode(cfg.seed)
        for name in ("n_rounds", "eta", "max_depth", "min_child_weight", "reg_lambda", "gamma", "subsample", "colsample"):
            assert getattr(back, name) == getattr(cfg, name)


def test_tournament_full_size():
    rng = np.random.default_rng(0)
    pop = ga.init_population(TEMPLATE, ga.GaConfig(population_size=6))
    fits = [0.1, 0.5, 0.2, 0.9, 0.3, 0.0]
    cfg = ga.GaConfig(population_size=6, tournament_size=6)
    # draws are with replacement, so the best is picked only when drawn:
    # probability 1 - (5/6)^6
    picks = [ga.tournament_select(pop, fits, cfg, rng) for _ in range(4000)]
    share = sum(p is pop[3] for p in picks) / 4000
    assert abs(share - (1 - (5 / 6) ** 6)) < 0.03


def test_tournament_ties_go_to_first_draw():
    pop = ga.init_population(TEMPLATE, ga.GaConfig(population_size=5))
    cfg = ga.GaConfig(population_size=5, tournament_size=3)
    a = np.random.default_rng(11)
    b = np.random.default_rng(11)
    first = int(b.integers(0, 5, size=3)[0])
    assert ga.tournament_select(pop, [1.0] * 5, cfg, a) is pop[first]


def test_tournament_size_one_is_uniform():
    pop = ga.init_population(TEMPLATE, ga.GaConfig(population_size=4))
    cfg = ga.GaConfig(population_size=4, tournament_size=1)
    rng = np.random.default_rng(3)
    counts = np.zeros(4)
    for _ in range(4000):
        counts[pop.index(ga.tournament_select(pop, [0, 1, 2, 3], cfg, rng))] += 1
    assert np.all(np.abs(counts / 4000 - 0.25) < 0.04)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rate=st.floats(0.0, 1.0))
def test_crossover_takes_genes_from_parents(seed, rate):
    rng = np.random.default_rng(seed)
    a, b = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3, seed=seed))[:2]
    c1, c2 = ga.crossover(a, b, ga.GaConfig(crossover_rate=rate), rng)
    for ga_, gb, x, y in zip(a.genes, b.genes, c1.genes, c2.genes):
        assert {x.value, y.value} == {ga_.value, gb.value}
    assert c1.in_bounds() and c2.in_bounds()


def test_crossover_identity_cases():
    rng = np.random.default_rng(0)
    a, b = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3))[:2]
    assert ga.crossover(a, a, ga.GaConfig(), rng) == (a, a)
    assert ga.crossover(a, b, ga.GaConfig(crossover_rate=0.0), rng) == (a, b)
    other = ga.make_template((("x", "real", 0, 1),))
    with pytest.raises(SchemaMismatch):
        ga.crossover(a, other, ga.GaConfig(), rng)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rate=st.floats(0.0, 1.0), sigma=st.floats(0.0, 3.0))
def test_mutation_stays_in_bounds(seed, rate, sigma):
    rng = np.random.default_rng(seed)
    g = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3, seed=seed))[0]
    m = ga.mutate(g, ga.GaConfig(mutation_rate=rate, mutation_sigma=sigma), rng)
    assert m.in_bounds()


def test_mutation_identity_cases():
    rng = np.random.default_rng(0)
    g = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3))[0]
    assert ga.mutate(g, ga.GaConfig(mutation_rate=0.0), rng) == g
    m = ga.mutate(g, ga.GaConfig(mutation_rate=1.0, mutation_sigma=0.0), rng)
    for a, b in zip(g.genes, m.genes):
        assert a.value == b.value


def _check_run(best, hist, cfg):
    assert np.all(np.diff(hist.best_fitness) >= 0)
    for pop in hist.populations:
        assert len(pop) == cfg.population_size
        assert all(g.in_bounds() for g in pop)
    # elites survive unchanged into the next generation
    for pop, fits, nxt in zip(hist.populations, hist.fitnesses, hist.populations[1:]):
        order = np.argsort(-np.asarray(fits), kind="stable")[: cfg.elite_count]
        for i in order:
            assert pop[i] in nxt
    assert max(max(f) for f in hist.fitnesses) == hist.best_fitness[-1] == _toy(best)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_evolve_elitism_and_bounds(seed):
    cfg = ga.GaConfig(population_size=8, generations=5, seed=seed)
    best, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)
    assert len(hist) == 6
    _check_run(best, hist, cfg)


def test_evolve_zero_generations():
    cfg = ga.GaConfig(population_size=6, generations=0, seed=2)
    best, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)
    pop = ga.init_population(TEMPLATE, cfg)
    assert best == max(pop, key=_toy)
    assert len(hist) == 1


def test_evolve_deterministic():
    cfg = ga.GaConfig(population_size=8, generations=4, seed=9)
    a = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)[1]
    b = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)[1]
    assert a.best_fitness == b.best_fitness
    assert [g.values for g in a.best_genome] == [g.values for g in b.best_genome]


def test_evolve_improves_toy():
    cfg = ga.GaConfig(population_size=16, generations=15, seed=0)
    _, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)
    assert hist.best_fitness[-1] > hist.best_fitness[0]


def test_evolve_needs_fitness():
    with pytest.raises(ConfigError):
        ga.evolve(TEMPLATE, ga.GaConfig())


def test_fitness_is_negative_holdout_mae(rng):
    f = random_frame(rng, 120, 3)
    train, holdout = f.take(np.arange(90)), f.take(np.arange(90, 120))
    g = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3, seed=1))[0]
    model = fit_gbdt(train, g.decode(0))
    assert ga.fitness(g, train, holdout) == -mae(holdout.y, predict_gbdt(model, holdout))


def test_perfect_prediction_fitness_is_zero():
    t = ga.make_template((("n_rounds", "int", 0, 0),))
    frame = random_frame(np.random.default_rng(0), 20, 2)
    const = frame.take(np.arange(20))
    const = type(frame)(const.columns, const.X, np.full(20, 3.0), const.row_keys)
    assert ga.fitness(t.genes and ga.Genome(t.genes), const, const) == 0.0


def test_fitness_cache_skips_retraining(rng, monkeypatch):
    calls = []
    real = ga.fit_gbdt

    def counting(*args, **kwargs):
        calls.append(1)
        return real(*args, **kwargs)

    monkeypatch.setattr(ga, "fit_gbdt", counting)
    f = random_frame(rng, 60, 2)
    fit = ga.GbdtFitness(f.take(np.arange(40)), f.take(np.arange(40, 60)))
    g = ga.init_population(TEMPLATE, ga.GaConfig(population_size=3, seed=3))[0]
    g = ga.Genome(tuple(x.with_value(20) if x.name == "n_rounds" else x for x in g.genes))
    first = fit(g)
    assert fit(g) == first and len(calls) == 1
    uncached = ga.fitness(g, fit.train, fit.holdout)
    assert uncached == first and len(calls) == 2


def test_warm_start_never_worse_than_presets(rng):
    f = random_frame(rng, 150, 3, noise=0.5)
    train, holdout = f.take(np.arange(110)), f.take(np.arange(110, 150))
    warm = [ga.encode(TEMPLATE, c) for c in four_xgb_presets()]
    cfg = ga.GaConfig(population_size=6, generations=1, seed=0)
    fn = ga.GbdtFitness(train, holdout)
    _, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=fn, seeds=warm)
    preset_best = max(fn(w) for w in warm)
    assert hist.best_fitness[-1] >= preset_best


def test_top_genomes_and_rerank():
    cfg = ga.GaConfig(population_size=8, generations=3, seed=5)
    _, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)
    top = ga.top_genomes(hist, 4)
    assert len(top) == 4 and len({g.values for g in top}) == 4
    scores = [_toy(g) for g in top]
    assert scores == sorted(scores, reverse=True)
    assert _toy(top[0]) == hist.best_fitness[-1]
    # a second fitness that prefers the last candidate
    best, rescored = ga.rerank(top, lambda g: -_toy(g))
    assert best == top[-1] and rescored == [-s for s in scores]
    with pytest.raises(ConfigError):
        ga.rerank([], _toy)


def test_history_csv(tmp_path):
    cfg = ga.GaConfig(population_size=4, generations=2, seed=1)
    _, hist = ga.evolve(TEMPLATE, cfg, fitness_fn=_toy)
    lines = hist.to_csv(tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "generation,best_fitness,mean_fitness,best_genome"
    assert len(lines) == 4


@pytest.mark.parametrize(
    "bad",
    [dict(population_size=1), dict(elite_count=0), dict(elite_count=16), dict(tournament_size=17), dict(crossover_rate=1.5), dict(mutation_sigma=-1)],
)
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ga.GaConfig(**bad)


def test_generation_presets():
    assert ga.GENERATION_PRESETS == (3, 5, 10)
