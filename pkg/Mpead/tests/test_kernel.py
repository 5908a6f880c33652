import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from mpead.errors import ArityMismatch, DuplicateFunction, MissingFitness, UnresolvedAlgorithm, UnresolvedSelector
from mpead.functions import EVAL, GENETIC, builtin_registry, register_function
from mpead.kernel import (
    AlgoConfig,
    Individual,
    Population,
    diversity,
    ea_step,
    init_population,
    mutate,
    one_point_crossover,
    resolve_algorithm,
)
from mpead.schemas import GenomeKind, GenomeSpec, InfoKind
from mpead.selectors import resolve_selector, select_best, select_random, select_tournament2

BITS = GenomeSpec(kind=GenomeKind.BITS, length=12)
REALS = GenomeSpec(kind=GenomeKind.REALS, length=5)

bit_pairs = st.integers(min_value=1, max_value=64).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
))


@pytest.fixture
def registry():
    return builtin_registry()


def evaluated(pop, score=lambda g: float(g.sum())):
    for ind in pop.individuals:
        ind.fitness = score(ind.genome)
    return pop


def test_onemax(registry):
    assert registry.resolve("onemax")(np.array([1, 0, 1, 1, 0, 1], dtype=np.uint8)) == 4.0


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64), st.floats(0.05, 1.0))
def test_coarse_onemax_bounds(bits, precision):
    genome = np.array(bits, dtype=np.uint8)
    value = builtin_registry().resolve("coarse_onemax")(genome, precision=precision)
    assert 0.0 <= value <= len(bits)


def test_coarse_onemax(registry):
    coarse = registry.resolve("coarse_onemax")
    ones = np.ones(30, dtype=np.uint8)
    assert coarse(ones) == 30.0
    assert coarse(np.zeros(30, dtype=np.uint8)) == 0.0
    # 15 of 30 positions are read by default
    assert coarse(np.array([1, 0] * 15, dtype=np.uint8)) % 2 == 0
    mixed = np.array([1, 1, 0, 1, 0, 0, 1, 0, 1, 1], dtype=np.uint8)
    assert coarse(mixed, precision=1.0) == registry.resolve("onemax")(mixed)
    with pytest.raises(ValueError):
        coarse(ones, precision=0.0)


@given(bit_pairs)
def test_pred_prey_zero_sum(pair):
    "predator and prey scores always add up to the genome length"
    registry = builtin_registry()
    pred, prey = (np.array(bits, dtype=np.uint8) for bits in pair)
    total = registry.resolve("pred_score")(pred, prey) + registry.resolve("prey_score")(pred, prey)
    assert total == len(pred)


@given(bit_pairs)
def test_functions_are_pure(pair):
    registry = builtin_registry()
    a, b = (np.array(bits, dtype=np.uint8) for bits in pair)
    before = (a.copy(), b.copy())
    for name in ("pred_score", "prey_score", "coop_eval"):
        fn = registry.resolve(name)
        assert fn(a, b) == fn(a, b)
    assert np.array_equal(a, before[0])
    assert np.array_equal(b, before[1])


def test_unequal_lengths(registry):
    with pytest.raises(ArityMismatch):
        registry.resolve("pred_score")(np.zeros(3), np.zeros(4))


@pytest.mark.parametrize("bits, lo, hi, expected", [
    ([0, 0, 0], 0.0, 1.0, 0.0),
    ([1, 1, 1], 0.0, 1.0, 1.0),
    ([1, 0, 0], 0.0, 7.0, 4.0),
    ([1, 1], -1.0, 1.0, 1.0),
])
def test_decode_binary(registry, bits, lo, hi, expected):
    assert registry.resolve("decode_binary")(np.array(bits), lo=lo, hi=hi) == pytest.approx(expected)


def test_gray_decode(registry):
    decoded = registry.resolve("gray_decode")(np.array([1, 1, 0, 1], dtype=np.uint8))
    assert decoded.tolist() == [1, 0, 0, 1]


def test_multi_output(registry):
    split = registry.resolve("coop_split")
    assert split(np.array([1, 1, 0]), np.array([0, 1])) == (2.0, 1.0)
    assert split.multi == 2


def test_modify_default_weight(registry):
    assert registry.resolve("modify")(10.0, np.ones(5)) == pytest.approx(10.5)
    assert registry.resolve("modify")(10.0, np.ones(5), weight=1.0) == pytest.approx(15.0)


def test_duplicate_function(registry):
    with pytest.raises(DuplicateFunction):
        registry.register("onemax", [GENETIC], EVAL, lambda g: 0.0)


def test_register_and_decorate(registry):
    register_function("zeros", [GENETIC], EVAL, lambda g: float((g == 0).sum()), registry=registry)

    @registry.function("half", [EVAL], EVAL)
    def half(value):
        return value / 2

    assert "zeros" in registry
    assert registry.resolve("half")(3.0) == 1.5
    assert "zeros" not in builtin_registry()


@pytest.mark.parametrize("inputs, outputs", [
    ([InfoKind.GENOTYPIC, InfoKind.GENOTYPIC], [InfoKind.EVALUATIVE]),
    ([InfoKind.EVALUATIVE], [InfoKind.EVALUATIVE]),
    ([InfoKind.GENOTYPIC], [InfoKind.PHENOTYPIC]),
])
def test_signature_check(registry, inputs, outputs):
    with pytest.raises(ArityMismatch):
        registry.resolve("onemax").check("F", inputs, outputs)


def test_signature_ok(registry):
    registry.resolve("onemax").check("F", [InfoKind.PHENOTYPIC], [InfoKind.EVALUATIVE])
    with pytest.raises(ArityMismatch):
        registry.resolve("coop_split").check(
            "F", [InfoKind.GENOTYPIC] * 2, [InfoKind.EVALUATIVE])


@pytest.mark.parametrize("spec", [BITS, REALS])
def test_ea_step_keeps_size(spec):
    rng = np.random.default_rng(1)
    pop = evaluated(init_population("P", spec, 11, AlgoConfig(), rng))
    child = ea_step(pop, rng)
    assert child.size == 11
    assert child.genomes().shape == (11, spec.length)
    assert child.individuals[0].fitness == max(ind.fitness for ind in pop.individuals)
    assert all(ind.fitness is None for ind in child.individuals[1:])


def test_ea_step_missing_fitness():
    rng = np.random.default_rng(0)
    pop = evaluated(init_population("P", BITS, 6, AlgoConfig(), rng))
    pop.individuals[3].fitness = None
    with pytest.raises(MissingFitness):
        ea_step(pop, rng)


def test_ea_step_pending_first():
    rng = np.random.default_rng(0)
    pop = evaluated(init_population("P", BITS, 6, AlgoConfig(), rng))
    arrival = Individual(np.ones(12, dtype=np.uint8), pending=True)
    pop.individuals[4] = arrival
    child = ea_step(pop, rng)
    assert child.individuals[0].pending
    assert np.array_equal(child.individuals[0].genome, arrival.genome)
    assert child.individuals[0] is not arrival
    assert child.size == 6


def test_ea_step_without_variation():
    "with no crossover or mutation, every child is a copy of a parent"
    algo = AlgoConfig(crossover_rate=0.0, mutation_rate=0.0, elitism=2)
    rng = np.random.default_rng(5)
    pop = evaluated(init_population("P", BITS, 20, algo, rng))
    parents = {ind.genome.tobytes() for ind in pop.individuals}
    best = max(pop.individuals, key=lambda ind: ind.fitness)
    child = ea_step(pop, rng)
    assert np.array_equal(child.individuals[0].genome, best.genome)
    assert all(ind.genome.tobytes() in parents for ind in child.individuals)


def test_mutation_and_crossover():
    rng = np.random.default_rng(2)
    a, b = np.zeros(10, dtype=np.uint8), np.ones(10, dtype=np.uint8)
    x, y = one_point_crossover(a, b, 1.0, rng)
    assert (x + y).tolist() == [1] * 10
    assert x[0] == 0 and x[-1] == 1
    assert a.sum() == 0
    flipped = mutate(a, GenomeSpec(kind=GenomeKind.BITS, length=10), AlgoConfig(mutation_rate=1.0), rng)
    assert flipped.tolist() == [1] * 10
    moved = mutate(np.zeros(5), REALS, AlgoConfig(mutation_rate=1.0), rng)
    assert np.all(moved != 0.0)


def test_diversity():
    algo = AlgoConfig()
    same = Population("P", BITS, algo, [Individual(np.zeros(12, dtype=np.uint8)) for _ in range(4)])
    assert diversity(same) == 0.0
    apart = Population("P", BITS, algo, [Individual(np.zeros(12, dtype=np.uint8)),
                                         Individual(np.ones(12, dtype=np.uint8))])
    assert diversity(apart) == 12.0


def test_population_fitness_summary():
    pop = Population("P", BITS, AlgoConfig(), [
        Individual(np.zeros(12, dtype=np.uint8), fitness=2.0),
        Individual(np.zeros(12, dtype=np.uint8)),
        Individual(np.zeros(12, dtype=np.uint8), fitness=4.0),
    ])
    assert pop.best_fitness() == 4.0
    assert pop.mean_fitness() == 3.0
    assert np.isnan(pop.fitness()[1])


def test_algorithms():
    assert resolve_algorithm("ga") == AlgoConfig()
    custom = AlgoConfig(elitism=3)
    assert resolve_algorithm("steady", {"steady": custom}) is custom
    with pytest.raises(UnresolvedAlgorithm):
        resolve_algorithm("cmaes")
    assert AlgoConfig().mutation_for(20) == pytest.approx(0.05)


def test_select_best_nan_last():
    fitness = np.array([1.0, np.nan, 5.0, 3.0, 5.0])
    assert select_best(fitness, 3, np.random.default_rng(0)).tolist() == [2, 4, 3]
    assert select_best(fitness, 7, np.random.default_rng(0)).tolist()[-2:] == [2, 4]


@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1))
def test_select_random_distinct(k, seed):
    fitness = np.zeros(30)
    chosen = select_random(fitness, k, np.random.default_rng(seed))
    assert len(set(chosen.tolist())) == k


def test_select_random_replaces_when_short():
    chosen = select_random(np.zeros(3), 10, np.random.default_rng(0))
    assert len(chosen) == 10
    assert set(chosen.tolist()) <= {0, 1, 2}


def test_tournament_prefers_fitter():
    fitness = np.array([0.0, 10.0])
    chosen = select_tournament2(fitness, 200, np.random.default_rng(0))
    assert (chosen == 1).mean() > 0.6


def test_resolve_selector():
    assert resolve_selector("best") is select_best
    assert resolve_selector("top", {"top": "best"}) is select_best
    custom = lambda fitness, k, rng: np.zeros(k, dtype=int)
    assert resolve_selector("zero", extra={"zero": custom}) is custom
    with pytest.raises(UnresolvedSelector):
        resolve_selector("roulette")
