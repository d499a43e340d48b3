import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saopt.evo_core import (
    Direction,
    FitnessVector,
    GeneSpec,
    Individual,
    Population,
    Source,
    blx_alpha_crossover,
    clamp_to_bounds,
    elite_selection,
    elite_size,
    gaussian_mutation,
    gaussian_sigma,
    init_random_population,
    intermediate_children,
    intermediate_crossover,
    random_substitution_mutation,
    single_objective_order,
    tournament_selection,
)
from saopt.sims import CPS1_GENES, PSA_GENES

UNIT = [GeneSpec("x", 0.0, 1.0)]
SIX = [GeneSpec(f"g{i}", 0.0, 10.0) for i in range(6)]


def _pop(values, genomes=None):
    genomes = genomes if genomes is not None else [[float(i)] for i in range(len(values))]
    return Population([
        Individual(np.array(g), FitnessVector((v,), (Direction.MAXIMIZE,)), Source.SIMULATION)
        for g, v in zip(genomes, values)
    ])


@st.composite
def specs_and_genomes(draw, n_genomes=2):
    d = draw(st.integers(1, 8))
    specs = []
    for i in range(d):
        lo = draw(st.floats(-1e3, 1e3))
        width = draw(st.floats(1e-3, 1e3))
        specs.append(GeneSpec(f"g{i}", lo, lo + width))
    genomes = [
        np.array([draw(st.floats(s.lower, s.upper)) for s in specs]) for _ in range(n_genomes)
    ]
    return specs, genomes


# -- data types ---------------------------------------------------------------

def test_genespec_rejects_bad_bounds():
    with pytest.raises(ValueError):
        GeneSpec("x", 1.0, 1.0)
    with pytest.raises(ValueError):
        GeneSpec("x", 0.0, math.inf)


def test_fitness_vector_needs_matching_directions():
    with pytest.raises(ValueError):
        FitnessVector((1.0, 2.0), (Direction.MAXIMIZE,))
    with pytest.raises(ValueError):
        FitnessVector((), ())
    assert FitnessVector((2.0, 3.0), (Direction.MAXIMIZE, Direction.MINIMIZE)).oriented().tolist() == [2.0, -3.0]


def test_individual_source_matches_fitness_presence():
    Individual(np.zeros(2))
    with pytest.raises(ValueError):
        Individual(np.zeros(2), source=Source.SIMULATION)
    with pytest.raises(ValueError):
        Individual(np.zeros(2), FitnessVector((1.0,), (Direction.MAXIMIZE,)), Source.UNEVALUATED)


def test_population_members_must_agree_in_shape():
    with pytest.raises(ValueError):
        Population([Individual(np.zeros(2)), Individual(np.zeros(3))])
    with pytest.raises(ValueError):
        Population([], generation=-1)


# -- initialization -----------------------------------------------------------

def test_init_unit_gene_within_bounds():
    pop = init_random_population(UNIT, 3, np.random.default_rng(1))
    assert len(pop) == 3 and pop.generation == 0
    g = pop.genomes()
    assert np.all((g >= 0) & (g <= 1))
    assert all(m.source is Source.UNEVALUATED and m.fitness is None for m in pop)


def test_init_cps1_warm_population_within_table_bounds():
    pop = init_random_population(CPS1_GENES, 800, np.random.default_rng(2))
    g = pop.genomes()
    assert g.shape == (800, 8)
    lo = np.array([s.lower for s in CPS1_GENES])
    hi = np.array([s.upper for s in CPS1_GENES])
    assert np.all(g >= lo) and np.all(g <= hi)


def test_init_is_deterministic():
    a = init_random_population(CPS1_GENES, 20, np.random.default_rng(7)).genomes()
    b = init_random_population(CPS1_GENES, 20, np.random.default_rng(7)).genomes()
    assert np.array_equal(a, b)


def test_init_rejects_empty_inputs():
    with pytest.raises(ValueError):
        init_random_population([], 3, np.random.default_rng(0))
    with pytest.raises(ValueError):
        init_random_population(UNIT, 0, np.random.default_rng(0))


# -- clamp --------------------------------------------------------------------

def test_clamp_examples():
    assert clamp_to_bounds([1.5], UNIT).tolist() == [1.0]
    assert clamp_to_bounds([0.5], UNIT).tolist() == [0.5]
    g = [12.0, 100.0, 0.5, 1.0, 0.5, 0.2]
    assert clamp_to_bounds(g, PSA_GENES)[0] == 10.0
    with pytest.raises(ValueError):
        clamp_to_bounds([0.5, 0.5], UNIT)


# -- BLX-alpha ----------------------------------------------------------------

def test_blx_alpha_zero_stays_in_parent_hull():
    specs = [GeneSpec("x", 0.0, 10.0)]
    rng = np.random.default_rng(3)
    kids = np.array([blx_alpha_crossover([2.0], [4.0], 0.0, specs, rng)[0] for _ in range(2000)])
    assert kids.min() >= 2.0 and kids.max() <= 4.0


def test_blx_interval_for_default_alpha():
    # range 220, widened by 0.15 * 220 = 33 on each side
    specs = [GeneSpec("tank", 0.0, 2000.0)]
    rng = np.random.default_rng(4)
    kids = np.array([blx_alpha_crossover([600.0], [820.0], 0.15, specs, rng)[0] for _ in range(20000)])
    assert kids.min() >= 567.0 and kids.max() <= 853.0
    # the widened interval is actually used, not just the hull
    assert kids.min() < 575.0 and kids.max() > 845.0


def test_blx_identical_parents():
    child = blx_alpha_crossover([0.3], [0.3], 0.7, UNIT, np.random.default_rng(0))
    assert child.tolist() == [0.3]


def test_blx_rejects_negative_alpha():
    with pytest.raises(ValueError):
        blx_alpha_crossover([0.1], [0.2], -0.1, UNIT, np.random.default_rng(0))


@settings(max_examples=150, deadline=None)
@given(specs_and_genomes(), st.floats(0.0, 2.0), st.integers(0, 2**32 - 1))
def test_blx_bounds_containment(data, alpha, seed):
    specs, (p1, p2) = data
    child = blx_alpha_crossover(p1, p2, alpha, specs, np.random.default_rng(seed))
    assert all(s.lower <= c <= s.upper for s, c in zip(specs, child))


@settings(max_examples=150, deadline=None)
@given(specs_and_genomes(), st.integers(0, 2**32 - 1))
def test_blx_alpha_zero_closure(data, seed):
    specs, (p1, p2) = data
    child = blx_alpha_crossover(p1, p2, 0.0, specs, np.random.default_rng(seed))
    assert np.all(child >= np.minimum(p1, p2)) and np.all(child <= np.maximum(p1, p2))


# -- random substitution ------------------------------------------------------

def test_substitution_zero_rate_is_identity():
    g = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    assert np.array_equal(random_substitution_mutation(g, SIX, 0.0, np.random.default_rng(0)), g)


def test_substitution_full_rate_is_uniform():
    rng = np.random.default_rng(5)
    draws = np.array([random_substitution_mutation([0.5], UNIT, 1.0, rng)[0] for _ in range(20000)])
    assert draws.min() >= 0 and draws.max() <= 1
    hist, _ = np.histogram(draws, bins=10, range=(0, 1))
    # chi-square against uniform, 9 dof; 27.9 is the 0.001 upper quantile
    chi2 = float(((hist - 2000) ** 2 / 2000).sum())
    assert chi2 < 27.9


def test_substitution_rate_mean_count():
    rng = np.random.default_rng(6)
    base = np.zeros(6)
    specs = [GeneSpec(f"g{i}", 0.0, 1.0) for i in range(6)]
    counts = [np.count_nonzero(random_substitution_mutation(base, specs, 0.3, rng) != base) for _ in range(10000)]
    assert abs(np.mean(counts) - 1.8) <= 0.1


def test_substitution_rejects_bad_rate():
    with pytest.raises(ValueError):
        random_substitution_mutation([0.5], UNIT, 1.5, np.random.default_rng(0))


# -- intermediate crossover ---------------------------------------------------

def test_intermediate_mask_zero_identity():
    p1, p2 = np.array([1.0, 2.0]), np.array([5.0, 7.0])
    c1, c2 = intermediate_children(p1, p2, [0, 0], [0.3, 0.9])
    assert c1.tolist() == p1.tolist() and c2.tolist() == p2.tolist()


def test_intermediate_full_mask_ratio_one_swaps():
    p1, p2 = np.array([1.0, 2.0]), np.array([5.0, 7.0])
    c1, c2 = intermediate_children(p1, p2, [1, 1], [1.0, 1.0])
    assert c1.tolist() == p2.tolist() and c2.tolist() == p1.tolist()


def test_intermediate_rate_zero_identity_through_rng():
    p1, p2 = np.arange(6.0), np.arange(6.0)[::-1].copy()
    c1, c2 = intermediate_crossover(p1, p2, 0.0, SIX, np.random.default_rng(0))
    assert np.array_equal(c1, p1) and np.array_equal(c2, p2)


def test_intermediate_selected_gene_count():
    rng = np.random.default_rng(8)
    p1, p2 = np.zeros(6), np.full(6, 10.0)
    counts = []
    for _ in range(10000):
        c1, _ = intermediate_crossover(p1, p2, 2 / 6, SIX, rng)
        counts.append(np.count_nonzero(c1 != p1))
    assert abs(np.mean(counts) - 2.0) <= 0.1


def test_intermediate_length_mismatch():
    with pytest.raises(ValueError):
        intermediate_crossover([1.0, 2.0], [1.0], 0.5, SIX[:2], np.random.default_rng(0))


@settings(max_examples=150, deadline=None)
@given(specs_and_genomes(), st.integers(0, 2**32 - 1))
def test_intermediate_sum_conservation(data, seed):
    specs, (p1, p2) = data
    rng = np.random.default_rng(seed)
    mask = rng.random(len(specs)) < 0.5
    ratio = rng.random(len(specs))
    c1, c2 = intermediate_children(p1, p2, mask, ratio)
    np.testing.assert_allclose(c1 + c2, p1 + p2, rtol=1e-12, atol=1e-9)


@settings(max_examples=150, deadline=None)
@given(specs_and_genomes(), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_intermediate_bounds_containment(data, rate, seed):
    specs, (p1, p2) = data
    for c in intermediate_crossover(p1, p2, rate, specs, np.random.default_rng(seed)):
        assert all(s.lower <= v <= s.upper for s, v in zip(specs, c))


# -- gaussian mutation --------------------------------------------------------

def test_gaussian_zero_rate_identity():
    g = np.arange(6.0)
    assert np.array_equal(gaussian_mutation(g, SIX, 0.0, 0.1, 0.5, 3, 60, np.random.default_rng(0)), g)


def test_gaussian_degenerate_sigma():
    g = np.arange(6.0)
    assert np.all(gaussian_sigma(SIX, 0.1, 1.0, 60, 60) == 0)
    assert np.array_equal(gaussian_mutation(g, SIX, 1.0, 0.1, 1.0, 60, 60, np.random.default_rng(0)), g)


def test_gaussian_sigma_schedule():
    # scale 0.1 of a 10-wide gene, halved at the last generation
    assert gaussian_sigma(SIX, 0.1, 0.5, 0, 60)[0] == pytest.approx(1.0)
    assert gaussian_sigma(SIX, 0.1, 0.5, 60, 60)[0] == pytest.approx(0.5)


def test_gaussian_perturbed_gene_count():
    rng = np.random.default_rng(9)
    g = np.full(6, 5.0)
    counts = [np.count_nonzero(gaussian_mutation(g, SIX, 2 / 6, 0.1, 0.5, 0, 60, rng) != g) for _ in range(10000)]
    assert abs(np.mean(counts) - 2.0) <= 0.1


@pytest.mark.parametrize(
    "rate,scale,shrink,gen,max_gen",
    [(1.5, 0.1, 0.5, 0, 60), (0.5, 0.0, 0.5, 0, 60), (0.5, 0.1, 1.5, 0, 60), (0.5, 0.1, 0.5, 61, 60)],
)
def test_gaussian_rejects_bad_parameters(rate, scale, shrink, gen, max_gen):
    with pytest.raises(ValueError):
        gaussian_mutation(np.zeros(6), SIX, rate, scale, shrink, gen, max_gen, np.random.default_rng(0))


@settings(max_examples=150, deadline=None)
@given(specs_and_genomes(n_genomes=1), st.floats(0, 1), st.floats(1e-3, 2.0), st.integers(0, 2**32 - 1))
def test_gaussian_bounds_containment(data, rate, scale, seed):
    specs, (g,) = data
    out = gaussian_mutation(g, specs, rate, scale, 0.5, 10, 60, np.random.default_rng(seed))
    assert all(s.lower <= v <= s.upper for s, v in zip(specs, out))


@settings(max_examples=60, deadline=None)
@given(specs_and_genomes(), st.integers(0, 2**32 - 1))
def test_operators_deterministic_under_seed(data, seed):
    specs, (p1, p2) = data
    for op in (
        lambda r: blx_alpha_crossover(p1, p2, 0.15, specs, r),
        lambda r: random_substitution_mutation(p1, specs, 0.3, r),
        lambda r: np.concatenate(intermediate_crossover(p1, p2, 0.4, specs, r)),
        lambda r: gaussian_mutation(p1, specs, 0.4, 0.1, 0.5, 3, 10, r),
    ):
        assert np.array_equal(op(np.random.default_rng(seed)), op(np.random.default_rng(seed)))


# -- selection ----------------------------------------------------------------

def test_tournament_counts_and_draws():
    pop = _pop(np.arange(60.0))

    class Counting:
        def __init__(self):
            self.n = 0
            self.rng = np.random.default_rng(10)

        def integers(self, lo, hi, size):
            self.n += int(np.prod(size))
            return self.rng.integers(lo, hi, size=size)

    rng = Counting()
    out = tournament_selection(pop, 2, 60, single_objective_order, rng)
    assert len(out) == 60
    assert rng.n == 120


def test_tournament_single_member():
    pop = _pop([3.0])
    out = tournament_selection(pop, 2, 5, single_objective_order, np.random.default_rng(0))
    assert [m.fitness.values[0] for m in out] == [3.0] * 5


def test_tournament_better_wins():
    pop = _pop([5.0, 9.0])
    rng = np.random.default_rng(11)
    # a large tournament samples both members with near certainty
    out = tournament_selection(pop, 64, 20, single_objective_order, rng)
    assert all(m.fitness.values[0] == 9.0 for m in out)


def test_tournament_rejects_empty():
    with pytest.raises(ValueError):
        tournament_selection(Population([]), 2, 1, single_objective_order, np.random.default_rng(0))


def test_elite_size_rounding():
    assert elite_size(75, 0.15) == 12
    assert elite_size(60, 0.15) == 9
    assert elite_size(5, 0.01) == 1


def test_elite_selection_examples():
    rng = np.random.default_rng(12)
    vals = rng.permutation(75).astype(float)
    pop = _pop(vals)
    elite = elite_selection(pop, 0.15, single_objective_order)
    assert len(elite) == 12
    full = elite_selection(pop, 1.0, single_objective_order)
    assert [m.fitness.values[0] for m in full] == sorted(vals, reverse=True)


def test_elite_selection_requires_evaluation():
    pop = Population([Individual(np.zeros(1)), Individual(np.zeros(1))])
    with pytest.raises(RuntimeError):
        elite_selection(pop, 0.5, single_objective_order)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60, unique=True), st.floats(0.01, 1.0))
def test_elite_is_a_partition(values, fraction):
    pop = _pop(values)
    elite = elite_selection(pop, fraction, single_objective_order)
    ids = {id(m) for m in elite}
    rest = [m for m in pop if id(m) not in ids]
    assert len(ids) == len(elite) and len(elite) + len(rest) == len(pop)
    if rest:
        assert min(m.fitness.values[0] for m in elite) >= max(m.fitness.values[0] for m in rest)


def test_single_objective_order_respects_direction():
    pop = Population([
        Individual(np.zeros(1), FitnessVector((v,), (Direction.MINIMIZE,)), Source.SIMULATION) for v in (3.0, 1.0, 2.0)
    ])
    assert single_objective_order(pop) == [1, 2, 0]
