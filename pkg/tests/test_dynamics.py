import itertools
import math
import random
from fractions import Fraction

import pytest

from amenable_entropy.dynamics.entropy import (
    conditional_entropy,
    exp_inequality_check,
    logsumexp,
    shannon_entropy,
)
from amenable_entropy.dynamics.fixtures import (
    SWAP_ALPHA,
    SWAP_COVER,
    refining_example,
    run_fixtures,
    swap_fixture,
)
from amenable_entropy.dynamics.functionals import naive_entropy, ollagnier_entropy, ow_entropy
from amenable_entropy.dynamics.pressure import (
    delone_pressure_1d,
    goodwyn_check,
    is_adapted,
    naive_pressure,
    ow_pressure,
    pressure_by_enumeration,
    pressure_P_f,
    refine_cover,
    refining_arc_cover,
    transfer_count,
)
from amenable_entropy.dynamics.refine import h_alpha_F, pattern_mass, refine, suspension_types
from amenable_entropy.dynamics.systems import (
    ArcCover,
    ArcPartition,
    Bernoulli,
    CircleRotation,
    Markov,
    ShiftSystem,
    Suspension,
    SymbolPartition,
    named_angle,
)
from amenable_entropy.geometry import FiniteSet, LatticeDelone, NetSpec, Region
from amenable_entropy.setfun import BudgetExceeded

F = Fraction
LOG2 = math.log(2)
GOLDEN = ((1, 1), (1, 0))


def S(*xs):
    return FiniteSet([(x,) for x in xs], dim=1)


def H(p):
    return -sum(float(x) * math.log(x) for x in p if x)


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def markov_pattern_oracle(P, pi, positions, labels):
    """Sum over all words on the hull of the positions."""
    lo, hi = min(positions), max(positions)
    fixed = dict(zip(positions, labels))
    total = F(0)
    k = len(P)
    for w in itertools.product(range(k), repeat=hi - lo + 1):
        if any(w[p - lo] != a for p, a in fixed.items()):
            continue
        m = pi[w[0]]
        for a, b in zip(w, w[1:]):
            m *= P[a][b]
        total += m
    return total


# ---------------------------------------------------------------- Shannon


def test_shannon_examples():
    assert shannon_entropy([F(1, 2), F(1, 2)]) == pytest.approx(LOG2)
    assert shannon_entropy([1, 0]) == 0
    assert shannon_entropy([F(1, 2), F(1, 4), F(1, 4)]) == pytest.approx(1.5 * LOG2)
    with pytest.raises(ValueError):
        shannon_entropy([F(3, 2), F(-1, 2)])


def test_conditional_entropy_examples():
    p = [F(1, 6), F(1, 3), F(1, 2)]
    same = [[p[i] if i == j else 0 for j in range(3)] for i in range(3)]
    assert conditional_entropy(same) == pytest.approx(0)
    assert conditional_entropy([[x] for x in p]) == pytest.approx(H(p))
    q = [F(1, 4), F(3, 4)]
    indep = [[a * b for b in q] for a in p]
    assert conditional_entropy(indep) == pytest.approx(H(p))


def test_exp_inequality():
    assert exp_inequality_check([F(1, 2), F(1, 2)], [0, 0])
    assert exp_inequality_check([1, 0, 0], [5.0, -1.0, 2.0])
    rng = random.Random(0)
    for _ in range(1000):
        k = rng.randint(1, 6)
        w = [rng.random() for _ in range(k)]
        p = [x / sum(w) for x in w]
        a = [rng.uniform(-5, 5) for _ in range(k)]
        assert exp_inequality_check(p, a)


def test_logsumexp_stable():
    assert logsumexp([1000.0, 1000.0]) == pytest.approx(1000 + LOG2)


# ---------------------------------------------------------------- shifts


def test_bernoulli_refinement_five_points():
    R = refine(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))), None, S(0, 3, 4, 9, -2))
    assert len(R) == 32 and set(R.masses) == {F(1, 32)}
    assert R.entropy() == pytest.approx(5 * LOG2)


def test_bernoulli_factorization_any_F():
    p = (F(1, 5), F(3, 10), F(1, 2))
    sysm = ShiftSystem(3, 2, Bernoulli(p))
    Fs = FiniteSet([(0, 0), (1, 3), (2, -1), (5, 5)], dim=2)
    assert h_alpha_F(sysm, None, Fs, method="enumerate") == pytest.approx(4 * H(p), abs=1e-12)
    assert h_alpha_F(sysm, None, Fs) == pytest.approx(4 * H(p), abs=1e-12)


def test_iid_markov_equals_bernoulli():
    half = (F(1, 2), F(1, 2))
    mk = ShiftSystem(2, 1, Markov((half, half)))
    be = ShiftSystem(2, 1, Bernoulli(half))
    Fs = S(0, 1, 4, 5)
    assert sorted(refine(mk, None, Fs).masses) == sorted(refine(be, None, Fs).masses)


@pytest.mark.parametrize("seed", range(6))
def test_markov_pattern_mass_against_word_oracle(seed):
    rng = random.Random(seed)
    P = ((F(1, 3), F(2, 3)), (F(3, 4), F(1, 4)))
    sysm = ShiftSystem(2, 1, Markov(P))
    pos = sorted(rng.sample(range(8), rng.randint(1, 4)))
    lab = [rng.randint(0, 1) for _ in pos]
    want = markov_pattern_oracle(P, sysm.measure.pi, pos, lab)
    assert pattern_mass(sysm, SymbolPartition.symbols(2), pos, lab) == want


@pytest.mark.parametrize("n", [1, 2, 5, 9, 14])
def test_markov_chain_rule_matches_enumeration(n):
    P = ((F(9, 10), F(1, 10)), (F(1, 5), F(4, 5)))
    sysm = ShiftSystem(2, 1, Markov(P))
    Fs = S(*range(n))
    R = refine(sysm, None, Fs)
    assert sum(R.masses) == 1
    assert h_alpha_F(sysm, None, Fs) == pytest.approx(R.entropy(), abs=1e-9)


def test_markov_gapped_F_and_lumped_partition():
    P = ((F(1, 2), F(1, 4), F(1, 4)), (F(1, 3), F(1, 3), F(1, 3)), (0, F(1, 2), F(1, 2)))
    sysm = ShiftSystem(3, 1, Markov(P))
    Fs = S(0, 2, 3, 7)
    assert h_alpha_F(sysm, None, Fs) == pytest.approx(h_alpha_F(sysm, None, Fs, method="enumerate"), abs=1e-9)
    lumped = SymbolPartition([[0], [1, 2]])
    R = refine(sysm, lumped, Fs)
    assert sum(R.masses) == 1 and len(R) <= 16


def test_shift_invariance_exact():
    P = ((F(1, 3), F(2, 3)), (F(3, 4), F(1, 4)))
    sysm = ShiftSystem(2, 1, Markov(P))
    a = sorted(refine(sysm, None, S(0, 1, 5)).masses)
    b = sorted(refine(sysm, None, S(17, 18, 22)).masses)
    assert a == b


def test_sft_forbidden_patterns_pruned():
    P = ((F(1, 2), F(1, 2)), (1, 0))
    sysm = ShiftSystem(2, 1, Markov(P), GOLDEN)
    R = refine(sysm, None, S(*range(6)))
    assert len(R) == fib(8)
    assert all(b"\x01\x01" not in bytes(c.key) for c in R.cells)


def test_sft_markov_must_respect_transitions():
    with pytest.raises(ValueError):
        ShiftSystem(2, 1, Markov(((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))), GOLDEN)


def test_refinement_budget():
    with pytest.raises(BudgetExceeded):
        refine(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))), None, S(*range(12)), budget=1000)


def test_entropy_monotone_and_subadditive_markov():
    P = ((F(1, 3), F(2, 3)), (F(3, 4), F(1, 4)))
    sysm = ShiftSystem(2, 1, Markov(P))
    h = lambda X: h_alpha_F(sysm, None, X) if len(X) else 0.0
    G = S(0, 1, 2, 4)
    subs = [FiniteSet(c, dim=1) for r in range(5) for c in itertools.combinations(G.points, r)]
    for E in subs:
        for K in subs:
            assert h(E | K) <= h(E) + h(K) + 1e-12
            if E <= K:
                assert h(E) <= h(K) + 1e-12


# ---------------------------------------------------------------- rotation


def rotation_raster_oracle(p, q, alpha_cuts, labels, gs, refine_by=4):
    """Rational angle p/q: all cut events lie on a 1/(q*den) grid; label each grid cell by its midpoint."""
    den = q * refine_by * math.lcm(*(c.denominator for c in alpha_cuts))
    part = ArcPartition(alpha_cuts, labels)
    acc = {}
    for i in range(den):
        x = F(2 * i + 1, 2 * den)
        key = tuple(part.label_at(x + g * F(p, q)) for g in gs)
        acc[key] = acc.get(key, F(0)) + F(1, den)
    return acc


@pytest.mark.parametrize("p,q", [(1, 3), (2, 7), (5, 12)])
def test_rotation_refinement_against_raster(p, q):
    gs = [0, 1, 2, 5]
    sysm = CircleRotation(F(p, q))
    R = refine(sysm, ArcPartition.half_circles(), S(*gs))
    got = {c.key: c.mass for c in R.cells}
    want = rotation_raster_oracle(p, q, (F(0), F(1, 2)), (0, 1), gs)
    assert got == want


def test_rotation_cell_count_and_mass():
    sysm = CircleRotation(named_angle("sqrt2-1"))
    for n in (1, 2, 10, 40):
        R = refine(sysm, None, S(*range(n)))
        assert len(R) <= 2 * n
        assert abs(sum(R.masses) - 1) < F(1, 10**30)
    assert h_alpha_F(sysm, None, S(0)) == pytest.approx(LOG2)
    two = refine(sysm, None, S(0, F(1, 3)))
    assert len(two) <= 4 and sum(two.masses) == 1


# ---------------------------------------------------------------- suspension


def test_suspension_lattice_omega():
    susp = Suspension(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))))
    for n in (1, 3, 6):
        assert h_alpha_F(susp, None, S(*range(n))) == pytest.approx(n * LOG2, abs=1e-12)


@pytest.mark.parametrize("measure", ["bernoulli", "markov"])
def test_suspension_fast_path_matches_enumeration(measure):
    m = Bernoulli((F(1, 3), F(2, 3))) if measure == "bernoulli" else Markov(((F(1, 3), F(2, 3)), (F(3, 4), F(1, 4))))
    susp = Suspension(ShiftSystem(2, 1, m))
    for Fs in (S(0, F(1, 2), 1, F(3, 2)), S(F(1, 3), F(5, 4), 2), S(0, F(1, 7), F(2, 7), F(9, 7))):
        fast = h_alpha_F(susp, None, Fs)
        slow = h_alpha_F(susp, None, Fs, method="enumerate")
        assert fast == pytest.approx(slow, abs=1e-10)


def test_suspension_types_partition_the_cell():
    susp = Suspension(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))))
    types = suspension_types(susp, S(0, F(1, 3), F(5, 2)))
    assert sum(t.length for t in types) == 1


def test_ow_entropy_suspension_half_lattice():
    susp = Suspension(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))))
    rep = ow_entropy(susp, omega=LatticeDelone(F(1, 2), (0,)), indices=[4, 8, 16])
    assert all(r >= LOG2 - 1e-12 for r in rep.ratios)
    excess = [float(r) - LOG2 for r in rep.ratios]
    # two s-types (mass 1/2 each) and at most one extra free fiber: excess <= 1.5 log 2 in total
    assert excess[0] > excess[1] > excess[2]
    assert all(e * n <= 1.5 * LOG2 + 1e-9 for e, n in zip(excess, [4, 8, 16]))
    assert rep.increment_estimate == pytest.approx(LOG2, abs=1e-3)
    rep_z = ow_entropy(susp, indices=[3, 7])
    assert all(r == pytest.approx(LOG2) for r in rep_z.ratios)


def test_ow_entropy_rotation_zero():
    rep = ow_entropy(CircleRotation(named_angle("sqrt2-1")), indices=[256])
    assert rep.last_ratio < 0.05
    assert rep.last_ratio <= math.log(2 * 256 + 2) / 256


# ---------------------------------------------------------------- naive and Ollagnier


def test_naive_entropy_bernoulli():
    rep = naive_entropy(ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2)))), budget=8)
    assert rep.infimum == pytest.approx(LOG2)


def test_naive_entropy_rotation_small():
    rep = naive_entropy(CircleRotation(named_angle("sqrt2-1")), budget=128)
    assert rep.infimum <= 0.1
    n = len(rep.infimum_witness)
    assert rep.infimum <= math.log(2 * n) / n + 1e-12


def test_naive_entropy_fixture_brute_force():
    X = swap_fixture("uniform")
    rep = naive_entropy(X, budget=6)
    best = math.inf
    for r in range(1, 7):
        for c in itertools.combinations(range(-2, 4), r):
            best = min(best, h_alpha_F(X, None, list(c)) / r)
    assert rep.infimum == pytest.approx(best)
    assert best == pytest.approx(math.log(3) / 6)


def test_ollagnier_bernoulli_constant():
    p = (F(1, 3), F(2, 3))
    rep = ollagnier_entropy(ShiftSystem(2, 1, Bernoulli(p)), indices=[1, 5, 9], naive_budget=6)
    assert all(r == pytest.approx(H(p)) for r in rep.ratios)
    assert rep.infimum == pytest.approx(H(p))


def test_ollagnier_markov_rate():
    mk = Markov(((F(9, 10), F(1, 10)), (F(1, 5), F(4, 5))))
    rep = ollagnier_entropy(ShiftSystem(2, 1, mk), indices=range(1, 15))
    assert rep.ratios == sorted(rep.ratios, reverse=True)
    assert rep.increment_estimate == pytest.approx(mk.entropy_rate(), abs=1e-6)


def test_ollagnier_golden_mean_markov():
    mk = Markov(((F(1, 2), F(1, 2)), (1, 0)))
    rep = ollagnier_entropy(ShiftSystem(2, 1, mk, GOLDEN), indices=range(1, 15))
    assert mk.entropy_rate() == pytest.approx(2 / 3 * LOG2)
    assert rep.increment_estimate == pytest.approx(2 / 3 * LOG2, abs=1e-6)


def test_ollagnier_zd():
    p = (F(1, 4), F(3, 4))
    rep = ollagnier_entropy(ShiftSystem(2, 2, Bernoulli(p)), indices=[2, 3], centered=True)
    assert rep.last_ratio == pytest.approx(H(p))


# ---------------------------------------------------------------- pressure


def test_full_shift_pressure():
    sysm = ShiftSystem(3, 1)
    assert pressure_P_f(sysm, None, S(*range(7))) == pytest.approx(7 * math.log(3))
    phi = (0.5, -1.0, 2.0)
    Fs = S(0, 3, 4)
    assert pressure_P_f(sysm, phi, Fs) == pytest.approx(3 * logsumexp(list(phi)))
    assert pressure_by_enumeration(sysm, phi, Fs) == pytest.approx(3 * logsumexp(list(phi)))


def test_golden_mean_pressure():
    sysm = ShiftSystem(2, 1, None, GOLDEN)
    for n in range(1, 25):
        assert transfer_count(GOLDEN, n) == fib(n + 2)
        assert pressure_P_f(sysm, None, S(*range(n))) == pytest.approx(math.log(fib(n + 2)), rel=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_sft_pressure_against_enumeration(seed):
    rng = random.Random(seed)
    T = ((1, 1, 0), (0, 1, 1), (1, 0, 1))
    sysm = ShiftSystem(3, 1, None, T)
    Fs = S(*sorted(rng.sample(range(10), rng.randint(1, 5))))
    phi = [rng.uniform(-1, 1) for _ in range(3)]
    assert pressure_P_f(sysm, phi, Fs) == pytest.approx(pressure_by_enumeration(sysm, phi, Fs), rel=1e-12)


def test_naive_pressure_rotation_collapses():
    rep = naive_pressure(CircleRotation(named_angle("sqrt2-1")), budget=64)
    V = refining_arc_cover(ArcCover.two_arcs(F(1, 8)))
    assert rep.last_ratio == pytest.approx(math.log(len(V.arcs)) / 64)
    assert rep.last_ratio < 0.1
    assert rep.ratios == sorted(rep.ratios, reverse=True)


def test_naive_pressure_discrete_systems():
    rep = naive_pressure(ShiftSystem(2, 1), budget=10)
    assert rep.infimum == pytest.approx(LOG2)
    rep = naive_pressure(swap_fixture("uniform"), budget=12, cover=SWAP_COVER)
    assert rep.rows[0][3] == pytest.approx(LOG2)
    assert rep.infimum <= math.log(3) / 12 + 1e-12


def test_ow_pressure_lattice_route():
    full = Suspension(ShiftSystem(2, 1))
    assert ow_pressure(full, None, indices=[5, 6]).increment_estimate == pytest.approx(LOG2)
    rep = ow_pressure(full, (0, math.log(3)), indices=[5, 6])
    assert rep.last_ratio == pytest.approx(math.log(4))


def test_ow_pressure_delone_cross_check():
    full = Suspension(ShiftSystem(2, 1))
    omega = LatticeDelone(F(1, 2), (0,))
    rep = ow_pressure(full, None, omega=omega, indices=[11, 12], cross_indices=[11, 12])
    inc = (rep.alt_rows[1][1] - rep.alt_rows[0][1]) / 1
    assert abs(inc - LOG2) < 1e-3


def test_delone_pressure_lattice_omega_is_base_pressure():
    full = Suspension(ShiftSystem(2, 1))
    val = delone_pressure_1d(full, (0, math.log(3)), Region.interval(0, 4), LatticeDelone(1, (0,)))
    assert val >= 4 * math.log(4) - 1e-9


# ---------------------------------------------------------------- Goodwyn


@pytest.mark.parametrize("mode", ["naive", "ow"])
def test_goodwyn_examples(mode):
    half = ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2))))
    assert goodwyn_check(half, (0, 0), mode).gap == pytest.approx(0, abs=1e-9)
    gibbs = ShiftSystem(2, 1, Bernoulli((F(1, 4), F(3, 4))))
    assert goodwyn_check(gibbs, (0, math.log(3)), mode).gap == pytest.approx(0, abs=1e-9)
    g = goodwyn_check(half, (0, math.log(3)), mode).gap
    assert g == pytest.approx(math.log(4) - (LOG2 + 0.5 * math.log(3)), abs=1e-9) and g > 0


def test_goodwyn_random_grid():
    rng = random.Random(4)
    for _ in range(10):
        a = rng.randint(1, 9)
        p = (F(a, 10), F(10 - a, 10))
        phi = (rng.uniform(-2, 2), rng.uniform(-2, 2))
        for mode in ("naive", "ow"):
            assert goodwyn_check(ShiftSystem(2, 1, Bernoulli(p)), phi, mode).gap >= -1e-9


# ---------------------------------------------------------------- adaptedness and fixtures


def brute_adapted(cells, members):
    for perm in itertools.permutations(range(len(members)), len(cells)):
        if all(set(c) <= set(members[j]) for c, j in zip(cells, perm)):
            return True
    return False


def test_is_adapted_partition_identity():
    cells = [{1}, {2, 3}]
    assert is_adapted(cells, cells) == {frozenset(c): frozenset(c) for c in cells}


@pytest.mark.parametrize("seed", range(30))
def test_is_adapted_against_brute_force(seed):
    rng = random.Random(seed)
    pts = list(range(6))
    members = [set(rng.sample(pts, rng.randint(1, 4))) for _ in range(rng.randint(2, 5))]
    members.append(set(pts))
    rng.shuffle(pts)
    cuts = sorted(rng.sample(range(1, 6), rng.randint(0, 3)))
    cells = [set(pts[a:b]) for a, b in zip([0] + cuts, cuts + [6])]
    uniq = list(dict.fromkeys(frozenset(m) for m in members))
    assert (is_adapted(cells, members) is not None) == brute_adapted(cells, uniq)


def test_swap_fixture_adaptedness():
    X = swap_fixture("dirac")
    assert is_adapted(SWAP_ALPHA.atoms, SWAP_COVER.members) is not None
    cells = [c.members for c in refine(X, SWAP_ALPHA, [0, 1]).cells]
    assert sorted(map(sorted, cells)) == [[1], [2], [3]]
    assert is_adapted(cells, refine_cover(X, SWAP_COVER, [0, 1])) is None


def test_swap_fixture_uniform_entropy():
    assert h_alpha_F(swap_fixture("uniform"), SWAP_ALPHA, [0, 1]) == pytest.approx(math.log(3))


def test_refining_example_cells():
    for n in (4, 7):
        R = refining_example(n)
        assert len(R) == 2 ** (n - 1) and set(R.masses) == {F(1, 2 ** (n - 1))}


def test_fixture_runner_reports_everything():
    res = run_fixtures(ns=[4, 5])
    names = [r.name for r in res]
    assert any("swap" in n for n in names) and any("refining" in n for n in names)
    assert all(r.passed for r in res if r.name.startswith("swap"))
    assert all(r.passed for r in res if "cell count" in r.name)
