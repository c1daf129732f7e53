import itertools
import math
import random
from fractions import Fraction

import pytest

from amenable_entropy.dynamics.functionals import entropy_set_function
from amenable_entropy.dynamics.systems import Bernoulli, Markov, ShiftSystem
from amenable_entropy.geometry import FiniteSet, NetSpec, Region
from amenable_entropy.setfun import (
    BudgetExceeded,
    SetFunction,
    cardinality,
    check_monotone,
    check_right_invariant,
    check_shearer,
    check_strong_subadditive,
    check_subadditive,
    controlf_bound_check,
    coverage_function,
    enumerate_k_covers,
    lattice_point_count,
    ollagnier_limit,
    ow_limit,
    region_volume,
    register,
    thickened_volume,
)

F = Fraction
B3 = ShiftSystem(2, 1, Bernoulli((F(1, 3), F(2, 3))))
B2 = ShiftSystem(2, 1, Bernoulli((F(1, 2), F(1, 2))))
MK = ShiftSystem(2, 1, Markov(((F(9, 10), F(1, 10)), (F(1, 5), F(4, 5)))))


def H(p):
    return -sum(float(x) * math.log(x) for x in p if x)


def S(*xs):
    return FiniteSet([(x,) for x in xs], dim=1)


def all_subsets(G):
    pts = list(G)
    for r in range(len(pts) + 1):
        for c in itertools.combinations(pts, r):
            yield FiniteSet(c, dim=1)


def nested_pairs(rng, count, n=6, span=10):
    for _ in range(count):
        Fs = rng.sample(range(span), rng.randint(1, n))
        Es = rng.sample(Fs, rng.randint(0, len(Fs)))
        yield S(*Es), S(*Fs)


# ---------------------------------------------------------------- property checkers


def test_monotone_checker():
    rng = random.Random(1)
    pairs = list(nested_pairs(rng, 50))
    assert check_monotone(cardinality(), pairs) == []
    neg = SetFunction("minus-card", lambda X: -len(X))
    assert check_monotone(neg, pairs)
    assert check_monotone(entropy_set_function(B2), pairs) == []


def test_entropy_equals_size_times_log2():
    f = entropy_set_function(B2)
    for E in all_subsets(S(0, 2, 3, 7)):
        assert f(E) == pytest.approx(len(E) * math.log(2), abs=1e-12)


def test_subadditivity_and_spread_counterexample():
    spread = SetFunction("spread", lambda X: Fraction(max(p[0] for p in X) - min(p[0] for p in X)) if len(X) else 0,
                         exact=True)
    assert check_subadditive(cardinality(), [(S(0, 1), S(1, 2))]) == []
    assert check_strong_subadditive(cardinality(), [(S(0, 1), S(1, 2))]) == []
    card = cardinality()
    E, G = S(0, 1), S(1, 2)
    assert card(E | G) == card(E) + card(G) - card(E & G)
    found = []
    for a, b in itertools.product(range(4), repeat=2):
        found += check_subadditive(spread, [(S(a), S(b))])
    assert found and found[0].kind == "subadditive"


@pytest.mark.parametrize("system", [B3, MK], ids=["bernoulli", "markov"])
def test_entropy_strongly_subadditive_exhaustive(system):
    f = entropy_set_function(system)
    G = S(0, 1, 3, 4, 6)
    subs = list(all_subsets(G))
    pairs = [(E, K) for E in subs for K in subs if len(E | K) <= 5]
    assert check_strong_subadditive(f, pairs) == []
    assert check_subadditive(f, pairs) == []


def test_right_invariance_of_entropy():
    rng = random.Random(3)
    for system in (B3, MK):
        f = entropy_set_function(system)
        samples = [(S(*rng.sample(range(8), rng.randint(1, 5))), (rng.randint(-20, 20),)) for _ in range(30)]
        assert check_right_invariant(f, samples) == []
    assert check_right_invariant(cardinality(), [(S(0, 3), (F(1, 2),))]) == []
    V = region_volume()
    assert check_right_invariant(V, [(Region.interval(0, 3), (F(7, 3),))]) == []


# ---------------------------------------------------------------- k-covers and Shearer


def brute_cover_count(n, k, maxsize):
    subsets = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
    seen = set()
    for size in range(1, maxsize + 1):
        for fam in itertools.product(subsets, repeat=size):
            key = tuple(sorted(tuple(sorted(s)) for s in fam))
            if all(sum(x in s for s in fam) >= k for x in range(n)):
                seen.add(key)
    return len(seen)


def test_k_cover_examples():
    covs = list(enumerate_k_covers(S(0), 1, 3))
    assert all(any(len(m) == 1 for m in c.members) for c in covs) and len(covs) == 3
    fams = {tuple(sorted(tuple(p[0] for p in m) for m in c.members)) for c in enumerate_k_covers(S(0, 1), 1, 2)}
    assert ((0, 1),) in fams and ((0,), (1,)) in fams


@pytest.mark.parametrize("n,k,size", [(3, 1, 3), (3, 2, 3), (2, 2, 4)])
def test_k_cover_count_matches_brute_force(n, k, size):
    assert sum(1 for _ in enumerate_k_covers(S(*range(n)), k, size)) == brute_cover_count(n, k, size)


def test_k_cover_budget():
    with pytest.raises(BudgetExceeded):
        list(enumerate_k_covers(S(*range(6)), 1, 2))


def test_shearer_cardinality():
    assert check_shearer(cardinality(), S(0, 1, 2), [1, 2, 3]) == []


def test_shearer_bernoulli_one_third():
    f = entropy_set_function(B3)
    for n in range(1, 5):
        assert check_shearer(f, S(*range(n)), [1, 2, 3], max_family_size=4) == []


def test_shearer_catches_a_violation():
    sq = SetFunction("square", lambda X: Fraction(len(X) ** 2), exact=True)
    assert check_shearer(sq, S(0, 1), [1])


def random_coverage(rng):
    universe = list(range(6))
    weights = {e: Fraction(rng.randint(0, 5), rng.randint(1, 3)) for e in universe}
    sets = {(F(x),): frozenset(rng.sample(universe, rng.randint(0, 4))) for x in range(4)}
    return coverage_function(weights, sets)


def test_strong_subadditivity_implies_shearer_on_coverage_functions():
    rng = random.Random(11)
    G = S(0, 1, 2, 3)
    subs = list(all_subsets(G))
    for _ in range(50):
        f = random_coverage(rng)
        pairs = [(E, K) for E in subs for K in subs]
        assert check_monotone(f, [(E, K) for E, K in pairs if E <= K]) == []
        assert check_strong_subadditive(f, pairs) == []
        assert check_shearer(f, G, [1, 2, 3], max_family_size=3) == []


# ---------------------------------------------------------------- convergence engines


def test_registration_rejects_nonzero_empty_value():
    bad = SetFunction("card+1", lambda X: len(X) + 1, properties={"subadditive"})
    with pytest.raises(ValueError, match="empty"):
        register(bad)
    assert register(cardinality()) is not None


def test_ollagnier_cardinality():
    rep = ollagnier_limit(cardinality(), [(n, S(*range(n))) for n in range(1, 6)], search_budget=4)
    assert rep.last_ratio == 1 and rep.infimum == 1


def test_ollagnier_bernoulli():
    f = entropy_set_function(B3)
    rep = ollagnier_limit(f, [(n, S(*range(n))) for n in (4, 8, 12)], search_budget=5)
    h = H((F(1, 3), F(2, 3)))
    assert rep.last_ratio == pytest.approx(h, abs=1e-12)
    assert rep.infimum == pytest.approx(h, abs=1e-12)
    assert float(rep.last_ratio) >= float(rep.infimum) - 1e-12


def test_ollagnier_markov_ratio_above_infimum():
    f = entropy_set_function(MK)
    rep = ollagnier_limit(f, [(n, S(*range(n))) for n in (2, 6, 10)], search_budget=5)
    assert float(rep.last_ratio) >= float(rep.infimum) - 1e-12
    assert rep.ratios == sorted(rep.ratios, reverse=True)
    # the grid search alone stops at size 5; the 10-point interval beats it
    assert rep.infimum_witness == S(*range(10))


def test_ow_limit_volume_and_thickened():
    for d in (1, 2):
        rep = ow_limit(region_volume(), NetSpec("cubes-anchored", d), NetSpec("cubes-centered", d), [1, 5, 9])
        assert all(r == 1 for r in rep.ratios) and rep.cross_gap == 0
    V = Region.interval(-1, 1)
    rep = ow_limit(thickened_volume(V), NetSpec("cubes-anchored", 1), NetSpec("cubes-centered", 1), [10, 100, 200])
    assert rep.ratios == [F(n + 2, n) for n in (10, 100, 200)]
    assert rep.cross_gap < 1e-3


def test_ow_limit_lattice_count_gaps_shrink():
    alt = NetSpec("scaled-cubes", 1, F(1, 3))
    rep = ow_limit(lattice_point_count(), NetSpec("cubes-anchored", 1), alt, [4, 16, 64])
    assert not rep.hypotheses_met
    gaps = [g for _, g in rep.gaps()]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(float(rep.last_ratio) - 1) == 0


def test_controlf_volume_example():
    rep = controlf_bound_check(region_volume(), Region.interval(-2, 2), Region.interval(-1, 1),
                               [Region.interval(0, 5), Region.interval(F(1, 3), F(1, 2))])
    assert rep.c_K == 2 and rep.ok


@pytest.mark.parametrize("which", ["lattice", "thickened"])
def test_controlf_random_unions(which):
    rng = random.Random(5)
    f = lattice_point_count() if which == "lattice" else thickened_volume(Region.cube(F(-1, 2), F(1, 2), 2))
    K = Region.cube(-1, 1, 2)
    V = Region.cube(F(-1, 2), F(1, 2), 2)
    samples = []
    for _ in range(50):
        boxes = []
        for _ in range(rng.randint(1, 3)):
            x, y = F(rng.randint(-20, 20), 4), F(rng.randint(-20, 20), 4)
            boxes.append(Region.box((x, y), (x + F(rng.randint(1, 12), 4), y + F(rng.randint(1, 12), 4))))
        samples.append(Region.union_of(2, boxes))
    rep = controlf_bound_check(f, K, V, samples)
    assert rep.ok and rep.c_K > 0


def test_controlf_requires_symmetric_neighbourhood():
    with pytest.raises(ValueError):
        controlf_bound_check(region_volume(), Region.interval(-2, 2), Region.interval(0, 1), [])
