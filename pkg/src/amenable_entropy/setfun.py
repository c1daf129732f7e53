"""Set functions, property checkers and the two convergence engines."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

from .geometry import FiniteSet, NetSpec, Region, minkowski_sum

TOL = 1e-9

PROPERTIES = ("monotone", "subadditive", "strongly_subadditive", "shearer", "right_invariant")


class BudgetExceeded(ValueError):
    """An enumeration would exceed its configured work budget."""


@dataclass(frozen=True)
class SetFunction:
    """A named evaluator with declared properties.

    ``domain`` is ``"finite-sets"``, ``"regions"`` or ``"both"``. ``exact``
    marks evaluators returning Fractions, which are compared without
    tolerance.
    """

    name: str
    evaluate: Callable[[Any], Any]
    domain: str = "finite-sets"
    properties: frozenset = frozenset()
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "properties", frozenset(self.properties))
        bad = set(self.properties) - set(PROPERTIES)
        if bad:
            raise ValueError(f"unknown properties {sorted(bad)}")
        if self.domain not in ("finite-sets", "regions", "both"):
            raise ValueError(f"unknown domain {self.domain!r}")

    def __call__(self, x):
        return self.evaluate(x)

    def has(self, *props) -> bool:
        return all(p in self.properties for p in props)

    def tol(self):
        return 0 if self.exact else TOL


def _empty_like(F: FiniteSet) -> FiniteSet:
    return FiniteSet([], dim=F.dim)


def register(f: SetFunction, probe_dim: int = 1) -> SetFunction:
    """Validate the f(empty)=0 contract when subadditivity is declared."""
    if f.domain != "regions" and f.has("subadditive"):
        v = f(FiniteSet([], dim=probe_dim))
        if abs(v) > f.tol():
            raise ValueError(f"{f.name}: subadditive set functions need f(empty) = 0, got {v}")
    return f


# ------------------------------------------------------------- stock functions


def cardinality() -> SetFunction:
    return SetFunction("cardinality", lambda F: Fraction(len(F)), "finite-sets",
                       {"monotone", "subadditive", "strongly_subadditive", "shearer", "right_invariant"}, exact=True)


def region_volume() -> SetFunction:
    return SetFunction("volume", lambda A: A.volume, "regions",
                       {"monotone", "subadditive", "right_invariant"}, exact=True)


def thickened_volume(V: Region) -> SetFunction:
    """A -> volume(A + V)."""
    return SetFunction(f"volume(A+V)", lambda A: minkowski_sum(A, V).volume if not A.is_empty() else Fraction(0),
                       "regions", {"monotone", "subadditive", "right_invariant"}, exact=True)


def lattice_point_count() -> SetFunction:
    """A -> |A n Z^d|; monotone and subadditive but not right-invariant under real shifts."""
    from .geometry import LatticeDelone, delone_points_in

    def ev(A: Region):
        if A.is_empty():
            return Fraction(0)
        return Fraction(len(delone_points_in(LatticeDelone(1, (0,) * A.dim), A)))

    return SetFunction("lattice-count", ev, "regions", {"monotone", "subadditive"}, exact=True)


def coverage_function(weights: dict, sets: dict) -> SetFunction:
    """F -> total weight of the union of sets[x] over x in F (monotone, strongly subadditive)."""

    def ev(F):
        covered = set()
        for p in F:
            covered |= sets[p]
        return sum((weights[e] for e in covered), Fraction(0))

    return SetFunction("coverage", ev, "finite-sets",
                       {"monotone", "subadditive", "strongly_subadditive", "shearer"}, exact=True)


# ------------------------------------------------------------------ checkers


@dataclass
class Violation:
    kind: str
    sets: tuple
    lhs: Any
    rhs: Any

    def as_dict(self):
        return {"kind": self.kind, "sets": [repr(s) for s in self.sets], "lhs": str(self.lhs), "rhs": str(self.rhs)}


def _le(a, b, tol) -> bool:
    return a <= b + tol


def check_monotone(f: SetFunction, pairs: Iterable[tuple]) -> list[Violation]:
    """Pairs (E, F) with E subset of F."""
    out = []
    for E, F in pairs:
        a, b = f(E), f(F)
        if not _le(a, b, f.tol()):
            out.append(Violation("monotone", (E, F), a, b))
    return out


def _union(E, F):
    return E | F


def check_subadditive(f: SetFunction, pairs: Iterable[tuple]) -> list[Violation]:
    out = []
    for E, F in pairs:
        lhs, rhs = f(_union(E, F)), f(E) + f(F)
        if not _le(lhs, rhs, f.tol()):
            out.append(Violation("subadditive", (E, F), lhs, rhs))
    return out


def check_strong_subadditive(f: SetFunction, pairs: Iterable[tuple]) -> list[Violation]:
    out = []
    for E, F in pairs:
        lhs, rhs = f(_union(E, F)), f(E) + f(F) - f(E & F)
        if not _le(lhs, rhs, f.tol()):
            out.append(Violation("strongly_subadditive", (E, F), lhs, rhs))
    return out


@dataclass(frozen=True)
class KCover:
    ground: FiniteSet
    members: tuple  # tuple of FiniteSet, sorted
    k: int


def _nonempty_subsets(F: FiniteSet) -> list[FiniteSet]:
    n = len(F)
    return [F.subset([i for i in range(n) if mask >> i & 1]) for mask in range(1, 1 << n)]


def enumerate_k_covers(F: FiniteSet, k: int, max_family_size: int, budget: int = 10**7) -> Iterator[KCover]:
    """All multisets of nonempty subsets of F, of size <= max_family_size, covering every point >= k times."""
    if len(F) > 5 or max_family_size > 6:
        raise BudgetExceeded("budget exceeded: k-cover enumeration needs |F| <= 5 and family size <= 6")
    if k < 1:
        raise ValueError("k must be positive")
    n = len(F)
    masks = list(range(1, 1 << n))
    full = (1 << n) - 1
    work = 0
    for size in range(1, max_family_size + 1):
        for fam in itertools.combinations_with_replacement(masks, size):
            work += 1
            if work > budget:
                raise BudgetExceeded("budget exceeded")
            counts = [0] * n
            for m in fam:
                for i in range(n):
                    if m >> i & 1:
                        counts[i] += 1
            if all(c >= k for c in counts):
                members = tuple(F.subset([i for i in range(n) if m >> i & 1]) for m in fam)
                yield KCover(F, members, k)


def check_shearer(f: SetFunction, F: FiniteSet, ks: Iterable[int], max_family_size: int = 4,
                  budget: int = 10**7) -> list[Violation]:
    """f(F) <= (1/k) sum f(C_i) over every enumerated k-cover of F."""
    out = []
    cache: dict = {}

    def val(S):
        if S not in cache:
            cache[S] = f(S)
        return cache[S]

    total = val(F)
    for k in ks:
        for cov in enumerate_k_covers(F, k, max_family_size, budget):
            rhs = sum(val(C) for C in cov.members) / k
            if not _le(total, rhs, f.tol()):
                out.append(Violation(f"shearer(k={k})", cov.members, total, rhs))
    return out


def check_right_invariant(f: SetFunction, samples: Iterable[tuple]) -> list[Violation]:
    """Samples (F, g): compares f(F + g) with f(F)."""
    out = []
    for F, g in samples:
        a, b = f(F.translate(g)), f(F)
        if abs(a - b) > f.tol():
            out.append(Violation("right_invariant", (F, g), a, b))
    return out


# ------------------------------------------------------------- convergence


@dataclass
class ConvergenceReport:
    """Ratios f(A_n)/theta(A_n) along a net, with limit estimates.

    ``increment_estimate`` is (f_n - f_m)/(theta_n - theta_m) for the last two
    rows; it removes the leading boundary term that the plain ratio carries.
    """

    name: str
    rows: list = field(default_factory=list)  # (index, value, normalizer, ratio, meta)
    infimum: Any = None
    infimum_witness: Any = None
    alt_rows: list = field(default_factory=list)
    hypotheses_met: bool = True
    notes: list = field(default_factory=list)

    def add(self, index, value, normalizer, meta=""):
        self.rows.append((index, value, normalizer, value / normalizer, meta))

    @property
    def ratios(self) -> list:
        return [r[3] for r in self.rows]

    @property
    def last_ratio(self):
        return self.rows[-1][3]

    @staticmethod
    def _increment(rows):
        if len(rows) < 2:
            return rows[-1][3]
        (_, v0, t0, _, _), (_, v1, t1, _, _) = rows[-2], rows[-1]
        return (v1 - v0) / (t1 - t0)

    @property
    def increment_estimate(self):
        return self._increment(self.rows)

    @property
    def alt_last_ratio(self):
        return self.alt_rows[-1][3] if self.alt_rows else None

    @property
    def cross_gap(self):
        if not self.alt_rows:
            return None
        return abs(float(self.last_ratio) - float(self.alt_last_ratio))

    def gaps(self) -> list:
        """|ratio - alt ratio| at each shared index."""
        alt = {r[0]: r[3] for r in self.alt_rows}
        return [(r[0], abs(float(r[3]) - float(alt[r[0]]))) for r in self.rows if r[0] in alt]


def ollagnier_limit(f: SetFunction, family: Sequence[tuple[Any, FiniteSet]], search_dim: int = 1,
                    search_budget: int = 6, stride=1, tol: float = 1e-12) -> ConvergenceReport:
    """Ratios f(F_n)/|F_n| and the infimum of f(F)/|F| over subsets of [0,B)^d n stride-grid of
    size <= B together with the family members themselves."""
    if f.domain == "regions":
        raise ValueError("ollagnier_limit needs a function on finite sets")
    register(f, search_dim)
    rep = ConvergenceReport(f.name)
    if not f.has("right_invariant", "shearer"):
        rep.hypotheses_met = False
    for idx, Fn in family:
        rep.add(idx, f(Fn), len(Fn) if f.exact else float(len(Fn)))
    grid = FiniteSet.grid(search_budget, search_dim, stride=stride)
    pts = grid.points
    best, witness = None, None
    for size in range(1, search_budget + 1):
        for combo in itertools.combinations(range(len(pts)), size):
            S = grid.subset(combo)
            r = f(S) / len(S)
            if best is None or r < best - (0 if f.exact else 1e-15):
                best, witness = r, S
        if math.comb(len(pts), size + 1) > 20000:
            rep.notes.append(f"search truncated after size {size}")
            break
    for (idx, Fn), row in zip(family, rep.rows):
        if row[3] < best:
            best, witness = row[3], Fn
            rep.notes.append(f"infimum attained on family member {idx}")
    rep.infimum, rep.infimum_witness = best, witness
    if float(rep.last_ratio) < float(best) - tol:
        rep.notes.append("last ratio below enumerated infimum")
    return rep


def ow_limit(f: SetFunction, net: NetSpec, alt_net: NetSpec, indices: Sequence[int]) -> ConvergenceReport:
    """Ratios f(A_n)/theta(A_n) along two nets and their agreement gap."""
    if f.domain == "finite-sets":
        raise ValueError("ow_limit needs a function on regions")
    rep = ConvergenceReport(f.name)
    rep.hypotheses_met = f.has("monotone", "subadditive", "right_invariant")
    if not rep.hypotheses_met:
        rep.notes.append("declared properties do not cover monotone+subadditive+right-invariant")
    for n in indices:
        A = net.region(n)
        rep.add(n, f(A), A.volume)
        B = alt_net.region(n)
        v = f(B)
        rep.alt_rows.append((n, v, B.volume, v / B.volume, ""))
    return rep


@dataclass
class ControlReport:
    c_K: Any
    rows: list  # (f(R), c_K * theta(K+R), ok)

    @property
    def ok(self) -> bool:
        return all(r[2] for r in self.rows)


def controlf_bound_check(f: SetFunction, K: Region, V: Region, samples: Iterable[Region]) -> ControlReport:
    """f(R) <= c_K theta(K+R) with c_K = f(V+V)/theta(V)."""
    if not V.contains_point((0,) * V.dim) or V.neg() != V:
        raise ValueError("V must be symmetric and contain 0")
    if not V.issubset(K):
        raise ValueError("V must be contained in K")
    c = f(minkowski_sum(V, V)) / V.volume
    rows = []
    for R in samples:
        lhs = f(R)
        rhs = c * minkowski_sum(K, R).volume
        rows.append((lhs, rhs, _le(lhs, rhs, f.tol())))
    return ControlReport(c, rows)
