"""Concrete systems: shifts, circle rotation flows, suspensions and finite fixtures."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, getcontext
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from ..geometry import frac

# ------------------------------------------------------------------ measures


def _vec(p) -> tuple:
    return tuple(frac(x) for x in p)


@dataclass(frozen=True)
class Bernoulli:
    p: tuple

    def __post_init__(self):
        p = _vec(self.p)
        if any(x < 0 for x in p):
            raise ValueError("negative probability")
        if sum(p) != 1:
            raise ValueError(f"probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return len(self.p)

    @property
    def stationary(self) -> tuple:
        return self.p


def matmul(A, B):
    n, m = len(A), len(B[0])
    return tuple(tuple(sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(m)) for i in range(n))


def solve_stationary(P) -> tuple:
    """Exact pi with pi P = pi, sum pi = 1 (Gaussian elimination over Q)."""
    k = len(P)
    # rows: (P^T - I) pi = 0 with the last equation replaced by sum pi = 1
    M = [[P[j][i] - (1 if i == j else 0) for j in range(k)] for i in range(k)]
    M[-1] = [Fraction(1)] * k
    rhs = [Fraction(0)] * (k - 1) + [Fraction(1)]
    for c in range(k):
        piv = next((r for r in range(c, k) if M[r][c] != 0), None)
        if piv is None:
            raise ValueError("stationary vector is not unique")
        M[c], M[piv] = M[piv], M[c]
        rhs[c], rhs[piv] = rhs[piv], rhs[c]
        for r in range(k):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
                rhs[r] -= f * rhs[c]
    return tuple(rhs[i] / M[i][i] for i in range(k))


@dataclass(frozen=True)
class Markov:
    """Stationary Markov measure on Z from a rational stochastic matrix."""

    P: tuple
    pi: tuple = None

    def __post_init__(self):
        P = tuple(_vec(row) for row in self.P)
        k = len(P)
        if any(len(r) != k for r in P):
            raise ValueError("transition matrix must be square")
        for r in P:
            if any(x < 0 for x in r) or sum(r) != 1:
                raise ValueError("rows must be probability vectors")
        object.__setattr__(self, "P", P)
        pi = _vec(self.pi) if self.pi is not None else solve_stationary(P)
        if sum(pi) != 1 or any(x < 0 for x in pi):
            raise ValueError("stationary vector must be a probability vector")
        if matmul((pi,), P)[0] != pi:
            raise ValueError("pi P != pi")
        object.__setattr__(self, "pi", pi)

    @property
    def k(self) -> int:
        return len(self.P)

    @property
    def stationary(self) -> tuple:
        return self.pi

    def power(self, n: int) -> tuple:
        return _power(self.P, n)

    def entropy_rate(self) -> float:
        from .entropy import plogp

        return sum(float(self.pi[i]) * sum(plogp(x) for x in self.P[i]) for i in range(self.k))


@lru_cache(maxsize=4096)
def _power(P, n: int):
    if n == 0:
        k = len(P)
        return tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
    if n == 1:
        return P
    h = _power(P, n // 2)
    sq = matmul(h, h)
    return matmul(sq, P) if n % 2 else sq


# ------------------------------------------------------------------ systems


@dataclass(frozen=True)
class ShiftSystem:
    """Shift on k symbols over Z^d: full shift or (d=1) subshift of finite type."""

    k: int
    dim: int = 1
    measure: object = None
    transitions: tuple = None

    kind = "shift"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("alphabet must be nonempty")
        if self.transitions is not None:
            T = tuple(tuple(int(x) for x in row) for row in self.transitions)
            if len(T) != self.k or any(len(r) != self.k for r in T) or any(x not in (0, 1) for r in T for x in r):
                raise ValueError("transition matrix must be a k x k 0/1 matrix")
            if self.dim != 1:
                raise ValueError("subshifts of finite type are supported in dimension 1 only")
            object.__setattr__(self, "transitions", T)
        m = self.measure
        if m is not None:
            if m.k != self.k:
                raise ValueError("measure alphabet size differs from the system")
            if isinstance(m, Markov):
                if self.dim != 1:
                    raise ValueError("Markov measures need dimension 1")
                if self.transitions is not None:
                    for i in range(self.k):
                        for j in range(self.k):
                            if m.P[i][j] > 0 and not self.transitions[i][j]:
                                raise ValueError("Markov measure charges a forbidden transition")

    @property
    def is_full(self) -> bool:
        return self.transitions is None


@dataclass(frozen=True)
class CircleRotation:
    """R acting on R/Z by t.x = x + t*angle."""

    angle: Fraction
    label: str = ""

    kind = "rotation"

    def __post_init__(self):
        object.__setattr__(self, "angle", frac(self.angle))


@dataclass(frozen=True)
class Suspension:
    """R^d action on (shift space) x [0,1)^d; the lattice Z^d acts as the base shift."""

    base: ShiftSystem

    kind = "suspension"

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True)
class FiniteFixture:
    """Z acting on a finite set by powers of a permutation."""

    points: tuple
    perm: tuple  # images of points, same order
    masses: tuple

    kind = "fixture"

    def __post_init__(self):
        pts = tuple(self.points)
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate points")
        if sorted(self.perm) != sorted(pts):
            raise ValueError("perm must be a permutation of the points")
        ms = _vec(self.masses)
        if len(ms) != len(pts) or sum(ms) != 1 or any(m < 0 for m in ms):
            raise ValueError("masses must be a probability vector over the points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "perm", tuple(self.perm))
        object.__setattr__(self, "masses", ms)

    def act(self, x, g: int):
        inv = {b: a for a, b in zip(self.points, self.perm)}
        step = dict(zip(self.points, self.perm)) if g >= 0 else inv
        for _ in range(abs(int(g))):
            x = step[x]
        return x

    def mass(self, x) -> Fraction:
        return self.masses[self.points.index(x)]


# ------------------------------------------------------------------ partitions and covers


@dataclass(frozen=True)
class SymbolPartition:
    """Partition of a shift space by the block containing the coordinate-0 symbol."""

    blocks: tuple

    def __post_init__(self):
        bl = tuple(frozenset(int(a) for a in b) for b in self.blocks)
        object.__setattr__(self, "blocks", bl)

    @classmethod
    def symbols(cls, k: int) -> "SymbolPartition":
        return cls(tuple(frozenset([a]) for a in range(k)))

    def validate(self, k: int):
        allsyms = [a for b in self.blocks for a in b]
        if sorted(allsyms) != list(range(k)) or any(not b for b in self.blocks):
            raise ValueError("blocks must partition the alphabet")

    def block_of(self, k: int) -> tuple:
        out = [0] * k
        for i, b in enumerate(self.blocks):
            for a in b:
                out[a] = i
        return tuple(out)

    @property
    def is_symbolic(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)


@dataclass(frozen=True)
class ArcPartition:
    """Arcs [cuts[i], cuts[i+1]) of R/Z (cyclically) labelled by ``labels``."""

    cuts: tuple
    labels: tuple = None

    def __post_init__(self):
        cuts = tuple(sorted(frac(c) % 1 for c in self.cuts))
        if not cuts or len(set(cuts)) != len(cuts):
            raise ValueError("cut points must be distinct and nonempty")
        labels = tuple(self.labels) if self.labels is not None else tuple(range(len(cuts)))
        if len(labels) != len(cuts):
            raise ValueError("one label per arc")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def half_circles(cls) -> "ArcPartition":
        return cls((Fraction(0), Fraction(1, 2)), (0, 1))

    def label_at(self, x: Fraction):
        import bisect

        i = bisect.bisect_right(self.cuts, x % 1) - 1
        return self.labels[i]  # i = -1 wraps to the last arc


@dataclass(frozen=True)
class AtomPartition:
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(frozenset(a) for a in self.atoms))


@dataclass(frozen=True)
class ArcCover:
    """Open arcs (a, b) of R/Z given by start and length."""

    arcs: tuple  # (start, length)

    def __post_init__(self):
        arcs = tuple((frac(a) % 1, frac(l)) for a, l in self.arcs)
        if any(not 0 < l < 1 for _, l in arcs):
            raise ValueError("arc lengths must lie in (0,1)")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def two_arcs(cls, overlap: Fraction) -> "ArcCover":
        """(-a, 1/2 + a) and (1/2 - a, 1 + a)."""
        a = frac(overlap)
        return cls(((-a, Fraction(1, 2) + 2 * a), (Fraction(1, 2) - a, Fraction(1, 2) + 2 * a)))

    def lebesgue_number(self) -> Fraction:
        """Largest L such that every open arc of length L lies in one member (exact).

        The available room decreases linearly between member starts, so the
        minimum is the left limit at some start.
        """
        best = None
        for x in sorted({a for a, _ in self.arcs}):
            room = max(_room_left(a, l, x) for a, l in self.arcs)
            best = room if best is None else min(best, room)
        return best


def _room_left(a, l, x) -> Fraction:
    """lim_{y -> x-} of the length r with (y, y + r) inside (a, a + l)."""
    off = (x - a) % 1
    if 0 < off <= l:
        return l - off
    return Fraction(0)


@dataclass(frozen=True)
class SetCover:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(frozenset(m) for m in self.members))


# ------------------------------------------------------------------ named angles


def named_angle(name: str, digits: int = 80) -> Fraction:
    """Rational approximation (``digits`` decimals) of a named irrational angle."""
    getcontext().prec = digits + 10
    table = {
        "sqrt2-1": Decimal(2).sqrt() - 1,
        "golden-1": (Decimal(5).sqrt() - 1) / 2,
        "sqrt3-1": Decimal(3).sqrt() - 1,
    }
    if name not in table:
        raise ValueError(f"unknown angle {name!r}; known: {sorted(table)}")
    q = table[name].quantize(Decimal(1).scaleb(-digits))
    return Fraction(q)


def parse_angle(spec) -> tuple[Fraction, str]:
    if isinstance(spec, str):
        try:
            return named_angle(spec), spec
        except ValueError:
            return frac(spec), spec
    return frac(spec), str(spec)
