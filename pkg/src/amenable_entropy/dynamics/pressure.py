"""Topological pressure of cylinder and arc covers, Goodwyn checks and adaptedness."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..geometry import FiniteSet, LatticeDelone, NetSpec, delone_points_in, frac
from ..matching import hopcroft_karp
from ..setfun import BudgetExceeded, ConvergenceReport
from .entropy import logsumexp, shannon_entropy
from .refine import _as_set, _integer_points, suspension_types
from .systems import (
    ArcCover,
    Bernoulli,
    CircleRotation,
    FiniteFixture,
    SetCover,
    ShiftSystem,
    Suspension,
)


def _phi(system, phi):
    k = system.k if isinstance(system, ShiftSystem) else system.base.k
    phi = [0.0] * k if phi is None else [float(x) for x in phi]
    if len(phi) != k:
        raise ValueError("phi needs one value per symbol")
    return phi


def _reach(T, n: int):
    """0/1 matrix of T^n > 0."""
    k = len(T)
    R = [[int(i == j) for j in range(k)] for i in range(k)]
    for _ in range(n):
        R = [[int(any(R[i][t] and T[t][j] for t in range(k))) for j in range(k)] for i in range(k)]
    return R


def _essential(T) -> list[int]:
    """Symbols lying on a bi-infinite admissible path (iterated pruning of sources and sinks)."""
    k = len(T)
    alive = set(range(k))
    changed = True
    while changed:
        changed = False
        for a in list(alive):
            if not any(T[a][b] for b in alive) or not any(T[b][a] for b in alive):
                alive.discard(a)
                changed = True
    return sorted(alive)


def pressure_P_f(system, phi=None, F=None, cover=None) -> float:
    """P_{Sigma_F f}(U_F) for the coordinate-0 cylinder cover of a shift, or an explicit fixture cover.

    Shifts: log of the sum over admissible patterns p on F of exp(sum phi(p(g))).
    """
    if isinstance(system, FiniteFixture):
        return fixture_pressure(system, phi, F, cover)
    if not isinstance(system, ShiftSystem):
        raise ValueError("pressure_P_f supports shifts and fixtures")
    phi = _phi(system, phi)
    F = _as_set(F, system.dim)
    pts = _integer_points(F)
    if not pts:
        return 0.0
    if system.is_full:
        return len(pts) * logsumexp(phi)
    # SFT (d = 1): transfer along sorted positions, log-scaled
    T = system.transitions
    ess = _essential(T)
    pos = sorted(p[0] for p in pts)
    v = [math.exp(phi[a]) if a in ess else 0.0 for a in range(system.k)]
    logscale = 0.0
    for a, b in zip(pos, pos[1:]):
        R = _reach(T, b - a)
        v = [sum(v[i] for i in range(system.k) if R[i][j]) * math.exp(phi[j]) if j in ess else 0.0
             for j in range(system.k)]
        s = max(v)
        logscale += math.log(s)
        v = [x / s for x in v]
    return logscale + math.log(sum(v))


def pressure_by_enumeration(system: ShiftSystem, phi, F) -> float:
    """Oracle: enumerate all words on the hull of F and keep those admissible."""
    phi = _phi(system, phi)
    pts = sorted(p[0] for p in _integer_points(_as_set(F, 1)))
    lo, hi = pts[0], pts[-1]
    ess = set(_essential(system.transitions)) if system.transitions else set(range(system.k))
    seen = set()
    total = 0.0
    for w in itertools.product(range(system.k), repeat=hi - lo + 1):
        if any(a not in ess for a in w):
            continue
        if system.transitions and any(not system.transitions[a][b] for a, b in zip(w, w[1:])):
            continue
        pat = tuple(w[p - lo] for p in pts)
        if pat not in seen:
            seen.add(pat)
            total += math.exp(sum(phi[a] for a in pat))
    return math.log(total)


def transfer_count(T, n: int) -> int:
    """Number of admissible words of length n (exact integers)."""
    k = len(T)
    v = [1] * k
    for _ in range(n - 1):
        v = [sum(v[i] for i in range(k) if T[i][j]) for j in range(k)]
    return sum(v)


# ------------------------------------------------------------------ fixtures


def refine_cover(system: FiniteFixture, cover: SetCover, F) -> list[frozenset]:
    """U_F: distinct nonempty intersections of translated members."""
    gs = [g[0] for g in _integer_points(_as_set(F, 1))]
    pulled = [[frozenset(x for x in system.points if system.act(x, g) in U) for U in cover.members] for g in gs]
    out = set()
    for choice in itertools.product(*pulled):
        inter = frozenset(system.points)
        for s in choice:
            inter &= s
        if inter:
            out.add(inter)
    return sorted(out, key=lambda s: (len(s), sorted(map(repr, s))))


def fixture_pressure(system: FiniteFixture, f=None, F=None, cover: SetCover = None) -> float:
    cover = cover or SetCover([[x] for x in system.points])
    gs = [g[0] for g in _integer_points(_as_set(F, 1))]
    fval = dict(zip(system.points, [0.0] * len(system.points))) if f is None else {k: float(v) for k, v in f.items()}
    total = []
    for W in refine_cover(system, cover, F):
        total.append(max(sum(fval[system.act(x, g)] for g in gs) for x in W))
    return logsumexp(total)


# ------------------------------------------------------------------ rotation


@dataclass
class RefiningCover:
    """Open arcs of equal length < Lebesgue number; each one sits in a member of U_g for every g."""

    arcs: list  # (start, length)
    lebesgue: Fraction


def refining_arc_cover(cover: ArcCover) -> RefiningCover:
    L = cover.lebesgue_number()
    if L <= 0:
        raise ValueError("cover has no positive Lebesgue number")
    m = math.floor(1 / L) + 1
    # m arcs of length 1/m + slack < L, centred on k/m; slack keeps them overlapping (open cover)
    slack = (L - Fraction(1, m)) / 2
    length = Fraction(1, m) + slack
    return RefiningCover([((Fraction(k, m) - length / 2) % 1, length) for k in range(m)], L)


def _arc_inside(start, length, a, l) -> bool:
    """Open arc (start, start+length) inside open arc (a, a+l) on R/Z."""
    off = (start - a) % 1
    return off + length <= l


def rotation_cover_selection(system: CircleRotation, cover: ArcCover, V: RefiningCover, F) -> list[tuple]:
    """For each member of V, a choice (member index per g) with V + g*angle inside U_choice."""
    gs = [p[0] for p in _as_set(F, 1).points]
    out = []
    for start, length in V.arcs:
        choice = []
        for g in gs:
            s = (start + g * system.angle) % 1
            idx = next((i for i, (a, l) in enumerate(cover.arcs) if _arc_inside(s, length, a, l)), None)
            if idx is None:
                raise AssertionError("refining cover failed its certificate")
            choice.append(idx)
        out.append(tuple(choice))
    return out


# ------------------------------------------------------------------ naive pressure


def naive_pressure(system, phi=None, budget: int = 64, sizes: Sequence[int] | None = None,
                   cover=None) -> ConvergenceReport:
    """inf over enumerated F of P_{Sigma_F f}(U_F)/|F|.

    Rotation flows (f = 0 only): F = {0, 1/n, ..., (n-1)/n} inside A = [0,1], and
    the value is the bound log|V|/|F| from an A-refining arc cover V.
    """
    rep = ConvergenceReport("naive pressure")
    if isinstance(system, CircleRotation):
        if phi is not None and any(float(x) != 0 for x in phi):
            raise ValueError("naive pressure of the rotation flow is implemented for f = 0")
        cover = cover or ArcCover.two_arcs(Fraction(1, 8))
        V = refining_arc_cover(cover)
        sizes = sizes or [budget // 4, budget // 2, budget]
        for n in sizes:
            F = FiniteSet([(Fraction(k, n),) for k in range(n)], dim=1)
            sel = rotation_cover_selection(system, cover, V, F)
            rep.add(n, math.log(len(V.arcs)), n, f"|V|={len(V.arcs)} selected={len(set(sel))}")
        rep.infimum = min(rep.ratios)
        rep.notes.append(f"Lebesgue number {V.lebesgue}")
        return rep
    if isinstance(system, FiniteFixture):
        sizes = sizes or list(range(1, budget + 1))
        for n in sizes:
            rep.add(n, fixture_pressure(system, phi, list(range(n)), cover), n)
        rep.infimum = min(rep.ratios)
        return rep
    if isinstance(system, ShiftSystem):
        d = system.dim
        sizes = sizes or [n for n in range(1, budget + 1) if round(n ** (1 / d)) ** d == n]
        for n in sizes:
            side = round(n ** (1 / d))
            F = FiniteSet.grid(side, d)
            rep.add(n, pressure_P_f(system, phi, F), len(F))
        rep.infimum = min(rep.ratios)
        return rep
    raise ValueError(f"naive pressure not supported for {type(system).__name__}")


# ------------------------------------------------------------------ OW pressure


def ow_pressure(system: Suspension, phi=None, net: NetSpec = None, omega=None,
                indices: Sequence[int] = range(1, 31), cross_indices: Sequence[int] = ()) -> ConvergenceReport:
    """OW pressure of a suspension flow with cell-constant f = phi(x_0).

    Primary route: restriction to the lattice Z^d, where f_K for the unit cell
    is cohomologous to phi, so the ratios are base-shift pressures along cubes
    [0,n)^d. With ``cross_indices`` (d = 1), the Delone-side quantity
    P_{f_{A_n}}(U_{A_n n omega}) is evaluated directly into ``alt_rows``.
    """
    if not isinstance(system, Suspension):
        raise ValueError("ow_pressure expects a suspension flow")
    base = system.base
    d = system.dim
    net = net or NetSpec("cubes-anchored", d)
    rep = ConvergenceReport("ow pressure")
    for n in indices:
        F = FiniteSet.grid(n, d)
        rep.add(n, pressure_P_f(base, phi, F), Fraction(n) ** d)
    if cross_indices:
        if d != 1:
            raise ValueError("direct Delone-side pressure is implemented for d = 1")
        omega = omega if omega is not None else LatticeDelone(1, (0,))
        for n in cross_indices:
            A = net.region(n)
            val = delone_pressure_1d(system, phi, A, omega)
            rep.alt_rows.append((n, val, A.volume, val / float(A.volume), "direct"))
    return rep


def delone_pressure_1d(system: Suspension, phi, A, omega, budget: int = 2 ** 20) -> float:
    """log sum over W in U_{A n omega} of sup_W exp(f_A), U = symbol cylinders x cell.

    Each W is a label map lambda on F = A n omega; for each s-type it is valid
    iff constant on the type's fibers, and the sup over the type is attained at
    an endpoint of the s-interval (f_A is affine in s there).
    """
    base = system.base
    if not base.is_full:
        raise ValueError("direct Delone-side pressure supports full shifts")
    phi = _phi(base, phi)
    k = base.k
    F = delone_points_in(omega, A)
    pts = [p[0] for p in F.points]
    (a_lo,), (a_hi,) = A.bbox().lo, A.bbox().hi
    if len(A.boxes) != 1:
        raise ValueError("A must be an interval")
    # f_A is affine in s between these breakpoints
    br = sorted({Fraction(0), (-a_lo) % 1, (-a_hi) % 1} | {(-g) % 1 for g in pts})
    intervals = list(zip(br, br[1:] + [Fraction(1)]))
    best: dict = {}
    pmax = max(phi)
    work = 0
    for lo, hi in intervals:
        mid = (lo + hi) / 2
        pos = [(mid + g).__floor__() for g in pts]
        ids: dict = {}
        fib = [ids.setdefault(q, len(ids)) for q in pos]
        fpos = list(ids)
        work += k ** len(fpos)
        if work > budget:
            raise BudgetExceeded("budget exceeded")
        # weight of integer position j inside A for s at each endpoint: |[s+a_lo, s+a_hi) n [j, j+1)|
        endpoints = []
        for s in (lo, hi):
            jlo, jhi = (s + a_lo).__floor__(), (s + a_hi).__ceil__()
            w = {j: max(Fraction(0), min(s + a_hi, Fraction(j + 1)) - max(s + a_lo, Fraction(j))) for j in range(jlo, jhi)}
            free = sum(float(x) for j, x in w.items() if j not in ids) * pmax
            endpoints.append(([float(w.get(j, 0)) for j in fpos], free))
        for lab in itertools.product(range(k), repeat=len(fpos)):
            val = max(sum(wj * phi[a] for wj, a in zip(wts, lab)) + free for wts, free in endpoints)
            key = tuple(lab[f] for f in fib)
            if key not in best or val > best[key]:
                best[key] = val
    return logsumexp(list(best.values()))


# ------------------------------------------------------------------ Goodwyn


@dataclass
class GoodwynReport:
    mode: str
    entropy: float
    integral: float
    pressure: float

    @property
    def lhs(self) -> float:
        return self.entropy + self.integral

    @property
    def rhs(self) -> float:
        return self.pressure

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self):
        return {"mode": self.mode, "entropy": self.entropy, "integral": self.integral,
                "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}


def goodwyn_check(system: ShiftSystem, phi, mode: str = "naive", n: int = 12) -> GoodwynReport:
    """E(mu) + mu(f) <= p_f for a full shift with Bernoulli measure and f = phi(x_0).

    ``naive``: naive entropy and naive pressure over integer intervals.
    ``ow``: the suspension flow with omega = Z; entropy and pressure from increments.
    """
    from .functionals import naive_entropy, ow_entropy

    m = system.measure
    if not isinstance(m, Bernoulli) or not system.is_full:
        raise ValueError("goodwyn_check is instantiated for full shifts with Bernoulli measures")
    phi = _phi(system, phi)
    integral = sum(float(p) * a for p, a in zip(m.p, phi))
    if mode == "naive":
        e = naive_entropy(system, budget=n, subset_search=0).infimum
        p = naive_pressure(system, phi, budget=n).infimum
    elif mode == "ow":
        susp = Suspension(system)
        e = ow_entropy(susp, indices=[n - 1, n]).increment_estimate
        p = ow_pressure(susp, phi, indices=[n - 1, n]).increment_estimate
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return GoodwynReport(mode, float(e), integral, float(p))


# ------------------------------------------------------------------ adaptedness


def is_adapted(alpha_cells: Sequence, cover_members: Sequence) -> dict | None:
    """Injection A -> U(A) with A subset of U(A), found by bipartite matching; None if none exists."""
    cells = [frozenset(c) for c in alpha_cells]
    members = list(dict.fromkeys(frozenset(u) for u in cover_members))
    adj = [[j for j, U in enumerate(members) if A <= U] for A in cells]
    m = hopcroft_karp(len(cells), len(members), adj)
    if any(v == -1 for v in m):
        return None
    return {cells[i]: members[v] for i, v in enumerate(m)}
