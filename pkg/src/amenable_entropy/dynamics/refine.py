"""Refined partitions alpha_F and their entropies."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from ..geometry import FiniteSet, frac
from ..setfun import BudgetExceeded
from .entropy import plogp, shannon_entropy
from .systems import (
    ArcPartition,
    AtomPartition,
    Bernoulli,
    CircleRotation,
    FiniteFixture,
    Markov,
    ShiftSystem,
    Suspension,
    SymbolPartition,
)

DEFAULT_BUDGET = 2 ** 20


@dataclass
class Cell:
    key: Any
    mass: Fraction
    members: frozenset = None


@dataclass
class Refined:
    cells: list

    @property
    def masses(self) -> list:
        return [c.mass for c in self.cells]

    def entropy(self) -> float:
        return shannon_entropy(self.masses)

    def __len__(self):
        return len(self.cells)


def _as_set(F, dim=1) -> FiniteSet:
    if isinstance(F, FiniteSet):
        return F
    return FiniteSet([p if isinstance(p, tuple) else (p,) for p in F], dim=dim)


def _integer_points(F: FiniteSet) -> list[tuple]:
    pts = []
    for p in F.points:
        if any(x.denominator != 1 for x in p):
            raise ValueError("shift systems are acted on by integer points only")
        pts.append(tuple(int(x) for x in p))
    return pts


def _check_budget(count: int, budget: int):
    if count > budget:
        raise BudgetExceeded(f"budget exceeded: {count} candidate cells > {budget}")


def default_partition(system):
    if isinstance(system, ShiftSystem):
        return SymbolPartition.symbols(system.k)
    if isinstance(system, Suspension):
        return SymbolPartition.symbols(system.base.k)
    if isinstance(system, CircleRotation):
        return ArcPartition.half_circles()
    if isinstance(system, FiniteFixture):
        return AtomPartition([[x] for x in system.points])
    raise TypeError(f"unsupported system {type(system).__name__}")


# ------------------------------------------------------------------ shifts


def _block_masses(measure, alpha: SymbolPartition) -> list[Fraction]:
    return [sum((measure.stationary[a] for a in b), Fraction(0)) for b in alpha.blocks]


def pattern_mass(system: ShiftSystem, alpha: SymbolPartition, positions, labels) -> Fraction:
    """mu(x_{positions[i]} in block labels[i] for all i); positions distinct."""
    m = system.measure
    if isinstance(m, Bernoulli):
        q = _block_masses(m, alpha)
        out = Fraction(1)
        for b in labels:
            out *= q[b]
        return out
    if isinstance(m, Markov):
        order = sorted(range(len(positions)), key=lambda i: positions[i])
        pos = [positions[i][0] if isinstance(positions[i], tuple) else positions[i] for i in order]
        lab = [labels[i] for i in order]
        v = _restrict(list(m.pi), alpha.blocks[lab[0]])
        for prev, cur, b in zip(pos, pos[1:], lab[1:]):
            v = _restrict(_vecmat(v, m.power(cur - prev)), alpha.blocks[b])
        return sum(v, Fraction(0))
    raise ValueError("the system carries no measure")


def _restrict(v, block) -> list:
    return [x if a in block else Fraction(0) for a, x in enumerate(v)]


def _vecmat(v, M) -> list:
    k = len(M)
    return [sum((v[i] * M[i][j] for i in range(k) if v[i]), Fraction(0)) for j in range(k)]


def _shift_refine(system: ShiftSystem, alpha: SymbolPartition, F: FiniteSet, budget: int) -> Refined:
    alpha.validate(system.k)
    pts = _integer_points(F)
    nb = len(alpha.blocks)
    _check_budget(nb ** len(pts), budget)
    m = system.measure
    if m is None:
        raise ValueError("the system carries no measure")
    cells = []
    if isinstance(m, Bernoulli):
        q = _block_masses(m, alpha)
        for lab in itertools.product(range(nb), repeat=len(pts)):
            mass = Fraction(1)
            for b in lab:
                mass *= q[b]
            if mass:
                cells.append(Cell(lab, mass))
        return Refined(cells)
    # Markov: forward vectors along sorted positions, depth-first with pruning
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    pos = [pts[i][0] for i in order]
    lab = [0] * len(pts)

    def walk(depth, v):
        if depth == len(pos):
            mass = sum(v, Fraction(0))
            out = [0] * len(pts)
            for i, b in zip(order, lab):
                out[i] = b
            cells.append(Cell(tuple(out), mass))
            return
        base = v if depth == 0 else _vecmat(v, m.power(pos[depth] - pos[depth - 1]))
        for b in range(nb):
            w = _restrict(base, alpha.blocks[b])
            if any(w):
                lab[depth] = b
                walk(depth + 1, w)

    if pos:
        walk(0, list(m.pi))
    else:
        cells.append(Cell((), Fraction(1)))
    return Refined(cells)


def _shift_entropy_fast(system: ShiftSystem, alpha: SymbolPartition, F: FiniteSet):
    """Closed forms: product measure, or the Markov chain rule for the symbol partition."""
    m = system.measure
    pts = _integer_points(F)
    if isinstance(m, Bernoulli):
        return len(pts) * shannon_entropy(_block_masses(m, alpha))
    if isinstance(m, Markov) and alpha.is_symbolic:
        if not pts:
            return 0.0
        pos = sorted(p[0] for p in pts)
        h = shannon_entropy(m.pi)
        for a, b in zip(pos, pos[1:]):
            Pg = m.power(b - a)
            h += sum(float(m.pi[i]) * shannon_entropy(Pg[i]) for i in range(m.k) if m.pi[i])
        return h
    return None


# ------------------------------------------------------------------ rotation


def _rotation_refine(system: CircleRotation, alpha: ArcPartition, F: FiniteSet) -> Refined:
    """Sweep over cut events; arcs with equal label patterns form one cell."""
    gs = [p[0] for p in F.points]
    labels = sorted(set(alpha.labels), key=repr)
    lid = {l: i for i, l in enumerate(labels)}
    arc_lab = [lid[l] for l in alpha.labels]
    shifts = [(g * system.angle) % 1 for g in gs]
    cur = bytearray(lid[alpha.label_at(s)] for s in shifts)
    events = {}
    for gi, sh in enumerate(shifts):
        for ci, c in enumerate(alpha.cuts):
            pos = (c - sh) % 1
            if pos:
                events.setdefault(pos, []).append((gi, arc_lab[ci]))
    acc: dict = {}
    prev = Fraction(0)
    for pos in sorted(events):
        key = bytes(cur)
        acc[key] = acc.get(key, Fraction(0)) + (pos - prev)
        for gi, lab in events[pos]:
            cur[gi] = lab
        prev = pos
    key = bytes(cur)
    acc[key] = acc.get(key, Fraction(0)) + (1 - prev)
    return Refined([Cell(tuple(labels[i] for i in k), m) for k, m in acc.items()])


# ------------------------------------------------------------------ suspension


@dataclass
class SuspensionType:
    length: Fraction  # Lebesgue measure of the s-region
    fibers: tuple  # fiber id of each point of F, numbered by first occurrence
    positions: tuple  # integer position of each fiber


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def suspension_types(system: Suspension, F: FiniteSet) -> list[SuspensionType]:
    """Group s in [0,1)^d by the map g -> floor(s+g), merging types with equal statistics.

    Bernoulli base: types with the same fiber partition carry equal pattern
    masses and are merged; otherwise the relative positions are also part of the key.
    """
    d = system.dim
    pts = F.points
    axes = []
    for j in range(d):
        br = sorted({Fraction(0)} | {(-p[j]) % 1 for p in pts})
        axes.append([(a, b) for a, b in zip(br, br[1:] + [Fraction(1)])])
    bern = isinstance(system.base.measure, Bernoulli)
    merged: dict = {}
    for combo in itertools.product(*axes):
        L = Fraction(1)
        s = []
        for a, b in combo:
            L *= b - a
            s.append((a + b) / 2)
        pos = [tuple(_floor(s[j] + p[j]) for j in range(d)) for p in pts]
        ids: dict = {}
        fib = []
        for q in pos:
            fib.append(ids.setdefault(q, len(ids)))
        fpos = list(ids)
        lo = tuple(min(q[j] for q in fpos) for j in range(d)) if fpos else ()
        rel = tuple(tuple(q[j] - lo[j] for j in range(d)) for q in fpos)
        key = (tuple(fib),) if bern else (tuple(fib), rel)
        if key in merged:
            merged[key].length += L
        else:
            merged[key] = SuspensionType(L, tuple(fib), rel)
    return list(merged.values())


def _positions_set(t: SuspensionType, d: int) -> FiniteSet:
    return FiniteSet(t.positions, dim=d)


def _suspension_entropy(system: Suspension, alpha: SymbolPartition, F: FiniteSet, budget: int) -> float:
    base = system.base
    alpha.validate(base.k)
    d = system.dim
    types = suspension_types(system, F)
    h = 0.0
    for t in types:
        hb = _shift_entropy_fast(base, alpha, _positions_set(t, d))
        if hb is None:
            hb = _shift_refine(base, alpha, _positions_set(t, d), budget).entropy()
        h += plogp(t.length) + float(t.length) * hb
    return h + _suspension_correction(system, alpha, types, len(F), budget)


def _components(n: int, partitions) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for fib in partitions:
        first: dict = {}
        for i, f in enumerate(fib):
            if f in first:
                a, b = find(i), find(first[f])
                if a != b:
                    parent[a] = b
            else:
                first[f] = i
    roots: dict = {}
    return [roots.setdefault(find(i), len(roots)) for i in range(n)]


def _type_mass(system, alpha, t: SuspensionType, lam) -> Fraction:
    """Pattern mass of label map ``lam`` (over F) under type t; 0 if not constant on fibers."""
    nf = len(t.positions)
    fl = [None] * nf
    for i, f in enumerate(t.fibers):
        if fl[f] is None:
            fl[f] = lam[i]
        elif fl[f] != lam[i]:
            return Fraction(0)
    return pattern_mass(system.base, alpha, t.positions, fl)


def _suspension_correction(system, alpha, types, n: int, budget: int) -> float:
    """Replace separate per-type terms by the merged term for label maps valid under several types."""
    if len(types) < 2:
        return 0.0
    nb = len(alpha.blocks)
    shared = set()
    work = 0
    for t1, t2 in itertools.combinations(types, 2):
        comp = _components(n, [t1.fibers, t2.fibers])
        nc = max(comp) + 1 if comp else 0
        work += nb ** nc
        _check_budget(work, budget)
        for lab in itertools.product(range(nb), repeat=nc):
            shared.add(tuple(lab[c] for c in comp))
    corr = 0.0
    for lam in shared:
        parts = [t.length * _type_mass(system, alpha, t, lam) for t in types]
        corr += plogp(sum(parts, Fraction(0))) - sum(plogp(x) for x in parts)
    return corr


def _suspension_refine(system: Suspension, alpha: SymbolPartition, F: FiniteSet, budget: int) -> Refined:
    """Direct enumeration of label maps F -> blocks (oracle path)."""
    alpha.validate(system.base.k)
    nb = len(alpha.blocks)
    _check_budget(nb ** len(F), budget)
    types = suspension_types(system, F)
    cells = []
    for lam in itertools.product(range(nb), repeat=len(F)):
        m = sum((t.length * _type_mass(system, alpha, t, lam) for t in types), Fraction(0))
        if m:
            cells.append(Cell(lam, m))
    return Refined(cells)


# ------------------------------------------------------------------ fixtures


def _fixture_refine(system: FiniteFixture, alpha: AtomPartition, F: FiniteSet) -> Refined:
    gs = _integer_points(F)
    atom_of = {}
    for i, a in enumerate(alpha.atoms):
        for x in a:
            atom_of[x] = i
    if set(atom_of) != set(system.points) or sum(len(a) for a in alpha.atoms) != len(system.points):
        raise ValueError("atoms must partition the points")
    groups: dict = {}
    for x in system.points:
        key = tuple(atom_of[system.act(x, g[0])] for g in gs)
        groups.setdefault(key, []).append(x)
    cells = [Cell(k, sum((system.mass(x) for x in xs), Fraction(0)), frozenset(xs)) for k, xs in groups.items()]
    cells.sort(key=lambda c: sorted(map(repr, c.members)))
    return Refined(cells)


# ------------------------------------------------------------------ public API


def refine(system, alpha=None, F=None, budget: int = DEFAULT_BUDGET) -> Refined:
    """alpha_F as a list of cells with exact masses (zero-mass shift patterns pruned)."""
    alpha = alpha or default_partition(system)
    dim = getattr(system, "dim", 1)
    F = _as_set(F, dim)
    if isinstance(system, ShiftSystem):
        return _shift_refine(system, alpha, F, budget)
    if isinstance(system, CircleRotation):
        return _rotation_refine(system, alpha, F)
    if isinstance(system, Suspension):
        return _suspension_refine(system, alpha, F, budget)
    if isinstance(system, FiniteFixture):
        return _fixture_refine(system, alpha, F)
    raise TypeError(f"unsupported system {type(system).__name__}")


def h_alpha_F(system, alpha=None, F=None, method: str = "auto", budget: int = DEFAULT_BUDGET) -> float:
    """H_mu(alpha_F); ``method="enumerate"`` forces the explicit refinement."""
    alpha = alpha or default_partition(system)
    dim = getattr(system, "dim", 1)
    F = _as_set(F, dim)
    if method not in ("auto", "enumerate"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if isinstance(system, ShiftSystem):
            h = _shift_entropy_fast(system, alpha, F)
            if h is not None:
                return h
        if isinstance(system, Suspension):
            return _suspension_entropy(system, alpha, F, budget)
    return refine(system, alpha, F, budget).entropy()
