"""Naive, Ollagnier and Ornstein-Weiss entropy along concrete set families."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from ..geometry import FiniteSet, LatticeDelone, NetSpec, delone_points_in
from ..setfun import ConvergenceReport
from .refine import default_partition, h_alpha_F
from .systems import CircleRotation, FiniteFixture, ShiftSystem, Suspension


def _grid_family(n: int, dim: int, stride: Fraction) -> FiniteSet:
    return FiniteSet.grid(n, dim, stride=stride)


def naive_entropy(system, alpha=None, budget: int = 64, sizes: Sequence[int] | None = None,
                  subset_search: int = 5) -> ConvergenceReport:
    """inf of H(alpha_F)/|F| over enumerated F; ``value`` is the infimum, with its witness.

    Discrete groups: integer cubes of side <= budget^(1/d) plus every subset of
    a small grid. R^d actions: grids {0, 1/n, ..., (n-1)/n}^d of shrinking stride.
    """
    alpha = alpha or default_partition(system)
    rep = ConvergenceReport("naive entropy")
    d = getattr(system, "dim", 1)
    continuous = isinstance(system, (CircleRotation, Suspension))
    if sizes is None:
        sizes = [budget // 4, budget // 2, budget] if continuous else list(range(1, budget + 1))
    best, witness = None, None
    for n in sizes:
        if continuous:
            side = max(1, round(n ** (1 / d)))
            F = _grid_family(side, d, Fraction(1, side))
        else:
            side = max(1, round(n ** (1 / d)))
            if side ** d != n:
                continue
            F = _grid_family(side, d, Fraction(1))
        h = h_alpha_F(system, alpha, F)
        rep.add(len(F), h, len(F), f"grid side {side}")
        r = h / len(F)
        if best is None or r < best:
            best, witness = r, F
    if not continuous and subset_search:
        grid = _grid_family(subset_search, 1, Fraction(1)) if d == 1 else _grid_family(2, d, Fraction(1))
        for size in range(1, len(grid) + 1):
            for combo in itertools.combinations(range(len(grid)), size):
                S = grid.subset(combo)
                r = h_alpha_F(system, alpha, S) / len(S)
                if r < best - 1e-15:
                    best, witness = r, S
    rep.infimum, rep.infimum_witness = best, witness
    return rep


def cube_points(n: int, dim: int, centered: bool = False) -> FiniteSet:
    off = -(n // 2) if centered else 0
    return FiniteSet.grid(n, dim, origin=(off,) * dim)


def ollagnier_entropy(system, alpha=None, indices: Sequence[int] = range(1, 15),
                      centered: bool = False, naive_budget: int | None = None) -> ConvergenceReport:
    """Ratios H(alpha_{F_n})/|F_n| along integer cubes F_n = [0,n)^d n Z^d."""
    if not isinstance(system, (ShiftSystem, FiniteFixture)):
        raise ValueError("Ollagnier entropy is computed for discrete Z^d actions")
    alpha = alpha or default_partition(system)
    d = getattr(system, "dim", 1)
    rep = ConvergenceReport("ollagnier entropy")
    for n in indices:
        F = cube_points(n, d, centered)
        rep.add(n, h_alpha_F(system, alpha, F), len(F))
    if naive_budget:
        nv = naive_entropy(system, alpha, naive_budget)
        rep.infimum, rep.infimum_witness = nv.infimum, nv.infimum_witness
        rep.notes.append(f"naive estimate {nv.infimum!r}")
    return rep


def ow_entropy(system, alpha=None, net: NetSpec = None, omega=None, indices: Sequence[int] = range(1, 11),
               closed: bool = False) -> ConvergenceReport:
    """Ratios H(alpha_{A_n n omega})/theta(A_n) for an R^d action."""
    if not isinstance(system, (CircleRotation, Suspension)):
        raise ValueError("OW entropy here is computed for R^d actions (rotation or suspension)")
    alpha = alpha or default_partition(system)
    d = getattr(system, "dim", 1)
    net = net or NetSpec("cubes-anchored", d)
    omega = omega if omega is not None else LatticeDelone(1, (0,) * d)
    rep = ConvergenceReport("ow entropy")
    for n in indices:
        A = net.region(n)
        F = delone_points_in(omega, A, closed=closed)
        rep.add(n, h_alpha_F(system, alpha, F), A.volume, f"|A n omega|={len(F)}")
    return rep


def cross_gaps(reports: dict, use: str = "increment") -> dict:
    """Pairwise |estimate_a - estimate_b| over labelled reports."""
    est = {k: float(r.increment_estimate if use == "increment" else r.last_ratio) for k, r in reports.items()}
    return {(a, b): abs(est[a] - est[b]) for a, b in itertools.combinations(sorted(est), 2)}


def entropy_set_function(system, alpha=None):
    """F -> H_mu(alpha_F) as a SetFunction on finite sets of the acting group."""
    from ..setfun import SetFunction

    alpha = alpha or default_partition(system)
    d = getattr(system, "dim", 1)

    def ev(F):
        if not isinstance(F, FiniteSet):
            F = FiniteSet(F, dim=d)
        return h_alpha_F(system, alpha, F) if len(F) else 0.0

    return SetFunction("entropy", ev, "finite-sets",
                       {"monotone", "subadditive", "strongly_subadditive", "shearer", "right_invariant"})
