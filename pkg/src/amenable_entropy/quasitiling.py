"""Epsilon-disjoint families, greedy fillings and Ornstein-Weiss quasi-tilings.

Construction runs on a uniform raster whose unit divides every coordinate
involved; verification recomputes everything from exact regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import FiniteSet, Grid, NetSpec, Region, frac, invariance_ratio, k_boundary, point


@dataclass
class DisjointnessCertificate:
    eps: Fraction
    family: list
    cores: list
    ratios: list

    @property
    def valid(self) -> bool:
        return all(r > 1 - self.eps for r in self.ratios)

    @property
    def worst(self) -> Fraction | None:
        return min(self.ratios) if self.ratios else None

    def first_failure(self) -> int | None:
        return next((i for i, r in enumerate(self.ratios) if r <= 1 - self.eps), None)


def epsilon_disjoint_certify(family: Sequence[Region], eps) -> DisjointnessCertificate:
    """Peel B_i = A_i minus the earlier members and record volume(B_i)/volume(A_i)."""
    eps = frac(eps)
    family = list(family)
    if any(A.volume <= 0 for A in family):
        raise ValueError("family members need positive volume")
    if not family:
        return DisjointnessCertificate(eps, [], [], [])
    grid = Grid.for_regions(family)
    seen = np.zeros(grid.shape, dtype=bool)
    cores, ratios = [], []
    for A in family:
        m = grid.mask(A)
        core = m & ~seen
        seen |= m
        cores.append(grid.region(core))
        ratios.append(grid.mask_volume(core) / A.volume)
    return DisjointnessCertificate(eps, family, cores, ratios)


@dataclass
class BoundReport:
    name: str
    lhs: Fraction | None
    rhs: Fraction | None
    holds: bool | None
    skipped: str | None = None


def union_invariance_bound_check(family: Sequence[Region], K: Region, eps) -> BoundReport:
    """alpha(union, K) <= max_i alpha(A_i, K) / (1 - eps) for a certified family."""
    eps = frac(eps)
    cert = epsilon_disjoint_certify(family, eps)
    if not cert.valid:
        return BoundReport("union invariance", None, None, None, "family is not certified eps-disjoint")
    U = Region.union_of(K.dim, family)
    lhs = invariance_ratio(U, K)
    rhs = max(invariance_ratio(A, K) for A in family) / (1 - eps)
    return BoundReport("union invariance", lhs, rhs, lhs <= rhs)


def setminus_invariance_bound_check(R: Region, B: Region, K: Region, eps) -> BoundReport:
    """alpha(R - B, K) <= (alpha(R, K) + alpha(B, K)) / eps when the preconditions hold."""
    eps = frac(eps)
    if B.volume == 0:
        return BoundReport("setminus invariance", None, None, None, "volume(B) = 0")
    if B.volume > R.volume:
        return BoundReport("setminus invariance", None, None, None, "volume(B) > volume(R)")
    D = R - B
    if D.volume < eps * R.volume:
        return BoundReport("setminus invariance", None, None, None, "volume(R - B) < eps volume(R)")
    lhs = invariance_ratio(D, K)
    rhs = (invariance_ratio(R, K) + invariance_ratio(B, K)) / eps
    return BoundReport("setminus invariance", lhs, rhs, lhs <= rhs)


# ---------------------------------------------------------------- raster


def _qgcd(a: Fraction, b: Fraction) -> Fraction:
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    den = math.lcm(a.denominator, b.denominator)
    return Fraction(math.gcd(int(a * den), int(b * den)), den)


class _Raster:
    """Uniform cell lattice origin + unit * Z^d covering a frame box."""

    def __init__(self, frame: Region, regions: Sequence[Region], steps: Sequence):
        d = frame.dim
        fb = frame.bbox()
        unit = []
        for j in range(d):
            u = Fraction(0)
            for r in list(regions) + [frame]:
                for b in r.boxes:
                    u = _qgcd(u, b.lo[j])
                    u = _qgcd(u, b.hi[j])
            for s in steps:
                u = _qgcd(u, s[j])
            unit.append(u)
        self.dim = d
        self.unit = tuple(unit)
        self.origin = fb.lo
        self.shape = tuple(int((h - l) / u) for l, h, u in zip(fb.lo, fb.hi, unit))
        self.cell = math.prod(unit)

    def index(self, p, j: int) -> int:
        q = (p - self.origin[j]) / self.unit[j]
        assert q.denominator == 1
        return int(q)

    def mask(self, region: Region) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for b in region.boxes:
            m[tuple(slice(self.index(b.lo[j], j), self.index(b.hi[j], j)) for j in range(self.dim))] = True
        return m

    def local(self, shape: Region) -> tuple[tuple, np.ndarray]:
        """Mask of ``shape`` on its own bounding box; returns (lower corner, mask)."""
        bb = shape.bbox()
        dims = tuple(int((h - l) / u) for l, h, u in zip(bb.lo, bb.hi, self.unit))
        m = np.zeros(dims, dtype=bool)
        for b in shape.boxes:
            m[tuple(slice(int((b.lo[j] - bb.lo[j]) / self.unit[j]), int((b.hi[j] - bb.lo[j]) / self.unit[j]))
                    for j in range(self.dim))] = True
        return bb.lo, m

    def region(self, m: np.ndarray) -> Region:
        axes = [[self.origin[j] + k * self.unit[j] for k in range(self.shape[j] + 1)] for j in range(self.dim)]
        return Grid(axes).region(m)


def _candidates(ras: _Raster, lo, amask, delta) -> list[tuple]:
    """Grid offsets k with (lo + k*delta)'s window inside the raster, in lexicographic order."""
    ranges = []
    for j in range(ras.dim):
        # window start index: (lo_j + k delta_j - origin_j) / unit_j
        kmin = math.ceil((ras.origin[j] - lo[j]) / delta[j])
        kmax = math.floor((ras.origin[j] + ras.shape[j] * ras.unit[j] - amask.shape[j] * ras.unit[j] - lo[j]) / delta[j])
        ranges.append(range(kmin, kmax + 1))
    out = [()]
    for r in ranges:
        out = [p + (k,) for p in out for k in r]
    return out


def _fill(ras: _Raster, region_mask: np.ndarray, lo, amask: np.ndarray, eps: Fraction, delta) -> tuple[list, np.ndarray, int]:
    """Greedy non-extendable filling of ``region_mask`` by translates of a local shape mask.

    Returns the centers (exact points), the covered mask and the candidate count.
    """
    outside = ~region_mask
    covered = np.zeros_like(region_mask)
    acount = int(amask.sum())
    limit_num, limit_den = eps.numerator * acount, eps.denominator
    centers = []
    cand = _candidates(ras, lo, amask, delta)
    for k in cand:
        g = tuple(ki * dj for ki, dj in zip(k, delta))
        start = [(lo[j] + g[j] - ras.origin[j]) / ras.unit[j] for j in range(ras.dim)]
        win = tuple(slice(int(s), int(s) + n) for s, n in zip(start, amask.shape))
        if (outside[win] & amask).any():
            continue
        overlap = int((covered[win] & amask).sum())
        if overlap * limit_den < limit_num:
            covered[win] |= amask
            centers.append(g)
    return centers, covered, len(cand)


@dataclass
class FillingResult:
    A: Region
    R: Region
    eps: Fraction
    delta: tuple
    centers: FiniteSet
    certificate: DisjointnessCertificate
    non_extendable: bool
    candidates: int

    @property
    def covered(self) -> Region:
        return Region.union_of(self.A.dim, [self.A.translate(c) for c in self.centers])

    def cardinality_bound(self) -> Fraction:
        return self.R.volume / ((1 - self.eps) * self.A.volume)

    def volume_lower_bound(self) -> Fraction:
        return self.eps * (1 - invariance_ratio(self.R, self.A.neg())) * self.R.volume


def _steps(delta, dim: int) -> tuple:
    if isinstance(delta, (tuple, list)):
        return point(delta)
    return (frac(delta),) * dim


def greedy_filling(A: Region, R: Region, eps, delta=1) -> FillingResult:
    """Scan candidates g in delta Z^d with A+g inside R; keep g when the overlap with
    the tiles kept so far is below eps * volume(A)."""
    eps = frac(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if A.volume <= 0 or R.volume <= 0:
        raise ValueError("A and R need positive volume")
    d = A.dim
    step = _steps(delta, d)
    ras = _Raster(R, [A, R], [step])
    lo, amask = ras.local(A)
    centers, _, ncand = _fill(ras, ras.mask(R), lo, amask, eps, step)
    tiles = [A.translate(c) for c in centers]
    cert = epsilon_disjoint_certify(tiles, eps)
    return FillingResult(A, R, eps, step, FiniteSet(centers, dim=d), cert, True, ncand)


def is_non_extendable(A: Region, R: Region, centers, eps, delta=1) -> bool:
    """No grid candidate g (A+g inside R) passes the extension test against A+C."""
    eps = frac(eps)
    step = _steps(delta, A.dim)
    covered = Region.union_of(A.dim, [A.translate(c) for c in centers])
    ras = _Raster(R, [A, R], [step])
    lo, amask = ras.local(A)
    for k in _candidates(ras, lo, amask, step):
        g = tuple(ki * dj for ki, dj in zip(k, step))
        Ag = A.translate(g)
        if not Ag.issubset(R) or g in set(centers):
            continue
        if (Ag & covered).volume < eps * A.volume:
            return False
    return True


# ---------------------------------------------------------------- quasi-tiling


def levels_needed(eps: Fraction) -> int:
    """Smallest N with (1 - eps/2)^N <= eps/2."""
    N, x = 1, 1 - eps / 2
    while x > eps / 2:
        N += 1
        x *= 1 - eps / 2
    return N


def _threshold(eps: Fraction, exponent) -> Fraction:
    if isinstance(exponent, Fraction) and exponent.denominator == 1:
        return eps ** int(exponent)
    return Fraction(float(eps) ** float(exponent))


@dataclass
class TileShape:
    level: int
    index: int
    shape: Region
    test_set: Region
    threshold: Fraction
    ratio: Fraction


@dataclass
class QuasiTilingResult:
    A: Region
    K: Region
    eps: Fraction
    rho: Fraction
    N: int
    delta_inv: Fraction
    D: Region
    shapes: list  # TileShape, filling order (level 1 first)
    centers: list  # list of lists of points, aligned with shapes
    residual: Region
    stopped_at: int
    certificate: dict = field(default_factory=dict)

    def tiles(self, i: int) -> Region:
        S = self.shapes[i].shape
        return Region.union_of(S.dim, [S.translate(c) for c in self.centers[i]])

    def as_dict(self) -> dict:
        return {
            "eps": str(self.eps),
            "rho": str(self.rho),
            "N": self.N,
            "M": self.stopped_at,
            "invariance_required": str(self.delta_inv),
            "target": _boxes(self.A),
            "K": _boxes(self.K),
            "D": _boxes(self.D),
            "shapes": [
                {
                    "level": s.level,
                    "net_index": s.index,
                    "shape": _boxes(s.shape),
                    "test_set": _boxes(s.test_set),
                    "threshold": str(s.threshold),
                    "invariance_ratio": str(s.ratio),
                    "centers": [[str(x) for x in c] for c in cs],
                }
                for s, cs in zip(self.shapes, self.centers)
            ],
            "residual": _boxes(self.residual),
            "certificate": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.certificate.items()},
        }


def _boxes(R: Region) -> list:
    return [[[str(a), str(b)] for a, b in zip(x.lo, x.hi)] for x in R.boxes]


def select_shapes(net: NetSpec, K: Region, eps: Fraction, N: int, rho: Fraction, max_index: int) -> list[TileShape]:
    """Pick net indices for levels N, N-1, ..., 1, each larger than the previous pick."""
    picked = []
    Kn = K
    start = 1
    for n in range(N, 0, -1):
        thr = _threshold(eps, rho * (2 * (N - n) + 4))
        found = None
        for i in range(start, max_index + 1):
            S = net.region(i)
            r = invariance_ratio(S, Kn)
            if r <= thr:
                found = TileShape(n, i, S, Kn, thr, r)
                break
        if found is None:
            raise ValueError(f"net exhausted at index {max_index}: no shape with alpha(A, K_{n}) <= {float(thr):.6g}")
        picked.append(found)
        Kn = Kn | found.shape.neg()
        start = found.index + 1
    picked.reverse()
    return picked


def quasi_tile(A: Region, net: NetSpec, eps, K: Region, delta=1, rho=1, max_levels: int | None = None,
               max_index: int = 10_000) -> QuasiTilingResult:
    """Ornstein-Weiss quasi-tiling of A by shapes from ``net`` with residual control for K.

    ``rho`` scales every ladder exponent and ``max_levels`` caps N (relaxed mode);
    rho=1 and max_levels=None give the full ladder.
    """
    eps, rho = frac(eps), frac(rho)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    N = levels_needed(eps)
    if max_levels is not None:
        N = max(1, min(N, int(max_levels)))
    shapes = select_shapes(net, K, eps, N, rho, max_index)
    D = K
    for s in shapes:
        D = D | s.shape.neg()
    dinv = _threshold(eps, rho * (2 * N + 1))
    aD = invariance_ratio(A, D)
    if aD > dinv:
        raise ValueError(f"target is not ({float(dinv):.6g}, D)-invariant: alpha(A, D) = {float(aD):.6g}")

    step = _steps(delta, A.dim)
    ras = _Raster(A, [A] + [s.shape for s in shapes], [step])
    rest = ras.mask(A)
    centers = [[] for _ in shapes]
    M = 0
    for n, s in enumerate(shapes):
        before = int(rest.sum())
        if before == 0:
            break
        lo, amask = ras.local(s.shape)
        cs, cov, _ = _fill(ras, rest, lo, amask, eps, step)
        centers[n] = cs
        rest = rest & ~cov
        M = n + 1
        if int(rest.sum()) * eps.denominator <= eps.numerator * before:
            break
    res = QuasiTilingResult(A, K, eps, rho, N, dinv, D, shapes, centers, ras.region(rest), M)
    res.certificate = verify_quasi_tiling(res, eps, K)
    return res


def verify_quasi_tiling(result: QuasiTilingResult, eps=None, K: Region | None = None) -> dict:
    """Recheck (a) per-shape eps-disjointness, (b) disjoint tile unions, (c) coverage and
    the residual bound from the raw shapes and centers."""
    eps = frac(eps) if eps is not None else result.eps
    K = K if K is not None else result.K
    A = result.A
    d = A.dim
    per_shape = []
    unions = []
    for i, s in enumerate(result.shapes):
        tiles = [s.shape.translate(c) for c in result.centers[i]]
        cert = epsilon_disjoint_certify(tiles, eps)
        per_shape.append(cert)
        unions.append(Region.union_of(d, tiles))
    a_ok = all(c.valid for c in per_shape)
    total = Region.union_of(d, unions)
    b_ok = sum((u.volume for u in unions), Fraction(0)) == total.volume
    inside = total.issubset(A)
    coverage = (A & total).volume / A.volume
    c_ok = coverage >= 1 - eps
    R = A - total
    bR = k_boundary(K, R).volume if not R.is_empty() else Fraction(0)
    residual = (R.volume + bR) / A.volume
    r_ok = residual <= eps
    worst = [c.worst for c in per_shape if c.worst is not None]
    return {
        "a_eps_disjoint": a_ok,
        "b_disjoint_unions": b_ok,
        "c_coverage": c_ok,
        "residual_bound": r_ok,
        "inside_target": inside,
        "passed": a_ok and b_ok and c_ok and r_ok and inside,
        "eps": eps,
        "worst_core_ratio": min(worst) if worst else None,
        "coverage_ratio": coverage,
        "residual_ratio": residual,
        "residual_volume": R.volume,
        "residual_boundary_volume": bR,
        "tiles": sum(len(c) for c in result.centers),
    }


# ---------------------------------------------------------------- randomized filling checks


@dataclass
class FillingCheck:
    dim: int
    eps: Fraction
    tiles: int
    cardinality: BoundReport
    volume: BoundReport
    certified: bool
    contained: bool

    @property
    def passed(self) -> bool:
        return self.cardinality.holds and self.volume.holds and self.certified and self.contained


def check_filling(A: Region, R: Region, eps, delta=1) -> FillingCheck:
    """Greedy filling plus both filling inequalities, evaluated exactly."""
    f = greedy_filling(A, R, eps, delta)
    cov = f.covered
    card = BoundReport("cardinality", Fraction(len(f.centers)), f.cardinality_bound(),
                       len(f.centers) <= f.cardinality_bound())
    vol = BoundReport("filling volume", cov.volume, f.volume_lower_bound(), cov.volume >= f.volume_lower_bound())
    return FillingCheck(A.dim, f.eps, len(f.centers), card, vol, f.certificate.valid, cov.issubset(R))


def random_filling_instance(rng, dim: int) -> tuple[Region, Region, Fraction, Fraction]:
    """(A, R, eps, delta): integer data with delta=1 in d=2, eighth-grid data with delta=1/8 in d=1."""
    unit = Fraction(1, 8) if dim == 1 else Fraction(1)
    span = 80 if dim == 1 else 16

    def box(hi, minw, maxw):
        a = [rng.randint(0, hi - minw) for _ in range(dim)]
        b = [rng.randint(x + minw, min(hi, x + maxw)) for x in a]
        return Region.box(tuple(x * unit for x in a), tuple(x * unit for x in b))

    small = 4 if dim == 2 else 16
    A = Region.union_of(dim, [box(small, 1, small) for _ in range(rng.randint(1, 2))])
    R = Region.union_of(dim, [box(span, span // 3, span) for _ in range(rng.randint(1, 3))])
    eps = Fraction(rng.randint(1, 9), 10)
    return A, R, eps, unit


def random_filling_checks(seed: int, dim: int, count: int = 100) -> list[FillingCheck]:
    import random

    rng = random.Random(seed)
    return [check_filling(*random_filling_instance(rng, dim)) for _ in range(count)]
