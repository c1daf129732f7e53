"""Exact box-region geometry on R^d and Z^d.

Regions are finite unions of half-open axis-aligned boxes with rational
endpoints. All operations return regions in a unique canonical form, so
equality of regions is structural equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Point = tuple  # tuple of Fraction


def frac(x) -> Fraction:
    """Coerce an int, Fraction, float or "p/q" string to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coordinate {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def point(coords) -> Point:
    if isinstance(coords, (int, float, str, Fraction)):
        coords = (coords,)
    return tuple(frac(c) for c in coords)


def fmt(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True, order=True)
class Box:
    """Half-open box [lo_1,hi_1) x ... x [lo_d,hi_d)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = point(self.lo), point(self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box corners must have equal positive dimension")
        for a, b in zip(lo, hi):
            if not a < b:
                raise ValueError(f"degenerate or inverted box side [{a},{b})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def translate(self, g: Point) -> "Box":
        return Box(tuple(a + t for a, t in zip(self.lo, g)), tuple(b + t for b, t in zip(self.hi, g)))

    def neg(self) -> "Box":
        return Box(tuple(-b for b in self.hi), tuple(-a for a in self.lo))

    def __add__(self, other: "Box") -> "Box":
        return Box(tuple(a + c for a, c in zip(self.lo, other.lo)), tuple(b + d for b, d in zip(self.hi, other.hi)))

    def intersects(self, other: "Box") -> bool:
        return all(max(a, c) < min(b, d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def contains(self, p: Point) -> bool:
        return all(a <= x < b for a, b, x in zip(self.lo, self.hi, p))


class Grid:
    """Product grid of breakpoints with exact integer cell weights.

    Cell widths along axis j are scaled by the common denominator of that
    axis, so the exact volume of any cell set is an integer sum divided by
    ``scale``.
    """

    def __init__(self, axes: Sequence[Sequence[Fraction]]):
        self.axes = [list(a) for a in axes]
        self.index = [{x: i for i, x in enumerate(a)} for a in self.axes]
        self.shape = tuple(len(a) - 1 for a in self.axes)
        self.widths = []
        self.denoms = []
        for a in self.axes:
            w = [b - c for c, b in zip(a, a[1:])]
            den = 1
            for x in w:
                den = math.lcm(den, x.denominator)
            self.denoms.append(den)
            self.widths.append([int(x * den) for x in w])
        self.scale = math.prod(self.denoms)
        total = math.prod(sum(w) for w in self.widths) if self.widths else 0
        dtype = np.int64 if total < 2**62 else object
        self._w = [np.array(w, dtype=dtype) for w in self.widths]

    @classmethod
    def for_regions(cls, regions: Iterable["Region"], extra=None) -> "Grid":
        regions = list(regions)
        d = regions[0].dim
        axes = [set() for _ in range(d)]
        for r in regions:
            for b in r.boxes:
                for j in range(d):
                    axes[j].add(b.lo[j])
                    axes[j].add(b.hi[j])
        if extra:
            for j, pts in enumerate(extra):
                axes[j].update(pts)
        for j in range(d):
            if len(axes[j]) < 2:
                axes[j].update((Fraction(0), Fraction(1)))
        return cls([sorted(a) for a in axes])

    def slices(self, b: Box) -> tuple:
        return tuple(slice(ix[lo], ix[hi]) for ix, lo, hi in zip(self.index, b.lo, b.hi))

    def mask(self, region: "Region") -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for b in region.boxes:
            m[self.slices(b)] = True
        return m

    def mask_volume_int(self, m: np.ndarray):
        """Integer volume numerator of a boolean cell mask (divide by ``scale``)."""
        acc = m.astype(self._w[0].dtype)
        for j in reversed(range(m.ndim)):
            acc = acc @ self._w[j]
        return int(acc)

    def mask_volume(self, m: np.ndarray) -> Fraction:
        return Fraction(self.mask_volume_int(m), self.scale)

    def region(self, m: np.ndarray) -> "Region":
        return Region._from_boxes_canonical(len(self.axes), _decompose(m, self.axes))


def _runs(v: np.ndarray) -> list[tuple[int, int]]:
    x = np.concatenate(([False], v, [False])).astype(np.int8)
    d = np.flatnonzero(np.diff(x))
    return list(zip(d[0::2].tolist(), d[1::2].tolist()))


def _decompose(m: np.ndarray, axes) -> list[Box]:
    """Maximal-slab decomposition: unique for a given point set."""
    if m.ndim == 1:
        return [Box((axes[0][i],), (axes[0][j],)) for i, j in _runs(m)]
    out = []
    rows = m.reshape(m.shape[0], -1)
    nonempty = rows.any(axis=1)
    i = 0
    n = m.shape[0]
    while i < n:
        if not nonempty[i]:
            i += 1
            continue
        j = i + 1
        while j < n and nonempty[j] and np.array_equal(rows[j], rows[i]):
            j += 1
        a, b = axes[0][i], axes[0][j]
        for sub in _decompose(m[i], axes[1:]):
            out.append(Box((a,) + sub.lo, (b,) + sub.hi))
        i = j
    return out


class Region:
    """Finite union of half-open boxes in canonical form."""

    __slots__ = ("dim", "boxes", "__dict__")

    def __init__(self, dim: int, boxes: Iterable[Box] = ()):
        boxes = list(boxes)
        for b in boxes:
            if b.dim != dim:
                raise ValueError(f"box of dimension {b.dim} in a {dim}-dimensional region")
        self.dim = dim
        if len(boxes) <= 1:
            self.boxes = tuple(boxes)
        else:
            g = Grid.for_regions([Region._from_boxes_canonical(dim, boxes)])
            self.boxes = tuple(_decompose(g.mask(Region._from_boxes_canonical(dim, boxes)), g.axes))

    @classmethod
    def _from_boxes_canonical(cls, dim, boxes) -> "Region":
        r = cls.__new__(cls)
        r.dim = dim
        r.boxes = tuple(boxes)
        return r

    # constructors
    @classmethod
    def empty(cls, dim: int) -> "Region":
        return cls(dim)

    @classmethod
    def box(cls, lo, hi) -> "Region":
        b = Box(lo, hi)
        return cls(b.dim, [b])

    @classmethod
    def interval(cls, a, b) -> "Region":
        return cls.box((a,), (b,))

    @classmethod
    def cube(cls, a, b, dim: int) -> "Region":
        return cls.box((a,) * dim, (b,) * dim)

    @classmethod
    def union_of(cls, dim: int, regions: Iterable["Region"]) -> "Region":
        return cls(dim, [b for r in regions for b in r.boxes])

    # basic queries
    @cached_property
    def volume(self) -> Fraction:
        return sum((b.volume for b in self.boxes), Fraction(0))

    def is_empty(self) -> bool:
        return not self.boxes

    def contains_point(self, p) -> bool:
        p = point(p)
        return any(b.contains(p) for b in self.boxes)

    def bbox(self) -> Box:
        if not self.boxes:
            raise ValueError("empty region has no bounding box")
        lo = tuple(min(b.lo[j] for b in self.boxes) for j in range(self.dim))
        hi = tuple(max(b.hi[j] for b in self.boxes) for j in range(self.dim))
        return Box(lo, hi)

    def __eq__(self, other):
        return isinstance(other, Region) and self.dim == other.dim and self.boxes == other.boxes

    def __hash__(self):
        return hash((self.dim, self.boxes))

    def __repr__(self):
        parts = [" x ".join(f"[{a},{b})" for a, b in zip(x.lo, x.hi)) for x in self.boxes]
        return f"Region({' u '.join(parts) or 'empty'})"

    # boolean algebra
    def _binary(self, other: "Region", op) -> "Region":
        self._check(other)
        if self.is_empty() and other.is_empty():
            return Region.empty(self.dim)
        g = Grid.for_regions([r for r in (self, other) if not r.is_empty()])
        return g.region(op(g.mask(self), g.mask(other)))

    def _check(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")

    def __or__(self, other: "Region") -> "Region":
        if other.is_empty():
            return self
        if self.is_empty():
            return other
        return self._binary(other, np.logical_or)

    def __and__(self, other: "Region") -> "Region":
        if self.is_empty() or other.is_empty():
            return Region.empty(self.dim)
        return self._binary(other, np.logical_and)

    def __sub__(self, other: "Region") -> "Region":
        if self.is_empty() or other.is_empty():
            return self
        return self._binary(other, lambda a, b: a & ~b)

    def issubset(self, other: "Region") -> bool:
        return (self - other).is_empty()

    def translate(self, g) -> "Region":
        g = point(g)
        return Region._from_boxes_canonical(self.dim, [b.translate(g) for b in self.boxes])

    def neg(self) -> "Region":
        return Region(self.dim, [b.neg() for b in self.boxes])

    def __add__(self, other: "Region") -> "Region":
        return minkowski_sum(self, other)

    def __neg__(self) -> "Region":
        return self.neg()


def volume(A: Region) -> Fraction:
    return A.volume


def minkowski_sum(K: Region, A: Region) -> Region:
    """K + A; the sum of two boxes is a box, sums of unions are canonicalized."""
    K._check(A)
    if K.is_empty() or A.is_empty():
        return Region.empty(K.dim)
    return Region(K.dim, [k + a for k in K.boxes for a in A.boxes])


def _require_nonempty(*rs: Region):
    for r in rs:
        if r.is_empty():
            raise ValueError("boundary undefined for an empty region")


def _frame(A: Region, K: Region) -> Region:
    """bbox(A) inflated by the bbox width of K on every side."""
    ab, kb = A.bbox(), K.bbox()
    w = tuple(h - l for l, h in zip(kb.lo, kb.hi))
    return Region.box(tuple(a - p for a, p in zip(ab.lo, w)), tuple(b + p for b, p in zip(ab.hi, w)))


def k_boundary(K: Region, A: Region) -> Region:
    """(K+A) n (K + complement of A).

    Only complement points in A+K-K can reach K+A, and that set lies in the frame.
    """
    _require_nonempty(K, A)
    return minkowski_sum(K, A) & minkowski_sum(K, _frame(A, K) - A)


def invariance_ratio(A: Region, K: Region) -> Fraction:
    if A.volume == 0:
        raise ValueError("invariance ratio needs volume(A) > 0")
    return k_boundary(K, A).volume / A.volume


def shrink_by(K: Region, A: Region) -> Region:
    """Erosion {g : K+g subset A} up to null sets."""
    _require_nonempty(K, A)
    ab, kb = A.bbox(), K.bbox()
    reach = Region.box(tuple(a - k for a, k in zip(ab.lo, kb.hi)), tuple(b - k for b, k in zip(ab.hi, kb.lo)))
    return reach - minkowski_sum(K.neg(), _frame(A, K) - A)


# ---------------------------------------------------------------- finite sets


class FiniteSet:
    """Sorted, deduplicated finite set of exact points."""

    __slots__ = ("dim", "points", "_set")

    def __init__(self, points: Iterable = (), dim: int | None = None):
        pts = sorted({point(p) for p in points})
        if dim is None:
            if not pts:
                raise ValueError("dimension required for an empty FiniteSet")
            dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("mixed dimensions in FiniteSet")
        self.dim = dim
        self.points = tuple(pts)
        self._set = frozenset(pts)

    @classmethod
    def integers(cls, a: int, b: int) -> "FiniteSet":
        """{a, ..., b-1} in Z."""
        return cls([(k,) for k in range(a, b)], dim=1)

    @classmethod
    def grid(cls, n: int, dim: int, stride=1, origin=None) -> "FiniteSet":
        s = frac(stride)
        o = point(origin) if origin is not None else (Fraction(0),) * dim
        idx = np.indices((n,) * dim).reshape(dim, -1).T
        return cls([tuple(o[j] + s * int(v[j]) for j in range(dim)) for v in idx], dim=dim)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        return point(p) in self._set

    def __eq__(self, other):
        return isinstance(other, FiniteSet) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        if self.dim == 1:
            return "FiniteSet{" + ", ".join(str(p[0]) for p in self.points) + "}"
        return "FiniteSet{" + ", ".join("(" + ",".join(map(str, p)) + ")" for p in self.points) + "}"

    def translate(self, g) -> "FiniteSet":
        g = point(g)
        return FiniteSet([tuple(a + b for a, b in zip(p, g)) for p in self.points], dim=self.dim)

    def neg(self) -> "FiniteSet":
        return FiniteSet([tuple(-a for a in p) for p in self.points], dim=self.dim)

    def __or__(self, other):
        return FiniteSet(self._set | other._set, dim=self.dim)

    def __and__(self, other):
        return FiniteSet(self._set & other._set, dim=self.dim)

    def __sub__(self, other):
        return FiniteSet(self._set - other._set, dim=self.dim)

    def __le__(self, other):
        return self._set <= other._set

    def sumset(self, other: "FiniteSet") -> "FiniteSet":
        return FiniteSet([tuple(a + b for a, b in zip(p, q)) for p in self.points for q in other.points], dim=self.dim)

    def subset(self, idx: Iterable[int]) -> "FiniteSet":
        return FiniteSet([self.points[i] for i in idx], dim=self.dim)


def discrete_k_boundary(K: FiniteSet, A: FiniteSet) -> FiniteSet:
    """{g in K+A : (-K)+g is not contained in A} for the counting measure."""
    negK = K.neg()
    out = []
    for g in K.sumset(A):
        if any(tuple(a + b for a, b in zip(k, g)) not in A._set for k in negK.points):
            out.append(g)
    return FiniteSet(out, dim=A.dim)


def is_uniformly_discrete(F: FiniteSet, U: Region) -> bool:
    """True iff the translates (g+U) for g in F are pairwise disjoint."""
    if U.is_empty():
        return True
    width = U.bbox().hi[0] - U.bbox().lo[0]
    pts = F.points
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            if q[0] - p[0] >= width:
                break
            diff = tuple(b - a for a, b in zip(p, q))
            for u in U.boxes:
                ut = u.translate(diff)
                if any(ut.intersects(v) for v in U.boxes):
                    return False
    return True


# ------------------------------------------------------------------ nets


NET_KINDS = ("cubes-anchored", "cubes-centered", "scaled-cubes")


@dataclass(frozen=True)
class NetSpec:
    """Sequence of cubes indexed by n = 1, 2, ...

    ``cubes-anchored``: [0,n)^d; ``cubes-centered``: [-n/2,n/2)^d;
    ``scaled-cubes``: [0, n*stride)^d.
    """

    kind: str = "cubes-anchored"
    dim: int = 1
    stride: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in NET_KINDS:
            raise ValueError(f"unknown net kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        s = frac(self.stride)
        if s <= 0:
            raise ValueError("stride must be positive")
        object.__setattr__(self, "stride", s)

    def side(self, n: int) -> Fraction:
        return Fraction(n) * (self.stride if self.kind == "scaled-cubes" else 1)

    def region(self, n: int) -> Region:
        if n < 1:
            raise ValueError("net index starts at 1")
        s = self.side(n)
        if self.kind == "cubes-centered":
            return Region.cube(-s / 2, s / 2, self.dim)
        return Region.cube(0, s, self.dim)


def van_hove_region(net: NetSpec, i: int) -> Region:
    return net.region(i)


@dataclass
class VanHoveReport:
    indices: list
    ratios: list
    monotone: bool

    def to_rows(self):
        return [(i, r) for i, r in zip(self.indices, self.ratios)]


def check_van_hove(net: NetSpec, K: Region, indices: Iterable[int]) -> VanHoveReport:
    idx = list(indices)
    ratios = [invariance_ratio(net.region(n), K) for n in idx]
    mono = all(b <= a for a, b in zip(ratios, ratios[1:]))
    return VanHoveReport(idx, ratios, mono)


# ------------------------------------------------------------------ Delone sets


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class LatticeDelone:
    """c Z^d + t."""

    scale: Fraction
    shift: tuple
    dim: int = 1

    def __post_init__(self):
        c = frac(self.scale)
        if c <= 0:
            raise ValueError("lattice scale must be positive")
        t = point(self.shift) if self.shift is not None else (Fraction(0),) * self.dim
        if len(t) == 1 and self.dim > 1:
            t = t * self.dim
        object.__setattr__(self, "scale", c)
        object.__setattr__(self, "shift", t)
        object.__setattr__(self, "dim", len(t))

    uniformly_discrete = True

    def points_in_box(self, lo, hi, closed=False) -> list:
        axes = []
        for a, b, t in zip(lo, hi, self.shift):
            kmin = _ceil((a - t) / self.scale)
            q = (b - t) / self.scale
            kmax = _floor(q) if closed else _ceil(q) - 1
            axes.append([t + self.scale * k for k in range(kmin, kmax + 1)])
        return _product(axes)

    def density(self) -> Fraction:
        return Fraction(1) / self.scale ** self.dim


@dataclass(frozen=True)
class UnionDelone:
    components: tuple

    uniformly_discrete = True

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def points_in_box(self, lo, hi, closed=False) -> list:
        s = set()
        for c in self.components:
            s.update(c.points_in_box(lo, hi, closed))
        return sorted(s)

    def density(self) -> Fraction:
        # the union is periodic under P Z^d with P a common multiple of all scales
        P = Fraction(math.lcm(*[c.scale.numerator for c in self.components]),
                     math.gcd(*[c.scale.denominator for c in self.components]))
        d = self.dim
        pts = self.points_in_box((Fraction(0),) * d, (P,) * d)
        return Fraction(len(pts)) / P ** d


@dataclass(frozen=True)
class RefiningDelone:
    """Z u (union over n >= 0 of [n,n+1] n 2^-n Z); locally finite, not uniformly discrete."""

    dim: int = 1
    uniformly_discrete = False

    def points_in_box(self, lo, hi, closed=False) -> list:
        a, b = lo[0], hi[0]
        s = set(p[0] for p in LatticeDelone(1, (0,)).points_in_box((a,), (b,), closed))
        for n in range(max(0, _floor(a)), max(0, _ceil(b)) + 1):
            lo_n, hi_n = max(a, Fraction(n)), min(b, Fraction(n + 1))
            step = Fraction(1, 2 ** n)
            k = _ceil(lo_n / step)
            while True:
                x = k * step
                if x > hi_n or x > n + 1:
                    break
                if x >= lo_n and (x < b or (closed and x == b)):
                    s.add(x)
                k += 1
        return [(x,) for x in sorted(s)]

    def density(self):
        raise ValueError("not uniformly discrete")


def _product(axes) -> list:
    out = [()]
    for ax in axes:
        out = [p + (x,) for p in out for x in ax]
    return out


def delone_points_in(omega, A: Region, closed: bool = False) -> FiniteSet:
    """omega n A; with ``closed`` the upper faces of A's boxes are included."""
    pts = set()
    for b in A.boxes:
        pts.update(omega.points_in_box(b.lo, b.hi, closed))
    if closed:
        return FiniteSet(pts, dim=A.dim)
    return FiniteSet([p for p in pts if A.contains_point(p)], dim=A.dim)


@dataclass
class DensityReport:
    indices: list
    ratios: list
    exact_limit: Fraction
    max_deviation: Fraction
    fitted_limit: Fraction


def density_report(omega, net: NetSpec, indices: Iterable[int]) -> DensityReport:
    if not getattr(omega, "uniformly_discrete", False):
        raise ValueError("not uniformly discrete")
    idx = list(indices)
    ratios = []
    for n in idx:
        A = net.region(n)
        ratios.append(Fraction(len(delone_points_in(omega, A)), 1) / A.volume)
    lim = omega.density()
    dev = max(abs(r - lim) for r in ratios)
    return DensityReport(idx, ratios, lim, dev, ratios[-1])
