"""Reference fixtures with their expected outcomes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..geometry import RefiningDelone, Region, delone_points_in
from .pressure import is_adapted, refine_cover
from .refine import refine
from .systems import ArcPartition, AtomPartition, CircleRotation, FiniteFixture, SetCover

FIXTURE_POINTS = (1, 2, 3)
FIXTURE_PERM = (3, 2, 1)  # 1 <-> 3, 2 fixed


def swap_fixture(measure: str = "dirac") -> FiniteFixture:
    """X = {1,2,3} with the generator swapping 1 and 3; Dirac mass at 2 or uniform mass."""
    if measure == "dirac":
        masses = (0, 1, 0)
    elif measure == "uniform":
        masses = (Fraction(1, 3),) * 3
    else:
        raise ValueError(f"unknown fixture measure {measure!r}")
    return FiniteFixture(FIXTURE_POINTS, FIXTURE_PERM, masses)


SWAP_ALPHA = AtomPartition([[1, 2], [3]])
SWAP_COVER = SetCover([[1, 2, 3], [1, 3]])


@dataclass
class FixtureResult:
    name: str
    tag: str
    expected: str
    observed: str
    passed: bool

    def as_dict(self):
        return dict(self.__dict__)


def refining_example(n: int):
    """Rotation t.x = x + t, half-circle partition, F = [0,n] n refining set."""
    F = delone_points_in(RefiningDelone(), Region.interval(0, n), closed=True)
    return refine(CircleRotation(1), ArcPartition.half_circles(), F)


def run_fixtures(ns=range(4, 13)) -> list[FixtureResult]:
    out = []
    X = swap_fixture("dirac")
    cells = refine(X, SWAP_ALPHA, [0, 1]).cells
    got = sorted(sorted(c.members) for c in cells)
    out.append(FixtureResult("swap: alpha_{0,1} cells", "reference", "[[1], [2], [3]]", str(got), got == [[1], [2], [3]]))
    a1 = is_adapted(SWAP_ALPHA.atoms, SWAP_COVER.members) is not None
    out.append(FixtureResult("swap: alpha adapted to U", "reference", "True", str(a1), a1))
    UF = refine_cover(X, SWAP_COVER, [0, 1])
    a2 = is_adapted([c.members for c in cells], UF) is not None
    out.append(FixtureResult("swap: alpha_{0,1} adapted to U_{0,1}", "reference", "False", str(a2), not a2))
    Xu = swap_fixture("uniform")
    h = refine(Xu, SWAP_ALPHA, [0, 1]).entropy()
    out.append(FixtureResult("swap (uniform): H(alpha_{0,1})", "derived", f"{math.log(3):.15g}", f"{h:.15g}",
                             abs(h - math.log(3)) < 1e-12))
    for n in ns:
        R = refining_example(n)
        ratio = R.entropy() / n
        out.append(FixtureResult(f"refining set: H/n at n={n}", "reference", f"{math.log(2):.15g}", f"{ratio:.15g}",
                                 abs(ratio - math.log(2)) <= 1e-9))
        out.append(FixtureResult(f"refining set: cell count at n={n}", "derived", str(2 ** (n - 1)), str(len(R)),
                                 len(R) == 2 ** (n - 1) and len(set(R.masses)) == 1))
    return out
