from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

from amenable_entropy.geometry import Box, Region

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

EIGHTH = Fraction(1, 8)


@st.composite
def eighth_boxes(draw, dim, lo=-16, hi=16):
    los, his = [], []
    for _ in range(dim):
        a = draw(st.integers(lo, hi - 1))
        b = draw(st.integers(a + 1, min(hi, a + 12)))
        los.append(a * EIGHTH)
        his.append(b * EIGHTH)
    return Box(tuple(los), tuple(his))


@st.composite
def eighth_regions(draw, dim, max_boxes=3, lo=-16, hi=16):
    boxes = draw(st.lists(eighth_boxes(dim, lo, hi), min_size=1, max_size=max_boxes))
    return Region(dim, boxes)


def raster(region: Region) -> set:
    """Cells (integer tuples) of the 1/8-grid covered by a region with 1/8-grid corners."""
    cells = set()
    for b in region.boxes:
        ranges = [range(int(a / EIGHTH), int(c / EIGHTH)) for a, c in zip(b.lo, b.hi)]
        cur = [()]
        for r in ranges:
            cur = [p + (i,) for p in cur for i in r]
        cells.update(cur)
    return cells


def raster_sum(X: set, Y: set, dim: int) -> set:
    out = set()
    offs = [()]
    for _ in range(dim):
        offs = [o + (e,) for o in offs for e in (0, 1)]
    for x in X:
        for y in Y:
            for o in offs:
                out.add(tuple(a + b + c for a, b, c in zip(x, y, o)))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
