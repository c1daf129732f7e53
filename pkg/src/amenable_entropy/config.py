"""Config loading, schema validation and object builders.

JSON encodings:

* rational: integer or "p/q" string.
* real: rational, JSON number, or "log(p/q)".
* region: {"dim": d, "boxes": [[[lo_1, hi_1], ..., [lo_d, hi_d]], ...]}.
* net: {"kind": "cubes-anchored" | "cubes-centered" | "scaled-cubes", "dim": d, "stride": r}.
* Delone set: {"kind": "lattice", "scale": c, "shift": [t, ...]}, {"kind": "union",
  "components": [lattice, ...]} or {"kind": "refining"}.
* system: {"kind": "full-shift" | "sft", "k": k, "dim": d, "measure": ..., "transitions": T},
  {"kind": "rotation", "angle": "sqrt2-1" | r}, {"kind": "suspension", "base": system},
  {"kind": "fixture", "measure": "dirac" | "uniform"}.
* indices: list of positive integers or {"start": a, "stop": b, "step": s} (half-open).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources

import jsonschema

from .geometry import FiniteSet, LatticeDelone, NetSpec, RefiningDelone, Region, UnionDelone, frac
from .dynamics.fixtures import swap_fixture
from .dynamics.systems import (
    ArcCover,
    ArcPartition,
    AtomPartition,
    Bernoulli,
    CircleRotation,
    Markov,
    ShiftSystem,
    Suspension,
    SymbolPartition,
    parse_angle,
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def schema() -> dict:
    text = resources.files("amenable_entropy").joinpath("schema/config.schema.json").read_text("utf-8")
    return json.loads(text)


def validate(cfg: dict) -> dict:
    v = jsonschema.Draft202012Validator(schema())
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}")
    return cfg


def load(path, command: str) -> dict:
    """Read a JSON config, inject ``command`` and validate."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
    cfg = {**cfg, "command": command}
    return validate(cfg)


# ------------------------------------------------------------------ scalars


def rational(x) -> Fraction:
    return frac(x)


def real(x):
    """Exact where possible; "log(p/q)" becomes a float."""
    if isinstance(x, str) and x.startswith("log("):
        return math.log(Fraction(x[4:-1]))
    if isinstance(x, float):
        return x
    return frac(x)


def vector(xs) -> tuple:
    return tuple(real(x) for x in xs)


def indices(spec, default=None) -> list[int]:
    if spec is None:
        return list(default)
    if isinstance(spec, dict):
        return list(range(spec["start"], spec["stop"], spec.get("step", 1)))
    return list(spec)


# ------------------------------------------------------------------ geometry


def region(spec) -> Region:
    d = spec["dim"]
    boxes = spec["boxes"]
    for b in boxes:
        if len(b) != d:
            raise ConfigError(f"box {b} does not have dimension {d}")
    parts = [Region.box([rational(lo) for lo, _ in b], [rational(hi) for _, hi in b]) for b in boxes]
    return Region.union_of(d, parts)


def net(spec, dim: int | None = None) -> NetSpec:
    return NetSpec(spec["kind"], spec.get("dim", dim or 1), rational(spec.get("stride", 1)))


def _lattice(spec, dim: int) -> LatticeDelone:
    shift = spec.get("shift")
    shift = tuple(rational(t) for t in shift) if shift else (Fraction(0),) * spec.get("dim", dim)
    return LatticeDelone(rational(spec["scale"]), shift)


def omega(spec, dim: int = 1):
    if spec is None:
        return LatticeDelone(1, (0,) * dim)
    kind = spec["kind"]
    if kind == "lattice":
        return _lattice(spec, dim)
    if kind == "union":
        return UnionDelone(tuple(_lattice(c, dim) for c in spec["components"]))
    if dim != 1:
        raise ConfigError("the refining Delone set is one-dimensional")
    return RefiningDelone()


# ------------------------------------------------------------------ systems


def measure(spec):
    if spec["kind"] == "bernoulli":
        return Bernoulli(tuple(rational(x) for x in spec["p"]))
    pi = tuple(rational(x) for x in spec["pi"]) if "pi" in spec else None
    return Markov(tuple(tuple(rational(x) for x in row) for row in spec["P"]), pi)


def system(spec):
    kind = spec["kind"]
    if kind in ("full-shift", "sft"):
        k = spec["k"]
        m = spec.get("measure")
        if isinstance(m, str):
            raise ConfigError("shift measures are objects, not names")
        m = measure(m) if m else (Bernoulli((Fraction(1, k),) * k) if kind == "full-shift" else None)
        T = spec.get("transitions") if kind == "sft" else None
        return ShiftSystem(k, spec.get("dim", 1), m, tuple(tuple(r) for r in T) if T else None)
    if kind == "rotation":
        angle, label = parse_angle(spec["angle"])
        return CircleRotation(angle, label)
    if kind == "suspension":
        base = system(spec["base"])
        if not isinstance(base, ShiftSystem):
            raise ConfigError("a suspension needs a shift base")
        return Suspension(base)
    m = spec.get("measure", "dirac")
    if not isinstance(m, str):
        raise ConfigError("fixture measure is 'dirac' or 'uniform'")
    return swap_fixture(m)


def partition(spec):
    if spec is None:
        return None
    if "blocks" in spec:
        return SymbolPartition(tuple(tuple(b) for b in spec["blocks"]))
    if "cuts" in spec:
        labels = spec.get("labels")
        return ArcPartition(tuple(rational(c) for c in spec["cuts"]), tuple(labels) if labels else None)
    return AtomPartition(tuple(tuple(a) for a in spec["atoms"]))


def cover(spec):
    if spec is None:
        return None
    return ArcCover(tuple((rational(a), rational(l)) for a, l in spec["arcs"]))


def finite_set(points, dim: int) -> FiniteSet:
    return FiniteSet([tuple(rational(c) for c in p) for p in points], dim=dim)
