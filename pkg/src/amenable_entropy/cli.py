"""Batch experiment runner.

Every subcommand reads a JSON config (see ``config.py`` and the shipped schema),
writes ``<command>.csv`` and ``<command>.json`` into ``--out`` and exits with

    0  success
    1  ``fixtures``: some fixture missed its expectation
    2  invalid config (JSON, schema or parameter values)
    3  a work budget was exceeded
    4  ``--strict`` and a certificate or inequality check failed

CSV columns are fixed (index, value, normalizer, ratio, meta). Per command:

* entropy / pressure: net index or |F|, H or P, theta(A_n) or |F|, ratio.
* goodwyn: grid cell, gap = pressure - entropy - integral, 1, gap, mode and inputs.
* quasitile: level, tile count, shape volume, shape invariance ratio.
* fillings: instance, |C|, cardinality bound, |C| / bound, volume inequality.
* folner-check: n, matched, |F_n|, ratio, shift and neighborhood label.
* setfun-check: index or property, value, normalizer, ratio.
* vanhove-check: n, boundary volume, theta(A_n), ratio (density rows tagged in meta).
* fixtures: position, observed, expected, passed, name and tag.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import config as C
from . import reports
from .dynamics.fixtures import run_fixtures
from .dynamics.functionals import cross_gaps, entropy_set_function, naive_entropy, ollagnier_entropy, ow_entropy
from .dynamics.pressure import goodwyn_check, naive_pressure, ow_pressure
from .dynamics.systems import Bernoulli, ShiftSystem
from .geometry import FiniteSet, NetSpec, Region, check_van_hove, density_report, k_boundary
from .matching import thin_folner_report
from .quasitiling import quasi_tile, random_filling_checks
from .setfun import (
    BudgetExceeded,
    cardinality,
    check_monotone,
    check_shearer,
    check_strong_subadditive,
    check_subadditive,
    controlf_bound_check,
    coverage_function,
    lattice_point_count,
    ollagnier_limit,
    ow_limit,
    region_volume,
    thickened_volume,
)

COMMANDS = ("entropy", "pressure", "goodwyn", "quasitile", "folner-check", "setfun-check", "vanhove-check", "fixtures")
GAP_TOL = 1e-9


@dataclass
class Outcome:
    rows: list
    payload: dict
    failures: list = field(default_factory=list)
    svg: str | None = None


@dataclass
class Context:
    seed: int
    mapper: object
    want_svg: bool


@contextmanager
def _pool(n: int):
    if n <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=n) as ex:
        yield ex.map


def _report_rows(rep, tag: str = "") -> list:
    return [(i, v, t, r, (f"{tag} {m}".strip() if tag else m)) for i, v, t, r, m in rep.rows]


def _report_summary(rep) -> dict:
    return {"name": rep.name, "last_ratio": rep.last_ratio, "increment_estimate": rep.increment_estimate,
            "infimum": rep.infimum, "hypotheses_met": rep.hypotheses_met, "notes": rep.notes,
            "cross_gap": rep.cross_gap}


# ------------------------------------------------------------------ entropy / pressure


def _ow_entropy_job(job):
    system, alpha, net, omega, idx, closed = job
    return ow_entropy(system, alpha, net, omega, idx, closed)


def cmd_entropy(cfg, ctx) -> Outcome:
    system = C.system(cfg["system"])
    alpha = C.partition(cfg.get("partition"))
    kind = cfg["kind"]
    if kind == "naive":
        rep = naive_entropy(system, alpha, cfg.get("budget", 64), cfg.get("sizes"))
        return Outcome(_report_rows(rep), {"kind": kind, "report": _report_summary(rep)})
    if kind == "ollagnier":
        idx = C.indices(cfg.get("indices"), range(1, 15))
        rep = ollagnier_entropy(system, alpha, idx, cfg.get("centered", False), cfg.get("budget"))
        return Outcome(_report_rows(rep), {"kind": kind, "report": _report_summary(rep)})
    d = getattr(system, "dim", 1)
    if "nets" in cfg:
        nets = [C.net(n, d) for n in cfg["nets"]]
    else:
        nets = [C.net(cfg["net"], d) if "net" in cfg else NetSpec("cubes-anchored", d)]
    omegas = [C.omega(o, d) for o in cfg.get("omegas", [cfg.get("omega")])]
    idx = C.indices(cfg.get("indices"), range(1, 11))
    cells = list(itertools.product(nets, omegas))
    jobs = [(system, alpha, n, o, idx, cfg.get("closed", False)) for n, o in cells]
    reps = list(ctx.mapper(_ow_entropy_job, jobs))
    rows, cells_out, labelled = [], [], {}
    for c, ((n, o), rep) in enumerate(zip(cells, reps)):
        label = f"cell{c}"
        rows += _report_rows(rep, label)
        labelled[label] = rep
        cells_out.append({"cell": label, "net": n, "omega": repr(o), "report": _report_summary(rep)})
    gaps = {f"{a}|{b}": g for (a, b), g in cross_gaps(labelled).items()}
    return Outcome(rows, {"kind": kind, "cells": cells_out, "cross_gaps": gaps,
                          "max_cross_gap": max(gaps.values(), default=0.0)})


def cmd_pressure(cfg, ctx) -> Outcome:
    system = C.system(cfg["system"])
    phi = C.vector(cfg["phi"]) if "phi" in cfg else None
    if cfg["kind"] == "naive":
        rep = naive_pressure(system, phi, cfg.get("budget", 64), cfg.get("sizes"), C.cover(cfg.get("cover")))
        return Outcome(_report_rows(rep), {"kind": "naive", "report": _report_summary(rep)})
    d = getattr(system, "dim", 1)
    net = C.net(cfg["net"], d) if "net" in cfg else None
    om = C.omega(cfg["omega"], d) if "omega" in cfg else None
    rep = ow_pressure(system, phi, net, om, C.indices(cfg.get("indices"), range(1, 31)),
                      C.indices(cfg.get("cross_indices"), ()))
    rows = _report_rows(rep) + [(i, v, t, r, "delone") for i, v, t, r, _ in rep.alt_rows]
    return Outcome(rows, {"kind": "ow", "report": _report_summary(rep), "gaps": rep.gaps()})


# ------------------------------------------------------------------ goodwyn


def _random_simplex(rng, k: int) -> tuple:
    w = [rng.randint(1, 9) for _ in range(k)]
    return tuple(Fraction(x, sum(w)) for x in w)


def _goodwyn_job(job):
    p, phi, mode, n = job
    system = ShiftSystem(len(p), 1, Bernoulli(p))
    return goodwyn_check(system, phi, mode, n).as_dict()


def cmd_goodwyn(cfg, ctx) -> Outcome:
    cells = []
    if "system" in cfg:
        s = C.system(cfg["system"])
        if not isinstance(s, ShiftSystem) or not isinstance(s.measure, Bernoulli):
            raise C.ConfigError("goodwyn needs a full shift with a Bernoulli measure")
        cells.append((s.measure.p, C.vector(cfg["phi"])))
    for g in cfg.get("grid", []):
        cells.append((tuple(C.rational(x) for x in g["p"]), C.vector(g["phi"])))
    if "random_grid" in cfg:
        rng = random.Random(ctx.seed)
        k = cfg["random_grid"]["k"]
        for _ in range(cfg["random_grid"]["count"]):
            cells.append((_random_simplex(rng, k), tuple(Fraction(rng.randint(-8, 8), 4) for _ in range(k))))
    mode = cfg.get("mode", "both")
    modes = ["naive", "ow"] if mode == "both" else [mode]
    n = cfg.get("n", 12)
    jobs = [(p, phi, m, n) for p, phi in cells for m in modes]
    results = list(ctx.mapper(_goodwyn_job, jobs))
    rows, out, fails = [], [], []
    for i, ((p, phi, m, _), r) in enumerate(zip(jobs, results)):
        meta = f"mode={m} p={reports.fmt_value(p)} phi={reports.fmt_value(phi)}"
        rows.append((i, r["gap"], 1, r["gap"], meta))
        out.append({"cell": i, "p": p, "phi": phi, **r})
        if r["gap"] < -GAP_TOL:
            fails.append(f"cell {i}: gap {r['gap']:.3g}")
    return Outcome(rows, {"cells": out, "min_gap": min(r["gap"] for r in results)}, fails)


# ------------------------------------------------------------------ quasi-tiling


def _fillings_job(job):
    seed, dim, count = job
    return random_filling_checks(seed, dim, count)


def cmd_quasitile(cfg, ctx) -> Outcome:
    if cfg.get("mode", "tile") == "fillings":
        count = cfg.get("count", 100)
        dims = cfg["dims"]
        rows, summary, fails = [], {}, []
        for dim, checks in zip(dims, ctx.mapper(_fillings_job, [(ctx.seed + d, d, count) for d in dims])):
            ok = 0
            for i, c in enumerate(checks):
                card, vol = c.cardinality, c.volume
                r = card.lhs / card.rhs if card.rhs else ""
                rows.append((f"{dim}:{i}", card.lhs, card.rhs, r,
                             f"volume {reports.fmt_value(vol.lhs)} >= {reports.fmt_value(vol.rhs)} "
                             f"holds={reports.fmt_value(vol.holds)}"))
                if c.passed:
                    ok += 1
                else:
                    fails.append(f"d={dim} instance {i}")
            summary[str(dim)] = {"instances": len(checks), "passed": ok}
        return Outcome(rows, {"mode": "fillings", "seed": ctx.seed, "dims": summary}, fails)
    A = C.region(cfg["target"])
    net = C.net(cfg["net"], A.dim) if "net" in cfg else NetSpec("cubes-anchored", A.dim)
    res = quasi_tile(A, net, C.rational(cfg["eps"]), C.region(cfg["K"]), C.rational(cfg.get("delta", 1)),
                     C.rational(cfg.get("rho", 1)), cfg.get("max_levels"), cfg.get("max_index", 10_000))
    rows = [(s.level, len(cs), s.shape.volume, s.ratio, f"net index {s.index} threshold {reports.fmt_value(s.threshold)}")
            for s, cs in zip(res.shapes, res.centers)]
    cert = res.certificate
    fails = [] if cert["passed"] else ["quasi-tiling certificate"]
    svg = reports.tiling_svg(res) if ctx.want_svg and A.dim == 2 else None
    if ctx.want_svg and A.dim != 2:
        print("note: --svg ignored for a target of dimension != 2", file=sys.stderr)
    return Outcome(rows, {"mode": "tile", "result": res.as_dict()}, fails, svg)


# ------------------------------------------------------------------ folner


def cmd_folner(cfg, ctx) -> Outcome:
    fam = cfg["family"]
    d = fam.get("dim", 1)
    idx = C.indices(fam["indices"])
    if fam["kind"] == "intervals":
        family = [(n, FiniteSet.grid(n, d)) for n in idx]
    else:
        delta = C.rational(fam.get("delta", Fraction(1, 2)))
        if any((n / delta).denominator != 1 for n in idx):
            raise C.ConfigError("delta must divide every index")
        family = [(n, FiniteSet.grid(int(n / delta), d, stride=delta)) for n in idx]
    gs = [tuple(C.rational(x) for x in g) for g in cfg["shifts"]]
    Us = {lab: C.region(u) for lab, u in cfg["U"].items()}
    rep = thin_folner_report(family, gs, Us, ctx.mapper)
    rows = [(r.n, r.matched, r.size, r.ratio, f"g={reports.fmt_value(r.shift)} U={r.u_label}") for r in rep.rows]
    mono = [{"shift": g, "U": lab, "monotone": m} for (g, lab), m in rep.monotone.items()]
    last = {f"g={reports.fmt_value(g)} U={lab}": rep.series(g, lab)[-1] for g, lab in rep.monotone}
    return Outcome(rows, {"monotone": mono, "last_ratio": last})


# ------------------------------------------------------------------ set functions


def _function(spec, rng):
    kind = spec["kind"]
    if kind == "cardinality":
        return cardinality(), 1
    if kind == "entropy":
        if "system" not in spec:
            raise C.ConfigError("entropy function needs a system")
        s = C.system(spec["system"])
        return entropy_set_function(s), getattr(s, "dim", 1)
    if kind == "coverage":
        u = spec.get("universe", 6)
        weights = {e: Fraction(rng.randint(1, 5)) for e in range(u)}
        sets = {(Fraction(x),): frozenset(e for e in range(u) if rng.random() < 0.4) for x in range(u)}
        return coverage_function(weights, sets), 1
    if kind == "volume":
        return region_volume(), None
    if kind == "thickened-volume":
        if "V" not in spec:
            raise C.ConfigError("thickened-volume needs V")
        return thickened_volume(C.region(spec["V"])), None
    return lattice_point_count(), None


def _random_subset(rng, pts, dim):
    return FiniteSet([p for p in pts if rng.random() < 0.5], dim=dim)


def _random_region(rng, dim, span=8, unit=Fraction(1, 2)):
    boxes = []
    for _ in range(rng.randint(1, 3)):
        lo = [rng.randint(0, span - 1) for _ in range(dim)]
        hi = [rng.randint(a + 1, span) for a in lo]
        boxes.append(Region.box([a * unit for a in lo], [b * unit for b in hi]))
    return Region.union_of(dim, boxes)


def _property_rows(f, fdim, samples, rng, cfg):
    rows, viol = [], []
    if f.domain == "regions":
        pairs = [(_random_region(rng, fdim), _random_region(rng, fdim)) for _ in range(samples)]
        mono_pairs = [(E & F, F) for E, F in pairs]
    else:
        universe = FiniteSet.grid(cfg["function"].get("universe", 6), fdim).points
        pairs = [(_random_subset(rng, universe, fdim), _random_subset(rng, universe, fdim)) for _ in range(samples)]
        mono_pairs = [(E & F, F) for E, F in pairs]
    checks = [("monotone", check_monotone, mono_pairs), ("subadditive", check_subadditive, pairs)]
    if f.domain != "regions":
        checks.append(("strongly_subadditive", check_strong_subadditive, pairs))
    for name, fn, ps in checks:
        v = fn(f, ps)
        rows.append((name, len(v), len(ps), Fraction(len(v), len(ps)), f"declared={reports.fmt_value(f.has(name))}"))
        if f.has(name):
            viol += v
    if f.domain != "regions":
        base = FiniteSet.grid(min(4, cfg["function"].get("universe", 4)), fdim)
        ks = cfg.get("ks", [1, 2, 3])
        v = check_shearer(f, base, ks, cfg.get("max_family_size", 4))
        rows.append(("shearer", len(v), len(base), "", f"ks={ks} declared={reports.fmt_value(f.has('shearer'))}"))
        if f.has("shearer"):
            viol += v
    return rows, viol


def cmd_setfun(cfg, ctx) -> Outcome:
    rng = random.Random(ctx.seed)
    f, fdim = _function(cfg["function"], rng)
    mode = cfg["mode"]
    samples = cfg["function"].get("samples", 50)
    if mode == "properties":
        rows, viol = _property_rows(f, fdim or 2, samples, rng, cfg)
        return Outcome(rows, {"function": f.name, "properties": sorted(f.properties),
                              "violations": [v.as_dict() for v in viol[:20]], "violation_count": len(viol)},
                       [f"{len(viol)} declared-property violations"] if viol else [])
    if mode == "ollagnier":
        if f.domain == "regions":
            raise C.ConfigError("ollagnier mode needs a function on finite sets")
        idx = C.indices(cfg.get("indices"), range(1, 11))
        family = [(n, FiniteSet.grid(n, fdim)) for n in idx]
        rep = ollagnier_limit(f, family, fdim, cfg.get("search_budget", 6))
        return Outcome(_report_rows(rep), {"function": f.name, "report": _report_summary(rep)})
    if f.domain == "finite-sets":
        raise C.ConfigError(f"{mode} mode needs a function on regions")
    if mode == "ow-limit":
        net = C.net(cfg.get("net", {"kind": "cubes-anchored"}))
        alt = C.net(cfg.get("alt_net", {"kind": "cubes-centered", "dim": net.dim}), net.dim)
        rep = ow_limit(f, net, alt, C.indices(cfg.get("indices"), range(1, 51)))
        rows = _report_rows(rep, "primary") + [(i, v, t, r, "alt") for i, v, t, r, _ in rep.alt_rows]
        return Outcome(rows, {"function": f.name, "report": _report_summary(rep), "gaps": rep.gaps()})
    if "K" not in cfg or "V" not in cfg:
        raise C.ConfigError("controlf mode needs K and V")
    K, V = C.region(cfg["K"]), C.region(cfg["V"])
    regs = [_random_region(rng, K.dim) for _ in range(samples)]
    rep = controlf_bound_check(f, K, V, regs)
    rows = [(i, lhs, rhs, lhs / rhs if rhs else "", f"holds={reports.fmt_value(ok)}")
            for i, (lhs, rhs, ok) in enumerate(rep.rows)]
    return Outcome(rows, {"function": f.name, "c_K": rep.c_K, "ok": rep.ok},
                   [] if rep.ok else ["control bound violated"])


# ------------------------------------------------------------------ van Hove, fixtures


def cmd_vanhove(cfg, ctx) -> Outcome:
    K = C.region(cfg["K"])
    net = C.net(cfg["net"], K.dim)
    idx = C.indices(cfg["indices"])
    vh = check_van_hove(net, K, idx)
    rows = []
    for n, r in zip(vh.indices, vh.ratios):
        A = net.region(n)
        rows.append((n, k_boundary(K, A).volume, A.volume, r, "boundary"))
    payload = {"monotone": vh.monotone, "last_ratio": vh.ratios[-1]}
    if "omega" in cfg:
        dr = density_report(C.omega(cfg["omega"], K.dim), net, idx)
        for n, r in zip(dr.indices, dr.ratios):
            rows.append((n, r * net.region(n).volume, net.region(n).volume, r, "density"))
        payload["density"] = {"exact": dr.exact_limit, "max_deviation": dr.max_deviation}
    return Outcome(rows, payload)


def cmd_fixtures(cfg, ctx) -> Outcome:
    res = run_fixtures(cfg.get("ns", list(range(4, 13))))
    rows = [(i, r.observed, r.expected, r.passed, f"{r.name} [{r.tag}]") for i, r in enumerate(res)]
    fails = [r.name for r in res if not r.passed]
    return Outcome(rows, {"fixtures": [r.as_dict() for r in res], "all_passed": not fails}, fails)


HANDLERS = {
    "entropy": cmd_entropy,
    "pressure": cmd_pressure,
    "goodwyn": cmd_goodwyn,
    "quasitile": cmd_quasitile,
    "folner-check": cmd_folner,
    "setfun-check": cmd_setfun,
    "vanhove-check": cmd_vanhove,
    "fixtures": cmd_fixtures,
}


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amenable-entropy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, required=name != "fixtures")
        s.add_argument("--out", type=Path, default=Path("out"))
        s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        s.add_argument("--strict", action="store_true", help="exit 4 when a certificate check fails")
        s.add_argument("--svg", type=Path, default=None, help="quasitile: write the 2-d tiling here")
        s.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes for grid cells")
    return p


def run(args) -> int:
    try:
        if args.config is None:
            cfg = C.validate({"version": C.SCHEMA_VERSION, "command": args.command})
        else:
            cfg = C.load(args.config, args.command)
    except C.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    try:
        with _pool(args.parallel) as mapper:
            out = HANDLERS[args.command](cfg, Context(seed, mapper, args.svg is not None))
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = {"version": C.SCHEMA_VERSION, "command": args.command, "seed": seed, "config": cfg,
               **out.payload, "failures": out.failures}
    reports.write_text(args.out / f"{args.command}.csv", reports.csv_text(out.rows))
    reports.write_text(args.out / f"{args.command}.json", reports.dumps(payload))
    if out.svg is not None:
        reports.write_text(args.svg, out.svg)
    for f in out.failures:
        print(f"check failed: {f}", file=sys.stderr)
    if out.failures and args.strict:
        return 4
    if out.failures and args.command == "fixtures":
        return 1
    return 0


def main(argv=None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
