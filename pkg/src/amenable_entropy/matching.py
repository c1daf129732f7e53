"""Matching numbers of translation relations and thin-Folner checks."""

from __future__ import annotations

import bisect
import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .geometry import FiniteSet, Region, point

ORACLE_LIMIT = 8


def hopcroft_karp(n_left: int, n_right: int, adj: Sequence[Sequence[int]]) -> list[int]:
    """Maximum bipartite matching; returns ``match_left`` (-1 for unmatched).

    Vertices and neighbor lists are scanned in the given order, so the
    result is deterministic.
    """
    INF = n_left + n_right + 1
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative augmenting search along the BFS layering
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == -1:
                    path.append((u, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l


def _diff_in(U: Region, x, y) -> bool:
    return U.contains_point(tuple(a - b for a, b in zip(x, y)))


def relation_adjacency(E: FiniteSet, F: FiniteSet, U: Region) -> list[list[int]]:
    """adj[i] lists j with E[i] - F[j] in U, using the bounding box of U to prune."""
    if U.is_empty() or not len(E) or not len(F):
        return [[] for _ in E.points]
    bb = U.bbox()
    fpts = F.points
    firsts = [p[0] for p in fpts]
    adj = []
    for x in E.points:
        # x - y in U implies x0 - hi0 < y0 <= x0 - lo0
        lo_i = bisect.bisect_right(firsts, x[0] - bb.hi[0])
        hi_i = bisect.bisect_right(firsts, x[0] - bb.lo[0])
        adj.append([j for j in range(lo_i, hi_i) if _diff_in(U, x, fpts[j])])
    return adj


def _require_zero(U: Region):
    if not U.contains_point((0,) * U.dim):
        raise ValueError("neighborhood U must contain 0")


def matching_number(E: FiniteSet, F: FiniteSet, U: Region) -> int:
    """Maximum matching in the relation {(x, y) in E x F : x - y in U}."""
    _require_zero(U)
    if not len(E) or not len(F):
        return 0
    m = hopcroft_karp(len(E), len(F), relation_adjacency(E, F, U))
    return sum(1 for v in m if v != -1)


def matching_number_permutation_oracle(F: FiniteSet, g, U: Region) -> int:
    """max over permutations gamma of F of |{x : gamma(x) - (g + x) in U}|."""
    _require_zero(U)
    if len(F) > ORACLE_LIMIT:
        raise ValueError("oracle budget exceeded")
    g = point(g)
    pts = F.points
    shifted = [tuple(a + b for a, b in zip(x, g)) for x in pts]
    ok = [[U.contains_point(tuple(a - b for a, b in zip(y, s))) for y in pts] for s in shifted]
    best = 0
    for perm in itertools.permutations(range(len(pts))):
        c = sum(ok[i][perm[i]] for i in range(len(pts)))
        if c > best:
            best = c
            if best == len(pts):
                break
    return best


@dataclass
class FolnerRow:
    n: int
    shift: tuple
    u_label: str
    matched: int
    size: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.matched, self.size)


@dataclass
class FolnerReport:
    rows: list
    monotone: dict  # (shift, u_label) -> bool

    def series(self, shift, u_label) -> list[Fraction]:
        return [r.ratio for r in self.rows if r.shift == shift and r.u_label == u_label]


def thin_folner_report(family: Sequence[tuple[int, FiniteSet]], gs, Us: dict,
                       mapper: Callable | None = None) -> FolnerReport:
    """Table of match(F_n, g+F_n, U)/|F_n| over the (n, g, U) grid.

    ``Us`` maps a label to a neighborhood region. ``mapper`` may be a
    process-pool map for parallel evaluation; order is preserved.
    """
    jobs = [(n, Fn, point(g), lab, U) for n, Fn in family for g in gs for lab, U in Us.items()]
    run = mapper or map
    counts = list(run(_folner_job, jobs))
    rows = [FolnerRow(n, g, lab, c, len(Fn)) for (n, Fn, g, lab, _), c in zip(jobs, counts)]
    mono = {}
    for g in gs:
        g = point(g)
        for lab in Us:
            s = [r.ratio for r in rows if r.shift == g and r.u_label == lab]
            mono[(g, lab)] = all(b >= a for a, b in zip(s, s[1:]))
    return FolnerReport(rows, mono)


def _folner_job(job) -> int:
    n, Fn, g, lab, U = job
    return matching_number(Fn, Fn.translate(g), U)


def in_U_neighborhood(Fp: FiniteSet, F: FiniteSet, U: Region) -> bool:
    """True iff there is a bijection phi: F' -> F with x - phi(x) in U."""
    _require_zero(U)
    if len(Fp) != len(F):
        return False
    return matching_number(Fp, F, U) == len(F)
