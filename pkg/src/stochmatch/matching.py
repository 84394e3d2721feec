"""Deterministic maximum matching and fractional-matching utilities.

``maximum_matching`` is an augmenting-path search with blossom
contraction on general graphs.  It processes free vertices in
increasing id order and scans neighbors in adjacency order, so the
returned edge set (not just its size) is a fixed deterministic function
of the input; per-edge match frequencies measured elsewhere depend on
this choice and stay reproducible under it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .graph import ENUM_CAP, Graph, enumerate_realizations

BLOSSOM_SET_CAP = 15


class CapExceeded(ValueError):
    """Raised when an odd-set sweep would enumerate too many sets."""


def _active_ids(g: Graph, active) -> list:
    if active is None:
        return list(range(g.m))
    if isinstance(active, int):
        ids = []
        mask, e = active, 0
        while mask:
            if mask & 1:
                ids.append(e)
            mask >>= 1
            e += 1
        return ids
    return sorted(active)


class _Matcher:
    """One matching computation; holds the BFS state arrays."""

    def __init__(self, g: Graph, active) -> None:
        n = g.n
        self.n = n
        self.adj = [[] for _ in range(n)]
        self.eid = {}
        for e in _active_ids(g, active):
            u, v, _ = g.edges[e]
            self.adj[u].append(v)
            self.adj[v].append(u)
            self.eid[u, v] = e
            self.eid[v, u] = e
        self.match = [-1] * n

    def _find_path(self, root: int) -> int:
        n, adj, match = self.n, self.adj, self.match
        self.parent = p = [-1] * n
        base = list(range(n))
        used = [False] * n
        used[root] = True
        q = deque([root])
        while q:
            v = q.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    cur = self._lca(base, p, v, to)
                    blossom = [False] * n
                    self._mark_path(base, p, blossom, v, cur, to)
                    self._mark_path(base, p, blossom, to, cur, v)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                q.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if match[to] == -1:
                        return to
                    used[match[to]] = True
                    q.append(match[to])
        return -1

    def _lca(self, base, p, a, b):
        marked = set()
        v = a
        while True:
            v = base[v]
            marked.add(v)
            if self.match[v] == -1:
                break
            v = p[self.match[v]]
        v = b
        while True:
            v = base[v]
            if v in marked:
                return v
            v = p[self.match[v]]

    def _mark_path(self, base, p, blossom, v, b, child):
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[self.match[v]]] = True
            p[v] = child
            child = self.match[v]
            v = p[self.match[v]]

    def _augment(self, finish: int) -> None:
        v = finish
        while v != -1:
            pv = self.parent[v]
            ppv = self.match[pv]
            self.match[v] = pv
            self.match[pv] = v
            v = ppv

    def run(self, greedy_seed: bool = False) -> None:
        if greedy_seed:
            # Size-only fast path: start from a maximal matching so few
            # augmentation phases remain.  Do not use where the edge
            # set itself matters.
            match = self.match
            for (u, v), _ in sorted(self.eid.items(), key=lambda kv: kv[1]):
                if u < v and match[u] == -1 and match[v] == -1:
                    match[u] = v
                    match[v] = u
        for v in range(self.n):
            if self.match[v] == -1 and self.adj[v]:
                finish = self._find_path(v)
                if finish != -1:
                    self._augment(finish)

    def edge_set(self) -> frozenset:
        out = set()
        for v, w in enumerate(self.match):
            if w > v:
                out.add(self.eid[v, w])
        return frozenset(out)

    def size(self) -> int:
        return sum(1 for v, w in enumerate(self.match) if w > v)


def maximum_matching(g: Graph, active=None) -> frozenset:
    """Deterministic maximum matching, returned as a set of edge ids.

    ``active`` restricts the edge set: an iterable of edge ids, a
    bitmask, or None for all edges.
    """
    m = _Matcher(g, active)
    m.run()
    return m.edge_set()


def matching_number(g: Graph, active=None) -> int:
    """Size of a maximum matching (value only, greedy-seeded search)."""
    m = _Matcher(g, active)
    m.run(greedy_seed=True)
    return m.size()


def is_matching(g: Graph, edge_ids: Iterable[int]) -> bool:
    seen = set()
    for e in edge_ids:
        u, v = g.endpoints(e)
        if u in seen or v in seen:
            return False
        seen.add(u)
        seen.add(v)
    return True


def matched_vertices(g: Graph, edge_ids: Iterable[int]) -> frozenset:
    out = set()
    for e in edge_ids:
        u, v = g.endpoints(e)
        out.add(u)
        out.add(v)
    return frozenset(out)


def matching_size_expectation_exact(g: Graph, cap: int = ENUM_CAP) -> float:
    """E[mu(G_p)] by exhaustive realization enumeration."""
    total = 0.0
    for real, pr in enumerate_realizations(g, cap):
        if pr > 0.0:
            total += pr * matching_number(g, real.present)
    return total


@dataclass(frozen=True)
class FractionalMatching:
    """Nonnegative edge weights; zero entries are dropped from ``values``."""

    graph: Graph
    values: dict

    @classmethod
    def build(cls, g: Graph, values: dict) -> "FractionalMatching":
        kept = {}
        for e, x in values.items():
            if x < 0.0:
                raise ValueError(f"negative weight {x} on edge {e}")
            if x > 0.0:
                kept[int(e)] = float(x)
        return cls(g, kept)

    @property
    def support(self) -> frozenset:
        return frozenset(self.values)

    def get(self, e: int) -> float:
        return self.values.get(e, 0.0)


def fractional_size(f: FractionalMatching) -> float:
    return sum(f.values.values())


def vertex_load(f: FractionalMatching, v: int) -> float:
    total = 0.0
    for e in f.graph.incident(v):
        total += f.values.get(e, 0.0)
    return total


def violates_vertex_caps(f: FractionalMatching, tol: float = 1e-9) -> list:
    return [v for v in range(f.graph.n) if vertex_load(f, v) > 1.0 + tol]


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of an odd-set sweep: every connected odd vertex set S
    with |S| <= size_cap was checked against sum(f inside S) <= |S|//2."""

    eps: float
    size_cap: int
    sets_checked: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def _connected_odd_sets(adj: dict, vertices: list, kmax: int):
    # Wernicke-style extension: each connected set is produced exactly
    # once, anchored at its minimum vertex.
    for anchor in vertices:
        root_ext = [u for u in adj[anchor] if u > anchor]
        stack = [((anchor,), root_ext, frozenset((anchor,)) | frozenset(root_ext))]
        while stack:
            S, ext, seen = stack.pop()
            if len(S) % 2 == 1:
                yield S
            if len(S) >= kmax:
                continue
            for i, w in enumerate(ext):
                grown = [u for u in adj[w] if u > anchor and u not in seen]
                stack.append(
                    (
                        tuple(sorted(S + (w,))),
                        ext[i + 1 :] + grown,
                        seen | frozenset(grown),
                    )
                )


def check_blossom(f: FractionalMatching, eps: float, tol: float = 1e-9) -> CertificateReport:
    """Sweep the odd-set inequalities for |S| <= floor(1/eps).

    Only sets connected in the support of ``f`` are enumerated: a
    disconnected violator must contain a connected odd component that
    already violates, so the verdict is unchanged.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    kmax = int(1.0 / eps)
    if kmax > BLOSSOM_SET_CAP:
        raise CapExceeded(f"odd-set size cap {kmax} exceeds {BLOSSOM_SET_CAP}")
    g = f.graph
    adj = {}
    for e in f.support:
        u, v = g.endpoints(e)
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    adj = {v: sorted(ns) for v, ns in adj.items()}
    vertices = sorted(adj)
    checked = 0
    violations = []
    for S in _connected_odd_sets(adj, vertices, kmax):
        if len(S) < 3:
            continue
        checked += 1
        inside = set(S)
        mass = 0.0
        for u in S:
            for e in g.incident(u):
                x = f.values.get(e, 0.0)
                if x > 0.0:
                    a, b = g.endpoints(e)
                    if a in inside and b in inside and u == min(a, b):
                        mass += x
        bound = len(S) // 2
        if mass > bound + tol:
            violations.append((S, mass, bound))
    violations.sort()
    return CertificateReport(eps, kmax, checked, tuple(violations))
