"""Stochastic graphs, seeded randomness, and realization handling.

A stochastic graph is a simple undirected graph whose edges carry
independent existence probabilities.  A realization keeps each edge
independently with its probability; everything downstream (matchings,
sparsifiers, local algorithms) consumes realizations produced here.

All randomness flows through :class:`SeedContext`, a keyed PRF over
hierarchical namespace paths.  Distinct paths yield independent streams
and the same path always reproduces the same value, so random tapes can
be revealed lazily and in any order without coordination.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator

ENUM_CAP = 24

_U64 = (1 << 64) - 1
_FLOAT_DENOM = float(1 << 53)


class GraphFormatError(ValueError):
    """Raised for malformed graph text input."""


class EdgeCountExceeded(ValueError):
    """Raised when an exhaustive enumeration would be too large."""


def _encode_labels(labels: tuple) -> bytes:
    # Length-prefixed, type-tagged encoding: no two distinct label tuples
    # may serialize to the same byte string.
    parts = []
    for part in labels:
        if isinstance(part, bool):
            raise TypeError(f"ambiguous namespace label: {part!r}")
        if isinstance(part, str):
            raw = part.encode()
            parts.append(b"s" + len(raw).to_bytes(4, "little") + raw)
        elif isinstance(part, int):
            parts.append(b"i" + (part & _U64).to_bytes(8, "little"))
        else:
            raise TypeError(f"unsupported namespace label: {part!r}")
    return b"".join(parts)


@dataclass(frozen=True)
class SeedContext:
    """Keyed PRF addressed by (master seed, namespace path).

    ``child(*labels)`` derives a sub-context with an extended path;
    ``uniform(*labels)`` evaluates the PRF at the current path plus the
    given labels and maps the digest to a float in [0, 1).  Labels may
    be strings or integers.
    """

    seed: int
    path: tuple = ()
    _key: bytes = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        seed_key = (self.seed & _U64).to_bytes(8, "little")
        h = hashlib.blake2b(_encode_labels(self.path), digest_size=32, key=seed_key)
        object.__setattr__(self, "_key", h.digest())

    def child(self, *labels) -> "SeedContext":
        return SeedContext(self.seed, self.path + tuple(labels))

    def digest(self, *labels) -> bytes:
        return hashlib.blake2b(
            _encode_labels(labels), digest_size=16, key=self._key
        ).digest()

    def uniform(self, *labels) -> float:
        raw = int.from_bytes(self.digest(*labels)[:8], "little")
        return (raw >> 11) / _FLOAT_DENOM

    def bernoulli(self, p: float, *labels) -> bool:
        return self.uniform(*labels) < p


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with per-edge existence probabilities.

    Edges are ``(u, v, p)`` triples with ``u < v`` and ``0 < p <= 1``,
    addressed by their index.  ``adjacency[v]`` lists the incident edge
    ids of ``v`` in increasing order; that order is the tie-breaking
    order used by every deterministic algorithm in the package.
    """

    n: int
    edges: tuple
    adjacency: tuple = field(compare=False)

    @classmethod
    def build(cls, n: int, edges: Iterable[tuple]) -> "Graph":
        normalized = []
        seen = set()
        for u, v, p in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not 0.0 < p <= 1.0:
                raise ValueError(f"edge probability {p} outside (0, 1]")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)
            normalized.append((key[0], key[1], float(p)))
        adjacency = [[] for _ in range(n)]
        for e, (u, v, _) in enumerate(normalized):
            adjacency[u].append(e)
            adjacency[v].append(e)
        return cls(n, tuple(normalized), tuple(tuple(a) for a in adjacency))

    @property
    def m(self) -> int:
        return len(self.edges)

    def endpoints(self, e: int) -> tuple:
        u, v, _ = self.edges[e]
        return u, v

    def probability(self, e: int) -> float:
        return self.edges[e][2]

    def incident(self, v: int) -> tuple:
        return self.adjacency[v]

    def neighbors(self, v: int) -> list:
        out = []
        for e in self.adjacency[v]:
            u, w, _ = self.edges[e]
            out.append(w if u == v else u)
        return out

    def edge_id(self, u: int, v: int):
        """Edge id for the pair (u, v), or None when absent."""
        for e in self.adjacency[u]:
            a, b, _ = self.edges[e]
            if a == v or b == v:
                return e
        return None

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)


@dataclass(frozen=True)
class Realization:
    """One sampled world: the subset of edges that came up present."""

    graph: Graph
    present: int  # bitmask over edge ids

    def has(self, e: int) -> bool:
        return (self.present >> e) & 1 == 1

    def edge_ids(self) -> Iterator[int]:
        mask = self.present
        e = 0
        while mask:
            if mask & 1:
                yield e
            mask >>= 1
            e += 1

    def size(self) -> int:
        return bin(self.present).count("1")

    def restrict(self, edge_mask: int) -> "Realization":
        return Realization(self.graph, self.present & edge_mask)


def sample_realization(g: Graph, ctx: SeedContext, trial: int) -> Realization:
    """Sample a realization; bit e is drawn from stream (ctx, "realize", trial, e)."""
    sub = ctx.child("realize", trial)
    # Hot path: hash.copy() skips the per-call key schedule but yields the
    # same digests as sub.uniform(e), which this must stay in lockstep with.
    base = hashlib.blake2b(digest_size=16, key=sub._key)
    mask = 0
    for e in range(len(g.edges)):
        h = base.copy()
        h.update(b"i" + (e & _U64).to_bytes(8, "little"))
        raw = int.from_bytes(h.digest()[:8], "little")
        if (raw >> 11) / _FLOAT_DENOM < g.edges[e][2]:
            mask |= 1 << e
    return Realization(g, mask)


def enumerate_realizations(g: Graph, cap: int = ENUM_CAP):
    """Yield (realization, probability) for every edge subset.

    Probabilities sum to 1 exactly up to float error.  Refuses graphs
    with more than ``cap`` edges.
    """
    m = g.m
    if m > cap:
        raise EdgeCountExceeded(f"{m} edges exceeds enumeration cap {cap}")
    probs = [g.edges[e][2] for e in range(m)]
    for mask in range(1 << m):
        pr = 1.0
        for e in range(m):
            pr *= probs[e] if (mask >> e) & 1 else 1.0 - probs[e]
        yield Realization(g, mask), pr


def parse_graph_text(text: str) -> Graph:
    """Parse the edge-list format: one ``u v p`` line per edge.

    ``#`` starts a comment; an optional ``n <count>`` header pins the
    vertex count (otherwise it is 1 + the largest endpoint seen).
    """
    n_declared = None
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "n":
            if len(tokens) != 2 or n_declared is not None:
                raise GraphFormatError(f"line {lineno}: bad vertex-count header")
            try:
                n_declared = int(tokens[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad vertex-count header") from None
            continue
        if len(tokens) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v p', got {raw!r}")
        try:
            u, v, p = int(tokens[0]), int(tokens[1]), float(tokens[2])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: expected 'u v p', got {raw!r}") from None
        triples.append((u, v, p))
    n = n_declared if n_declared is not None else 1 + max(
        (max(u, v) for u, v, _ in triples), default=-1
    )
    try:
        return Graph.build(n, triples)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def write_graph_text(g: Graph) -> str:
    lines = [f"n {g.n}"]
    for u, v, p in g.edges:
        lines.append(f"{u} {v} {p:.17g}")
    return "\n".join(lines) + "\n"


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())


def gnp_graph(n: int, edge_prob: float, p: float, ctx: SeedContext) -> Graph:
    """Erdos-Renyi instance: each pair is an edge with probability
    ``edge_prob``; every edge gets realization probability ``p``."""
    triples = []
    for u in range(n):
        for v in range(u + 1, n):
            if ctx.uniform("gnp", u, v) < edge_prob:
                triples.append((u, v, p))
    return Graph.build(n, triples)


def subgraph(g: Graph, edge_ids: Iterable[int]):
    """Dense re-indexed subgraph on the same vertex set.

    Returns ``(sub, to_sub, from_sub)`` where ``to_sub`` maps original
    edge ids to subgraph ids (None for dropped edges) and ``from_sub``
    maps back.
    """
    keep = sorted(set(edge_ids))
    to_sub = [None] * g.m
    triples = []
    for new_id, e in enumerate(keep):
        to_sub[e] = new_id
        triples.append(g.edges[e])
    sub = Graph.build(g.n, triples)
    return sub, tuple(to_sub), tuple(keep)


def edge_mask(edge_ids: Iterable[int]) -> int:
    mask = 0
    for e in edge_ids:
        mask |= 1 << e
    return mask
