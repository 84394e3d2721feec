"""Greedy maximal independent set as a local computation.

Under a random rank per vertex, the greedy MIS contains v exactly when
no lower-rank neighbor of v is in it.  Membership is therefore locally
decidable: recursively resolve the lower-rank neighbors in increasing
rank order and stop at the first member found.

The truncated variant aborts a root query whose recursion expands more
than a budget of distinct vertices and reports the root as not-in-set.
A truncated answer can only remove members (breaking maximality a
little); it can never add one, because a positive answer requires the
recursion to have completed, in which case it equals the untruncated
greedy answer.  The surviving set is always independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .graph import Graph, SeedContext
from .lca import Site, run_lca, site_tape


@dataclass(frozen=True)
class TmisBudget:
    """Cap on distinct vertices a single root query may expand."""

    threshold: int

    def __post_init__(self) -> None:
        if self.threshold < 1:
            raise ValueError("threshold must be positive")

    @classmethod
    def for_degree(cls, max_degree: int, eps: float, c: float = 1.0) -> "TmisBudget":
        """Quadratic-in-degree budget: ceil(c * Delta^2 / eps)."""
        return cls(max(1, math.ceil(c * max_degree * max_degree / eps)))


@dataclass(frozen=True)
class TmisOutcome:
    member: bool
    calls: int
    truncated: bool


class _Exhausted(Exception):
    pass


def vertex_rank(ctx: SeedContext, v: int) -> tuple:
    """Total rank order: tape-drawn float with id tie-breaking."""
    return (site_tape(ctx, Site.vertex(v)).uniform("rank"), v)


def gmis_member(g: Graph, ranks: dict, v: int, _memo: Optional[dict] = None) -> bool:
    """Reference greedy-MIS membership under explicit ranks.

    ``ranks[v]`` must be totally ordered (use (float, id) tuples).
    """
    memo = {} if _memo is None else _memo

    def member(u: int) -> bool:
        if u in memo:
            return memo[u]
        below = sorted(
            (w for w in g.neighbors(u) if ranks[w] < ranks[u]),
            key=lambda w: ranks[w],
        )
        out = True
        for w in below:
            if member(w):
                out = False
                break
        memo[u] = out
        return out

    return member(v)


class TruncatedGreedyMis:
    """LCA protocol object for (possibly truncated) greedy MIS queries."""

    site_kind = "vertex"

    def __init__(self, budget: Optional[TmisBudget] = None) -> None:
        self.budget = budget

    def run(self, oracle, root: Site) -> TmisOutcome:
        g = oracle.graph
        memo = {}
        calls = 0
        limit = self.budget.threshold if self.budget is not None else None

        def member(v: int) -> bool:
            nonlocal calls
            if v in memo:
                return memo[v]
            if limit is not None and calls >= limit:
                # the threshold is spent; the call that would exceed it
                # never runs, so reported counts stay <= threshold
                raise _Exhausted
            calls += 1
            rank_v = oracle.probe(Site.vertex(v)).uniform("rank"), v
            below = []
            for w in g.neighbors(v):
                rank_w = oracle.peek(Site.vertex(w)).uniform("rank"), w
                if rank_w < rank_v:
                    below.append((rank_w, w))
            below.sort()
            out = True
            for _, w in below:
                if member(w):
                    out = False
                    break
            memo[v] = out
            return out

        try:
            result = member(root.id)
        except _Exhausted:
            oracle.annotate("calls", calls)
            oracle.annotate("truncated", True)
            return TmisOutcome(False, calls, True)
        oracle.annotate("calls", calls)
        oracle.annotate("truncated", False)
        return TmisOutcome(result, calls, False)


def tmis_query(
    g: Graph, ctx: SeedContext, v: int, budget: Optional[TmisBudget] = None
):
    """One instrumented membership query; returns (TmisOutcome, ProbeTrace)."""
    lca = TruncatedGreedyMis(budget)
    outcome, trace = run_lca(lca, g, ctx, Site.vertex(v))
    return outcome, trace


def tmis_member(
    g: Graph, ctx: SeedContext, v: int, budget: Optional[TmisBudget] = None
) -> bool:
    outcome, _ = tmis_query(g, ctx, v, budget)
    return outcome.member


def tmis_set(
    g: Graph, ctx: SeedContext, budget: Optional[TmisBudget] = None
) -> frozenset:
    """All members under shared tapes.

    With no budget the answers are plain greedy MIS, a pure function of
    the ranks, so a shared memo across roots is sound and fast.  With a
    budget each root is queried independently to keep the per-root
    truncation semantics honest.
    """
    if budget is None:
        ranks = {v: vertex_rank(ctx, v) for v in range(g.n)}
        memo: dict = {}
        return frozenset(v for v in range(g.n) if gmis_member(g, ranks, v, memo))
    return frozenset(v for v in range(g.n) if tmis_member(g, ctx, v, budget))
