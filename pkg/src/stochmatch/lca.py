"""Instrumented runtime for local computation algorithms.

An LCA answers a query at a root site (vertex or edge) by exploring a
small neighborhood of it.  The runtime mediates every exploration step:

* ``probe`` expands a site, revealing its random tape and recording it
  in the out-query set Q+.  A probe target must be the root or adjacent
  to an already probed site, so every prefix of the probe sequence
  induces a connected subgraph containing the root (naturality).
* ``peek`` reads the tape of a site adjacent to the probed set without
  expanding it.  Peeks orient local decisions (e.g. visiting neighbors
  in rank order) and are not ledgered.

Sweeping all sites as roots yields, per site, the out-query count q+,
the in-query count q- (how many roots expanded it), and the correlated
count psi (how many roots' out-query sets intersect its own).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graph import Graph, SeedContext


class NaturalityViolation(RuntimeError):
    """An LCA touched a site not adjacent to its probed region."""


@dataclass(frozen=True, order=True)
class Site:
    kind: str  # "vertex" or "edge"
    id: int

    @classmethod
    def vertex(cls, v: int) -> "Site":
        return cls("vertex", v)

    @classmethod
    def edge(cls, e: int) -> "Site":
        return cls("edge", e)


def site_tape(ctx: SeedContext, site: Site) -> SeedContext:
    """The PRF namespace holding this site's private random tape."""
    return ctx.child("tape", site.kind, site.id)


@dataclass(frozen=True)
class ProbeTrace:
    root: Site
    probed: tuple  # Sites in expansion order; probed[0] == root
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def out_queries(self) -> frozenset:
        return frozenset(self.probed)

    def vertex_footprint(self, g: Graph) -> frozenset:
        """Vertex-granular view: an edge probe touches both endpoints."""
        out = set()
        for s in self.probed:
            if s.kind == "vertex":
                out.add(s.id)
            else:
                u, v = g.endpoints(s.id)
                out.add(u)
                out.add(v)
        return frozenset(out)


class LcaOracle:
    """Per-query mediator enforcing naturality and recording probes."""

    def __init__(self, g: Graph, ctx: SeedContext, root: Site) -> None:
        self.graph = g
        self._ctx = ctx
        self.root = root
        self._probed = []
        self._probed_set = set()
        self._touched_vertices = set()
        self._meta = {}
        self.probe(root)

    def _adjacent_to_probed(self, site: Site) -> bool:
        if site.kind == "vertex":
            if site.id in self._touched_vertices:
                return True
            return any(u in self._touched_vertices for u in self.graph.neighbors(site.id))
        u, v = self.graph.endpoints(site.id)
        return u in self._touched_vertices or v in self._touched_vertices

    def _admit(self, site: Site) -> None:
        if site.kind not in ("vertex", "edge"):
            raise ValueError(f"unknown site kind {site.kind!r}")
        if site == self.root or site in self._probed_set:
            return
        if not self._adjacent_to_probed(site):
            raise NaturalityViolation(
                f"{site} is not adjacent to the probed region of {self.root}"
            )

    def probe(self, site: Site) -> SeedContext:
        """Expand ``site``: ledger it and return its tape namespace."""
        self._admit(site)
        if site not in self._probed_set:
            self._probed_set.add(site)
            self._probed.append(site)
            if site.kind == "vertex":
                self._touched_vertices.add(site.id)
            else:
                u, v = self.graph.endpoints(site.id)
                self._touched_vertices.add(u)
                self._touched_vertices.add(v)
        return site_tape(self._ctx, site)

    def peek(self, site: Site) -> SeedContext:
        """Read a tape without expanding the site (not ledgered)."""
        self._admit(site)
        return site_tape(self._ctx, site)

    def annotate(self, key: str, value) -> None:
        self._meta[key] = value

    def trace(self) -> ProbeTrace:
        return ProbeTrace(self.root, tuple(self._probed), dict(self._meta))


def run_lca(lca, g: Graph, ctx: SeedContext, root: Site):
    """Run one rooted query; returns (output, ProbeTrace).

    The output is a pure function of (g, ctx, root): re-running with the
    same arguments reproduces both the answer and the trace.
    """
    if root.kind != lca.site_kind:
        raise ValueError(f"{lca} expects {lca.site_kind} roots, got {root.kind}")
    oracle = LcaOracle(g, ctx, root)
    out = lca.run(oracle, root)
    return out, oracle.trace()


@dataclass
class QueryLedger:
    """Aggregated sweep statistics.

    One sweep queries every site in ``sites`` as a root under shared
    tapes and records each root's out-query set.  Rows are per-sweep
    dictionaries mapping site -> count.
    """

    site_kind: str
    sites: tuple
    qplus_rows: list = field(default_factory=list)
    qminus_rows: list = field(default_factory=list)
    psi_rows: list = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.qplus_rows)

    def add_sweep(self, out_sets: dict) -> None:
        qplus = {s: len(out_sets[s]) for s in self.sites}
        qminus = {s: 0 for s in self.sites}
        for s in self.sites:
            for w in out_sets[s]:
                qminus[w] += 1
        psi = {}
        for s in self.sites:
            mine = out_sets[s]
            psi[s] = sum(1 for u in self.sites if not mine.isdisjoint(out_sets[u]))
        self.qplus_rows.append(qplus)
        self.qminus_rows.append(qminus)
        self.psi_rows.append(psi)

    def merge(self, other: "QueryLedger") -> None:
        if (self.site_kind, self.sites) != (other.site_kind, other.sites):
            raise ValueError("ledgers cover different site sets")
        self.qplus_rows.extend(other.qplus_rows)
        self.qminus_rows.extend(other.qminus_rows)
        self.psi_rows.extend(other.psi_rows)

    def _mean(self, rows: list, site: Site) -> float:
        return sum(row[site] for row in rows) / len(rows)

    def mean_qplus(self, site: Site) -> float:
        return self._mean(self.qplus_rows, site)

    def mean_qminus(self, site: Site) -> float:
        return self._mean(self.qminus_rows, site)

    def mean_psi(self, site: Site) -> float:
        return self._mean(self.psi_rows, site)

    def max_mean(self, stat: str) -> tuple:
        rows = getattr(self, f"{stat}_rows")
        best_site = max(self.sites, key=lambda s: (self._mean(rows, s), s))
        return self._mean(rows, best_site), best_site

    def stderr(self, stat: str, site: Site) -> float:
        rows = getattr(self, f"{stat}_rows")
        k = len(rows)
        if k < 2:
            return float("inf")
        mean = self._mean(rows, site)
        var = sum((row[site] - mean) ** 2 for row in rows) / (k - 1)
        return math.sqrt(var / k)


def sweep_ledger(lca, g: Graph, ctx: SeedContext, roots: Optional[Iterable[Site]] = None) -> QueryLedger:
    """One sweep: query every root under the tapes of ``ctx``."""
    if roots is None:
        count = g.n if lca.site_kind == "vertex" else g.m
        roots = [Site(lca.site_kind, i) for i in range(count)]
    else:
        roots = list(roots)
    ledger = QueryLedger(lca.site_kind, tuple(roots))
    out_sets = {}
    for root in roots:
        _, trace = run_lca(lca, g, ctx, root)
        out_sets[root] = trace.out_queries
    ledger.add_sweep(out_sets)
    return ledger


def gather_ledger(
    lca,
    g: Graph,
    ctx: SeedContext,
    trials: int,
    roots: Optional[Iterable[Site]] = None,
) -> QueryLedger:
    """``trials`` independent sweeps under tapes (ctx, "sweep", t)."""
    if trials < 1:
        raise ValueError("trials must be positive")
    total = None
    for t in range(trials):
        one = sweep_ledger(lca, g, ctx.child("sweep", t), roots)
        if total is None:
            total = one
        else:
            total.merge(one)
    return total


@dataclass(frozen=True)
class CorrelationEstimate:
    """delta(u, v): how often two roots' out-query sets intersect."""

    pair: tuple
    delta: float
    trials: int

    @property
    def stderr(self) -> float:
        return math.sqrt(max(self.delta * (1.0 - self.delta), 0.0) / self.trials)


def estimate_delta(
    lca,
    g: Graph,
    pairs: Iterable[tuple],
    trials: int,
    ctx: SeedContext,
    vertex_granular: bool = False,
) -> dict:
    """Monte Carlo delta for each root pair under fresh shared tapes.

    With ``vertex_granular`` set, edge-kind out-query sets are compared
    through their vertex footprints instead of raw sites.
    """
    pairs = [tuple(p) for p in pairs]
    roots = sorted({r for p in pairs for r in p})
    hits = {p: 0 for p in pairs}
    for t in range(trials):
        sub = ctx.child("delta", t)
        sets = {}
        for root in roots:
            _, trace = run_lca(lca, g, sub, root)
            sets[root] = (
                trace.vertex_footprint(g) if vertex_granular else trace.out_queries
            )
        for p in pairs:
            if not sets[p[0]].isdisjoint(sets[p[1]]):
                hits[p] += 1
    return {p: CorrelationEstimate(p, hits[p] / trials, trials) for p in pairs}


@dataclass(frozen=True)
class CorrelatedBoundReport:
    """max_v E[psi(v)] against the product of the largest mean q+ and q-."""

    lhs: float
    lhs_stderr: float
    rhs: float
    slack: float
    trials: int

    @property
    def ok(self) -> bool:
        return self.lhs <= self.slack * self.rhs + 3.0 * self.lhs_stderr


def check_correlated_bound(ledger: QueryLedger, slack: float = 3.0) -> CorrelatedBoundReport:
    """Compare the worst mean correlated-set size to mean-q+ * mean-q-.

    Needs a ledger of at least 30 sweeps for the error term to mean
    anything; flags violations beyond ``slack`` times the product plus
    three standard errors.
    """
    if ledger.trials < 2:
        raise ValueError("need at least two sweeps")
    lhs, lhs_site = ledger.max_mean("psi")
    qp, _ = ledger.max_mean("qplus")
    qm, _ = ledger.max_mean("qminus")
    return CorrelatedBoundReport(
        lhs=lhs,
        lhs_stderr=ledger.stderr("psi", lhs_site),
        rhs=qp * qm,
        slack=slack,
        trials=ledger.trials,
    )


def ledger_to_csv(ledger: QueryLedger) -> str:
    """CSV rows: site kind, site id, mean q+, mean q-, mean psi."""
    lines = ["kind,site,mean_qplus,mean_qminus,mean_psi"]
    for s in ledger.sites:
        lines.append(
            f"{s.kind},{s.id},{ledger.mean_qplus(s):.6f},"
            f"{ledger.mean_qminus(s):.6f},{ledger.mean_psi(s):.6f}"
        )
    return "\n".join(lines) + "\n"
