"""Profiles, augmenting hyperwalks, and the recursive matching procedure.

A profile pairs each of alpha+1 realizations with a matching of it.
A hyperwalk is a walk on the base graph whose j-th edge carries a copy
index s_j; applying it to a profile adds odd-position edges to, and
removes even-position edges from, the matching of their copy.  A walk
is augmenting when the application yields a valid profile again, its
two endpoints each gain one unit of profile degree, every other walk
vertex keeps its degree, and both endpoints are unsaturated.

``b_generic`` computes the recursive matching: at level r it builds the
profile from level r-1 matchings (copy 0 inherits the input realization,
copies 1..alpha draw fresh ones from the PRF), selects a greedy maximal
independent set of augmenting hyperwalks by rank, and returns copy 0's
updated matching.  ``BMatchingLca`` answers single-edge membership
queries for the same function by local exploration; with identical
seeds the two routes agree edge for edge, which the test suite checks
exhaustively on small instances.

Rank-greedy MIS membership is resolved per root query with a budget on
distinct expansions.  A query that exhausts its budget aborts and
reports non-membership; positive answers always come from completed
computations, so the selected walk set stays independent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .graph import Graph, Realization, SeedContext, sample_realization
from .lca import Site, site_tape

WALK_CEILING_DEFAULT = 100_000
NODE_CEILING_DEFAULT = 2_000_000


class EnumerationTooLarge(RuntimeError):
    """A hyperwalk enumeration would exceed its configured ceiling."""


class ResourceGuard(RuntimeError):
    """A recursive computation exceeded its configured node ceiling."""


class _MisExhausted(Exception):
    pass


@dataclass(frozen=True)
class BParams:
    """Knobs of the recursive matching procedure.

    alpha      fresh realizations per level (copy 0 inherits its input)
    walk_len   maximum hyperwalk length
    depth      recursion depth r
    eps        accuracy parameter (drives the asymptotic presets)
    margin     unsaturation slack subtracted from the target marginals
    mis_budget distinct expansions allowed per MIS root query (None: off)
    """

    alpha: int
    walk_len: int
    depth: int
    eps: float
    margin: float
    mis_budget: Optional[int] = None
    walk_ceiling: int = WALK_CEILING_DEFAULT
    node_ceiling: int = NODE_CEILING_DEFAULT

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.walk_len < 1:
            raise ValueError("walk_len must be positive")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.margin < 0.0:
            raise ValueError("margin must be nonnegative")
        if self.mis_budget is not None and self.mis_budget < 1:
            raise ValueError("mis_budget must be positive when set")

    @classmethod
    def from_eps(cls, eps: float, conflict_degree: Optional[int] = None) -> "BParams":
        """Asymptotic preset: alpha = 1/eps^7 - 1 copies, walks of length
        2/eps, depth 1/eps^9, margin 2 eps^2, and a cubic budget in the
        conflict degree when one is supplied."""
        budget = None
        if conflict_degree is not None:
            budget = max(1, math.ceil(conflict_degree**3 / eps))
        return cls(
            alpha=max(0, math.ceil(1.0 / eps**7) - 1),
            walk_len=math.ceil(2.0 / eps),
            depth=math.ceil(1.0 / eps**9),
            eps=eps,
            margin=2.0 * eps * eps,
            mis_budget=budget,
        )


# ---------------------------------------------------------------------------
# hyperwalks


@dataclass(frozen=True)
class Hyperwalk:
    """Edge walk with one copy index per position.

    Edges are distinct and consecutive edges share an endpoint.  Odd
    positions (1-based) are additions, even positions removals.  A walk
    of odd length acts identically to its reversal, so those pairs are
    stored in one canonical orientation; even-length walks change
    meaning under reversal and keep their direction.
    """

    edges: tuple
    indices: tuple

    @classmethod
    def make(cls, edges: Iterable[int], indices: Iterable[int]) -> "Hyperwalk":
        edges = tuple(edges)
        indices = tuple(indices)
        if not edges:
            raise ValueError("empty hyperwalk")
        if len(edges) != len(indices):
            raise ValueError("edges and indices must have equal length")
        if len(set(edges)) != len(edges):
            raise ValueError("hyperwalk edges must be distinct")
        if any(s < 0 for s in indices):
            raise ValueError("copy indices must be nonnegative")
        if len(edges) % 2 == 1:
            fwd = (edges, indices)
            rev = (edges[::-1], indices[::-1])
            edges, indices = min(fwd, rev)
        return cls(edges, indices)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def sort_key(self) -> tuple:
        return (len(self.edges), self.edges, self.indices)

    def entries(self):
        """(position, edge, copy) triples with 1-based positions."""
        return tuple(
            (j + 1, e, s) for j, (e, s) in enumerate(zip(self.edges, self.indices))
        )

    def additions(self) -> frozenset:
        return frozenset((e, s) for j, e, s in self.entries() if j % 2 == 1)

    def removals(self) -> frozenset:
        return frozenset((e, s) for j, e, s in self.entries() if j % 2 == 0)


def walk_vertices(g: Graph, edges: tuple) -> tuple:
    """Vertex sequence v_0..v_k of an edge walk; raises for non-walks.

    A single edge is oriented from its smaller endpoint; longer walks
    are oriented by the shared endpoints of consecutive edges.
    """
    if not edges:
        raise ValueError("empty walk")
    if len(edges) == 1:
        return g.endpoints(edges[0])
    a1, b1 = g.endpoints(edges[0])
    a2, b2 = g.endpoints(edges[1])
    shared = {a1, b1} & {a2, b2}
    if len(shared) != 1:
        raise ValueError("consecutive edges must share one endpoint")
    v1 = shared.pop()
    vseq = [b1 if v1 == a1 else a1, v1]
    for e in edges[1:]:
        a, b = g.endpoints(e)
        if a == vseq[-1]:
            vseq.append(b)
        elif b == vseq[-1]:
            vseq.append(a)
        else:
            raise ValueError("consecutive edges must share one endpoint")
    return tuple(vseq)


def _walks_from(g: Graph, start: int, maxlen: int, banned: tuple = ()):
    """All directed edge-distinct walks leaving ``start``, including the
    trivial length-0 walk."""
    first = ((start,), ())
    out = [first]
    stack = [first]
    while stack:
        vseq, eseq = stack.pop()
        if len(eseq) >= maxlen:
            continue
        v = vseq[-1]
        for e in g.incident(v):
            if e in eseq or e in banned:
                continue
            a, b, _ = g.edges[e]
            item = (vseq + (b if a == v else a,), eseq + (e,))
            out.append(item)
            stack.append(item)
    return out


def _directed_walks_touching(g: Graph, v: int, maxlen: int) -> set:
    """Directed walks of length 1..maxlen visiting vertex ``v``."""
    found = set()
    for back_v, back_e in _walks_from(g, v, maxlen):
        rem = maxlen - len(back_e)
        for fwd_v, fwd_e in _walks_from(g, v, rem, banned=back_e):
            if not back_e and not fwd_e:
                continue
            vseq = tuple(reversed(back_v)) + fwd_v[1:]
            eseq = tuple(reversed(back_e)) + fwd_e
            found.add((vseq, eseq))
    return found


class WalkIndex:
    """Lazy registry of all hyperwalks of bounded length on one graph.

    Provides containment lookups (walks through a vertex or an edge),
    conflict adjacency (walks sharing a vertex), and vertex sequences.
    Enumerations beyond ``ceiling`` hyperwalks raise
    :class:`EnumerationTooLarge`.
    """

    def __init__(self, g: Graph, walk_len: int, alpha: int, ceiling: int = WALK_CEILING_DEFAULT) -> None:
        if walk_len < 1:
            raise ValueError("walk_len must be positive")
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.g = g
        self.walk_len = walk_len
        self.alpha = alpha
        self.ceiling = ceiling
        self._by_vertex = {}
        self._by_edge = {}
        self._neighbors = {}
        self._vseqs = {}
        self._all = None

    def _expand(self, directed: set) -> tuple:
        walks = set()
        reps = self.alpha + 1
        for _, eseq in directed:
            span = len(eseq)
            if self.ceiling and len(walks) + reps**span > self.ceiling * 2:
                raise EnumerationTooLarge(
                    f"more than {self.ceiling} hyperwalks at length {self.walk_len}"
                )
            for idx in itertools.product(range(reps), repeat=span):
                walks.add(Hyperwalk.make(eseq, idx))
        if self.ceiling and len(walks) > self.ceiling:
            raise EnumerationTooLarge(
                f"more than {self.ceiling} hyperwalks at length {self.walk_len}"
            )
        return tuple(sorted(walks, key=lambda w: w.sort_key))

    def walks_through_vertex(self, v: int) -> tuple:
        if v not in self._by_vertex:
            directed = _directed_walks_touching(self.g, v, self.walk_len)
            self._by_vertex[v] = self._expand(directed)
        return self._by_vertex[v]

    def walks_through_edge(self, e: int) -> tuple:
        if e not in self._by_edge:
            u = self.g.endpoints(e)[0]
            self._by_edge[e] = tuple(
                w for w in self.walks_through_vertex(u) if e in w.edges
            )
        return self._by_edge[e]

    def all_walks(self) -> tuple:
        if self._all is None:
            walks = set()
            for v in range(self.g.n):
                walks.update(self.walks_through_vertex(v))
                if self.ceiling and len(walks) > self.ceiling:
                    raise EnumerationTooLarge(
                        f"more than {self.ceiling} hyperwalks at length {self.walk_len}"
                    )
            self._all = tuple(sorted(walks, key=lambda w: w.sort_key))
        return self._all

    def vertices_of(self, w: Hyperwalk) -> tuple:
        if w not in self._vseqs:
            self._vseqs[w] = walk_vertices(self.g, w.edges)
        return self._vseqs[w]

    def neighbors(self, w: Hyperwalk) -> tuple:
        """Hyperwalks sharing at least one vertex with ``w``, excluding it."""
        if w not in self._neighbors:
            seen = set()
            for v in sorted(set(self.vertices_of(w))):
                seen.update(self.walks_through_vertex(v))
            seen.discard(w)
            self._neighbors[w] = tuple(sorted(seen, key=lambda x: x.sort_key))
        return self._neighbors[w]


def enumerate_hyperwalks(
    g: Graph, walk_len: int, alpha: int, ceiling: int = WALK_CEILING_DEFAULT
) -> tuple:
    """Every hyperwalk of length at most ``walk_len``, in canonical order."""
    return WalkIndex(g, walk_len, alpha, ceiling).all_walks()


def enumerate_hyperwalks_containing(
    g: Graph, site: Site, walk_len: int, alpha: int, ceiling: int = WALK_CEILING_DEFAULT
) -> tuple:
    """Hyperwalks through a vertex or edge site, in canonical order."""
    index = WalkIndex(g, walk_len, alpha, ceiling)
    if site.kind == "vertex":
        return index.walks_through_vertex(site.id)
    return index.walks_through_edge(site.id)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """Realization/matching pairs (copy 0 first)."""

    pairs: tuple

    @property
    def alpha(self) -> int:
        return len(self.pairs) - 1

    @property
    def graph(self) -> Graph:
        return self.pairs[0][0].graph

    def realization(self, i: int) -> Realization:
        return self.pairs[i][0]

    def matching(self, i: int) -> frozenset:
        return self.pairs[i][1]


def validate_profile(p: Profile) -> None:
    """Raises unless every matching is a matching within its realization."""
    g = p.graph
    for i, (real, matching) in enumerate(p.pairs):
        seen = set()
        for e in matching:
            if not real.has(e):
                raise ValueError(f"copy {i}: edge {e} not realized")
            u, v = g.endpoints(e)
            if u in seen or v in seen:
                raise ValueError(f"copy {i}: edges collide at a vertex")
            seen.add(u)
            seen.add(v)


def apply_hyperwalk(p: Profile, w: Hyperwalk) -> Profile:
    """P with odd entries added to and even entries removed from their
    copies (removal wins when both touch the same copy)."""
    if any(s > p.alpha for s in w.indices):
        raise ValueError("copy index out of range for this profile")
    adds = w.additions()
    removals = w.removals()
    pairs = []
    for i, (real, matching) in enumerate(p.pairs):
        new = set(matching)
        new.update(e for (e, s) in adds if s == i)
        new.difference_update(e for (e, s) in removals if s == i)
        pairs.append((real, frozenset(new)))
    return Profile(tuple(pairs))


def degree_in_profile(p: Profile, v: int) -> int:
    """Number of copies whose matching covers ``v``."""
    g = p.graph
    count = 0
    for _, matching in p.pairs:
        if any(e in matching for e in g.incident(v)):
            count += 1
    return count


@dataclass(frozen=True)
class UnsaturationTable:
    """Per-vertex match marginals: the targets ``a_prob`` and one row of
    recursive-matching marginals per level (row 0 is all zeros)."""

    a_prob: tuple
    b_rows: tuple
    samples: int

    def unsaturated(self, v: int, level: int, margin: float) -> bool:
        if not 0 <= level < len(self.b_rows):
            raise ValueError(f"no marginals for level {level}")
        return self.b_rows[level][v] < self.a_prob[v] - margin

    @classmethod
    def always_unsaturated(cls, n: int, levels: int) -> "UnsaturationTable":
        """Synthetic table: target 1, recursive marginal 0 at all levels.
        Every vertex passes any margin below 1."""
        row = (0.0,) * n
        return cls((1.0,) * n, tuple(row for _ in range(levels + 1)), 0)

    @classmethod
    def never_unsaturated(cls, n: int, levels: int) -> "UnsaturationTable":
        row = (0.0,) * n
        return cls((0.0,) * n, tuple(row for _ in range(levels + 1)), 0)


def _augmenting_core(
    g: Graph,
    w: Hyperwalk,
    vseq: tuple,
    alpha: int,
    member_fn: Callable,
    realized_fn: Callable,
    unsat_fn: Callable,
) -> bool:
    """Shared validity predicate.

    ``member_fn(i, e)`` and ``realized_fn(i, e)`` answer for copy i at
    the previous level; ``unsat_fn(v)`` is the endpoint gate.  Both the
    materialized checker and the local-computation route call this with
    their own accessors, so the two routes cannot drift apart.
    """
    if any(s > alpha for s in w.indices):
        raise ValueError("copy index out of range")
    v0, vk = vseq[0], vseq[-1]
    if v0 == vk:
        return False
    if not unsat_fn(v0) or not unsat_fn(vk):
        return False
    adds = w.additions()
    removals = w.removals()
    for e, s in sorted(adds):
        if not realized_fn(s, e):
            return False
    touched = sorted({s for s in w.indices})
    endpoints = (v0, vk)
    for u in sorted(set(vseq)):
        delta = 0
        for i in touched:
            before = False
            after_count = 0
            for e in g.incident(u):
                in_before = member_fn(i, e)
                if in_before:
                    before = True
                in_after = (in_before and (e, i) not in removals) or (e, i) in adds
                if in_after:
                    after_count += 1
            if after_count > 1:
                return False
            delta += (1 if after_count > 0 else 0) - (1 if before else 0)
        required = 1 if u in endpoints else 0
        if delta != required:
            return False
    return True


def is_augmenting(
    p: Profile,
    w: Hyperwalk,
    table: UnsaturationTable,
    level: int,
    margin: float,
) -> bool:
    """Validity of ``w`` against a materialized profile.

    ``level`` is the recursion level of the profile's matchings; the
    endpoint gate reads that row of the table.
    """
    g = p.graph
    vseq = walk_vertices(g, w.edges)
    return _augmenting_core(
        g,
        w,
        vseq,
        p.alpha,
        member_fn=lambda i, e: e in p.matching(i),
        realized_fn=lambda i, e: p.realization(i).has(e),
        unsat_fn=lambda v: table.unsaturated(v, level, margin),
    )


# ---------------------------------------------------------------------------
# rank-greedy MIS over hyperwalks (shared recursion engine)


def _mis_root_query(
    root: Hyperwalk,
    rank_fn: Callable,
    valid_fn: Callable,
    neighbors_fn: Callable,
    budget: Optional[int],
):
    """Resolve one membership query in the conflict graph of hyperwalks.

    Members are walks that are valid and have no lower-rank member
    neighbor.  The recursion counts distinct expansions; exceeding the
    budget aborts the whole query with a negative answer.  Returns
    (member, truncated, calls).
    """
    memo = {}
    calls = 0

    def member(w: Hyperwalk) -> bool:
        nonlocal calls
        if w in memo:
            return memo[w]
        calls += 1
        if budget is not None and calls > budget:
            raise _MisExhausted
        if not valid_fn(w):
            memo[w] = False
            return False
        rank_w = rank_fn(w)
        below = sorted(
            ((rank_fn(x), x) for x in neighbors_fn(w)), key=lambda t: t[0]
        )
        out = True
        for rank_x, x in below:
            if rank_x >= rank_w:
                break
            if member(x):
                out = False
                break
        memo[w] = out
        return out

    try:
        return member(root), False, calls
    except _MisExhausted:
        return False, True, calls


# ---------------------------------------------------------------------------
# generic (materialized) route


class _Guard:
    def __init__(self, ceiling: int) -> None:
        self.ceiling = ceiling
        self.nodes = 0

    def tick(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.ceiling and self.nodes > self.ceiling:
            raise ResourceGuard(f"computation exceeded {self.ceiling} nodes")


def _prf_realized(g: Graph, ctx: SeedContext, lineage: tuple, e: int) -> bool:
    tape = site_tape(ctx, Site.edge(e))
    return tape.uniform("copy", *lineage) < g.probability(e)


def _prf_realization(g: Graph, ctx: SeedContext, lineage: tuple) -> Realization:
    mask = 0
    for e in range(g.m):
        if _prf_realized(g, ctx, lineage, e):
            mask |= 1 << e
    return Realization(g, mask)


def _pure_walk_rank(ctx: SeedContext, lineage: tuple, level: int, w: Hyperwalk) -> tuple:
    tape = site_tape(ctx, Site.edge(w.edges[0]))
    u = tape.uniform(
        "misrank", *lineage, level, len(w.edges), *w.edges, *w.indices
    )
    return (u,) + w.sort_key


def _select_walks(
    profile: Profile,
    walks: WalkIndex,
    table: UnsaturationTable,
    params: BParams,
    ctx: SeedContext,
    lineage: tuple,
    level: int,
    guard: _Guard,
) -> list:
    """Greedy MIS of augmenting hyperwalks by rank, with each member's
    query re-run under the per-root expansion budget."""
    valid_memo = {}

    def valid(w: Hyperwalk) -> bool:
        if w not in valid_memo:
            guard.tick()
            valid_memo[w] = is_augmenting(profile, w, table, level - 1, params.margin)
        return valid_memo[w]

    rank_memo = {}

    def rank(w: Hyperwalk) -> tuple:
        if w not in rank_memo:
            rank_memo[w] = _pure_walk_rank(ctx, lineage, level, w)
        return rank_memo[w]

    order = sorted(
        ((rank(w), w) for w in walks.all_walks() if valid(w)), key=lambda t: t[0]
    )
    members = []
    covered = set()
    for _, w in order:
        vs = walks.vertices_of(w)
        if all(v not in covered for v in vs):
            members.append(w)
            covered.update(vs)
    if params.mis_budget is None:
        return members
    kept = []
    for w in members:
        ok, truncated, calls = _mis_root_query(
            w, rank, valid, walks.neighbors, params.mis_budget
        )
        guard.tick(calls)
        assert ok or truncated, "sweep member must resolve positively when untruncated"
        if ok:
            kept.append(w)
    return kept


def b_generic(
    g: Graph,
    realization: Realization,
    params: BParams,
    ctx: SeedContext,
    level: Optional[int] = None,
    table: Optional[UnsaturationTable] = None,
    walks: Optional[WalkIndex] = None,
    check: bool = False,
) -> frozenset:
    """Recursive matching of ``realization`` at the given level.

    Copy 0 of each node inherits the parent's realization; copies 1..alpha
    at level r under lineage path sigma are drawn from the PRF namespace
    (sigma, r, i).  The returned edge set is a matching within the input
    realization and is reproducible from (ctx, realization).  With
    ``check`` set, every intermediate profile is re-validated after each
    hyperwalk application (slow; for tests).
    """
    if level is None:
        level = params.depth
    if table is None:
        table = UnsaturationTable.always_unsaturated(g.n, max(1, level))
    if walks is None:
        walks = WalkIndex(g, params.walk_len, params.alpha, params.walk_ceiling)
    if walks.alpha != params.alpha or walks.walk_len != params.walk_len:
        raise ValueError("walk index does not match params")
    guard = _Guard(params.node_ceiling)

    def recurse(lineage: tuple, real: Realization, lvl: int) -> frozenset:
        guard.tick()
        if lvl == 0:
            return frozenset()
        pairs = []
        for i in range(params.alpha + 1):
            if i == 0:
                sub_lineage, gi = lineage, real
            else:
                sub_lineage = lineage + (lvl, i)
                gi = _prf_realization(g, ctx, sub_lineage)
            pairs.append((gi, recurse(sub_lineage, gi, lvl - 1)))
        profile = Profile(tuple(pairs))
        if check:
            validate_profile(profile)
        chosen = _select_walks(profile, walks, table, params, ctx, lineage, lvl, guard)
        for w in sorted(chosen, key=lambda x: x.sort_key):
            profile = apply_hyperwalk(profile, w)
            if check:
                validate_profile(profile)
        return profile.matching(0)

    return recurse((), realization, level)


def build_unsaturation_table(
    g: Graph,
    params: BParams,
    level: int,
    samples: int,
    ctx: SeedContext,
    a_prob: Iterable[float],
    walks: Optional[WalkIndex] = None,
) -> UnsaturationTable:
    """Monte Carlo match marginals of the recursive matching, per level.

    Row l is estimated by running level-l computations on ``samples``
    fresh realizations; rows are built bottom-up since level l consults
    row l-1 for its endpoint gates.  ``a_prob`` supplies the target
    marginals (for a matched-realization target these are the per-vertex
    q loads, which the caller knows from its q profile).
    """
    a_prob = tuple(a_prob)
    if len(a_prob) != g.n:
        raise ValueError("a_prob must have one entry per vertex")
    if samples < 1:
        raise ValueError("samples must be positive")
    if walks is None:
        walks = WalkIndex(g, params.walk_len, params.alpha, params.walk_ceiling)
    rows = [(0.0,) * g.n]
    for lvl in range(1, level + 1):
        partial = UnsaturationTable(a_prob, tuple(rows), samples)
        hits = [0] * g.n
        for s in range(samples):
            sub = ctx.child("unsat", lvl, s)
            real = sample_realization(g, sub.child("input"), 0)
            matched = b_generic(g, real, params, sub.child("alg"), lvl, partial, walks)
            for e in matched:
                u, v = g.endpoints(e)
                hits[u] += 1
                hits[v] += 1
        rows.append(tuple(h / samples for h in hits))
    return UnsaturationTable(a_prob, tuple(rows), samples)


# ---------------------------------------------------------------------------
# local-computation route


class _PureTapes:
    """Tape access without instrumentation (shared-cache fast path)."""

    def __init__(self, lca: "BMatchingLca", ctx: SeedContext) -> None:
        self.lca = lca
        self.ctx = ctx

    def touch_edge(self, e: int) -> None:
        pass

    def ensure_walk(self, w: Hyperwalk) -> None:
        pass

    def realized(self, lineage: tuple, e: int) -> bool:
        if not lineage:
            return self.lca.root_realization.has(e)
        return _prf_realized(self.lca.g, self.ctx, lineage, e)

    def walk_rank(self, lineage: tuple, level: int, w: Hyperwalk) -> tuple:
        return _pure_walk_rank(self.ctx, lineage, level, w)


class _OracleTapes:
    """Tape access through a runtime oracle: every edge whose realization
    or matching status is consulted gets probed, walks are probed in a
    connected order, and ranks are read off the first walk edge's tape."""

    def __init__(self, lca: "BMatchingLca", oracle) -> None:
        self.lca = lca
        self.oracle = oracle
        self._probed = set()
        self._touched = set()
        root = oracle.root
        if root.kind != "edge":
            raise ValueError("matching queries take edge roots")
        self._note(root.id)

    def _note(self, e: int) -> None:
        self._probed.add(e)
        u, v = self.lca.g.endpoints(e)
        self._touched.add(u)
        self._touched.add(v)

    def touch_edge(self, e: int) -> None:
        if e in self._probed:
            return
        self.oracle.probe(Site.edge(e))
        self._note(e)

    def ensure_walk(self, w: Hyperwalk) -> None:
        edges = w.edges
        if all(e in self._probed for e in edges):
            return
        anchor = None
        for j, e in enumerate(edges):
            u, v = self.lca.g.endpoints(e)
            if e in self._probed or u in self._touched or v in self._touched:
                anchor = j
                break
        if anchor is None:
            anchor = 0  # let the runtime flag the violation on probe
        for j in range(anchor, -1, -1):
            self.touch_edge(edges[j])
        for j in range(anchor + 1, len(edges)):
            self.touch_edge(edges[j])

    def realized(self, lineage: tuple, e: int) -> bool:
        self.touch_edge(e)
        if not lineage:
            return self.lca.root_realization.has(e)
        tape = self.oracle.peek(Site.edge(e))
        return tape.uniform("copy", *lineage) < self.lca.g.probability(e)

    def walk_rank(self, lineage: tuple, level: int, w: Hyperwalk) -> tuple:
        self.ensure_walk(w)
        tape = self.oracle.peek(Site.edge(w.edges[0]))
        u = tape.uniform(
            "misrank", *lineage, level, len(w.edges), *w.edges, *w.indices
        )
        return (u,) + w.sort_key


class _Engine:
    """Memoized recursion shared by the cached and instrumented paths."""

    def __init__(self, lca: "BMatchingLca", tapes) -> None:
        self.lca = lca
        self.tapes = tapes
        self.guard = _Guard(lca.params.node_ceiling)
        self._match = {}
        self._mis = {}
        self._valid = {}
        self._ranks = {}

    def is_in_matching(self, lineage: tuple, e: int, level: int) -> bool:
        key = (lineage, e, level)
        if key in self._match:
            return self._match[key]
        self.guard.tick()
        self.tapes.touch_edge(e)
        if level == 0:
            self._match[key] = False
            return False
        result = self.is_in_matching(lineage, e, level - 1)
        for w in self.lca.walks.walks_through_edge(e):
            # only copy-0 entries at e can change this answer
            removed = (e, 0) in w.removals()
            added = (e, 0) in w.additions()
            if not (removed or added):
                continue
            if self.is_in_mis(lineage, w, level):
                if removed:
                    result = False
                else:
                    result = True
        self._match[key] = result
        return result

    def is_in_mis(self, lineage: tuple, w: Hyperwalk, level: int) -> bool:
        key = (lineage, w, level)
        if key in self._mis:
            return self._mis[key]
        self.tapes.ensure_walk(w)
        if not self.is_valid(lineage, w, level):
            # invalid walks are non-members and, with budgets >= 1, their
            # root queries can never truncate; skip the expansion
            self._mis[key] = False
            return False

        def rank(x: Hyperwalk) -> tuple:
            rkey = (lineage, level, x)
            if rkey not in self._ranks:
                self._ranks[rkey] = self.tapes.walk_rank(lineage, level, x)
            return self._ranks[rkey]

        def valid(x: Hyperwalk) -> bool:
            return self.is_valid(lineage, x, level)

        def neighbors(x: Hyperwalk) -> tuple:
            for y in self.lca.walks.neighbors(x):
                self.tapes.ensure_walk(y)
            return self.lca.walks.neighbors(x)

        ok, truncated, calls = _mis_root_query(
            w, rank, valid, neighbors, self.lca.params.mis_budget
        )
        self.guard.tick(calls)
        self._mis[key] = ok
        return ok

    def is_valid(self, lineage: tuple, w: Hyperwalk, level: int) -> bool:
        key = (lineage, w, level)
        if key in self._valid:
            return self._valid[key]
        self.guard.tick()
        self.tapes.ensure_walk(w)
        g = self.lca.g
        vseq = self.lca.walks.vertices_of(w)
        table = self.lca.table
        margin = self.lca.params.margin

        def sub_lineage(i: int) -> tuple:
            return lineage if i == 0 else lineage + (level, i)

        def member(i: int, e: int) -> bool:
            return self.is_in_matching(sub_lineage(i), e, level - 1)

        def realized(i: int, e: int) -> bool:
            return self.tapes.realized(sub_lineage(i), e)

        result = _augmenting_core(
            g,
            w,
            vseq,
            self.lca.params.alpha,
            member_fn=member,
            realized_fn=realized,
            unsat_fn=lambda v: table.unsaturated(v, level - 1, margin),
        )
        self._valid[key] = result
        return result


class BMatchingLca:
    """Edge-membership queries against the recursive matching.

    ``run`` (through :func:`stochmatch.lca.run_lca`) answers one root
    query with full probe instrumentation and fresh memos.  The
    ``is_in_matching`` / ``is_in_mis`` / ``is_valid`` methods answer
    from a cache shared across queries, which is sound because every
    answer is a pure function of the tapes.
    """

    site_kind = "edge"

    def __init__(
        self,
        g: Graph,
        params: BParams,
        root_realization: Realization,
        table: Optional[UnsaturationTable] = None,
        walks: Optional[WalkIndex] = None,
    ) -> None:
        if root_realization.graph is not g:
            raise ValueError("realization belongs to a different graph")
        self.g = g
        self.params = params
        self.root_realization = root_realization
        self.table = table if table is not None else UnsaturationTable.always_unsaturated(
            g.n, max(1, params.depth)
        )
        self.walks = walks if walks is not None else WalkIndex(
            g, params.walk_len, params.alpha, params.walk_ceiling
        )
        if self.walks.alpha != params.alpha or self.walks.walk_len != params.walk_len:
            raise ValueError("walk index does not match params")
        self._engines = {}

    def _engine(self, ctx: SeedContext) -> _Engine:
        if ctx not in self._engines:
            self._engines[ctx] = _Engine(self, _PureTapes(self, ctx))
        return self._engines[ctx]

    def run(self, oracle, root: Site) -> bool:
        engine = _Engine(self, _OracleTapes(self, oracle))
        out = engine.is_in_matching((), root.id, self.params.depth)
        oracle.annotate("nodes", engine.guard.nodes)
        return out

    def is_in_matching(self, ctx: SeedContext, e: int, level: Optional[int] = None) -> bool:
        level = self.params.depth if level is None else level
        return self._engine(ctx).is_in_matching((), e, level)

    def is_in_mis(self, ctx: SeedContext, w: Hyperwalk, level: int, lineage: tuple = ()) -> bool:
        return self._engine(ctx).is_in_mis(lineage, w, level)

    def is_valid(self, ctx: SeedContext, w: Hyperwalk, level: int, lineage: tuple = ()) -> bool:
        return self._engine(ctx).is_valid(lineage, w, level)

    def matching_via_queries(self, ctx: SeedContext) -> frozenset:
        """Edge set assembled from one membership query per edge."""
        return frozenset(
            e for e in range(self.g.m) if self.is_in_matching(ctx, e)
        )


def out_query_ceiling(g: Graph, walks: WalkIndex, params: BParams, level: int) -> int:
    """Deterministic upper bound on distinct probed edges per root query.

    Union-bounds the recursion: each matching node touches its edge,
    recurses one level down, and resolves one MIS query per containing
    walk, where every expansion probes the walk, its neighbors (for
    ranks), and the validity neighborhood across copies.
    """
    all_w = walks.all_walks()
    total = len(all_w)
    if total == 0:
        return 1
    wmax = max((len(walks.walks_through_edge(e)) for e in range(g.m)), default=0)
    nmax = max((len(walks.neighbors(w)) for w in all_w), default=0)
    budget = params.mis_budget if params.mis_budget is not None else total
    expansions = min(budget, total)
    L = params.walk_len
    dv = g.max_degree()
    bound = 1
    for _ in range(level):
        per_validity = (L + 1) * dv * (1 + (params.alpha + 1) * bound)
        per_expansion = L + nmax * L + per_validity
        bound = 1 + bound + wmax * expansions * per_expansion
    return bound
