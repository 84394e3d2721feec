"""Non-adaptive matching sparsifier.

The sparsifier takes R independent realizations of the stochastic
graph, computes a maximum matching of each with the fixed deterministic
matcher, and returns the union H of those matchings.  H has maximum
degree at most R, and the per-edge match frequencies q_e split the
edges into crucial (q_e >= tau_plus) and non-crucial (q_e <= tau_minus)
bands via a lightest-bucket threshold search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .graph import ENUM_CAP, Graph, SeedContext, enumerate_realizations, sample_realization
from .matching import maximum_matching

Q_SAMPLES_DEFAULT = 10_000
THRESHOLD_EXPONENT_DEFAULT = 3


@dataclass(frozen=True)
class SparsifierParams:
    """Construction knobs: R realizations under a master seed."""

    R: int
    eps: float
    seed: int

    def __post_init__(self) -> None:
        if self.R < 1:
            raise ValueError("R must be at least 1")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")


def build_H(g: Graph, params: SparsifierParams):
    """Union of matchings over R seeded realizations.

    Returns ``(H, matchings)`` with H a frozenset of edge ids and
    ``matchings`` the R per-realization matchings in order.  Realization
    i is drawn from stream (seed, "realize", i), so sparsifiers with the
    same seed and growing R are nested prefixes of one another.
    """
    ctx = SeedContext(params.seed)
    matchings = []
    H = set()
    for i in range(params.R):
        real = sample_realization(g, ctx, i)
        M = maximum_matching(g, real.present)
        matchings.append(M)
        H.update(M)
    return frozenset(H), tuple(matchings)


@dataclass(frozen=True)
class QProfile:
    """Per-edge probabilities q_e of appearing in the matched realization.

    ``exact`` profiles come from full realization enumeration; sampled
    ones record the Monte Carlo trial count.  Threshold fields stay None
    until a band has been selected.
    """

    q: tuple
    exact: bool
    samples: int
    tau_minus: Optional[float] = None
    tau_plus: Optional[float] = None

    @property
    def total(self) -> float:
        """|q|, which equals E[mu(G_p)] for exact profiles."""
        return sum(self.q)

    def vertex_load(self, g: Graph, v: int, within: Optional[frozenset] = None) -> float:
        total = 0.0
        for e in g.incident(v):
            if within is None or e in within:
                total += self.q[e]
        return total

    def with_thresholds(self, tau_minus: float, tau_plus: float) -> "QProfile":
        if not tau_minus < tau_plus:
            raise ValueError("tau_minus must be below tau_plus")
        return replace(self, tau_minus=tau_minus, tau_plus=tau_plus)

    def _require_thresholds(self) -> None:
        if self.tau_minus is None or self.tau_plus is None:
            raise ValueError("thresholds not set on this profile")

    @property
    def crucial(self) -> frozenset:
        self._require_thresholds()
        return frozenset(e for e, qe in enumerate(self.q) if qe >= self.tau_plus)

    @property
    def noncrucial(self) -> frozenset:
        self._require_thresholds()
        return frozenset(e for e, qe in enumerate(self.q) if qe <= self.tau_minus)


def estimate_q(
    g: Graph,
    samples: int = Q_SAMPLES_DEFAULT,
    ctx: Optional[SeedContext] = None,
    exact: Optional[bool] = None,
    cap: int = ENUM_CAP,
) -> QProfile:
    """Per-edge match probabilities under the fixed matcher.

    Exact mode (auto-selected when the graph fits under the enumeration
    cap) sums over all realizations; otherwise ``samples`` seeded trials
    are drawn from ``ctx``.
    """
    if exact is None:
        exact = g.m <= cap
    q = [0.0] * g.m
    if exact:
        for real, pr in enumerate_realizations(g, cap):
            if pr <= 0.0:
                continue
            for e in maximum_matching(g, real.present):
                q[e] += pr
        return QProfile(tuple(q), True, 0)
    if ctx is None:
        raise ValueError("sampled q estimation needs a SeedContext")
    if samples < 1:
        raise ValueError("samples must be positive")
    for t in range(samples):
        real = sample_realization(g, ctx, t)
        for e in maximum_matching(g, real.present):
            q[e] += 1.0
    return QProfile(tuple(x / samples for x in q), False, samples)


def select_thresholds(
    q: QProfile,
    eps: float,
    p_min: float,
    exponent: int = THRESHOLD_EXPONENT_DEFAULT,
) -> tuple:
    """Lightest-bucket threshold pair (tau_minus, tau_plus).

    Buckets are (tau_i, tau_{i-1}] with tau_0 = (eps * p_min)^2 and
    tau_i = tau_{i-1}^exponent, for i = 1..ceil(1/eps).  The bucket of
    least q-mass is dropped, so at most a 1/ceil(1/eps) fraction of the
    total q-mass falls between the returned thresholds.  Deep taus may
    underflow to 0.0; the bucket logic tolerates that.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not 0.0 < p_min <= 1.0:
        raise ValueError("p_min must lie in (0, 1]")
    if exponent < 2:
        raise ValueError("exponent must be at least 2")
    buckets = max(1, math.ceil(1.0 / eps))
    taus = [(eps * p_min) ** 2]
    for _ in range(buckets):
        taus.append(taus[-1] ** exponent)
    masses = [0.0] * buckets
    for qe in q.q:
        if qe <= 0.0:
            continue
        for i in range(1, buckets + 1):
            if taus[i] < qe <= taus[i - 1]:
                masses[i - 1] += qe
                break
    best = min(range(buckets), key=lambda i: (masses[i], i))
    return taus[best + 1], taus[best]


def derive_R(tau_minus: float) -> int:
    """Smallest R with R >= 1/(2 tau_minus)."""
    if tau_minus <= 0.0:
        raise ValueError("tau_minus must be positive")
    return max(1, math.ceil(1.0 / (2.0 * tau_minus)))


def max_degree_of(g: Graph, edge_ids: Iterable[int]) -> int:
    deg = [0] * g.n
    for e in edge_ids:
        u, v = g.endpoints(e)
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)
