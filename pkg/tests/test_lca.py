import math

import pytest

from oracles import find_rank_ctx, path_graph
from stochmatch.graph import Graph, SeedContext, gnp_graph
from stochmatch.lca import (
    NaturalityViolation,
    Site,
    check_correlated_bound,
    estimate_delta,
    gather_ledger,
    ledger_to_csv,
    run_lca,
    site_tape,
    sweep_ledger,
)
from stochmatch.mis import TruncatedGreedyMis


class SelfOnlyLca:
    """Answers from the root's own tape; probes nothing else."""

    site_kind = "vertex"

    def run(self, oracle, root):
        tape = oracle.probe(root)
        return tape.uniform("ans") < 0.5


class HubLca:
    """Every root also probes vertex 0; needs a star to stay natural."""

    site_kind = "vertex"

    def run(self, oracle, root):
        oracle.probe(root)
        if root.id != 0:
            oracle.probe(Site.vertex(0))
        return True


class RogueLca:
    """Probes a site not adjacent to anything probed."""

    site_kind = "vertex"

    def run(self, oracle, root):
        oracle.probe(root)
        oracle.probe(Site.vertex(root.id + 2))
        return True


def star(n):
    return Graph.build(n, [(0, i, 0.5) for i in range(1, n)])


class TestRunLca:
    def test_self_only_trace(self):
        g = star(5)
        out, trace = run_lca(SelfOnlyLca(), g, SeedContext(0), Site.vertex(2))
        assert trace.out_queries == frozenset({Site.vertex(2)})
        assert isinstance(out, bool)

    def test_isolated_gmis_member(self):
        g = Graph.build(1, [])
        out, trace = run_lca(TruncatedGreedyMis(), g, SeedContext(3), Site.vertex(0))
        assert out.member is True
        assert trace.out_queries == frozenset({Site.vertex(0)})

    def test_purity_and_interleaving(self):
        g = gnp_graph(10, 0.3, 0.5, SeedContext(4).child("gen"))
        ctx = SeedContext(17)
        lca = TruncatedGreedyMis()
        first = [run_lca(lca, g, ctx, Site.vertex(v)) for v in range(g.n)]
        # interleave repeats with fresh queries in a different order
        for v in reversed(range(g.n)):
            out, trace = run_lca(lca, g, ctx, Site.vertex(v))
            assert (out, trace) == first[v]
            again, trace2 = run_lca(lca, g, ctx, Site.vertex((v * 3) % g.n))
            assert (again, trace2) == first[(v * 3) % g.n]

    def test_naturality_enforced(self):
        g = path_graph(3)
        with pytest.raises(NaturalityViolation):
            run_lca(RogueLca(), g, SeedContext(0), Site.vertex(0))

    def test_trace_prefixes_connected(self):
        # independent re-check of the naturality contract on real traces
        g = gnp_graph(12, 0.3, 0.5, SeedContext(6).child("gen"))
        ctx = SeedContext(23)
        for v in range(g.n):
            _, trace = run_lca(TruncatedGreedyMis(), g, ctx, Site.vertex(v))
            seen = set()
            for site in trace.probed:
                ok = not seen or any(
                    w in seen for w in g.neighbors(site.id)
                ) or site.id in seen
                assert ok, f"disconnected probe {site} after {seen}"
                seen.add(site.id)

    def test_site_tape_is_canonical(self):
        ctx = SeedContext(9)
        a = site_tape(ctx, Site.vertex(4)).uniform("rank")
        b = site_tape(ctx, Site.vertex(4)).uniform("rank")
        assert a == b


class TestLedger:
    def test_self_only_all_ones(self):
        g = star(6)
        ledger = sweep_ledger(SelfOnlyLca(), g, SeedContext(0))
        for v in range(g.n):
            s = Site.vertex(v)
            assert ledger.mean_qplus(s) == 1.0
            assert ledger.mean_qminus(s) == 1.0
            assert ledger.mean_psi(s) == 1.0

    def test_hub_ledger(self):
        n = 7
        g = star(n)
        ledger = sweep_ledger(HubLca(), g, SeedContext(0))
        assert ledger.mean_qminus(Site.vertex(0)) == n
        assert all(ledger.mean_psi(Site.vertex(v)) == n for v in range(n))
        report = check_correlated_bound(
            gather_ledger(HubLca(), g, SeedContext(0), trials=3)
        )
        # psi = n against q+ * q- = 2n: inside the bound with slack 1
        assert report.lhs == n and report.rhs == 2 * n
        assert report.ok

    def test_gmis_path_trace_example(self):
        g = path_graph(2)  # vertices 0-1-2
        ctx = find_rank_ctx(
            g, lambda r: r[1] < r[0] and r[1] < r[2]
        )
        lca = TruncatedGreedyMis()
        outs = {}
        for v in range(3):
            out, trace = run_lca(lca, g, ctx, Site.vertex(v))
            outs[v] = (out.member, trace.out_queries)
        assert outs[0] == (False, frozenset({Site.vertex(0), Site.vertex(1)}))
        assert outs[2] == (False, frozenset({Site.vertex(2), Site.vertex(1)}))
        assert outs[1][0] is True
        # correlated set of 0 contains 2: their out-query sets meet at 1
        assert outs[0][1] & outs[2][1]
        ledger = sweep_ledger(lca, g, ctx)
        assert ledger.mean_psi(Site.vertex(0)) == 3.0

    def test_identity_and_pointwise(self):
        g = gnp_graph(12, 0.3, 0.5, SeedContext(1).child("gen"))
        for t in range(6):
            ledger = sweep_ledger(TruncatedGreedyMis(), g, SeedContext(t))
            row_plus = ledger.qplus_rows[0]
            row_minus = ledger.qminus_rows[0]
            row_psi = ledger.psi_rows[0]
            assert sum(row_plus.values()) == sum(row_minus.values())
            for s in ledger.sites:
                assert row_psi[s] >= row_plus[s]

    def test_merge_requires_same_sites(self):
        g = star(4)
        a = sweep_ledger(SelfOnlyLca(), g, SeedContext(0))
        b = sweep_ledger(SelfOnlyLca(), star(5), SeedContext(0))
        with pytest.raises(ValueError):
            a.merge(b)

    def test_csv_export(self):
        g = star(4)
        text = ledger_to_csv(sweep_ledger(SelfOnlyLca(), g, SeedContext(0)))
        lines = text.strip().split("\n")
        assert lines[0] == "kind,site,mean_qplus,mean_qminus,mean_psi"
        assert len(lines) == 1 + g.n
        assert lines[1].startswith("vertex,0,1.000000")

    def test_correlated_bound_on_random_graphs(self):
        for seed in (0, 1):
            g = gnp_graph(14, 0.25, 0.5, SeedContext(seed).child("gen"))
            ledger = gather_ledger(
                TruncatedGreedyMis(), g, SeedContext(seed).child("sw"), trials=30
            )
            assert check_correlated_bound(ledger).ok


class TestDelta:
    def test_disjoint_components_zero(self):
        g = Graph.build(2, [])
        est = estimate_delta(
            TruncatedGreedyMis(),
            g,
            [(Site.vertex(0), Site.vertex(1))],
            trials=40,
            ctx=SeedContext(0),
        )
        assert est[(Site.vertex(0), Site.vertex(1))].delta == 0.0

    def test_same_root_one(self):
        g = star(3)
        pair = (Site.vertex(1), Site.vertex(1))
        est = estimate_delta(TruncatedGreedyMis(), g, [pair], trials=20, ctx=SeedContext(0))
        assert est[pair].delta == 1.0

    def test_adjacent_gmis_one(self):
        g = Graph.build(2, [(0, 1, 0.5)])
        pair = (Site.vertex(0), Site.vertex(1))
        est = estimate_delta(TruncatedGreedyMis(), g, [pair], trials=50, ctx=SeedContext(1))
        assert est[pair].delta == 1.0

    def test_near_independence(self):
        # outputs of roots with small delta have covariance of the same order
        g = gnp_graph(20, 0.15, 0.5, SeedContext(2).child("gen"))
        lca = TruncatedGreedyMis()
        trials = 400
        delta0 = 0.1
        ctx = SeedContext(5).child("ni")
        pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
        outputs = []
        for t in range(trials):
            sub = ctx.child("trial", t)
            outs = {}
            sets = {}
            for v in range(g.n):
                out, trace = run_lca(lca, g, sub, Site.vertex(v))
                outs[v] = 1.0 if out.member else 0.0
                sets[v] = trace.out_queries
            outputs.append((outs, sets))
        checked = 0
        for u, v in pairs:
            hits = sum(1 for _, sets in outputs if sets[u] & sets[v])
            if hits / trials > delta0:
                continue
            checked += 1
            a = [outs[u] for outs, _ in outputs]
            b = [outs[v] for outs, _ in outputs]
            mean_a = sum(a) / trials
            mean_b = sum(b) / trials
            prods = [(x - mean_a) * (y - mean_b) for x, y in zip(a, b)]
            cov = sum(prods) / trials
            var = sum((p - cov) ** 2 for p in prods) / (trials - 1)
            sigma = math.sqrt(var / trials)
            assert abs(cov) <= delta0 + 4 * sigma
        assert checked > 0
