"""Tests for min-partial, the MCP/ACP drivers, and the brute-force oracle."""

import itertools

import numpy as np
import pytest

from conftest import random_connected_graph, random_graph
from ugclust import (
    Clustering,
    ExactOracle,
    GuessSchedule,
    PoolEstimator,
    UncertainGraph,
    WorldSamplePool,
    acp,
    brute_force_optimum,
    complete_clustering,
    exact_pairwise_matrix,
    harmonic,
    mcp,
    min_partial,
    min_partial_d,
)


def two_cliques():
    return UncertainGraph.from_edge_list(
        [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0),
         ("x", "y", 1.0), ("y", "z", 1.0)]
    )


def path3(p=0.5):
    return UncertainGraph.from_edge_list([("u", "w", p), ("w", "v", p)])


class TestMinPartial:
    def test_two_components_full_coverage(self):
        g = two_cliques()
        c = min_partial(g, 2, 1.0, 1, 1.0, ExactOracle(g))
        assert c.is_full()
        assert np.all(c.estimates == 1.0)
        assert c.k == 2

    def test_k_equals_n(self):
        g = path3()
        c = min_partial(g, g.n, 1.0, 1, 1.0, ExactOracle(g))
        assert sorted(c.centers) == list(range(g.n))
        assert c.is_full()
        assert np.all(c.estimates == 1.0)

    def test_path_partial(self):
        # threshold 0.3: whichever endpoint is picked first covers its
        # neighbor (0.5) but not the far endpoint (0.25)
        g = path3()
        c = min_partial(g, 1, 0.3, 1, 0.3, ExactOracle(g))
        assert not c.is_full()
        assert c.coverage() == 2

    def test_coverage_soundness(self):
        # exact mode: every covered node's true probability >= admitting q
        rng = np.random.default_rng(41)
        for _ in range(40):
            g = random_graph(rng)
            q = float(rng.uniform(0.05, 0.9))
            k = int(rng.integers(1, g.n + 1))
            c = min_partial(g, k, q, 1, q, ExactOracle(g))
            P = exact_pairwise_matrix(g)
            np.fill_diagonal(P, 1.0)
            for u in range(g.n):
                if c.assignment[u] >= 0:
                    best = max(P[u, ctr] for ctr in c.centers)
                    assert best >= q - 1e-9

    def test_center_in_own_cluster(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            g = random_graph(rng)
            k = int(rng.integers(1, g.n + 1))
            c = min_partial(g, k, 0.5, 2, 0.6, ExactOracle(g))
            for i, ctr in enumerate(c.centers):
                assert c.assignment[ctr] == i
                assert c.estimates[ctr] == 1.0

    def test_lemma2_full_coverage(self):
        # q <= p_opt-min(k)^2 guarantees a full clustering
        rng = np.random.default_rng(43)
        for _ in range(60):
            g = random_connected_graph(rng, p_min=0.1)
            k = int(rng.integers(1, 4))
            opt, _ = brute_force_optimum(g, k, "min")
            q = opt * opt
            if q <= 0:
                continue
            c = min_partial(g, k, q, 1, q, ExactOracle(g))
            assert c.is_full()

    def test_validation(self):
        g = path3()
        oracle = ExactOracle(g)
        with pytest.raises(ValueError):
            min_partial(g, 0, 0.5, 1, 0.5, oracle)
        with pytest.raises(ValueError):
            min_partial(g, g.n + 1, 0.5, 1, 0.5, oracle)
        with pytest.raises(ValueError):
            min_partial(g, 1, 0.0, 1, 0.5, oracle)
        with pytest.raises(ValueError):
            min_partial(g, 1, 0.6, 1, 0.5, oracle)  # q > q_bar
        with pytest.raises(ValueError):
            min_partial(g, 1, 0.5, 0, 0.5, oracle)
        with pytest.raises(ValueError):
            min_partial(g, 1, 0.5, 1, 0.5, oracle, epsilon=1.0)

    def test_seeded_candidate_choice(self):
        g = two_cliques()
        rng = np.random.default_rng(0)
        c = min_partial(g, 2, 1.0, 2, 1.0, ExactOracle(g), select_rng=rng)
        assert c.is_full()


class TestMinPartialD:
    def test_full_depth_reduction(self):
        rng = np.random.default_rng(44)
        for _ in range(20):
            g = random_graph(rng, n_min=4)
            k = int(rng.integers(1, 4))
            oracle = ExactOracle(g)
            a = min_partial(g, k, 0.4, 1, 0.4, oracle)
            b = min_partial_d(g, k, 0.4, 1, 0.4, g.n - 1, g.n - 1, oracle)
            assert a.centers == b.centers
            assert np.array_equal(a.assignment, b.assignment)
            assert np.allclose(a.estimates, b.estimates, atol=1e-12)

    def test_certain_star(self):
        g = UncertainGraph.from_edge_list(
            [("s", "a", 1.0), ("s", "b", 1.0), ("s", "c", 1.0)]
        )
        c = min_partial_d(g, 1, 1.0, 1, 1.0, 1, 1, ExactOracle(g))
        assert c.is_full()
        assert c.centers == [0]

    def test_certain_path_d1_leaves_one_uncovered(self):
        g = UncertainGraph.from_edge_list([("a", "b", 1.0), ("b", "c", 1.0)])
        c = min_partial_d(g, 1, 0.5, 1, 0.5, 1, 1, ExactOracle(g))
        assert c.coverage() == 2

    def test_depth_validation(self):
        g = path3()
        oracle = ExactOracle(g)
        with pytest.raises(ValueError):
            min_partial_d(g, 1, 0.5, 1, 0.5, 1, 2, oracle)  # d' > d
        with pytest.raises(ValueError):
            min_partial_d(g, 1, 0.5, 1, 0.5, g.n, 1, oracle)
        with pytest.raises(ValueError):
            min_partial(g, 1, 0.5, 1, 0.5, oracle, select_depth=1)


class TestCompleteClustering:
    def test_idempotent_on_full(self):
        g = two_cliques()
        c = min_partial(g, 2, 1.0, 1, 1.0, ExactOracle(g))
        assert complete_clustering(c, ExactOracle(g)) is c

    def test_assigns_to_adjacent_center(self):
        g = path3(0.5)
        oracle = ExactOracle(g)
        c = min_partial(g, 1, 0.3, 1, 0.3, oracle)
        full = complete_clustering(c, oracle)
        assert full.is_full()
        # the far endpoint joins the only cluster with its true estimate
        assert full.estimates[full.assignment >= 0].min() == pytest.approx(0.25)

    def test_zero_probability_fallback(self):
        g = UncertainGraph.from_edge_list([("a", "b", 1.0), ("x", "y", 1.0)])
        oracle = ExactOracle(g)
        partial = Clustering(
            k=1, centers=[0],
            assignment=np.array([0, 0, -1, -1]),
            estimates=np.array([1.0, 1.0, 0.0, 0.0]),
        )
        full = complete_clustering(partial, oracle)
        assert full.is_full()
        assert full.assignment[2] == 0 and full.estimates[2] == 0.0


class TestGuessSchedule:
    def test_doubling_sequence(self):
        s = GuessSchedule(gamma=0.1, p_low=1e-4)
        qs = list(s.guesses())
        assert qs[0] == 1.0
        assert qs[1] == pytest.approx(0.9)
        assert qs[2] == pytest.approx(0.8)
        assert qs[3] == pytest.approx(0.6)
        assert qs[4] == pytest.approx(0.2)
        assert qs[-1] == 1e-4
        assert all(b < a for a, b in zip(qs, qs[1:]))

    def test_geometric_sequence(self):
        s = GuessSchedule(gamma=0.5, p_low=0.05, mode="geometric")
        qs = list(s.guesses())
        assert qs[0] == 1.0
        assert qs[1] == pytest.approx(1 / 1.5)
        assert qs[-1] == 0.05
        assert all(b < a for a, b in zip(qs, qs[1:]))

    def test_done(self):
        s = GuessSchedule(gamma=0.1)
        assert s.done(1.0, 1.0)
        assert s.done(0.95, 1.0)
        assert not s.done(0.9, 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            GuessSchedule(gamma=0.0)
        with pytest.raises(ValueError):
            GuessSchedule(p_low=0.0)
        with pytest.raises(ValueError):
            GuessSchedule(mode="bogus")


class TestMCP:
    def test_deterministic_components(self):
        g = two_cliques()
        c, rep = mcp(g, 2, estimator_mode="exact")
        assert rep.outcome == "ok"
        assert rep.min_prob == 1.0
        assert rep.iterations == 1  # q=1 succeeds immediately

    def test_impossible_instance(self):
        g = UncertainGraph.from_edge_list(
            [("a", "b", 1.0), ("c", "d", 1.0), ("e", "f", 1.0)]
        )
        c, rep = mcp(g, 2, estimator_mode="exact")
        assert c is None
        assert rep.outcome == "no-clustering"

    def test_path_exact_bound(self):
        g = path3()
        c, rep = mcp(g, 1, estimator_mode="exact")
        opt, _ = brute_force_optimum(g, 1, "min")
        assert opt == pytest.approx(0.5)
        assert rep.min_prob >= opt * opt / 1.1 - 1e-12

    def test_theorem3_exact_corpus(self):
        rng = np.random.default_rng(51)
        for _ in range(30):
            g = random_connected_graph(rng, p_min=0.2)
            k = int(rng.integers(1, 4))
            c, rep = mcp(g, k, estimator_mode="exact", p_low=1e-9)
            opt, _ = brute_force_optimum(g, k, "min")
            assert c is not None
            assert rep.min_prob >= opt * opt / 1.1 - 1e-12

    def test_mc_determinism(self):
        g = random_connected_graph(np.random.default_rng(52), p_min=0.3)
        c1, r1 = mcp(g, 2, seed=99)
        c2, r2 = mcp(g, 2, seed=99)
        assert c1.centers == c2.centers
        assert np.array_equal(c1.assignment, c2.assignment)
        assert np.allclose(c1.estimates, c2.estimates)
        assert r1.to_dict() == r2.to_dict()

    def test_worker_count_independent(self):
        g = random_connected_graph(np.random.default_rng(53), n_min=6, p_min=0.3)
        c1, r1 = mcp(g, 2, seed=5, workers=1, samples_init=100)
        c4, r4 = mcp(g, 2, seed=5, workers=4, samples_init=100)
        assert c1.centers == c4.centers
        assert r1.to_dict() == r4.to_dict()

    def test_theory_sampling_mode(self):
        g = two_cliques()
        c, rep = mcp(g, 2, sample_mode="theory", p_low=0.01)
        assert rep.outcome == "ok"
        assert rep.min_prob == 1.0

    def test_depth_reduction(self):
        rng = np.random.default_rng(54)
        for _ in range(10):
            g = random_connected_graph(rng, p_min=0.3)
            a, ra = mcp(g, 2, seed=7)
            b, rb = mcp(g, 2, seed=7, depth=g.n - 1)
            assert a.centers == b.centers
            assert np.array_equal(a.assignment, b.assignment)
            assert np.allclose(a.estimates, b.estimates, atol=1e-12)
            assert ra.min_prob == rb.min_prob

    def test_external_estimator(self):
        g = two_cliques()
        pool = WorldSamplePool(g, 123)
        c, rep = mcp(g, 2, estimator=PoolEstimator(pool))
        assert rep.min_prob == 1.0
        assert pool.r > 0


class TestACP:
    def test_all_certain(self):
        g = two_cliques()
        c, rep = acp(g, 2, estimator_mode="exact")
        assert rep.avg_prob == 1.0

    def test_k_equals_n(self):
        g = path3()
        c, rep = acp(g, g.n, estimator_mode="exact")
        assert rep.avg_prob == 1.0

    def test_invariant_avg_at_least_phi(self):
        rng = np.random.default_rng(61)
        for _ in range(30):
            g = random_connected_graph(rng, p_min=0.1)
            k = int(rng.integers(1, 4))
            c, rep = acp(g, k, estimator_mode="exact")
            assert rep.avg_prob >= rep.phi - 1e-12

    def test_theorem4_exact_corpus(self):
        rng = np.random.default_rng(62)
        for _ in range(30):
            g = random_connected_graph(rng, p_min=0.2)
            k = int(rng.integers(1, 4))
            for mode in ("practical", "theory"):
                c, rep = acp(g, k, estimator_mode="exact", mode=mode, p_low=1e-9)
                opt, _ = brute_force_optimum(g, k, "avg")
                bound = (opt / (1.1 * harmonic(g.n))) ** 3
                assert rep.avg_prob >= bound - 1e-12

    def test_mc_determinism(self):
        g = random_connected_graph(np.random.default_rng(63), p_min=0.3)
        c1, r1 = acp(g, 2, seed=11)
        c2, r2 = acp(g, 2, seed=11)
        assert c1.centers == c2.centers
        assert r1.to_dict() == r2.to_dict()

    def test_depth_reduction(self):
        rng = np.random.default_rng(64)
        for _ in range(10):
            g = random_connected_graph(rng, p_min=0.3)
            a, ra = acp(g, 2, seed=13)
            b, rb = acp(g, 2, seed=13, depth=g.n - 1)
            assert a.centers == b.centers
            assert np.array_equal(a.assignment, b.assignment)
            assert ra.avg_prob == rb.avg_prob

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            acp(path3(), 1, mode="bogus")


class TestLemma4:
    @staticmethod
    def exhaustive_t_q(graph, k, q):
        """Fewest uncovered nodes over all k-center partial clusterings
        with per-node probability >= q."""
        P = exact_pairwise_matrix(graph)
        np.fill_diagonal(P, 1.0)
        best = graph.n
        for centers in itertools.combinations(range(graph.n), k):
            covered = np.max(P[list(centers), :], axis=0) >= q - 1e-12
            best = min(best, int(np.sum(~covered)))
        return best

    def test_outlier_bound(self):
        rng = np.random.default_rng(71)
        for _ in range(25):
            g = random_graph(rng, n_max=7)
            k = int(rng.integers(1, 4))
            q = float(rng.uniform(0.2, 0.9))
            c = min_partial(g, k, q**3, g.n, q, ExactOracle(g))
            uncovered = g.n - c.coverage()
            assert uncovered <= self.exhaustive_t_q(g, k, q)


class TestBruteForce:
    def test_k_equals_n(self):
        g = path3()
        for obj in ("min", "avg"):
            val, c = brute_force_optimum(g, g.n, obj)
            assert val == 1.0

    def test_path_min(self):
        val, c = brute_force_optimum(path3(), 1, "min")
        assert val == pytest.approx(0.5)
        assert c.centers == [1]  # the middle node

    def test_single_edge_avg(self):
        g = UncertainGraph.from_edge_list([("a", "b", 0.3)])
        val, c = brute_force_optimum(g, 1, "avg")
        assert val == pytest.approx(0.65)

    def test_validation(self):
        g = path3()
        with pytest.raises(ValueError):
            brute_force_optimum(g, 1, "bogus")
        with pytest.raises(ValueError):
            brute_force_optimum(g, 0, "min")
        big = UncertainGraph.from_edge_list(
            [(str(i), str(i + 1), 0.5) for i in range(11)]
        )
        with pytest.raises(ValueError, match="brute-force"):
            brute_force_optimum(big, 1, "min")
