"""Unit tests for the literal, listener and pragmatic speakers."""

import numpy as np
import pytest

from pragmatic_colors.application.dataset import DatasetView, partition_all
from pragmatic_colors.application.net import SpeakerNet
from pragmatic_colors.application.random_streams import Stream
from pragmatic_colors.application.speakers import (
    PragmaticConfig,
    PreparedQuery,
    distance,
    grid_search_lambda,
    listener_scores,
    literal_candidates,
    literal_select,
    log_softmax,
    pragmatic_select,
    prepare_queries,
    score_lambda,
)
from pragmatic_colors.domain.exceptions import EmptyGridError
from pragmatic_colors.domain.models import CandidateSet, DistanceMetric, Partition, Triple
from pragmatic_colors.infrastructure.embeddings import embed_modifier
from tests.conftest import constant_label, constant_net


def _scored(rng: np.random.Generator, n: int) -> CandidateSet:
    """Random candidates with random normalized S0 and L1R scores."""
    return CandidateSet(
        candidates=rng.uniform(0.0, 255.0, size=(n, 3)),
        ref_mean=rng.uniform(0.0, 255.0, size=3),
        s0_logprob=log_softmax(rng.normal(scale=5.0, size=n)),
        l1r_logprob=log_softmax(rng.normal(scale=5.0, size=n)),
    )


class TestLogSoftmax:
    """Tests for the stable normalizer."""

    def test_normalized_over_random_scores(self):
        """Probabilities sum to 1 for distances of any size."""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            scale = 10 ** rng.uniform(-3, 4)
            scores = rng.uniform(0, scale, size=rng.integers(1, 20))
            assert np.exp(log_softmax(scores)).sum() == pytest.approx(1.0, abs=1e-9)

    def test_huge_values_finite(self):
        """Large magnitudes do not overflow."""
        out = log_softmax(np.array([1e4, 0.0, -1e4]))
        assert np.all(np.isfinite(out[:2]))
        assert out[0] == pytest.approx(0.0)


class TestLiteralSpeaker:
    """Tests for S0 candidate generation."""

    def test_single_candidate_has_probability_one(self, tiny_table, random_net):
        """With n = 1 the only candidate gets probability 1."""
        cfg = PragmaticConfig(n=1, k=5)
        cs = literal_candidates(
            random_net,
            constant_label("grey", [100.0, 100.0, 100.0]),
            embed_modifier(tiny_table, "lighter"),
            cfg,
            np.random.default_rng(0),
        )
        assert len(cs) == 1
        assert np.exp(cs.s0_logprob[0]) == pytest.approx(1.0)

    def test_equidistant_candidates_are_uniform(self, tiny_table):
        """Candidates at equal distance from the reference split the mass."""
        cfg = PragmaticConfig(n=2, k=3)
        cs = literal_candidates(
            constant_net([180.0, 20.0, 60.0]),
            constant_label("grey", [100.0, 100.0, 100.0]),
            embed_modifier(tiny_table, "darker"),
            cfg,
            np.random.default_rng(1),
        )
        np.testing.assert_allclose(np.exp(cs.s0_logprob), [0.5, 0.5])

    def test_farther_candidate_preferred(self, tiny_table):
        """S0 puts more mass on candidates farther from the reference."""
        cs = CandidateSet(
            candidates=np.array([[110.0, 100.0, 100.0], [200.0, 100.0, 100.0]]),
            ref_mean=np.array([100.0, 100.0, 100.0]),
        )
        s0 = log_softmax(distance(DistanceMetric.DELTA_E_2000_LAB, cs.candidates, cs.ref_mean))
        assert s0[1] > s0[0]

    @pytest.mark.parametrize("metric", list(DistanceMetric))
    def test_each_metric_normalizes(self, tiny_table, random_net, metric):
        """Swapping the distance keeps S0 a distribution."""
        cfg = PragmaticConfig(n=8, k=4, metric=metric)
        samples = partition_all(
            {"x": constant_label("x", [30.0, 90.0, 200.0], count=20)}, (0.6, 0.2, 0.2), 0
        )
        cs = literal_candidates(
            random_net, samples["x"], embed_modifier(tiny_table, "more vibrant"), cfg,
            np.random.default_rng(2), Partition.TEST,
        )
        assert np.exp(cs.s0_logprob).sum() == pytest.approx(1.0)
        assert cs.candidates.shape == (8, 3)


class TestListener:
    """Tests for L1R reconstruction scoring."""

    def test_perfect_reconstruction_is_uniform(self, tiny_table, random_net):
        """A listener that always returns the reference cannot discriminate."""
        ref = np.array([120.0, 80.0, 40.0])
        cs = CandidateSet(
            candidates=np.random.default_rng(3).uniform(0, 255, size=(6, 3)), ref_mean=ref
        )
        out = listener_scores(
            constant_net(ref), cs, embed_modifier(tiny_table, "lighter"), PragmaticConfig()
        )
        np.testing.assert_allclose(np.exp(out.l1r_logprob), np.full(6, 1 / 6))
        assert out.reconstructions.shape == (6, 3)

    def test_permutation_equivariant(self, tiny_table, random_net):
        """Permuting candidates permutes their scores."""
        rng = np.random.default_rng(4)
        cands = rng.uniform(0, 255, size=(7, 3))
        ref = rng.uniform(0, 255, size=3)
        m = embed_modifier(tiny_table, "darker")
        perm = rng.permutation(7)
        a = listener_scores(random_net, CandidateSet(cands, ref), m, PragmaticConfig())
        b = listener_scores(random_net, CandidateSet(cands[perm], ref), m, PragmaticConfig())
        np.testing.assert_allclose(b.l1r_logprob, a.l1r_logprob[perm], atol=1e-10)


class TestPragmaticSelect:
    """Tests for the S2R combination."""

    def test_lambda_zero_is_literal(self):
        """lam = 0 reproduces the S0 choice."""
        rng = np.random.default_rng(5)
        for _ in range(1000):
            cs = _scored(rng, int(rng.integers(1, 12)))
            chosen, _ = pragmatic_select(cs, 0.0)
            np.testing.assert_array_equal(chosen, cs.candidates[np.argmax(cs.s0_logprob)])

    def test_lambda_one_is_listener(self):
        """lam = 1 reproduces the L1R choice."""
        rng = np.random.default_rng(6)
        for _ in range(1000):
            cs = _scored(rng, int(rng.integers(1, 12)))
            chosen, _ = pragmatic_select(cs, 1.0)
            np.testing.assert_array_equal(chosen, cs.candidates[np.argmax(cs.l1r_logprob)])

    def test_worked_example(self):
        """Half weight on each distribution picks the third candidate."""
        cs = CandidateSet(
            candidates=np.array([[10.0, 0.0, 0.0], [20.0, 0.0, 0.0], [30.0, 0.0, 0.0]]),
            ref_mean=np.zeros(3),
            s0_logprob=np.log([0.5, 0.3, 0.2]),
            l1r_logprob=np.log([0.2, 0.2, 0.6]),
        )
        chosen, out = pragmatic_select(cs, 0.5)
        np.testing.assert_array_equal(chosen, [30.0, 0.0, 0.0])
        expected = np.sqrt([0.1, 0.06, 0.12])
        np.testing.assert_allclose(np.exp(out.s2r_logprob), expected / expected.sum())

    def test_s2r_is_normalized(self):
        """The combined distribution sums to 1."""
        rng = np.random.default_rng(7)
        for lam in (0.0, 0.33, 0.8, 1.0):
            _, out = pragmatic_select(_scored(rng, 9), lam)
            assert np.exp(out.s2r_logprob).sum() == pytest.approx(1.0)

    def test_constant_shift_invariant(self):
        """Adding constants to either score leaves the choice unchanged."""
        rng = np.random.default_rng(8)
        for _ in range(100):
            cs = _scored(rng, 6)
            shifted = CandidateSet(
                cs.candidates, cs.ref_mean, cs.s0_logprob + 3.7, None, cs.l1r_logprob - 11.0
            )
            a, _ = pragmatic_select(cs, 0.4)
            b, _ = pragmatic_select(shifted, 0.4)
            np.testing.assert_array_equal(a, b)

    def test_ties_go_to_lowest_index(self):
        """Uniform scores choose candidate 0."""
        cs = CandidateSet(
            candidates=np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
            ref_mean=np.zeros(3),
            s0_logprob=np.log([0.5, 0.5]),
            l1r_logprob=np.log([0.5, 0.5]),
        )
        chosen, _ = pragmatic_select(cs, 0.5)
        np.testing.assert_array_equal(chosen, [1.0, 2.0, 3.0])

    def test_chosen_color_is_clamped(self):
        """Out-of-range candidates are clipped on output."""
        cs = CandidateSet(
            candidates=np.array([[300.0, -10.0, 100.0]]),
            ref_mean=np.zeros(3),
            s0_logprob=np.zeros(1),
            l1r_logprob=np.zeros(1),
        )
        chosen, out = pragmatic_select(cs, 0.5)
        np.testing.assert_array_equal(chosen, [255.0, 0.0, 100.0])
        np.testing.assert_array_equal(literal_select(cs), [255.0, 0.0, 100.0])
        assert out.candidates[0, 0] == 300.0

    def test_rejects_bad_lambda(self):
        """Lambda outside [0, 1] is an error."""
        with pytest.raises(ValueError):
            pragmatic_select(_scored(np.random.default_rng(0), 3), 1.5)

    def test_rejects_unscored_candidates(self):
        """Selection needs both score vectors."""
        cs = CandidateSet(np.zeros((2, 3)), np.zeros(3), s0_logprob=np.log([0.5, 0.5]))
        with pytest.raises(ValueError):
            pragmatic_select(cs, 0.5)


class TestPragmaticConfig:
    """Tests for inference parameter validation."""

    def test_defaults(self):
        cfg = PragmaticConfig()
        assert (cfg.lam, cfg.n, cfg.k) == (0.33, 10, 100)
        assert cfg.metric is DistanceMetric.DELTA_E_2000_LAB

    @pytest.mark.parametrize(
        "kwargs", [{"lam": -0.1}, {"lam": 1.01}, {"n": 0}, {"k": 0}, {"temperature": 0.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PragmaticConfig(**kwargs)


def _query(rng: np.random.Generator, n: int = 5) -> PreparedQuery:
    cs = _scored(rng, n)
    t = Triple("r", "lighter", "lighter r")
    return PreparedQuery(t, cs, cs.ref_mean, rng.uniform(0, 255, size=3))


class TestGridSearch:
    """Tests for lambda selection on validation queries."""

    def test_empty_grid(self):
        """An empty grid is rejected."""
        with pytest.raises(EmptyGridError):
            grid_search_lambda([_query(np.random.default_rng(0))], [])

    def test_no_queries(self):
        """A grid over no queries is rejected."""
        with pytest.raises(ValueError):
            grid_search_lambda([], [0.5])

    def test_single_point_grid(self):
        """A one-point grid returns that point."""
        result = grid_search_lambda([_query(np.random.default_rng(1))], [0.0])
        assert result.best == 0.0

    @pytest.mark.parametrize("objective", ["cosine", "delta_e"])
    def test_best_is_exhaustive_optimum(self, objective):
        """The selected lambda scores at least as well as every grid point."""
        rng = np.random.default_rng(2)
        queries = [_query(rng) for _ in range(12)]
        grid = [i / 20 for i in range(21)]
        result = grid_search_lambda(queries, grid, objective)
        values = [score_lambda(queries, lam, objective) for lam in grid]
        best_value = max(values) if objective == "cosine" else min(values)
        assert result.scores[result.best] == best_value
        assert result.best == grid[values.index(best_value)]
        assert list(result.scores) == sorted(grid)

    def test_ties_prefer_smaller_lambda(self):
        """When every lambda selects the same candidates the smallest wins."""
        cs = CandidateSet(
            candidates=np.array([[200.0, 10.0, 10.0], [20.0, 20.0, 20.0]]),
            ref_mean=np.array([100.0, 100.0, 100.0]),
            s0_logprob=np.log([0.9, 0.1]),
            l1r_logprob=np.log([0.8, 0.2]),
        )
        q = PreparedQuery(Triple("r", "redder", "redder r"), cs, cs.ref_mean, np.array([180.0, 40.0, 40.0]))
        result = grid_search_lambda([q], [0.9, 0.3, 0.6])
        assert result.best == 0.3


class TestPrepareQueries:
    """Tests for per-triple candidate preparation."""

    def test_per_index_streams(self, small_corpus):
        """Query i depends only on the seed and its index."""
        samples = partition_all(small_corpus.samples, (0.6, 0.2, 0.2), 0)
        speaker = SpeakerNet.initialize(4, 5, np.random.default_rng(0))
        listener = SpeakerNet.initialize(4, 5, np.random.default_rng(1))
        cfg = PragmaticConfig(n=4, k=3)
        short = DatasetView(small_corpus.triples[:3], samples, Partition.TEST)
        long = DatasetView(small_corpus.triples[:6], samples, Partition.TEST)
        a = prepare_queries(speaker, listener, short, small_corpus.embeddings, cfg, 9, Stream.TEST_QUERY)
        b = prepare_queries(speaker, listener, long, small_corpus.embeddings, cfg, 9, Stream.TEST_QUERY)
        for qa, qb in zip(a, b):
            np.testing.assert_array_equal(qa.candidates.candidates, qb.candidates.candidates)
            np.testing.assert_array_equal(qa.target_mean, qb.target_mean)
        assert len(b) == 6

    def test_seed_changes_candidates(self, small_corpus):
        """A different seed samples different references."""
        samples = partition_all(small_corpus.samples, (0.6, 0.2, 0.2), 0)
        net = SpeakerNet.initialize(4, 5, np.random.default_rng(0))
        view = DatasetView(small_corpus.triples[:1], samples, Partition.TRAIN)
        cfg = PragmaticConfig(n=8, k=3)
        a = prepare_queries(net, net, view, small_corpus.embeddings, cfg, 1, Stream.TEST_QUERY)
        b = prepare_queries(net, net, view, small_corpus.embeddings, cfg, 2, Stream.TEST_QUERY)
        assert not np.array_equal(a[0].candidates.candidates, b[0].candidates.candidates)
