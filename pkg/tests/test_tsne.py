from __future__ import annotations

import numpy as np
import pytest

from urbanfuse.metrics import kmeans, pairwise_euclidean
from urbanfuse.tsne import TsneConfig, conditional_probabilities, project


def _clustered_embedding(n_per=20, k=3, d=6, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 8, size=(k, d))
    return np.vstack([rng.normal(c, 0.4, size=(n_per, d)) for c in centers])


class TestConditionalProbabilities:
    def test_rows_sum_to_one_before_symmetrization(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 5))
        d2 = pairwise_euclidean(x) ** 2
        p, _ = conditional_probabilities(d2, perplexity=10.0)
        assert np.abs(p.sum(axis=1) - 1.0).max() < 1e-9
        assert (np.diag(p) == 0).all()

    def test_equidistant_simplex_gives_uniform_rows(self):
        # 12 vertices of a regular simplex: all pairwise distances equal
        n = 12
        x = np.eye(n) * 3.0
        d2 = pairwise_euclidean(x) ** 2
        p, _ = conditional_probabilities(d2, perplexity=3.0)
        off_diag = p[~np.eye(n, dtype=bool)]
        assert np.abs(off_diag - 1.0 / (n - 1)).max() < 1e-6

    def test_bisection_hits_target_perplexity(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(60, 4))
        d2 = pairwise_euclidean(x) ** 2
        _, err = conditional_probabilities(d2, perplexity=15.0)
        assert err.max() <= 1e-4


class TestProject:
    def test_kl_decreases_and_output_finite(self):
        emb = _clustered_embedding(seed=3)
        cfg = TsneConfig(perplexity=10.0, iterations=400, seed=0)
        out = project(emb, cfg)
        assert out.final_kl < out.initial_kl
        assert np.isfinite(out.coords).all()
        assert out.coords.shape == (emb.shape[0], 2)
        assert out.perplexity_error.max() <= 1e-4

    def test_determinism(self):
        emb = _clustered_embedding(seed=4)
        cfg = TsneConfig(perplexity=10.0, iterations=300, seed=5)
        a = project(emb, cfg)
        b = project(emb, cfg)
        assert (a.coords == b.coords).all()
        assert a.kl_trace == b.kl_trace

    def test_separated_clusters_stay_separated_in_2d(self):
        emb = _clustered_embedding(n_per=25, k=3, seed=6)
        truth = np.repeat(np.arange(3), 25)
        cfg = TsneConfig(perplexity=12.0, iterations=500, seed=7)
        out = project(emb, cfg)
        labels = kmeans(out.coords, 3, seed=0).labels
        from sklearn.metrics import adjusted_rand_score

        assert adjusted_rand_score(truth, labels) >= 0.95

    def test_perplexity_infeasible(self):
        emb = _clustered_embedding(n_per=10, k=3, seed=8)  # n = 30
        with pytest.raises(ValueError, match="infeasible"):
            project(emb, TsneConfig(perplexity=10.0, iterations=300))

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least 10"):
            project(np.zeros((5, 3)), TsneConfig(perplexity=2.0, iterations=300))

    def test_non_finite_rejected(self):
        emb = _clustered_embedding(seed=9)
        emb[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            project(emb, TsneConfig(perplexity=10.0, iterations=300))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="iterations"):
            TsneConfig(iterations=100)
