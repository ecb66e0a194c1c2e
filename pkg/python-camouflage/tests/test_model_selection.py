import math
import os
import sys
import warnings

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import CollapseWarning, InvalidInput
from model_selection import COLLAPSED_MS, select_k, silhouette_scores
from vmf_mixture import FitConfig


def brute_force_silhouette(X, labels):
    """O(n^2) cosine silhouette, one point at a time."""
    n = len(X)
    s = []
    for i in range(n):
        def dist(j):
            cos = np.dot(X[i], X[j]) / (np.linalg.norm(X[i]) * np.linalg.norm(X[j]))
            return 1.0 - min(1.0, max(-1.0, cos))
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            s.append(0.0)
            continue
        a = sum(dist(j) for j in own) / len(own)
        b = min(
            sum(dist(j) for j in range(n) if labels[j] == c) / sum(1 for j in range(n) if labels[j] == c)
            for c in set(labels) if c != labels[i])
        denom = max(a, b)
        s.append(0.0 if denom < 1e-12 else (b - a) / denom)
    return np.array(s)


def circle(deg):
    return np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg))])


@pytest.mark.unit
class TestSilhouette:

    def test_hand_computed_circle(self):
        """Test four points on the circle at 0, 10, 90 and 100 degrees"""
        # Given
        X = np.vstack([circle(0), circle(10), circle(90), circle(100)])

        # When
        result = silhouette_scores(X, [0, 0, 1, 1])

        # Then
        a = 1 - math.cos(math.radians(10))
        b = (1 - math.cos(math.radians(90)) + 1 - math.cos(math.radians(100))) / 2
        assert result.per_point[0] == pytest.approx((b - a) / b, abs=1e-9)
        assert result.per_point[0] == pytest.approx(0.986022, abs=1e-6)
        assert result.k == 2

    def test_copies_score_one(self):
        """Test clusters of identical vectors score 1"""
        X = np.vstack([circle(0)] * 3 + [circle(60)] * 3)
        result = silhouette_scores(X, [0, 0, 0, 1, 1, 1])
        assert np.allclose(result.per_point, 1.0)
        assert result.mean == pytest.approx(1.0)

    def test_identical_points_guarded(self):
        """Test all-identical points give 0 instead of 0/0"""
        X = np.vstack([circle(30)] * 4)
        result = silhouette_scores(X, [0, 0, 1, 1])
        assert np.all(result.per_point == 0.0)
        assert result.mean == 0.0

    def test_singleton_cluster(self):
        """Test a singleton cluster member scores 0"""
        X = np.vstack([circle(0), circle(5), circle(90)])
        result = silhouette_scores(X, [0, 0, 1])
        assert result.per_point[2] == 0.0

    def test_single_cluster_rejected(self):
        """Test one cluster has no silhouette"""
        with pytest.raises(InvalidInput):
            silhouette_scores(np.vstack([circle(0), circle(1)]), [0, 0])

    def test_matches_brute_force(self, make_unit_vectors):
        """Test vectorized silhouette against the O(n^2) oracle on 100 instances"""
        rng = np.random.default_rng(17)
        for trial in range(100):
            # Given
            n = int(rng.integers(4, 65))
            k = int(rng.integers(2, 5))
            X = make_unit_vectors(n, int(rng.integers(2, 8)), seed=trial)
            labels = rng.integers(0, k, size=n)
            if len(set(labels)) < 2:
                labels[0], labels[1] = 0, 1

            # When
            result = silhouette_scores(X, labels)

            # Then
            expected = brute_force_silhouette(X, list(labels))
            assert np.allclose(result.per_point, expected, atol=1e-9)
            assert np.all(np.abs(result.per_point) <= 1.0)
            assert result.mean == pytest.approx(float(np.mean(result.per_point)), abs=1e-12)

    def test_relabeling_invariance(self, make_unit_vectors):
        """Test renaming clusters leaves the mean unchanged"""
        X = make_unit_vectors(20, 3, seed=2)
        labels = np.array([0, 1, 2, 3] * 5)
        relabeled = np.array([7, 3, 9, 1] * 5)
        assert silhouette_scores(X, labels).mean == pytest.approx(
            silhouette_scores(X, relabeled).mean, abs=1e-12)


class TestSelectK:

    def setup_method(self):
        """Setup test fixtures"""
        self.cfg = FitConfig(restarts=2, seed=42)

    @pytest.mark.unit
    def test_three_clusters(self, make_clusters):
        """Test three separated clusters select k*=3"""
        # Given
        X, _ = make_clusters(np.eye(6)[:3], 8, spread=0.03, seed=3)

        # When
        result = select_k(X, 2, 8, self.cfg)

        # Then
        assert result.k_star == 3
        assert result.best.k == 3
        assert set(result.ms_by_k) == set(range(2, 9))
        assert result.ms_by_k[3] == max(result.ms_by_k.values())

    @pytest.mark.unit
    def test_antipodal_clusters(self, make_clusters):
        """Test two antipodal clusters select k*=2"""
        X, _ = make_clusters([[1, 0, 0, 0], [-1, 0, 0, 0]], 10, spread=0.03, seed=5)
        result = select_k(X, 2, 8, self.cfg)
        assert result.k_star == 2
        assert all(result.ms_by_k[k] < result.ms_by_k[2] for k in range(3, 9))

    @pytest.mark.unit
    def test_single_candidate_range(self, make_unit_vectors):
        """Test k_min = k_max returns that order"""
        result = select_k(make_unit_vectors(10, 4, seed=1), 2, 2, self.cfg)
        assert result.k_star == 2
        assert list(result.ms_by_k) == [2]

    @pytest.mark.unit
    def test_caps_k_max_to_points(self, make_unit_vectors):
        """Test k_max is capped at n - 1"""
        result = select_k(make_unit_vectors(5, 3, seed=1), 2, 8, self.cfg)
        assert max(result.ms_by_k) == 4

    @pytest.mark.unit
    def test_invalid_requests(self, make_unit_vectors):
        """Test too few points and k_min below 2"""
        with pytest.raises(InvalidInput):
            select_k(make_unit_vectors(2, 3), 2, 8, self.cfg)
        with pytest.raises(InvalidInput):
            select_k(make_unit_vectors(10, 3), 1, 8, self.cfg)

    @pytest.mark.unit
    def test_all_orders_collapse(self):
        """Test identical points collapse every order and warn"""
        X = np.tile(np.array([1.0, 0.0, 0.0]), (6, 1))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            result = select_k(X, 2, 4, self.cfg)
        assert result.k_star == 2
        assert all(ms == COLLAPSED_MS for ms in result.ms_by_k.values())
        assert any(issubclass(w.category, CollapseWarning) for w in caught)

    @pytest.mark.unit
    def test_threads_do_not_change_result(self, make_clusters):
        """Test parallel order fitting gives the same selection"""
        X, _ = make_clusters(np.eye(5)[:3], 6, spread=0.05, seed=9)
        serial = select_k(X, 2, 6, self.cfg, jobs=1)
        threaded = select_k(X, 2, 6, self.cfg, jobs=4)
        assert serial.k_star == threaded.k_star
        assert serial.ms_by_k == threaded.ms_by_k
        assert np.array_equal(serial.assignments, threaded.assignments)

    @pytest.mark.unit
    def test_unpacks_as_tuple(self, make_clusters):
        """Test the selection unpacks to (k_star, best, assignments, ms_by_k)"""
        X, _ = make_clusters([[1, 0, 0, 0], [-1, 0, 0, 0]], 6, spread=0.03, seed=5)
        result = select_k(X, 2, 4, self.cfg)
        k_star, best, assignments, ms_by_k = result
        assert k_star == result.k_star and best is result.best
        assert np.array_equal(assignments, result.assignments)
        assert ms_by_k == result.ms_by_k

    @pytest.mark.unit
    def test_warm_start_reaches_same_order(self, make_clusters):
        """Test seeding each order from a previous fit keeps the selected order"""
        # Given
        X, _ = make_clusters(np.eye(6)[:3], 8, spread=0.03, seed=3)
        full = select_k(X, 2, 6, self.cfg)

        # When
        warm = select_k(X[1:], 2, 6, self.cfg,
                        warm={k: fit.mixture for k, fit in full.fits.items()})

        # Then
        assert warm.k_star == full.k_star == 3
        assert set(warm.ms_by_k) == set(range(2, 7))
