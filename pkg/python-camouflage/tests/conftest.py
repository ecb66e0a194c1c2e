"""Shared fixtures: the example project directory and synthetic unit vectors."""
import json
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')


@pytest.fixture
def example_directory():
    """dir_path, the 12 project filenames and the two candidates."""
    with open(os.path.join(FIXTURES, 'example_directory.json')) as f:
        return json.load(f)


@pytest.fixture
def make_unit_vectors():
    """Factory for seeded (n, d) matrices of unit rows."""
    def _make(n, d, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, d))
        return X / np.linalg.norm(X, axis=1, keepdims=True)
    return _make


@pytest.fixture
def make_clusters():
    """Factory for points scattered around well-separated unit directions."""
    def _make(centers, per_cluster, spread=0.05, seed=0):
        rng = np.random.default_rng(seed)
        centers = np.asarray(centers, dtype=float)
        centers = centers / np.linalg.norm(centers, axis=1, keepdims=True)
        points, labels = [], []
        for j, mu in enumerate(centers):
            noisy = mu + spread * rng.standard_normal((per_cluster, centers.shape[1]))
            points.append(noisy / np.linalg.norm(noisy, axis=1, keepdims=True))
            labels.extend([j] * per_cluster)
        return np.vstack(points), np.array(labels)
    return _make
