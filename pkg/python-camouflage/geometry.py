"""Cosine / spherical primitives shared by the scoring and clustering code."""
from dataclasses import dataclass

import numpy as np

from errors import ConfigError, DegenerateMean, DegenerateVector, InvalidInput

NORM_EPS = 1e-12
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class MeanDirectionResult:
    mu: np.ndarray
    r_bar: float
    n: int


def _as_vector(x):
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidInput(f"expected a 1-D vector, got shape {v.shape}")
    return v


def l2_normalize(x):
    v = _as_vector(x)
    norm = np.linalg.norm(v)
    if not norm > NORM_EPS:
        raise DegenerateVector(f"cannot normalize vector with norm {norm:.3g}")
    return v / norm


def is_unit(x, tol=UNIT_TOL):
    return abs(np.linalg.norm(x) - 1.0) <= tol


def cosine_distance(x, y):
    """1 - cos(x, y), clamped to [0, 2]."""
    x = _as_vector(x)
    y = _as_vector(y)
    if x.shape != y.shape:
        raise ConfigError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if not (nx > 0 and ny > 0):
        raise DegenerateVector("cosine distance of a zero-norm vector")
    cos = float(np.dot(x, y)) / (nx * ny)
    cos = min(1.0, max(-1.0, cos))
    return min(2.0, max(0.0, 1.0 - cos))


def cosine_distance_matrix(X, Y=None):
    """Pairwise cosine distances between the rows of X and Y (default X)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ConfigError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    if np.any(nx <= 0) or np.any(ny <= 0):
        raise DegenerateVector("cosine distance of a zero-norm vector")
    cos = (X @ Y.T) / np.outer(nx, ny)
    return np.clip(1.0 - np.clip(cos, -1.0, 1.0), 0.0, 2.0)


def mean_direction(vectors):
    """Mean direction and mean resultant length of unit vectors."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.shape[0] == 0:
        raise InvalidInput("mean direction of an empty set")
    norms = np.linalg.norm(X, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise InvalidInput("mean direction requires unit-normalized vectors")

    resultant = X.sum(axis=0)
    length = np.linalg.norm(resultant)
    if length < NORM_EPS:
        raise DegenerateMean("resultant vector vanishes (balanced antipodal inputs)")
    n = X.shape[0]
    r_bar = min(1.0, length / n)
    return MeanDirectionResult(mu=resultant / length, r_bar=float(r_bar), n=n)
