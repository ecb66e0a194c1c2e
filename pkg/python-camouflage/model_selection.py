"""Cosine silhouette and selection of the mixture order k*."""
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from sklearn.metrics import silhouette_samples

from errors import CollapseWarning, InvalidInput
from geometry import cosine_distance_matrix
from vmf_mixture import fit_mixture

logger = logging.getLogger(__name__)

COLLAPSED_MS = -1.0
# pairwise distances below this are exact zeros
ZERO_DISTANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SilhouetteResult:
    per_point: np.ndarray
    mean: float
    k: int


@dataclass(frozen=True, eq=False)
class SelectionResult:
    k_star: int
    best: object
    assignments: np.ndarray
    ms_by_k: dict
    fits: dict

    def __iter__(self):
        return iter((self.k_star, self.best, self.assignments, self.ms_by_k))


def silhouette_scores(points, assignments):
    X = np.asarray(points, dtype=np.float64)
    labels = np.asarray(assignments)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInput("silhouette of an empty point set")
    if labels.shape != (X.shape[0],):
        raise InvalidInput(f"{X.shape[0]} points but {labels.shape[0]} assignments")
    k = np.unique(labels).size
    if k < 2:
        raise InvalidInput("silhouette needs at least two distinct clusters")
    n = X.shape[0]
    if k == n:
        # every point is a singleton
        return SilhouetteResult(per_point=np.zeros(n), mean=0.0, k=k)

    distances = cosine_distance_matrix(X)
    # rounding noise between identical directions must read as 0/0, not as a ratio
    distances[distances < ZERO_DISTANCE] = 0.0
    np.fill_diagonal(distances, 0.0)
    s = np.clip(silhouette_samples(distances, labels, metric='precomputed'), -1.0, 1.0)
    return SilhouetteResult(per_point=s, mean=float(s.mean()), k=k)


def _score_order(X, k, cfg, init=None):
    fit = fit_mixture(X, replace(cfg, k=k), init=init)
    if np.unique(fit.assignments).size < 2:
        logger.debug(f"k={k}: assignments collapsed")
        return k, fit, COLLAPSED_MS
    return k, fit, silhouette_scores(X, fit.assignments).mean


def select_k(points, k_min, k_max, cfg, jobs=1, warm=None):
    """Fit k = k_min..k_max and keep the best mean silhouette (ties -> smaller k).

    ``warm`` maps an order to a mixture that seeds a single EM run for it
    instead of the k-means++ restarts.
    """
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0] if X.ndim == 2 else 0
    if n < 3:
        raise InvalidInput(f"model selection needs at least 3 points, got {n}")
    if k_min < 2:
        raise InvalidInput(f"k_min must be >= 2 for silhouette scoring, got {k_min}")
    k_max = min(k_max, n - 1)
    k_min = min(k_min, k_max)

    warm = warm or {}
    orders = range(k_min, k_max + 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(lambda k: _score_order(X, k, cfg, warm.get(k)), orders))
    else:
        scored = [_score_order(X, k, cfg, warm.get(k)) for k in orders]

    ms_by_k = {k: float(ms) for k, _, ms in scored}
    fits = {k: fit for k, fit, _ in scored}
    k_star = None
    for k, _, ms in scored:
        if ms == COLLAPSED_MS:
            continue
        if k_star is None or ms > ms_by_k[k_star]:
            k_star = k
    if k_star is None:
        k_star = k_min
        message = f"all mixture orders {k_min}..{k_max} collapsed; using k*={k_min}"
        logger.warning(message)
        warnings.warn(message, CollapseWarning)

    logger.debug(f"selected k*={k_star} from {ms_by_k}")
    best = fits[k_star]
    return SelectionResult(k_star=k_star, best=best.mixture, assignments=best.assignments,
                           ms_by_k=ms_by_k, fits=fits)
