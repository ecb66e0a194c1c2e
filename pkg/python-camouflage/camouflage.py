"""Simple and cluster camouflage scores for candidate honeyfile names.

Simple camouflage is the cosine distance from the candidate's vector to the
mean direction of the directory's filename vectors. Cluster camouflage fits a
vMF mixture to the directory (order chosen by mean cosine silhouette over
k = 2..8) and takes the cosine distance to the nearest component mean.
Lower scores mean better hidden.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from embedding import embed_names
from errors import ConfigError, DegenerateDirectory, DegenerateMean, InvalidInput
from geometry import MeanDirectionResult, cosine_distance, cosine_distance_matrix, mean_direction
from model_selection import SelectionResult, select_k

logger = logging.getLogger(__name__)

MIN_CLUSTER_FILES = 5
K_MIN = 2
K_MAX = 8


@dataclass(frozen=True, eq=False)
class DirectoryContext:
    dir_path: str
    names: tuple
    vectors: np.ndarray
    provider_id: str

    def __post_init__(self):
        if len(self.names) == 0:
            raise InvalidInput(f"directory {self.dir_path!r} has no files to score against")
        if self.vectors.shape[0] != len(self.names):
            raise InvalidInput("one vector per filename required")
        if len(set(self.names)) != len(self.names):
            raise InvalidInput(f"duplicate filenames in {self.dir_path!r}")

    @classmethod
    def from_names(cls, dir_path, names, provider):
        """Embed ``names``; blank names (legal on POSIX, no n-grams) are left out."""
        blank = [name for name in names if not name.strip()]
        if blank:
            logger.warning(f"{dir_path!r}: ignoring {len(blank)} blank filename(s)")
        names = tuple(name for name in names if name.strip())
        return cls(dir_path=dir_path, names=names, vectors=embed_names(provider, names),
                   provider_id=provider.provider_id)

    def __len__(self):
        return len(self.names)

    def without(self, index):
        keep = [i for i in range(len(self.names)) if i != index]
        return DirectoryContext(dir_path=self.dir_path,
                                names=tuple(self.names[i] for i in keep),
                                vectors=self.vectors[keep], provider_id=self.provider_id)


@dataclass(frozen=True, eq=False)
class DirectoryModel:
    mean: MeanDirectionResult
    selection: Optional[SelectionResult]

    @property
    def fallback(self):
        return self.selection is None

    @property
    def k_star(self):
        return 1 if self.selection is None else self.selection.k_star

    @property
    def centroids(self):
        if self.selection is None:
            return self.mean.mu[np.newaxis, :]
        return self.selection.best.means


@dataclass(frozen=True)
class ClusterScore:
    score: float
    k_star: int
    nearest: int
    fallback: bool = False

    def __iter__(self):
        return iter((self.score, self.k_star, self.nearest))


@dataclass(frozen=True)
class CamouflageReport:
    dir_path: str
    candidate: str
    simple_score: float
    cluster_score: float
    k_star: int
    nearest_component: int
    normalized_simple: float
    normalized_cluster: float
    fallback: bool = False

    def to_dict(self):
        return asdict(self)

    def to_row(self):
        return {
            'dir_path': self.dir_path,
            'candidate': self.candidate,
            'simple': self.simple_score,
            'cluster': self.cluster_score,
            'k_star': self.k_star,
            'nearest': self.nearest_component,
            'norm_simple': self.normalized_simple,
            'norm_cluster': self.normalized_cluster,
        }


def _check_provider(ctx, provider):
    if provider.provider_id != ctx.provider_id:
        raise ConfigError(f"directory was embedded with {ctx.provider_id!r}, "
                          f"not {provider.provider_id!r}")


def _directory_mean(ctx):
    try:
        return mean_direction(ctx.vectors)
    except DegenerateMean as exc:
        raise DegenerateDirectory(f"{ctx.dir_path!r}: {exc}") from exc


def fit_directory(ctx, cfg, k_min=K_MIN, k_max=K_MAX, jobs=1, warn=True, warm=None):
    """Mean direction plus the selected vMF mixture of one directory.

    ``warm`` maps mixture orders to starting mixtures (see ``select_k``).
    """
    mean = _directory_mean(ctx)
    if len(ctx) < MIN_CLUSTER_FILES:
        log = logger.warning if warn else logger.debug
        log(f"{ctx.dir_path!r} has {len(ctx)} files (< {MIN_CLUSTER_FILES}); "
            f"cluster score falls back to simple score")
        return DirectoryModel(mean=mean, selection=None)
    selection = select_k(ctx.vectors, k_min, min(k_max, len(ctx) - 1), cfg, jobs=jobs, warm=warm)
    return DirectoryModel(mean=mean, selection=selection)


def score_vector(model, vector):
    """(simple score, ClusterScore) of one embedded candidate."""
    simple = cosine_distance(vector, model.mean.mu)
    if model.fallback:
        return simple, ClusterScore(simple, 1, 0, True)
    distances = [cosine_distance(vector, mu) for mu in model.centroids]
    nearest = int(np.argmin(distances))
    return simple, ClusterScore(distances[nearest], model.k_star, nearest, False)


def simple_score(g, ctx, provider):
    _check_provider(ctx, provider)
    return cosine_distance(provider.embed(g), _directory_mean(ctx).mu)


def cluster_score(g, ctx, provider, cfg):
    _check_provider(ctx, provider)
    _, clustered = score_vector(fit_directory(ctx, cfg), provider.embed(g))
    return clustered


def normalize_per_directory(scores):
    """Divide a directory's score batch by its maximum."""
    values = np.asarray(scores, dtype=np.float64)
    if values.size == 0:
        raise InvalidInput("cannot normalize an empty score batch")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise InvalidInput("camouflage scores must be finite and non-negative")
    top = values.max()
    if top == 0.0:
        logger.warning("all scores in the batch are zero; normalized scores are zero")
        return [0.0] * values.size
    return [float(v / top) for v in values]


def local_scores(ctx, cfg, k_min=K_MIN, k_max=K_MAX, model=None):
    """Leave-one-out (simple, ClusterScore) for every file of the directory.

    Each reduced directory is fitted by one EM run per order, started from
    the full directory's mixture of that order (``model``, fitted here when
    not given).
    """
    if len(ctx) < 2:
        raise InvalidInput(f"{ctx.dir_path!r}: leave-one-out needs at least two files")
    if model is None:
        model = fit_directory(ctx, cfg, k_min, k_max, warn=False)
    warm = None if model.fallback else {k: fit.mixture for k, fit in model.selection.fits.items()}
    results = []
    for i in range(len(ctx)):
        reduced = fit_directory(ctx.without(i), cfg, k_min, k_max, warn=False, warm=warm)
        results.append(score_vector(reduced, ctx.vectors[i]))
    return results


def rank_candidates(candidates, ctx, provider, cfg, with_locals=True, k_min=K_MIN, k_max=K_MAX):
    """Score every candidate and sort ascending by cluster score (stable).

    Normalization runs over the batch made of the directory's own files
    (leave-one-out) and all candidates, per metric.
    """
    if not candidates:
        raise InvalidInput("no candidate names to rank")
    _check_provider(ctx, provider)
    model = fit_directory(ctx, cfg, k_min, k_max)
    scored = [score_vector(model, provider.embed(g)) for g in candidates]

    batch_simple = [s for s, _ in scored]
    batch_cluster = [c.score for _, c in scored]
    if with_locals and len(ctx) >= 2:
        own = local_scores(ctx, cfg, k_min, k_max, model=model)
        batch_simple = [s for s, _ in own] + batch_simple
        batch_cluster = [c.score for _, c in own] + batch_cluster
    norm_simple = normalize_per_directory(batch_simple)[-len(candidates):]
    norm_cluster = normalize_per_directory(batch_cluster)[-len(candidates):]

    reports = [
        CamouflageReport(dir_path=ctx.dir_path, candidate=g, simple_score=simple,
                         cluster_score=clustered.score, k_star=clustered.k_star,
                         nearest_component=clustered.nearest,
                         normalized_simple=ns, normalized_cluster=nc,
                         fallback=clustered.fallback)
        for g, (simple, clustered), ns, nc in zip(candidates, scored, norm_simple, norm_cluster)
    ]
    logger.info(f"Ranked {len(reports)} candidates against {ctx.dir_path!r} (k*={model.k_star})")
    return sorted(reports, key=lambda r: r.cluster_score)


def centroid_table(ctx, model):
    """Per component, the directory's files ranked by distance to its mean.

    ``closest`` marks files for which that component is the nearest one.
    """
    distances = cosine_distance_matrix(ctx.vectors, model.centroids)
    nearest = np.argmin(distances, axis=1)
    table = []
    for j in range(distances.shape[1]):
        order = np.argsort(distances[:, j], kind='stable')
        table.append([{'name': ctx.names[i], 'distance': float(distances[i, j]),
                       'closest': bool(nearest[i] == j)} for i in order])
    return table
