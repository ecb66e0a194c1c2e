"""Statistics for the camouflage experiments.

Two-sample Kolmogorov-Smirnov test, discrete power-law fit of directory
sizes, fixed-width histogram rows and the end-to-end experiment runner that
compares leave-one-out scores of real files against decoys sampled from
other repositories.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
import psutil
from scipy.stats import kstwobign

from camouflage import (K_MAX, K_MIN, DirectoryContext, fit_directory, local_scores,
                        normalize_per_directory, score_vector)
from corpus import MIN_DIRECTORY_ITEMS, enumerate_directories, sample_cross_repo
from errors import DegenerateDataError, DegenerateDistribution, InvalidInput

logger = logging.getLogger(__name__)

METRICS = ('simple', 'cluster')
# inclusive item-count ranges
STRATA = {'small': (5, 10), 'medium': (11, 50), 'large': (51, 500)}
MIN_POWER_LAW_TAIL = 10
DEFAULT_BINS = 20
MASK64 = (1 << 64) - 1


class KsResult(NamedTuple):
    statistic: float
    p_value: float
    n1: int
    n2: int


class PowerLawFit(NamedTuple):
    alpha: float
    x_min: int
    ks_distance: float
    n_tail: int


class HistogramBin(NamedTuple):
    low: float
    high: float
    count: int


def _finite_sample(values, name):
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if x.size == 0:
        raise InvalidInput(f"sample {name} is empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"sample {name} contains non-finite values")
    return x


def ks_two_sample(a, b):
    """Two-sample KS statistic with the asymptotic Kolmogorov p-value."""
    a = _finite_sample(a, 'a')
    b = _finite_sample(b, 'b')
    n1, n2 = a.size, b.size

    support = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, support, side='right') / n1
    cdf_b = np.searchsorted(b, support, side='right') / n2
    statistic = float(np.max(np.abs(cdf_a - cdf_b)))

    en = math.sqrt(n1 * n2 / (n1 + n2))
    p_value = float(kstwobign.sf((en + 0.12 + 0.11 / en) * statistic))
    return KsResult(statistic=min(1.0, statistic), p_value=min(1.0, max(0.0, p_value)),
                    n1=n1, n2=n2)


def power_law_fit(counts):
    """Fit alpha and x_min of a discrete power law to positive integer counts.

    Every distinct value with at least ``MIN_POWER_LAW_TAIL`` observations at
    or above it is tried as x_min; the exponent is the continuity-corrected
    MLE and the winner minimizes the KS distance between the tail and the
    fitted law.
    """
    x = np.sort(np.asarray(counts, dtype=np.float64).ravel())
    if x.size < MIN_POWER_LAW_TAIL:
        raise InvalidInput(f"power-law fit needs at least {MIN_POWER_LAW_TAIL} values, "
                           f"got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x < 1):
        raise InvalidInput("power-law fit needs counts >= 1")
    if x[0] == x[-1]:
        raise DegenerateDistribution(f"all {x.size} counts equal {x[0]:g}")

    n = x.size
    logs = np.log(x)
    # tail_log_sum[i] = sum(log x[i:])
    tail_log_sum = np.concatenate([np.cumsum(logs[::-1])[::-1], [0.0]])
    distinct, first = np.unique(x, return_index=True)

    best = None
    for x_min, start in zip(distinct, first):
        n_tail = n - start
        if n_tail < MIN_POWER_LAW_TAIL:
            break
        shift = x_min - 0.5
        denom = tail_log_sum[start] - n_tail * math.log(shift)
        if denom <= 0.0:
            continue
        alpha = 1.0 + n_tail / denom

        tail = x[start:]
        values, starts = np.unique(tail, return_index=True)
        # right-continuous empirical CDF at every distinct tail value
        empirical = np.append(starts[1:], tail.size) / tail.size
        model = 1.0 - ((values + 0.5) / shift) ** (1.0 - alpha)
        distance = float(np.max(np.abs(empirical - model)))
        if best is None or distance < best.ks_distance:
            best = PowerLawFit(alpha=float(alpha), x_min=int(x_min),
                               ks_distance=distance, n_tail=int(n_tail))

    if best is None:
        raise DegenerateDistribution("no x_min candidate leaves a usable tail")
    logger.debug(f"power law: alpha={best.alpha:.3f} x_min={best.x_min} "
                 f"D={best.ks_distance:.4f} over {best.n_tail} values")
    return best


def log_histogram(counts, bins=DEFAULT_BINS):
    """Fixed-width bins over [min, max]; the maximum falls in the last bin."""
    values = np.asarray(counts, dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidInput("histogram of an empty sample")
    if bins < 1:
        raise InvalidInput(f"bins must be >= 1, got {bins}")
    if np.any(values < 1) or not np.all(np.isfinite(values)):
        raise InvalidInput("histogram counts must be >= 1")
    freq, edges = np.histogram(values, bins=bins, range=(values.min(), values.max()))
    return [HistogramBin(low=float(lo), high=float(hi), count=int(c))
            for lo, hi, c in zip(edges[:-1], edges[1:], freq)]


def size_class(item_count):
    for name, (low, high) in STRATA.items():
        if low <= item_count <= high:
            return name
    return None


@dataclass(frozen=True)
class DirectoryResult:
    repo_id: str
    dir_path: str
    item_count: int
    k_star: int
    fallback: bool
    local_names: tuple
    sampled_names: tuple
    local_simple: tuple
    local_cluster: tuple
    sampled_simple: tuple
    sampled_cluster: tuple
    norm_local_simple: tuple
    norm_local_cluster: tuple
    norm_sampled_simple: tuple
    norm_sampled_cluster: tuple

    def to_dict(self):
        return {key: list(value) if isinstance(value, tuple) else value
                for key, value in asdict(self).items()}

    def to_rows(self):
        rows = []
        for population, names in (('local', self.local_names), ('sampled', self.sampled_names)):
            for i, name in enumerate(names):
                rows.append({
                    'repo_id': self.repo_id,
                    'dir_path': self.dir_path,
                    'item_count': self.item_count,
                    'k_star': self.k_star,
                    'fallback': self.fallback,
                    'population': population,
                    'name': name,
                    'simple': getattr(self, f"{population}_simple")[i],
                    'cluster': getattr(self, f"{population}_cluster")[i],
                    'norm_simple': getattr(self, f"norm_{population}_simple")[i],
                    'norm_cluster': getattr(self, f"norm_{population}_cluster")[i],
                })
        return rows


@dataclass(frozen=True)
class MetricSummary:
    local_median: float
    sampled_median: float
    ks: KsResult

    def to_dict(self):
        return {'local_median': self.local_median, 'sampled_median': self.sampled_median,
                'ks': self.ks._asdict()}


@dataclass(frozen=True)
class ExperimentReport:
    directories: tuple
    aggregate: dict
    strata: dict
    power_law: Optional[PowerLawFit]
    histogram: tuple
    seed: int
    provider_id: str
    skipped: int = 0
    fallback: int = 0
    eligible: int = 0
    ks_difference: float = 0.0

    def pooled(self, metric, population):
        key = f"norm_{population}_{metric}"
        return [v for d in self.directories for v in getattr(d, key)]

    def pooled_rows(self):
        return [{'metric': metric, 'population': population, 'value': value}
                for metric in METRICS
                for population in ('local', 'sampled')
                for value in self.pooled(metric, population)]

    def to_dict(self):
        return {
            'seed': self.seed,
            'provider_id': self.provider_id,
            'eligible_directories': self.eligible,
            'scored_directories': len(self.directories),
            'skipped_directories': self.skipped,
            'fallback_directories': self.fallback,
            'aggregate': {m: s.to_dict() for m, s in self.aggregate.items()},
            'ks_difference': self.ks_difference,
            'strata': {
                name: {'directories': entry['directories'],
                       **{m: (entry[m]._asdict() if entry[m] is not None else None)
                          for m in METRICS}}
                for name, entry in self.strata.items()
            },
            'power_law': self.power_law._asdict() if self.power_law is not None else None,
            'histogram': [b._asdict() for b in self.histogram],
            'directories': [d.to_dict() for d in self.directories],
        }


def _score_directory(task):
    """Worker: leave-one-out locals and decoy scores for one directory."""
    record, names, decoys, provider, fit_cfg, k_min, k_max = task
    decoys = [name for name in decoys if name.strip()]
    try:
        ctx = DirectoryContext.from_names(record.dir_path, names, provider)
        model = fit_directory(ctx, fit_cfg, k_min, k_max, warn=False)
        own = local_scores(ctx, fit_cfg, k_min, k_max, model=model)
        # a decoy named like a local file would replace it: score it leave-one-out
        position = {name: i for i, name in enumerate(ctx.names)}
        sampled = [own[position[name]] if name in position
                   else score_vector(model, provider.embed(name)) for name in decoys]
    except (DegenerateDataError, InvalidInput) as exc:
        return None, f"{record.repo_id}:{record.dir_path}: {exc}"

    scores = {
        'local_simple': [s for s, _ in own],
        'local_cluster': [c.score for _, c in own],
        'sampled_simple': [s for s, _ in sampled],
        'sampled_cluster': [c.score for _, c in sampled],
    }
    normalized = {}
    for metric in METRICS:
        batch = scores[f"local_{metric}"] + scores[f"sampled_{metric}"]
        norm = normalize_per_directory(batch)
        normalized[f"norm_local_{metric}"] = tuple(norm[:len(own)])
        normalized[f"norm_sampled_{metric}"] = tuple(norm[len(own):])

    result = DirectoryResult(
        repo_id=record.repo_id, dir_path=record.dir_path, item_count=record.item_count,
        k_star=model.k_star, fallback=model.fallback,
        local_names=tuple(ctx.names), sampled_names=tuple(decoys),
        **{key: tuple(values) for key, values in scores.items()}, **normalized)
    return result, None


def resolve_jobs(jobs):
    """0 or None means one worker per physical core."""
    if not jobs:
        return psutil.cpu_count(logical=False) or 1
    return jobs


def _subsample(records, max_directories, seed):
    if max_directories is None or len(records) <= max_directories:
        return records
    rng = np.random.default_rng([seed & MASK64, len(records)])
    keep = np.sort(rng.choice(len(records), size=max_directories, replace=False))
    return [records[i] for i in keep]


def _stratify(directories):
    strata = {}
    for name in STRATA:
        members = [d for d in directories if size_class(d.item_count) == name]
        entry = {'directories': len(members)}
        for metric in METRICS:
            local = [v for d in members for v in getattr(d, f"norm_local_{metric}")]
            sampled = [v for d in members for v in getattr(d, f"norm_sampled_{metric}")]
            entry[metric] = ks_two_sample(local, sampled) if local and sampled else None
        strata[name] = entry
    return strata


def run_experiment(manifests, provider, fit_cfg, plan, max_directories=None, jobs=1,
                   count_subdirectories=True, k_min=K_MIN, k_max=K_MAX, bins=DEFAULT_BINS,
                   min_items=MIN_DIRECTORY_ITEMS, score_subdirectories=False):
    """Local (leave-one-out) vs cross-repository decoy scores over a corpus.

    Directories are scored by their file names; ``score_subdirectories``
    adds the subdirectory names to each directory's population.
    """
    if len({m.repo_id for m in manifests}) < 2:
        raise InvalidInput("the experiment needs at least two repositories to sample decoys")

    records = enumerate_directories(manifests, min_items=min_items,
                                    count_subdirectories=count_subdirectories)
    members = (lambda r: r.item_names) if score_subdirectories else (lambda r: r.file_names)
    eligible = [r for r in records if len(members(r)) >= 2]
    skipped = len(records) - len(eligible)
    if skipped:
        logger.info(f"Skipping {skipped} directories with fewer than two scorable names")
    chosen = _subsample(eligible, max_directories, plan.seed)
    if not chosen:
        raise InvalidInput("no directory has enough files to score")

    tasks = [(record, members(record), sample_cross_repo(record, manifests, plan), provider,
              fit_cfg, k_min, k_max)
             for record in chosen]
    jobs = resolve_jobs(jobs)
    logger.info(f"Scoring {len(tasks)} directories with {jobs} worker(s)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_score_directory, tasks, chunksize=4))
    else:
        outcomes = [_score_directory(task) for task in tasks]

    directories = []
    for result, problem in outcomes:
        if result is None:
            logger.warning(f"Skipping unscorable directory {problem}")
            skipped += 1
            continue
        directories.append(result)
    if not directories:
        raise DegenerateDistribution("every sampled directory was degenerate")
    fallback = sum(1 for d in directories if d.fallback)

    aggregate = {}
    for metric in METRICS:
        local = [v for d in directories for v in getattr(d, f"norm_local_{metric}")]
        sampled = [v for d in directories for v in getattr(d, f"norm_sampled_{metric}")]
        aggregate[metric] = MetricSummary(local_median=float(np.median(local)),
                                          sampled_median=float(np.median(sampled)),
                                          ks=ks_two_sample(local, sampled))
        logger.info(f"{metric}: local median {aggregate[metric].local_median:.3f}, "
                    f"sampled median {aggregate[metric].sampled_median:.3f}, "
                    f"KS {aggregate[metric].ks.statistic:.3f} (p={aggregate[metric].ks.p_value:.3g})")

    sizes = [r.item_count for r in records]
    try:
        power_law = power_law_fit(sizes)
    except (InvalidInput, DegenerateDistribution) as exc:
        logger.warning(f"No power-law fit of directory sizes: {exc}")
        power_law = None

    return ExperimentReport(
        directories=tuple(directories), aggregate=aggregate, strata=_stratify(directories),
        power_law=power_law, histogram=tuple(log_histogram(sizes, bins)), seed=plan.seed,
        provider_id=provider.provider_id, skipped=skipped, fallback=fallback,
        eligible=len(eligible),
        ks_difference=aggregate['cluster'].ks.statistic - aggregate['simple'].ks.statistic)
