"""von Mises-Fisher densities and mixture fitting on the unit hypersphere.

Mixtures are fitted by Expectation-Maximization. Every log-density is
evaluated in the log domain so concentrations up to ``KAPPA_MAX`` never
overflow; the modified Bessel function comes from ``scipy.special.ive``
(exponentially scaled) with a log-domain power series wherever ``ive``
underflows (large order, small argument).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, ive, logsumexp

from errors import ConfigError, InvalidInput
from geometry import NORM_EPS, UNIT_TOL, cosine_distance_matrix, is_unit

logger = logging.getLogger(__name__)

KAPPA_MAX = 1e7
MASK64 = (1 << 64) - 1
# below this ive() returns subnormals with too few significant digits
_IVE_FLOOR = 1e-280


@dataclass(frozen=True)
class FitConfig:
    k: int = 1
    max_iters: int = 200
    tol: float = 1e-6
    restarts: int = 4
    seed: int = 42

    def __post_init__(self):
        if self.k < 1 or self.max_iters < 1 or self.restarts < 1:
            raise ConfigError(f"k, max_iters and restarts must be positive: {self}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")


@dataclass(frozen=True, eq=False)
class VmfComponent:
    mu: np.ndarray
    kappa: float

    def __post_init__(self):
        if abs(np.linalg.norm(self.mu) - 1.0) > 1e-9:
            raise InvalidInput("component mean direction must be a unit vector")
        if not (math.isfinite(self.kappa) and 0.0 <= self.kappa <= KAPPA_MAX):
            raise InvalidInput(f"kappa must lie in [0, {KAPPA_MAX:g}], got {self.kappa}")


@dataclass(frozen=True, eq=False)
class VmfMixture:
    weights: tuple
    components: tuple
    dim: int

    def __post_init__(self):
        if not self.components:
            raise InvalidInput("a mixture needs at least one component")
        if len(self.weights) != len(self.components):
            raise InvalidInput("one weight per component required")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise InvalidInput(f"weights must be non-negative and sum to 1: {self.weights}")
        if any(c.mu.shape != (self.dim,) for c in self.components):
            raise ConfigError("all components must share the mixture dimension")

    @property
    def k(self):
        return len(self.components)

    @property
    def means(self):
        return np.vstack([c.mu for c in self.components])

    @property
    def kappas(self):
        return np.array([c.kappa for c in self.components])


@dataclass(frozen=True, eq=False)
class FitResult:
    mixture: VmfMixture
    assignments: np.ndarray
    log_likelihood: float
    history: tuple = field(default=())
    n_iter: int = 0
    converged: bool = False
    restart: int = 0
    seed: int = 0

    def __iter__(self):
        return iter((self.mixture, self.assignments, self.log_likelihood))


def _log_bessel_series(nu, kappa):
    if kappa == 0.0:
        return 0.0 if nu == 0.0 else -np.inf
    # term ratio drops below 1/4 once m exceeds kappa
    m = np.arange(int(kappa) + 64, dtype=np.float64)
    log_terms = (2.0 * m + nu) * math.log(kappa / 2.0) - gammaln(m + 1.0) - gammaln(m + nu + 1.0)
    return float(logsumexp(log_terms))


def log_bessel_iv(nu, kappa):
    """ln I_nu(kappa) for nu >= 0, kappa >= 0; broadcasts over arrays."""
    nu_arr, kappa_arr = np.broadcast_arrays(np.asarray(nu, dtype=np.float64),
                                            np.asarray(kappa, dtype=np.float64))
    scalar = nu_arr.ndim == 0
    nu_arr = np.atleast_1d(nu_arr)
    kappa_arr = np.atleast_1d(kappa_arr)

    scaled = ive(nu_arr, kappa_arr)
    with np.errstate(divide='ignore', invalid='ignore'):
        result = np.log(scaled) + kappa_arr
    bad = ~np.isfinite(result) | ~(scaled > _IVE_FLOOR)
    if np.any(bad):
        result = result.copy()
        result[bad] = [_log_bessel_series(n, k) for n, k in zip(nu_arr[bad], kappa_arr[bad])]
    return float(result[0]) if scalar else result


def _check_kappa(kappa):
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise InvalidInput(f"kappa must be finite and >= 0, got {kappa}")


def _log_uniform_density(d):
    # 1 / surface area of the unit sphere in R^d
    return float(gammaln(d / 2.0) - math.log(2.0) - (d / 2.0) * math.log(math.pi))


def _log_norm_constants(d, kappas):
    kappas = np.asarray(kappas, dtype=np.float64)
    out = np.full(kappas.shape, _log_uniform_density(d))
    positive = kappas > 0.0
    if np.any(positive):
        nu = d / 2.0 - 1.0
        k = kappas[positive]
        out[positive] = (nu * np.log(k) - (d / 2.0) * math.log(2.0 * math.pi)
                         - log_bessel_iv(nu, k))
    return out


def log_norm_constant(d, kappa):
    """ln C_d(kappa) of the vMF density on the unit sphere in R^d."""
    if d < 2:
        raise InvalidInput(f"dimension must be >= 2, got {d}")
    kappa = float(kappa)
    _check_kappa(kappa)
    return float(_log_norm_constants(d, [kappa])[0])


def log_density(x, comp):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != comp.mu.shape:
        raise ConfigError(f"dimension mismatch: {x.shape} vs {comp.mu.shape}")
    if not is_unit(x, UNIT_TOL):
        raise InvalidInput("vMF density is defined for unit vectors only")
    return log_norm_constant(x.shape[0], comp.kappa) + comp.kappa * float(comp.mu @ x)


def estimate_kappa(r_bar, d):
    """Closed-form concentration estimate from the mean resultant length."""
    if not math.isfinite(r_bar) or r_bar < 0.0:
        raise InvalidInput(f"mean resultant length must be >= 0, got {r_bar}")
    if r_bar >= 1.0:
        logger.warning(f"r_bar={r_bar} >= 1 (point mass); kappa clamped to {KAPPA_MAX:g}")
        return KAPPA_MAX
    kappa = (r_bar * d - r_bar ** 3) / (1.0 - r_bar ** 2)
    return float(min(KAPPA_MAX, max(0.0, kappa)))


def _refine_kappas(r_bars, d, max_steps=50):
    r_bars = np.asarray(r_bars, dtype=np.float64)
    kappas = np.where(r_bars >= 1.0, KAPPA_MAX, 0.0)
    active = (r_bars > 0.0) & (r_bars < 1.0)
    if not np.any(active):
        return kappas

    target = r_bars[active]
    k = np.clip((target * d - target ** 3) / (1.0 - target ** 2), 0.0, KAPPA_MAX)
    nu = d / 2.0 - 1.0
    live = k > 0.0
    for _ in range(max_steps):
        if not np.any(live):
            break
        current = k[live]
        a = np.exp(log_bessel_iv(nu + 1.0, current) - log_bessel_iv(nu, current))
        slope = 1.0 - a * a - (d - 1.0) / current * a
        ok = slope > 0.0
        updated = np.where(ok, current - (a - target[live]) / np.where(ok, slope, 1.0), current)
        updated = np.where(updated <= 0.0, current / 2.0, updated)
        updated = np.minimum(updated, KAPPA_MAX)
        done = (~ok | (np.abs(updated - current) <= 1e-12 * np.maximum(current, 1.0))
                | (updated == KAPPA_MAX))
        k[live] = updated
        live[np.flatnonzero(live)[done]] = False

    kappas[active] = k
    return kappas


def refine_kappa(r_bar, d, max_steps=50):
    """Maximum-likelihood kappa: Newton's method on A_d(kappa) = r_bar.

    Starts from the ``estimate_kappa`` closed form; result clamped to
    [0, KAPPA_MAX].
    """
    return float(_refine_kappas([r_bar], d, max_steps=max_steps)[0])


def _validate_points(points):
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInput(f"expected a non-empty (n, d) point matrix, got shape {X.shape}")
    if np.any(np.abs(np.linalg.norm(X, axis=1) - 1.0) > UNIT_TOL):
        raise InvalidInput("mixture fitting requires unit-normalized points")
    return X


def _log_joint(X, weights, means, kappas):
    d = X.shape[1]
    with np.errstate(divide='ignore'):
        log_w = np.log(weights)
    return log_w + _log_norm_constants(d, kappas) + (X @ means.T) * kappas


def _e_step(X, weights, means, kappas):
    joint = _log_joint(X, weights, means, kappas)
    log_norm = logsumexp(joint, axis=1)
    resp = np.exp(joint - log_norm[:, np.newaxis])
    return float(log_norm.sum()), resp


def _m_step(X, resp):
    n, d = X.shape
    nk = resp.sum(axis=0)
    resultant = resp.T @ X
    lengths = np.linalg.norm(resultant, axis=1)
    weights = nk / nk.sum()
    healthy = (nk > 0.0) & (lengths >= NORM_EPS)

    means = np.empty_like(resultant)
    kappas = np.ones(resp.shape[1])
    means[healthy] = resultant[healthy] / lengths[healthy, np.newaxis]
    kappas[healthy] = _refine_kappas(lengths[healthy] / nk[healthy], d)

    for j in np.flatnonzero(~healthy):
        worst = int(np.argmin(resp.max(axis=1)))
        logger.debug(f"component {j} has a vanishing resultant; re-seeding from point {worst}")
        means[j] = X[worst] / np.linalg.norm(X[worst])
        weights[j] = 1.0 / n
    return weights / weights.sum(), means, kappas


def _init_means(X, k, rng):
    """k-means++ style seeding under cosine distance."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = cosine_distance_matrix(X, X[chosen])[:, 0]
    for _ in range(1, k):
        spread = closest ** 2
        total = spread.sum()
        idx = int(rng.integers(n)) if total <= 0.0 else int(rng.choice(n, p=spread / total))
        chosen.append(idx)
        closest = np.minimum(closest, cosine_distance_matrix(X, X[[idx]])[:, 0])
    return X[chosen].copy()


def _run_em(X, cfg, restart, init=None):
    if init is None:
        rng = np.random.default_rng([cfg.seed & MASK64, restart])
        means = _init_means(X, cfg.k, rng)
        kappas = np.ones(cfg.k)
        weights = np.full(cfg.k, 1.0 / cfg.k)
    else:
        weights, means, kappas = np.asarray(init.weights), init.means, init.kappas

    ll, resp = _e_step(X, weights, means, kappas)
    history = [ll]
    converged = False
    n_iter = 0
    for n_iter in range(1, cfg.max_iters + 1):
        weights, means, kappas = _m_step(X, resp)
        new_ll, resp = _e_step(X, weights, means, kappas)
        history.append(new_ll)
        change = abs(new_ll - ll)
        ll = new_ll
        if change <= cfg.tol * max(abs(history[-2]), np.finfo(float).tiny):
            converged = True
            break

    logger.debug(f"EM k={cfg.k} restart={restart}: ll={ll:.6f} after {n_iter} iterations")
    return ll, weights, means, kappas, resp, history, n_iter, converged


def fit_mixture(points, cfg, init=None):
    """Fit a k-component vMF mixture; best of ``cfg.restarts`` EM runs.

    A starting mixture ``init`` replaces the seeded restarts with one EM run
    from its parameters.
    """
    X = _validate_points(points)
    if X.shape[0] < cfg.k:
        raise InvalidInput(f"cannot fit {cfg.k} components to {X.shape[0]} points")
    if init is not None and (init.k != cfg.k or init.dim != X.shape[1]):
        raise ConfigError(f"starting mixture has k={init.k}, d={init.dim}; "
                          f"expected k={cfg.k}, d={X.shape[1]}")

    best = None
    for restart in range(1 if init is not None else cfg.restarts):
        run = _run_em(X, cfg, restart, init)
        if best is None or run[0] > best[1][0]:
            best = (restart, run)

    restart, (ll, weights, means, kappas, resp, history, n_iter, converged) = best
    components = tuple(VmfComponent(mu=means[j], kappa=float(kappas[j])) for j in range(cfg.k))
    mixture = VmfMixture(weights=tuple(float(w) for w in weights),
                         components=components, dim=X.shape[1])
    return FitResult(mixture=mixture, assignments=np.argmax(resp, axis=1),
                     log_likelihood=ll, history=tuple(history), n_iter=n_iter,
                     converged=converged, restart=restart, seed=cfg.seed)


def responsibilities(x, mix):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (mix.dim,):
        raise ConfigError(f"dimension mismatch: {x.shape} vs ({mix.dim},)")
    if not is_unit(x, UNIT_TOL):
        raise InvalidInput("responsibilities are defined for unit vectors only")
    joint = _log_joint(x[np.newaxis, :], np.asarray(mix.weights), mix.means, mix.kappas)[0]
    return np.exp(joint - logsumexp(joint))


def mixture_to_dict(fit):
    mix = fit.mixture
    return {
        'dim': mix.dim,
        'k': mix.k,
        'weights': [float(w) for w in mix.weights],
        'components': [{'mu': [float(v) for v in c.mu], 'kappa': float(c.kappa)}
                       for c in mix.components],
        'log_likelihood': float(fit.log_likelihood),
        'seed': fit.seed,
    }
