# Configuration for the camouflage scorer
import os

from dotenv import load_dotenv

from errors import ConfigError

load_dotenv()


def _env(name, default, cast):
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}={raw!r} is not a valid {cast.__name__}")


class Config:
    def __init__(self):
        # Determinism / parallelism
        self.SEED = _env('CAMO_SEED', '42', int)
        self.JOBS = _env('CAMO_JOBS', '1', int)

        # Embedding Configuration
        self.MIN_N = _env('CAMO_MIN_N', '3', int)
        self.MAX_N = _env('CAMO_MAX_N', '6', int)
        self.DIM = _env('CAMO_DIM', '100', int)
        self.BUCKETS = _env('CAMO_BUCKETS', '2000000', int)

        # Mixture fitting / model selection
        self.K_MIN = _env('CAMO_K_MIN', '2', int)
        self.K_MAX = _env('CAMO_K_MAX', '8', int)
        self.RESTARTS = _env('CAMO_RESTARTS', '4', int)
        self.MAX_ITERS = _env('CAMO_MAX_ITERS', '200', int)
        self.TOL = _env('CAMO_TOL', '1e-6', float)

        # Evaluation Configuration
        self.SAMPLES_PER_DIRECTORY = _env('CAMO_SAMPLES_PER_DIRECTORY', '1', int)
        self.MIN_DIRECTORY_ITEMS = _env('CAMO_MIN_DIRECTORY_ITEMS', '5', int)
        # directories scored by evaluate, subsampled with the seed (0 = all)
        self.MAX_DIRECTORIES = _env('CAMO_MAX_DIRECTORIES', '60', int)

        # Logging
        self.LOG_LEVEL = os.getenv('CAMO_LOG_LEVEL', 'INFO')

        if self.JOBS < 0:
            raise ConfigError(f"CAMO_JOBS must be >= 0 (0 = one per core), got {self.JOBS}")
        if self.MAX_DIRECTORIES < 0:
            raise ConfigError(f"CAMO_MAX_DIRECTORIES must be >= 0 (0 = all), "
                              f"got {self.MAX_DIRECTORIES}")
        if self.K_MIN < 2 or self.K_MAX < self.K_MIN:
            raise ConfigError(f"invalid k range {self.K_MIN}..{self.K_MAX}")

    def ngram_config(self, **overrides):
        from embedding import NgramConfig

        values = dict(min_n=self.MIN_N, max_n=self.MAX_N, dim=self.DIM,
                      bucket_count=self.BUCKETS, seed=self.SEED)
        values.update({key: v for key, v in overrides.items() if v is not None})
        return NgramConfig(**values)

    def fit_config(self, k=1, **overrides):
        from vmf_mixture import FitConfig

        values = dict(k=k, max_iters=self.MAX_ITERS, tol=self.TOL,
                      restarts=self.RESTARTS, seed=self.SEED)
        values.update({key: v for key, v in overrides.items() if v is not None})
        return FitConfig(**values)
