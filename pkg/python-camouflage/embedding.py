"""Filename embeddings built from character n-gram subwords.

Two providers share one contract (``dim``, ``provider_id``, ``embed``):

* ``HashedEmbedder`` - deterministic: every n-gram is hashed to a bucket and
  each bucket expands to a pseudorandom vector from a counter-based generator
  keyed on (seed, bucket). A token is the normalized mean of its n-grams.
* ``TextVectorEmbedder`` - pretrained vectors from a textual ``.vec`` file,
  falling back to the hashed embedder for out-of-vocabulary tokens.
"""
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol

import numpy as np

from errors import ConfigError, DegenerateVector, InvalidInput, ParseError
from geometry import l2_normalize

logger = logging.getLogger(__name__)

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NgramConfig:
    min_n: int = 3
    max_n: int = 6
    dim: int = 100
    bucket_count: int = 2_000_000
    seed: int = 42

    def __post_init__(self):
        if not 1 <= self.min_n <= self.max_n <= 16:
            raise ConfigError(f"n-gram range must satisfy 1 <= min_n <= max_n <= 16, "
                              f"got {self.min_n}..{self.max_n}")
        if self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        if self.bucket_count < 1:
            raise ConfigError(f"bucket_count must be >= 1, got {self.bucket_count}")

    @property
    def provider_id(self):
        return (f"hashed:n{self.min_n}-{self.max_n}:d{self.dim}"
                f":b{self.bucket_count}:s{self.seed & MASK64}")


class EmbeddingProvider(Protocol):
    dim: int
    provider_id: str

    def embed(self, token: str) -> np.ndarray: ...


def extract_ngrams(token, cfg):
    """Character n-grams of ``<token>``, shortest first, plus the whole token."""
    if not token or not token.strip():
        raise InvalidInput("cannot extract n-grams from an empty token")
    wrapped = f"<{token}>"
    length = len(wrapped)
    grams = []
    for n in range(cfg.min_n, cfg.max_n + 1):
        for start in range(length - n + 1):
            grams.append(wrapped[start:start + n])
    # already present as an n-gram when its length is inside the range
    if not cfg.min_n <= length <= cfg.max_n:
        grams.append(wrapped)
    return grams


def fnv1a_64(data):
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def ngram_bucket(ngram, cfg):
    return (fnv1a_64(ngram.encode('utf-8')) ^ (cfg.seed & MASK64)) % cfg.bucket_count


@lru_cache(maxsize=1 << 18)
def _bucket_vector(seed, bucket, dim):
    # Philox is counter-based: coordinate j is the j-th draw under key (seed, bucket)
    generator = np.random.Generator(np.random.Philox(key=(seed << 64) | bucket))
    vector = generator.uniform(-1.0, 1.0, dim)
    vector.setflags(write=False)
    return vector


class HashedEmbedder:
    def __init__(self, cfg=None):
        self.cfg = cfg or NgramConfig()
        self.dim = self.cfg.dim
        self.provider_id = self.cfg.provider_id

    def bucket_vector(self, bucket):
        return _bucket_vector(self.cfg.seed & MASK64, bucket, self.cfg.dim)

    def embed(self, token):
        grams = extract_ngrams(token, self.cfg)
        total = np.zeros(self.dim)
        for gram in grams:
            total += self.bucket_vector(ngram_bucket(gram, self.cfg))
        return l2_normalize(total / len(grams))


def hashed_embed(token, cfg):
    return HashedEmbedder(cfg).embed(token)


class TextVectorEmbedder:
    def __init__(self, vectors, cfg, source=''):
        self.cfg = cfg
        self.dim = cfg.dim
        self.vectors = vectors
        self.fallback = HashedEmbedder(cfg)
        self.provider_id = f"vec:{source}:{len(vectors)}+{self.fallback.provider_id}"

    def __contains__(self, token):
        return token in self.vectors

    def embed(self, token):
        vector = self.vectors.get(token)
        if vector is not None:
            return vector
        return self.fallback.embed(token)


def load_text_vectors(path, cfg):
    """Read a ``<vocab> <dim>`` headed textual vector file."""
    vectors = {}
    with open(path, encoding='utf-8') as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise ParseError("header must be '<vocab_size> <dim>'", line=1)
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError(f"non-integer header {header!r}", line=1)
        if dim != cfg.dim:
            raise ConfigError(f"vector file dim {dim} does not match configured dim {cfg.dim}")

        for line_no, line in enumerate(handle, start=2):
            fields = line.split()
            if not line.strip():
                continue
            if len(fields) != dim + 1 or not fields[0]:
                raise ParseError(f"expected token and {dim} values, got {len(fields)} fields",
                                 line=line_no)
            try:
                values = np.array(fields[1:], dtype=np.float64)
            except ValueError:
                raise ParseError("non-numeric vector component", line=line_no)
            if not np.all(np.isfinite(values)):
                raise ParseError("non-finite vector component", line=line_no)
            try:
                vector = l2_normalize(values)
            except DegenerateVector:
                raise ParseError(f"zero vector for token {fields[0]!r}", line=line_no)
            vector.setflags(write=False)
            vectors[fields[0]] = vector

    if len(vectors) != vocab_size:
        logger.warning(f"{path}: header announces {vocab_size} vectors, read {len(vectors)}")
    logger.info(f"Loaded {len(vectors)} vectors (dim={dim}) from {path}")
    return TextVectorEmbedder(vectors, cfg, source=str(path))


_TOKEN_RE = re.compile(r'[A-Z]+(?![a-z])|[A-Z]?[a-z]+|[0-9]+|[^\sA-Za-z0-9_.\-]+')


def split_filename(name):
    """Split a filename into letter runs, digit runs and camelCase words."""
    return [tok.lower() for tok in _TOKEN_RE.findall(name)]


class TokenizedEmbedder:
    """Embeds a filename as the normalized mean of its token vectors."""

    def __init__(self, base):
        self.base = base
        self.dim = base.dim
        self.provider_id = f"tokenized+{base.provider_id}"

    def embed(self, token):
        parts = split_filename(token)
        if not parts:
            return self.base.embed(token)
        return l2_normalize(np.mean([self.base.embed(p) for p in parts], axis=0))


def embed_names(provider, names):
    if not names:
        return np.empty((0, provider.dim))
    return np.vstack([provider.embed(name) for name in names])
