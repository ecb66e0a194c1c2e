"""Repository manifests, directory enumeration and cross-repository sampling."""
import hashlib
import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from errors import DuplicateError, InvalidInput, ParseError

logger = logging.getLogger(__name__)

MIN_REPO_ITEMS = 10
MAX_REPO_ITEMS = 500
MIN_DIRECTORY_ITEMS = 5
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RepoManifest:
    repo_id: str
    paths: tuple

    def __post_init__(self):
        if not self.paths:
            raise InvalidInput(f"repository {self.repo_id!r} has no paths")
        if len(set(self.paths)) != len(self.paths):
            raise InvalidInput(f"repository {self.repo_id!r} lists duplicate paths")
        for path in self.paths:
            if not path or path.startswith('/'):
                raise InvalidInput(f"repository {self.repo_id!r}: invalid path {path!r}")


@dataclass(frozen=True)
class DirectoryRecord:
    repo_id: str
    dir_path: str
    item_names: tuple
    item_count: int
    file_names: tuple = field(default=())
    error: Optional[str] = None

    def __post_init__(self):
        if self.item_count != len(self.item_names):
            raise InvalidInput(f"{self.dir_path!r}: item_count {self.item_count} "
                               f"!= {len(self.item_names)} names")

    def to_dict(self):
        return {
            'repo_id': self.repo_id,
            'dir_path': self.dir_path,
            'item_count': self.item_count,
            'file_count': len(self.file_names),
            'item_names': list(self.item_names),
            'error': self.error,
        }


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 42
    samples_per_directory: int = 1

    def __post_init__(self):
        if self.samples_per_directory < 1:
            raise InvalidInput("samples_per_directory must be positive")


def load_manifest(path):
    """Parse a JSON-Lines manifest: one {"repo_id", "paths"} object per line."""
    manifests = []
    seen = set()
    with open(path, encoding='utf-8') as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", line=line_no)
            if not isinstance(entry, dict):
                raise ParseError("expected a JSON object", line=line_no)
            repo_id = entry.get('repo_id')
            paths = entry.get('paths')
            if not isinstance(repo_id, str) or not isinstance(paths, list) \
                    or not all(isinstance(p, str) for p in paths):
                raise ParseError("expected {\"repo_id\": str, \"paths\": [str, ...]}", line=line_no)
            if repo_id in seen:
                raise DuplicateError(f"line {line_no}: duplicate repo_id {repo_id!r}")
            seen.add(repo_id)
            try:
                manifests.append(RepoManifest(repo_id=repo_id, paths=tuple(paths)))
            except InvalidInput as exc:
                raise ParseError(str(exc), line=line_no)

    logger.info(f"Loaded {len(manifests)} repositories from {path}")
    return manifests


def _tree(manifest):
    """children per directory ("" is the root) and the set of directory paths."""
    children = defaultdict(set)
    directories = set()
    for path in manifest.paths:
        parts = path.split('/')
        for depth in range(len(parts)):
            parent = '/'.join(parts[:depth])
            children[parent].add(parts[depth])
            if depth < len(parts) - 1:
                directories.add('/'.join(parts[:depth + 1]))
    return children, directories


def _files(manifest):
    _, directories = _tree(manifest)
    return sorted(p for p in manifest.paths if p not in directories)


def item_count(manifest):
    """Files plus distinct directories of a repository."""
    _, directories = _tree(manifest)
    files = [p for p in manifest.paths if p not in directories]
    return len(files) + len(directories)


def filter_repositories(manifests, min_items=MIN_REPO_ITEMS, max_items=MAX_REPO_ITEMS):
    kept = [m for m in manifests if min_items <= item_count(m) <= max_items]
    logger.info(f"Kept {len(kept)} of {len(manifests)} repositories "
                f"with {min_items}-{max_items} items")
    return kept


def enumerate_directories(manifests, min_items=MIN_DIRECTORY_ITEMS, count_subdirectories=True):
    records = []
    for manifest in manifests:
        children, directories = _tree(manifest)
        for dir_path in sorted(children):
            names = tuple(sorted(children[dir_path]))
            prefix = f"{dir_path}/" if dir_path else ''
            files = tuple(n for n in names if f"{prefix}{n}" not in directories)
            counted = len(names) if count_subdirectories else len(files)
            if counted < min_items:
                continue
            records.append(DirectoryRecord(repo_id=manifest.repo_id, dir_path=dir_path,
                                           item_names=names, item_count=len(names),
                                           file_names=files))
    records.sort(key=lambda r: (r.repo_id, r.dir_path))
    return records


def _target_key(target):
    digest = hashlib.sha256(f"{target.repo_id}\0{target.dir_path}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def draw_cross_repo(target, manifests, plan):
    """(repo_id, path) of files drawn from repositories other than the target's."""
    others = sorted((m for m in manifests if m.repo_id != target.repo_id),
                    key=lambda m: m.repo_id)
    if not others:
        raise InvalidInput("cross-repository sampling needs at least two repositories")
    rng = np.random.default_rng([plan.seed & MASK64, _target_key(target)])
    draws = []
    for _ in range(plan.samples_per_directory):
        repo = others[int(rng.integers(len(others)))]
        files = _files(repo)
        draws.append((repo.repo_id, files[int(rng.integers(len(files)))]))
    return draws


def sample_cross_repo(target, manifests, plan):
    return [path.rsplit('/', 1)[-1] for _, path in draw_cross_repo(target, manifests, plan)]


def scan_filesystem(root, include_hidden=True, max_depth=None):
    """Walk a live tree (symlinks not followed) into DirectoryRecords."""
    root = os.fspath(root)
    if not os.path.isdir(root):
        raise InvalidInput(f"{root!r} is not a readable directory")
    records = []

    def on_error(exc):
        rel = os.path.relpath(exc.filename, root) if exc.filename else '?'
        rel = '' if rel == '.' else rel.replace(os.sep, '/')
        logger.warning(f"Skipping unreadable directory {exc.filename}: {exc.strerror}")
        records.append(DirectoryRecord(repo_id=root, dir_path=rel, item_names=(),
                                       item_count=0, error=str(exc)))

    for current, dirnames, filenames in os.walk(root, onerror=on_error, followlinks=False):
        rel = os.path.relpath(current, root)
        rel = '' if rel == '.' else rel.replace(os.sep, '/')
        if not include_hidden:
            dirnames[:] = [d for d in dirnames if not d.startswith('.')]
            filenames = [f for f in filenames if not f.startswith('.')]
        dirnames.sort()
        names = tuple(sorted(dirnames + filenames))
        records.append(DirectoryRecord(repo_id=root, dir_path=rel, item_names=names,
                                       item_count=len(names),
                                       file_names=tuple(sorted(filenames))))
        depth = 0 if not rel else rel.count('/') + 1
        if max_depth is not None and depth >= max_depth:
            dirnames[:] = []

    records.sort(key=lambda r: r.dir_path)
    logger.info(f"Scanned {len(records)} directories under {root}")
    return records
