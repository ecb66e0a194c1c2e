import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from corpus import MAX_REPO_ITEMS, MIN_REPO_ITEMS, enumerate_directories, item_count, load_manifest
from synthetic import THEMES, generate_synthetic_manifests, manifest_lines, write_manifest


@pytest.mark.unit
class TestSyntheticManifests:

    def setup_method(self):
        """Setup test fixtures"""
        self.manifests = generate_synthetic_manifests(n_repos=200, seed=42)

    def test_every_repository_passes_the_size_filter(self):
        """Test item counts stay inside the repository bounds"""
        counts = [item_count(m) for m in self.manifests]
        assert len(counts) == 200
        assert all(MIN_REPO_ITEMS <= c <= MAX_REPO_ITEMS for c in counts)
        assert all(14 <= c <= 209 for c in counts)

    def test_unique_ids_and_themes(self):
        """Test repository ids are unique and name their theme"""
        ids = [m.repo_id for m in self.manifests]
        assert len(set(ids)) == 200
        assert all(m.repo_id.rsplit('-', 1)[-1] in THEMES for m in self.manifests)
        assert len({i.rsplit('-', 1)[-1] for i in ids}) > 10

    def test_subdirectories_share_a_theme(self):
        """Test every subdirectory uses one extension"""
        records = [r for r in enumerate_directories(self.manifests[:20]) if r.dir_path]
        assert records
        for record in records:
            assert len({name.rsplit('.', 1)[-1] for name in record.file_names}) == 1
            assert record.item_count >= 5

    def test_deterministic(self):
        """Test the same seed gives the same manifests and another seed does not"""
        again = generate_synthetic_manifests(n_repos=200, seed=42)
        other = generate_synthetic_manifests(n_repos=200, seed=43)
        assert [m.paths for m in again] == [m.paths for m in self.manifests]
        assert [m.paths for m in other] != [m.paths for m in self.manifests]

    def test_write_and_load(self, tmp_path):
        """Test a written manifest loads back unchanged"""
        path = tmp_path / 'synthetic.jsonl'
        write_manifest(str(path), self.manifests[:10])
        loaded = load_manifest(str(path))
        assert loaded == self.manifests[:10]
        assert path.read_text(encoding='utf-8') == ''.join(manifest_lines(self.manifests[:10]))
