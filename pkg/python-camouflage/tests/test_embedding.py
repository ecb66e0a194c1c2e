import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from embedding import (HashedEmbedder, NgramConfig, TokenizedEmbedder, embed_names,
                       extract_ngrams, hashed_embed, load_text_vectors, ngram_bucket,
                       split_filename)
from errors import ConfigError, InvalidInput, ParseError
from geometry import cosine_distance, l2_normalize

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')

filename_chars = st.characters(min_codepoint=33, max_codepoint=126)


def enumerate_ngrams(token, min_n, max_n):
    """Independent enumerator: every window of every allowed length."""
    wrapped = '<' + token + '>'
    out = []
    for n in range(min_n, max_n + 1):
        i = 0
        while i + n <= len(wrapped):
            out.append(wrapped[i:i + n])
            i += 1
    if len(wrapped) > max_n or len(wrapped) < min_n:
        out.append(wrapped)
    return out


@pytest.mark.unit
class TestExtractNgrams:

    def setup_method(self):
        """Setup test fixtures"""
        self.cfg3 = NgramConfig(min_n=3, max_n=3)
        self.cfg = NgramConfig()

    def test_two_letter_token(self):
        """Test 'ab' gives its two trigrams and the whole token"""
        assert extract_ngrams('ab', self.cfg3) == ['<ab', 'ab>', '<ab>']

    def test_single_letter_token(self):
        """Test the whole token is not repeated when it is already a trigram"""
        assert extract_ngrams('a', self.cfg3) == ['<a>']

    def test_example_filename_count(self):
        """Test data6.xls yields 30 n-grams plus the whole token"""
        # When
        grams = extract_ngrams('data6.xls', self.cfg)

        # Then
        assert len(grams) == 31
        assert grams[0] == '<da'
        assert grams[-1] == '<data6.xls>'
        assert grams == enumerate_ngrams('data6.xls', 3, 6)

    def test_shortest_first_order(self):
        """Test n-grams are grouped by increasing length"""
        lengths = [len(g) for g in extract_ngrams('report.pdf', self.cfg)[:-1]]
        assert lengths == sorted(lengths)

    def test_empty_token(self):
        """Test empty and blank tokens are rejected"""
        with pytest.raises(InvalidInput):
            extract_ngrams('', self.cfg)
        with pytest.raises(InvalidInput):
            extract_ngrams('   ', self.cfg)

    @settings(max_examples=200, deadline=None)
    @given(st.text(alphabet=filename_chars, min_size=1, max_size=40))
    def test_matches_enumerator(self, token):
        """Test n-gram list agrees with the independent enumerator and closed form"""
        grams = extract_ngrams(token, self.cfg)
        L = len(token) + 2
        expected_count = sum(max(0, L - n + 1) for n in range(3, 7)) + (1 if L > 6 else 0)
        assert grams == enumerate_ngrams(token, 3, 6)
        assert len(grams) == expected_count


@pytest.mark.unit
class TestNgramConfig:

    def test_defaults(self):
        """Test default configuration values"""
        cfg = NgramConfig()
        assert (cfg.min_n, cfg.max_n, cfg.dim, cfg.bucket_count, cfg.seed) == \
            (3, 6, 100, 2_000_000, 42)

    def test_invalid_ranges(self):
        """Test invalid n-gram ranges and sizes are rejected"""
        with pytest.raises(ConfigError):
            NgramConfig(min_n=4, max_n=3)
        with pytest.raises(ConfigError):
            NgramConfig(max_n=17)
        with pytest.raises(ConfigError):
            NgramConfig(dim=1)
        with pytest.raises(ConfigError):
            NgramConfig(bucket_count=0)


@pytest.mark.unit
class TestHashedEmbedder:

    def setup_method(self):
        """Setup test fixtures"""
        self.cfg = NgramConfig()
        self.embedder = HashedEmbedder(self.cfg)

    def test_deterministic_across_instances(self):
        """Test two embedders from the same config agree bit for bit"""
        # Given
        other = HashedEmbedder(NgramConfig())
        rng = np.random.default_rng(3)
        tokens = [''.join(chr(c) for c in rng.integers(97, 123, size=rng.integers(1, 12)))
                  for _ in range(1000)]

        # Then
        for token in tokens:
            assert np.array_equal(self.embedder.embed(token), other.embed(token))

    def test_unit_norm(self):
        """Test every vector is unit length"""
        for token in ['a', 'data1.xls', 'wedding_invites.xls', 'Ω.txt']:
            assert np.linalg.norm(self.embedder.embed(token)) == pytest.approx(1.0, abs=1e-9)

    def test_shared_ngrams_are_closer(self):
        """Test data1.xls is closer to data2.xls than to wedding_invites.xls"""
        # Given
        near = set(extract_ngrams('data1.xls', self.cfg)) & set(extract_ngrams('data2.xls', self.cfg))
        far = set(extract_ngrams('data1.xls', self.cfg)) & \
            set(extract_ngrams('wedding_invites.xls', self.cfg))
        assert len(near) > len(far)

        # When
        d_near = cosine_distance(self.embedder.embed('data1.xls'), self.embedder.embed('data2.xls'))
        d_far = cosine_distance(self.embedder.embed('data1.xls'),
                                self.embedder.embed('wedding_invites.xls'))

        # Then
        assert d_near < d_far

    def test_single_ngram_token(self):
        """Test a token with one n-gram embeds as its normalized bucket vector"""
        cfg = NgramConfig(min_n=3, max_n=3)
        embedder = HashedEmbedder(cfg)
        expected = l2_normalize(embedder.bucket_vector(ngram_bucket('<a>', cfg)))
        assert np.allclose(embedder.embed('a'), expected, atol=1e-12)

    def test_bucket_vector_range(self):
        """Test bucket vectors have dim components in [-1, 1]"""
        v = self.embedder.bucket_vector(12345)
        assert v.shape == (100,)
        assert np.all(np.abs(v) <= 1.0)

    def test_seed_changes_vectors(self):
        """Test a different seed gives a different embedding"""
        other = HashedEmbedder(NgramConfig(seed=7))
        assert not np.allclose(self.embedder.embed('report.pdf'), other.embed('report.pdf'))

    def test_reversal_changes_vector(self):
        """Test reversing a token changes its vector"""
        assert not np.allclose(self.embedder.embed('abcdef'), self.embedder.embed('fedcba'))

    def test_hashed_embed_helper(self):
        """Test the functional helper matches the class"""
        assert np.array_equal(hashed_embed('data6.xls', self.cfg), self.embedder.embed('data6.xls'))

    def test_embed_names_matrix(self):
        """Test embed_names stacks one row per name"""
        X = embed_names(self.embedder, ['a.txt', 'b.txt', 'c.txt'])
        assert X.shape == (3, 100)
        assert embed_names(self.embedder, []).shape == (0, 100)


@pytest.mark.unit
class TestTextVectors:

    def setup_method(self):
        """Setup test fixtures"""
        self.cfg = NgramConfig(dim=3)

    def write(self, tmp_path, text):
        path = tmp_path / 'vectors.vec'
        path.write_text(text, encoding='utf-8')
        return str(path)

    def test_lookup_and_fallback(self, tmp_path):
        """Test in-vocabulary lookup and hashed fallback"""
        # Given
        provider = load_text_vectors(self.write(tmp_path, "2 3\nabc 2.0 0.0 0.0\n"), self.cfg)

        # Then
        assert np.allclose(provider.embed('abc'), [1.0, 0.0, 0.0])
        assert 'abc' in provider
        assert np.array_equal(provider.embed('zzz-not-in-file'),
                              hashed_embed('zzz-not-in-file', self.cfg))

    def test_dimension_mismatch(self, tmp_path):
        """Test header dim different from configuration"""
        with pytest.raises(ConfigError):
            load_text_vectors(self.write(tmp_path, "1 300\n"), self.cfg)

    def test_malformed_line_reports_line_number(self, tmp_path):
        """Test malformed vector line raises ParseError with its line"""
        path = self.write(tmp_path, "2 3\nabc 1.0 0.0 0.0\nbad 1.0 oops 0.0\n")
        with pytest.raises(ParseError) as excinfo:
            load_text_vectors(path, self.cfg)
        assert excinfo.value.line == 3

    def test_bad_header(self, tmp_path):
        """Test header that is not two integers"""
        with pytest.raises(ParseError) as excinfo:
            load_text_vectors(self.write(tmp_path, "three dims\n"), self.cfg)
        assert excinfo.value.line == 1

    def test_example_vector_fixture(self):
        """Test the bundled 4-d vector file loads all entries"""
        provider = load_text_vectors(os.path.join(FIXTURES, 'example_vectors.vec'), NgramConfig(dim=4))
        assert len(provider.vectors) == 14
        assert provider.provider_id.startswith('vec:')


@pytest.mark.unit
class TestTokenizedEmbedding:

    def test_split_filename(self):
        """Test separators, digit runs and camelCase are split"""
        assert split_filename('reportV2_finalDraft-2021.pdf') == \
            ['report', 'v', '2', 'final', 'draft', '2021', 'pdf']
        assert split_filename('data6.xls') == ['data', '6', 'xls']
        assert split_filename('HTMLParser.py') == ['html', 'parser', 'py']

    def test_tokenized_provider(self):
        """Test tokenized vectors are unit and share the base dimension"""
        provider = TokenizedEmbedder(HashedEmbedder(NgramConfig()))
        v = provider.embed('wedding_invites.xls')
        assert v.shape == (100,)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert provider.provider_id.startswith('tokenized+')
