import numpy as np
import pytest

from bpe import BpeModel, MergeList
from distribution import total_variation
from errors import ModelFormatError, OracleLimitError, UntokenizableWordError, VocabularyError
from maxmatch import (PositionClass, SubwordVocab, derive_marked_vocab, exact_maxmatch_dropout_dist,
                      load_vocab, mark_tokens, maxmatch_encode, save_vocab, strip_markers)


class TestVocab:
    def test_position_classes_from_marker(self, vocab_ababc):
        assert vocab_ababc.initial == frozenset({"a", "b", "c", "ab"})
        assert vocab_ababc.internal == frozenset({"a", "b", "c", "ab", "bc"})
        assert vocab_ababc.contains("bc", PositionClass.INTERNAL)
        assert not vocab_ababc.contains("bc", PositionClass.INITIAL)

    def test_character_needs_initial_entry(self):
        with pytest.raises(VocabularyError):
            SubwordVocab.from_tokens(["a", "#b"])

    def test_duplicate_entry(self):
        with pytest.raises(VocabularyError):
            SubwordVocab.from_tokens(["a", "a"])

    def test_marker_round_trip(self):
        tokens = mark_tokens(("ab", "ab", "c"))
        assert tokens == ("ab", "#ab", "#c")
        assert strip_markers(tokens) == "ababc"

    def test_file_round_trip(self, vocab_ababc, tmp_path):
        path = save_vocab(vocab_ababc, str(tmp_path / "vocab.txt"))
        assert load_vocab(str(path)) == vocab_ababc

    def test_empty_line_in_file(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("a\n\n#a\n", encoding="utf-8")
        with pytest.raises(ModelFormatError) as info:
            load_vocab(str(path))
        assert info.value.line_number == 2


class TestEncode:
    def test_greedy_longest_match(self, vocab_ababc):
        assert maxmatch_encode("ababc", vocab_ababc) == ("ab", "#ab", "#c")

    def test_longest_match_prefers_whole_word(self, vocab_abb):
        assert maxmatch_encode("abb", vocab_abb) == ("abb",)

    def test_full_dropout_yields_characters(self, vocab_ababc, rng):
        assert maxmatch_encode("ababc", vocab_ababc, 1.0, rng) == ("a", "#b", "#a", "#b", "#c")

    def test_zero_dropout_matches_deterministic(self, vocab_ababc, rng):
        words = ["".join(w) for w in np.random.default_rng(2).choice(list("abc"), size=(1000, 6))]
        for word in words:
            assert maxmatch_encode(word, vocab_ababc, 0.0, rng) == maxmatch_encode(word, vocab_ababc)

    def test_untokenizable_character(self, vocab_ababc):
        with pytest.raises(UntokenizableWordError) as info:
            maxmatch_encode("abd", vocab_ababc)
        assert info.value.character == "d"
        assert info.value.position == 2

    def test_dropout_recovers_word(self, vocab_ababc, rng):
        for _ in range(200):
            assert strip_markers(maxmatch_encode("ababcab", vocab_ababc, 0.4, rng)) == "ababcab"


class TestExactDropout:
    @pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.95])
    def test_abb_table(self, vocab_abb, p):
        report = exact_maxmatch_dropout_dist("abb", vocab_abb, p)
        assert report.probability(("abb",)) == pytest.approx(1 - p, abs=1e-12)
        assert report.probability(("ab", "#b")) == pytest.approx(p * (1 - p), abs=1e-12)
        assert report.probability(("a", "#b", "#b")) == pytest.approx(p ** 2, abs=1e-12)
        assert len(report.rows) == 3

    def test_point_mass_at_zero(self, vocab_abb):
        assert exact_maxmatch_dropout_dist("abb", vocab_abb, 0.0).as_dict() == {("abb",): 1.0}

    def test_sampler_converges_to_oracle(self, vocab_ababc):
        exact = exact_maxmatch_dropout_dist("ababcab", vocab_ababc, 0.3).as_dict()
        rng = np.random.default_rng(3)
        n = 20000
        counts = {}
        for _ in range(n):
            tokens = maxmatch_encode("ababcab", vocab_ababc, 0.3, rng)
            counts[tokens] = counts.get(tokens, 0) + 1
        assert total_variation(exact, {t: c / n for t, c in counts.items()}) < 0.02

    def test_length_guard(self, vocab_ababc):
        with pytest.raises(OracleLimitError):
            exact_maxmatch_dropout_dist("ab" * 7, vocab_ababc, 0.1)


class TestDerivedVocab:
    def test_every_token_in_both_classes(self):
        model = BpeModel(alphabet=("a", "b", "c"), merges=MergeList((("a", "b"), ("b", "c"))))
        vocab = derive_marked_vocab(model)
        assert vocab.initial == vocab.internal == frozenset({"a", "b", "c", "ab", "bc"})
        assert len(vocab) == 10

    def test_end_of_word_is_an_atom(self):
        model = BpeModel(alphabet=("a", "b"), merges=MergeList((("a", "b"),)), end_of_word="</w>")
        vocab = derive_marked_vocab(model)
        assert vocab.atoms == ("</w>",)
        assert maxmatch_encode("ab</w>", vocab) == ("ab", "#</w>")
