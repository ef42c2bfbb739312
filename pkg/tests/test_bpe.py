import numpy as np
import pytest

from analysis import abbc_closed_form
from bpe import (REFLIP, BpeModel, MergeList, bpe_encode, exact_bpe_dropout_dist, load_model, save_model,
                 train_bpe)
from corpus import WordCounts
from distribution import total_variation
from errors import EmptyCorpusError, ModelFormatError, OracleLimitError, UntokenizableWordError, VocabularyError


def _counts(**words):
    return WordCounts.from_counter(words)


def _random_words(n, seed=7, alphabet="abcd"):
    rng = np.random.default_rng(seed)
    return ["".join(rng.choice(list(alphabet), size=rng.integers(1, 9))) for _ in range(n)]


class TestTraining:
    def test_tie_break_sequence(self):
        model = train_bpe(_counts(abbc=1), 3)
        assert model.merges.merges == (("a", "b"), ("ab", "b"), ("abb", "c"))

    def test_frequency_does_not_change_single_word_order(self):
        model = train_bpe(_counts(abbc=3), 3)
        assert model.merges.merges == (("a", "b"), ("ab", "b"), ("abb", "c"))

    def test_most_frequent_pair_first(self):
        model = train_bpe(_counts(cd=5, ab=2), 1)
        assert model.merges.merges == (("c", "d"),)

    def test_zero_target_gives_alphabet(self):
        model = train_bpe(_counts(abbc=1, ca=2), 0)
        assert set(model.vocab) == {"a", "b", "c"}

    def test_stops_when_no_pairs_left(self):
        model = train_bpe(_counts(a=4, b=1), 10)
        assert len(model.merges) == 0

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            train_bpe(WordCounts(), 5)

    def test_vocab_is_alphabet_plus_products(self):
        model = train_bpe(WordCounts.from_counter({w: 1 for w in _random_words(200)}), 25)
        assert set(model.vocab) == set(model.alphabet) | set(model.merges.products())
        assert len(set(model.merges.merges)) == len(model.merges)

    def test_end_of_word_symbol(self):
        model = train_bpe(_counts(low=5, lower=2, newest=6), 10, end_of_word="</w>")
        assert "</w>" in model.alphabet
        tokens = bpe_encode("lowest", model)
        assert tokens[-1].endswith("</w>")
        assert model.strip(tokens) == "lowest"


class TestModelInvariants:
    def test_duplicate_merge(self):
        with pytest.raises(VocabularyError):
            MergeList((("a", "b"), ("a", "b")))

    def test_unreachable_merge_side(self):
        with pytest.raises(VocabularyError):
            BpeModel(alphabet=("a", "b"), merges=MergeList((("ab", "c"),)))


class TestEncode:
    def test_deterministic(self, bpe_abbc):
        assert bpe_encode("abbc", bpe_abbc) == ("ab", "bc")

    def test_full_dropout_yields_characters(self, bpe_abbc, rng):
        assert bpe_encode("abbc", bpe_abbc, 1.0, rng) == ("a", "b", "b", "c")

    def test_zero_dropout_matches_deterministic(self, rng):
        words = _random_words(1000)
        model = train_bpe(WordCounts.from_counter({w: 1 for w in words}), 30)
        for word in words:
            assert bpe_encode(word, model, 0.0, rng) == bpe_encode(word, model)

    def test_concatenation_recovers_word(self, bpe_abbc, rng):
        for _ in range(200):
            assert "".join(bpe_encode("abbcab", bpe_abbc, 0.5, rng)) == "abbcab"

    def test_unknown_character(self, bpe_abbc):
        with pytest.raises(UntokenizableWordError) as info:
            bpe_encode("abx", bpe_abbc)
        assert info.value.position == 2

    def test_rate_outside_unit_interval(self, bpe_abbc, rng):
        with pytest.raises(ValueError):
            bpe_encode("abbc", bpe_abbc, 1.5, rng)

    def test_same_seed_same_output(self, bpe_abbc):
        first = [bpe_encode("abbcabbc", bpe_abbc, 0.3, np.random.default_rng(5)) for _ in range(3)]
        assert len(set(first)) == 1


class TestExactDropout:
    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
    def test_abbc_table(self, bpe_abbc, p):
        report = exact_bpe_dropout_dist("abbc", bpe_abbc, p)
        expected = abbc_closed_form(p)
        assert set(report.outcomes()) == set(expected)
        for tokens, probability in expected.items():
            assert report.probability(tokens) == pytest.approx(probability, abs=1e-12)
        assert report.canonical == ("ab", "bc")

    def test_reflip_policy_closed_form(self, bpe_abbc):
        p = 0.3
        q = 1.0 - p
        report = exact_bpe_dropout_dist("abbc", bpe_abbc, p, coin_policy=REFLIP)
        assert report.probability(("a", "b", "b", "c")) == pytest.approx(p ** 3, abs=1e-12)
        assert report.probability(("a", "b", "bc")) == pytest.approx(p ** 3 * q, abs=1e-12)
        assert report.probability(("ab", "bc")) == pytest.approx(q ** 2 + p ** 2 * q ** 2, abs=1e-12)
        assert report.total() == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_rates(self, bpe_abbc):
        assert exact_bpe_dropout_dist("abbc", bpe_abbc, 0.0).as_dict() == {("ab", "bc"): 1.0}
        assert exact_bpe_dropout_dist("abbc", bpe_abbc, 1.0).as_dict() == {("a", "b", "b", "c"): 1.0}

    @pytest.mark.parametrize("policy", ["persistent", "reflip"])
    def test_sampler_converges_to_oracle(self, bpe_abbc, policy):
        word = "abbcab"
        exact = exact_bpe_dropout_dist(word, bpe_abbc, 0.3, coin_policy=policy).as_dict()
        rng = np.random.default_rng(11)
        n = 20000
        counts = {}
        for _ in range(n):
            tokens = bpe_encode(word, bpe_abbc, 0.3, rng, coin_policy=policy)
            counts[tokens] = counts.get(tokens, 0) + 1
        assert total_variation(exact, {t: c / n for t, c in counts.items()}) < 0.02

    def test_trained_model_sums_to_one(self):
        words = _random_words(300, seed=3)
        model = train_bpe(WordCounts.from_counter({w: 1 for w in words}), 20)
        for word in words[:30]:
            report = exact_bpe_dropout_dist(word, model, 0.2)
            assert report.total() == pytest.approx(1.0, abs=1e-12)
            assert report.canonical == bpe_encode(word, model)

    def test_length_guard(self, bpe_abbc):
        with pytest.raises(OracleLimitError) as info:
            exact_bpe_dropout_dist("ab" * 10, bpe_abbc, 0.1)
        assert info.value.actual == 20


class TestModelFiles:
    def test_round_trip(self, tmp_path):
        model = train_bpe(_counts(abbc=2, bca=1, cab=4), 10)
        save_model(model, str(tmp_path))
        loaded = load_model(str(tmp_path))
        assert loaded.merges.merges == model.merges.merges
        assert loaded.vocab == model.vocab

    def test_round_trip_with_end_of_word(self, tmp_path):
        model = train_bpe(_counts(low=5, lowest=2), 6, end_of_word="</w>")
        save_model(model, str(tmp_path))
        loaded = load_model(str(tmp_path))
        assert loaded.end_of_word == "</w>"
        assert bpe_encode("lowest", loaded) == bpe_encode("lowest", model)

    def test_merge_starting_with_hash(self, tmp_path):
        model = BpeModel(alphabet=("#", "a"), merges=MergeList((("#", "a"),)))
        save_model(model, str(tmp_path))
        assert load_model(str(tmp_path)).merges.merges == (("#", "a"),)

    def test_malformed_line_reports_line_number(self, tmp_path):
        model = train_bpe(_counts(abbc=1), 2)
        merges_path, _ = save_model(model, str(tmp_path))
        merges_path.write_text("#version: 1\na b\nab b extra\n", encoding="utf-8")
        with pytest.raises(ModelFormatError) as info:
            load_model(str(tmp_path))
        assert info.value.line_number == 3

    def test_vocab_mismatch(self, tmp_path):
        model = train_bpe(_counts(abbc=1), 2)
        _, vocab_path = save_model(model, str(tmp_path))
        vocab_path.write_text("a\nb\nc\nab\nzz\n", encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(str(tmp_path))
