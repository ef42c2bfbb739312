import io

import pytest

from corpus import WordCounts, decode_lines, ingest, ingest_file, split_words
from errors import CorpusDecodeError


class TestIngest:
    def test_counts_and_alphabet(self):
        counts = ingest(io.BytesIO(b"a b a\n"))
        assert counts.entries == {"a": 2, "b": 1}
        assert counts.alphabet == frozenset("ab")

    def test_empty_input(self):
        counts = ingest(io.BytesIO(b""))
        assert not counts
        assert counts.alphabet == frozenset()

    def test_repeated_word_over_lines(self):
        counts = ingest(io.BytesIO(b"abbc abbc\nabbc\n"))
        assert counts.entries == {"abbc": 3}
        assert counts.alphabet == frozenset("abc")

    def test_total_equals_field_count(self):
        text = "der  Hund\tbellt\n\nder Hund　schläft \n"
        counts = ingest(io.StringIO(text))
        assert counts.total() == sum(len(line.split()) for line in text.splitlines())
        assert counts.entries["Hund"] == 2

    def test_unicode_whitespace_splits(self):
        assert split_words("a\u2003b\u00a0c\u3000d") == ["a", "b", "c", "d"]

    def test_parallel_matches_sequential(self, tmp_path):
        lines = [f"w{i % 17} x{i % 5} ab" for i in range(500)]
        path = tmp_path / "corpus.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert ingest_file(str(path), workers=1) == ingest_file(str(path), workers=2)


class TestDecode:
    def test_invalid_utf8_reports_offset(self):
        stream = [b"ok line\n", b"ab\xffcd\n"]
        with pytest.raises(CorpusDecodeError) as info:
            list(decode_lines(stream))
        assert info.value.offset == len(b"ok line\n") + 2

    def test_from_counter_sorts_words(self):
        counts = WordCounts.from_counter({"b": 1, "a": 3})
        assert list(counts.entries) == ["a", "b"]
        assert counts.most_common(1) == [("a", 3)]
