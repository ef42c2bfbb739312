"""
Corpus
Whitespace pre-tokenization and word frequency counts
"""

import logging
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Union

from errors import CorpusDecodeError

logger = logging.getLogger(__name__)

CHUNK_LINES = 10000


@dataclass(frozen=True)
class WordCounts:
    """Word frequencies of a corpus together with its alphabet"""

    entries: Dict[str, int] = field(default_factory=dict)
    alphabet: FrozenSet[str] = frozenset()

    @classmethod
    def from_counter(cls, counter: Counter) -> "WordCounts":
        entries = {word: count for word, count in sorted(counter.items()) if count > 0}
        alphabet = frozenset(char for word in entries for char in word)
        return cls(entries=entries, alphabet=alphabet)

    def total(self) -> int:
        """Number of running words"""
        return sum(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def most_common(self, n: Optional[int] = None) -> List:
        return Counter(self.entries).most_common(n)


def split_words(line: str) -> List[str]:
    """Maximal runs of non-whitespace characters (Unicode whitespace)"""
    return line.split()


def decode_lines(stream: Iterable[Union[bytes, str]]) -> Iterator[str]:
    """
    Decode a line-oriented stream as UTF-8

    Args:
        stream: Iterable of byte or text lines

    Yields:
        Decoded lines

    Raises:
        CorpusDecodeError: with the absolute byte offset of the first bad byte
    """
    offset = 0
    for raw in stream:
        if isinstance(raw, str):
            yield raw
            continue
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorpusDecodeError(offset + e.start, e.reason) from e
        offset += len(raw)


def _count_chunk(lines: List[str]) -> Counter:
    counter = Counter()
    for line in lines:
        counter.update(split_words(line))
    return counter


def _chunks(lines: Iterable[str], size: int) -> Iterator[List[str]]:
    chunk = []
    for line in lines:
        chunk.append(line)
        if len(chunk) >= size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def ingest(stream: Iterable[Union[bytes, str]], workers: int = 1,
           chunk_lines: int = CHUNK_LINES) -> WordCounts:
    """
    Count whitespace-separated words of a text stream

    Args:
        stream: Line-oriented UTF-8 input (bytes or already decoded text)
        workers: Number of processes counting chunks in parallel
        chunk_lines: Lines per chunk handed to a worker

    Returns:
        WordCounts with entries sorted by word
    """
    lines = decode_lines(stream)
    counter = Counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for partial in pool.map(_count_chunk, _chunks(lines, chunk_lines)):
                counter.update(partial)
    else:
        for chunk in _chunks(lines, chunk_lines):
            counter.update(_count_chunk(chunk))

    counts = WordCounts.from_counter(counter)
    logger.debug("ingested %d running words, %d types, %d characters",
                 counts.total(), len(counts), len(counts.alphabet))
    return counts


def ingest_file(path: Optional[str], workers: int = 1) -> WordCounts:
    """
    Count words of a file, or of standard input when path is None or "-"

    Args:
        path: Corpus file path
        workers: Number of counting processes

    Returns:
        WordCounts of the file
    """
    if path is None or path == "-":
        return ingest(sys.stdin.buffer, workers=workers)
    with open(Path(path), "rb") as f:
        return ingest(f, workers=workers)
