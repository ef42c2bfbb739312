"""
MaxMatch
Greedy longest-match encoding with dropout over a position-classed vocabulary
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from bpe import BpeModel, survives
from distribution import DistributionReport, Tokenization
from errors import ModelFormatError, OracleLimitError, UntokenizableWordError, VocabularyError

logger = logging.getLogger(__name__)

DEFAULT_MARKER = "#"
ORACLE_MAX_LENGTH = 12


class PositionClass(str, Enum):
    INITIAL = "initial"
    INTERNAL = "internal"

    @classmethod
    def at(cls, position: int) -> "PositionClass":
        return cls.INITIAL if position == 0 else cls.INTERNAL


Entry = Tuple[str, PositionClass]


@dataclass(frozen=True)
class SubwordVocab:
    """
    Subword inventory split into word-initial and word-internal entries

    Internal entries are serialized with the marker prefix ("#ab"); entry
    order is kept so that files round-trip byte for byte. Atoms are
    multi-character alphabet symbols (an end-of-word suffix) that count as a
    single unit when checking single-character coverage.
    """

    entries: Tuple[Entry, ...]
    marker: str = DEFAULT_MARKER
    atoms: Tuple[str, ...] = ()
    initial: FrozenSet[str] = field(init=False, repr=False, compare=False)
    internal: FrozenSet[str] = field(init=False, repr=False, compare=False)
    max_len: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.marker:
            raise VocabularyError("Markierung darf nicht leer sein")
        entries = tuple((surface, PositionClass(cls)) for surface, cls in self.entries)
        seen = set()
        for surface, cls in entries:
            if not surface:
                raise VocabularyError("Leere Einträge sind nicht erlaubt")
            if (surface, cls) in seen:
                raise VocabularyError(f"Doppelter Eintrag '{surface}' ({cls.value})")
            seen.add((surface, cls))

        initial = frozenset(s for s, c in entries if c is PositionClass.INITIAL)
        internal = frozenset(s for s, c in entries if c is PositionClass.INTERNAL)
        missing = sorted(self._characters(entries) - initial)
        if missing:
            raise VocabularyError(f"Zeichen ohne wortinitialen Eintrag: {' '.join(missing)}")

        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "internal", internal)
        object.__setattr__(self, "max_len", max((len(s) for s, _ in entries), default=0))

    def _characters(self, entries) -> set:
        chars = set()
        for surface, _ in entries:
            for atom in self.atoms:
                surface = surface.replace(atom, "")
            chars.update(surface)
        return chars | set(self.atoms)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], marker: str = DEFAULT_MARKER) -> "SubwordVocab":
        """Build a vocabulary from serialized tokens ("ab", "#ab", ...)"""
        return cls(entries=tuple(parse_token(token, marker) for token in tokens), marker=marker)

    def surfaces(self, cls: PositionClass) -> FrozenSet[str]:
        return self.initial if cls is PositionClass.INITIAL else self.internal

    def contains(self, surface: str, cls: PositionClass) -> bool:
        return surface in self.surfaces(cls)

    def render(self, surface: str, cls: PositionClass) -> str:
        return surface if cls is PositionClass.INITIAL else self.marker + surface

    def tokens(self) -> List[str]:
        return [self.render(surface, cls) for surface, cls in self.entries]

    @property
    def alphabet(self) -> FrozenSet[str]:
        return frozenset(ch for s, _ in self.entries for ch in s)

    def strip(self, tokens: Tokenization) -> str:
        """Recover the word from a marked tokenization"""
        return strip_markers(tokens, self.marker)

    def __len__(self) -> int:
        return len(self.entries)


def parse_token(token: str, marker: str = DEFAULT_MARKER) -> Entry:
    if token.startswith(marker) and len(token) > len(marker):
        return token[len(marker):], PositionClass.INTERNAL
    return token, PositionClass.INITIAL


def mark_tokens(tokens: Tokenization, marker: str = DEFAULT_MARKER) -> Tokenization:
    """Prefix every non-initial token with the marker"""
    return tuple(token if i == 0 else marker + token for i, token in enumerate(tokens))


def strip_markers(tokens: Tokenization, marker: str = DEFAULT_MARKER) -> str:
    parts = []
    for i, token in enumerate(tokens):
        if i > 0 and token.startswith(marker):
            token = token[len(marker):]
        parts.append(token)
    return "".join(parts)


def _hits(word: str, position: int, vocab: SubwordVocab) -> List[int]:
    """Lengths j of all dictionary matches starting at position, ascending"""
    surfaces = vocab.surfaces(PositionClass.at(position))
    limit = min(vocab.max_len, len(word) - position)
    return [j for j in range(1, limit + 1) if word[position:position + j] in surfaces]


def _fallback(word: str, position: int, vocab: SubwordVocab) -> str:
    char = word[position]
    if not vocab.contains(char, PositionClass.at(position)):
        raise UntokenizableWordError(word, char, position)
    return char


def maxmatch_encode(word: str, vocab: SubwordVocab, dropout_p: float = 0.0,
                    rng: Optional[np.random.Generator] = None) -> Tokenization:
    """
    Left-to-right longest match, each dictionary hit kept with probability 1 - dropout_p

    Coins are drawn per hit in increasing match length; when every hit at a
    position is dropped the single character is emitted.

    Args:
        word: Word to encode
        vocab: Position-classed vocabulary
        dropout_p: Probability of discarding a dictionary hit
        rng: Random generator, required when 0 < dropout_p < 1

    Returns:
        Marked tokenization, e.g. ("ab", "#ab", "#c")
    """
    if not 0.0 <= dropout_p <= 1.0:
        raise ValueError(f"dropout_p {dropout_p} outside [0, 1]")
    if 0.0 < dropout_p < 1.0 and rng is None:
        raise ValueError("dropout needs a random generator")

    tokens = []
    i = 0
    while i < len(word):
        length = 0
        for j in _hits(word, i, vocab):
            if survives(dropout_p, rng):
                length = j
        if length == 0:
            _fallback(word, i, vocab)
            length = 1
        tokens.append(vocab.render(word[i:i + length], PositionClass.at(i)))
        i += length
    return tuple(tokens)


def _step_distribution(word: str, position: int, vocab: SubwordVocab, dropout_p: float) -> Dict[int, float]:
    """Probability of each token length chosen at one position"""
    hits = [j for j in _hits(word, position, vocab) if j > 1]
    lengths: Dict[int, float] = defaultdict(float)
    for k, j in enumerate(hits):
        # accepted, and every longer hit dropped
        lengths[j] += (1.0 - dropout_p) * dropout_p ** (len(hits) - k - 1)
    single = dropout_p ** len(hits)
    if single > 0.0:
        _fallback(word, position, vocab)
        lengths[1] += single
    return {j: p for j, p in lengths.items() if p > 0.0}


def exact_maxmatch_dropout_dist(word: str, vocab: SubwordVocab, dropout_p: float,
                                max_length: int = ORACLE_MAX_LENGTH) -> DistributionReport:
    """
    Exact distribution of maxmatch_encode by branching on every coin

    Args:
        word: Word to analyze
        vocab: Position-classed vocabulary
        dropout_p: Dropout probability
        max_length: Refuse words longer than this

    Returns:
        Exact DistributionReport with the greedy tokenization as canonical row

    Raises:
        OracleLimitError: if the word exceeds max_length
    """
    if len(word) > max_length:
        raise OracleLimitError(max_length, len(word))
    if not 0.0 <= dropout_p <= 1.0:
        raise ValueError(f"dropout_p {dropout_p} outside [0, 1]")

    suffixes: Dict[int, Dict[Tokenization, float]] = {len(word): {(): 1.0}}
    for i in range(len(word) - 1, -1, -1):
        table: Dict[Tokenization, float] = defaultdict(float)
        for length, p in _step_distribution(word, i, vocab, dropout_p).items():
            head = vocab.render(word[i:i + length], PositionClass.at(i))
            for tail, q in suffixes[i + length].items():
                table[(head,) + tail] += p * q
        suffixes[i] = dict(table)

    return DistributionReport.exact(
        word, suffixes[0],
        canonical=maxmatch_encode(word, vocab),
        source=f"maxmatch-dropout p={dropout_p:g}")


def derive_marked_vocab(model: BpeModel, marker: str = DEFAULT_MARKER) -> SubwordVocab:
    """Every BPE token becomes both a word-initial and a word-internal entry"""
    tokens = model.vocab
    entries = tuple((t, PositionClass.INITIAL) for t in tokens) + \
        tuple((t, PositionClass.INTERNAL) for t in tokens)
    atoms = (model.end_of_word,) if model.end_of_word and len(model.end_of_word) > 1 else ()
    return SubwordVocab(entries=entries, marker=marker, atoms=atoms)


def load_vocab(path: str, marker: str = DEFAULT_MARKER) -> SubwordVocab:
    """
    Read a vocabulary file, one token per line, internal tokens marker-prefixed

    Raises:
        ModelFormatError: on empty lines or invariant violations
    """
    source = Path(path)
    try:
        lines = source.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise ModelFormatError(str(source), 0, f"kein gültiges UTF-8: {e.reason}") from e
    for number, line in enumerate(lines, start=1):
        if not line:
            raise ModelFormatError(str(source), number, "leere Zeile")
    try:
        vocab = SubwordVocab.from_tokens(lines, marker)
    except VocabularyError as e:
        raise ModelFormatError(str(source), 0, str(e)) from e
    logger.debug("loaded %d vocabulary entries from %s", len(vocab), source)
    return vocab


def save_vocab(vocab: SubwordVocab, path: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("".join(token + "\n" for token in vocab.tokens()), encoding="utf-8")
    return target
