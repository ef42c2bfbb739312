"""
BPE
Merge training, deterministic and dropout inference, exact dropout distributions
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np
from tqdm import tqdm

from corpus import WordCounts
from distribution import DistributionReport, Tokenization
from errors import EmptyCorpusError, ModelFormatError, OracleLimitError, UntokenizableWordError, VocabularyError

logger = logging.getLogger(__name__)

Merge = Tuple[str, str]
Span = Tuple[int, int]

PERSISTENT = "persistent"
REFLIP = "reflip"
COIN_POLICIES = (PERSISTENT, REFLIP)

ORACLE_MAX_LENGTH = 12
MERGES_FILE = "merges.txt"
VOCAB_FILE = "vocab.txt"
FORMAT_HEADER = "#version: 1"
EOW_HEADER = "#end_of_word: "


@dataclass(frozen=True)
class MergeList:
    """Ordered BPE merges; position in the list is the inference priority"""

    merges: Tuple[Merge, ...] = ()
    ranks: Dict[Merge, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        merges = tuple((left, right) for left, right in self.merges)
        ranks = {}
        for rank, pair in enumerate(merges):
            if pair in ranks:
                raise VocabularyError(f"Doppelte Merge-Regel {pair[0]} {pair[1]} (Rang {rank})")
            ranks[pair] = rank
        object.__setattr__(self, "merges", merges)
        object.__setattr__(self, "ranks", ranks)

    def __len__(self) -> int:
        return len(self.merges)

    def __iter__(self):
        return iter(self.merges)

    def __contains__(self, pair) -> bool:
        return pair in self.ranks

    def products(self) -> List[str]:
        return [left + right for left, right in self.merges]


@dataclass(frozen=True)
class BpeModel:
    """Alphabet plus merge list; the vocabulary is derived from both"""

    alphabet: Tuple[str, ...]
    merges: MergeList = field(default_factory=MergeList)
    end_of_word: Optional[str] = None

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if self.end_of_word and self.end_of_word not in alphabet:
            alphabet = alphabet + (self.end_of_word,)
        object.__setattr__(self, "alphabet", alphabet)

        known: Set[str] = set(alphabet)
        for rank, (left, right) in enumerate(self.merges):
            for side in (left, right):
                if side not in known:
                    raise VocabularyError(
                        f"Merge {rank} ({left} {right}): '{side}' ist weder Zeichen noch früheres Merge-Ergebnis")
            known.add(left + right)

    @property
    def vocab(self) -> Tuple[str, ...]:
        """alphabet followed by merge products in merge order, without duplicates"""
        return tuple(dict.fromkeys(self.alphabet + tuple(self.merges.products())))

    @property
    def alphabet_set(self) -> FrozenSet[str]:
        return frozenset(self.alphabet)

    def symbols(self, word: str) -> List[str]:
        symbols = list(word)
        if self.end_of_word:
            symbols.append(self.end_of_word)
        return symbols

    def strip(self, tokens: Tokenization) -> str:
        """Concatenate tokens and drop the end-of-word suffix"""
        text = "".join(tokens)
        if self.end_of_word and text.endswith(self.end_of_word):
            text = text[:-len(self.end_of_word)]
        return text


def _replace(symbols: Tuple[str, ...], pair: Merge) -> Tuple[str, ...]:
    left, right = pair
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            merged.append(left + right)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


def train_bpe(counts: WordCounts, target_merges: int, end_of_word: Optional[str] = None,
              progress: bool = False) -> BpeModel:
    """
    Learn a merge list by repeatedly merging the most frequent adjacent pair

    Args:
        counts: Word frequencies of the training corpus
        target_merges: Number of merges to learn
        end_of_word: Optional suffix symbol appended to every word
        progress: Show a progress bar

    Returns:
        Trained BpeModel

    Raises:
        EmptyCorpusError: if counts holds no words
    """
    if not counts:
        raise EmptyCorpusError()
    if target_merges < 0:
        raise ValueError("target_merges must be non-negative")

    words: List[Tuple[str, ...]] = []
    freqs: List[int] = []
    for word, count in counts.entries.items():
        symbols = tuple(word) + ((end_of_word,) if end_of_word else ())
        words.append(symbols)
        freqs.append(count)

    stats: Counter = Counter()
    indices: Dict[Merge, Set[int]] = defaultdict(set)
    for wid, symbols in enumerate(words):
        for pair in zip(symbols, symbols[1:]):
            stats[pair] += freqs[wid]
            indices[pair].add(wid)

    merges: List[Merge] = []
    for _ in tqdm(range(target_merges), desc="merges", disable=not progress):
        if not stats:
            logger.info("no co-occurring pairs left after %d merges", len(merges))
            break
        # highest count first, ties broken by the lexicographically smallest pair
        best = min(stats.items(), key=lambda item: (-item[1], item[0]))[0]
        merges.append(best)
        logger.debug("merge %d: %s %s (count %d)", len(merges), best[0], best[1], stats[best])

        for wid in sorted(indices.pop(best, ())):
            old = words[wid]
            new = _replace(old, best)
            if new == old:
                continue
            for pair in zip(old, old[1:]):
                stats[pair] -= freqs[wid]
            for pair in zip(new, new[1:]):
                stats[pair] += freqs[wid]
                indices[pair].add(wid)
            words[wid] = new
        for pair in [pair for pair, count in stats.items() if count <= 0]:
            del stats[pair]

    alphabet = tuple(sorted(counts.alphabet))
    return BpeModel(alphabet=alphabet, merges=MergeList(tuple(merges)), end_of_word=end_of_word)


def _check_symbols(word: str, symbols: List[str], model: BpeModel):
    alphabet = model.alphabet_set
    for position, symbol in enumerate(symbols):
        if symbol not in alphabet:
            raise UntokenizableWordError(word, symbol, position)


def _candidates(symbols: List[str], spans: List[Span], ranks: Dict[Merge, int]):
    """(index, instance key, rank) for every adjacent pair that is a merge"""
    found = []
    for i in range(len(spans) - 1):
        (a, b), (_, c) = spans[i], spans[i + 1]
        pair = ("".join(symbols[a:b]), "".join(symbols[b:c]))
        rank = ranks.get(pair)
        if rank is not None:
            found.append((i, (a, b, c), rank))
    return found


def _merge_survivors(spans: List[Span], indices: Set[int]) -> List[Span]:
    """Merge the pairs starting at the given indices left to right without overlap"""
    merged = []
    i = 0
    while i < len(spans):
        if i in indices and i + 1 < len(spans):
            merged.append((spans[i][0], spans[i + 1][1]))
            i += 2
        else:
            merged.append(spans[i])
            i += 1
    return merged


def survives(dropout_p: float, rng: Optional[np.random.Generator]) -> bool:
    if dropout_p <= 0.0:
        return True
    if dropout_p >= 1.0:
        return False
    return rng.random() >= dropout_p


def bpe_encode(word: str, model: BpeModel, dropout_p: float = 0.0,
               rng: Optional[np.random.Generator] = None,
               coin_policy: str = PERSISTENT) -> Tokenization:
    """
    Apply the merge list to one word, optionally with BPE-dropout

    Each round every adjacent pair that is a merge becomes a candidate and is
    discarded with probability dropout_p; the surviving candidate with the
    highest priority is merged (all its surviving occurrences, left to right)
    and the loop ends once no candidate survives.

    Args:
        word: Word to encode
        model: Trained BpeModel
        dropout_p: Probability of discarding a candidate
        rng: Random generator, required when 0 < dropout_p < 1
        coin_policy: "persistent" keeps one coin per pair instance for the
            whole word, "reflip" draws fresh coins every round

    Returns:
        Tuple of subword surfaces
    """
    if not 0.0 <= dropout_p <= 1.0:
        raise ValueError(f"dropout_p {dropout_p} outside [0, 1]")
    if coin_policy not in COIN_POLICIES:
        raise ValueError(f"unknown coin policy {coin_policy!r}")
    if 0.0 < dropout_p < 1.0 and rng is None:
        raise ValueError("dropout needs a random generator")

    symbols = model.symbols(word)
    _check_symbols(word, symbols, model)
    spans: List[Span] = [(i, i + 1) for i in range(len(symbols))]
    ranks = model.merges.ranks
    coins: Dict[Tuple[int, int, int], bool] = {}

    while len(spans) > 1:
        survivors = []
        for index, key, rank in _candidates(symbols, spans, ranks):
            if coin_policy == PERSISTENT:
                if key not in coins:
                    coins[key] = survives(dropout_p, rng)
                alive = coins[key]
            else:
                alive = survives(dropout_p, rng)
            if alive:
                survivors.append((index, rank))
        if not survivors:
            break
        best = min(rank for _, rank in survivors)
        spans = _merge_survivors(spans, {index for index, rank in survivors if rank == best})

    return tuple("".join(symbols[a:b]) for a, b in spans)


class _DropoutOracle:
    """Exhaustive branching over the coins of bpe_encode"""

    def __init__(self, symbols: List[str], model: BpeModel, dropout_p: float, coin_policy: str):
        self.symbols = symbols
        self.ranks = model.merges.ranks
        self.keep = 1.0 - dropout_p
        self.drop = dropout_p
        self.persistent = coin_policy == PERSISTENT
        self.memo: Dict = {}

    def tokens(self, spans: Tuple[Span, ...]) -> Tokenization:
        return tuple("".join(self.symbols[a:b]) for a, b in spans)

    def distribution(self, spans: Tuple[Span, ...], coins: FrozenSet) -> Dict[Tokenization, float]:
        memo_key = (spans, coins)
        if memo_key in self.memo:
            return self.memo[memo_key]

        candidates = _candidates(self.symbols, list(spans), self.ranks)
        groups: Dict[int, list] = defaultdict(list)
        for index, key, rank in candidates:
            groups[rank].append((index, key))
        ordered = [groups[rank] for rank in sorted(groups)]

        result: Dict[Tokenization, float] = defaultdict(float)
        self._explore(spans, dict(coins), ordered, 0, 1.0, result)
        self.memo[memo_key] = dict(result)
        return self.memo[memo_key]

    def _explore(self, spans, coins, groups, level, weight, result):
        if weight == 0.0:
            return
        if level == len(groups):
            result[self.tokens(spans)] += weight
            return

        group = groups[level]
        known = [(index, key) for index, key in group if key in coins]
        unknown = [(index, key) for index, key in group if key not in coins]
        fixed = {index for index, key in known if coins[key]}

        for mask in range(1 << len(unknown)):
            chosen = {unknown[bit] for bit in range(len(unknown)) if mask >> bit & 1}
            kept = len(chosen)
            factor = weight * (self.keep ** kept) * (self.drop ** (len(unknown) - kept))
            if factor == 0.0:
                continue
            drawn = dict(coins)
            for item in unknown:
                drawn[item[1]] = item in chosen
            survivors = fixed | {index for index, _ in chosen}
            if not survivors:
                self._explore(spans, drawn, groups, level + 1, factor, result)
                continue

            merged = tuple(_merge_survivors(list(spans), survivors))
            if self.persistent:
                live = {(a, b, c) for (a, b), (_, c) in zip(merged, merged[1:])}
                remembered = frozenset((key, alive) for key, alive in drawn.items() if key in live)
            else:
                remembered = frozenset()
            for tokens, p in self.distribution(merged, remembered).items():
                result[tokens] += factor * p


def exact_bpe_dropout_dist(word: str, model: BpeModel, dropout_p: float,
                           coin_policy: str = PERSISTENT,
                           max_length: int = ORACLE_MAX_LENGTH) -> DistributionReport:
    """
    Exact distribution of bpe_encode by branching on every coin

    Args:
        word: Word to analyze
        model: Trained BpeModel
        dropout_p: Dropout probability
        coin_policy: Coin policy as in bpe_encode
        max_length: Refuse words longer than this

    Returns:
        Exact DistributionReport with the p=0 tokenization as canonical row

    Raises:
        OracleLimitError: if the word exceeds max_length
    """
    if len(word) > max_length:
        raise OracleLimitError(max_length, len(word))
    if not 0.0 <= dropout_p <= 1.0:
        raise ValueError(f"dropout_p {dropout_p} outside [0, 1]")
    if coin_policy not in COIN_POLICIES:
        raise ValueError(f"unknown coin policy {coin_policy!r}")

    symbols = model.symbols(word)
    _check_symbols(word, symbols, model)
    oracle = _DropoutOracle(symbols, model, dropout_p, coin_policy)
    start = tuple((i, i + 1) for i in range(len(symbols)))
    probabilities = oracle.distribution(start, frozenset())
    return DistributionReport.exact(
        word, probabilities,
        canonical=bpe_encode(word, model),
        source=f"bpe-dropout p={dropout_p:g} {coin_policy}")


def save_model(model: BpeModel, directory: str) -> Tuple[Path, Path]:
    """
    Write merges.txt and vocab.txt into a model directory

    Returns:
        Paths of the merges and vocab files
    """
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    merges_path = target / MERGES_FILE
    vocab_path = target / VOCAB_FILE

    header = [FORMAT_HEADER]
    if model.end_of_word:
        header.append(EOW_HEADER + model.end_of_word)
    lines = header + [f"{left} {right}" for left, right in model.merges]
    merges_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    vocab_path.write_text("".join(token + "\n" for token in model.vocab), encoding="utf-8")
    return merges_path, vocab_path


def load_model(directory: str) -> BpeModel:
    """
    Load a model written by save_model

    Raises:
        ModelFormatError: on malformed lines, duplicate or unreachable merges
    """
    source = Path(directory)
    merges_path = source / MERGES_FILE
    vocab_path = source / VOCAB_FILE

    end_of_word = None
    merges: List[Merge] = []
    try:
        merge_lines = merges_path.read_text(encoding="utf-8").splitlines()
        vocab_lines = vocab_path.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise ModelFormatError(str(source), 0, f"kein gültiges UTF-8: {e.reason}") from e

    for number, line in enumerate(merge_lines, start=1):
        if number == 1 and line == FORMAT_HEADER:
            continue
        if number == 2 and line.startswith(EOW_HEADER):
            end_of_word = line[len(EOW_HEADER):]
            continue
        fields = line.split(" ")
        if len(fields) != 2 or not all(fields):
            raise ModelFormatError(str(merges_path), number, f"erwartet 'links rechts', gefunden {line!r}")
        merges.append((fields[0], fields[1]))

    products = {left + right for left, right in merges}
    alphabet = []
    for number, token in enumerate(vocab_lines, start=1):
        if not token:
            raise ModelFormatError(str(vocab_path), number, "leere Zeile")
        if token not in products:
            alphabet.append(token)

    try:
        model = BpeModel(alphabet=tuple(alphabet), merges=MergeList(tuple(merges)), end_of_word=end_of_word)
    except VocabularyError as e:
        raise ModelFormatError(str(merges_path), 0, str(e)) from e
    if set(model.vocab) != set(vocab_lines):
        raise ModelFormatError(str(vocab_path), 0, "Vokabular passt nicht zu den Merge-Regeln")
    logger.debug("loaded BPE model from %s: %d merges, %d tokens", source, len(merges), len(model.vocab))
    return model
