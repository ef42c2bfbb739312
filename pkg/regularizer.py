"""
Regularizer
Stochastic word-level tokenization: dropout or uniform sampling over a base tokenizer
"""

import logging
from collections import Counter, OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from bpe import COIN_POLICIES, PERSISTENT, BpeModel, bpe_encode, exact_bpe_dropout_dist
from distribution import DistributionReport, Tokenization
from errors import ConfigError, TokenizerError
from lattice import (DEFAULT_ENUMERATE_LIMIT, DEFAULT_MAX_REJECTIONS, RejectionStats, TokenizationLattice,
                     build_lattice, enumerate_paths, exact_uniform_sample, unbiased_sample)
from maxmatch import (SubwordVocab, derive_marked_vocab, exact_maxmatch_dropout_dist, mark_tokens,
                      maxmatch_encode, strip_markers)

logger = logging.getLogger(__name__)

BPE = "bpe"
MAXMATCH = "maxmatch"
SCHEMES = (BPE, MAXMATCH)

DETERMINISTIC = "deterministic"
DROPOUT = "dropout"
UNIFORM = "uniform"
MODES = (DETERMINISTIC, DROPOUT, UNIFORM)

EXACT_SAMPLER = "exact"
REJECTION_SAMPLER = "rejection"
SAMPLERS = (EXACT_SAMPLER, REJECTION_SAMPLER)

SOURCE = "source"
TARGET = "target"
BOTH = "both"
SCOPES = (SOURCE, TARGET, BOTH)

DEFAULT_SEED = 1234
DEFAULT_DROPOUT_RATES = {BPE: 0.1, MAXMATCH: 0.3}
DEFAULT_UNIFORM_RATE = 0.1
CHUNK_LINES = 1000


def resolve_rate(scheme: str, mode: str, rate: Optional[float]) -> float:
    """Per-scheme default for an unset (None) rate; an explicit 0.0 is kept"""
    if rate is not None:
        return float(rate)
    if mode == DROPOUT:
        return DEFAULT_DROPOUT_RATES.get(scheme, DEFAULT_DROPOUT_RATES[BPE])
    if mode == UNIFORM:
        return DEFAULT_UNIFORM_RATE
    return 0.0


@dataclass(frozen=True)
class StochasticTokenizerConfig:
    """Settings of the stochastic tokenizer"""

    scheme: str = BPE
    mode: str = DETERMINISTIC
    rate: float = 0.0
    seed: int = DEFAULT_SEED
    scope: str = BOTH
    sampler: str = EXACT_SAMPLER
    coin_policy: str = PERSISTENT
    max_rejections: int = DEFAULT_MAX_REJECTIONS
    cache_size: int = 100000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"Unbekanntes Verfahren '{self.scheme}' (erlaubt: {', '.join(SCHEMES)})")
        if self.mode not in MODES:
            raise ConfigError(f"Unbekannter Modus '{self.mode}' (erlaubt: {', '.join(MODES)})")
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"Rate {self.rate} liegt nicht in [0, 1]")
        if self.mode == DETERMINISTIC and self.rate != 0.0:
            raise ConfigError("Eine Rate ist nur mit den Modi 'dropout' oder 'uniform' zulässig")
        if self.scope not in SCOPES:
            raise ConfigError(f"Unbekannter Geltungsbereich '{self.scope}'")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"Unbekannter Sampler '{self.sampler}'")
        if self.coin_policy not in COIN_POLICIES:
            raise ConfigError(f"Unbekannte Münzregel '{self.coin_policy}'")
        if self.seed < 0:
            raise ConfigError("Seed muss nicht-negativ sein")

    def applies_to(self, side: str) -> bool:
        return self.scope == BOTH or self.scope == side

    def describe(self) -> str:
        return f"{self.scheme} {self.mode} rate={self.rate:g}"


@dataclass
class WordCounters:
    words: int = 0
    sampled: int = 0
    noncanonical: int = 0

    def add(self, other: "WordCounters"):
        self.words += other.words
        self.sampled += other.sampled
        self.noncanonical += other.noncanonical


@dataclass(frozen=True)
class LineError:
    line_number: int
    message: str


@dataclass
class CorpusSummary:
    """Statistics of one tokenize_corpus run"""

    lines: int = 0
    counters: WordCounters = field(default_factory=WordCounters)
    token_counts: Counter = field(default_factory=Counter)
    errors: List[LineError] = field(default_factory=list)
    rejection: RejectionStats = field(default_factory=RejectionStats)

    @property
    def tokens(self) -> int:
        return sum(self.token_counts.values())

    @property
    def types(self) -> int:
        return len(self.token_counts)


class StochasticTokenizer:
    """Canonical, dropout and uniform tokenization of single words"""

    def __init__(self, config: StochasticTokenizerConfig, bpe_model: Optional[BpeModel] = None,
                 vocab: Optional[SubwordVocab] = None):
        """
        Initialize tokenizer

        Args:
            config: Tokenizer settings
            bpe_model: BPE model, required for the bpe scheme
            vocab: Position-classed vocabulary; derived from bpe_model when omitted
        """
        if config.scheme == BPE and bpe_model is None:
            raise ConfigError("Das Verfahren 'bpe' benötigt ein BPE-Modell")
        if vocab is None and bpe_model is None:
            raise ConfigError("Weder Vokabular noch BPE-Modell angegeben")

        self.config = config
        self.bpe_model = bpe_model
        self.suffix = ""
        if vocab is None:
            vocab = derive_marked_vocab(bpe_model)
            self.suffix = bpe_model.end_of_word or ""
        self.vocab = vocab
        self.marker = vocab.marker
        self._lattices: "OrderedDict[str, TokenizationLattice]" = OrderedDict()
        self._canonical: "OrderedDict[str, Tokenization]" = OrderedDict()
        self.rejection_stats = RejectionStats()

    def _cached(self, cache: OrderedDict, word: str, build):
        value = cache.get(word)
        if value is not None:
            cache.move_to_end(word)
            return value
        value = build(word)
        cache[word] = value
        if len(cache) > self.config.cache_size:
            cache.popitem(last=False)
        return value

    def lattice(self, word: str) -> TokenizationLattice:
        """Pruned lattice of a word, cached by word"""
        return self._cached(self._lattices, word, lambda w: build_lattice(w + self.suffix, self.vocab))

    def canonical(self, word: str) -> Tokenization:
        """Deterministic base tokenization, internal tokens marked"""
        return self._cached(self._canonical, word, lambda w: self._base(w, 0.0, None))

    def _base(self, word: str, dropout_p: float, rng: Optional[np.random.Generator]) -> Tokenization:
        if self.config.scheme == BPE:
            tokens = bpe_encode(word, self.bpe_model, dropout_p, rng, self.config.coin_policy)
            return mark_tokens(tokens, self.marker)
        return maxmatch_encode(word + self.suffix, self.vocab, dropout_p, rng)

    def uniform(self, word: str, rng: np.random.Generator) -> Tokenization:
        """Uniform sample over all tokenizations of the word"""
        lattice = self.lattice(word)
        if self.config.sampler == REJECTION_SAMPLER:
            return unbiased_sample(lattice, rng, self.config.max_rejections, self.rejection_stats)
        return exact_uniform_sample(lattice, rng)

    def sample(self, word: str, rng: Optional[np.random.Generator], stochastic: bool = True) -> Tuple[Tokenization, bool]:
        """
        Tokenize one word

        Args:
            word: Word to tokenize
            rng: Random generator for this word
            stochastic: False forces the canonical tokenization

        Returns:
            Tuple of (tokenization, whether the sampling branch was taken)
        """
        config = self.config
        if not stochastic or config.mode == DETERMINISTIC or config.rate == 0.0:
            return self.canonical(word), False
        if config.mode == DROPOUT:
            return self._base(word, config.rate, rng), True
        if rng.random() < config.rate:
            return self.uniform(word, rng), True
        return self.canonical(word), False

    def __call__(self, word: str, rng: np.random.Generator) -> Tokenization:
        return self.sample(word, rng)[0]

    def exact_distribution(self, word: str, limit: int = DEFAULT_ENUMERATE_LIMIT) -> DistributionReport:
        """
        Exact distribution of sample() for one word, rendered like its outputs

        Args:
            word: Word to analyze
            limit: Largest lattice enumerated in uniform mode

        Returns:
            Exact DistributionReport with the canonical row flagged
        """
        config = self.config
        canonical = self.canonical(word)
        source = config.describe()
        if config.mode == DETERMINISTIC or config.rate == 0.0:
            return DistributionReport.exact(word, {canonical: 1.0}, canonical=canonical, source=source)

        if config.mode == DROPOUT:
            if config.scheme == BPE:
                report = exact_bpe_dropout_dist(word, self.bpe_model, config.rate, config.coin_policy)
                probabilities = {mark_tokens(tokens, self.marker): p for tokens, p in report.rows}
            else:
                report = exact_maxmatch_dropout_dist(word + self.suffix, self.vocab, config.rate)
                probabilities = report.as_dict()
            return DistributionReport.exact(word, probabilities, canonical=canonical, source=source)

        paths = enumerate_paths(self.lattice(word), limit)
        probabilities = {tokens: config.rate / len(paths) for tokens in paths}
        probabilities[canonical] = probabilities.get(canonical, 0.0) + 1.0 - config.rate
        return DistributionReport.exact(word, probabilities, canonical=canonical, source=source)

    def word_rng(self, line_index: int, word_index: int) -> np.random.Generator:
        """Generator of one word, derived from (seed, line, word)"""
        return np.random.default_rng([self.config.seed, line_index, word_index])

    def detokenize(self, tokens: Tokenization) -> str:
        word = strip_markers(tokens, self.marker)
        if self.suffix and word.endswith(self.suffix):
            word = word[:-len(self.suffix)]
        return word

    def tokenize_sentence(self, words: Sequence[str], rng: Optional[np.random.Generator] = None,
                          line_index: int = 0, side: str = SOURCE,
                          counters: Optional[WordCounters] = None) -> List[Tokenization]:
        """
        Tokenize a whitespace-pretokenized sentence word by word

        Args:
            words: Words of the sentence
            rng: Shared generator; when None each word gets its own derived generator
            line_index: Line index used for the per-word seed derivation
            side: Corpus side, sampling only happens inside the configured scope
            counters: Optional counters updated in place

        Returns:
            One tokenization per word, in word order
        """
        stochastic = self.config.applies_to(side)
        needs_rng = stochastic and self.config.mode != DETERMINISTIC and self.config.rate > 0.0
        result = []
        for word_index, word in enumerate(words):
            word_rng = rng
            if word_rng is None and needs_rng:
                word_rng = self.word_rng(line_index, word_index)
            tokens, sampled = self.sample(word, word_rng, stochastic)
            if counters is not None:
                counters.words += 1
                if sampled:
                    counters.sampled += 1
                    if tokens != self.canonical(word):
                        counters.noncanonical += 1
            result.append(tokens)
        return result


def tokenize_sentence(sentence: Sequence[str], tokenizer: StochasticTokenizer,
                      rng: Optional[np.random.Generator] = None) -> List[Tokenization]:
    """Algorithm-level entry point: per-word stochastic tokenization of one sentence"""
    return tokenizer.tokenize_sentence(sentence, rng=rng)


def _tokenize_lines(tokenizer: StochasticTokenizer, start: int, lines: List[str], side: str):
    outputs = []
    before = replace(tokenizer.rejection_stats)
    counters = WordCounters()
    token_counts = Counter()
    errors = []
    for offset, line in enumerate(lines):
        line_index = start + offset
        try:
            tokenized = tokenizer.tokenize_sentence(line.split(), line_index=line_index,
                                                    side=side, counters=counters)
        except TokenizerError as e:
            errors.append(LineError(line_index + 1, str(e)))
            outputs.append("")
            continue
        flat = [token for tokens in tokenized for token in tokens]
        token_counts.update(flat)
        outputs.append(" ".join(flat))
    return outputs, counters, token_counts, errors, tokenizer.rejection_stats.since(before)


_WORKER_TOKENIZER: Optional[StochasticTokenizer] = None


def _init_worker(tokenizer: StochasticTokenizer):
    global _WORKER_TOKENIZER
    _WORKER_TOKENIZER = tokenizer


def _worker_chunk(job: Tuple[int, List[str], str]):
    start, lines, side = job
    return _tokenize_lines(_WORKER_TOKENIZER, start, lines, side)


def _batches(lines: Iterable[str], size: int) -> Iterator[Tuple[int, List[str]]]:
    batch: List[str] = []
    start = 0
    for line in lines:
        batch.append(line.rstrip("\r\n"))
        if len(batch) >= size:
            yield start, batch
            start += len(batch)
            batch = []
    if batch:
        yield start, batch


def tokenize_corpus(lines: Iterable[str], tokenizer: StochasticTokenizer, output: IO[str],
                    side: str = SOURCE, workers: int = 1, chunk_lines: int = CHUNK_LINES,
                    progress: bool = False) -> CorpusSummary:
    """
    Tokenize a line-oriented corpus

    Each output line holds the space-joined subwords of the input line. Seeds
    are derived per (line, word), so output does not depend on the number of
    workers.

    Args:
        lines: Input lines
        tokenizer: Configured StochasticTokenizer
        output: Text stream receiving the tokenized lines
        side: Corpus side (source or target)
        workers: Number of worker processes
        chunk_lines: Lines per work unit
        progress: Show a progress bar

    Returns:
        CorpusSummary with counters, per-line errors and rejection-sampler counts summed over all workers
    """
    summary = CorpusSummary()
    bar = tqdm(desc="lines", unit="lines", disable=not progress)

    def consume(result):
        outputs, counters, token_counts, errors, rejection = result
        for text in outputs:
            output.write(text + "\n")
        summary.lines += len(outputs)
        summary.counters.add(counters)
        summary.token_counts.update(token_counts)
        summary.errors.extend(errors)
        summary.rejection.add(rejection)
        if workers > 1:
            tokenizer.rejection_stats.add(rejection)
        bar.update(len(outputs))

    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                     initargs=(tokenizer,)) as pool:
                pending: List[Tuple[int, List[str], str]] = []
                for start, batch in _batches(lines, chunk_lines):
                    pending.append((start, batch, side))
                    if len(pending) >= workers:
                        for result in pool.map(_worker_chunk, pending):
                            consume(result)
                        pending = []
                for result in pool.map(_worker_chunk, pending):
                    consume(result)
        else:
            for start, batch in _batches(lines, chunk_lines):
                consume(_tokenize_lines(tokenizer, start, batch, side))
    finally:
        bar.close()

    for error in summary.errors:
        logger.warning("line %d: %s", error.line_number, error.message)
    return summary
