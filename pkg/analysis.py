"""
Analysis
Empirical distributions, diversity curves, efficiency metrics and dropout non-uniformity checks
"""

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from bpe import PERSISTENT, BpeModel, MergeList, exact_bpe_dropout_dist
from distribution import DistributionReport, Tokenization, total_variation
from errors import OracleLimitError, PathLimitError, UntokenizableWordError
from lattice import DEFAULT_ENUMERATE_LIMIT, TokenizationLattice, build_lattice, count_paths, enumerate_paths
from maxmatch import PositionClass, SubwordVocab, exact_maxmatch_dropout_dist
from regularizer import StochasticTokenizer

logger = logging.getLogger(__name__)

WordSampler = Callable[[str, np.random.Generator], Tokenization]

REPORT_VERSION = "# tokenization-report v1"
REPORT_COLUMNS = ("word", "tokenization", "probability", "is_canonical")
CURVE_COLUMNS = ("word", "samples", "mean_unique")
UNIFORM_TOLERANCE = 1e-9
DEFAULT_P_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))

__all__ = [
    "DistributionReport", "EfficiencyReport", "LemmaVerdict", "total_variation",
    "empirical_distribution", "pad_report", "compare_reports", "unique_count_curve", "coupon_collector",
    "noncanonical_rate", "shannon_entropy", "shannon_efficiency_excluding_canonical",
    "renyi_entropy", "renyi_efficiency", "lemma_grid_check", "write_reports", "write_curves",
    "read_reports", "WordAnalysis", "analyze_word",
]


@dataclass(frozen=True)
class EfficiencyReport:
    alpha: float
    vocab_size: int
    entropy: float
    efficiency: float


def empirical_distribution(word: str, sampler: WordSampler, samples: int, seed: int,
                           canonical: Optional[Tokenization] = None, source: str = "") -> DistributionReport:
    """
    Frequencies of the tokenizations of a word over seeded samples

    Args:
        word: Word to sample
        sampler: Callable (word, rng) -> tokenization
        samples: Number of draws N >= 1
        seed: Seed of the generator shared by all draws
        canonical: Deterministic tokenization, flagged in the report
        source: Provenance text

    Returns:
        Empirical DistributionReport
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    counts = Counter(tuple(sampler(word, rng)) for _ in range(samples))
    return DistributionReport.empirical(word, counts, samples, seed=seed, canonical=canonical, source=source)


def pad_report(report: DistributionReport, lattice: TokenizationLattice,
               limit: int = DEFAULT_ENUMERATE_LIMIT) -> DistributionReport:
    """Add zero rows for unobserved paths when the lattice is small enough"""
    try:
        paths = enumerate_paths(lattice, limit)
    except PathLimitError:
        logger.debug("not padding '%s': %d paths exceed %d", report.word, count_paths(lattice), limit)
        return report
    observed = report.as_dict()
    rows = list(report.rows) + [(tokens, 0.0) for tokens in paths if tokens not in observed]
    return DistributionReport(word=report.word, rows=tuple(rows), kind=report.kind,
                              canonical=report.canonical, samples=report.samples,
                              seed=report.seed, source=report.source)


def compare_reports(reference: DistributionReport, observed: DistributionReport
                    ) -> Tuple[float, List[Tuple[Tokenization, float, float]]]:
    """
    Side-by-side view of two distributions of the same word

    Returns:
        Tuple of (total variation distance, rows of (tokenization, reference, observed))
        ordered by the reference probability
    """
    if reference.word != observed.word:
        raise ValueError(f"reports describe different words: '{reference.word}' and '{observed.word}'")
    left, right = reference.as_dict(), observed.as_dict()
    support = list(reference.outcomes()) + [t for t in observed.outcomes() if t not in left]
    rows = [(tokens, left.get(tokens, 0.0), right.get(tokens, 0.0)) for tokens in support]
    return total_variation(left, right), rows


def unique_count_curve(word: str, sampler: WordSampler, sample_grid: Sequence[int], repeats: int,
                       seed: int) -> Dict[int, float]:
    """
    Mean number of distinct tokenizations observed among N samples

    Every repeat draws max(grid) samples from its own derived generator and
    records the distinct count at each grid point.

    Args:
        word: Word to sample
        sampler: Callable (word, rng) -> tokenization
        sample_grid: Ascending list of sample counts
        repeats: Number of independent repeats
        seed: Master seed

    Returns:
        Mapping N -> mean unique count
    """
    grid = list(sample_grid)
    if grid != sorted(grid):
        raise ValueError("sample grid must be ascending")
    if not grid:
        return {}
    totals = {n: 0 for n in grid}
    for child in np.random.SeedSequence(seed).spawn(repeats):
        rng = np.random.default_rng(child)
        seen = set()
        position = 0
        for n in grid:
            while position < n:
                seen.add(tuple(sampler(word, rng)))
                position += 1
            totals[n] += len(seen)
    return {n: totals[n] / repeats for n in grid}


def coupon_collector(outcomes: int, samples: int) -> float:
    """Expected distinct outcomes after N uniform draws from T outcomes"""
    return outcomes * (1.0 - (1.0 - 1.0 / outcomes) ** samples)


def noncanonical_rate(word: str, sampler: WordSampler, canonical: Tokenization, samples: int,
                      seed: int) -> float:
    """Fraction of samples differing from the canonical tokenization"""
    rng = np.random.default_rng(seed)
    different = sum(1 for _ in range(samples) if tuple(sampler(word, rng)) != tuple(canonical))
    return different / samples


def shannon_entropy(probabilities: Iterable[float]) -> float:
    p = np.asarray(list(probabilities), dtype=np.float64)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def shannon_efficiency_excluding_canonical(report: DistributionReport, path_count: int) -> float:
    """
    Uniformity of the non-canonical part of a word's distribution

    The canonical row is removed, the rest renormalized, and its entropy
    divided by log2(T - 1). Unobserved paths count as zero rows and do not
    change the entropy.

    Args:
        report: Distribution of the word
        path_count: Number of tokenizations T of the word (>= 2)

    Returns:
        Efficiency in [0, 1]; 0 when no mass lies outside the canonical row
    """
    if path_count < 2:
        raise ValueError("path_count must be at least 2")
    rest = [p for tokens, p in report.rows if tokens != report.canonical]
    mass = sum(rest)
    if mass <= 0.0:
        return 0.0
    if path_count == 2:
        return 1.0
    entropy = shannon_entropy(p / mass for p in rest)
    return min(1.0, entropy / math.log2(path_count - 1))


def renyi_entropy(probabilities: Iterable[float], alpha: float) -> float:
    """Rényi entropy in bits; alpha = 1 is the Shannon limit"""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    p = np.asarray(list(probabilities), dtype=np.float64)
    p = p[p > 0]
    if alpha == 1.0:
        return float(-np.sum(p * np.log2(p)))
    if math.isinf(alpha):
        return float(-np.log2(p.max()))
    if alpha == 0.0:
        return float(np.log2(p.size))
    return float(np.log2(np.sum(p ** alpha)) / (1.0 - alpha))


def renyi_efficiency(token_counts: Mapping[str, int], vocab_size: int, alpha: float = 1.0) -> EfficiencyReport:
    """
    Rényi entropy of the unigram token distribution over log2 of the vocabulary size

    Args:
        token_counts: Token frequencies of a tokenized corpus
        vocab_size: Size of the vocabulary (>= 2)
        alpha: Rényi order (>= 0)

    Returns:
        EfficiencyReport
    """
    if vocab_size < 2:
        raise ValueError("vocab_size must be at least 2")
    counts = np.asarray([c for c in token_counts.values() if c > 0], dtype=np.float64)
    if counts.size == 0:
        raise ValueError("token counts are empty")
    entropy = renyi_entropy(counts / counts.sum(), alpha)
    return EfficiencyReport(alpha=alpha, vocab_size=vocab_size, entropy=entropy,
                            efficiency=entropy / math.log2(vocab_size))


# Constructed instances for the non-uniformity checks

def abbc_model() -> BpeModel:
    """Merges (a,b) > (b,b) > (b,c) with abb, bbc, abbc outside the vocabulary"""
    return BpeModel(alphabet=("a", "b", "c"), merges=MergeList((("a", "b"), ("b", "b"), ("b", "c"))))


ABBC_WORD = "abbc"
ABB_WORD = "abb"
ABABC_WORD = "ababc"


def abbc_closed_form(p: float) -> Dict[Tokenization, float]:
    """Dropout probabilities of the five tokenizations of abbc under abbc_model()"""
    q = 1.0 - p
    return {
        ("a", "b", "b", "c"): p ** 3,
        ("a", "b", "bc"): p ** 2 * q,
        ("a", "bb", "c"): p * q,
        ("ab", "b", "c"): q * p,
        ("ab", "bc"): q ** 2,
    }


def abb_vocab() -> SubwordVocab:
    """v = ab is a proper prefix of z = abb, single characters included"""
    tokens = ("a", "b", "ab", "abb")
    entries = tuple((t, PositionClass.INITIAL) for t in tokens) + tuple((t, PositionClass.INTERNAL) for t in tokens)
    return SubwordVocab(entries=entries)


def ababc_vocab() -> SubwordVocab:
    return SubwordVocab.from_tokens("a b c ab #a #b #c #ab #bc".split())


@dataclass(frozen=True)
class LemmaRow:
    p: float
    outcomes: int
    spread: float
    canonical_probability: float


@dataclass
class LemmaVerdict:
    scheme: str
    word: str
    failed_clauses: List[str] = field(default_factory=list)
    rows: List[LemmaRow] = field(default_factory=list)

    @property
    def in_scope(self) -> bool:
        return not self.failed_clauses

    @property
    def non_uniform(self) -> bool:
        interior = [row for row in self.rows if 0.0 < row.p < 1.0]
        return bool(interior) and all(row.spread > UNIFORM_TOLERANCE for row in interior)

    @property
    def verdict(self) -> str:
        return "non-uniform" if self.non_uniform else "uniform"


def _bpe_clauses(word: str, model: BpeModel) -> List[str]:
    if len(word) != 4 or word[1] != word[2]:
        return [f"Wort '{word}' hat nicht die Form a b b c"]
    a, b, c = word[0], word[1], word[3]
    ranks = model.merges.ranks
    vocab = set(model.vocab)
    failed = []
    for pair in ((a, b), (b, b), (b, c)):
        if pair not in ranks:
            failed.append(f"({pair[0]}, {pair[1]}) ∉ μ")
    if not failed:
        if not ranks[(a, b)] < ranks[(b, b)]:
            failed.append(f"({a}, {b}) >μ ({b}, {b}) verletzt")
        if not ranks[(b, b)] < ranks[(b, c)]:
            failed.append(f"({b}, {b}) >μ ({b}, {c}) verletzt")
    for token in (a + b + b, b + b + c, a + b + b + c):
        if token in vocab:
            failed.append(f"{token} ∈ V")
    return failed


def _maxmatch_clauses(word: str, vocab: SubwordVocab) -> List[str]:
    failed = []
    for position, char in enumerate(word):
        if not vocab.contains(char, PositionClass.at(position)):
            failed.append(f"Σ ⊄ V: '{char}' fehlt")
    if not vocab.contains(word, PositionClass.INITIAL):
        failed.append(f"z = {word} ∉ V")
    prefixes = [word[:k] for k in range(2, len(word)) if vocab.contains(word[:k], PositionClass.INITIAL)]
    if not prefixes:
        failed.append(f"kein v ∈ V \\ Σ als echtes Präfix von {word}")
    return failed


def lemma_grid_check(scheme: str, word: str, model=None, p_grid: Sequence[float] = DEFAULT_P_GRID,
                     coin_policy: str = PERSISTENT) -> LemmaVerdict:
    """
    Check that the exact dropout distribution of a word is non-uniform on a grid of p

    Args:
        scheme: "bpe" (model is a BpeModel) or "maxmatch" (model is a SubwordVocab)
        word: Constructed word
        model: Model of the scheme; the built-in instance when None
        p_grid: Dropout probabilities to check
        coin_policy: BPE coin policy

    Returns:
        LemmaVerdict with failed precondition clauses and one row per p
    """
    if scheme == "bpe":
        model = model if model is not None else abbc_model()
        failed = _bpe_clauses(word, model)
        oracle = lambda p: exact_bpe_dropout_dist(word, model, p, coin_policy)
    elif scheme == "maxmatch":
        model = model if model is not None else abb_vocab()
        failed = _maxmatch_clauses(word, model)
        oracle = lambda p: exact_maxmatch_dropout_dist(word, model, p)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    verdict = LemmaVerdict(scheme=scheme, word=word, failed_clauses=failed)
    for p in p_grid:
        try:
            report = oracle(p)
        except UntokenizableWordError as e:
            verdict.failed_clauses.append(str(e))
            break
        verdict.rows.append(LemmaRow(p=p, outcomes=len(report.rows), spread=report.spread(),
                                     canonical_probability=report.canonical_probability()))
    if failed:
        logger.info("%s instance '%s' violates the non-uniformity preconditions: %s", scheme, word, "; ".join(failed))
    return verdict


def write_reports(reports: Iterable[DistributionReport], stream: IO[str], delimiter: str = ",") -> int:
    """
    Write distribution reports as CSV (or TSV with delimiter="\\t")

    Returns:
        Number of data rows written
    """
    stream.write(REPORT_VERSION + "\n")
    writer = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    written = 0
    for report in reports:
        for tokens, probability in report.rows:
            writer.writerow([report.word, " ".join(tokens), repr(float(probability)),
                             int(report.canonical is not None and tokens == report.canonical)])
            written += 1
    return written


def write_curves(curves: Mapping[str, Mapping[int, float]], stream: IO[str], delimiter: str = ",") -> None:
    """One row per (word, sample count) of the unique-count curves"""
    writer = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for word, curve in curves.items():
        for n, mean in curve.items():
            writer.writerow([word, n, repr(float(mean))])


def read_reports(stream: IO[str], delimiter: str = ",") -> List[Tuple[str, Tokenization, float, bool]]:
    """Rows of a report file as (word, tokenization, probability, is_canonical)"""
    rows = []
    lines = (line for line in stream if not line.startswith("#"))
    reader = csv.DictReader(lines, delimiter=delimiter)
    for record in reader:
        rows.append((record["word"], tuple(record["tokenization"].split(" ")),
                     float(record["probability"]), record["is_canonical"] == "1"))
    return rows


def uniform_reference(word: str, vocab: SubwordVocab) -> DistributionReport:
    """Exact uniform distribution over all tokenizations of a word"""
    lattice = build_lattice(word, vocab)
    paths = enumerate_paths(lattice)
    share = 1.0 / len(paths)
    return DistributionReport.exact(word, {tokens: share for tokens in paths}, source="uniform")


@dataclass
class WordAnalysis:
    """Distribution report of one word and the figures derived from it"""

    report: DistributionReport
    path_count: int
    efficiency: Optional[float] = None
    reference_distance: Optional[float] = None
    curve: Optional[Dict[int, float]] = None

    @property
    def word(self) -> str:
        return self.report.word

    @property
    def noncanonical(self) -> float:
        """Probability mass away from the canonical tokenization"""
        return 1.0 - self.report.canonical_probability()


def analyze_word(word: str, tokenizer: StochasticTokenizer, samples: int, exact: bool = False,
                 limit: int = DEFAULT_ENUMERATE_LIMIT, sample_grid: Optional[Sequence[int]] = None,
                 repeats: int = 1) -> WordAnalysis:
    """
    Analyze one word with the tokenizer's settings

    Empirical reports are padded with unobserved paths and compared against
    the exact distribution whenever the oracles can compute it.

    Args:
        word: Word to analyze
        tokenizer: Configured StochasticTokenizer, also used as sampler
        samples: Draws of the empirical report
        exact: Exact instead of empirical report
        limit: Largest lattice enumerated
        sample_grid: Sample counts of the unique-count curve, no curve when empty
        repeats: Repeats of the unique-count curve

    Returns:
        WordAnalysis

    Raises:
        UntokenizableWordError: if the word has no tokenization
        OracleLimitError, PathLimitError: if an exact report is too large to compute
    """
    settings = tokenizer.config
    lattice = tokenizer.lattice(word)
    distance = None
    if exact:
        report = tokenizer.exact_distribution(word, limit)
    else:
        report = empirical_distribution(word, tokenizer, samples, settings.seed,
                                        canonical=tokenizer.canonical(word), source=settings.describe())
        report = pad_report(report, lattice, limit)
        try:
            distance, _ = compare_reports(tokenizer.exact_distribution(word, limit), report)
        except (OracleLimitError, PathLimitError) as e:
            logger.debug("no exact reference for '%s': %s", word, e)

    paths = count_paths(lattice)
    efficiency = shannon_efficiency_excluding_canonical(report, paths) if paths >= 2 else None
    curve = None
    if sample_grid:
        curve = unique_count_curve(word, tokenizer, sample_grid, repeats, settings.seed)
    return WordAnalysis(report, paths, efficiency, distance, curve)
