"""
Tokenization Distributions
Exact and empirical distributions over the tokenizations of one word
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

Tokenization = Tuple[str, ...]

EXACT = "exact"
EMPIRICAL = "empirical"
SUM_TOLERANCE = 1e-12


def total_variation(p: Mapping, q: Mapping) -> float:
    """Half the L1 distance between two distributions given as mappings"""
    support = set(p) | set(q)
    return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in support)


def _sorted_rows(rows: Iterable[Tuple[Tokenization, float]]) -> Tuple[Tuple[Tokenization, float], ...]:
    return tuple(sorted(rows, key=lambda row: (-row[1], row[0])))


@dataclass(frozen=True)
class DistributionReport:
    """Mapping tokenization -> probability (exact) or frequency (empirical)"""

    word: str
    rows: Tuple[Tuple[Tokenization, float], ...]
    kind: str = EXACT
    canonical: Optional[Tokenization] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rows", _sorted_rows(self.rows))
        for tokens, probability in self.rows:
            if not 0.0 <= probability <= 1.0 + SUM_TOLERANCE:
                raise ValueError(f"probability {probability} of {tokens} outside [0, 1]")
        if self.kind == EXACT and self.rows and abs(self.total() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"exact distribution of '{self.word}' sums to {self.total()!r}")

    @classmethod
    def exact(cls, word: str, probabilities: Mapping[Tokenization, float],
              canonical: Optional[Tokenization] = None, source: str = "") -> "DistributionReport":
        rows = [(tuple(tokens), float(p)) for tokens, p in probabilities.items() if p > 0.0]
        return cls(word=word, rows=tuple(rows), kind=EXACT, canonical=canonical, source=source)

    @classmethod
    def empirical(cls, word: str, counts: Counter, samples: int, seed: Optional[int] = None,
                  canonical: Optional[Tokenization] = None, source: str = "") -> "DistributionReport":
        rows = [(tuple(tokens), count / samples) for tokens, count in counts.items()]
        return cls(word=word, rows=tuple(rows), kind=EMPIRICAL, canonical=canonical,
                   samples=samples, seed=seed, source=source)

    def as_dict(self) -> Dict[Tokenization, float]:
        return dict(self.rows)

    def total(self) -> float:
        return float(sum(p for _, p in self.rows))

    def probability(self, tokens: Tokenization) -> float:
        return self.as_dict().get(tuple(tokens), 0.0)

    def canonical_probability(self) -> float:
        if self.canonical is None:
            return 0.0
        return self.probability(self.canonical)

    def outcomes(self) -> Tuple[Tokenization, ...]:
        return tuple(tokens for tokens, _ in self.rows)

    def spread(self) -> float:
        """max - min probability over the observed outcomes"""
        if not self.rows:
            return 0.0
        values = [p for _, p in self.rows]
        return max(values) - min(values)

    def distance(self, other: "DistributionReport") -> float:
        return total_variation(self.as_dict(), other.as_dict())
