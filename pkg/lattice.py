"""
Tokenization Lattice
Position-indexed DAG of all tokenizations of a word and samplers over its paths
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from distribution import Tokenization
from errors import ModelFormatError, PathLimitError, RejectionLimitError, UntokenizableWordError
from maxmatch import PositionClass, SubwordVocab

logger = logging.getLogger(__name__)

DEFAULT_MAX_REJECTIONS = 10 ** 7
DEFAULT_ENUMERATE_LIMIT = 10000


@dataclass(frozen=True)
class LatticeEdge:
    start: int
    end: int
    surface: str
    position_class: PositionClass
    token: str


@dataclass(frozen=True)
class TokenizationLattice:
    """
    Acyclic graph over character positions 0..len(word)

    Node 0 is the initial state and len(word) the final one. Only nodes on a
    complete source-to-sink path are kept, so every path is a tokenization
    and every tokenization is a path.
    """

    word: str
    edges: Tuple[LatticeEdge, ...]
    marker: str = "#"
    out_edges: Dict[int, Tuple[LatticeEdge, ...]] = field(init=False, repr=False, compare=False)
    suffix_counts: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple(sorted(self.edges, key=lambda e: (e.start, e.end, e.surface)))
        grouped: Dict[int, List[LatticeEdge]] = defaultdict(list)
        for edge in edges:
            grouped[edge.start].append(edge)
        out_edges = {node: tuple(group) for node, group in grouped.items()}

        # suffix path counts in reverse topological (descending position) order
        counts = {self.final: 1}
        for node in sorted(out_edges, reverse=True):
            counts[node] = sum(counts.get(edge.end, 0) for edge in out_edges[node])

        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "out_edges", out_edges)
        object.__setattr__(self, "suffix_counts", counts)

    @property
    def source(self) -> int:
        return 0

    @property
    def final(self) -> int:
        return len(self.word)

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.out_edges) | {self.final}))

    def out_degree(self, node: int) -> int:
        return len(self.out_edges.get(node, ()))

    @property
    def out_degrees(self) -> Dict[int, int]:
        return {node: len(edges) for node, edges in self.out_edges.items()}

    @property
    def pmin(self) -> Fraction:
        """Product of 1/deg over all non-final nodes"""
        product = 1
        for degree in self.out_degrees.values():
            product *= degree
        return Fraction(1, product)

    def path_count(self) -> int:
        return self.suffix_counts.get(self.source, 0)


@dataclass(frozen=True)
class SampledPath:
    tokenization: Tokenization
    proposal_probability: Fraction
    nodes: Tuple[int, ...] = ()


@dataclass
class RejectionStats:
    """Diagnostic counters of the rejection sampler"""

    draws: int = 0
    rejections: int = 0
    accepted: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.draws if self.draws else 0.0

    def add(self, other: "RejectionStats"):
        self.draws += other.draws
        self.rejections += other.rejections
        self.accepted += other.accepted

    def since(self, earlier: "RejectionStats") -> "RejectionStats":
        """Counts accumulated after the snapshot `earlier`"""
        return RejectionStats(self.draws - earlier.draws, self.rejections - earlier.rejections,
                              self.accepted - earlier.accepted)


def build_lattice(word: str, vocab: SubwordVocab) -> TokenizationLattice:
    """
    Build the pruned tokenization lattice of a word

    Args:
        word: Non-empty word
        vocab: Position-classed vocabulary

    Returns:
        TokenizationLattice holding exactly the valid tokenizations

    Raises:
        UntokenizableWordError: if no path leads from 0 to len(word)
    """
    if not word:
        raise ValueError("cannot build a lattice for the empty word")

    n = len(word)
    raw: List[LatticeEdge] = []
    for i in range(n):
        cls = PositionClass.at(i)
        surfaces = vocab.surfaces(cls)
        for j in range(i + 1, min(n, i + vocab.max_len) + 1):
            surface = word[i:j]
            if surface in surfaces:
                raw.append(LatticeEdge(i, j, surface, cls, vocab.render(surface, cls)))

    reachable = {0}
    for edge in sorted(raw, key=lambda e: e.start):
        if edge.start in reachable:
            reachable.add(edge.end)
    if n not in reachable:
        stuck = max(reachable)
        raise UntokenizableWordError(word, word[stuck], stuck)

    coreachable = {n}
    for edge in sorted(raw, key=lambda e: e.start, reverse=True):
        if edge.end in coreachable:
            coreachable.add(edge.start)

    edges = tuple(e for e in raw if e.start in reachable and e.end in coreachable)
    lattice = TokenizationLattice(word=word, edges=edges, marker=vocab.marker)
    logger.debug("lattice for '%s': %d nodes, %d edges, %d paths",
                 word, len(lattice.nodes), len(edges), lattice.path_count())
    return lattice


def count_paths(lattice: TokenizationLattice) -> int:
    """Exact number of source-to-sink paths (arbitrary precision)"""
    return lattice.path_count()


def path_at(lattice: TokenizationLattice, rank: int) -> Tokenization:
    """
    The rank-th path in lexicographic order of edge choices

    Args:
        lattice: Tokenization lattice
        rank: 0 <= rank < count_paths(lattice)

    Returns:
        Tokenization of that path
    """
    if not 0 <= rank < lattice.path_count():
        raise IndexError(f"rank {rank} outside 0..{lattice.path_count() - 1}")
    tokens = []
    node = lattice.source
    while node != lattice.final:
        for edge in lattice.out_edges[node]:
            below = lattice.suffix_counts[edge.end]
            if rank < below:
                tokens.append(edge.token)
                node = edge.end
                break
            rank -= below
    return tuple(tokens)


def _walk(lattice: TokenizationLattice, node: int, prefix: List[str]) -> Iterator[Tokenization]:
    if node == lattice.final:
        yield tuple(prefix)
        return
    for edge in lattice.out_edges[node]:
        prefix.append(edge.token)
        yield from _walk(lattice, edge.end, prefix)
        prefix.pop()


def enumerate_paths(lattice: TokenizationLattice, limit: int = DEFAULT_ENUMERATE_LIMIT) -> List[Tokenization]:
    """
    All tokenizations in lexicographic order of edge choices

    Raises:
        PathLimitError: carrying the true count when it exceeds limit
    """
    total = lattice.path_count()
    if total > limit:
        raise PathLimitError(limit, total)
    return list(_walk(lattice, lattice.source, []))


def uniform_below(n: int, rng: np.random.Generator) -> int:
    """Uniform integer in [0, n) for arbitrarily large n"""
    if n <= 0:
        raise ValueError("n must be positive")
    if n < 2 ** 62:
        return int(rng.integers(n))
    bits = n.bit_length()
    size = (bits + 7) // 8
    while True:
        value = int.from_bytes(rng.bytes(size), "little") >> (size * 8 - bits)
        if value < n:
            return value


def biased_sample(lattice: TokenizationLattice, rng: np.random.Generator) -> SampledPath:
    """
    Random walk choosing out-edges uniformly

    Returns:
        SampledPath whose proposal_probability is the product of 1/deg over the
        visited non-final nodes
    """
    tokens = []
    visited = []
    probability = Fraction(1)
    node = lattice.source
    while node != lattice.final:
        edges = lattice.out_edges[node]
        edge = edges[int(rng.integers(len(edges)))] if len(edges) > 1 else edges[0]
        tokens.append(edge.token)
        visited.append(node)
        probability /= len(edges)
        node = edge.end
    return SampledPath(tuple(tokens), probability, tuple(visited))


def unbiased_sample(lattice: TokenizationLattice, rng: np.random.Generator,
                    max_rejections: int = DEFAULT_MAX_REJECTIONS,
                    stats: Optional[RejectionStats] = None) -> Tokenization:
    """
    Uniform tokenization by rejection from biased_sample

    A draw of proposal probability p is accepted with probability pmin / p,
    which is 1 / (product of the degrees of the nodes the walk skipped).

    Args:
        lattice: Tokenization lattice
        rng: Random generator
        max_rejections: Give up after this many rejected draws
        stats: Optional counters updated in place

    Raises:
        RejectionLimitError: if max_rejections is exceeded
    """
    degrees = lattice.out_degrees
    rejections = 0
    while True:
        sample = biased_sample(lattice, rng)
        skipped = 1
        visited = set(sample.nodes)
        for node, degree in degrees.items():
            if node not in visited:
                skipped *= degree
        if stats is not None:
            stats.draws += 1
        if skipped == 1 or uniform_below(skipped, rng) == 0:
            if stats is not None:
                stats.accepted += 1
            return sample.tokenization

        rejections += 1
        if stats is not None:
            stats.rejections += 1
        if rejections > max_rejections:
            raise RejectionLimitError(lattice.word, rejections)


def exact_uniform_sample(lattice: TokenizationLattice, rng: np.random.Generator) -> Tokenization:
    """Uniform tokenization in one pass: draw a rank, then unrank it"""
    return path_at(lattice, uniform_below(lattice.path_count(), rng))


def path_probabilities(lattice: TokenizationLattice,
                       limit: int = DEFAULT_ENUMERATE_LIMIT) -> Dict[Tokenization, Fraction]:
    """Analytic biased_sample probability (product of 1/deg) of every path"""
    total = lattice.path_count()
    if total > limit:
        raise PathLimitError(limit, total)
    result: Dict[Tokenization, Fraction] = {}

    def visit(node: int, prefix: List[str], probability: Fraction):
        if node == lattice.final:
            result[tuple(prefix)] = probability
            return
        edges = lattice.out_edges[node]
        for edge in edges:
            prefix.append(edge.token)
            visit(edge.end, prefix, probability / len(edges))
            prefix.pop()

    visit(lattice.source, [], Fraction(1))
    return result


def dump_lattice(lattice: TokenizationLattice) -> str:
    """Text dump: a header line, then one 'from to surface class' line per edge"""
    lines = [f"# word={lattice.word} paths={lattice.path_count()} marker={lattice.marker}"]
    lines.extend(f"{e.start} {e.end} {e.surface} {e.position_class.value}" for e in lattice.edges)
    return "\n".join(lines) + "\n"


def parse_lattice(text: str, source: str = "<lattice>") -> TokenizationLattice:
    """Inverse of dump_lattice"""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ModelFormatError(source, 1, "Kopfzeile fehlt")
    header = dict(item.split("=", 1) for item in lines[0][2:].split(" ") if "=" in item)
    word = header.get("word", "")
    marker = header.get("marker", "#")

    edges = []
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split(" ")
        if len(fields) != 4:
            raise ModelFormatError(source, number, f"erwartet 'von bis Oberfläche Klasse', gefunden {line!r}")
        start, end, surface, cls = int(fields[0]), int(fields[1]), fields[2], PositionClass(fields[3])
        if word[start:end] != surface:
            raise ModelFormatError(source, number, f"'{surface}' passt nicht zu {start}..{end}")
        token = surface if cls is PositionClass.INITIAL else marker + surface
        edges.append(LatticeEdge(start, end, surface, cls, token))

    lattice = TokenizationLattice(word=word, edges=tuple(edges), marker=marker)
    if "paths" in header and int(header["paths"]) != lattice.path_count():
        raise ModelFormatError(source, 1, "Pfadanzahl stimmt nicht mit den Kanten überein")
    return lattice
