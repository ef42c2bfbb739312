"""
Subword Sampler CLI
Command-line surface: train, tokenize, sample, analyze, verify
"""

import argparse
import logging
import sys
from contextlib import ExitStack
from fractions import Fraction
from typing import IO, Callable, List, Optional, Sequence, Tuple

import numpy as np

from analysis import (ABABC_WORD, ABB_WORD, ABBC_WORD, DEFAULT_P_GRID, WordAnalysis, ababc_vocab, abb_vocab,
                      abbc_closed_form, abbc_model, analyze_word, coupon_collector, lemma_grid_check,
                      noncanonical_rate, renyi_efficiency, total_variation, uniform_reference, unique_count_curve,
                      write_curves, write_reports)
from bpe import COIN_POLICIES, bpe_encode, exact_bpe_dropout_dist, load_model, save_model, train_bpe
from config_manager import DEFAULT_CONFIG_FILE, ConfigManager
from corpus import decode_lines, ingest_file, split_words
from errors import ConfigError, OracleLimitError, PathLimitError, TokenizerError
from lattice import (biased_sample, build_lattice, count_paths, dump_lattice, enumerate_paths,
                     exact_uniform_sample, path_probabilities, unbiased_sample)
from maxmatch import derive_marked_vocab, exact_maxmatch_dropout_dist, load_vocab
from pdf_generator import AnalysisReportPDF
from regularizer import (DETERMINISTIC, MAXMATCH, MODES, SAMPLERS, SCHEMES, SCOPES, SOURCE, TARGET, UNIFORM,
                         StochasticTokenizer, StochasticTokenizerConfig, resolve_rate, tokenize_corpus)

logger = logging.getLogger("subword")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

BUILTINS = ("abbc", "abb", "ababc")
WALKS = ("biased", "rejection", "exact", "tokenizer")
VERIFY_SAMPLES = 60000


def _configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _pick(value, config: ConfigManager, key_path: str):
    """CLI flag wins over environment and config file"""
    return value if value is not None else config.get(key_path)


def _open_output(path: Optional[str], stack: ExitStack) -> IO[str]:
    if path is None or path == "-":
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8", newline="\n"))


def _read_lines(path: Optional[str], stack: ExitStack):
    if path is None or path == "-":
        return decode_lines(sys.stdin.buffer)
    return decode_lines(stack.enter_context(open(path, "rb")))


def _add_model_args(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("Modell")
    group.add_argument("--model", help="BPE-Modellverzeichnis (merges.txt, vocab.txt)")
    group.add_argument("--vocab", help="Vokabulardatei für MaxMatch, eine Zeile pro Token")
    group.add_argument("--builtin", choices=BUILTINS, help="eingebaute Konstruktion statt Modelldateien")
    group.add_argument("--marker", help="Markierung wortinterner Token (Standard '#')")


def _add_tokenizer_args(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("Tokenisierer")
    group.add_argument("--scheme", choices=SCHEMES)
    group.add_argument("--mode", choices=MODES)
    group.add_argument("--rate", type=float, help="Dropout-Wahrscheinlichkeit bzw. Anteil uniformer Stichproben")
    group.add_argument("--seed", type=int)
    group.add_argument("--entropy-seed", action="store_true", help="Seed aus Systementropie statt festem Wert")
    group.add_argument("--scope", choices=SCOPES)
    group.add_argument("--sampler", choices=SAMPLERS, help="uniformer Sampler: exakt oder Verwerfung")
    group.add_argument("--coin-policy", choices=COIN_POLICIES)
    group.add_argument("--max-rejections", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subword-sampler",
                                     description="Deterministische und stochastische Subwort-Tokenisierung")
    parser.add_argument("--config", default=DEFAULT_CONFIG_FILE, help="Konfigurationsdatei (JSON)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug-Ausgaben und Fortschrittsbalken")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="BPE-Merges lernen")
    train.add_argument("corpus", help="Korpusdatei oder '-' für stdin")
    train.add_argument("--merges", type=int, help="Anzahl der Merges")
    train.add_argument("--output", required=True, help="Ausgabeverzeichnis des Modells")
    train.add_argument("--end-of-word", help="Wortende-Symbol, z.B. '</w>'")
    train.add_argument("--workers", type=int, default=1)
    train.set_defaults(handler=cmd_train)

    tokenize = sub.add_parser("tokenize", help="Korpus zeilenweise tokenisieren")
    tokenize.add_argument("--input", help="Eingabedatei (Standard stdin)")
    tokenize.add_argument("--output", help="Ausgabedatei (Standard stdout)")
    tokenize.add_argument("--side", choices=(SOURCE, TARGET), default=SOURCE)
    tokenize.add_argument("--workers", type=int)
    tokenize.add_argument("--alpha", type=float, help="Rényi-Ordnung der Effizienz")
    _add_model_args(tokenize)
    _add_tokenizer_args(tokenize)
    tokenize.set_defaults(handler=cmd_tokenize)

    sample = sub.add_parser("sample", help="Gitter eines Wortes ausgeben oder Pfade ziehen")
    sample.add_argument("word")
    sample.add_argument("-n", "--samples", type=int, default=10)
    sample.add_argument("--walk", choices=WALKS, default="tokenizer")
    sample.add_argument("--dump", action="store_true", help="Gitter im Textformat ausgeben")
    sample.add_argument("--enumerate", action="store_true", help="alle Pfade mit Vorschlagswahrscheinlichkeit")
    _add_model_args(sample)
    _add_tokenizer_args(sample)
    sample.set_defaults(handler=cmd_sample)

    analyze = sub.add_parser("analyze", help="Verteilungen der Tokenisierungen messen")
    analyze.add_argument("words", nargs="*")
    analyze.add_argument("--wordlist", help="Datei mit Wörtern (Leerzeichen-getrennt)")
    analyze.add_argument("--exact", action="store_true", help="exakte statt empirischer Verteilung")
    analyze.add_argument("-n", "--samples", type=int)
    analyze.add_argument("--report", help="CSV-Bericht (Standard stdout)")
    analyze.add_argument("--format", choices=("csv", "tsv"))
    analyze.add_argument("--curve", help="CSV der Kurve eindeutiger Tokenisierungen")
    analyze.add_argument("--grid", help="Stichprobengrößen der Kurve, kommagetrennt")
    analyze.add_argument("--repeats", type=int)
    analyze.add_argument("--pdf", help="PDF-Bericht schreiben")
    _add_model_args(analyze)
    _add_tokenizer_args(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    verify = sub.add_parser("verify", help="eingebaute Konstruktionen prüfen")
    verify.add_argument("--model", help="zusätzlich ein Modellverzeichnis laden")
    verify.add_argument("--seed", type=int)
    verify.add_argument("-n", "--samples", type=int, default=VERIFY_SAMPLES)
    verify.set_defaults(handler=cmd_verify)
    return parser


def tokenizer_config(args: argparse.Namespace, config: ConfigManager) -> StochasticTokenizerConfig:
    """Merge flags, environment and config file into tokenizer settings"""
    seed = _pick(args.seed, config, "tokenize.seed")
    if args.entropy_seed:
        if args.seed is not None:
            raise ConfigError("--seed und --entropy-seed schließen sich aus")
        seed = int(np.random.SeedSequence().entropy)
        print(f"Seed: {seed}", file=sys.stderr)
    mode = _pick(args.mode, config, "tokenize.mode")
    scheme = _pick(args.scheme, config, "tokenize.scheme")
    rate = args.rate
    if rate is None and mode != DETERMINISTIC:
        rate = config.get("tokenize.rate")
    return StochasticTokenizerConfig(
        scheme=scheme,
        mode=mode,
        rate=resolve_rate(scheme, mode, rate),
        seed=int(seed),
        scope=_pick(args.scope, config, "tokenize.scope"),
        sampler=_pick(args.sampler, config, "tokenize.sampler"),
        coin_policy=_pick(args.coin_policy, config, "tokenize.coin_policy"),
        max_rejections=int(_pick(args.max_rejections, config, "tokenize.max_rejections")),
    )


def open_tokenizer(settings: StochasticTokenizerConfig, builtin: Optional[str] = None,
                   model_dir: Optional[str] = None, vocab_path: Optional[str] = None,
                   marker: str = "#") -> StochasticTokenizer:
    """
    Load model files (or a built-in construction) into a tokenizer

    Args:
        settings: Tokenizer settings
        builtin: One of BUILTINS, replaces the model files
        model_dir: BPE model directory
        vocab_path: MaxMatch vocabulary file
        marker: Marker of word-internal tokens

    Returns:
        Configured StochasticTokenizer
    """
    bpe_model = vocab = None
    if builtin == "abbc":
        bpe_model = abbc_model()
    elif builtin == "abb":
        vocab = abb_vocab()
    elif builtin == "ababc":
        vocab = ababc_vocab()
    elif builtin:
        raise ConfigError(f"Unbekannte Konstruktion '{builtin}'")
    else:
        if model_dir:
            bpe_model = load_model(model_dir)
        if vocab_path:
            vocab = load_vocab(vocab_path, marker)
        if bpe_model is None and vocab is None:
            raise ConfigError("Kein Modell angegeben (--model, --vocab oder --builtin)")
    if vocab is None and marker != "#":
        vocab = derive_marked_vocab(bpe_model, marker)
    return StochasticTokenizer(settings, bpe_model=bpe_model, vocab=vocab)


def build_tokenizer(args: argparse.Namespace, config: ConfigManager) -> StochasticTokenizer:
    return open_tokenizer(tokenizer_config(args, config), builtin=args.builtin,
                          model_dir=_pick(args.model, config, "model.bpe_dir"),
                          vocab_path=_pick(args.vocab, config, "model.vocab_path"),
                          marker=_pick(args.marker, config, "model.marker"))


def cmd_train(args: argparse.Namespace, config: ConfigManager) -> int:
    """Learn BPE merges from a corpus and write the model directory"""
    merges = _pick(args.merges, config, "model.merges")
    end_of_word = _pick(args.end_of_word, config, "model.end_of_word") or None
    counts = ingest_file(args.corpus, workers=args.workers)
    model = train_bpe(counts, merges, end_of_word=end_of_word, progress=args.verbose)
    merges_path, _ = save_model(model, args.output)
    print(f"Vokabulargröße: {len(model.vocab)}, Merges: {len(model.merges)} -> {merges_path.parent}")
    return EXIT_OK


def cmd_tokenize(args: argparse.Namespace, config: ConfigManager) -> int:
    """Tokenize a corpus line by line and print summary statistics to stderr"""
    tokenizer = build_tokenizer(args, config)
    workers = int(_pick(args.workers, config, "tokenize.workers"))
    alpha = float(_pick(args.alpha, config, "analysis.alpha"))
    with ExitStack() as stack:
        lines = _read_lines(args.input, stack)
        output = _open_output(args.output, stack)
        summary = tokenize_corpus(lines, tokenizer, output, side=args.side, workers=workers,
                                  chunk_lines=int(config.get("tokenize.chunk_lines")),
                                  progress=args.verbose)

    counters = summary.counters
    print(f"Zeilen: {summary.lines}  Wörter: {counters.words}  Gezogen: {counters.sampled}  "
          f"Nicht-kanonisch: {counters.noncanonical}", file=sys.stderr)
    print(f"Token: {summary.tokens}  Typen: {summary.types}", file=sys.stderr)
    if summary.token_counts and len(tokenizer.vocab) >= 2:
        efficiency = renyi_efficiency(summary.token_counts, len(tokenizer.vocab), alpha)
        print(f"Rényi-Effizienz (α={alpha:g}): {efficiency.efficiency:.4f}", file=sys.stderr)
    if summary.rejection.draws:
        print(f"Annahmequote: {summary.rejection.acceptance_rate:.4f}  Versuche: {summary.rejection.draws}",
              file=sys.stderr)
    for error in summary.errors:
        print(f"Zeile {error.line_number}: {error.message}", file=sys.stderr)
    return EXIT_DOMAIN if summary.errors else EXIT_OK


def cmd_sample(args: argparse.Namespace, config: ConfigManager) -> int:
    """Dump, enumerate or sample the tokenizations of one word"""
    tokenizer = build_tokenizer(args, config)
    lattice = tokenizer.lattice(args.word)
    print(f"Pfade: {count_paths(lattice)}  p_min: {lattice.pmin}", file=sys.stderr)
    if args.dump:
        sys.stdout.write(dump_lattice(lattice))
        return EXIT_OK
    if args.enumerate:
        limit = int(config.get("lattice.enumerate_limit"))
        probabilities = path_probabilities(lattice, limit)
        for tokens in enumerate_paths(lattice, limit):
            print(f"{' '.join(tokens)}\t{probabilities[tokens]}")
        return EXIT_OK

    rng = np.random.default_rng(tokenizer.config.seed)
    draw: Callable[[], Tuple[str, ...]] = {
        "biased": lambda: biased_sample(lattice, rng).tokenization,
        "rejection": lambda: unbiased_sample(lattice, rng, tokenizer.config.max_rejections),
        "exact": lambda: exact_uniform_sample(lattice, rng),
        "tokenizer": lambda: tokenizer(args.word, rng),
    }[args.walk]
    for _ in range(args.samples):
        print(" ".join(draw()))
    return EXIT_OK


def _analysis_words(args: argparse.Namespace, stack: ExitStack) -> List[str]:
    words = list(args.words)
    if args.wordlist:
        for line in _read_lines(args.wordlist, stack):
            words.extend(split_words(line))
    return list(dict.fromkeys(words))


def cmd_analyze(args: argparse.Namespace, config: ConfigManager) -> int:
    """Write distribution reports (and optional curves) for a list of words"""
    tokenizer = build_tokenizer(args, config)
    settings = tokenizer.config
    samples = int(_pick(args.samples, config, "analysis.samples"))
    delimiter = "\t" if _pick(args.format, config, "analysis.format") == "tsv" else ","
    limit = int(config.get("lattice.enumerate_limit"))
    grid = None
    if args.curve or args.pdf:
        grid = [int(n) for n in args.grid.split(",")] if args.grid else config.get("analysis.sample_grid")
    repeats = int(_pick(args.repeats, config, "analysis.repeats"))

    results: List[WordAnalysis] = []
    failed = []
    too_large = []
    with ExitStack() as stack:
        for word in _analysis_words(args, stack):
            try:
                results.append(analyze_word(word, tokenizer, samples, exact=args.exact, limit=limit,
                                            sample_grid=grid, repeats=repeats))
            except (OracleLimitError, PathLimitError) as e:
                too_large.append(word)
                print(f"{word}: {e}", file=sys.stderr)
            except TokenizerError as e:
                failed.append(word)
                print(f"{word}: {e}", file=sys.stderr)

        reports = [result.report for result in results]
        curves = {result.word: result.curve for result in results if result.curve is not None}
        written = write_reports(reports, _open_output(args.report, stack), delimiter)
        if args.curve:
            write_curves(curves, _open_output(args.curve, stack), delimiter)

    for result in results:
        line = f"{result.word}: Nicht-kanonischer Anteil {result.noncanonical:.4f}"
        if result.efficiency is not None:
            line += f"  Shannon-Effizienz ohne kanonische Form {result.efficiency:.4f}"
        if result.reference_distance is not None:
            line += f"  TV zur exakten Verteilung {result.reference_distance:.4f}"
        print(line, file=sys.stderr)
    if args.pdf:
        AnalysisReportPDF(args.pdf).generate(
            reports, curves=curves,
            efficiencies={r.word: r.efficiency for r in results if r.efficiency is not None},
            path_counts={r.word: r.path_count for r in results},
            settings=_settings_table(settings, samples, args.exact),
            title=config.get("export.title"), author=config.get("export.author"))
    logger.info("wrote %d report rows for %d words", written, len(reports))
    if too_large:
        print(f"Zu groß für einen exakten Bericht: {' '.join(too_large)}", file=sys.stderr)
    if failed:
        print(f"Nicht tokenisierbar: {' '.join(failed)}", file=sys.stderr)
    return EXIT_DOMAIN if failed or too_large else EXIT_OK


def _settings_table(settings: StochasticTokenizerConfig, samples: int, exact: bool) -> List[Tuple[str, str]]:
    return [
        ("Verfahren", settings.scheme),
        ("Modus", settings.mode),
        ("Rate", f"{settings.rate:g}"),
        ("Seed", str(settings.seed)),
        ("Verteilung", "exakt" if exact else f"empirisch, N={samples}"),
        ("Münzregel", settings.coin_policy),
        ("Uniformer Sampler", settings.sampler),
    ]


def verification_checks(seed: int, samples: int, p_grid: Sequence[float] = DEFAULT_P_GRID
                        ) -> List[Tuple[str, bool, str]]:
    """
    Built-in constructed instances checked against their closed forms

    Args:
        seed: Seed of every sampling check
        samples: Draws per sampling check
        p_grid: Dropout probabilities of the exact and non-uniformity checks

    Returns:
        List of (check name, passed, detail)
    """
    results = []

    worst = 0.0
    same_support = True
    for p in p_grid:
        exact = exact_bpe_dropout_dist(ABBC_WORD, abbc_model(), p).as_dict()
        expected = abbc_closed_form(p)
        same_support = same_support and set(exact) == set(expected)
        worst = max([worst] + [abs(exact.get(t, 0.0) - q) for t, q in expected.items()])
    results.append(("bpe-dropout-exakt", same_support and worst <= 1e-12, f"max. Abweichung {worst:.2e}"))

    verdict = lemma_grid_check("bpe", ABBC_WORD, p_grid=p_grid)
    results.append(("bpe-nicht-uniform", verdict.in_scope and verdict.non_uniform,
                    f"{verdict.verdict}, {len(verdict.rows)} Gitterpunkte"))

    verdict = lemma_grid_check("maxmatch", ABB_WORD, p_grid=p_grid)
    canonical_gap = max(abs(row.canonical_probability - (1.0 - row.p)) for row in verdict.rows)
    results.append(("maxmatch-nicht-uniform", verdict.in_scope and verdict.non_uniform and canonical_gap <= 1e-12,
                    f"{verdict.verdict}, kanonisch max. Abweichung {canonical_gap:.2e}"))

    lattice = build_lattice(ABABC_WORD, ababc_vocab())
    paths = enumerate_paths(lattice)
    ranked = len(set(paths)) == count_paths(lattice) == 6
    results.append(("gitter-pfade", ranked and lattice.pmin == Fraction(1, 8),
                    f"{count_paths(lattice)} Pfade, p_min {lattice.pmin}"))

    uniform = uniform_reference(ABABC_WORD, ababc_vocab()).as_dict()
    for name, draw in (("verwerfung-uniform", unbiased_sample), ("exakt-uniform", exact_uniform_sample)):
        rng = np.random.default_rng(seed)
        counts = {}
        for _ in range(samples):
            tokens = draw(lattice, rng)
            counts[tokens] = counts.get(tokens, 0) + 1
        tv = total_variation(uniform, {t: c / samples for t, c in counts.items()})
        results.append((name, tv < 0.02, f"TV {tv:.4f} bei N={samples}"))

    # a quarter of the draws sample uniformly over six paths, five of them non-canonical
    mixed = StochasticTokenizer(StochasticTokenizerConfig(scheme=MAXMATCH, mode=UNIFORM, rate=0.25, seed=seed),
                                vocab=ababc_vocab())
    share = noncanonical_rate(ABABC_WORD, mixed, mixed.canonical(ABABC_WORD), samples, seed)
    results.append(("uniform-anteil", abs(share - 0.25 * 5 / 6) <= 0.015,
                    f"nicht-kanonisch {share:.4f} vs {0.25 * 5 / 6:.4f}"))

    model = abbc_model()
    chars = bpe_encode(ABBC_WORD, model, 1.0) == tuple(ABBC_WORD)
    same = bpe_encode(ABBC_WORD, model, 0.0) == bpe_encode(ABBC_WORD, model)
    zero = exact_maxmatch_dropout_dist(ABB_WORD, abb_vocab(), 0.0)
    results.append(("dropout-grenzfaelle", chars and same and len(zero.rows) == 1, "p=0 und p=1"))

    half = renyi_efficiency({"a": 1, "b": 1}, 4, 1.0).efficiency
    renyi2 = renyi_efficiency({"a": 1, "b": 3}, 4, 2.0).efficiency
    results.append(("renyi-effizienz", abs(half - 0.5) < 1e-12 and abs(renyi2 - 0.3387) < 1e-3,
                    f"{half:.4f} / {renyi2:.4f}"))

    rng_curve = unique_count_curve(ABABC_WORD, lambda w, rng: exact_uniform_sample(lattice, rng), [6], 1000, seed)
    expected = coupon_collector(6, 6)
    results.append(("coupon-collector", abs(rng_curve[6] - expected) <= 0.15,
                    f"{rng_curve[6]:.3f} vs {expected:.3f}"))
    return results


def cmd_verify(args: argparse.Namespace, config: ConfigManager) -> int:
    """Run the built-in checks and print a pass/fail table"""
    seed = int(_pick(args.seed, config, "tokenize.seed"))
    p_grid = [float(p) for p in config.get("analysis.p_grid")]
    if not p_grid:
        raise ConfigError("analysis.p_grid ist leer")
    results = verification_checks(seed, args.samples, p_grid)
    if args.model:
        try:
            model = load_model(args.model)
            results.append(("modell-laden", True, f"{len(model.merges)} Merges"))
        except (TokenizerError, OSError) as e:
            results.append(("modell-laden", False, str(e)))

    width = max(len(name) for name, _, _ in results)
    for name, passed, detail in results:
        print(f"{name:<{width}}  {'OK    ' if passed else 'FEHLER'}  {detail}")
    failed = [name for name, passed, _ in results if not passed]
    if failed:
        print(f"Fehlgeschlagen: {', '.join(failed)}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = ConfigManager(args.config)
        return args.handler(args, config)
    except ConfigError as e:
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TokenizerError, OSError, ValueError) as e:
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
