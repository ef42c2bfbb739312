import io
import json
import os

import pytest

from analysis import REPORT_VERSION, read_reports
from cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def run(tmp_path, monkeypatch):
    """main() with an isolated config file and environment"""
    for name in list(os.environ):
        if name.startswith("SUBWORD_"):
            monkeypatch.delenv(name)
    config = str(tmp_path / "subword_config.json")

    def invoke(*argv):
        return main(["--config", config, *argv])

    return invoke


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestTrain:
    def test_train_then_tokenize(self, run, tmp_path, capsys):
        corpus = _write(tmp_path / "corpus.txt", "abbc abbc\nabbc\n")
        model_dir = str(tmp_path / "model")
        assert run("train", corpus, "--merges", "3", "--output", model_dir) == EXIT_OK
        assert "Merges: 3" in capsys.readouterr().out

        text = _write(tmp_path / "input.txt", "abbc abbc\nab\n")
        output = tmp_path / "output.txt"
        assert run("tokenize", "--model", model_dir, "--input", text, "--output", str(output)) == EXIT_OK
        assert output.read_text(encoding="utf-8") == "abbc abbc\nab\n"
        assert "Zeilen: 2" in capsys.readouterr().err

    def test_empty_corpus(self, run, tmp_path, capsys):
        corpus = _write(tmp_path / "corpus.txt", "\n  \n")
        assert run("train", corpus, "--output", str(tmp_path / "model")) == EXIT_DOMAIN
        assert "Fehler" in capsys.readouterr().err

    def test_corrupt_model(self, run, tmp_path):
        model_dir = tmp_path / "model"
        model_dir.mkdir()
        _write(model_dir / "merges.txt", "#version: 1\na b c\n")
        _write(model_dir / "vocab.txt", "a\nb\n")
        text = _write(tmp_path / "input.txt", "ab\n")
        assert run("tokenize", "--model", str(model_dir), "--input", text) == EXIT_DOMAIN


class TestTokenize:
    ARGS = ("--builtin", "ababc", "--scheme", "maxmatch", "--mode", "uniform", "--rate", "0.5", "--seed", "7")

    def _tokenize(self, run, tmp_path, name, *extra):
        text = _write(tmp_path / "input.txt", "ababc abab cab\n" * 300)
        output = tmp_path / name
        assert run("tokenize", *self.ARGS, "--input", text, "--output", str(output), *extra) == EXIT_OK
        return output.read_bytes()

    def test_repeatable_and_worker_independent(self, run, tmp_path):
        first = self._tokenize(run, tmp_path, "first.txt")
        second = self._tokenize(run, tmp_path, "second.txt")
        parallel = self._tokenize(run, tmp_path, "parallel.txt", "--workers", "2")
        assert first == second == parallel
        assert len(set(first.decode("utf-8").splitlines())) > 1

    def test_seed_from_environment(self, run, tmp_path, monkeypatch):
        text = _write(tmp_path / "input.txt", "ababc abab cab\n" * 50)
        outputs = []
        for name, seed in (("a.txt", "3"), ("b.txt", "3")):
            monkeypatch.setenv("SUBWORD_TOKENIZE_SEED", seed)
            output = tmp_path / name
            assert run("tokenize", "--builtin", "ababc", "--scheme", "maxmatch", "--mode", "uniform",
                       "--rate", "1", "--input", text, "--output", str(output)) == EXIT_OK
            outputs.append(output.read_bytes())
        assert outputs[0] == outputs[1]

    def test_zero_rate_matches_deterministic(self, run, tmp_path, monkeypatch):
        text = _write(tmp_path / "input.txt", "abbc abbc abbc\n" * 200)

        def tokenize(name, *extra):
            output = tmp_path / name
            assert run("tokenize", "--builtin", "abbc", "--input", text, "--output", str(output), *extra) == EXIT_OK
            return output.read_bytes()

        deterministic = tokenize("deterministic.txt")
        assert deterministic == b"ab #bc ab #bc ab #bc\n" * 200
        assert tokenize("flags.txt", "--mode", "dropout", "--rate", "0") == deterministic
        monkeypatch.setenv("SUBWORD_TOKENIZE_MODE", "dropout")
        monkeypatch.setenv("SUBWORD_TOKENIZE_RATE", "0")
        assert tokenize("environment.txt") == deterministic
        monkeypatch.delenv("SUBWORD_TOKENIZE_RATE")
        assert tokenize("default_rate.txt") != deterministic

    def test_zero_rate_from_config_file(self, run, tmp_path):
        config = tmp_path / "subword_config.json"
        config.write_text(json.dumps({"tokenize": {"mode": "dropout", "rate": 0.0}}), encoding="utf-8")
        text = _write(tmp_path / "input.txt", "abbc abbc abbc\n" * 200)
        output = tmp_path / "output.txt"
        assert run("tokenize", "--builtin", "abbc", "--input", text, "--output", str(output)) == EXIT_OK
        assert output.read_bytes() == b"ab #bc ab #bc ab #bc\n" * 200

    def test_rejection_rate_reported_for_any_worker_count(self, run, tmp_path, capsys):
        text = _write(tmp_path / "input.txt", "ababc\n" * 400)
        reported = []
        for workers in ("1", "2"):
            assert run("tokenize", "--builtin", "ababc", "--scheme", "maxmatch", "--mode", "uniform", "--rate", "1",
                       "--sampler", "rejection", "--workers", workers, "--input", text,
                       "--output", str(tmp_path / "output.txt")) == EXIT_OK
            err = capsys.readouterr().err
            reported.append([line for line in err.splitlines() if line.startswith("Annahmequote")])
        assert len(reported[0]) == 1
        assert reported[0] == reported[1]

    def test_untokenizable_line(self, run, tmp_path, capsys):
        text = _write(tmp_path / "input.txt", "ab\nabx\n")
        output = tmp_path / "output.txt"
        code = run("tokenize", "--builtin", "ababc", "--scheme", "maxmatch", "--input", text,
                   "--output", str(output))
        assert code == EXIT_DOMAIN
        assert output.read_text(encoding="utf-8") == "ab\n\n"
        assert "Zeile 2" in capsys.readouterr().err

    def test_invalid_utf8(self, run, tmp_path):
        path = tmp_path / "input.txt"
        path.write_bytes(b"ab\n\xff\xfe\n")
        assert run("tokenize", "--builtin", "ababc", "--scheme", "maxmatch", "--input", str(path)) == EXIT_DOMAIN


class TestUsage:
    def test_unknown_mode(self, run):
        with pytest.raises(SystemExit) as info:
            run("tokenize", "--mode", "bogus")
        assert info.value.code == EXIT_USAGE

    def test_rate_without_stochastic_mode(self, run, tmp_path):
        text = _write(tmp_path / "input.txt", "ab\n")
        assert run("tokenize", "--builtin", "abbc", "--mode", "deterministic", "--rate", "0.5",
                   "--input", text) == EXIT_USAGE

    def test_missing_model(self, run, tmp_path):
        text = _write(tmp_path / "input.txt", "ab\n")
        assert run("tokenize", "--input", text) == EXIT_USAGE


class TestSample:
    def test_enumerate(self, run, capsys):
        assert run("sample", "ababc", "--builtin", "ababc", "--scheme", "maxmatch", "--enumerate") == EXIT_OK
        captured = capsys.readouterr()
        assert len(captured.out.splitlines()) == 6
        assert "Pfade: 6" in captured.err

    def test_dump(self, run, capsys):
        assert run("sample", "ababc", "--builtin", "ababc", "--scheme", "maxmatch", "--dump") == EXIT_OK
        assert capsys.readouterr().out.startswith("# word=ababc paths=6")

    def test_walks_draw_requested_count(self, run, capsys):
        for walk in ("biased", "rejection", "exact"):
            assert run("sample", "ababc", "--builtin", "ababc", "--scheme", "maxmatch",
                       "--walk", walk, "-n", "25") == EXIT_OK
            lines = capsys.readouterr().out.splitlines()
            assert len(lines) == 25
            assert all("".join(t.lstrip("#") for t in line.split()) == "ababc" for line in lines)


class TestAnalyze:
    def test_exact_dropout_report(self, run, tmp_path):
        report = tmp_path / "report.csv"
        assert run("analyze", "abbc", "--builtin", "abbc", "--mode", "dropout", "--rate", "0.1", "--exact",
                   "--report", str(report)) == EXIT_OK
        text = report.read_text(encoding="utf-8")
        assert text.startswith(REPORT_VERSION + "\n")
        rows = read_reports(io.StringIO(text))
        probabilities = {tokens: p for _, tokens, p, _ in rows}
        assert probabilities[("ab", "#bc")] == pytest.approx(0.81, abs=1e-12)
        assert probabilities[("a", "#b", "#bc")] == pytest.approx(0.009, abs=1e-12)
        assert probabilities[("a", "#bb", "#c")] == pytest.approx(0.09, abs=1e-12)
        assert [tokens for _, tokens, _, canonical in rows if canonical] == [("ab", "#bc")]

    def test_empty_wordlist(self, run, tmp_path):
        wordlist = _write(tmp_path / "words.txt", "")
        report = tmp_path / "report.csv"
        assert run("analyze", "--builtin", "abbc", "--wordlist", wordlist, "--report", str(report)) == EXIT_OK
        assert report.read_text(encoding="utf-8").splitlines() == [
            REPORT_VERSION, "word,tokenization,probability,is_canonical"]

    def test_empirical_report_with_curve(self, run, tmp_path, capsys):
        report = tmp_path / "report.tsv"
        curve = tmp_path / "curve.tsv"
        code = run("analyze", "ababc", "--builtin", "ababc", "--scheme", "maxmatch", "--mode", "uniform",
                   "--rate", "1", "-n", "3000", "--format", "tsv", "--report", str(report),
                   "--curve", str(curve), "--grid", "1,6", "--repeats", "20")
        assert code == EXIT_OK
        rows = read_reports(io.StringIO(report.read_text(encoding="utf-8")), delimiter="\t")
        assert len(rows) == 6
        assert all(p == pytest.approx(1 / 6, abs=0.04) for _, _, p, _ in rows)
        assert curve.read_text(encoding="utf-8").splitlines()[0] == "word\tsamples\tmean_unique"
        err = capsys.readouterr().err
        assert "Shannon-Effizienz" in err
        assert "Nicht-kanonischer Anteil" in err
        assert "TV zur exakten Verteilung" in err

    def test_untokenizable_word(self, run, tmp_path):
        report = tmp_path / "report.csv"
        code = run("analyze", "ab", "abx", "--builtin", "ababc", "--scheme", "maxmatch", "--exact",
                   "--report", str(report))
        assert code == EXIT_DOMAIN
        assert len(read_reports(io.StringIO(report.read_text(encoding="utf-8")))) == 1


    def test_exact_report_over_path_limit(self, run, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("SUBWORD_LATTICE_ENUMERATE_LIMIT", "5")
        report = tmp_path / "report.csv"
        code = run("analyze", "ababc", "ab", "--builtin", "ababc", "--scheme", "maxmatch", "--mode", "uniform",
                   "--rate", "1", "--exact", "--report", str(report))
        assert code == EXIT_DOMAIN
        err = capsys.readouterr().err
        assert "Zu groß für einen exakten Bericht: ababc" in err
        assert "Nicht tokenisierbar" not in err
        rows = read_reports(io.StringIO(report.read_text(encoding="utf-8")))
        assert {word for word, _, _, _ in rows} == {"ab"}


class TestVerify:
    def test_builtin_checks_pass(self, run, capsys):
        assert run("verify", "-n", "20000") == EXIT_OK
        out = capsys.readouterr().out
        assert "FEHLER" not in out
        assert "bpe-dropout-exakt" in out
        assert "uniform-anteil" in out

    def test_p_grid_from_environment(self, run, monkeypatch, capsys):
        monkeypatch.setenv("SUBWORD_ANALYSIS_P_GRID", "0.2,0.4")
        assert run("verify", "-n", "20000") == EXIT_OK
        assert "2 Gitterpunkte" in capsys.readouterr().out

    def test_empty_p_grid(self, run, monkeypatch):
        monkeypatch.setenv("SUBWORD_ANALYSIS_P_GRID", "")
        assert run("verify", "-n", "100") == EXIT_USAGE

    def test_broken_model_fails(self, run, tmp_path):
        assert run("verify", "-n", "20000", "--model", str(tmp_path / "fehlt")) == EXIT_DOMAIN
