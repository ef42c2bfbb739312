from analysis import uniform_reference, unique_count_curve
from bpe import exact_bpe_dropout_dist
from lattice import exact_uniform_sample
from pdf_generator import AnalysisReportPDF


def test_generate_writes_pdf(tmp_path, bpe_abbc, lattice_ababc):
    report = exact_bpe_dropout_dist("abbc", bpe_abbc, 0.3)
    curve = unique_count_curve("ababc", lambda word, rng: exact_uniform_sample(lattice_ababc, rng),
                               [1, 2, 5, 10], repeats=10, seed=1)
    path = AnalysisReportPDF(str(tmp_path / "bericht.pdf")).generate(
        [report], curves={"ababc": curve}, efficiencies={"abbc": 0.97},
        settings=[("Verfahren", "bpe"), ("Modus", "dropout")], path_counts={"ababc": 6})
    assert (tmp_path / "bericht.pdf").read_bytes().startswith(b"%PDF")
    assert path.endswith("bericht.pdf")


def test_many_rows_span_pages(tmp_path, vocab_ababc):
    reports = [uniform_reference("ababc", vocab_ababc)] * 40
    AnalysisReportPDF(str(tmp_path / "lang.pdf")).generate(reports)
    assert (tmp_path / "lang.pdf").stat().st_size > 0
