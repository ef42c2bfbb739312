"""
PDF Generator
Renders tokenization analysis reports: settings, distribution tables, diversity curves
"""

from datetime import datetime
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.units import cm, mm
from reportlab.pdfgen import canvas

from analysis import coupon_collector
from distribution import EXACT, DistributionReport

ACCENT = colors.HexColor("#E65100")
HIGHLIGHT = colors.HexColor("#FFE0B2")
ROW_HEIGHT = 5 * mm
MAX_TOKEN_CHARS = 70


class AnalysisReportPDF:
    """Generates PDF reports of tokenization distributions"""

    def __init__(self, output_path: str):
        self.output_path = output_path
        self.page_width, self.page_height = A4
        self.margin = 1.5 * cm
        self.c = canvas.Canvas(output_path, pagesize=A4)
        self.y_pos = self.page_height - self.margin

    def _footer(self):
        self.c.setFont("Helvetica", 8)
        self.c.setFillColor(colors.grey)
        self.c.drawString(self.margin, self.margin / 2, "Subword-Sampler")
        self.c.drawRightString(self.page_width - self.margin, self.margin / 2,
                               f"Seite {self.c.getPageNumber()}")

    def _new_page(self):
        self._footer()
        self.c.showPage()
        self.y_pos = self.page_height - self.margin

    def _ensure_space(self, height: float):
        if self.y_pos - height < self.margin:
            self._new_page()

    def add_title_page(self, title: str, settings: Sequence[Tuple[str, str]], author: str = ""):
        """Add title page with the tokenizer settings"""
        y_pos = self.page_height - self.margin - 1 * cm

        self.c.setFont("Helvetica-Bold", 24)
        self.c.setFillColor(colors.black)
        self.c.drawString(self.margin, y_pos, title)

        self.c.setStrokeColor(ACCENT)
        self.c.setLineWidth(2)
        self.c.line(self.margin, y_pos - 3 * mm, self.margin + 7 * cm, y_pos - 3 * mm)
        y_pos -= 1.5 * cm

        self.c.setFont("Helvetica-Bold", 12)
        self.c.drawString(self.margin, y_pos, "Einstellungen")
        y_pos -= 0.8 * cm

        details = list(settings) + [("Autor:", author), ("Datum:", datetime.now().strftime("%d.%m.%Y %H:%M"))]
        for label, value in details:
            if value:
                self.c.setFont("Helvetica-Bold", 10)
                self.c.setFillColor(colors.HexColor("#333333"))
                self.c.drawString(self.margin, y_pos, label if label.endswith(":") else label + ":")
                self.c.setFont("Helvetica", 10)
                self.c.drawString(self.margin + 4 * cm, y_pos, str(value))
                y_pos -= 0.5 * cm

        self._new_page()

    def add_distribution_table(self, report: DistributionReport, efficiency: Optional[float] = None):
        """One table per word; the canonical row is highlighted"""
        self._ensure_space(3 * ROW_HEIGHT)
        self.c.setFont("Helvetica-Bold", 12)
        self.c.setFillColor(colors.black)
        self.c.drawString(self.margin, self.y_pos, report.word)
        kind = "exakt" if report.kind == EXACT else f"empirisch, N={report.samples}"
        subtitle = f"{kind}, {len(report.rows)} Tokenisierungen"
        if efficiency is not None:
            subtitle += f", Shannon-Effizienz ohne kanonische Form {efficiency:.3f}"
        self.c.setFont("Helvetica", 8)
        self.c.setFillColor(colors.grey)
        self.c.drawString(self.margin, self.y_pos - 4 * mm, subtitle)
        self.y_pos -= 1 * cm

        width = self.page_width - 2 * self.margin
        for tokens, probability in report.rows:
            self._ensure_space(ROW_HEIGHT)
            if report.canonical is not None and tokens == report.canonical:
                self.c.setFillColor(HIGHLIGHT)
                self.c.rect(self.margin, self.y_pos - 1.5 * mm, width, ROW_HEIGHT, stroke=0, fill=1)
            self.c.setFillColor(colors.black)
            self.c.setFont("Courier", 9)
            self.c.drawString(self.margin + 2 * mm, self.y_pos, " ".join(tokens)[:MAX_TOKEN_CHARS])
            self.c.setFont("Helvetica", 9)
            self.c.drawRightString(self.margin + width - 2 * mm, self.y_pos, f"{probability:.6f}")
            self.y_pos -= ROW_HEIGHT
        self.y_pos -= 0.5 * cm

    def add_curve_chart(self, word: str, curve: Mapping[int, float], paths: Optional[int] = None):
        """Mean unique tokenizations over the sample grid, with the uniform reference when known"""
        height = 6 * cm
        width = self.page_width - 2 * self.margin - 1 * cm
        self._ensure_space(height + 1.5 * cm)
        self.c.setFont("Helvetica-Bold", 11)
        self.c.setFillColor(colors.black)
        self.c.drawString(self.margin, self.y_pos, f"Eindeutige Tokenisierungen: {word}")
        self.y_pos -= 0.5 * cm

        x0 = self.margin + 1 * cm
        y0 = self.y_pos - height
        grid = sorted(curve)
        if not grid:
            return
        reference = {n: coupon_collector(paths, n) for n in grid} if paths else {}
        top = max(list(curve.values()) + list(reference.values()) + [1.0])
        span = max(grid[-1] - grid[0], 1)

        def point(n: int, value: float) -> Tuple[float, float]:
            return x0 + (n - grid[0]) / span * width, y0 + value / top * height

        self.c.setStrokeColor(colors.grey)
        self.c.setLineWidth(0.5)
        self.c.line(x0, y0, x0 + width, y0)
        self.c.line(x0, y0, x0, y0 + height)
        self.c.setFont("Helvetica", 7)
        self.c.setFillColor(colors.grey)
        self.c.drawRightString(x0 - 1 * mm, y0 + height - 2 * mm, f"{top:.1f}")
        self.c.drawString(x0, y0 - 3 * mm, str(grid[0]))
        self.c.drawRightString(x0 + width, y0 - 3 * mm, f"N = {grid[-1]}")

        for values, color in ((reference, colors.grey), (curve, ACCENT)):
            points = [point(n, values[n]) for n in grid if n in values]
            self.c.setStrokeColor(color)
            self.c.setLineWidth(1.2)
            for (xa, ya), (xb, yb) in zip(points, points[1:]):
                self.c.line(xa, ya, xb, yb)
        self.y_pos = y0 - 1 * cm

    def add_efficiency_summary(self, efficiencies: Mapping[str, float]):
        self._ensure_space(2 * ROW_HEIGHT)
        self.c.setFont("Helvetica-Bold", 12)
        self.c.setFillColor(colors.black)
        self.c.drawString(self.margin, self.y_pos, "Shannon-Effizienz ohne kanonische Form")
        self.y_pos -= 0.8 * cm
        for word, value in efficiencies.items():
            self._ensure_space(ROW_HEIGHT)
            self.c.setFont("Helvetica", 9)
            self.c.drawString(self.margin, self.y_pos, word)
            self.c.drawRightString(self.page_width - self.margin, self.y_pos, f"{value:.4f}")
            self.y_pos -= ROW_HEIGHT

    def save(self):
        self._footer()
        self.c.save()

    def generate(self, reports: List[DistributionReport], curves: Optional[Dict[str, Mapping[int, float]]] = None,
                 efficiencies: Optional[Dict[str, float]] = None,
                 settings: Sequence[Tuple[str, str]] = (), title: str = "Tokenisierungsanalyse",
                 author: str = "", path_counts: Optional[Dict[str, int]] = None) -> str:
        """
        Generate complete PDF report

        Args:
            reports: One distribution per word
            curves: Unique-count curves by word
            efficiencies: Shannon efficiency (canonical excluded) by word
            settings: (label, value) pairs shown on the title page
            title: Report title
            author: Author line of the title page
            path_counts: Lattice path counts used for the uniform reference curve

        Returns:
            Path of the written file
        """
        curves = curves or {}
        efficiencies = efficiencies or {}
        path_counts = path_counts or {}

        self.add_title_page(title, settings, author)
        for report in reports:
            self.add_distribution_table(report, efficiencies.get(report.word))
        for word, curve in curves.items():
            self.add_curve_chart(word, curve, path_counts.get(word))
        if efficiencies:
            self.add_efficiency_summary(efficiencies)

        self.save()
        return self.output_path
