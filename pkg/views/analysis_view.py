"""
Analysis View
UI for exact and empirical tokenization distributions of one word
"""

import flet as ft

from analysis import analyze_word
from errors import TokenizerError


class AnalysisView:
    """View for the distribution table of a word"""

    def __init__(self, config_manager):
        self.config = config_manager
        self.tokenizer = None

        self.word_field = None
        self.samples_field = None
        self.exact_switch = None
        self.summary_text = None
        self.table = None
        self.container = None

    def build(self):
        """Build the view"""
        analysis_config = self.config.get_analysis_config()

        self.word_field = ft.TextField(label="Wort", width=300, on_submit=self.run_analysis)
        self.samples_field = ft.TextField(
            label="Stichproben N",
            value=str(analysis_config.get('samples', 10000)),
            width=150,
            keyboard_type=ft.KeyboardType.NUMBER
        )
        self.exact_switch = ft.Switch(label="Exakte Verteilung", value=True)
        self.summary_text = ft.Text("", size=14)
        self.table = ft.DataTable(
            columns=[
                ft.DataColumn(ft.Text("Tokenisierung")),
                ft.DataColumn(ft.Text("Wahrscheinlichkeit"), numeric=True),
                ft.DataColumn(ft.Text("kanonisch")),
            ],
            rows=[]
        )

        self.container = ft.Container(
            content=ft.Column(
                [
                    ft.Text("Verteilung", size=24, weight=ft.FontWeight.BOLD),
                    ft.Divider(),
                    ft.Row([self.word_field, self.samples_field, self.exact_switch], spacing=10),
                    ft.ElevatedButton("Berechnen", icon=ft.Icons.QUERY_STATS, on_click=self.run_analysis),
                    ft.Container(height=10),
                    self.summary_text,
                    self.table
                ],
                spacing=10,
                scroll=ft.ScrollMode.AUTO
            ),
            padding=20
        )
        return self.container

    def set_tokenizer(self, tokenizer):
        self.tokenizer = tokenizer

    def run_analysis(self, e):
        """Fill the table with the distribution of the entered word"""
        if self.tokenizer is None:
            self.show_summary("✗ Bitte zuerst ein Modell laden.", ft.Colors.RED)
            return
        word = (self.word_field.value or "").strip()
        if not word:
            return
        limit = self.config.get('lattice.enumerate_limit', 10000)
        try:
            samples = max(1, int(self.samples_field.value or 1))
            result = analyze_word(word, self.tokenizer, samples, exact=self.exact_switch.value, limit=limit)
        except ValueError:
            self.show_summary("✗ N muss eine Zahl sein.", ft.Colors.RED)
            return
        except TokenizerError as ex:
            self.show_summary(f"✗ {ex}", ft.Colors.RED)
            return

        report = result.report
        self.table.rows = [
            ft.DataRow(
                cells=[
                    ft.DataCell(ft.Text(" ".join(tokens), font_family="monospace")),
                    ft.DataCell(ft.Text(f"{probability:.6f}")),
                    ft.DataCell(ft.Text("✓" if tokens == report.canonical else "")),
                ],
                color=ft.Colors.ORANGE_100 if tokens == report.canonical else None
            )
            for tokens, probability in report.rows
        ]
        observed = sum(1 for _, probability in report.rows if probability > 0.0)
        summary = f"{observed} Tokenisierungen beobachtet, {result.path_count} Pfade im Gitter"
        if result.efficiency is not None:
            summary += f", Shannon-Effizienz ohne kanonische Form {result.efficiency:.4f}"
        if result.reference_distance is not None:
            summary += f", TV zur exakten Verteilung {result.reference_distance:.4f}"
        self.show_summary(summary, ft.Colors.ON_SURFACE)

    def show_summary(self, message: str, color):
        self.summary_text.value = message
        self.summary_text.color = color
        if self.container:
            self.container.update()
