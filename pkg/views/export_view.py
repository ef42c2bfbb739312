"""
Export View
UI for writing CSV and PDF analysis reports of a word list
"""

import logging
import os
import threading
from datetime import datetime
from typing import List

import flet as ft

from analysis import analyze_word, write_curves, write_reports
from errors import TokenizerError
from pdf_generator import AnalysisReportPDF

logger = logging.getLogger(__name__)


class ExportView:
    """View for report export settings and execution"""

    def __init__(self, config_manager):
        """
        Initialize export view

        Args:
            config_manager: Configuration manager instance
        """
        self.config = config_manager
        self.tokenizer = None

        # UI components
        self.words_field = None
        self.exact_switch = None
        self.curve_switch = None
        self.pdf_switch = None
        self.output_dir_field = None
        self.export_button = None
        self.progress_bar = None
        self.progress_text = None
        self.status_text = None
        self.container = None

    def build(self):
        """Build the view"""
        export_config = self.config.get_export_config()

        self.words_field = ft.TextField(
            label="Wörter",
            hint_text="durch Leerzeichen getrennt",
            multiline=True,
            min_lines=2,
            max_lines=6,
            width=500
        )
        self.exact_switch = ft.Switch(label="Exakte Verteilungen", value=True)
        self.curve_switch = ft.Switch(
            label="Kurve eindeutiger Tokenisierungen",
            value=export_config.get('include_curve', True)
        )
        self.pdf_switch = ft.Switch(label="PDF-Bericht erzeugen", value=True)
        self.output_dir_field = ft.TextField(
            label="Ausgabeverzeichnis",
            value=export_config.get('output_dir', 'reports'),
            width=500
        )
        self.export_button = ft.ElevatedButton(
            "Bericht exportieren",
            icon=ft.Icons.PICTURE_AS_PDF,
            on_click=self.start_export,
            style=ft.ButtonStyle(color=ft.Colors.WHITE, bgcolor=ft.Colors.GREEN)
        )
        self.progress_bar = ft.ProgressBar(width=500, visible=False)
        self.progress_text = ft.Text("", size=12, visible=False)
        self.status_text = ft.Text("", size=14, weight=ft.FontWeight.BOLD)

        self.container = ft.Container(
            content=ft.Column(
                [
                    ft.Text("Export", size=24, weight=ft.FontWeight.BOLD),
                    ft.Divider(),
                    self.words_field,
                    self.exact_switch,
                    self.curve_switch,
                    self.pdf_switch,
                    ft.Container(height=10),
                    self.output_dir_field,
                    ft.Container(height=20),
                    self.export_button,
                    ft.Container(height=10),
                    self.progress_bar,
                    self.progress_text,
                    ft.Container(height=10),
                    self.status_text,
                    ft.Container(height=20),
                    ft.Card(
                        content=ft.Container(
                            content=ft.Column(
                                [
                                    ft.Text("Hinweis:", weight=ft.FontWeight.BOLD),
                                    ft.Text("• Die CSV-Datei beginnt mit '# tokenization-report v1'", size=12),
                                    ft.Text("• Exakte Dropout-Verteilungen sind auf kurze Wörter beschränkt",
                                            size=12),
                                ]
                            ),
                            padding=15
                        )
                    )
                ],
                spacing=10,
                scroll=ft.ScrollMode.AUTO
            ),
            padding=20
        )
        return self.container

    def set_tokenizer(self, tokenizer):
        self.tokenizer = tokenizer

    def start_export(self, e):
        """Start the export process"""
        if self.tokenizer is None:
            self.show_error("Kein Modell geladen. Bitte zuerst ein Modell laden.")
            return
        words = list(dict.fromkeys((self.words_field.value or "").split()))
        if not words:
            self.show_error("Bitte mindestens ein Wort eingeben.")
            return

        self.export_button.disabled = True
        self.progress_bar.visible = True
        self.progress_text.visible = True
        self.status_text.value = ""
        self.container.update()

        # keeps the UI responsive while sampling
        thread = threading.Thread(target=self.export_process, args=(words,))
        thread.daemon = True
        thread.start()

    def export_process(self, words: List[str]):
        """
        Compute the reports and write them

        Args:
            words: Words to analyze
        """
        analysis_config = self.config.get_analysis_config()
        settings = self.tokenizer.config
        limit = self.config.get('lattice.enumerate_limit', 10000)
        stamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        output_dir = self.output_dir_field.value or "."

        try:
            os.makedirs(output_dir, exist_ok=True)
            results, failed = [], []
            grid = analysis_config['sample_grid'] if self.curve_switch.value else None
            for idx, word in enumerate(words):
                self.update_progress((idx + 1) / len(words), f"Analysiere '{word}' ({idx + 1}/{len(words)})...")
                try:
                    results.append(analyze_word(word, self.tokenizer, analysis_config['samples'],
                                                exact=self.exact_switch.value, limit=limit,
                                                sample_grid=grid, repeats=analysis_config['repeats']))
                except TokenizerError as ex:
                    logger.warning("skipping '%s': %s", word, ex)
                    failed.append(word)

            reports = [result.report for result in results]
            curves = {result.word: result.curve for result in results if result.curve is not None}

            csv_path = os.path.join(output_dir, f"Tokenisierung_{stamp}.csv")
            with open(csv_path, "w", encoding="utf-8", newline="\n") as f:
                write_reports(reports, f)
            if curves:
                with open(os.path.join(output_dir, f"Kurven_{stamp}.csv"), "w", encoding="utf-8", newline="\n") as f:
                    write_curves(curves, f)

            if self.pdf_switch.value:
                self.update_progress(1.0, "Erstelle PDF...")
                AnalysisReportPDF(os.path.join(output_dir, f"Tokenisierung_{stamp}.pdf")).generate(
                    reports, curves=curves,
                    efficiencies={r.word: r.efficiency for r in results if r.efficiency is not None},
                    path_counts={r.word: r.path_count for r in results},
                    settings=[("Verfahren", settings.scheme), ("Modus", settings.mode),
                              ("Rate", f"{settings.rate:g}"), ("Seed", str(settings.seed))],
                    title=self.config.get('export.title', 'Tokenisierungsanalyse'),
                    author=self.config.get('export.author', '')
                )

            message = f"✓ Bericht erstellt in {output_dir}"
            if failed:
                message += f" (nicht tokenisierbar: {' '.join(failed)})"
            self.show_success(message)

        except (OSError, TokenizerError, ValueError) as ex:
            logger.error("export failed: %s", ex)
            self.show_error(f"Fehler beim Export: {ex}")
        finally:
            self.export_button.disabled = False
            self.progress_bar.visible = False
            self.progress_text.visible = False
            self.container.update()

    def update_progress(self, value: float, text: str):
        """Update progress bar and text"""
        self.progress_bar.value = value
        self.progress_text.value = text
        self.container.update()

    def show_error(self, message: str):
        """Show error message"""
        self.status_text.value = f"✗ {message}"
        self.status_text.color = ft.Colors.RED
        self.export_button.disabled = False
        self.progress_bar.visible = False
        self.progress_text.visible = False
        self.container.update()

    def show_success(self, message: str):
        """Show success message"""
        self.status_text.value = message
        self.status_text.color = ft.Colors.GREEN
        self.container.update()
