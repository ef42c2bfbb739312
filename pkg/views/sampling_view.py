"""
Sampling View
UI for inspecting the lattice of a word and drawing tokenizations
"""

import flet as ft
import numpy as np

from errors import TokenizerError
from lattice import biased_sample, count_paths, exact_uniform_sample, unbiased_sample

WALKS = {
    "tokenizer": "Tokenisierer",
    "biased": "Zufallsweg (verzerrt)",
    "rejection": "Verwerfung (uniform)",
    "exact": "Exakt (uniform)",
}


class SamplingView:
    """View for single-word sampling"""

    def __init__(self, config_manager):
        self.config = config_manager
        self.tokenizer = None

        self.word_field = None
        self.samples_field = None
        self.walk_dropdown = None
        self.info_text = None
        self.samples_list = None
        self.container = None

    def build(self):
        """Build the view"""
        self.word_field = ft.TextField(label="Wort", width=300, on_submit=self.draw_samples)
        self.samples_field = ft.TextField(
            label="Anzahl",
            value="10",
            width=120,
            keyboard_type=ft.KeyboardType.NUMBER
        )
        self.walk_dropdown = ft.Dropdown(
            label="Sampler",
            value="tokenizer",
            options=[ft.dropdown.Option(key, label) for key, label in WALKS.items()],
            width=250
        )
        self.info_text = ft.Text("", size=14)
        self.samples_list = ft.ListView(expand=True, spacing=2, height=350)

        self.container = ft.Container(
            content=ft.Column(
                [
                    ft.Text("Stichproben", size=24, weight=ft.FontWeight.BOLD),
                    ft.Divider(),
                    ft.Row([self.word_field, self.samples_field, self.walk_dropdown], spacing=10),
                    ft.ElevatedButton("Ziehen", icon=ft.Icons.CASINO, on_click=self.draw_samples),
                    ft.Container(height=10),
                    self.info_text,
                    self.samples_list
                ],
                spacing=10
            ),
            padding=20
        )
        return self.container

    def set_tokenizer(self, tokenizer):
        self.tokenizer = tokenizer

    def draw_samples(self, e):
        """Show canonical form, path count and the drawn tokenizations"""
        if self.tokenizer is None:
            self.show_info("✗ Bitte zuerst ein Modell laden.", ft.Colors.RED)
            return
        word = (self.word_field.value or "").strip()
        if not word:
            self.show_info("✗ Bitte ein Wort eingeben.", ft.Colors.RED)
            return
        try:
            count = max(1, int(self.samples_field.value or 10))
        except ValueError:
            self.show_info("✗ Anzahl muss eine Zahl sein.", ft.Colors.RED)
            return

        try:
            lattice = self.tokenizer.lattice(word)
            rng = np.random.default_rng(self.tokenizer.config.seed)
            walk = self.walk_dropdown.value
            samples = []
            for _ in range(count):
                if walk == "biased":
                    samples.append(biased_sample(lattice, rng).tokenization)
                elif walk == "rejection":
                    samples.append(unbiased_sample(lattice, rng, self.tokenizer.config.max_rejections))
                elif walk == "exact":
                    samples.append(exact_uniform_sample(lattice, rng))
                else:
                    samples.append(self.tokenizer(word, rng))
        except TokenizerError as ex:
            self.show_info(f"✗ {ex}", ft.Colors.RED)
            return

        canonical = self.tokenizer.canonical(word)
        self.samples_list.controls = [
            ft.Text(" ".join(tokens), font_family="monospace",
                    weight=ft.FontWeight.BOLD if tokens == canonical else None)
            for tokens in samples
        ]
        self.show_info(
            f"Kanonisch: {' '.join(canonical)}    Pfade: {count_paths(lattice)}    p_min: {lattice.pmin}",
            ft.Colors.ON_SURFACE
        )

    def show_info(self, message: str, color):
        self.info_text.value = message
        self.info_text.color = color
        if self.container:
            self.container.update()
