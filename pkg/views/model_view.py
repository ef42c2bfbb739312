"""
Model View
UI for loading a BPE model or MaxMatch vocabulary and choosing the tokenizer settings
"""

import logging
from typing import Callable

import flet as ft

from cli import BUILTINS, open_tokenizer
from errors import TokenizerError
from regularizer import MODES, SAMPLERS, SCHEMES, StochasticTokenizerConfig, resolve_rate

logger = logging.getLogger(__name__)


def _rate_text(rate) -> str:
    return "" if rate is None else str(rate)


class ModelView:
    """View for model files and tokenizer settings"""

    def __init__(self, config_manager, on_model_loaded: Callable = None):
        """
        Initialize model view

        Args:
            config_manager: Configuration manager instance
            on_model_loaded: Callback receiving the loaded StochasticTokenizer
        """
        self.config = config_manager
        self.on_model_loaded = on_model_loaded
        self.tokenizer = None

        self.model_dir_field = None
        self.vocab_field = None
        self.builtin_dropdown = None
        self.scheme_dropdown = None
        self.mode_dropdown = None
        self.sampler_dropdown = None
        self.rate_field = None
        self.seed_field = None
        self.status_text = None
        self.container = None

    def build(self):
        """Build the view"""
        model_config = self.config.get_model_config()
        tokenize_config = self.config.get_tokenize_config()

        self.model_dir_field = ft.TextField(
            label="BPE-Modellverzeichnis",
            value=model_config.get('bpe_dir', ''),
            hint_text="enthält merges.txt und vocab.txt",
            width=500
        )
        self.vocab_field = ft.TextField(
            label="MaxMatch-Vokabular",
            value=model_config.get('vocab_path', ''),
            hint_text="eine Zeile pro Token, wortinterne Token mit '#'",
            width=500
        )
        self.builtin_dropdown = ft.Dropdown(
            label="Eingebaute Konstruktion",
            value="",
            options=[ft.dropdown.Option("", "keine")] + [ft.dropdown.Option(name) for name in BUILTINS],
            width=300
        )
        self.scheme_dropdown = ft.Dropdown(
            label="Verfahren",
            value=tokenize_config.get('scheme', 'bpe'),
            options=[ft.dropdown.Option(name) for name in SCHEMES],
            width=200
        )
        self.mode_dropdown = ft.Dropdown(
            label="Modus",
            value=tokenize_config.get('mode', 'deterministic'),
            options=[ft.dropdown.Option(name) for name in MODES],
            width=200
        )
        self.sampler_dropdown = ft.Dropdown(
            label="Uniformer Sampler",
            value=tokenize_config.get('sampler', 'exact'),
            options=[ft.dropdown.Option(name) for name in SAMPLERS],
            width=200
        )
        self.rate_field = ft.TextField(
            label="Rate",
            value=_rate_text(tokenize_config.get('rate')),
            hint_text="Standard je Verfahren",
            width=150,
            keyboard_type=ft.KeyboardType.NUMBER
        )
        self.seed_field = ft.TextField(
            label="Seed",
            value=str(tokenize_config.get('seed', 1234)),
            width=150,
            keyboard_type=ft.KeyboardType.NUMBER
        )
        self.status_text = ft.Text("", size=14, weight=ft.FontWeight.BOLD)

        self.container = ft.Container(
            content=ft.Column(
                [
                    ft.Text("Modell und Tokenisierer", size=24, weight=ft.FontWeight.BOLD),
                    ft.Divider(),
                    self.model_dir_field,
                    self.vocab_field,
                    self.builtin_dropdown,
                    ft.Container(height=10),
                    ft.Row([self.scheme_dropdown, self.mode_dropdown, self.sampler_dropdown], spacing=10),
                    ft.Row([self.rate_field, self.seed_field], spacing=10),
                    ft.Container(height=20),
                    ft.Row(
                        [
                            ft.ElevatedButton("Laden", icon=ft.Icons.UPLOAD_FILE, on_click=self.load_model),
                            ft.ElevatedButton("Speichern", icon=ft.Icons.SAVE, on_click=self.save_config)
                        ],
                        spacing=10
                    ),
                    ft.Container(height=10),
                    self.status_text
                ],
                spacing=10,
                scroll=ft.ScrollMode.AUTO
            ),
            padding=20
        )
        return self.container

    def current_settings(self) -> StochasticTokenizerConfig:
        """Tokenizer settings from the form fields"""
        tokenize_config = self.config.get_tokenize_config()
        return StochasticTokenizerConfig(
            scheme=self.scheme_dropdown.value,
            mode=self.mode_dropdown.value,
            rate=resolve_rate(self.scheme_dropdown.value, self.mode_dropdown.value, self._entered_rate()),
            seed=int(self.seed_field.value or 1234),
            scope=tokenize_config.get('scope', 'both'),
            sampler=self.sampler_dropdown.value,
            coin_policy=tokenize_config.get('coin_policy', 'persistent')
        )

    def _entered_rate(self):
        """Rate typed into the form, None when left empty"""
        text = (self.rate_field.value or "").strip()
        return float(text) if text else None

    def load_model(self, e):
        """Load the model and hand the tokenizer to the other views"""
        try:
            self.tokenizer = open_tokenizer(
                self.current_settings(),
                builtin=self.builtin_dropdown.value or None,
                model_dir=self.model_dir_field.value or None,
                vocab_path=self.vocab_field.value or None,
                marker=self.config.get('model.marker', '#')
            )
        except ValueError:
            self.show_status("✗ Rate und Seed müssen Zahlen sein.", ft.Colors.RED)
            return
        except (TokenizerError, OSError) as ex:
            logger.warning("model load failed: %s", ex)
            self.show_status(f"✗ {ex}", ft.Colors.RED)
            return

        self.show_status(f"✓ Geladen: {len(self.tokenizer.vocab)} Vokabulareinträge", ft.Colors.GREEN)
        if self.on_model_loaded:
            self.on_model_loaded(self.tokenizer)

    def save_config(self, e):
        """Save model and tokenizer settings"""
        try:
            settings = self.current_settings()
        except (ValueError, TokenizerError) as ex:
            self.show_status(f"✗ {ex}", ft.Colors.RED)
            return
        self.config.set('model.bpe_dir', self.model_dir_field.value)
        self.config.set('model.vocab_path', self.vocab_field.value)
        self.config.set('tokenize.scheme', settings.scheme)
        self.config.set('tokenize.mode', settings.mode)
        self.config.set('tokenize.rate', self._entered_rate())
        self.config.set('tokenize.seed', settings.seed)
        self.config.set('tokenize.sampler', settings.sampler)
        if self.config.save_config():
            self.show_status("✓ Konfiguration gespeichert", ft.Colors.GREEN)
        else:
            self.show_status("✗ Fehler beim Speichern", ft.Colors.RED)

    def show_status(self, message: str, color):
        self.status_text.value = message
        self.status_text.color = color
        if self.container:
            self.container.update()
