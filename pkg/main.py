"""
Tokenisierungs-Explorer
Desktop front end of the subword sampler
"""

import logging

import flet as ft

from config_manager import ConfigManager
from views.model_view import ModelView
from views.sampling_view import SamplingView
from views.analysis_view import AnalysisView
from views.export_view import ExportView

APP_TITLE = "Tokenisierungs-Explorer"


class TokenizerExplorerApp:
    """Main application class"""

    def __init__(self, page: ft.Page):
        """
        Initialize application

        Args:
            page: Flet page instance
        """
        self.page = page
        self.page.title = APP_TITLE
        self.page.window_width = 1000
        self.page.window_height = 700
        self.page.window_resizable = True

        self.config = ConfigManager()
        self.tokenizer = None

        self.model_view = None
        self.sampling_view = None
        self.analysis_view = None
        self.export_view = None

        self.navigation_rail = None
        self.content_container = None

        self.setup_ui()

    def setup_ui(self):
        """Setup the user interface"""
        self.model_view = ModelView(self.config, on_model_loaded=self.on_model_loaded)
        self.sampling_view = SamplingView(self.config)
        self.analysis_view = AnalysisView(self.config)
        self.export_view = ExportView(self.config)

        self.navigation_rail = ft.NavigationRail(
            selected_index=0,
            label_type=ft.NavigationRailLabelType.ALL,
            min_width=100,
            min_extended_width=200,
            destinations=[
                ft.NavigationRailDestination(
                    icon=ft.Icons.FOLDER_OPEN_OUTLINED,
                    selected_icon=ft.Icons.FOLDER_OPEN,
                    label="Modell"
                ),
                ft.NavigationRailDestination(
                    icon=ft.Icons.CASINO_OUTLINED,
                    selected_icon=ft.Icons.CASINO,
                    label="Stichproben"
                ),
                ft.NavigationRailDestination(
                    icon=ft.Icons.BAR_CHART_OUTLINED,
                    selected_icon=ft.Icons.BAR_CHART,
                    label="Verteilung"
                ),
                ft.NavigationRailDestination(
                    icon=ft.Icons.FILE_DOWNLOAD_OUTLINED,
                    selected_icon=ft.Icons.FILE_DOWNLOAD,
                    label="Export"
                ),
            ],
            on_change=self.on_navigation_change
        )

        self.content_container = ft.Container(content=self.model_view.build(), expand=True)

        app_bar = ft.AppBar(
            title=ft.Text(APP_TITLE, size=20, weight=ft.FontWeight.BOLD),
            center_title=False,
            bgcolor=ft.Colors.SURFACE_CONTAINER_HIGHEST,
            actions=[
                ft.IconButton(ft.Icons.INFO_OUTLINE, tooltip="Über", on_click=self.show_about_dialog)
            ]
        )

        self.page.appbar = app_bar
        self.page.add(
            ft.Row(
                [self.navigation_rail, ft.VerticalDivider(width=1), self.content_container],
                expand=True
            )
        )

    def on_navigation_change(self, e):
        """Handle navigation rail selection change"""
        views = [self.model_view, self.sampling_view, self.analysis_view, self.export_view]
        view = views[e.control.selected_index]
        # views are built lazily on first visit
        content = view.build() if view.container is None else view.container
        self.content_container.content = content
        self.page.update()

    def on_model_loaded(self, tokenizer):
        """
        Hand a freshly loaded tokenizer to all views

        Args:
            tokenizer: Loaded StochasticTokenizer
        """
        self.tokenizer = tokenizer
        for view in (self.sampling_view, self.analysis_view, self.export_view):
            view.set_tokenizer(tokenizer)

        self.page.snack_bar = ft.SnackBar(content=ft.Text("✓ Modell geladen"), bgcolor=ft.Colors.GREEN)
        self.page.snack_bar.open = True
        self.page.update()

    def show_about_dialog(self, e):
        """Show about dialog"""
        dialog = ft.AlertDialog(
            title=ft.Text(f"Über {APP_TITLE}"),
            content=ft.Column(
                [
                    ft.Text("Version 1.0", weight=ft.FontWeight.BOLD),
                    ft.Container(height=10),
                    ft.Text("Deterministische und stochastische Subwort-Tokenisierung:"),
                    ft.Text("BPE, MaxMatch, Dropout und uniforme Stichproben."),
                    ft.Container(height=10),
                    ft.Text("Features:", weight=ft.FontWeight.BOLD),
                    ft.Text("• Tokenisierungsgitter mit exakter Pfadzählung", size=12),
                    ft.Text("• Exakte Dropout-Verteilungen", size=12),
                    ft.Text("• CSV- und PDF-Berichte", size=12),
                ],
                tight=True
            ),
            actions=[ft.TextButton("Schließen", on_click=lambda _: self.close_dialog())]
        )
        self.page.dialog = dialog
        dialog.open = True
        self.page.update()

    def close_dialog(self):
        """Close the current dialog"""
        if self.page.dialog:
            self.page.dialog.open = False
            self.page.update()


def main(page: ft.Page):
    """
    Main entry point

    Args:
        page: Flet page instance
    """
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    TokenizerExplorerApp(page)


if __name__ == "__main__":
    ft.app(target=main)
