"""
Views package for the tokenization explorer
"""

from .model_view import ModelView
from .sampling_view import SamplingView
from .analysis_view import AnalysisView
from .export_view import ExportView

__all__ = ['ModelView', 'SamplingView', 'AnalysisView', 'ExportView']
