"""Utility functions."""

from .file_handler import FileHandler, load_inputs
from .report_templates import ReportTemplates

__all__ = ["FileHandler", "load_inputs", "ReportTemplates"]
