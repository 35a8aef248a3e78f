"""Offline figure generation from toruskit CSV artifacts."""

from .figures import EmptyInputError, FigureRequest, SchemaError, build_figure, render

__version__ = "0.1.0"
