"""Figures from fringe-scan outputs: fringes, decay, lag, spectrogram."""

from .io import SchemaError, read_matrix_dump, read_results, read_summary
from .render import KINDS, FigureRequest, render

__version__ = "0.1.0"
