"""Figure rendering for mixguide CSV artifacts."""

from .io import SchemaError, read_table
from .render import KINDS, PlotSpec, render

__version__ = "0.1.0"
