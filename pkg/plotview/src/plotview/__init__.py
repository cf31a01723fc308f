"""Static figure rendering for kwmspec CLI artifacts."""

from .render import KINDS, FigureSpec, render, render_to_file
from .schemas import (
    SchemaError,
    load_json,
    parse_margin_report,
    parse_periodogram_csv,
    parse_photons,
    parse_spectrum,
    unwrap,
)

__all__ = [
    "KINDS", "FigureSpec", "render", "render_to_file", "SchemaError",
    "load_json", "unwrap", "parse_spectrum", "parse_margin_report",
    "parse_periodogram_csv", "parse_photons",
]

__version__ = "0.1.0"
