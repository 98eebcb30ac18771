"""Figure rendering for rmd-lab artifacts (secondary component)."""

from .render import (FIGURE_IDS, FigureInputError, FigureSpec, page_value,
                     render)

__version__ = "0.1.0"

__all__ = ["FIGURE_IDS", "FigureInputError", "FigureSpec", "page_value",
           "render", "__version__"]
