"""majdyn: majority dynamics on finite graphs."""

__version__ = "0.1.0"
