"""Command-line entry points for majdyn."""
