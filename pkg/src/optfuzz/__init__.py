"""White-box compiler fuzzing driven by optimization source code."""

__version__ = "0.1.0"
