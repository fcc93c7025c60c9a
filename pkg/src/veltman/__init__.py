"""Veltman-semantics model checking and frame correspondence for interpretability logic."""

__version__ = "0.1.0"
