"""A linearly-typed calculus with graded confidentiality and trusted-integrity modalities."""

__version__ = "0.1.0"
