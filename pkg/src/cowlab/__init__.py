"""Zero-error attack analysis for coherent-one-way QKD."""

__version__ = "0.1.0"
