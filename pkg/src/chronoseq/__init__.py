"""chronoseq: generative time-token modeling of longitudinal clinical event sequences."""

__version__ = "0.1.0"
