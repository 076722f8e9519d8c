"""Integer-valued score-difference models: Skellam family, discretized
normal/Laplace, copula-coupled halves, fitting and league simulation."""

__version__ = "0.1.0"
