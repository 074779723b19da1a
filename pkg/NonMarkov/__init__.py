"""
NonMarkov: memory effects of classical stochastic processes at the level of
single-time probability distributions.
"""

__version__ = "1.0.0"
