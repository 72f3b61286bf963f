"""
AMG-ANN
Two-level algebraic multigrid whose strong threshold is picked by a
convolutional surrogate of the solver's convergence factor.
"""

__version__ = "0.1.0"
