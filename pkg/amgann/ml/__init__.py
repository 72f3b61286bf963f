"""
Convolutional surrogate of the AMG convergence factor.
"""
