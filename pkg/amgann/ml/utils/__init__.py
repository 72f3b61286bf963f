"""
Pooling, normalization and corpus loading for the surrogate.
"""

from .pooling import NormalizationMode, NormalizedView, View, normalize, pooling, view_of

__all__ = ['NormalizationMode', 'NormalizedView', 'View', 'normalize', 'pooling', 'view_of']
