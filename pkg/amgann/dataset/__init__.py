"""
Corpus generation, storage and analysis.
"""
