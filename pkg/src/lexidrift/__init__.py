"""Sentiment lexicon induction by annotation projection, with embedding-based domain drift weighting."""

__version__ = "0.1.0"
