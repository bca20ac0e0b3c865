"""Published full-resource results, for an optional comparison when the real corpora are supplied.

Keys are ``condition -> (accuracy, macro_f1)``; ``None`` marks an unreported cell.
"""

from __future__ import annotations

from typing import Sequence

from .evaluation import EvalReport

# general-domain gold lexica, Wikipedia embeddings
WORD_SENTIMENT = {
    "fra": {"baseline": (0.62, None), "manual": (0.84, 0.83), "unisent": (0.73, 0.72), "unisent_weighted": (0.74, 0.74)},
    "mkd": {"baseline": (0.70, None), "manual": (0.86, 0.84), "unisent": (0.80, 0.77), "unisent_weighted": (0.81, 0.78)},
    "spa": {"baseline": (0.64, None), "manual": (0.82, 0.80), "unisent": (0.78, 0.76), "unisent_weighted": (0.80, 0.77)},
    "ces": {"baseline": (0.62, None), "manual": (0.87, 0.87), "unisent": (0.82, 0.81), "unisent_weighted": (0.79, 0.78)},
    "deu": {"baseline": (0.52, None), "manual": (0.87, 0.87), "unisent": (0.82, 0.81), "unisent_weighted": (0.81, 0.80)},
}

# emoticon polarity, Twitter embeddings
EMOTICONS = {
    "fra": {"baseline": (0.62, None), "unisent": (0.73, 0.73), "unisent_weighted": (0.75, 0.74)},
    "spa": {"baseline": (0.62, None), "unisent": (0.73, 0.73), "unisent_weighted": (0.76, 0.76)},
    "deu": {"baseline": (0.62, None), "unisent": (0.80, 0.79), "unisent_weighted": (0.80, 0.79)},
    "ita": {"baseline": (0.62, None), "unisent": (0.76, 0.76), "unisent_weighted": (0.75, 0.75)},
}


def compare(reports: Sequence[EvalReport], published: dict, tolerance: float = 0.05) -> list[tuple[str, str, float, float, bool]]:
    """Rows ``(condition, metric, ours, published, within_tolerance)`` for every reported cell."""
    rows = []
    for r in reports:
        ref = published.get(r.seed_source)
        if ref is None:
            continue
        for metric, ours, theirs in (("accuracy", r.accuracy, ref[0]), ("macro_f1", r.macro_f1, ref[1])):
            if theirs is not None:
                rows.append((r.seed_source, metric, ours, theirs, abs(ours - theirs) <= tolerance))
    return rows
