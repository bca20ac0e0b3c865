"""Label projection through alignment links and significance-based seed extraction.

Each alignment link whose source token carries a seed polarity becomes one
labeled event ``(target_word, polarity)``.  For every target word and
polarity a 2x2 contingency table over labeled events is tested with a
Pearson chi-squared statistic; Benjamini-Hochberg controls the false
discovery rate across all tests, and only positively associated words
are kept.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .align import AlignmentLink
from .corpus import LangDomainTag, ParallelCorpus
from .lexicon import NEG, POS, LexiconEntry, Polarity, SeedLexicon

FDR_METHOD = "benjamini-hochberg"


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class Contingency:
    a: int  # word and label
    b: int  # word, other label
    c: int  # other word, label
    d: int  # other word, other label

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    @property
    def expected_a(self) -> float:
        return (self.a + self.b) * (self.a + self.c) / self.total

    @property
    def direction(self) -> int:
        """+1 when ``a`` exceeds its expectation under independence."""
        return 1 if self.a * self.total > (self.a + self.b) * (self.a + self.c) else -1


@dataclass
class AssociationTable:
    tag: LangDomainTag | None
    rows: dict[tuple[str, Polarity], Contingency]
    total: int

    def __getitem__(self, key) -> Contingency:
        return self.rows[key]

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class SeedCandidate:
    word: str
    polarity: Polarity
    chi2_stat: float
    p_value: float
    direction: int


def label_events(links: Iterable[AlignmentLink], corpus: ParallelCorpus, seeds: SeedLexicon) -> list[tuple[str, Polarity]]:
    """Replace aligned source tokens by their seed polarity; NULL and unlabeled links yield nothing."""
    events = []
    for link in links:
        if link.source_pos is None:
            continue
        pair = corpus.pairs[link.pair_index]
        src = pair.source_tokens[link.source_pos]
        entry = seeds.entries.get(src)
        if entry is not None:
            events.append((pair.target_tokens[link.target_pos], entry.polarity))
    return events


def count_events(events: Sequence[tuple[str, Polarity]], tag=None) -> AssociationTable:
    if not events:
        raise ProjectionError("no seed coverage: no alignment link reaches a seed word")
    n = len(events)
    joint = Counter(events)
    per_word = Counter(w for w, _ in events)
    per_label = Counter(p for _, p in events)
    rows = {}
    for word in sorted(per_word):
        for pol in (POS, NEG):
            a = joint[(word, pol)]
            b = per_word[word] - a
            c = per_label[pol] - a
            rows[(word, pol)] = Contingency(a, b, c, n - a - b - c)
    return AssociationTable(tag, rows, n)


def substitute_and_count(links: Iterable[AlignmentLink], corpus: ParallelCorpus, seeds: SeedLexicon) -> AssociationTable:
    return count_events(label_events(links, corpus, seeds), corpus.target_tag)


def chi2_two_sided(a: int, b: int, c: int, d: int) -> tuple[float, float]:
    """Pearson chi-squared on a 2x2 table, no continuity correction, 1 dof.

    A zero row or column margin gives ``(0.0, 1.0)``.
    """
    if min(a, b, c, d) < 0:
        raise ValueError(f"negative count in table {(a, b, c, d)}")
    n = a + b + c + d
    if n < 1:
        raise ValueError("contingency table is empty")
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        return 0.0, 1.0
    # integer numerator keeps the statistic exact up to the final division
    stat = n * (a * d - b * c) ** 2 / denom
    return stat, math.erfc(math.sqrt(stat / 2.0))


def benjamini_hochberg(p_values: Sequence[float], q: float = 0.05) -> list[bool]:
    """Step-up BH: flag every hypothesis ranked at or below the largest k with p_(k) <= k*q/m."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    m = len(p_values)
    if m == 0:
        return []
    if any(not 0 <= p <= 1 for p in p_values):
        raise ValueError("p-values must lie in [0, 1]")
    order = sorted(range(m), key=lambda i: p_values[i])
    cutoff = 0
    for rank, i in enumerate(order, 1):
        if p_values[i] <= rank * q / m:
            cutoff = rank
    flags = [False] * m
    for i in order[:cutoff]:
        flags[i] = True
    return flags


def score_associations(table: AssociationTable) -> list[SeedCandidate]:
    out = []
    for (word, pol), cell in table.rows.items():
        stat, p = chi2_two_sided(cell.a, cell.b, cell.c, cell.d)
        out.append(SeedCandidate(word, pol, stat, p, cell.direction))
    return out


def extract_lexicon(table: AssociationTable, q: float = 0.05) -> SeedLexicon:
    candidates = score_associations(table)
    flags = benjamini_hochberg([c.p_value for c in candidates], q)
    best: dict[str, SeedCandidate] = {}
    tied: set[str] = set()
    for cand, significant in zip(candidates, flags):
        if not significant or cand.direction != 1:
            continue
        prev = best.get(cand.word)
        if prev is None or cand.chi2_stat > prev.chi2_stat:
            best[cand.word] = cand
            tied.discard(cand.word)
        elif cand.chi2_stat == prev.chi2_stat:
            tied.add(cand.word)
    entries = {w: LexiconEntry(c.polarity, 1.0) for w, c in sorted(best.items()) if w not in tied}
    return SeedLexicon(table.tag, entries)
