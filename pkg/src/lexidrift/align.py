"""Word alignment: IBM Model 1 EM with an optional diagonal prior, plus Pharaoh I/O.

The alignment direction is source -> target: every target token is generated
by one source token (or by NULL).  With ``diagonal_tension > 0`` the
expected counts for source position ``i`` and target position ``j`` are
scaled by ``exp(-tension * |i/I - j/J|)``; NULL keeps factor 1.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ParallelCorpus

logger = logging.getLogger(__name__)

NULL = "<NULL>"


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class AlignerConfig:
    em_iterations: int = 5
    diagonal_tension: float = 0.0
    use_null: bool = True
    prob_floor: float = 1e-7

    def __post_init__(self):
        if self.em_iterations < 1:
            raise ValueError("em_iterations must be >= 1")
        if not math.isfinite(self.diagonal_tension) or self.diagonal_tension < 0:
            raise ValueError("diagonal_tension must be finite and >= 0")
        if not (0 < self.prob_floor < 1e-3):
            raise ValueError("prob_floor must lie in (0, 1e-3)")


@dataclass(frozen=True)
class AlignmentLink:
    pair_index: int
    source_pos: int | None  # None is the NULL word
    target_pos: int


class TranslationTable:
    """Lexical translation probabilities t(target | source)."""

    def __init__(self, probs: dict[str, dict[str, float]]):
        self.probs = probs

    def __contains__(self, key):
        s, t = key
        return t in self.probs.get(s, ())

    def __len__(self):
        return sum(len(row) for row in self.probs.values())

    def prob(self, source: str, target: str, floor: float = 0.0) -> float:
        return self.probs.get(source, {}).get(target, floor)

    def row(self, source: str) -> dict[str, float]:
        return self.probs.get(source, {})

    def best_target(self, source: str) -> str:
        row = self.probs[source]
        return max(sorted(row), key=row.__getitem__)

    def max_normalization_error(self) -> float:
        return max(abs(math.fsum(row.values()) - 1.0) for row in self.probs.values())

    def items(self):
        for s in sorted(self.probs):
            row = self.probs[s]
            for t in sorted(row):
                yield s, t, row[t]

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            for s, t, p in self.items():
                fh.write(f"{s}\t{t}\t{p!r}\n")

    @classmethod
    def load(cls, path) -> "TranslationTable":
        probs: dict[str, dict[str, float]] = {}
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    s, t, p = line.split("\t")
                    probs.setdefault(s, {})[t] = float(p)
                except ValueError as exc:
                    raise AlignmentError(f"{path}:{lineno}: malformed table line") from exc
        return cls(probs)


def _diag_weights(n_src: int, n_tgt: int, tension: float) -> np.ndarray:
    """(n_src, n_tgt) prior factors for real source positions."""
    if tension == 0:
        return np.ones((n_src, n_tgt))
    i = np.arange(n_src)[:, None] / n_src
    j = np.arange(n_tgt)[None, :] / n_tgt
    return np.exp(-tension * np.abs(i - j))


class _Index:
    """Flat enumeration of every (source word, target word) co-occurrence.

    Each verse pair keeps an (I', J) matrix of entry ids, where I' includes
    the NULL row (last) when NULL is enabled.
    """

    def __init__(self, corpus: ParallelCorpus, config: AlignerConfig):
        entry_ids: dict[tuple[str, str], int] = {}
        self.keys: list[tuple[str, str]] = []
        self.pair_ids: list[np.ndarray] = []
        self.pair_prior: list[np.ndarray] = []
        for pair in corpus.pairs:
            sources = list(pair.source_tokens)
            if config.use_null:
                sources.append(NULL)
            ids = np.empty((len(sources), len(pair.target_tokens)), dtype=np.int64)
            for a, s in enumerate(sources):
                for b, t in enumerate(pair.target_tokens):
                    key = (s, t)
                    k = entry_ids.get(key)
                    if k is None:
                        k = entry_ids[key] = len(self.keys)
                        self.keys.append(key)
                    ids[a, b] = k
            prior = _diag_weights(len(pair.source_tokens), len(pair.target_tokens), config.diagonal_tension)
            if config.use_null:
                prior = np.vstack([prior, np.ones((1, prior.shape[1]))])
            self.pair_ids.append(ids)
            self.pair_prior.append(prior)
        src_names = sorted({s for s, _ in self.keys})
        src_pos = {s: i for i, s in enumerate(src_names)}
        self.src_names = src_names
        self.src_of_entry = np.array([src_pos[s] for s, _ in self.keys], dtype=np.int64)
        self.flat_ids = np.concatenate([ids.ravel() for ids in self.pair_ids])

    def uniform(self) -> np.ndarray:
        per_source = np.bincount(self.src_of_entry, minlength=len(self.src_names)).astype(float)
        return 1.0 / per_source[self.src_of_entry]

    def to_table(self, t: np.ndarray) -> TranslationTable:
        probs: dict[str, dict[str, float]] = {}
        for (s, tgt), p in zip(self.keys, t.tolist()):
            probs.setdefault(s, {})[tgt] = p
        return TranslationTable(probs)


def _posteriors(index: _Index, t: np.ndarray, lo: int, hi: int) -> list[np.ndarray]:
    out = []
    for ids, prior in zip(index.pair_ids[lo:hi], index.pair_prior[lo:hi]):
        joint = t[ids] * prior
        out.append((joint / joint.sum(axis=0, keepdims=True)).ravel())
    return out


def _e_step(index: _Index, t: np.ndarray, workers: int) -> np.ndarray:
    n = len(index.pair_ids)
    if workers <= 1 or n < 2 * workers:
        post = _posteriors(index, t, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            chunks = pool.map(lambda k: _posteriors(index, t, bounds[k], bounds[k + 1]), range(workers))
            post = [p for chunk in chunks for p in chunk]
    # bincount accumulates in pair order, so the merge is worker-independent
    return np.bincount(index.flat_ids, weights=np.concatenate(post), minlength=len(index.keys))


def _m_step(index: _Index, counts: np.ndarray) -> np.ndarray:
    totals = np.bincount(index.src_of_entry, weights=counts, minlength=len(index.src_names))
    return counts / totals[index.src_of_entry]


def train_aligner(corpus: ParallelCorpus, config: AlignerConfig = AlignerConfig(), *, workers: int = 1, callback=None) -> TranslationTable:
    """Run exactly ``config.em_iterations`` EM iterations from uniform t.

    ``callback(iteration, table)`` is invoked after each M-step.
    """
    index = _Index(corpus, config)
    t = index.uniform()
    for it in range(1, config.em_iterations + 1):
        t = _m_step(index, _e_step(index, t, workers))
        if callback is not None:
            callback(it, index.to_table(t))
    return index.to_table(t)


def log_likelihood(table: TranslationTable, corpus: ParallelCorpus, config: AlignerConfig = AlignerConfig()) -> float:
    """Corpus log-likelihood with the diagonal prior normalized per target position."""
    total = 0.0
    for pair in corpus.pairs:
        sources = list(pair.source_tokens) + ([NULL] if config.use_null else [])
        prior = _diag_weights(len(pair.source_tokens), len(pair.target_tokens), config.diagonal_tension)
        if config.use_null:
            prior = np.vstack([prior, np.ones((1, prior.shape[1]))])
        prior = prior / prior.sum(axis=0, keepdims=True)
        for j, tgt in enumerate(pair.target_tokens):
            p = sum(prior[i, j] * table.prob(s, tgt, config.prob_floor) for i, s in enumerate(sources))
            total += math.log(p)
    return total


def viterbi_align(table: TranslationTable, corpus: ParallelCorpus, config: AlignerConfig = AlignerConfig()) -> list[AlignmentLink]:
    """Best source position for every target token.

    Ties go to the smallest source index; NULL wins only when strictly
    better than every real source position.
    """
    links = []
    floor = config.prob_floor
    for k, pair in enumerate(corpus.pairs):
        prior = _diag_weights(len(pair.source_tokens), len(pair.target_tokens), config.diagonal_tension)
        for j, tgt in enumerate(pair.target_tokens):
            scores = np.array([table.prob(s, tgt, floor) for s in pair.source_tokens]) * prior[:, j]
            best = int(np.argmax(scores))
            src_pos: int | None = best
            if config.use_null and table.prob(NULL, tgt, floor) > scores[best]:
                src_pos = None
            links.append(AlignmentLink(k, src_pos, j))
    return links


def load_pharaoh_alignments(path, corpus: ParallelCorpus) -> list[AlignmentLink]:
    """Parse one line of ``i-j`` pairs per verse pair (0-based, source-target)."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != len(corpus):
        raise AlignmentError(f"{path}: {len(lines)} alignment lines for {len(corpus)} verse pairs")
    links = []
    for k, (line, pair) in enumerate(zip(lines, corpus.pairs)):
        for item in line.split():
            try:
                i_str, j_str = item.split("-")
                i, j = int(i_str), int(j_str)
            except ValueError as exc:
                raise AlignmentError(f"{path}: pair {k} ({pair.verse_id}): malformed link {item!r}") from exc
            if not (0 <= i < len(pair.source_tokens)) or not (0 <= j < len(pair.target_tokens)):
                raise AlignmentError(
                    f"{path}: pair {k} ({pair.verse_id}): link {item!r} out of range for "
                    f"{len(pair.source_tokens)}x{len(pair.target_tokens)} tokens"
                )
            links.append(AlignmentLink(k, i, j))
    return links


def write_pharaoh_alignments(path, links: list[AlignmentLink], corpus: ParallelCorpus) -> None:
    """Inverse of :func:`load_pharaoh_alignments`; NULL links are not representable and are omitted."""
    per_pair: list[list[str]] = [[] for _ in range(len(corpus))]
    for link in links:
        if link.source_pos is not None:
            per_pair[link.pair_index].append(f"{link.source_pos}-{link.target_pos}")
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for items in per_pair:
            fh.write(" ".join(items) + "\n")
