"""Embedding spaces and neighbourhood-profile domain drift.

A word's profile in one space is its L1-normalized vector of cosine
distances to every word of the vocabulary shared by the source-domain and
target-domain spaces.  Drift is the KL divergence from the source profile
to the target profile; inverse drift, raised to an exponent, becomes a
per-word sample weight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import LangDomainTag
from .lexicon import SeedLexicon

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-10
DEFAULT_LAMBDA_FLOOR = 1e-6


class EmbeddingError(ValueError):
    pass


class EmbeddingSpace:
    """Immutable word -> vector map, kept in file order."""

    def __init__(self, tag: LangDomainTag | None, words: Sequence[str], matrix, *, duplicates: int = 0, zero_rejected: int = 0):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(words) or matrix.shape[1] < 1:
            raise EmbeddingError("matrix must be (n_words, dim) with dim >= 1")
        if not np.all(np.isfinite(matrix)):
            raise EmbeddingError("non-finite embedding component")
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0):
            raise EmbeddingError("zero vector in embedding space")
        self.tag = tag
        self.words = tuple(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise EmbeddingError("duplicate words in embedding space")
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.unit = matrix / norms[:, None]
        self.unit.setflags(write=False)
        self.duplicates = duplicates
        self.zero_rejected = zero_rejected

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]], tag=None) -> "EmbeddingSpace":
        words = list(vectors)
        return cls(tag, words, np.array([vectors[w] for w in words], dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self.index[word]]
        except KeyError:
            raise EmbeddingError(f"word {word!r} not in embedding space {self.tag}") from None

    def vocab(self) -> set[str]:
        return set(self.words)

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(self)} {self.dim}\n")
            for w, row in zip(self.words, self.matrix):
                fh.write(w + " " + " ".join(repr(float(x)) for x in row) + "\n")


def load_embeddings(path, tag: LangDomainTag | None = None) -> EmbeddingSpace:
    """Read word2vec-style text vectors.

    An optional ``count dim`` header is recognized.  Duplicate words keep
    their first vector; zero vectors are skipped with a warning.
    """
    path = Path(path)
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim = None
    duplicates = zero = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").rstrip("\r").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            word, comps = parts[0], parts[1:]
            try:
                vec = [float(x) for x in comps]
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric vector component") from None
            if dim is None:
                dim = len(vec)
            if len(vec) != dim or dim == 0:
                raise EmbeddingError(f"{path}:{lineno}: dimension mismatch ({len(vec)} != {dim})")
            if not all(math.isfinite(x) for x in vec):
                raise EmbeddingError(f"{path}:{lineno}: non-finite vector component")
            if word in seen:
                duplicates += 1
                continue
            if not any(vec):
                zero += 1
                logger.warning("%s:%d: zero vector for %r rejected", path, lineno, word)
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not words:
        raise EmbeddingError(f"{path}: no vectors")
    if duplicates:
        logger.warning("%s: %d duplicate words ignored", path, duplicates)
    return EmbeddingSpace(tag, words, np.array(rows), duplicates=duplicates, zero_rejected=zero)


@dataclass(frozen=True)
class SharedVocab:
    words: tuple[str, ...]

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def shared_vocab(
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    cap: int | None = None,
    frequencies: Mapping[str, float] | None = None,
) -> SharedVocab:
    """Lexicographically ordered vocabulary intersection.

    With ``cap``, only the ``cap`` most frequent shared words are kept.
    Without a frequency table, rank in the target file stands in for
    frequency (word2vec text files are written most-frequent first).
    """
    common = source.vocab() & target.vocab()
    if not common:
        raise EmbeddingError("source and target embedding vocabularies do not intersect")
    if cap is not None and cap < len(common):
        if cap < 1:
            raise ValueError("cap must be >= 1")
        if frequencies is not None:
            key = lambda w: (-frequencies.get(w, 0), w)  # noqa: E731
        else:
            key = lambda w: (target.index[w], w)  # noqa: E731
        common = set(sorted(common, key=key)[:cap])
    return SharedVocab(tuple(sorted(common)))


@dataclass(frozen=True)
class WordProfile:
    word: str
    tag: LangDomainTag | None
    probs: np.ndarray


def _profile_matrix(space: EmbeddingSpace, words: Sequence[str], shared: SharedVocab) -> np.ndarray:
    if len(shared) < 2:
        raise EmbeddingError("shared vocabulary needs at least 2 words")
    missing = [w for w in words if w not in space]
    if missing:
        raise EmbeddingError(f"word {missing[0]!r} not in embedding space {space.tag}")
    ref_idx = np.array([space.index[w] for w in shared.words])
    rows = np.array([space.index[w] for w in words], dtype=np.int64)
    dist = 1.0 - space.unit[rows] @ space.unit[ref_idx].T
    np.clip(dist, 0.0, 2.0, out=dist)
    shared_pos = {w: i for i, w in enumerate(shared.words)}
    self_cols = np.array([shared_pos.get(w, -1) for w in words], dtype=np.int64)
    has_self = self_cols >= 0
    dist[np.flatnonzero(has_self), self_cols[has_self]] = 0.0
    totals = dist.sum(axis=1)
    degenerate = totals == 0
    for r in np.flatnonzero(degenerate):
        uniform = np.ones(len(shared))
        if self_cols[r] >= 0:
            uniform[self_cols[r]] = 0.0
        dist[r] = uniform
        totals[r] = uniform.sum()
    return dist / totals[:, None]


def word_profile(space: EmbeddingSpace, word: str, shared: SharedVocab) -> WordProfile:
    return WordProfile(word, space.tag, _profile_matrix(space, [word], shared)[0])


def _smooth(p: np.ndarray, epsilon: float) -> np.ndarray:
    p = np.maximum(p, epsilon)
    return p / p.sum(axis=-1, keepdims=True)


def kl_divergence(p, q, epsilon: float = DEFAULT_EPSILON):
    """KL(p || q) in nats after flooring both at ``epsilon`` and renormalizing.

    Works row-wise on 2-D input.
    """
    p = _smooth(np.asarray(p, dtype=np.float64), epsilon)
    q = _smooth(np.asarray(q, dtype=np.float64), epsilon)
    kl = np.sum(p * np.log(p / q), axis=-1)
    return np.maximum(kl, 0.0)


def domdrift_score(p_source: WordProfile, p_target: WordProfile, epsilon: float = DEFAULT_EPSILON) -> float:
    if p_source.probs.shape != p_target.probs.shape:
        raise EmbeddingError("profiles are over different reference vocabularies")
    return float(kl_divergence(p_source.probs, p_target.probs, epsilon))


def inverse_drift_weights(lambdas: Sequence[float], gamma: float, lambda_floor: float = DEFAULT_LAMBDA_FLOOR) -> list[float]:
    """``(1 / max(lambda, floor)) ** gamma`` rescaled to mean 1."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0:
        return [1.0] * len(lambdas)
    raw = [(1.0 / max(lam, lambda_floor)) ** gamma for lam in lambdas]
    mean = math.fsum(raw) / len(raw)
    return [w / mean for w in raw]


@dataclass(frozen=True)
class DriftEntry:
    lambda_: float
    sample_weight: float


@dataclass
class DriftTable:
    entries: dict[str, DriftEntry]
    gamma: float = 1.0
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR
    epsilon: float = DEFAULT_EPSILON
    skipped: list[str] = field(default_factory=list)
    shared_size: int = 0

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def __getitem__(self, word) -> DriftEntry:
        return self.entries[word]

    def lambdas(self) -> dict[str, float]:
        return {w: e.lambda_ for w, e in self.entries.items()}

    def weights(self) -> dict[str, float]:
        return {w: e.sample_weight for w, e in self.entries.items()}

    def ranked(self) -> list[tuple[str, float]]:
        """Words by decreasing drift."""
        return sorted(((w, e.lambda_) for w, e in self.entries.items()), key=lambda kv: (-kv[1], kv[0]))

    def reweighted(self, gamma: float) -> "DriftTable":
        words = sorted(self.entries)
        lams = [self.entries[w].lambda_ for w in words]
        weights = inverse_drift_weights(lams, gamma, self.lambda_floor)
        entries = {w: DriftEntry(lam, wt) for w, lam, wt in zip(words, lams, weights)}
        return DriftTable(entries, gamma, self.lambda_floor, self.epsilon, list(self.skipped), self.shared_size)

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            for w in sorted(self.entries):
                e = self.entries[w]
                fh.write(f"{w}\t{e.lambda_:.9g}\t{e.sample_weight:.9g}\n")

    @classmethod
    def load(cls, path, gamma: float = float("nan"), lambda_floor: float = DEFAULT_LAMBDA_FLOOR) -> "DriftTable":
        entries = {}
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    w, lam, wt = line.split("\t")
                    entries[w] = DriftEntry(float(lam), float(wt))
                except ValueError:
                    raise EmbeddingError(f"{path}:{lineno}: malformed drift table line") from None
        return cls(entries, gamma, lambda_floor)


def compute_drift_table(
    lexicon: SeedLexicon | Iterable[str],
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    gamma: float = 1.0,
    cap: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR,
    frequencies: Mapping[str, float] | None = None,
    batch_size: int = 1024,
) -> DriftTable:
    """Drift score and inverse-drift sample weight for every lexicon word in both spaces."""
    words = sorted(lexicon.words() if isinstance(lexicon, SeedLexicon) else set(lexicon))
    usable = [w for w in words if w in source and w in target]
    skipped = [w for w in words if not (w in source and w in target)]
    if not usable:
        raise EmbeddingError("no lexicon word is present in both embedding spaces")
    if skipped:
        logger.info("drift: %d lexicon words missing from an embedding space", len(skipped))
    shared = shared_vocab(source, target, cap, frequencies)
    lambdas: list[float] = []
    for start in range(0, len(usable), batch_size):
        chunk = usable[start:start + batch_size]
        ps = _profile_matrix(source, chunk, shared)
        pt = _profile_matrix(target, chunk, shared)
        lambdas.extend(float(x) for x in kl_divergence(ps, pt, epsilon))
    weights = inverse_drift_weights(lambdas, gamma, lambda_floor)
    entries = {w: DriftEntry(lam, wt) for w, lam, wt in zip(usable, lambdas, weights)}
    return DriftTable(entries, gamma, lambda_floor, epsilon, skipped, len(shared))


@dataclass(frozen=True)
class DriftReport:
    word: str
    source_neighbors: list[tuple[str, float]]
    target_neighbors: list[tuple[str, float]]

    @property
    def overlap(self) -> set[str]:
        return {w for w, _ in self.source_neighbors} & {w for w, _ in self.target_neighbors}

    def format(self) -> str:
        lines = [f"# {self.word}", "rank\tsource\tsim\ttarget\tsim"]
        n = max(len(self.source_neighbors), len(self.target_neighbors))
        for r in range(n):
            s = self.source_neighbors[r] if r < len(self.source_neighbors) else ("", float("nan"))
            t = self.target_neighbors[r] if r < len(self.target_neighbors) else ("", float("nan"))
            lines.append(f"{r + 1}\t{s[0]}\t{s[1]:.4f}\t{t[0]}\t{t[1]:.4f}")
        lines.append(f"overlap\t{len(self.overlap)}")
        return "\n".join(lines)


def nearest_neighbors(space: EmbeddingSpace, word: str, k: int) -> list[tuple[str, float]]:
    """Top-k cosine neighbours, excluding the word; ties ordered lexicographically."""
    if k < 0:
        raise ValueError("k must be >= 0")
    sims = space.unit @ space.unit[space.index[word]]
    ranked = sorted(
        ((float(s), w) for w, s in zip(space.words, sims) if w != word),
        key=lambda sw: (-sw[0], sw[1]),
    )
    return [(w, s) for s, w in ranked[:k]]


def drift_report(word: str, source: EmbeddingSpace, target: EmbeddingSpace, k: int = 10) -> DriftReport:
    for space in (source, target):
        if word not in space:
            raise EmbeddingError(f"word {word!r} not in embedding space {space.tag}")
    return DriftReport(word, nearest_neighbors(source, word, k), nearest_neighbors(target, word, k))
