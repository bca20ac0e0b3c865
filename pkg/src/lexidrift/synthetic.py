"""Synthetic resources with known ground truth.

``make_fixture`` builds a verse-aligned corpus in which a set of planted
target words are the consistent translations of labeled source seeds, plus
source-domain and target-domain embeddings whose geometry clusters the
words by sentiment.  A handful of planted words are given a flipped
neighbourhood in the source-domain space so that they drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import LangDomainTag, ParallelCorpus
from .embed import EmbeddingSpace
from .lexicon import NEG, POS, LexiconEntry, Polarity, SeedLexicon

SOURCE_TAG = LangDomainTag("eng", "bible")
TARGET_TAG = LangDomainTag("xxx", "bible")
TARGET_DOMAIN_TAG = LangDomainTag("xxx", "twitter")
EMOTICONS = {":)": POS, ":-)": POS, ":d": POS, "<3": POS, ":(": NEG, ":-(": NEG, ":'(": NEG, ">:(": NEG}


@dataclass
class Fixture:
    corpus: ParallelCorpus
    seeds: SeedLexicon
    planted: dict[str, Polarity]
    gold: SeedLexicon
    emoticons: SeedLexicon
    source_emb: EmbeddingSpace
    target_emb: EmbeddingSpace
    drifted: list[str] = field(default_factory=list)

    def write(self, out_dir) -> dict[str, Path]:
        """Write every resource in its file format; returns the paths by role."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "corpus": out / "corpus.tsv",
            "seeds": out / "seeds.tsv",
            "gold": out / "gold.tsv",
            "emoticons": out / "emoticons.tsv",
            "source_emb": out / "source_emb.txt",
            "target_emb": out / "target_emb.txt",
        }
        with paths["corpus"].open("w", encoding="utf-8", newline="\n") as fh:
            for p in self.corpus.pairs:
                fh.write(f"{p.verse_id}\t{' '.join(p.source_tokens)}\t{' '.join(p.target_tokens)}\n")
        self.seeds.save(paths["seeds"])
        self.gold.save(paths["gold"])
        self.emoticons.save(paths["emoticons"])
        self.source_emb.save(paths["source_emb"])
        self.target_emb.save(paths["target_emb"])
        return paths


def _cluster_vectors(rng, labels: dict[str, Polarity | None], dim: int, separation: float, noise: float) -> dict[str, np.ndarray]:
    axis = np.zeros(dim)
    axis[0] = 1.0
    out = {}
    for w in sorted(labels):
        pol = labels[w]
        center = separation * axis if pol is POS else -separation * axis if pol is NEG else 0.0 * axis
        out[w] = center + noise * rng.standard_normal(dim)
    return out


def make_fixture(
    seed: int = 0,
    n_pairs: int = 500,
    n_planted: int = 40,
    n_neutral: int = 150,
    n_gold_only: int = 40,
    seed_rate: float = 0.25,
    dim: int = 16,
    separation: float = 4.0,
    noise: float = 0.5,
    n_drifted: int = 4,
) -> Fixture:
    rng = np.random.default_rng(seed)
    half = n_planted // 2
    src_pos = [f"sgood{i:02d}" for i in range(half)]
    src_neg = [f"sbad{i:02d}" for i in range(n_planted - half)]
    src_neutral = [f"sw{i:03d}" for i in range(n_neutral)]
    translate = {w: "t" + w[1:] for w in src_pos + src_neg + src_neutral}
    seeds = {w: POS for w in src_pos} | {w: NEG for w in src_neg}
    seed_words = src_pos + src_neg

    pairs = []
    for _ in range(n_pairs):
        length = int(rng.integers(6, 13))
        src = []
        for _ in range(length):
            if rng.random() < seed_rate:
                src.append(seed_words[int(rng.integers(len(seed_words)))])
            else:
                src.append(src_neutral[int(rng.integers(len(src_neutral)))])
        tgt = [translate[w] for w in src]
        for k in range(len(tgt) - 1):
            if rng.random() < 0.2:
                tgt[k], tgt[k + 1] = tgt[k + 1], tgt[k]
        pairs.append((src, tgt))
    corpus = ParallelCorpus.from_token_lists(pairs, SOURCE_TAG, TARGET_TAG)

    planted = {translate[w]: p for w, p in seeds.items()}
    gold_only = {f"tgold{i:02d}": (POS if i % 2 == 0 else NEG) for i in range(n_gold_only)}
    gold = dict(planted) | gold_only

    labels: dict[str, Polarity | None] = {w: None for w in (translate[s] for s in src_neutral)}
    labels |= gold
    labels |= dict(EMOTICONS)
    target_vectors = _cluster_vectors(rng, labels, dim, separation, noise)

    # source-domain space: same words, independent noise, a few planted words moved to the opposite cluster
    source_labels = {w: p for w, p in labels.items() if w not in EMOTICONS}
    drifted = sorted(planted)[:: max(1, len(planted) // max(n_drifted, 1))][:n_drifted]
    for w in drifted:
        source_labels[w] = source_labels[w].other
    source_vectors = _cluster_vectors(rng, source_labels, dim, separation, noise)

    return Fixture(
        corpus=corpus,
        seeds=SeedLexicon(SOURCE_TAG, {w: LexiconEntry(p) for w, p in seeds.items()}),
        planted=planted,
        gold=SeedLexicon(TARGET_TAG, {w: LexiconEntry(p) for w, p in gold.items()}),
        emoticons=SeedLexicon(TARGET_DOMAIN_TAG, {w: LexiconEntry(p) for w, p in EMOTICONS.items()}),
        source_emb=EmbeddingSpace(LangDomainTag("xxx", "bible"), list(source_vectors), np.array(list(source_vectors.values()))),
        target_emb=EmbeddingSpace(TARGET_DOMAIN_TAG, list(target_vectors), np.array(list(target_vectors.values()))),
        drifted=drifted,
    )


def planted_drift_spaces(seed: int, n_words: int = 60, dim: int = 12, n_lexicon: int = 20):
    """Identical source/target spaces except one lexicon word, re-drawn orthogonal to itself in the target.

    Returns ``(source, target, lexicon_words, planted_word)``.
    """
    rng = np.random.default_rng(seed)
    words = [f"w{i:03d}" for i in range(n_words)]
    M = rng.standard_normal((n_words, dim))
    lexicon = sorted(rng.choice(words, size=n_lexicon, replace=False).tolist())
    planted = lexicon[int(rng.integers(n_lexicon))]
    k = words.index(planted)
    v = M[k]
    r = rng.standard_normal(dim)
    r -= (r @ v) / (v @ v) * v
    M2 = M.copy()
    M2[k] = r / np.linalg.norm(r) * np.linalg.norm(v)
    return EmbeddingSpace(None, words, M), EmbeddingSpace(None, words, M2), lexicon, planted


@dataclass
class NoisySeedTrial:
    train_lexicon: SeedLexicon  # labels include the flipped seeds
    embedding: EmbeddingSpace
    lambdas: dict[str, float]
    test: dict[str, Polarity]
    flipped: list[str]


def planted_noise_trial(
    seed: int,
    n_train: int = 400,
    n_test: int = 2000,
    dim: int = 5,
    separation: float = 2.0,
    flip_fraction: float = 0.10,
    flip: str = "one-sided",
) -> NoisySeedTrial:
    """Two overlapping Gaussian classes; ``flip_fraction`` of the training seeds get a wrong label and high drift.

    ``flip`` selects which seeds are wrong:

    * ``"one-sided"``: a random sample of positive seeds relabeled NEGATIVE,
      the pattern a polarity-reversing domain shift produces;
    * ``"confident"``: the most clearly positive seeds relabeled NEGATIVE;
    * ``"random"``: a uniform sample of both classes.  Symmetric noise barely
      moves a logistic decision boundary, so weighting has little to fix.
    """
    rng = np.random.default_rng(seed)
    n = n_train + n_test
    labels = [POS if i % 2 == 0 else NEG for i in range(n)]
    signs = np.array([1.0 if p is POS else -1.0 for p in labels])
    X = rng.standard_normal((n, dim))
    X[:, 0] += separation * signs
    words = [f"v{i:04d}" for i in range(n)]
    train_idx = list(range(n_train))
    n_flip = int(round(flip_fraction * n_train))
    if flip == "confident":
        pos_train = [i for i in train_idx if labels[i] is POS]
        flipped_idx = sorted(pos_train, key=lambda i: -X[i, 0])[:n_flip]
    elif flip == "one-sided":
        pos_train = [i for i in train_idx if labels[i] is POS]
        flipped_idx = sorted(int(pos_train[i]) for i in rng.permutation(len(pos_train))[:n_flip])
    elif flip == "random":
        flipped_idx = sorted(int(i) for i in rng.permutation(n_train)[:n_flip])
    else:
        raise ValueError(f"unknown flip mode {flip!r}")
    train_labels = {words[i]: labels[i] for i in train_idx}
    for i in flipped_idx:
        train_labels[words[i]] = labels[i].other
    flipped = {words[i] for i in flipped_idx}
    lambdas = {
        words[i]: float(rng.uniform(0.5, 1.0)) if words[i] in flipped else float(rng.uniform(0.01, 0.1))
        for i in train_idx
    }
    return NoisySeedTrial(
        SeedLexicon.from_labels(train_labels),
        EmbeddingSpace(None, words, X),
        lambdas,
        {words[i]: labels[i] for i in range(n_train, n)},
        sorted(flipped),
    )
