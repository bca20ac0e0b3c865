"""Word-sentiment evaluation of an induced lexicon against a gold lexicon.

Sets over the target embedding vocabulary::

    C = induced & gold        A = induced - C        B = gold - C

The test words are sampled from B | C and removed from both training
lexica; the induced-lexicon training set is (A | C) - test with induced
labels, the manual training set is (B | C) - test with gold labels.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import DEFAULT_GAMMA_GRID, build_samples, train_weighted_logreg, tune_weight_exponent
from .embed import DriftTable, EmbeddingSpace
from .lexicon import NEG, POS, Polarity, SeedLexicon
from .metrics import score

logger = logging.getLogger(__name__)

CONDITIONS = ("baseline", "manual", "unisent", "unisent_weighted")
SIZE_TOLERANCE = 0.05


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    set_A: frozenset
    set_B: frozenset
    set_C: frozenset
    unisent_train: dict[str, Polarity]
    manual_train: dict[str, Polarity]
    test: dict[str, Polarity]
    rng_seed: int
    test_fraction: float
    downsampled: str | None = None


def _sample(words, n: int, rng) -> list[str]:
    words = sorted(words)
    return sorted(words[i] for i in rng.permutation(len(words))[:n])


def split_datasets(
    unisent: SeedLexicon,
    gold: SeedLexicon,
    emb_vocab,
    test_fraction: float = 0.2,
    seed: int = 13,
) -> SplitSpec:
    if not 0 < test_fraction < 1:
        raise EvaluationError("test_fraction must lie in (0, 1)")
    emb_vocab = set(emb_vocab)
    if not len(unisent) or not len(gold) or not emb_vocab:
        raise EvaluationError("induced lexicon, gold lexicon and embedding vocabulary must be non-empty")
    induced = unisent.words() & emb_vocab
    manual = gold.words() & emb_vocab
    C = induced & manual
    if not C:
        raise EvaluationError("induced and gold lexica share no word in the embedding vocabulary")
    A, B = induced - C, manual - C
    rng = np.random.default_rng(seed)
    pool = B | C
    n_test = int(round(test_fraction * len(pool)))
    if n_test == 0:
        raise EvaluationError(f"test_fraction {test_fraction} leaves no test words out of {len(pool)}")
    test = set(_sample(pool, n_test, rng))
    manual_train = pool - test
    unisent_train = (A | C) - test
    downsampled = None
    big, small = max(len(manual_train), len(unisent_train)), min(len(manual_train), len(unisent_train))
    if big - small > SIZE_TOLERANCE * big:
        if len(manual_train) > len(unisent_train):
            manual_train, downsampled = set(_sample(manual_train, small, rng)), "manual"
        else:
            unisent_train, downsampled = set(_sample(unisent_train, small, rng)), "unisent"
    return SplitSpec(
        frozenset(A), frozenset(B), frozenset(C),
        {w: unisent.polarity(w) for w in sorted(unisent_train)},
        {w: gold.polarity(w) for w in sorted(manual_train)},
        {w: gold.polarity(w) for w in sorted(test)},
        seed, test_fraction, downsampled,
    )


def majority_baseline(train_labels: Sequence[Polarity]) -> Polarity:
    """Most frequent label; ties go to POSITIVE."""
    if not train_labels:
        raise EvaluationError("empty label list")
    counts = Counter(train_labels)
    return POS if counts[POS] >= counts[NEG] else NEG


@dataclass
class EvalConfig:
    l2: float = 1.0
    tol: float = 1e-6
    max_iters: int = 10_000
    gamma: float | None = None  # fixed exponent; None means tune over gamma_grid
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    l2_grid: tuple[float, ...] | None = None
    folds: int = 5
    seed: int = 13
    workers: int = 1


@dataclass
class EvalReport:
    language: str
    domain: str
    seed_source: str
    n_train: int
    n_test: int
    accuracy: float
    macro_f1: float
    per_class: dict
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _report(language, domain, source, n_train, predictions, gold_labels, config) -> EvalReport:
    s = score(predictions, gold_labels)
    return EvalReport(language, domain, source, n_train, len(gold_labels), s.accuracy, s.macro_f1, s.as_dict()["per_class"], config)


def _fit_and_predict(train: dict[str, Polarity], embedding, test_words, config: EvalConfig, drift=None):
    lex = SeedLexicon.from_labels(train)
    samples = build_samples(lex, embedding, drift)
    model = train_weighted_logreg(samples, config.l2, config.tol, config.max_iters)
    X = np.array([embedding.vector(w) for w in test_words])
    return model.predict_labels(X), len(samples)


def _pick_gamma(train: dict[str, Polarity], drift: DriftTable, embedding, config: EvalConfig):
    if config.gamma is not None:
        return config.gamma, config.l2, None
    result = tune_weight_exponent(
        SeedLexicon.from_labels(train), drift, embedding, config.gamma_grid, config.folds, config.seed,
        config.l2_grid or (config.l2,), config.tol, config.max_iters, config.workers,
    )
    scores = {f"gamma={g:g},l2={l:g}": s for (g, l), s in sorted(result.scores.items())}
    return result.gamma, result.l2, scores


def _conditions(train_sets, test, embedding, drift, config, language, domain, echo) -> list[EvalReport]:
    """Shared driver: ``train_sets`` maps condition -> training labels."""
    test_words = sorted(test)
    gold_labels = [test[w] for w in test_words]
    reports = []
    for cond, train in train_sets.items():
        if cond == "baseline":
            label = majority_baseline(list(train.values()))
            preds = [label] * len(test_words)
            reports.append(_report(language, domain, cond, len(train), preds, gold_labels, {**echo, "majority_label": label.value}))
        elif cond == "unisent_weighted":
            gamma, l2, tuning = _pick_gamma(train, drift, embedding, config)
            weighted_cfg = EvalConfig(**{**asdict(config), "l2": l2})
            preds, n = _fit_and_predict(train, embedding, test_words, weighted_cfg, drift.reweighted(gamma))
            extra = {"gamma": gamma, "l2": l2}
            if tuning is not None:
                extra["tuning_macro_f1"] = tuning
            reports.append(_report(language, domain, cond, n, preds, gold_labels, {**echo, **extra}))
        else:
            preds, n = _fit_and_predict(train, embedding, test_words, config)
            reports.append(_report(language, domain, cond, n, preds, gold_labels, {**echo, "l2": config.l2}))
    return reports


def evaluate_word_sentiment(
    split: SplitSpec,
    embedding: EmbeddingSpace,
    drift: DriftTable | None = None,
    config: EvalConfig | None = None,
    language: str = "",
    domain: str = "",
) -> list[EvalReport]:
    """Reports for baseline, manual, unisent and (with ``drift``) unisent_weighted, on one test set."""
    config = config or EvalConfig()
    test = {w: p for w, p in split.test.items() if w in embedding}
    dropped_test = len(split.test) - len(test)
    if not test:
        raise EvaluationError("no test word is present in the embedding")
    unisent_train = {w: p for w, p in split.unisent_train.items() if w in embedding}
    manual_train = {w: p for w, p in split.manual_train.items() if w in embedding}
    echo = {
        "test_fraction": split.test_fraction,
        "rng_seed": split.rng_seed,
        "sizes": {"A": len(split.set_A), "B": len(split.set_B), "C": len(split.set_C)},
        "downsampled": split.downsampled,
        "dropped": {
            "test": dropped_test,
            "unisent_train": len(split.unisent_train) - len(unisent_train),
            "manual_train": len(split.manual_train) - len(manual_train),
        },
        "f1_zero_division": 0.0,
    }
    train_sets = {"baseline": unisent_train, "manual": manual_train, "unisent": unisent_train}
    if drift is not None:
        train_sets["unisent_weighted"] = unisent_train
    return _conditions(train_sets, test, embedding, drift, config, language, domain, echo)


def evaluate_emoticons(
    unisent: SeedLexicon,
    drift: DriftTable | None,
    twitter_emb: EmbeddingSpace,
    emoticon_gold: SeedLexicon,
    config: EvalConfig | None = None,
    language: str = "",
    domain: str = "twitter",
) -> list[EvalReport]:
    """Train on every usable induced seed, test on emoticon vectors."""
    config = config or EvalConfig()
    test = {w: emoticon_gold.polarity(w) for w in sorted(emoticon_gold.words()) if w in twitter_emb}
    if not test:
        raise EvaluationError("no emoticon is present in the embedding")
    train = {w: unisent.polarity(w) for w in sorted(unisent.words()) if w in twitter_emb and w not in test}
    echo = {
        "dropped": {
            "emoticons": len(emoticon_gold) - len(test),
            "unisent_train": len(unisent) - len(train),
        },
        "f1_zero_division": 0.0,
    }
    train_sets = {"baseline": train, "unisent": train}
    if drift is not None:
        train_sets["unisent_weighted"] = train
    return _conditions(train_sets, test, twitter_emb, drift, config, language, domain, echo)


def write_reports(reports: Sequence[EvalReport], out_dir) -> tuple[Path, Path]:
    """``reports.json`` (one object per condition) and ``summary.tsv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "reports.json"
    tsv_path = out_dir / "summary.tsv"
    json_path.write_text(json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with tsv_path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("condition\tacc\tmacro_f1\n")
        for r in reports:
            fh.write(f"{r.seed_source}\t{r.accuracy:.4f}\t{r.macro_f1:.4f}\n")
    return json_path, tsv_path


def load_reports(path) -> list[EvalReport]:
    return [EvalReport(**d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
