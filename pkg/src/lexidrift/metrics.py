"""Binary sentiment scoring: accuracy, per-class P/R/F1 and macro-F1."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

from .lexicon import NEG, POS, Polarity


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Scores:
    accuracy: float
    macro_f1: float
    per_class: dict[str, ClassMetrics]

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": {k: asdict(v) for k, v in self.per_class.items()},
        }


def _ratio(num: int, den: int) -> Fraction:
    # 0/0 -> 0 throughout
    return Fraction(num, den) if den else Fraction(0)


def _class_counts(predictions, gold, cls: Polarity) -> tuple[Fraction, Fraction, Fraction, int]:
    tp = sum(1 for p, g in zip(predictions, gold) if p is cls and g is cls)
    pred_n = sum(1 for p in predictions if p is cls)
    gold_n = sum(1 for g in gold if g is cls)
    return _ratio(tp, pred_n), _ratio(tp, gold_n), _ratio(2 * tp, pred_n + gold_n), gold_n


def score(predictions: Sequence[Polarity], gold: Sequence[Polarity]) -> Scores:
    if len(predictions) != len(gold):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold labels")
    if not gold:
        raise ValueError("cannot score an empty set")
    correct = sum(1 for p, g in zip(predictions, gold) if p is g)
    pos = _class_counts(predictions, gold, POS)
    neg = _class_counts(predictions, gold, NEG)
    # kept rational until here so results are exact to one rounding
    per_class = {
        name: ClassMetrics(float(pr), float(rc), float(f1), n)
        for name, (pr, rc, f1, n) in (("POS", pos), ("NEG", neg))
    }
    return Scores(correct / len(gold), float((pos[2] + neg[2]) / 2), per_class)


def macro_f1(predictions, gold) -> float:
    return score(predictions, gold).macro_f1
