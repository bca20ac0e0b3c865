"""Sample-weighted binary logistic regression on embedding features.

Objective (coefficients ``w``, intercept ``b``, labels ``y`` in {0, 1} with
POSITIVE = 1, sample weights ``s``)::

    sum_i s_i * [log(1 + exp(z_i)) - y_i * z_i] + (l2 / 2) * ||w||^2,   z_i = x_i.w + b

minimized by Nesterov-accelerated gradient descent with a fixed step
``1/L`` and gradient-based momentum restarts, starting from zero.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .embed import DriftTable, EmbeddingSpace
from .lexicon import NEG, POS, Polarity, SeedLexicon
from .metrics import macro_f1

DEFAULT_GAMMA_GRID = (0.0, 0.5, 1.0, 2.0)
MODEL_FORMAT = "lexidrift-logreg/1"


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledSample:
    word: str
    features: np.ndarray
    label: Polarity
    weight: float = 1.0


@dataclass
class LogRegModel:
    coefficients: np.ndarray
    intercept: float
    l2_strength: float
    iterations: int = 0
    objective: float = float("nan")
    converged: bool = False
    config: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ClassifierError(f"feature length {X.shape[1]} != model dimension {self.dim}")
        return X @ self.coefficients + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict_labels(self, X) -> list[Polarity]:
        return [POS if p >= 0.5 else NEG for p in self.predict_proba(X)]

    def save(self, path) -> None:
        """JSON document; floats written with 17 significant digits."""
        header = {
            "format": MODEL_FORMAT,
            "dim": self.dim,
            "intercept": "@INTERCEPT@",
            "coefficients": "@COEF@",
            "l2_strength": self.l2_strength,
            "iterations": self.iterations,
            "objective": self.objective,
            "converged": self.converged,
            "config": self.config,
        }
        text = json.dumps(header, indent=2, sort_keys=False)
        coef = "[" + ", ".join(f"{c:.17g}" for c in self.coefficients) + "]"
        text = text.replace('"@COEF@"', coef).replace('"@INTERCEPT@"', f"{self.intercept:.17g}")
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LogRegModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != MODEL_FORMAT:
            raise ClassifierError(f"{path}: not a {MODEL_FORMAT} document")
        coef = np.array(doc["coefficients"], dtype=np.float64)
        if len(coef) != doc["dim"]:
            raise ClassifierError(f"{path}: coefficient count does not match dim")
        return cls(coef, float(doc["intercept"]), doc["l2_strength"], doc["iterations"], doc["objective"], doc["converged"], doc.get("config", {}))


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective_and_gradient(params: np.ndarray, X: np.ndarray, y: np.ndarray, weights: np.ndarray, l2: float):
    """Value and gradient of the weighted objective at ``params = [coef..., intercept]``."""
    coef, b = params[:-1], params[-1]
    z = X @ coef + b
    loss = float(weights @ (np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * float(coef @ coef)
    r = weights * (_sigmoid(z) - y)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + l2 * coef
    grad[-1] = r.sum()
    return loss, grad


def _as_arrays(samples: Sequence[LabeledSample]):
    X = np.array([s.features for s in samples], dtype=np.float64)
    y = np.array([1.0 if s.label is POS else 0.0 for s in samples])
    w = np.array([s.weight for s in samples], dtype=np.float64)
    return X, y, w


def fit_logreg(X, y, weights=None, l2: float = 1.0, tol: float = 1e-6, max_iters: int = 10_000) -> LogRegModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, dim = X.shape
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if n == 0 or not (np.any(y == 1) and np.any(y == 0)):
        raise ClassifierError("training data must contain both classes")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ClassifierError("sample weights must be finite and > 0")
    if l2 < 0:
        raise ClassifierError("l2 must be >= 0")
    Xa = np.hstack([X, np.ones((n, 1))])
    lipschitz = 0.25 * float(np.linalg.eigvalsh((Xa * weights[:, None]).T @ Xa)[-1]) + l2
    step = 1.0 / lipschitz

    x = np.zeros(dim + 1)
    f, g = objective_and_gradient(x, X, y, weights, l2)
    v = x.copy()
    t = 1.0
    it = 0
    converged = float(np.max(np.abs(g))) < tol
    while not converged and it < max_iters:
        it += 1
        _, gv = objective_and_gradient(v, X, y, weights, l2)
        x_new = v - step * gv
        if float(gv @ (x_new - x)) > 0:
            # momentum points uphill: restart from the current iterate
            t = 1.0
            _, gx = objective_and_gradient(x, X, y, weights, l2)
            x_new = x - step * gx
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        v = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        f, g = objective_and_gradient(x, X, y, weights, l2)
        if not math.isfinite(f):
            raise ClassifierError("objective became non-finite")
        converged = float(np.max(np.abs(g))) < tol
    config = {"l2": l2, "tol": tol, "max_iters": max_iters}
    return LogRegModel(x[:-1].copy(), float(x[-1]), l2, it, f, converged, config)


def train_weighted_logreg(samples: Sequence[LabeledSample], l2: float = 1.0, tol: float = 1e-6, max_iters: int = 10_000) -> LogRegModel:
    if not samples:
        raise ClassifierError("no training samples")
    X, y, w = _as_arrays(samples)
    return fit_logreg(X, y, w, l2, tol, max_iters)


def predict(model: LogRegModel, features) -> tuple[Polarity, float]:
    """Label and P(POSITIVE); exactly 0.5 counts as POSITIVE."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or len(features) != model.dim:
        raise ClassifierError(f"feature length {features.size} != model dimension {model.dim}")
    p = float(model.predict_proba(features)[0])
    return (POS if p >= 0.5 else NEG), p


def build_samples(
    lexicon: SeedLexicon,
    embedding: EmbeddingSpace,
    drift: DriftTable | None = None,
    words=None,
) -> list[LabeledSample]:
    """Samples for lexicon words in the embedding, sorted by word.

    Weights come from ``drift`` when given (words without a drift entry
    get 1.0), otherwise from the lexicon entries.
    """
    chosen = sorted(lexicon.words() if words is None else words)
    out = []
    for w in chosen:
        if w not in embedding or w not in lexicon:
            continue
        entry = lexicon.entries[w]
        if drift is not None:
            weight = drift[w].sample_weight if w in drift else 1.0
        else:
            weight = entry.weight
        out.append(LabeledSample(w, embedding.vector(w), entry.polarity, weight))
    return out


def stratified_folds(labels: Sequence[Polarity], folds: int, seed: int) -> list[int]:
    """Fold id per position; each class is shuffled with ``seed`` and dealt round-robin."""
    if folds < 2:
        raise ClassifierError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = [-1] * len(labels)
    for cls in (POS, NEG):
        idx = [i for i, lab in enumerate(labels) if lab is cls]
        if len(idx) < folds:
            raise ClassifierError(f"only {len(idx)} {cls.name} samples for {folds}-fold stratification")
        for k, i in enumerate(rng.permutation(idx)):
            assignment[int(i)] = k % folds
    return assignment


@dataclass(frozen=True)
class TuningResult:
    gamma: float
    l2: float
    scores: dict[tuple[float, float], float]
    folds: int
    seed: int


def cross_validate(samples: Sequence[LabeledSample], folds: int, seed: int, l2: float, tol: float = 1e-6, max_iters: int = 10_000, workers: int = 1) -> float:
    """Mean held-out macro-F1 over stratified folds."""
    X, y, w = _as_arrays(samples)
    labels = [s.label for s in samples]
    fold_of = np.array(stratified_folds(labels, folds, seed))

    def run(k):
        train, test = fold_of != k, fold_of == k
        model = fit_logreg(X[train], y[train], w[train], l2, tol, max_iters)
        gold = [labels[i] for i in np.flatnonzero(test)]
        return macro_f1(model.predict_labels(X[test]), gold)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(folds)))
    else:
        results = [run(k) for k in range(folds)]
    return math.fsum(results) / folds


def tune_weight_exponent(
    lexicon: SeedLexicon,
    drift: DriftTable,
    embedding: EmbeddingSpace,
    grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    folds: int = 5,
    seed: int = 13,
    l2_grid: Sequence[float] = (1.0,),
    tol: float = 1e-6,
    max_iters: int = 10_000,
    workers: int = 1,
) -> TuningResult:
    """Pick the drift-weight exponent (and l2) with the best mean CV macro-F1.

    Ties go to the smaller exponent, then the smaller l2.
    """
    if not grid:
        raise ClassifierError("empty exponent grid")
    if not l2_grid:
        raise ClassifierError("empty l2 grid")
    scores: dict[tuple[float, float], float] = {}
    best = None
    for gamma in sorted(set(grid)):
        samples = build_samples(lexicon, embedding, drift.reweighted(gamma))
        for l2 in sorted(set(l2_grid)):
            s = cross_validate(samples, folds, seed, l2, tol, max_iters, workers)
            scores[(gamma, l2)] = s
            if best is None or s > scores[best]:
                best = (gamma, l2)
    return TuningResult(best[0], best[1], scores, folds, seed)
