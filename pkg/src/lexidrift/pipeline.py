"""End-to-end run: corpus -> alignments -> induced lexicon -> drift -> model -> reports.

Every stage reads its inputs from disk and writes its outputs to the run
directory, so a stage can be skipped on ``resume`` when the digests of its
inputs and outputs and its parameters match the previous manifest.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__
from .align import AlignerConfig, load_pharaoh_alignments, train_aligner, viterbi_align, write_pharaoh_alignments
from .classify import build_samples, train_weighted_logreg, tune_weight_exponent
from .corpus import LangDomainTag, TokenizationPolicy, load_parallel_corpus
from .embed import DriftTable, compute_drift_table, load_embeddings
from .evaluation import EvalConfig, evaluate_emoticons, evaluate_word_sentiment, split_datasets, write_reports
from .lexicon import NEG, POS, SeedLexicon
from .project import FDR_METHOD, extract_lexicon, substitute_and_count

logger = logging.getLogger(__name__)

ENV_PREFIX = "LEXIDRIFT_"
CONFIG_SECTION = "lexidrift"
PATH_KEYS = ("corpus", "seeds", "source_emb", "target_emb", "gold", "emoticons", "alignments", "output_dir")
REQUIRED_INPUTS = ("corpus", "seeds", "source_emb", "target_emb")
OPTIONAL_INPUTS = ("gold", "emoticons", "alignments")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")


@dataclass
class RunConfig:
    corpus: str = ""
    seeds: str = ""
    source_emb: str = ""
    target_emb: str = ""
    output_dir: str = ""
    gold: str | None = None
    emoticons: str | None = None
    alignments: str | None = None
    source_tag: str = "eng/bible"
    target_tag: str = "xxx/bible"
    target_domain: str = "wiki"
    lowercase: bool = True
    strip_punctuation: bool = True
    min_token_length: int = 1
    em_iterations: int = 5
    diagonal_tension: float = 0.0
    use_null: bool = True
    prob_floor: float = 1e-7
    q: float = 0.05
    drift_gamma: float = 1.0
    gamma_grid: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    l2: float = 1.0
    l2_grid: tuple[float, ...] = ()
    epsilon: float = 1e-10
    lambda_floor: float = 1e-6
    cap: int | None = None
    test_fraction: float = 0.2
    seed: int = 13
    folds: int = 5
    tol: float = 1e-6
    max_iters: int = 10_000
    workers: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["gamma_grid"] = list(self.gamma_grid)
        d["l2_grid"] = list(self.l2_grid)
        return d

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def aligner(self) -> AlignerConfig:
        return AlignerConfig(self.em_iterations, self.diagonal_tension, self.use_null, self.prob_floor)

    def policy(self) -> TokenizationPolicy:
        return TokenizationPolicy(self.lowercase, self.strip_punctuation, self.min_token_length)

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            l2=self.l2, tol=self.tol, max_iters=self.max_iters, gamma=None, gamma_grid=self.gamma_grid,
            l2_grid=self.l2_grid or None, folds=self.folds, seed=self.seed, workers=self.workers,
        )


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_value(key: str, text: str):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    if "tuple" in kind:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    if text.lower() in ("", "none") and "None" in kind:
        return None
    if kind.startswith("bool"):
        return _parse_bool(text)
    if kind.startswith("int"):
        return int(text)
    if kind.startswith("float"):
        return float(text)
    return text


def config_from_mapping(values: dict[str, str], base_dir=None) -> RunConfig:
    """Typed RunConfig from string values; unknown keys and unparsable values are collected as errors."""
    errors = []
    kwargs = {}
    for key, raw in values.items():
        key = key.strip().lower().replace("-", "_")
        if key not in _FIELD_TYPES:
            errors.append(f"unknown config key {key!r}")
            continue
        try:
            value = _parse_value(key, raw)
        except ValueError as exc:
            errors.append(f"{key}: {exc}")
            continue
        if key in PATH_KEYS and value and base_dir is not None and not Path(value).is_absolute():
            value = str(Path(base_dir) / value)
        kwargs[key] = value
    if errors:
        raise ConfigError(errors)
    return RunConfig(**kwargs)


def load_config(path, environ=None) -> RunConfig:
    """Read ``key = value`` lines (an optional ``[lexidrift]`` header is allowed).

    ``LEXIDRIFT_<KEY>`` environment variables override file values.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = f"[{CONFIG_SECTION}]\n" + text
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text, source=str(path))
    values = dict(parser[parser.sections()[0]]) if parser.sections() else {}
    environ = os.environ if environ is None else environ
    for key in _FIELD_TYPES:
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            values[key] = environ[env_key]
    return config_from_mapping(values, base_dir=path.parent)


def validate_config(config: RunConfig) -> list[str]:
    """Every violation found, not only the first; an empty list means valid."""
    errors = []
    for key in REQUIRED_INPUTS:
        value = getattr(config, key)
        if not value:
            errors.append(f"{key}: required path not set")
        elif not Path(value).is_file():
            errors.append(f"{key}: file not found: {value}")
    for key in OPTIONAL_INPUTS:
        value = getattr(config, key)
        if value and not Path(value).is_file():
            errors.append(f"{key}: file not found: {value}")
    if not config.output_dir:
        errors.append("output_dir: required path not set")
    else:
        out = Path(config.output_dir)
        probe = out if out.exists() else next((p for p in out.parents if p.exists()), None)
        if probe is None or not probe.is_dir() or not os.access(probe, os.W_OK):
            errors.append(f"output_dir: not writable: {config.output_dir}")
    for key in ("source_tag", "target_tag"):
        try:
            LangDomainTag.parse(getattr(config, key))
        except ValueError as exc:
            errors.append(f"{key}: {exc}")
    if not config.target_domain:
        errors.append("target_domain: must be non-empty")

    def check(name, ok, rule):
        if not ok:
            errors.append(f"{name}: {getattr(config, name)!r} out of range ({rule})")

    check("min_token_length", config.min_token_length >= 1, ">= 1")
    check("em_iterations", config.em_iterations >= 1, ">= 1")
    check("diagonal_tension", 0 <= config.diagonal_tension < float("inf"), "finite, >= 0")
    check("prob_floor", 0 < config.prob_floor < 1e-3, "(0, 1e-3)")
    check("q", 0 < config.q < 1, "(0, 1)")
    check("drift_gamma", config.drift_gamma >= 0, ">= 0")
    check("gamma_grid", len(config.gamma_grid) > 0 and all(g >= 0 for g in config.gamma_grid), "non-empty, all >= 0")
    check("l2", config.l2 >= 0, ">= 0")
    check("l2_grid", all(x >= 0 for x in config.l2_grid), "all >= 0")
    check("epsilon", 0 < config.epsilon < 1e-3, "(0, 1e-3)")
    check("lambda_floor", config.lambda_floor > 0, "> 0")
    check("cap", config.cap is None or config.cap >= 2, "None or >= 2")
    check("test_fraction", 0 < config.test_fraction < 1, "(0, 1)")
    check("folds", config.folds >= 2, ">= 2")
    check("tol", config.tol > 0, "> 0")
    check("max_iters", config.max_iters >= 1, ">= 1")
    check("workers", config.workers >= 1, ">= 1")
    return errors


def file_digest(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class StageRecord:
    name: str
    status: str
    inputs: dict[str, str]
    outputs: dict[str, str]
    params: dict
    seconds: float
    warnings: list[str] = field(default_factory=list)


@dataclass
class RunManifest:
    config: dict
    version: str
    stages: list[StageRecord]
    fdr_method: str = FDR_METHOD

    @property
    def warnings(self) -> list[str]:
        return [f"{s.name}: {w}" for s in self.stages for w in s.warnings]

    def executed(self) -> list[str]:
        return [s.name for s in self.stages if s.status == "ran"]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "fdr_method": self.fdr_method,
            "stages": [dataclasses.asdict(s) for s in self.stages],
            "warnings": self.warnings,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RunManifest":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(d["config"], d["version"], [StageRecord(**s) for s in d["stages"]], d.get("fdr_method", FDR_METHOD))

    def verify(self, base_dir) -> list[str]:
        """Output files whose current digest differs from the recorded one."""
        bad = []
        for s in self.stages:
            for rel, digest in s.outputs.items():
                p = Path(base_dir) / rel
                if not p.is_file() or file_digest(p) != digest:
                    bad.append(rel)
        return bad


# ---------------------------------------------------------------- stages

@dataclass
class _Stage:
    name: str
    inputs: Callable[[RunConfig], list[Path]]
    outputs: Callable[[RunConfig], list[str]]
    params: Callable[[RunConfig], dict]
    run: Callable[[RunConfig], list[str]]
    enabled: Callable[[RunConfig], bool] = lambda cfg: True


def _corpus(cfg: RunConfig):
    return load_parallel_corpus(cfg.corpus, LangDomainTag.parse(cfg.source_tag), LangDomainTag.parse(cfg.target_tag), cfg.policy())


def _target_tag(cfg: RunConfig) -> LangDomainTag:
    return LangDomainTag(LangDomainTag.parse(cfg.target_tag).language, cfg.target_domain)


def _run_align(cfg: RunConfig) -> list[str]:
    corpus = _corpus(cfg)
    warnings = [f"dropped {corpus.dropped} verse pairs with an empty side"] if corpus.dropped else []
    if cfg.alignments:
        links = load_pharaoh_alignments(cfg.alignments, corpus)
    else:
        table = train_aligner(corpus, cfg.aligner(), workers=cfg.workers)
        table.save(cfg.out / "translation_table.tsv")
        links = viterbi_align(table, corpus, cfg.aligner())
    write_pharaoh_alignments(cfg.out / "alignments.txt", links, corpus)
    return warnings


def _run_project(cfg: RunConfig) -> list[str]:
    corpus = _corpus(cfg)
    links = load_pharaoh_alignments(cfg.out / "alignments.txt", corpus)
    seeds = SeedLexicon.load(cfg.seeds, tag=corpus.source_tag, lowercase=cfg.lowercase)
    lexicon = extract_lexicon(substitute_and_count(links, corpus, seeds), cfg.q)
    if not len(lexicon):
        raise ValueError("no target word passed the significance filter")
    lexicon.save(cfg.out / "lexicon.tsv")
    counts = lexicon.counts()
    logger.info("induced lexicon: %d positive, %d negative", counts[POS], counts[NEG])
    return []


def _run_drift(cfg: RunConfig) -> list[str]:
    lexicon = SeedLexicon.load(cfg.out / "lexicon.tsv")
    # the source-domain space is in the target language, trained on the parallel-corpus side
    source = load_embeddings(cfg.source_emb, LangDomainTag.parse(cfg.target_tag))
    target = load_embeddings(cfg.target_emb, _target_tag(cfg))
    table = compute_drift_table(lexicon, source, target, cfg.drift_gamma, cfg.cap, cfg.epsilon, cfg.lambda_floor)
    table.save(cfg.out / "drift.tsv")
    warnings = []
    if table.skipped:
        warnings.append(f"{len(table.skipped)} lexicon words missing from an embedding space")
    for space, name in ((source, "source_emb"), (target, "target_emb")):
        if space.duplicates:
            warnings.append(f"{name}: {space.duplicates} duplicate words ignored")
        if space.zero_rejected:
            warnings.append(f"{name}: {space.zero_rejected} zero vectors rejected")
    return warnings


def _load_drift(cfg: RunConfig) -> DriftTable:
    # recompute weights from the stored lambdas rather than trusting rounded weights
    return DriftTable.load(cfg.out / "drift.tsv", lambda_floor=cfg.lambda_floor).reweighted(cfg.drift_gamma)


def _run_train(cfg: RunConfig) -> list[str]:
    lexicon = SeedLexicon.load(cfg.out / "lexicon.tsv")
    target = load_embeddings(cfg.target_emb, _target_tag(cfg))
    drift = _load_drift(cfg)
    result = tune_weight_exponent(
        lexicon, drift, target, cfg.gamma_grid, cfg.folds, cfg.seed, cfg.l2_grid or (cfg.l2,),
        cfg.tol, cfg.max_iters, cfg.workers,
    )
    samples = build_samples(lexicon, target, drift.reweighted(result.gamma))
    model = train_weighted_logreg(samples, result.l2, cfg.tol, cfg.max_iters)
    model.config.update({
        "gamma": result.gamma,
        "folds": cfg.folds,
        "seed": cfg.seed,
        "n_train": len(samples),
        "tuning_macro_f1": {f"gamma={g:g},l2={l:g}": s for (g, l), s in sorted(result.scores.items())},
    })
    model.save(cfg.out / "model.json")
    return [] if model.converged else [f"optimizer stopped at max_iters={cfg.max_iters} before reaching tol"]


def _run_eval(cfg: RunConfig) -> list[str]:
    lexicon = SeedLexicon.load(cfg.out / "lexicon.tsv")
    gold = SeedLexicon.load(cfg.gold, lowercase=cfg.lowercase)
    target = load_embeddings(cfg.target_emb, _target_tag(cfg))
    split = split_datasets(lexicon, gold, target.vocab(), cfg.test_fraction, cfg.seed)
    reports = evaluate_word_sentiment(split, target, _load_drift(cfg), cfg.eval_config(),
                                      LangDomainTag.parse(cfg.target_tag).language, cfg.target_domain)
    write_reports(reports, cfg.out / "eval")
    return []


def _run_emoticons(cfg: RunConfig) -> list[str]:
    lexicon = SeedLexicon.load(cfg.out / "lexicon.tsv")
    emoticons = SeedLexicon.load(cfg.emoticons)
    target = load_embeddings(cfg.target_emb, _target_tag(cfg))
    reports = evaluate_emoticons(lexicon, _load_drift(cfg), target, emoticons, cfg.eval_config(),
                                 LangDomainTag.parse(cfg.target_tag).language, cfg.target_domain)
    write_reports(reports, cfg.out / "emoticons")
    dropped = reports[0].config["dropped"]["emoticons"]
    return [f"{dropped} emoticons missing from the target embedding"] if dropped else []


def _pick(cfg: RunConfig, *keys) -> dict:
    d = cfg.to_dict()
    return {k: d[k] for k in keys}


_TOKENIZE = ("source_tag", "target_tag", "lowercase", "strip_punctuation", "min_token_length")
_TUNE = ("drift_gamma", "lambda_floor", "gamma_grid", "l2", "l2_grid", "folds", "seed", "tol", "max_iters")

STAGES = [
    _Stage(
        "align",
        lambda c: [Path(c.corpus)] + ([Path(c.alignments)] if c.alignments else []),
        lambda c: ["alignments.txt"] + ([] if c.alignments else ["translation_table.tsv"]),
        lambda c: _pick(c, *_TOKENIZE, "em_iterations", "diagonal_tension", "use_null", "prob_floor"),
        _run_align,
    ),
    _Stage(
        "project",
        lambda c: [Path(c.corpus), Path(c.seeds), c.out / "alignments.txt"],
        lambda c: ["lexicon.tsv"],
        lambda c: _pick(c, *_TOKENIZE, "q"),
        _run_project,
    ),
    _Stage(
        "drift",
        lambda c: [c.out / "lexicon.tsv", Path(c.source_emb), Path(c.target_emb)],
        lambda c: ["drift.tsv"],
        lambda c: _pick(c, "drift_gamma", "cap", "epsilon", "lambda_floor"),
        _run_drift,
    ),
    _Stage(
        "train",
        lambda c: [c.out / "lexicon.tsv", c.out / "drift.tsv", Path(c.target_emb)],
        lambda c: ["model.json"],
        lambda c: _pick(c, *_TUNE),
        _run_train,
    ),
    _Stage(
        "eval",
        lambda c: [c.out / "lexicon.tsv", c.out / "drift.tsv", Path(c.target_emb), Path(c.gold)],
        lambda c: ["eval/reports.json", "eval/summary.tsv"],
        lambda c: _pick(c, *_TUNE, "test_fraction", "lowercase", "target_tag", "target_domain"),
        _run_eval,
        lambda c: bool(c.gold),
    ),
    _Stage(
        "eval_emoticons",
        lambda c: [c.out / "lexicon.tsv", c.out / "drift.tsv", Path(c.target_emb), Path(c.emoticons)],
        lambda c: ["emoticons/reports.json", "emoticons/summary.tsv"],
        lambda c: _pick(c, *_TUNE, "target_tag", "target_domain"),
        _run_emoticons,
        lambda c: bool(c.emoticons),
    ),
]


def _can_skip(prev: StageRecord | None, inputs: dict, params: dict, out_dir: Path) -> bool:
    if prev is None or prev.status not in ("ran", "skipped"):
        return False
    if prev.inputs != inputs or prev.params != params:
        return False
    return all((out_dir / rel).is_file() and file_digest(out_dir / rel) == d for rel, d in prev.outputs.items())


def run_pipeline(config: RunConfig, resume: bool = False) -> RunManifest:
    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    previous = {}
    if resume and manifest_path.is_file():
        previous = {s.name: s for s in RunManifest.load(manifest_path).stages}
    # params are compared after a JSON round trip so tuples and lists agree
    normalize = lambda d: json.loads(json.dumps(d))  # noqa: E731

    manifest = RunManifest(config.to_dict(), __version__, [])
    for stage in STAGES:
        if not stage.enabled(config):
            continue
        params = normalize(stage.params(config))
        try:
            inputs = {str(p): file_digest(p) for p in stage.inputs(config)}
        except OSError as exc:
            manifest.stages.append(StageRecord(stage.name, "failed", {}, {}, params, 0.0, [str(exc)]))
            manifest.save(manifest_path)
            raise StageError(stage.name, exc) from exc
        prev = previous.get(stage.name)
        if resume and _can_skip(prev, inputs, params, out):
            logger.info("stage %s: up to date, skipped", stage.name)
            manifest.stages.append(StageRecord(stage.name, "skipped", inputs, prev.outputs, params, 0.0, prev.warnings))
            continue
        logger.info("stage %s: running", stage.name)
        start = time.perf_counter()
        try:
            warnings = stage.run(config)
        except Exception as exc:
            manifest.stages.append(StageRecord(stage.name, "failed", inputs, {}, params, time.perf_counter() - start, [str(exc)]))
            manifest.save(manifest_path)
            raise StageError(stage.name, exc) from exc
        outputs = {rel: file_digest(out / rel) for rel in stage.outputs(config)}
        manifest.stages.append(StageRecord(stage.name, "ran", inputs, outputs, params, time.perf_counter() - start, warnings))
        for w in warnings:
            logger.warning("%s: %s", stage.name, w)
    manifest.save(manifest_path)
    return manifest
