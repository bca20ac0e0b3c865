"""``lexidrift`` command line.

Exit codes: 0 success, 1 invalid arguments or configuration, 2 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .align import AlignerConfig, load_pharaoh_alignments, train_aligner, viterbi_align, write_pharaoh_alignments
from .classify import build_samples, train_weighted_logreg, tune_weight_exponent
from .corpus import DEFAULT_POLICY, LangDomainTag, TokenizationPolicy, build_vocab, load_parallel_corpus
from .embed import DEFAULT_EPSILON, DEFAULT_LAMBDA_FLOOR, DriftTable, compute_drift_table, drift_report, load_embeddings
from .evaluation import EvalConfig, evaluate_emoticons, evaluate_word_sentiment, split_datasets, write_reports
from .lexicon import POS, SeedLexicon
from .pipeline import ConfigError, RunConfig, StageError, load_config, run_pipeline, validate_config
from .project import extract_lexicon, substitute_and_count

logger = logging.getLogger("lexidrift")

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _policy(args) -> TokenizationPolicy:
    return TokenizationPolicy(not args.keep_case, not args.keep_punct, args.min_token_length)


def _add_corpus_args(p):
    p.add_argument("--source-tag", default="eng/bible", type=LangDomainTag.parse)
    p.add_argument("--target-tag", default="xxx/bible", type=LangDomainTag.parse)
    p.add_argument("--keep-case", action="store_true", help="do not lowercase tokens")
    p.add_argument("--keep-punct", action="store_true", help="do not strip edge punctuation")
    p.add_argument("--min-token-length", type=int, default=DEFAULT_POLICY.min_token_length)


def cmd_corpus_stats(args):
    corpus = load_parallel_corpus(args.input, args.source_tag, args.target_tag, _policy(args))
    vocab = build_vocab(corpus, args.side)
    print(f"pairs\t{len(corpus)}\ndropped\t{corpus.dropped}\ntypes\t{len(vocab)}\ntokens\t{vocab.total}")
    for word, count in vocab.most_common(args.top):
        print(f"{word}\t{count}")


def cmd_align(args):
    corpus = load_parallel_corpus(args.corpus, args.source_tag, args.target_tag, _policy(args))
    if args.load_pharaoh:
        links = load_pharaoh_alignments(args.load_pharaoh, corpus)
    else:
        config = AlignerConfig(args.iters, args.tension, not args.no_null, args.prob_floor)
        table = train_aligner(corpus, config, workers=args.workers)
        if args.table_out:
            table.save(args.table_out)
        links = viterbi_align(table, corpus, config)
    write_pharaoh_alignments(args.out, links, corpus)
    print(f"wrote {sum(1 for l in links if l.source_pos is not None)} links for {len(corpus)} pairs to {args.out}")


def cmd_project(args):
    corpus = load_parallel_corpus(args.corpus, args.source_tag, args.target_tag, _policy(args))
    links = load_pharaoh_alignments(args.alignments, corpus)
    seeds = SeedLexicon.load(args.seeds, tag=corpus.source_tag, lowercase=not args.keep_case)
    lexicon = extract_lexicon(substitute_and_count(links, corpus, seeds), args.q)
    lexicon.save(args.out)
    counts = lexicon.counts()
    print(f"wrote {len(lexicon)} entries ({counts[POS]} positive) to {args.out}")


def cmd_drift(args):
    lexicon = SeedLexicon.load(args.lexicon)
    source = load_embeddings(args.src_emb)
    target = load_embeddings(args.tgt_emb)
    table = compute_drift_table(lexicon, source, target, args.gamma, args.cap, args.epsilon, args.lambda_floor)
    table.save(args.out)
    print(f"wrote {len(table)} drift scores to {args.out} ({len(table.skipped)} lexicon words skipped)")
    for word, lam in table.ranked()[: args.show]:
        print(f"{word}\t{lam:.6g}")


def cmd_drift_report(args):
    report = drift_report(args.word, load_embeddings(args.src_emb), load_embeddings(args.tgt_emb), args.k)
    print(report.format())


def cmd_train(args):
    lexicon = SeedLexicon.load(args.seeds)
    embedding = load_embeddings(args.emb)
    drift = DriftTable.load(args.weights, lambda_floor=args.lambda_floor) if args.weights else None
    gamma = 0.0
    scores = {}
    if drift is not None:
        result = tune_weight_exponent(lexicon, drift, embedding, args.gamma_grid, args.folds, args.seed,
                                      args.l2_grid or (args.l2,), workers=args.workers)
        gamma, l2 = result.gamma, result.l2
        drift = drift.reweighted(gamma)
        scores = {f"gamma={g:g},l2={l:g}": s for (g, l), s in sorted(result.scores.items())}
    else:
        l2 = args.l2
    samples = build_samples(lexicon, embedding, drift)
    model = train_weighted_logreg(samples, l2)
    model.config.update({"gamma": gamma, "folds": args.folds, "seed": args.seed, "n_train": len(samples),
                         "tuning_macro_f1": scores})
    model.save(args.out)
    print(f"trained on {len(samples)} words (gamma={gamma:g}, l2={l2:g}); model written to {args.out}")


def _eval_config(args) -> EvalConfig:
    return EvalConfig(l2=args.l2, gamma=args.gamma, gamma_grid=args.gamma_grid, folds=args.folds,
                      seed=args.seed, workers=args.workers)


def _print_summary(reports):
    print("condition\tacc\tmacro_f1")
    for r in reports:
        print(f"{r.seed_source}\t{r.accuracy:.4f}\t{r.macro_f1:.4f}")


def cmd_eval(args):
    unisent = SeedLexicon.load(args.unisent)
    gold = SeedLexicon.load(args.gold)
    embedding = load_embeddings(args.emb)
    drift = DriftTable.load(args.drift, lambda_floor=args.lambda_floor) if args.drift else None
    split = split_datasets(unisent, gold, embedding.vocab(), args.test_frac, args.seed)
    reports = evaluate_word_sentiment(split, embedding, drift, _eval_config(args), args.language, args.domain)
    write_reports(reports, args.out)
    _print_summary(reports)


def cmd_eval_emoticons(args):
    unisent = SeedLexicon.load(args.unisent)
    emoticons = SeedLexicon.load(args.emoticons)
    embedding = load_embeddings(args.emb)
    drift = DriftTable.load(args.drift, lambda_floor=args.lambda_floor) if args.drift else None
    reports = evaluate_emoticons(unisent, drift, embedding, emoticons, _eval_config(args), args.language, args.domain)
    write_reports(reports, args.out)
    _print_summary(reports)


def _run_config(args) -> RunConfig:
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if args.seed is not None:
        config.seed = args.seed
    return config


def cmd_pipeline(args):
    config = _run_config(args)
    manifest = run_pipeline(config, resume=args.resume)
    ran = manifest.executed()
    print(f"stages run: {', '.join(ran) if ran else 'none'}; manifest: {Path(config.output_dir) / 'manifest.json'}")
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)


def cmd_validate(args):
    errors = validate_config(_run_config(args))
    if errors:
        for e in errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def cmd_synth(args):
    from .synthetic import make_fixture

    paths = make_fixture(args.seed if args.seed is not None else 0).write(args.out)
    out = Path(args.out)
    lines = [f"{k} = {v.name}" for k, v in paths.items()] + ["output_dir = run", "target_domain = twitter"]
    (out / "run.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"synthetic resources and run.cfg written to {out}")


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so they do not overwrite flags given before the subcommand
    def d(value):
        return argparse.SUPPRESS if suppress else value

    opts = argparse.ArgumentParser(add_help=False)
    opts.add_argument("--workers", type=int, default=d(None), help="worker threads (default 1)")
    opts.add_argument("--seed", type=int, default=d(None), help="random seed (default 13)")
    opts.add_argument("--resume", action="store_true", default=d(False), help="skip pipeline stages whose outputs are up to date")
    opts.add_argument("-v", "--verbose", action="count", default=d(0))
    return opts


def build_parser() -> argparse.ArgumentParser:
    global_opts = _global_options(suppress=True)
    parser = _Parser(prog="lexidrift", description=__doc__.splitlines()[0], parents=[_global_options(suppress=False)])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("corpus", parents=[global_opts], help="corpus utilities")
    csub = p.add_subparsers(dest="corpus_command", required=True, parser_class=_Parser)
    ps = csub.add_parser("stats", parents=[global_opts], help="vocabulary statistics for one side")
    ps.add_argument("--input", required=True)
    ps.add_argument("--side", choices=("source", "target"), default="target")
    ps.add_argument("--top", type=int, default=20)
    _add_corpus_args(ps)
    ps.set_defaults(func=cmd_corpus_stats)

    p = sub.add_parser("align", parents=[global_opts], help="word alignment (Model 1 EM or Pharaoh import)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--tension", type=float, default=0.0)
    p.add_argument("--no-null", action="store_true")
    p.add_argument("--prob-floor", type=float, default=1e-7)
    p.add_argument("--load-pharaoh", metavar="FILE", help="validate external alignments instead of training")
    p.add_argument("--table-out", metavar="FILE", help="also write the translation table")
    p.add_argument("--out", required=True, help="Pharaoh alignment file")
    _add_corpus_args(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("project", parents=[global_opts], help="project seed labels and extract a lexicon")
    p.add_argument("--corpus", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _add_corpus_args(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("drift", parents=[global_opts], help="drift scores and sample weights")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--lambda-floor", type=float, default=DEFAULT_LAMBDA_FLOOR)
    p.add_argument("--show", type=int, default=10, help="print the N most drifting words")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("drift-report", parents=[global_opts], help="nearest neighbours of a word in both spaces")
    p.add_argument("--word", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.set_defaults(func=cmd_drift_report)

    def add_model_args(p):
        p.add_argument("--l2", type=float, default=1.0)
        p.add_argument("--l2-grid", type=_floats, default=())
        p.add_argument("--gamma-grid", type=_floats, default=(0.0, 0.5, 1.0, 2.0))
        p.add_argument("--folds", type=int, default=5)
        p.add_argument("--lambda-floor", type=float, default=DEFAULT_LAMBDA_FLOOR)

    p = sub.add_parser("train", parents=[global_opts], help="train the word sentiment classifier")
    p.add_argument("--seeds", required=True)
    p.add_argument("--weights", help="drift table providing sample weights")
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True)
    add_model_args(p)
    p.set_defaults(func=cmd_train)

    for name, func, help_text in (("eval", cmd_eval, "evaluate against a gold lexicon"),
                                  ("eval-emoticons", cmd_eval_emoticons, "evaluate on emoticon polarity")):
        p = sub.add_parser(name, parents=[global_opts], help=help_text)
        p.add_argument("--unisent", required=True)
        if name == "eval":
            p.add_argument("--gold", required=True)
            p.add_argument("--test-frac", type=float, default=0.2)
        else:
            p.add_argument("--emoticons", required=True)
        p.add_argument("--emb", required=True)
        p.add_argument("--drift")
        p.add_argument("--gamma", type=float, default=None, help="fixed exponent instead of tuning")
        p.add_argument("--language", default="")
        p.add_argument("--domain", default="twitter" if name == "eval-emoticons" else "")
        p.add_argument("--out", required=True)
        add_model_args(p)
        p.set_defaults(func=func)

    for name, func in (("pipeline", cmd_pipeline), ("validate", cmd_validate)):
        p = sub.add_parser(name, parents=[global_opts], help=f"{name} a run configuration")
        p.add_argument("--config", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("synth", parents=[global_opts], help="write a synthetic resource set and run.cfg")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if args.command not in ("pipeline", "validate"):
        if args.workers is None:
            args.workers = 1
        if args.seed is None and args.command != "synth":
            args.seed = 13
    try:
        rc = args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVALID
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
