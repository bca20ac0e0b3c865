import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexidrift.embed import DriftEntry, DriftTable, EmbeddingSpace
from lexidrift.evaluation import (
    EvalConfig,
    EvaluationError,
    evaluate_emoticons,
    evaluate_word_sentiment,
    load_reports,
    majority_baseline,
    split_datasets,
    write_reports,
)
from lexidrift.lexicon import NEG, POS, SeedLexicon
from lexidrift.metrics import score


def lex(d):
    return SeedLexicon.from_labels(d)


def test_set_algebra():
    split = split_datasets(lex({"a": POS, "b": POS, "c": NEG}), lex({"b": POS, "c": NEG, "d": POS}), {"a", "b", "c", "d"}, 0.5, seed=1)
    assert split.set_A == {"a"} and split.set_B == {"d"} and split.set_C == {"b", "c"}
    assert len(split.test) == 2
    assert set(split.test) <= split.set_B | split.set_C
    assert not set(split.test) & set(split.unisent_train)
    assert not set(split.test) & set(split.manual_train)


def test_label_sources_on_disagreement():
    words = [f"w{i}" for i in range(40)]
    uni = lex({w: POS for w in words})
    gold = lex({w: NEG for w in words})
    split = split_datasets(uni, gold, set(words), 0.25, seed=0)
    assert all(p is POS for p in split.unisent_train.values())
    assert all(p is NEG for p in split.test.values())
    assert all(p is NEG for p in split.manual_train.values())


words_strategy = st.sets(st.sampled_from([f"w{i}" for i in range(30)]), min_size=1)


@given(words_strategy, words_strategy, words_strategy, st.integers(0, 5), st.sampled_from([0.2, 0.3, 0.5]))
def test_split_invariants(uni_words, gold_words, emb, seed, frac):
    uni = lex({w: POS if hash(w) % 2 else NEG for w in uni_words})
    gold = lex({w: POS if int(w[1:]) % 2 else NEG for w in gold_words})
    try:
        split = split_datasets(uni, gold, emb, frac, seed)
    except EvaluationError:
        return
    C = uni_words & gold_words & emb
    assert split.set_C == C
    assert split.set_A == (uni_words & emb) - C
    assert split.set_B == (gold_words & emb) - C
    test = set(split.test)
    assert test <= split.set_B | split.set_C
    assert not test & set(split.unisent_train) and not test & set(split.manual_train)
    a, b = len(split.unisent_train), len(split.manual_train)
    assert abs(a - b) <= 0.05 * max(a, b)
    assert split == split_datasets(uni, gold, emb, frac, seed)


def test_split_errors():
    with pytest.raises(EvaluationError):
        split_datasets(lex({"a": POS}), lex({"b": POS}), {"a", "b"})
    with pytest.raises(EvaluationError):
        split_datasets(lex({"a": POS}), lex({"a": POS}), {"a"}, test_fraction=0.2)
    with pytest.raises(EvaluationError):
        split_datasets(lex({"a": POS}), lex({"a": POS}), {"a"}, test_fraction=1.0)


def test_majority_baseline():
    assert majority_baseline([POS, POS, NEG]) is POS
    assert majority_baseline([POS, NEG]) is POS
    assert majority_baseline([NEG, NEG, POS]) is NEG
    gold = [POS] * 7 + [NEG] * 3
    assert score([POS] * 10, gold).accuracy == 0.7
    with pytest.raises(EvaluationError):
        majority_baseline([])


def clustered(words_labels, dim=4, seed=0, sep=3.0):
    rng = np.random.default_rng(seed)
    words = sorted(words_labels)
    X = rng.standard_normal((len(words), dim)) * 0.5
    X[:, 0] += [sep if words_labels[w] is POS else -sep for w in words]
    return EmbeddingSpace(None, words, X)


def test_word_sentiment_conditions():
    labels = {f"w{i:02d}": (POS if i % 3 else NEG) for i in range(60)}
    emb = clustered(labels)
    uni = lex({w: p for w, p in labels.items() if int(w[1:]) < 45})
    gold = lex({w: p for w, p in labels.items() if int(w[1:]) >= 15})
    drift = DriftTable({w: DriftEntry(0.1, 1.0) for w in labels})
    split = split_datasets(uni, gold, emb.vocab(), 0.2, seed=3)
    reports = evaluate_word_sentiment(split, emb, drift, EvalConfig(gamma=0.0), "fra", "wiki")
    by = {r.seed_source: r for r in reports}
    assert list(by) == ["baseline", "manual", "unisent", "unisent_weighted"]
    assert len({r.n_test for r in reports}) == 1
    assert by["unisent"].macro_f1 == 1.0
    assert by["unisent"].macro_f1 - by["baseline"].macro_f1 >= 0.2
    # gamma 0 gives exactly the unweighted numbers
    assert (by["unisent_weighted"].accuracy, by["unisent_weighted"].macro_f1) == (by["unisent"].accuracy, by["unisent"].macro_f1)
    assert by["baseline"].config["majority_label"] == "POS"


def test_word_sentiment_drops_missing_words():
    labels = {f"w{i:02d}": (POS if i % 2 else NEG) for i in range(40)}
    emb = clustered({w: p for w, p in labels.items() if w != "w00"})
    split = split_datasets(lex(labels), lex(labels), set(labels), 0.3, seed=0)
    reports = evaluate_word_sentiment(split, emb)
    dropped = reports[0].config["dropped"]
    expected = {name: int("w00" in getattr(split, name)) for name in ("test", "unisent_train", "manual_train")}
    assert dropped == expected and sum(expected.values()) >= 1


def test_emoticons_geometry():
    labels = {f"w{i:02d}": (POS if i % 2 else NEG) for i in range(40)}
    emo = {":)": POS, ":(": NEG, "<3": POS, ":'(": NEG}
    emb = clustered(labels | emo, seed=2)
    gold = lex(emo | {"zz": POS})
    reports = evaluate_emoticons(lex(labels), None, emb, gold, language="deu")
    by = {r.seed_source: r for r in reports}
    assert by["unisent"].macro_f1 >= 0.95
    assert by["baseline"].accuracy == 0.5
    assert reports[0].config["dropped"]["emoticons"] == 1
    with pytest.raises(EvaluationError):
        evaluate_emoticons(lex(labels), None, emb, lex({"nope": POS}))


def test_report_files(tmp_path):
    labels = {f"w{i:02d}": (POS if i % 2 else NEG) for i in range(30)}
    emb = clustered(labels)
    split = split_datasets(lex(labels), lex(labels), set(labels), 0.3, seed=0)
    reports = evaluate_word_sentiment(split, emb, language="spa", domain="wiki")
    json_path, tsv_path = write_reports(reports, tmp_path)
    assert load_reports(json_path) == reports
    lines = tsv_path.read_text().splitlines()
    assert lines[0] == "condition\tacc\tmacro_f1"
    assert [ln.split("\t")[0] for ln in lines[1:]] == ["baseline", "manual", "unisent"]
    fields = set(reports[0].as_dict())
    assert {"language", "domain", "seed_source", "n_train", "n_test", "accuracy", "macro_f1", "per_class", "config"} == fields
