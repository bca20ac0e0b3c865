import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexidrift.embed import (
    DriftTable,
    EmbeddingError,
    EmbeddingSpace,
    SharedVocab,
    compute_drift_table,
    domdrift_score,
    drift_report,
    inverse_drift_weights,
    kl_divergence,
    load_embeddings,
    shared_vocab,
    word_profile,
)
from lexidrift.synthetic import planted_drift_spaces
from oracles import kl_oracle


def space(d):
    return EmbeddingSpace.from_dict(d)


def test_load_with_header(write):
    emb = load_embeddings(write("e.txt", "2 3\na 1 0 0\nb 0 1 0\n"))
    assert emb.dim == 3 and len(emb) == 2
    assert list(emb.vector("b")) == [0.0, 1.0, 0.0]


def test_load_without_header_and_duplicates(write):
    emb = load_embeddings(write("e.txt", "a 1 0\nb 0 1\na 5 5\n"))
    assert emb.duplicates == 1
    assert list(emb.vector("a")) == [1.0, 0.0]


def test_load_rejects_zero_vector(write, caplog):
    emb = load_embeddings(write("e.txt", "a 1 0\nz 0 0\n"))
    assert "z" not in emb and emb.zero_rejected == 1
    assert "zero vector" in caplog.text


@pytest.mark.parametrize(
    "text, fragment",
    [("a 1 0 0\nc 1 2\n", ":2: dimension mismatch"), ("a 1 0\nb 1 x\n", ":2: non-numeric"), ("", "no vectors")],
)
def test_load_errors(write, text, fragment):
    with pytest.raises(EmbeddingError, match=fragment):
        load_embeddings(write("e.txt", text))


def test_save_roundtrip(tmp_path):
    emb = space({"a": [0.1, 2.0], "b": [-1.5, 1e-3]})
    emb.save(tmp_path / "e.txt")
    back = load_embeddings(tmp_path / "e.txt")
    assert back.words == emb.words
    assert np.array_equal(back.matrix, emb.matrix)


def test_shared_vocab_rules():
    s = space({"a": [1, 0], "b": [0, 1], "c": [1, 1]})
    t = space({"d": [1, 0], "c": [0, 1], "b": [1, 1]})
    assert shared_vocab(s, t).words == ("b", "c")
    assert shared_vocab(s, t, cap=1, frequencies={"b": 10, "c": 3}).words == ("b",)
    assert shared_vocab(s, t, cap=1).words == ("c",)  # target file order stands in for frequency
    with pytest.raises(EmbeddingError):
        shared_vocab(s, space({"z": [1, 0]}))


def test_profile_hand_case():
    emb = space({"w": [1, 0], "a": [0, 1], "b": [1 / math.sqrt(2), 1 / math.sqrt(2)]})
    prof = word_profile(emb, "w", SharedVocab(("a", "b")))
    assert prof.probs == pytest.approx([0.7735, 0.2265], abs=1e-4)


def test_profile_degenerate_cases():
    emb = space({"w": [1, 0, 0], "a": [0, 1, 0], "b": [0, 0, 1], "p": [2, 0, 0], "q": [3, 0, 0]})
    assert list(word_profile(emb, "w", SharedVocab(("a", "b"))).probs) == [0.5, 0.5]
    assert list(word_profile(emb, "w", SharedVocab(("p", "q"))).probs) == [0.5, 0.5]
    # the word itself carries zero mass
    assert word_profile(emb, "w", SharedVocab(("a", "w"))).probs[1] == 0.0
    with pytest.raises(EmbeddingError):
        word_profile(emb, "missing", SharedVocab(("a", "b")))


def test_kl_values():
    assert float(kl_divergence([0.5, 0.5], [0.9, 0.1])) == pytest.approx(0.5108256, abs=1e-6)
    assert float(kl_divergence([0.5, 0.5], [0.9, 0.1])) == pytest.approx(kl_oracle([0.5, 0.5], [0.9, 0.1]), rel=1e-8)
    assert float(kl_divergence([0.3, 0.7], [0.3, 0.7])) == 0.0
    lam = float(kl_divergence([0.5, 0.5], [1.0, 0.0]))
    assert math.isfinite(lam) and lam > 1


def test_kl_oracle_agreement_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p, q = rng.dirichlet(np.ones(8)), rng.dirichlet(np.ones(8))
        assert float(kl_divergence(p, q)) == pytest.approx(kl_oracle(p, q), rel=1e-6)


def test_profile_shape_mismatch():
    emb = space({"w": [1, 0], "a": [0, 1], "b": [1, 1]})
    p = word_profile(emb, "w", SharedVocab(("a", "b")))
    q = word_profile(emb, "w", SharedVocab(("a", "b", "w")))
    with pytest.raises(EmbeddingError):
        domdrift_score(p, q)


@given(st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=30), st.floats(0.1, 3))
def test_weights_mean_one(lams, gamma):
    w = inverse_drift_weights(lams, gamma)
    assert math.fsum(w) / len(w) == pytest.approx(1.0, abs=1e-9)
    assert inverse_drift_weights(lams, 0.0) == [1.0] * len(lams)


def test_weights_monotone():
    w = inverse_drift_weights([0.1, 0.5], 1.0)
    assert w[0] > w[1]
    with pytest.raises(ValueError):
        inverse_drift_weights([0.1], -1.0)


@pytest.mark.parametrize("seed", range(20))
def test_planted_drift_ranks_first(seed):
    src, tgt, lexicon, planted = planted_drift_spaces(seed)
    table = compute_drift_table(lexicon, src, tgt)
    assert table.ranked()[0][0] == planted
    # other words move only through the planted word's column of their profiles
    others = [lam for w, lam in table.lambdas().items() if w != planted]
    assert max(others) < 0.2 * table[planted].lambda_


def test_scale_invariance():
    src, tgt, lexicon, _ = planted_drift_spaces(3)
    base = compute_drift_table(lexicon, src, tgt)
    scales = np.random.default_rng(0).uniform(0.01, 100, size=(len(tgt), 1))
    scaled = compute_drift_table(lexicon, src, EmbeddingSpace(None, tgt.words, tgt.matrix * scales))
    for w in lexicon:
        assert scaled[w].lambda_ == pytest.approx(base[w].lambda_, abs=1e-9)
        assert scaled[w].sample_weight == pytest.approx(base[w].sample_weight, rel=1e-6)


def test_drift_table_skips_and_errors():
    s = space({"a": [1, 0], "b": [0, 1], "c": [1, 1]})
    t = space({"a": [1, 0], "b": [0, 1], "c": [1, -1]})
    table = compute_drift_table(["a", "c", "zz"], s, t, gamma=0.0)
    assert table.skipped == ["zz"]
    assert [e.sample_weight for e in table.entries.values()] == [1.0, 1.0]
    assert table["c"].lambda_ > table["a"].lambda_
    with pytest.raises(EmbeddingError):
        compute_drift_table(["zz"], s, t)


def test_batch_size_does_not_change_result():
    src, tgt, lexicon, _ = planted_drift_spaces(9)
    a = compute_drift_table(lexicon, src, tgt, batch_size=3)
    b = compute_drift_table(lexicon, src, tgt)
    assert a.entries == b.entries


def test_drift_table_file_format(tmp_path):
    src, tgt, lexicon, _ = planted_drift_spaces(1)
    table = compute_drift_table(lexicon, src, tgt)
    table.save(tmp_path / "d.tsv")
    lines = (tmp_path / "d.tsv").read_text().splitlines()
    assert [ln.split("\t")[0] for ln in lines] == sorted(lexicon)
    back = DriftTable.load(tmp_path / "d.tsv")
    for w in lexicon:
        assert back[w].lambda_ == pytest.approx(table[w].lambda_, rel=1e-8, abs=1e-300)
    assert table.reweighted(0.0).weights() == {w: 1.0 for w in lexicon}


def test_drift_report():
    s = space({"x": [1, 0.1], "y": [0, 1], "z": [1, 0], "u": [-1, 0], "v": [0, -1]})
    t = space({"x": [1, 0.1], "y": [1, 0], "z": [0, 1], "u": [-1, 0], "v": [0, -1]})
    rep = drift_report("x", s, t, k=1)
    assert rep.source_neighbors[0][0] == "z"
    assert rep.target_neighbors[0][0] == "y"
    assert rep.overlap == set()
    assert len(drift_report("x", s, t, k=50).source_neighbors) == 4
    assert "overlap\t0" in rep.format()
    with pytest.raises(EmbeddingError):
        drift_report("nope", s, t)
