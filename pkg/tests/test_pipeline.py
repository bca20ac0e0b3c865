import json

import pytest

from lexidrift.pipeline import (
    ConfigError,
    RunConfig,
    RunManifest,
    StageError,
    load_config,
    run_pipeline,
    validate_config,
)


@pytest.fixture
def config(fixture_resources, tmp_path):
    _, paths = fixture_resources
    return RunConfig(
        corpus=str(paths["corpus"]), seeds=str(paths["seeds"]),
        source_emb=str(paths["source_emb"]), target_emb=str(paths["target_emb"]),
        gold=str(paths["gold"]), emoticons=str(paths["emoticons"]),
        output_dir=str(tmp_path / "run"), target_domain="twitter",
    )


def test_valid_config_has_no_errors(config):
    assert validate_config(config) == []


def test_validation_is_exhaustive(config, tmp_path):
    config.corpus = str(tmp_path / "missing.tsv")
    config.gold = str(tmp_path / "missing_gold.tsv")
    config.q = 1.5
    config.folds = 1
    errors = validate_config(config)
    assert len(errors) == 4
    assert any(e.startswith("corpus: file not found") for e in errors)
    assert any(e.startswith("gold: file not found") for e in errors)
    assert any(e.startswith("q: 1.5 out of range") for e in errors)


def test_invalid_config_stops_before_any_stage(config, tmp_path):
    config.corpus = str(tmp_path / "missing.tsv")
    with pytest.raises(ConfigError):
        run_pipeline(config)
    assert not (tmp_path / "run").exists()


def test_load_config_with_env_override(write, fixture_resources):
    _, paths = fixture_resources
    base = paths["corpus"].parent
    cfg_path = write("run.cfg", f"corpus = {paths['corpus']}\nseeds = {base}/seeds.tsv\nq = 0.01\ngamma_grid = 0, 1\ncap = none\noutput_dir = out\n")
    cfg = load_config(cfg_path, environ={"LEXIDRIFT_Q": "0.2", "LEXIDRIFT_USE_NULL": "off"})
    assert cfg.q == 0.2 and cfg.use_null is False
    assert cfg.gamma_grid == (0.0, 1.0) and cfg.cap is None
    assert cfg.output_dir == str(cfg_path.parent / "out")


def test_load_config_collects_errors(write):
    with pytest.raises(ConfigError) as info:
        load_config(write("bad.cfg", "[lexidrift]\nbogus = 1\nq = abc\n"))
    assert len(info.value.errors) == 2


def test_full_run_resume_and_manifest(config):
    manifest = run_pipeline(config)
    out = config.out
    assert manifest.executed() == ["align", "project", "drift", "train", "eval", "eval_emoticons"]
    for rel in ("alignments.txt", "translation_table.tsv", "lexicon.tsv", "drift.tsv", "model.json",
                "eval/reports.json", "eval/summary.tsv", "emoticons/reports.json", "manifest.json"):
        assert (out / rel).is_file(), rel
    saved = RunManifest.load(out / "manifest.json")
    assert saved.verify(out) == []
    assert saved.config["seed"] == 13

    again = run_pipeline(config, resume=True)
    assert again.executed() == []

    # a changed parameter reruns its stage; later stages are keyed on file digests,
    # and the planted words stay significant, so the lexicon bytes do not change
    lexicon = (out / "lexicon.tsv").read_bytes()
    config.q = 0.01
    third = run_pipeline(config, resume=True)
    assert (out / "lexicon.tsv").read_bytes() == lexicon
    assert third.executed() == ["project"]
    config.drift_gamma = 2.0
    assert run_pipeline(config, resume=True).executed() == ["drift", "train", "eval", "eval_emoticons"]


def test_tampered_output_is_rerun(config):
    run_pipeline(config)
    (config.out / "drift.tsv").write_text("tampered\n")
    assert RunManifest.load(config.out / "manifest.json").verify(config.out) == ["drift.tsv"]
    assert run_pipeline(config, resume=True).executed()[0] == "drift"


def test_stage_failure_names_stage(config, write):
    config.seeds = str(write("noseeds.tsv", "zzzz\tPOS\n"))
    with pytest.raises(StageError) as info:
        run_pipeline(config)
    assert info.value.stage == "project"
    assert "no seed coverage" in str(info.value)
    manifest = json.loads((config.out / "manifest.json").read_text())
    assert manifest["stages"][-1]["status"] == "failed"
    assert (config.out / "alignments.txt").is_file()


def test_external_alignments_are_used(config, write):
    first = run_pipeline(config)
    assert "align" in first.executed()
    config.alignments = str(write("ext.txt", (config.out / "alignments.txt").read_text()))
    config.output_dir = str(config.out.parent / "run2")
    run_pipeline(config)
    assert not (config.out / "translation_table.tsv").exists()
    assert (config.out / "lexicon.tsv").read_bytes() == (config.out.parent / "run" / "lexicon.tsv").read_bytes()
