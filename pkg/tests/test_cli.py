import json
from pathlib import Path

import pytest

from bioprecedence.cli import main
from bioprecedence.ingest import corpus_to_json, export_annotations
from bioprecedence.synth import synthetic_labeled_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    corpus, pairs = synthetic_labeled_corpus(n_docs=8, seed=2)
    (out / "corpus.json").write_text(corpus_to_json(corpus))
    (out / "annotations.json").write_text(export_annotations(pairs))
    return out


@pytest.fixture(scope="module")
def curated_corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("curated")
    code = main([
        "ingest",
        "--conllu", str(FIXTURES / "curated_cases.conllu"),
        "--mentions", str(FIXTURES / "curated_mentions.json"),
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_kappa_identical_files_prints_one(synth_dir, capsys):
    ann = str(synth_dir / "annotations.json")
    assert main(["kappa", ann, ann]) == 0
    assert capsys.readouterr().out.strip() == "1.0000"


def test_kappa_coarse_and_json_flags(synth_dir, capsys):
    ann = str(synth_dir / "annotations.json")
    assert main(["--json", "kappa", ann, ann, "--coarse"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kappa"] == pytest.approx(1.0)
    assert payload["protocol"] == "coarse"


def test_unknown_subcommand_exits_one(capsys):
    assert main(["transmogrify"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_flag_exits_one(synth_dir, capsys):
    ann = str(synth_dir / "annotations.json")
    assert main(["kappa", ann, ann, "--sideways"]) == 1


def test_missing_input_exits_two(tmp_path, capsys):
    assert main(["kappa", "/nonexistent/a.json", "/nonexistent/b.json"]) == 2


def test_ingest_writes_manifest(curated_corpus_dir):
    manifest = json.loads((curated_corpus_dir / "manifest.json").read_text())
    assert manifest["command"][0] == "ingest"
    assert manifest["tool_version"]
    assert len(manifest["input_digests"]) == 2
    assert len(list(curated_corpus_dir.glob("manifest.json"))) == 1


def test_candidates_emits_cross_sentence_binding_pair(curated_corpus_dir, tmp_path):
    out = tmp_path / "cands"
    code = main([
        "candidates",
        "--corpus", str(curated_corpus_dir / "corpus.json"),
        "--allow-same-type",
        "--out", str(out),
    ])
    assert code == 0
    items = json.loads((out / "candidates.json").read_text())
    pair_ids = {item["pair_id"] for item in items}
    assert "crosssent01:cs-b1:cs-b2" in pair_ids
    assert all(item["label"] == "unlabeled" for item in items)


def test_candidates_default_config_filters_same_type(curated_corpus_dir, tmp_path):
    out = tmp_path / "cands_default"
    main(["candidates", "--corpus", str(curated_corpus_dir / "corpus.json"),
          "--out", str(out)])
    items = json.loads((out / "candidates.json").read_text())
    assert "crosssent01:cs-b1:cs-b2" not in {i["pair_id"] for i in items}


def test_evaluate_writes_reports(synth_dir, tmp_path, capsys):
    out = tmp_path / "eval"
    code = main([
        "--jobs", "1", "evaluate",
        "--corpus", str(synth_dir / "corpus.json"),
        "--annotations", str(synth_dir / "annotations.json"),
        "--models", "intra,inter,lr_l1",
        "--folds", "3", "--seed", "5",
        "--out", str(out),
    ])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert set(report["models"]) == {"intra", "inter", "lr_l1"}
    assert (out / "report.txt").exists()
    text = capsys.readouterr().out
    assert "combined" in text


def test_train_predict_round_trip(synth_dir, tmp_path):
    train_out = tmp_path / "model"
    code = main([
        "train",
        "--corpus", str(synth_dir / "corpus.json"),
        "--annotations", str(synth_dir / "annotations.json"),
        "--model", "svm_l1", "--seed", "3",
        "--out", str(train_out),
    ])
    assert code == 0
    pred_out = tmp_path / "preds"
    code = main([
        "predict",
        "--model", str(train_out / "model.json"),
        "--corpus", str(synth_dir / "corpus.json"),
        "--pairs", str(synth_dir / "annotations.json"),
        "--out", str(pred_out),
    ])
    assert code == 0
    preds = json.loads((pred_out / "predictions.json").read_text())
    assert preds and all(p["label"] in ("Nil", "E1 precedes E2", "E2 precedes E1")
                         for p in preds)


def test_sieve_outputs_plan_curve_significance(synth_dir, tmp_path):
    out = tmp_path / "sieve"
    code = main([
        "--jobs", "1", "sieve",
        "--corpus", str(synth_dir / "corpus.json"),
        "--annotations", str(synth_dir / "annotations.json"),
        "--models", "intra,inter,lr_l1",
        "--folds", "3", "--seed", "5", "--iterations", "200",
        "--out", str(out),
    ])
    assert code == 0
    plan = json.loads((out / "plan.json").read_text())
    assert len(plan) == 3
    curve = (out / "curve.csv").read_text().splitlines()
    assert curve[0] == "sieves,added,precision,recall,f1"
    assert len(curve) == 4
    recalls = [float(line.split(",")[3]) for line in curve[1:]]
    assert recalls == sorted(recalls)
    sig = json.loads((out / "significance.json").read_text())
    assert 0.0 <= sig["p_value"] <= 1.0


def test_overlap_and_distributions_commands(synth_dir, tmp_path):
    eval_out = tmp_path / "eval"
    main(["--jobs", "1", "evaluate",
          "--corpus", str(synth_dir / "corpus.json"),
          "--annotations", str(synth_dir / "annotations.json"),
          "--models", "intra,lr_l1", "--folds", "3", "--seed", "1",
          "--out", str(eval_out)])
    overlap_out = tmp_path / "overlap"
    assert main(["overlap", "--report", str(eval_out / "report.json"),
                 "--out", str(overlap_out)]) == 0
    overlap = json.loads((overlap_out / "overlap.json").read_text())
    assert "pairwise" in overlap and (overlap_out / "overlap.csv").exists()

    dist_out = tmp_path / "dist"
    assert main(["distributions",
                 "--corpus", str(synth_dir / "corpus.json"),
                 "--annotations", str(synth_dir / "annotations.json"),
                 "--out", str(dist_out)]) == 0
    assert (dist_out / "distributions.csv").exists()


def test_commands_do_not_mutate_inputs(synth_dir, tmp_path):
    before = (synth_dir / "corpus.json").read_bytes()
    main(["--jobs", "1", "evaluate",
          "--corpus", str(synth_dir / "corpus.json"),
          "--annotations", str(synth_dir / "annotations.json"),
          "--models", "intra", "--folds", "3", "--seed", "1",
          "--out", str(tmp_path / "e")])
    assert (synth_dir / "corpus.json").read_bytes() == before
