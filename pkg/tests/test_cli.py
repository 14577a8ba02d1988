import json

import pytest
import yaml

from hiersum.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One small synth corpus + labels + training run shared by the CLI tests."""
    ws = tmp_path_factory.mktemp("cli")
    corpus = ws / "corpus"
    assert main(["synth", "--out", str(corpus), "--seed", "5",
                 "--n-train", "12", "--n-val", "4", "--n-test", "6",
                 "--sections", "3", "--sentences", "4", "--vocab-size", "40"]) == 0
    for split in ("train", "val"):
        assert main(["oracle", str(corpus / f"{split}.jsonl"),
                     "--out", str(corpus / f"{split}.labeled.jsonl"),
                     "--max-sentences", "3"]) == 0
    config = {
        "corpus": {
            "train": str(corpus / "train.labeled.jsonl"),
            "val": str(corpus / "val.labeled.jsonl"),
            "titles": str(corpus / "titles.json"),
        },
        "encoding": {"setting": "la-sum", "d_model": 16, "max_positions": 64,
                     "inject_spe": True, "inject_she": True, "inject_ste": False},
        "model": {"d_model": 16, "n_heads": 2, "n_layers": 1, "d_ff": 32,
                  "max_len": 256, "n_sum_layers": 1},
        "train": {"total_steps": 6, "warmup_steps": 2, "peak_lr_factor": 1e-3,
                  "batch_size": 4, "eval_every": 3, "keep_top_k": 2, "seed": 0},
        "selection": {"n": 2, "distribution_max_index": 10},
    }
    cfg_path = ws / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    run = ws / "run"
    assert main(["train", "--config", str(cfg_path), "--out", str(run)]) == 0
    return {"ws": ws, "corpus": corpus, "config": cfg_path, "run": run}


class TestPipelineCommands:
    def test_train_outputs(self, workspace):
        run = workspace["run"]
        assert (run / "vocab.tsv").exists()
        assert (run / "config.yaml").exists()
        assert len(list(run.glob("checkpoint_step*.pt"))) == 2

    def test_predict(self, workspace):
        out = workspace["ws"] / "preds.jsonl"
        rc = main(["predict", "--config", str(workspace["config"]),
                   "--run-dir", str(workspace["run"]),
                   "--corpus", str(workspace["corpus"] / "test.jsonl"),
                   "--out", str(out)])
        assert rc == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(recs) == 6
        assert all(len(r["chosen"]) <= 2 for r in recs)
        assert all(list(r["chosen"]) == sorted(r["chosen"]) for r in recs)

    def test_evaluate_writes_report_and_figures(self, workspace):
        out = workspace["ws"] / "report"
        rc = main(["evaluate", "--config", str(workspace["config"]),
                   "--run-dir", str(workspace["run"]),
                   "--corpus", str(workspace["corpus"] / "test.jsonl"),
                   "--out", str(out), "--with-lead", "2", "--with-oracle"])
        assert rc == 0
        report = (out / "report.csv").read_text().splitlines()
        assert report[0] == "model,r1,r2,rl"
        names = [l.split(",")[0] for l in report[1:]]
        assert "averaged" in names and "lead-2" in names and "oracle" in names
        assert (out / "report.png").stat().st_size > 0
        assert (out / "distribution.csv").read_text().startswith("index,proportion")
        assert (out / "distribution.png").stat().st_size > 0

    def test_distribution_command(self, workspace):
        preds = workspace["ws"] / "preds.jsonl"
        if not preds.exists():
            self.test_predict(workspace)
        out = workspace["ws"] / "dist"
        rc = main(["distribution", str(preds),
                   str(workspace["corpus"] / "test.jsonl"),
                   "--out", str(out), "--max-index", "8"])
        assert rc == 0
        lines = (out / "distribution.csv").read_text().splitlines()
        assert len(lines) == 10  # header + indices 0..8
        assert (out / "distribution.png").stat().st_size > 0


class TestTextCommands:
    def test_preprocess_and_stats(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text("First sentence here. Second one too.\n\nAnother paragraph.\n")
        out = tmp_path / "corpus.jsonl"
        assert main(["preprocess", str(doc), "--out", str(out)]) == 0
        rec = json.loads(out.read_text().splitlines()[0])
        assert rec["id"] == "doc"
        stats_out = tmp_path / "stats.csv"
        assert main(["stats", str(out), "--out", str(stats_out)]) == 0
        assert stats_out.read_text().startswith("n_docs,avg_sentences")


class TestExitCodes:
    def test_usage_error(self):
        assert main(["train"]) == 1

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_data_error(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json\n")
        assert main(["stats", str(bad)]) == 2

    def test_numeric_error_path(self, workspace, tmp_path, monkeypatch):
        import hiersum.pipeline as pl
        from hiersum.errors import NumericError

        def boom(*a, **kw):
            raise NumericError("non-finite training loss at step 1")

        monkeypatch.setattr(pl, "train", boom)
        assert main(["train", "--config", str(workspace["config"]),
                     "--out", str(tmp_path / "r")]) == 3
