"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import pipeline as pl
from .encoder import Vocabulary, build_vocab
from .errors import DataError, NumericError
from .rouge import oracle_labels, write_labeled_corpus, load_labeled_corpus
from .summarizer import SelectionResult, distribution_csv, position_distribution


@click.group()
def cli() -> None:
    """Structure-aware extractive summarization toolkit."""


@cli.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Output corpus JSONL.")
def preprocess(inputs: tuple[str, ...], out: str) -> None:
    """Segment plain-text files (one document each) into a corpus file."""
    docs = []
    for path in inputs:
        text = Path(path).read_text(encoding="utf-8")
        docs.append(corpus_mod.segment_plain_text(text, doc_id=Path(path).stem))
    corpus_mod.write_corpus(docs, out)
    click.echo(f"wrote {len(docs)} documents to {out}")


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Stats CSV (default: stdout).")
@click.option("--hi-depth", type=int, default=None, help="Declared hierarchy depth override.")
def stats(corpus_path: str, out: str | None, hi_depth: int | None) -> None:
    """Hierarchy statistics of a corpus."""
    docs = corpus_mod.load_corpus(corpus_path)
    csv = corpus_mod.corpus_stats(docs, hi_depth=hi_depth).to_csv()
    if out:
        Path(out).write_text(csv, encoding="utf-8")
    else:
        click.echo(csv, nl=False)


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Labeled corpus JSONL.")
@click.option("--max-sentences", default=3, show_default=True, help="Greedy oracle cap.")
def oracle(corpus_path: str, out: str, max_sentences: int) -> None:
    """Add greedy oracle labels to a corpus."""
    docs = corpus_mod.load_corpus(corpus_path)
    labels = [oracle_labels(d, max_sentences) for d in docs]
    write_labeled_corpus(docs, labels, out)
    click.echo(f"labeled {len(docs)} documents -> {out}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Run directory.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
def train(config_path: str, out: str, seed: int | None) -> None:
    """Train a model on labeled train/val corpora from the config file."""
    cfg = pl.ExperimentConfig.load(config_path)
    if seed is not None:
        cfg.train.seed = seed
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_docs, train_labels = load_labeled_corpus(cfg.corpus["train"])
    val_docs, val_labels = load_labeled_corpus(cfg.corpus["val"])
    titles = None
    if cfg.corpus.get("titles"):
        titles = corpus_mod.TitleClassDictionary.load(cfg.corpus["titles"])
    vocab = build_vocab(train_docs, cfg.model.vocab_min_freq)
    vocab.save(out_dir / "vocab.tsv")
    cfg.save(out_dir / "config.yaml")
    import torch

    torch.manual_seed(cfg.train.seed)
    model = pl.SummarizationModel(vocab, cfg.encoding, cfg.model, titles)
    checkpoints = pl.train(
        model, train_docs, train_labels, val_docs, val_labels,
        cfg.train, out_dir, config_echo=cfg.to_dict(),
    )
    for ck in checkpoints:
        click.echo(f"kept {ck.path.name}  step={ck.step}  val_loss={ck.val_loss:.6f}")


def _load_model_for_run(cfg: pl.ExperimentConfig, run_dir: Path) -> pl.SummarizationModel:
    vocab = Vocabulary.load(run_dir / "vocab.tsv")
    titles = None
    if cfg.corpus.get("titles"):
        titles = corpus_mod.TitleClassDictionary.load(cfg.corpus["titles"])
    return pl.SummarizationModel(vocab, cfg.encoding, cfg.model, titles)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run-dir", required=True, type=click.Path(exists=True),
              help="Training run directory (vocab + checkpoints).")
@click.option("--checkpoint", type=click.Path(exists=True), default=None,
              help="Checkpoint file (default: best in run dir).")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Predictions JSONL.")
def predict(config_path: str, run_dir: str, checkpoint: str | None,
            corpus_path: str, out: str) -> None:
    """Score a corpus and write per-document selections."""
    cfg = pl.ExperimentConfig.load(config_path)
    run = Path(run_dir)
    model = _load_model_for_run(cfg, run)
    ck_path = Path(checkpoint) if checkpoint else _best_checkpoint(run)
    pl.load_checkpoint(ck_path, model)
    docs = corpus_mod.load_corpus(corpus_path)
    preds = pl.predict(
        model, docs, cfg.model, cfg.encoding,
        cfg.selection.n, cfg.selection.use_trigram_blocking,
    )
    pl.write_predictions(preds, out)
    click.echo(f"wrote predictions for {len(preds)} documents to {out}")


def _best_checkpoint(run_dir: Path) -> Path:
    cks = sorted(run_dir.glob("checkpoint_step*.pt"))
    if not cks:
        raise DataError(f"no checkpoints found in {run_dir}")
    import torch

    best = min(cks, key=lambda p: torch.load(p, weights_only=False)["val_loss"])
    return best


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Report directory.")
@click.option("--with-lead", type=int, default=None, help="Add a LEAD-n baseline row.")
@click.option("--with-oracle", is_flag=True, help="Add the greedy-oracle upper bound row.")
def evaluate(config_path: str, run_dir: str, corpus_path: str, out: str,
             with_lead: int | None, with_oracle: bool) -> None:
    """Evaluate the kept checkpoints: ROUGE report, distribution CSV, figures."""
    from . import plots

    cfg = pl.ExperimentConfig.load(config_path)
    run = Path(run_dir)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = _load_model_for_run(cfg, run)
    import torch

    cks = []
    for p in sorted(run.glob("checkpoint_step*.pt")):
        payload = torch.load(p, weights_only=False)
        cks.append(pl.CheckpointInfo(path=p, step=payload["step"], val_loss=payload["val_loss"]))
    cks.sort(key=lambda ck: (ck.val_loss, ck.step))
    docs = corpus_mod.load_corpus(corpus_path)
    report = pl.evaluate(cks, model, docs, cfg.model, cfg.encoding, cfg.selection)
    rows = list(report.rows) + [report.averaged]
    distributions = {"model": report.distribution}
    sizes = [d.sentence_count for d in docs]
    if with_lead is not None:
        row, sels = pl.evaluate_lead(docs, with_lead)
        rows.append(row)
        distributions[row.name] = position_distribution(sels, sizes, cfg.selection.distribution_max_index)
    if with_oracle:
        row, sels = pl.evaluate_oracle(docs, cfg.selection.max_oracle_sentences)
        rows.append(row)
        distributions[row.name] = position_distribution(sels, sizes, cfg.selection.distribution_max_index)
    (out_dir / "report.csv").write_text(pl.report_csv(rows), encoding="utf-8")
    (out_dir / "distribution.csv").write_text(distribution_csv(report.distribution), encoding="utf-8")
    plots.plot_rouge_report(rows, out_dir / "report.png")
    plots.plot_position_distribution(distributions, out_dir / "distribution.png")
    click.echo((out_dir / "report.csv").read_text(), nl=False)


@cli.command()
@click.argument("predictions_path", type=click.Path(exists=True))
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--max-index", default=25, show_default=True)
def distribution(predictions_path: str, corpus_path: str, out: str, max_index: int) -> None:
    """Position distribution of predicted selections: CSV plus figure."""
    from . import plots

    docs = corpus_mod.load_corpus(corpus_path)
    sizes = {d.id: d.sentence_count for d in docs}
    selections = []
    counts = []
    with open(predictions_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("id") not in sizes:
                raise DataError(f"{predictions_path}, line {lineno}: unknown document id")
            selections.append(SelectionResult(
                chosen=tuple(rec["chosen"]), summary_text=tuple(rec["summary"]),
            ))
            counts.append(sizes[rec["id"]])
    props = position_distribution(selections, counts, max_index)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "distribution.csv").write_text(distribution_csv(props), encoding="utf-8")
    plots.plot_position_distribution({"model": props}, out_dir / "distribution.png")
    click.echo(f"wrote distribution for {len(selections)} documents to {out_dir}")


@cli.command()
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", default=0, show_default=True)
@click.option("--n-train", default=500, show_default=True)
@click.option("--n-val", default=60, show_default=True)
@click.option("--n-test", default=100, show_default=True)
@click.option("--sections", default=6, show_default=True, help="Mean sections per document.")
@click.option("--sentences", default=8, show_default=True, help="Mean sentences per section.")
@click.option("--vocab-size", default=120, show_default=True)
def synth(out: str, seed: int, n_train: int, n_val: int, n_test: int,
          sections: int, sentences: int, vocab_size: int) -> None:
    """Generate a synthetic structured corpus with planted summary sentences."""
    spec = pl.SyntheticSpec(
        n_train=n_train, n_val=n_val, n_test=n_test,
        sections_mean=sections, sentences_mean=sentences,
        vocab_size=vocab_size, seed=seed,
    )
    paths = pl.generate_synthetic(spec, out)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
