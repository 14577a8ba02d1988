"""Experiment configuration, training loop, evaluation and synthetic corpora.

Training follows the warmup/inverse-sqrt schedule with Adam, gradient
accumulation, periodic validation and top-k checkpoint retention by
validation loss. Everything is deterministic given the configured seed.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

import torch
import yaml
from torch import nn

from .corpus import (
    Document,
    TitleClassDictionary,
    all_ssvs,
    load_corpus,
    write_corpus,
)
from .encoder import (
    STECache,
    SentenceEncoder,
    Vocabulary,
    build_vocab,
    classified_ste,
    prepare_input,
    ste,
    tokenize,
)
from .errors import DataError, NumericError
from .posenc import EncodingConfig
from .rouge import RougeScore, RougeTriple, oracle_labels, rouge_score
from .summarizer import ExtractiveScorer, SelectionResult, lead_n, position_distribution, select

CHECKPOINT_FORMAT_VERSION = 1


# --- configuration -----------------------------------------------------------

@dataclass
class ModelConfig:
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 256
    max_len: int = 512
    n_sum_layers: int = 2
    vocab_min_freq: int = 1


@dataclass
class TrainConfig:
    total_steps: int = 200
    warmup_steps: int = 40
    peak_lr_factor: float = 2e-3
    batch_size: int = 8
    accumulation_count: int = 1
    eval_every: int = 50
    keep_top_k: int = 3
    seed: int = 0
    fine_tune_encoder: bool = True

    def __post_init__(self) -> None:
        if self.warmup_steps > self.total_steps:
            raise ValueError("warmup_steps must not exceed total_steps")
        if self.keep_top_k < 1:
            raise ValueError("keep_top_k must be >= 1")


@dataclass
class SelectionConfig:
    n: int = 3
    use_trigram_blocking: bool = True
    max_oracle_sentences: int = 3
    distribution_max_index: int = 25


@dataclass
class ExperimentConfig:
    corpus: dict = field(default_factory=dict)  # train/val/test/titles paths
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def to_dict(self) -> dict:
        d = {
            "corpus": dict(self.corpus),
            "encoding": asdict(self.encoding),
            "model": asdict(self.model),
            "train": asdict(self.train),
            "selection": asdict(self.selection),
        }
        enc = d["encoding"]
        enc["setting"] = f"{enc.pop('method')}-{enc.pop('mode')}"
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        enc_raw = dict(raw.get("encoding", {}))
        setting = enc_raw.pop("setting", None)
        if setting is not None:
            method, _, mode = setting.partition("-")
            enc_raw["method"], enc_raw["mode"] = method, mode
        try:
            return cls(
                corpus=dict(raw.get("corpus", {})),
                encoding=EncodingConfig(**enc_raw),
                model=ModelConfig(**raw.get("model", {})),
                train=TrainConfig(**raw.get("train", {})),
                selection=SelectionConfig(**raw.get("selection", {})),
            )
        except (TypeError, ValueError) as exc:
            raise DataError(f"invalid experiment config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise DataError(f"{path}: config must be a mapping")
        return cls.from_dict(raw)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)


def lr_at(step: int, cfg: TrainConfig) -> float:
    """Warmup then inverse-sqrt decay; peaks at warmup_steps."""
    if step < 1:
        raise ValueError("step must be >= 1")
    return cfg.peak_lr_factor * min(step ** -0.5, step * cfg.warmup_steps ** -1.5)


# --- model assembly ----------------------------------------------------------

class SummarizationModel(nn.Module):
    """Sentence encoder plus structure-injected extractive scorer."""

    def __init__(
        self,
        vocab: Vocabulary,
        enc_cfg: EncodingConfig,
        model_cfg: ModelConfig,
        title_classes: TitleClassDictionary | None = None,
    ):
        super().__init__()
        self.enc_cfg = enc_cfg
        self.model_cfg = model_cfg
        self.vocab = vocab
        self.title_classes = title_classes
        self.encoder = SentenceEncoder(
            vocab_size=len(vocab),
            d_model=model_cfg.d_model,
            n_heads=model_cfg.n_heads,
            n_layers=model_cfg.n_layers,
            d_ff=model_cfg.d_ff,
            max_len=model_cfg.max_len,
            enc_cfg=enc_cfg,
        )
        self.scorer = ExtractiveScorer(
            enc_cfg,
            n_sum_layers=model_cfg.n_sum_layers,
            n_heads=model_cfg.n_heads,
            d_ff=model_cfg.d_ff,
        )
        self._ste_cache: STECache | None = None

    def enable_ste_cache(self) -> None:
        """Memoize title embeddings; valid only while the encoder is frozen."""
        self._ste_cache = STECache(
            self.encoder, self.vocab, self.title_classes, self.enc_cfg.classified_ste
        )

    def clear_ste_cache(self) -> None:
        self._ste_cache = None

    def _title_embedding(self, title: str) -> torch.Tensor:
        if self._ste_cache is not None:
            return self._ste_cache.get(title)
        if self.enc_cfg.classified_ste:
            if self.title_classes is None:
                raise DataError("classified STE enabled but no title-class dictionary")
            return classified_ste(title, self.title_classes, self.encoder, self.vocab).embedding
        return ste(self.vocab.encode(tokenize(title)), self.encoder)

    def _stes_for(self, batch: "Batch") -> torch.Tensor:
        unique = list(dict.fromkeys(t for doc_titles in batch.titles for t in doc_titles if t))
        if any(t is None for doc_titles in batch.titles for t in doc_titles):
            raise DataError("title embedding injection enabled but a section has no title")
        vecs = {t: self._title_embedding(t) for t in unique}
        d = self.model_cfg.d_model
        out = torch.zeros(len(batch.titles), batch.max_sentences, d, dtype=next(self.parameters()).dtype)
        rows = []
        for doc_titles in batch.titles:
            row = torch.stack(
                [vecs[t] for t in doc_titles]
                + [torch.zeros(d, dtype=out.dtype)] * (batch.max_sentences - len(doc_titles))
            )
            rows.append(row)
        return torch.stack(rows)

    def forward(self, batch: "Batch", fine_tune_encoder: bool = True):
        if fine_tune_encoder:
            hidden = self.encoder(batch.ids, batch.pad_mask, batch.tsvs)
        else:
            with torch.no_grad():
                hidden = self.encoder(batch.ids, batch.pad_mask, batch.tsvs)
        d = hidden.shape[-1]
        gather_idx = batch.bos_index.unsqueeze(-1).expand(-1, -1, d)
        sentence_vectors = torch.gather(hidden, 1, gather_idx)
        stes = self._stes_for(batch) if self.enc_cfg.inject_ste else None
        return self.scorer(sentence_vectors, batch.ssvs, stes, batch.sent_mask)

    def loss(self, batch: "Batch", fine_tune_encoder: bool = True) -> torch.Tensor:
        """Mean over documents of the per-document mean sentence BCE."""
        pred = self.forward(batch, fine_tune_encoder)
        p = torch.clamp(pred.y_hat, 1e-7, 1 - 1e-7)
        yf = batch.labels.to(p.dtype)
        losses = -(yf * torch.log(p) + (1 - yf) * torch.log1p(-p))
        keep = (~batch.sent_mask).to(p.dtype)
        per_doc = (losses * keep).sum(dim=1) / keep.sum(dim=1)
        return per_doc.mean()


# --- batching ----------------------------------------------------------------

@dataclass
class Batch:
    ids: torch.Tensor  # [B, T]
    pad_mask: torch.Tensor  # [B, T], True at padding
    tsvs: torch.Tensor | None  # [B, T, 3]
    bos_index: torch.Tensor  # [B, N]
    ssvs: torch.Tensor  # [B, N, 2]
    sent_mask: torch.Tensor  # [B, N], True at padded sentence slots
    labels: torch.Tensor  # [B, N]
    titles: list[list[str | None]]  # per doc, per surviving sentence
    n_sentences: list[int]
    max_sentences: int
    docs: list[Document]


def make_batch(
    docs: list[Document],
    labels: list[list[int]] | None,
    vocab: Vocabulary,
    model_cfg: ModelConfig,
    enc_cfg: EncodingConfig,
) -> Batch:
    prepared = [prepare_input(d, vocab, model_cfg.max_len) for d in docs]
    B = len(docs)
    T = max(len(p.ids) for p in prepared)
    N = max(p.n_sentences for p in prepared)
    ids = torch.zeros(B, T, dtype=torch.long)
    pad_mask = torch.ones(B, T, dtype=torch.bool)
    need_tsv = enc_cfg.inject_the
    tsvs = torch.zeros(B, T, 3, dtype=torch.long) if need_tsv else None
    bos_index = torch.zeros(B, N, dtype=torch.long)
    ssvs = torch.zeros(B, N, 2, dtype=torch.long)
    sent_mask = torch.ones(B, N, dtype=torch.bool)
    lab = torch.zeros(B, N)
    titles: list[list[str | None]] = []
    for b, (doc, prep) in enumerate(zip(docs, prepared)):
        L = len(prep.ids)
        ids[b, :L] = torch.tensor(prep.ids)
        pad_mask[b, :L] = False
        if need_tsv:
            tsvs[b, :L] = torch.tensor(prep.tsvs)
        n = prep.n_sentences
        bos_index[b, :n] = torch.tensor(prep.bos_positions)
        doc_ssvs = all_ssvs(doc)[:n]
        if enc_cfg.method == "la":
            for v in doc_ssvs:
                if max(v.a_s, v.b_s) >= enc_cfg.max_positions:
                    raise DataError(
                        f"document {doc.id!r}: hierarchical position ({v.a_s}, {v.b_s}) "
                        f"outside the learned tables of length {enc_cfg.max_positions}"
                    )
        ssvs[b, :n] = torch.tensor([(v.a_s, v.b_s) for v in doc_ssvs])
        sent_mask[b, :n] = False
        if labels is not None:
            doc_lab = labels[b]
            if len(doc_lab) < n:
                raise DataError(f"document {doc.id!r}: labels shorter than sentences")
            lab[b, :n] = torch.tensor(doc_lab[:n], dtype=torch.float)
        titles.append([doc.sections[v.a_s].title for v in doc_ssvs])
    return Batch(
        ids=ids, pad_mask=pad_mask, tsvs=tsvs, bos_index=bos_index, ssvs=ssvs,
        sent_mask=sent_mask, labels=lab, titles=titles,
        n_sentences=[p.n_sentences for p in prepared], max_sentences=N, docs=docs,
    )


# --- checkpointing -----------------------------------------------------------

@dataclass
class CheckpointInfo:
    path: Path
    step: int
    val_loss: float


def save_checkpoint(
    path: str | Path,
    model: SummarizationModel,
    step: int,
    val_loss: float,
    config: dict,
) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    if not (val_loss == val_loss and abs(val_loss) != float("inf")):
        raise NumericError(f"refusing to checkpoint non-finite validation loss at step {step}")
    path = Path(path)
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "step": step,
        "val_loss": val_loss,
        "model_state": model.state_dict(),
        "config": config,
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def load_checkpoint(path: str | Path, model: SummarizationModel) -> dict:
    payload = torch.load(path, weights_only=False)
    if payload.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint format")
    model.load_state_dict(payload["model_state"])
    return payload


# --- training ----------------------------------------------------------------

def _validation_loss(
    model: SummarizationModel,
    docs: list[Document],
    labels: list[list[int]],
    cfg: TrainConfig,
    model_cfg: ModelConfig,
    enc_cfg: EncodingConfig,
) -> float:
    model.eval()
    total = 0.0
    count = 0
    with torch.no_grad():
        for i in range(0, len(docs), cfg.batch_size):
            chunk = docs[i : i + cfg.batch_size]
            chunk_labels = labels[i : i + cfg.batch_size]
            batch = make_batch(chunk, chunk_labels, model.vocab, model_cfg, enc_cfg)
            total += float(model.loss(batch, fine_tune_encoder=True)) * len(chunk)
            count += len(chunk)
    model.train()
    return total / count


def train(
    model: SummarizationModel,
    train_docs: list[Document],
    train_labels: list[list[int]],
    val_docs: list[Document],
    val_labels: list[list[int]],
    cfg: TrainConfig,
    out_dir: str | Path,
    config_echo: dict | None = None,
) -> list[CheckpointInfo]:
    """Run the optimizer for cfg.total_steps updates and keep the top-k
    checkpoints by validation loss. Returns them sorted best-first."""
    if not train_docs or not val_docs:
        raise DataError("training and validation corpora must be non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enc_cfg, model_cfg = model.enc_cfg, model.model_cfg
    config_echo = config_echo or {}

    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)

    if not cfg.fine_tune_encoder:
        for p in model.encoder.parameters():
            p.requires_grad_(False)
        if enc_cfg.inject_ste:
            model.enable_ste_cache()
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=0.0, betas=(0.9, 0.999), eps=1e-8)

    def doc_stream():
        while True:
            order = list(range(len(train_docs)))
            rng.shuffle(order)
            yield from order

    stream = doc_stream()
    docs_per_update = cfg.batch_size * cfg.accumulation_count
    checkpoints: list[CheckpointInfo] = []
    model.train()

    for step in range(1, cfg.total_steps + 1):
        optimizer.zero_grad()
        idxs = [next(stream) for _ in range(docs_per_update)]
        for m in range(cfg.accumulation_count):
            micro = idxs[m * cfg.batch_size : (m + 1) * cfg.batch_size]
            batch = make_batch(
                [train_docs[i] for i in micro],
                [train_labels[i] for i in micro],
                model.vocab, model_cfg, enc_cfg,
            )
            loss = model.loss(batch, cfg.fine_tune_encoder) * (len(micro) / docs_per_update)
            if not torch.isfinite(loss):
                raise NumericError(f"non-finite training loss at step {step}")
            loss.backward()
        lr = lr_at(step, cfg)
        for group in optimizer.param_groups:
            group["lr"] = lr
        optimizer.step()

        if step % cfg.eval_every == 0 or step == cfg.total_steps:
            val_loss = _validation_loss(model, val_docs, val_labels, cfg, model_cfg, enc_cfg)
            path = out_dir / f"checkpoint_step{step:07d}.pt"
            worst = max((ck.val_loss for ck in checkpoints), default=float("inf"))
            if len(checkpoints) < cfg.keep_top_k or val_loss < worst:
                save_checkpoint(path, model, step, val_loss, config_echo)
                checkpoints.append(CheckpointInfo(path=path, step=step, val_loss=val_loss))
                checkpoints.sort(key=lambda ck: (ck.val_loss, ck.step))
                while len(checkpoints) > cfg.keep_top_k:
                    evicted = checkpoints.pop()
                    evicted.path.unlink(missing_ok=True)
    return checkpoints


# --- prediction and evaluation ----------------------------------------------

@dataclass
class DocumentPrediction:
    doc: Document
    scores: list[float]
    selection: SelectionResult


def predict(
    model: SummarizationModel,
    docs: list[Document],
    model_cfg: ModelConfig,
    enc_cfg: EncodingConfig,
    n: int,
    use_trigram_blocking: bool,
    batch_size: int = 16,
) -> list[DocumentPrediction]:
    model.eval()
    if not cfg_allows_ste_cache(model):
        model.clear_ste_cache()
    out: list[DocumentPrediction] = []
    with torch.no_grad():
        for i in range(0, len(docs), batch_size):
            chunk = docs[i : i + batch_size]
            batch = make_batch(chunk, None, model.vocab, model_cfg, enc_cfg)
            pred = model.forward(batch, fine_tune_encoder=True)
            for b, doc in enumerate(chunk):
                n_sent = batch.n_sentences[b]
                scores = [float(v) for v in pred.y_hat[b, :n_sent]]
                texts = [s.text for s in doc.sentences[:n_sent]]
                sel = select(scores, texts, n, use_trigram_blocking)
                out.append(DocumentPrediction(doc=doc, scores=scores, selection=sel))
    model.train()
    return out


def cfg_allows_ste_cache(model: SummarizationModel) -> bool:
    return all(not p.requires_grad for p in model.encoder.parameters())


def write_predictions(predictions: list[DocumentPrediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            fh.write(json.dumps({
                "id": p.doc.id,
                "scores": [round(s, 6) for s in p.scores],
                "chosen": list(p.selection.chosen),
                "summary": list(p.selection.summary_text),
            }) + "\n")


@dataclass
class EvalRow:
    name: str
    score: RougeScore


@dataclass
class EvalReport:
    rows: list[EvalRow]
    averaged: EvalRow
    distribution: list[float]
    selections: list[SelectionResult]  # from the best checkpoint


def _mean_rouge(scores: list[RougeScore]) -> RougeScore:
    def mean_triple(triples: list[RougeTriple]) -> RougeTriple:
        n = len(triples)
        return RougeTriple(
            precision=sum(t.precision for t in triples) / n,
            recall=sum(t.recall for t in triples) / n,
            f1=sum(t.f1 for t in triples) / n,
        )

    return RougeScore(
        r1=mean_triple([s.r1 for s in scores]),
        r2=mean_triple([s.r2 for s in scores]),
        rl=mean_triple([s.rl for s in scores]),
    )


def score_selections(docs: list[Document], selections: list[SelectionResult]) -> RougeScore:
    """Corpus-level ROUGE: mean of per-document F1 scores."""
    per_doc = [
        rouge_score(list(sel.summary_text), list(doc.gold_summary))
        for doc, sel in zip(docs, selections)
    ]
    return _mean_rouge(per_doc)


def evaluate(
    checkpoints: list[CheckpointInfo],
    model: SummarizationModel,
    test_docs: list[Document],
    model_cfg: ModelConfig,
    enc_cfg: EncodingConfig,
    selection_cfg: SelectionConfig,
) -> EvalReport:
    """Per-checkpoint and averaged ROUGE plus the position distribution of
    the best checkpoint's selections."""
    if not checkpoints:
        raise DataError("no checkpoints to evaluate")
    rows: list[EvalRow] = []
    best_selections: list[SelectionResult] | None = None
    for ck in checkpoints:
        load_checkpoint(ck.path, model)
        preds = predict(
            model, test_docs, model_cfg, enc_cfg,
            selection_cfg.n, selection_cfg.use_trigram_blocking,
        )
        selections = [p.selection for p in preds]
        rows.append(EvalRow(name=f"checkpoint-{ck.step}", score=score_selections(test_docs, selections)))
        if best_selections is None:
            best_selections = selections
    averaged = EvalRow(name="averaged", score=_mean_rouge([r.score for r in rows]))
    dist = position_distribution(
        best_selections,
        [d.sentence_count for d in test_docs],
        selection_cfg.distribution_max_index,
    )
    return EvalReport(rows=rows, averaged=averaged, distribution=dist, selections=best_selections)


def evaluate_lead(docs: list[Document], n: int) -> tuple[EvalRow, list[SelectionResult]]:
    selections = [lead_n(d, n) for d in docs]
    return EvalRow(name=f"lead-{n}", score=score_selections(docs, selections)), selections


def evaluate_oracle(docs: list[Document], max_sentences: int) -> tuple[EvalRow, list[SelectionResult]]:
    """Upper-bound row: score the greedy oracle's own summaries."""
    selections = []
    for doc in docs:
        lab = oracle_labels(doc, max_sentences)
        chosen = tuple(sorted(lab.chosen_order))
        selections.append(SelectionResult(
            chosen=chosen,
            summary_text=tuple(doc.sentences[i].text for i in chosen),
        ))
    return EvalRow(name="oracle", score=score_selections(docs, selections)), selections


def report_csv(rows: list[EvalRow]) -> str:
    lines = ["model,r1,r2,rl"]
    for row in rows:
        s = row.score
        lines.append(f"{row.name},{s.r1.f1:.6f},{s.r2.f1:.6f},{s.rl.f1:.6f}")
    return "\n".join(lines) + "\n"


# --- synthetic corpus ---------------------------------------------------------

DEFAULT_TITLE_CLASSES = {
    "introduction": ["introduction", "intro", "overview"],
    "background": ["background", "related work", "literature review"],
    "methods": ["methods", "method", "materials and methods", "approach"],
    "results": ["results", "findings", "experimental results"],
    "discussion": ["discussion", "analysis"],
    "conclusions": ["conclusion", "conclusions", "concluding remarks"],
}


@dataclass
class SyntheticSpec:
    """Desk-scale corpus with structure-planted positive sentences.

    Positive probability of a sentence is base_prob, plus position_boost when
    its in-section index is a designated one, plus class_boost when its
    section belongs to a designated title class. Gold summaries are the
    planted sentences verbatim, so structure carries the label signal while
    token content is exchangeable noise.
    """

    n_train: int = 500
    n_val: int = 60
    n_test: int = 100
    sections_mean: int = 6
    sections_jitter: int = 1
    sentences_mean: int = 8
    sentences_jitter: int = 3
    vocab_size: int = 120
    tokens_min: int = 6
    tokens_max: int = 11
    base_prob: float = 0.02
    position_boost: float = 0.55
    class_boost: float = 0.30
    boost_classes: tuple[str, ...] = ("conclusions", "results")
    boost_positions: tuple[int, ...] = (0, 1)
    summary_cap: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        for p in (self.base_prob, self.position_boost, self.class_boost):
            if not 0.0 <= p <= 1.0:
                raise DataError("probabilities must lie in [0, 1]")
        if self.sections_mean - self.sections_jitter < 1 or self.sentences_mean - self.sentences_jitter < 1:
            raise DataError("jitter would allow empty sections or documents")


def _synthetic_document(spec: SyntheticSpec, rng: random.Random, doc_id: str,
                        title_classes: TitleClassDictionary) -> Document:
    from .corpus import Section, Sentence

    class_names = list(DEFAULT_TITLE_CLASSES)
    n_sections = rng.randint(
        spec.sections_mean - spec.sections_jitter, spec.sections_mean + spec.sections_jitter
    )
    # boosted classes always present; remaining slots drawn from the rest
    others = [c for c in class_names if c not in spec.boost_classes]
    chosen_classes = list(spec.boost_classes)[:n_sections]
    while len(chosen_classes) < n_sections:
        chosen_classes.append(others[(len(chosen_classes) - len(spec.boost_classes)) % len(others)])
    rng.shuffle(chosen_classes)

    sections = []
    probs: list[float] = []
    flat_idx = 0
    positive_pool: list[int] = []  # highest-probability sentences
    max_prob = 0.0
    for cls in chosen_classes:
        n_sents = rng.randint(
            spec.sentences_mean - spec.sentences_jitter, spec.sentences_mean + spec.sentences_jitter
        )
        title = rng.choice(DEFAULT_TITLE_CLASSES[cls])
        sentences = []
        for b in range(n_sents):
            n_tok = rng.randint(spec.tokens_min, spec.tokens_max)
            words = [f"w{rng.randrange(spec.vocab_size):03d}" for _ in range(n_tok)]
            text = " ".join(words) + " ."
            sentences.append(Sentence.from_text(text))
            p = spec.base_prob
            if b in spec.boost_positions:
                p += spec.position_boost
            if cls in spec.boost_classes:
                p += spec.class_boost
            p = min(p, 1.0)
            probs.append(p)
            if p > max_prob:
                max_prob, positive_pool = p, [flat_idx]
            elif p == max_prob:
                positive_pool.append(flat_idx)
            flat_idx += 1
        sections.append(Section(title=title, sentences=tuple(sentences)))

    positives = [i for i, p in enumerate(probs) if rng.random() < p]
    # guarantee the strongest-signal pool contributes at least one sentence
    if not any(i in positives for i in positive_pool):
        positives.append(rng.choice(positive_pool))
        positives.sort()
    if len(positives) > spec.summary_cap:
        positives = sorted(rng.sample(positives, spec.summary_cap))

    all_sentences = [s for sec in sections for s in sec.sentences]
    summary = tuple(all_sentences[i].text for i in positives)
    return Document(id=doc_id, sections=tuple(sections), gold_summary=summary)


def generate_synthetic(spec: SyntheticSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write train/val/test corpora and the title-class dictionary."""
    if spec.n_train < 1 or spec.n_val < 1 or spec.n_test < 1:
        raise DataError("all splits must contain at least one document")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    title_classes = TitleClassDictionary.from_mapping(DEFAULT_TITLE_CLASSES)
    paths: dict[str, Path] = {}
    for split, count, offset in (
        ("train", spec.n_train, 0),
        ("val", spec.n_val, 1),
        ("test", spec.n_test, 2),
    ):
        rng = random.Random(f"{spec.seed}:{split}")
        docs = [
            _synthetic_document(spec, rng, f"{split}-{i:05d}", title_classes)
            for i in range(count)
        ]
        path = out_dir / f"{split}.jsonl"
        write_corpus(docs, path)
        paths[split] = path
    titles_path = out_dir / "titles.json"
    title_classes.save(titles_path)
    paths["titles"] = titles_path
    return paths


def label_documents(docs: list[Document], max_oracle_sentences: int) -> list[list[int]]:
    return [oracle_labels(d, max_oracle_sentences).y for d in docs]
