"""Structure injection, inter-sentence scoring and sentence selection.

Sentence vectors from the encoder are enriched by pure addition: a learned
linear sentence position embedding, a hierarchical position embedding of the
sentence's (section, in-section) indices, and optionally a section title
embedding. Two stacked Transformer layers then produce contextual sentence
embeddings scored by a sigmoid classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .corpus import Document
from .errors import DataError, NumericError
from .posenc import EncodingConfig, HierarchicalEncoder
from .rouge import rouge_tokenize
from .encoder import TransformerBlock


@dataclass
class SentenceScorePrediction:
    y_hat: torch.Tensor  # [n_sentences], in (0, 1)
    hs: torch.Tensor  # [n_sentences, d_model] contextual sentence embeddings


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple[int, ...]  # strictly increasing global sentence indices
    summary_text: tuple[str, ...]  # chosen sentences in document order


class ExtractiveScorer(nn.Module):
    """Injection + inter-sentence Transformer layers + sigmoid classifier."""

    def __init__(
        self,
        cfg: EncodingConfig,
        n_sum_layers: int = 2,
        n_heads: int = 4,
        d_ff: int = 256,
    ):
        super().__init__()
        if not 1 <= n_sum_layers <= 3:
            raise ValueError("n_sum_layers must be between 1 and 3")
        self.cfg = cfg
        d = cfg.d_model
        if cfg.inject_spe:
            self.spe_table = nn.Parameter(torch.randn(cfg.max_positions, d) * cfg.la_init_std)
        else:
            self.spe_table = None
        if cfg.inject_she:
            self.she_encoder = HierarchicalEncoder(2, cfg)
        else:
            self.she_encoder = None
        self.layers = nn.ModuleList(
            TransformerBlock(d, n_heads, d_ff) for _ in range(n_sum_layers)
        )
        self.final_ln = nn.LayerNorm(d)
        self.classifier = nn.Linear(d, 1)

    def inject(
        self,
        sentence_vectors: torch.Tensor,  # [..., N, d]
        ssvs: torch.Tensor,  # [..., N, 2]
        stes: torch.Tensor | None = None,  # [..., N, d]
    ) -> torch.Tensor:
        cfg = self.cfg
        out = sentence_vectors
        if cfg.inject_spe:
            n = sentence_vectors.shape[-2]
            if n > self.spe_table.shape[0]:
                raise DataError(
                    f"document has {n} sentences but the linear sentence position "
                    f"table holds {self.spe_table.shape[0]}"
                )
            out = out + self.spe_table[:n]
        if cfg.inject_she:
            if ssvs.shape[:-1] != sentence_vectors.shape[:-1]:
                raise DataError("sentence vectors and SSVs are misaligned")
            out = out + self.she_encoder(ssvs)
        if cfg.inject_ste:
            if stes is None:
                raise DataError("title embedding injection enabled but no STEs given")
            if stes.shape != sentence_vectors.shape:
                raise DataError("sentence vectors and STEs are misaligned")
            out = out + stes
        return out

    def score(
        self,
        injected: torch.Tensor,  # [B, N, d] or [N, d]
        sent_mask: torch.Tensor | None = None,  # True at padded sentence slots
    ) -> SentenceScorePrediction:
        squeeze = injected.dim() == 2
        x = injected.unsqueeze(0) if squeeze else injected
        if x.shape[1] < 1:
            raise DataError("at least one sentence is required")
        mask = sent_mask.unsqueeze(0) if (squeeze and sent_mask is not None) else sent_mask
        for layer in self.layers:
            x = layer(x, key_padding_mask=mask)
        hs = self.final_ln(x)
        y_hat = torch.sigmoid(self.classifier(hs).squeeze(-1))
        if not torch.isfinite(y_hat).all():
            raise NumericError("non-finite activations in sentence scorer")
        if squeeze:
            return SentenceScorePrediction(y_hat=y_hat[0], hs=hs[0])
        return SentenceScorePrediction(y_hat=y_hat, hs=hs)

    def forward(self, sentence_vectors, ssvs, stes=None, sent_mask=None) -> SentenceScorePrediction:
        return self.score(self.inject(sentence_vectors, ssvs, stes), sent_mask)


def bce_loss(
    y_hat: torch.Tensor,
    y: torch.Tensor,
    sent_mask: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean binary cross entropy with scores clamped to [1e-7, 1 - 1e-7].

    sent_mask marks padded sentence slots (True = padding, excluded).
    """
    if y_hat.shape != y.shape:
        raise DataError("scores and labels are misaligned")
    yf = y.to(y_hat.dtype)
    if not torch.logical_or(yf == 0, yf == 1).all():
        raise DataError("labels must be 0 or 1")
    p = torch.clamp(y_hat, 1e-7, 1 - 1e-7)
    losses = -(yf * torch.log(p) + (1 - yf) * torch.log1p(-p))
    if sent_mask is None:
        return losses.mean()
    keep = ~sent_mask
    if keep.sum() == 0:
        raise DataError("all sentence slots are masked")
    return losses[keep].mean()


def _trigrams(text: str) -> set[tuple[str, str, str]]:
    toks = rouge_tokenize(text)
    return {tuple(toks[i : i + 3]) for i in range(len(toks) - 2)}


def select(
    scores: list[float],
    sentences: list[str],
    n: int,
    use_trigram_blocking: bool = False,
) -> SelectionResult:
    """Pick up to n sentences by descending score (ties favor lower index).

    With trigram blocking on, a candidate sharing any word trigram with the
    already-chosen sentences is skipped.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(scores) != len(sentences):
        raise DataError("scores and sentences are misaligned")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    chosen: list[int] = []
    seen: set[tuple[str, str, str]] = set()
    for i in order:
        if use_trigram_blocking:
            tri = _trigrams(sentences[i])
            if tri & seen:
                continue
            seen |= tri
        chosen.append(i)
        if len(chosen) == n:
            break
    chosen.sort()
    return SelectionResult(
        chosen=tuple(chosen),
        summary_text=tuple(sentences[i] for i in chosen),
    )


def lead_n(doc: Document, n: int) -> SelectionResult:
    """Baseline: the first n sentences in document order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = min(n, doc.sentence_count)
    sents = doc.sentences
    return SelectionResult(
        chosen=tuple(range(k)),
        summary_text=tuple(sents[i].text for i in range(k)),
    )


def position_distribution(
    selections: list[SelectionResult],
    doc_sentence_counts: list[int],
    max_index: int,
) -> list[float]:
    """Proportion of summaries containing each linear sentence index.

    Entry k = (#summaries containing index k) / (#documents having index k).
    Indices >= max_index are aggregated into the final entry.
    """
    if not selections:
        raise DataError("no selections given")
    if len(selections) != len(doc_sentence_counts):
        raise DataError("selections and document sizes are misaligned")
    hits = [0] * (max_index + 1)
    avail = [0] * (max_index + 1)
    for sel, n_sents in zip(selections, doc_sentence_counts):
        for k in range(min(n_sents, max_index)):
            avail[k] += 1
        if n_sents > max_index:
            avail[max_index] += 1
        tail_hit = False
        for i in sel.chosen:
            if i < max_index:
                hits[i] += 1
            else:
                tail_hit = True
        if tail_hit:
            hits[max_index] += 1
    return [h / a if a else 0.0 for h, a in zip(hits, avail)]


def distribution_csv(proportions: list[float]) -> str:
    lines = ["index,proportion"]
    lines += [f"{k},{p:.6f}" for k, p in enumerate(proportions)]
    return "\n".join(lines) + "\n"
