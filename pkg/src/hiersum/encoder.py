"""Word-level vocabulary and the trainable sentence encoder.

The encoder is a small pre-norm Transformer stack. A BOS marker is inserted
before every sentence and the final hidden state at each BOS position becomes
that sentence's representation. Section titles are encoded by the same stack:
the title embedding is the sum of final hidden states over the title's token
positions (the BOS prefix is excluded from the sum).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .corpus import Document, TitleClassDictionary, classify_title, tokenize
from .errors import DataError, NumericError
from .posenc import EncodingConfig, HierarchicalEncoder, extend_positions_by_copy

PAD_ID = 0
BOS_ID = 1
UNK_ID = 2
RESERVED = (("<pad>", PAD_ID), ("<bos>", BOS_ID), ("<unk>", UNK_ID))


class Vocabulary:
    """Dense token-to-id map with reserved PAD/BOS/UNK ids."""

    def __init__(self, tokens: list[str]):
        self.token_to_id: dict[str, int] = {tok: i for tok, i in RESERVED}
        for tok in tokens:
            if tok not in self.token_to_id:
                self.token_to_id[tok] = len(self.token_to_id)
        self.id_to_token = [t for t, _ in sorted(self.token_to_id.items(), key=lambda kv: kv[1])]

    def __len__(self) -> int:
        return len(self.token_to_id)

    def encode(self, tokens: list[str] | tuple[str, ...]) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self.id_to_token):
                fh.write(f"{tok}\t{i}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        mapping: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.rstrip("\n"):
                    continue
                try:
                    tok, idx = line.rstrip("\n").split("\t")
                    mapping[tok] = int(idx)
                except ValueError as exc:
                    raise DataError(f"{path}, line {lineno}: bad vocabulary entry") from exc
        if sorted(mapping.values()) != list(range(len(mapping))):
            raise DataError(f"{path}: vocabulary ids are not dense")
        for tok, rid in RESERVED:
            if mapping.get(tok) != rid:
                raise DataError(f"{path}: reserved id for {tok!r} was remapped")
        vocab = cls.__new__(cls)
        vocab.token_to_id = mapping
        vocab.id_to_token = [t for t, _ in sorted(mapping.items(), key=lambda kv: kv[1])]
        return vocab


def build_vocab(docs: list[Document], min_freq: int = 1) -> Vocabulary:
    """Frequency-thresholded vocabulary over sentence tokens and title tokens.

    Ordering is deterministic: frequency descending, then lexicographic.
    """
    if not docs:
        raise DataError("cannot build a vocabulary from an empty corpus")
    counts: dict[str, int] = {}
    for doc in docs:
        for sec in doc.sections:
            if sec.title:
                for tok in tokenize(sec.title):
                    counts[tok] = counts.get(tok, 0) + 1
            for sent in sec.sentences:
                for tok in sent.tokens:
                    counts[tok] = counts.get(tok, 0) + 1
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_freq),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(kept)


@dataclass
class PreparedInput:
    """Token id sequence with BOS markers for one document."""

    ids: list[int]
    bos_positions: list[int]
    tsvs: list[tuple[int, int, int]]  # aligned to ids; BOS carries c=0, tokens c=1..
    n_sentences: int  # sentences surviving truncation


def prepare_input(doc: Document, vocab: Vocabulary, max_len: int) -> PreparedInput:
    """Flatten a document into [BOS, tokens..., BOS, tokens...], truncated on
    a sentence boundary (whole trailing sentences dropped)."""
    if max_len < 2:
        raise DataError("max_len must be at least 2")
    ids: list[int] = []
    bos_positions: list[int] = []
    tsvs: list[tuple[int, int, int]] = []
    n_sentences = 0
    for a, sec in enumerate(doc.sections):
        for b, sent in enumerate(sec.sentences):
            piece = [BOS_ID] + vocab.encode(sent.tokens)
            if len(ids) + len(piece) > max_len:
                if n_sentences == 0:
                    raise DataError(
                        f"document {doc.id!r}: first sentence alone exceeds max_len={max_len}"
                    )
                return PreparedInput(ids, bos_positions, tsvs, n_sentences)
            bos_positions.append(len(ids))
            ids.extend(piece)
            tsvs.extend((a, b, c) for c in range(len(piece)))
            n_sentences += 1
    return PreparedInput(ids, bos_positions, tsvs, n_sentences)


class TransformerBlock(nn.Module):
    """Pre-norm self-attention + feed-forward residual block."""

    def __init__(self, d_model: int, n_heads: int, d_ff: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model)
        self.attn = nn.MultiheadAttention(d_model, n_heads, batch_first=True)
        self.ln2 = nn.LayerNorm(d_model)
        self.ff = nn.Sequential(
            nn.Linear(d_model, d_ff), nn.ReLU(), nn.Linear(d_ff, d_model)
        )

    def forward(self, x: torch.Tensor, key_padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, key_padding_mask=key_padding_mask, need_weights=False)
        x = x + attn_out
        return x + self.ff(self.ln2(x))


@dataclass
class EncodedDocument:
    """Sentence representations taken at BOS positions."""

    sentence_vectors: torch.Tensor  # [n_sentences, d_model]
    token_count: int
    sentence_count: int


class SentenceEncoder(nn.Module):
    """Token embeddings + learned token position table + self-attention stack."""

    def __init__(
        self,
        vocab_size: int,
        d_model: int = 64,
        n_heads: int = 4,
        n_layers: int = 2,
        d_ff: int = 256,
        max_len: int = 512,
        enc_cfg: EncodingConfig | None = None,
    ):
        super().__init__()
        self.d_model = d_model
        self.max_len = max_len
        self.token_emb = nn.Embedding(vocab_size, d_model, padding_idx=PAD_ID)
        self.pos_table = nn.Parameter(torch.randn(max_len, d_model) * 0.02)
        self.enc_cfg = enc_cfg
        if enc_cfg is not None and enc_cfg.inject_the:
            self.the_encoder = HierarchicalEncoder(3, enc_cfg)
        else:
            self.the_encoder = None
        self.blocks = nn.ModuleList(
            TransformerBlock(d_model, n_heads, d_ff) for _ in range(n_layers)
        )
        self.final_ln = nn.LayerNorm(d_model)

    def extend_positions(self, target_len: int) -> None:
        """Grow the token position table by copying the existing rows."""
        self.pos_table = nn.Parameter(extend_positions_by_copy(self.pos_table.data, target_len))
        self.max_len = target_len

    def forward(
        self,
        ids: torch.Tensor,
        pad_mask: torch.Tensor | None = None,
        tsvs: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """ids: [B, T] -> final hidden states [B, T, d_model].

        pad_mask is True at padded positions. tsvs ([B, T, 3]) is required
        when token hierarchical embeddings are enabled.
        """
        B, T = ids.shape
        if T > self.max_len:
            raise DataError(f"input length {T} exceeds max_len {self.max_len}")
        x = self.token_emb(ids) + self.pos_table[:T]
        if self.the_encoder is not None:
            if tsvs is None:
                raise DataError("token hierarchical embeddings enabled but no TSVs given")
            x = x + self.the_encoder(tsvs)
        for block in self.blocks:
            x = block(x, key_padding_mask=pad_mask)
        x = self.final_ln(x)
        if not torch.isfinite(x).all():
            raise NumericError("non-finite activations in sentence encoder")
        return x

    def encode(self, prepared: PreparedInput) -> EncodedDocument:
        """Encode one document and keep the BOS-position hidden states."""
        ids = torch.tensor([prepared.ids])
        tsvs = None
        if self.the_encoder is not None:
            tsvs = torch.tensor([prepared.tsvs])
        hidden = self.forward(ids, tsvs=tsvs)[0]
        bos = torch.tensor(prepared.bos_positions)
        return EncodedDocument(
            sentence_vectors=hidden[bos],
            token_count=len(prepared.ids),
            sentence_count=prepared.n_sentences,
        )


@dataclass
class STEVector:
    title: str
    embedding: torch.Tensor
    classified: bool


def ste(title_ids: list[int], encoder: SentenceEncoder) -> torch.Tensor:
    """Title embedding: sum of final hidden states over the title tokens.

    The title is encoded alone with a single BOS prefix; the BOS position is
    excluded from the sum.
    """
    if not title_ids:
        raise DataError("empty title")
    ids = torch.tensor([[BOS_ID] + title_ids])
    tsvs = None
    if encoder.the_encoder is not None:
        tsvs = torch.tensor([[(0, 0, c) for c in range(ids.shape[1])]])
    hidden = encoder(ids, tsvs=tsvs)[0]
    return hidden[1:].sum(dim=0)


def classified_ste(
    title: str,
    title_classes: TitleClassDictionary,
    encoder: SentenceEncoder,
    vocab: Vocabulary,
) -> STEVector:
    """Title embedding with intra-class titles replaced by the class embedding."""
    cls = classify_title(title, title_classes)
    text = cls if cls is not None else title
    embedding = ste(vocab.encode(tokenize(text)), encoder)
    return STEVector(title=title, embedding=embedding, classified=cls is not None)


class STECache:
    """Memoizes title embeddings while the encoder is frozen."""

    def __init__(self, encoder: SentenceEncoder, vocab: Vocabulary,
                 title_classes: TitleClassDictionary | None, classified: bool):
        self.encoder = encoder
        self.vocab = vocab
        self.title_classes = title_classes
        self.classified = classified
        self._cache: dict[str, torch.Tensor] = {}

    def get(self, title: str) -> torch.Tensor:
        if title not in self._cache:
            with torch.no_grad():
                if self.classified and self.title_classes is not None:
                    vec = classified_ste(title, self.title_classes, self.encoder, self.vocab).embedding
                else:
                    vec = ste(self.vocab.encode(tokenize(title)), self.encoder)
            self._cache[title] = vec
        return self._cache[title]
