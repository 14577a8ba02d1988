"""Document data model, ingestion, segmentation and hierarchy statistics.

A corpus is a JSON-lines file, one document per line:

    {"id": "...",
     "sections": [{"title": "..." | null, "sentences": ["...", ...]}, ...],
     "summary": ["...", ...]}

Tokens are derived from sentence text with a deterministic rule-based
tokenizer; they are never stored in the file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_WS_RE = re.compile(r"\s+")
_PUNCT_ONLY_RE = re.compile(r"^[^\w\s]+$")


def tokenize(text: str) -> list[str]:
    """Lowercase word-level tokenization with punctuation detached."""
    return _TOKEN_RE.findall(text.lower())


def detokenize(tokens: list[str]) -> str:
    """Inverse rendering: spaces between tokens, none before punctuation."""
    out: list[str] = []
    for tok in tokens:
        if out and not _PUNCT_ONLY_RE.match(tok):
            out.append(" ")
        out.append(tok)
    return "".join(out)


@dataclass(frozen=True)
class Sentence:
    text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        return cls(text=text, tokens=tuple(tokenize(text)))


@dataclass(frozen=True)
class Section:
    title: str | None
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Document:
    id: str
    sections: tuple[Section, ...]
    gold_summary: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.sections:
            raise DataError(f"document {self.id!r}: no sections")
        for k, sec in enumerate(self.sections):
            if sec.title is not None and not sec.title.strip():
                raise DataError(f"document {self.id!r}: section {k} has a blank title")
            if not sec.sentences:
                raise DataError(f"document {self.id!r}: section {k} has no sentences")
            for j, sent in enumerate(sec.sentences):
                if not sent.tokens:
                    raise DataError(
                        f"document {self.id!r}: section {k} sentence {j} has no tokens"
                    )

    @property
    def sentences(self) -> list[Sentence]:
        return [s for sec in self.sections for s in sec.sentences]

    @property
    def sentence_count(self) -> int:
        return sum(len(sec.sentences) for sec in self.sections)

    @property
    def token_count(self) -> int:
        return sum(len(s.tokens) for sec in self.sections for s in sec.sentences)

    @property
    def section_sizes(self) -> list[int]:
        return [len(sec.sentences) for sec in self.sections]


@dataclass(frozen=True)
class SSV:
    """Hierarchical position of a sentence: (section index, index in section)."""

    a_s: int
    b_s: int


@dataclass(frozen=True)
class TSV:
    """Hierarchical position of a token: (section, sentence-in-section, token-in-sentence)."""

    a_t: int
    b_t: int
    c_t: int


def ssv_of(doc: Document, s: int) -> SSV:
    if s < 0:
        raise IndexError(f"sentence index {s} out of range")
    offset = 0
    for a, sec in enumerate(doc.sections):
        if s < offset + len(sec.sentences):
            return SSV(a_s=a, b_s=s - offset)
        offset += len(sec.sentences)
    raise IndexError(f"sentence index {s} out of range (document has {offset} sentences)")


def all_ssvs(doc: Document) -> list[SSV]:
    return [
        SSV(a_s=a, b_s=b)
        for a, sec in enumerate(doc.sections)
        for b in range(len(sec.sentences))
    ]


def tsv_of(doc: Document, t: int) -> TSV:
    if t < 0:
        raise IndexError(f"token index {t} out of range")
    offset = 0
    for a, sec in enumerate(doc.sections):
        for b, sent in enumerate(sec.sentences):
            if t < offset + len(sent.tokens):
                return TSV(a_t=a, b_t=b, c_t=t - offset)
            offset += len(sent.tokens)
    raise IndexError(f"token index {t} out of range (document has {offset} tokens)")


def _sentence_from_record(raw: object, where: str) -> Sentence:
    if not isinstance(raw, str) or not raw.strip():
        raise DataError(f"{where}: sentence must be a non-empty string")
    return Sentence.from_text(raw)


def _document_from_record(rec: dict, where: str) -> Document:
    if not isinstance(rec, dict):
        raise DataError(f"{where}: record is not a JSON object")
    doc_id = rec.get("id")
    if not isinstance(doc_id, str):
        raise DataError(f"{where}: missing or non-string 'id'")
    raw_sections = rec.get("sections")
    if not isinstance(raw_sections, list) or not raw_sections:
        raise DataError(f"{where}: 'sections' must be a non-empty array")
    sections = []
    for k, raw_sec in enumerate(raw_sections):
        if not isinstance(raw_sec, dict):
            raise DataError(f"{where}: section {k} is not an object")
        title = raw_sec.get("title")
        if title is not None and not isinstance(title, str):
            raise DataError(f"{where}: section {k} title must be string or null")
        raw_sents = raw_sec.get("sentences")
        if not isinstance(raw_sents, list) or not raw_sents:
            raise DataError(f"{where}: section {k} 'sentences' must be a non-empty array")
        sentences = tuple(
            _sentence_from_record(s, f"{where}, section {k}") for s in raw_sents
        )
        sections.append(Section(title=title, sentences=sentences))
    summary = rec.get("summary", [])
    if not isinstance(summary, list) or any(not isinstance(s, str) for s in summary):
        raise DataError(f"{where}: 'summary' must be an array of strings")
    return Document(id=doc_id, sections=tuple(sections), gold_summary=tuple(summary))


def load_corpus(path: str | Path) -> list[Document]:
    """Read a JSON-lines corpus file. Blank lines are skipped."""
    docs: list[Document] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}, line {lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON ({exc})") from exc
            docs.append(_document_from_record(rec, where))
    return docs


def document_to_record(doc: Document) -> dict:
    return {
        "id": doc.id,
        "sections": [
            {"title": sec.title, "sentences": [s.text for s in sec.sentences]}
            for sec in doc.sections
        ],
        "summary": list(doc.gold_summary),
    }


def write_corpus(docs: list[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_record(doc)) + "\n")


def segment_plain_text(text: str, doc_id: str = "doc") -> Document:
    """Rule-based segmentation of raw text into an untitled-section document.

    Blank-line paragraphs become sections; sentences split on terminal
    punctuation followed by whitespace.
    """
    if not text or not text.strip():
        raise DataError("empty input text")
    sections = []
    for para in re.split(r"\n\s*\n", text.strip()):
        para = para.strip()
        if not para:
            continue
        sentences = tuple(
            Sentence.from_text(s.strip())
            for s in _SENT_SPLIT_RE.split(para)
            if s.strip()
        )
        if sentences:
            sections.append(Section(title=None, sentences=sentences))
    if not sections:
        raise DataError("no sentences found in input text")
    return Document(id=doc_id, sections=tuple(sections))


# --- corpus hierarchy statistics -------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_sentences: float
    avg_sections: float
    hi_depth: int
    avg_hi_width: float

    def to_csv(self) -> str:
        header = "n_docs,avg_sentences,avg_sections,hi_depth,avg_hi_width"
        row = (
            f"{self.n_docs},{self.avg_sentences:.6f},{self.avg_sections:.6f},"
            f"{self.hi_depth},{self.avg_hi_width:.6f}"
        )
        return header + "\n" + row + "\n"


def corpus_stats(docs: list[Document], hi_depth: int | None = None) -> CorpusStats:
    """Hierarchy statistics of a corpus.

    hi-width per document is N_s / N_hsh where N_hsh is the number of
    highest-hierarchy units (sections, or paragraphs represented as untitled
    sections). hi-depth is a corpus-level attribute: 4 for titled-section
    corpora, 3 for paragraph-only ones, unless declared explicitly.
    """
    if not docs:
        raise DataError("empty corpus")
    if hi_depth is None:
        titled = any(sec.title is not None for d in docs for sec in d.sections)
        hi_depth = 4 if titled else 3
    widths = [d.sentence_count / len(d.sections) for d in docs]
    return CorpusStats(
        n_docs=len(docs),
        avg_sentences=sum(d.sentence_count for d in docs) / len(docs),
        avg_sections=sum(len(d.sections) for d in docs) / len(docs),
        hi_depth=hi_depth,
        avg_hi_width=sum(widths) / len(widths),
    )


# --- section title classes ---------------------------------------------------

def normalize_title(title: str) -> str:
    """Lowercase, trim, collapse whitespace, strip trailing punctuation."""
    t = _WS_RE.sub(" ", title.strip().lower())
    return t.rstrip(" .,:;!?")


@dataclass(frozen=True)
class TitleClassDictionary:
    """Predefined section title classes mapped to sets of normalized titles."""

    classes: dict[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: dict[str, list[str]]) -> "TitleClassDictionary":
        return cls(
            classes={
                name: frozenset(normalize_title(t) for t in titles)
                for name, titles in mapping.items()
            }
        )

    @classmethod
    def load(cls, path: str | Path) -> "TitleClassDictionary":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise DataError(f"{path}: title-class file must hold a JSON object")
        return cls.from_mapping(raw)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({k: sorted(v) for k, v in self.classes.items()}, fh, indent=2)

    def class_names(self) -> list[str]:
        return list(self.classes)


def classify_title(title: str, title_classes: TitleClassDictionary) -> str | None:
    """Return the unique class holding the normalized title, else None.

    Titles that match zero classes or more than one class map to None; the
    caller then falls back to the title's own embedding.
    """
    norm = normalize_title(title)
    hits = [name for name, titles in title_classes.classes.items() if norm in titles]
    if len(hits) == 1:
        return hits[0]
    return None
