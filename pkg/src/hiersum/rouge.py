"""ROUGE-1/2/L scoring and greedy oracle label generation.

The scorer is self-contained and internally consistent: lowercase whitespace
tokens with punctuation-only tokens dropped, clipped n-gram counts for R1/R2,
and an LCS-based RL where multi-sentence texts are joined with per-side
sentinel tokens so the LCS cannot bridge sentence boundaries.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document, document_to_record
from .errors import DataError

_PUNCT_ONLY_RE = re.compile(r"^[^\w\s]+$")


def rouge_tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens; punctuation-only tokens are dropped."""
    return [t for t in text.lower().split() if not _PUNCT_ONLY_RE.match(t)]


@dataclass(frozen=True)
class RougeTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class RougeScore:
    r1: RougeTriple
    r2: RougeTriple
    rl: RougeTriple

    def to_dict(self) -> dict:
        return {
            "r1": self.r1.f1,
            "r2": self.r2.f1,
            "rl": self.rl.f1,
        }


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: list[str], reference: list[str], n: int) -> RougeTriple:
    """Clipped n-gram overlap precision/recall/F1."""
    if n not in (1, 2):
        raise ValueError("only unigrams and bigrams are supported")
    cand = _ngram_counts(candidate, n)
    ref = _ngram_counts(reference, n)
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    if cand_total == 0 or ref_total == 0:
        return RougeTriple(0.0, 0.0, 0.0)
    overlap = sum(min(c, ref[g]) for g, c in cand.items())
    p = overlap / cand_total
    r = overlap / ref_total
    return RougeTriple(p, r, _f1(p, r))


def lcs_length(a: list, b: list) -> int:
    """Longest common subsequence length, single-row dynamic program."""
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeTriple:
    """LCS-based precision/recall/F1 over flat token sequences."""
    if not candidate or not reference:
        return RougeTriple(0.0, 0.0, 0.0)
    ell = lcs_length(candidate, reference)
    p = ell / len(candidate)
    r = ell / len(reference)
    return RougeTriple(p, r, _f1(p, r))


def _join_with_breaks(sentences: list[list[str]], side: str) -> list[str]:
    """Concatenate sentences with side-specific break tokens.

    Break tokens differ between candidate and reference, so they never match
    and the LCS cannot run across a sentence boundary. They still count
    toward sequence length only if included; they are excluded here.
    """
    out: list[str] = []
    for i, sent in enumerate(sentences):
        if i:
            out.append(f"<{side}{i}>")
        out.extend(sent)
    return out


def _break_free_length(tokens: list[str]) -> int:
    return sum(1 for t in tokens if not (t.startswith("<") and t.endswith(">")))


def rouge_score(candidate_sentences: list[str], reference_sentences: list[str]) -> RougeScore:
    """Score a multi-sentence candidate summary against a reference."""
    cand_tok = [rouge_tokenize(s) for s in candidate_sentences]
    ref_tok = [rouge_tokenize(s) for s in reference_sentences]
    cand_flat = [t for s in cand_tok for t in s]
    ref_flat = [t for s in ref_tok for t in s]
    r1 = rouge_n(cand_flat, ref_flat, 1)
    r2 = rouge_n(cand_flat, ref_flat, 2)
    cand_joined = _join_with_breaks(cand_tok, "c")
    ref_joined = _join_with_breaks(ref_tok, "r")
    if not cand_flat or not ref_flat:
        rl = RougeTriple(0.0, 0.0, 0.0)
    else:
        ell = lcs_length(cand_joined, ref_joined)
        p = ell / _break_free_length(cand_joined)
        r = ell / _break_free_length(ref_joined)
        rl = RougeTriple(p, r, _f1(p, r))
    return RougeScore(r1=r1, r2=r2, rl=rl)


@dataclass
class OracleLabels:
    y: list[int]
    chosen_order: list[int]
    final_score: RougeScore


def _set_objective(selected_counts1: Counter, selected_counts2: Counter,
                   n_uni: int, n_bi: int,
                   ref1: Counter, ref2: Counter,
                   ref1_total: int, ref2_total: int) -> float:
    """R1 F1 + R2 F1 of a selected set given its pooled n-gram counts."""
    score = 0.0
    for counts, ref, total, ref_total in (
        (selected_counts1, ref1, n_uni, ref1_total),
        (selected_counts2, ref2, n_bi, ref2_total),
    ):
        if total == 0 or ref_total == 0:
            continue
        overlap = sum(min(c, ref[g]) for g, c in counts.items())
        p = overlap / total
        r = overlap / ref_total
        score += _f1(p, r)
    return score


def oracle_labels(doc: Document, max_oracle_sentences: int) -> OracleLabels:
    """Greedy oracle: repeatedly add the sentence that most improves
    R1 F1 + R2 F1 of the selected set against the gold summary.

    Stops when no sentence strictly improves the objective or the cap is
    reached. Ties break toward the lower sentence index.
    """
    if not doc.gold_summary:
        raise DataError(f"document {doc.id!r} has no gold summary")
    if max_oracle_sentences < 1:
        raise DataError("max_oracle_sentences must be >= 1")
    sents = [rouge_tokenize(s.text) for s in doc.sentences]
    ref = [t for s in doc.gold_summary for t in rouge_tokenize(s)]
    ref1 = _ngram_counts(ref, 1)
    ref2 = _ngram_counts(ref, 2)
    ref1_total = sum(ref1.values())
    ref2_total = sum(ref2.values())
    sent_counts1 = [_ngram_counts(s, 1) for s in sents]
    sent_counts2 = [_ngram_counts(s, 2) for s in sents]

    selected: list[int] = []
    cur1: Counter = Counter()
    cur2: Counter = Counter()
    cur_uni = cur_bi = 0
    best = 0.0
    while len(selected) < max_oracle_sentences:
        best_gain_idx = -1
        best_score = best
        for i in range(len(sents)):
            if i in selected:
                continue
            score = _set_objective(
                cur1 + sent_counts1[i], cur2 + sent_counts2[i],
                cur_uni + len(sents[i]), cur_bi + max(len(sents[i]) - 1, 0),
                ref1, ref2, ref1_total, ref2_total,
            )
            if score > best_score:
                best_score = score
                best_gain_idx = i
        if best_gain_idx < 0:
            break
        selected.append(best_gain_idx)
        cur1 += sent_counts1[best_gain_idx]
        cur2 += sent_counts2[best_gain_idx]
        cur_uni += len(sents[best_gain_idx])
        cur_bi += max(len(sents[best_gain_idx]) - 1, 0)
        best = best_score

    y = [0] * len(sents)
    for i in selected:
        y[i] = 1
    summary = [doc.sentences[i].text for i in sorted(selected)]
    return OracleLabels(
        y=y,
        chosen_order=selected,
        final_score=rouge_score(summary, list(doc.gold_summary)),
    )


def write_labeled_corpus(docs: list[Document], labels: list[OracleLabels], path: str | Path) -> None:
    """Corpus JSON-lines augmented with oracle labels and the oracle's ROUGE."""
    if len(docs) != len(labels):
        raise DataError("documents and labels are misaligned")
    with open(path, "w", encoding="utf-8") as fh:
        for doc, lab in zip(docs, labels):
            rec = document_to_record(doc)
            rec["labels"] = lab.y
            rec["oracle_rouge"] = lab.final_score.to_dict()
            fh.write(json.dumps(rec) + "\n")


def load_labeled_corpus(path: str | Path) -> tuple[list[Document], list[list[int]]]:
    """Read a labeled corpus: documents plus flattened 0/1 label lists."""
    from .corpus import load_corpus  # records validate identically

    docs = load_corpus(path)
    labels: list[list[int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            lab = rec.get("labels")
            if not isinstance(lab, list) or any(v not in (0, 1) for v in lab):
                raise DataError(f"{path}, line {lineno}: missing or malformed 'labels'")
            labels.append(lab)
    for doc, lab in zip(docs, labels):
        if len(lab) != doc.sentence_count:
            raise DataError(f"document {doc.id!r}: labels do not align with sentences")
    return docs, labels
