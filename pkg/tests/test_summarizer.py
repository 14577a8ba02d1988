import math

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from hiersum.corpus import Document, Section, Sentence
from hiersum.errors import DataError
from hiersum.posenc import EncodingConfig
from hiersum.summarizer import (
    ExtractiveScorer,
    bce_loss,
    distribution_csv,
    lead_n,
    position_distribution,
    select,
    SelectionResult,
)


def cfg(**kw):
    base = dict(method="la", mode="sum", d_model=8, max_positions=16,
                inject_spe=True, inject_she=True, inject_ste=False)
    base.update(kw)
    return EncodingConfig(**base)


def scorer(seed=0, **kw):
    torch.manual_seed(seed)
    return ExtractiveScorer(cfg(**kw), n_sum_layers=2, n_heads=2, d_ff=16)


class TestInject:
    def test_identity_when_all_flags_off(self):
        m = scorer(inject_spe=False, inject_she=False)
        x = torch.randn(3, 8)
        ssvs = torch.tensor([[0, 0], [0, 1], [1, 0]])
        assert torch.equal(m.inject(x, ssvs), x)

    def test_pure_addition(self):
        m = scorer()
        x = torch.randn(3, 8)
        ssvs = torch.tensor([[0, 0], [0, 1], [1, 0]])
        base = m.inject(torch.zeros(3, 8), ssvs)
        assert torch.allclose(m.inject(x, ssvs), x + base, atol=1e-6)

    def test_ste_added_when_enabled(self):
        m = scorer(inject_ste=True)
        x = torch.randn(3, 8)
        ssvs = torch.tensor([[0, 0], [0, 1], [1, 0]])
        stes = torch.randn(3, 8)
        without = m.inject(x, ssvs, torch.zeros(3, 8))
        assert torch.allclose(m.inject(x, ssvs, stes), without + stes, atol=1e-6)

    def test_ste_required_when_enabled(self):
        m = scorer(inject_ste=True)
        with pytest.raises(DataError):
            m.inject(torch.randn(2, 8), torch.tensor([[0, 0], [0, 1]]))

    def test_too_many_sentences(self):
        m = scorer()
        with pytest.raises(DataError):
            m.inject(torch.randn(17, 8), torch.zeros(17, 2, dtype=torch.long))

    def test_misaligned_ssvs(self):
        m = scorer()
        with pytest.raises(DataError):
            m.inject(torch.randn(3, 8), torch.tensor([[0, 0], [0, 1]]))


class TestScore:
    def test_range_and_shape(self):
        m = scorer()
        pred = m.score(torch.randn(5, 8))
        assert pred.y_hat.shape == (5,)
        assert ((pred.y_hat > 0) & (pred.y_hat < 1)).all()
        assert pred.hs.shape == (5, 8)

    def test_half_at_zero_classifier(self):
        m = scorer()
        with torch.no_grad():
            m.classifier.weight.zero_()
            m.classifier.bias.zero_()
        pred = m.score(torch.randn(4, 8))
        assert torch.allclose(pred.y_hat, torch.full((4,), 0.5), atol=1e-7)

    def test_deterministic(self):
        m = scorer()
        x = torch.randn(4, 8)
        assert torch.equal(m.score(x).y_hat, m.score(x).y_hat)

    def test_batched_matches_single(self):
        m = scorer()
        x = torch.randn(2, 4, 8)
        batched = m.score(x).y_hat
        for b in range(2):
            single = m.score(x[b]).y_hat
            assert torch.allclose(batched[b], single, atol=1e-6)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            scorer().score(torch.randn(0, 8))


class TestBceLoss:
    def test_half_scores_give_ln2(self):
        y_hat = torch.full((4,), 0.5)
        y = torch.tensor([0.0, 1.0, 0.0, 1.0])
        assert abs(bce_loss(y_hat, y).item() - math.log(2)) < 1e-7

    def test_confident_correct(self):
        loss = bce_loss(torch.tensor([0.9, 0.1]), torch.tensor([1.0, 0.0]))
        assert abs(loss.item() - (-math.log(0.9))) < 1e-6

    def test_invalid_label(self):
        with pytest.raises(DataError):
            bce_loss(torch.tensor([0.5]), torch.tensor([2.0]))

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            bce_loss(torch.tensor([0.5, 0.5]), torch.tensor([1.0]))

    def test_mask_excludes_padding(self):
        y_hat = torch.tensor([0.9, 0.5])
        y = torch.tensor([1.0, 0.0])
        mask = torch.tensor([False, True])
        assert abs(bce_loss(y_hat, y, mask).item() - (-math.log(0.9))) < 1e-6

    def test_fully_masked_rejected(self):
        with pytest.raises(DataError):
            bce_loss(torch.tensor([0.5]), torch.tensor([1.0]), torch.tensor([True]))


class TestSelect:
    def test_top_n_sorted(self):
        res = select([0.1, 0.9, 0.5, 0.7], ["a", "b", "c", "d"], n=2)
        assert res.chosen == (1, 3)
        assert res.summary_text == ("b", "d")

    def test_tie_breaks_to_lower_index(self):
        res = select([0.5, 0.5, 0.5], ["a", "b", "c"], n=2)
        assert res.chosen == (0, 1)

    def test_fewer_sentences_than_n(self):
        res = select([0.3], ["a"], n=3)
        assert res.chosen == (0,)

    def test_trigram_blocking_skips_overlap(self):
        sents = ["the cat sat down", "the cat sat up", "dogs run far away"]
        res = select([0.9, 0.8, 0.7], sents, n=2, use_trigram_blocking=True)
        assert res.chosen == (0, 2)

    def test_blocking_off_keeps_overlap(self):
        sents = ["the cat sat down", "the cat sat up", "dogs run far away"]
        res = select([0.9, 0.8, 0.7], sents, n=2, use_trigram_blocking=False)
        assert res.chosen == (0, 1)

    def test_short_sentences_never_blocked(self):
        res = select([0.9, 0.8], ["one two", "one two"], n=2, use_trigram_blocking=True)
        assert res.chosen == (0, 1)

    @given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=12), st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_monotone_transform_invariance(self, scores, n):
        sents = [f"s {i}" for i in range(len(scores))]
        a = select(scores, sents, n)
        b = select([s * 0.5 + 0.2 for s in scores], sents, n)
        assert a.chosen == b.chosen

    def test_misaligned(self):
        with pytest.raises(DataError):
            select([0.5], ["a", "b"], n=1)


class TestLeadAndDistribution:
    def doc(self, n):
        sents = tuple(Sentence.from_text(f"s {i}") for i in range(n))
        return Document(id="d", sections=(Section(title=None, sentences=sents),),
                        gold_summary=("s 0",))

    def test_lead_n(self):
        res = lead_n(self.doc(5), 3)
        assert res.chosen == (0, 1, 2)
        assert res.summary_text == ("s 0", "s 1", "s 2")

    def test_lead_n_short_doc(self):
        assert lead_n(self.doc(2), 3).chosen == (0, 1)

    def test_distribution_availability_denominator(self):
        sels = [SelectionResult((0,), ("a",)), SelectionResult((1,), ("b",))]
        props = position_distribution(sels, [1, 3], max_index=3)
        # index 0 exists in both docs but is picked once; index 1 only in doc 2
        assert props == [0.5, 1.0, 0.0, 0.0]

    def test_distribution_tail_aggregation(self):
        sels = [SelectionResult((0, 4), ("a", "b"))]
        props = position_distribution(sels, [6], max_index=3)
        assert props == [1.0, 0.0, 0.0, 1.0]

    def test_distribution_empty_rejected(self):
        with pytest.raises(DataError):
            position_distribution([], [], max_index=3)

    def test_distribution_csv(self):
        out = distribution_csv([0.5, 0.25])
        assert out == "index,proportion\n0,0.500000\n1,0.250000\n"
