import math

import pytest
import torch
from hypothesis import given, settings, strategies as st

from hiersum.corpus import SSV, TSV
from hiersum.posenc import (
    EncodingConfig,
    HierarchicalEncoder,
    extend_positions_by_copy,
    pe,
    she,
    sinusoid_table,
    sinusoidal_pe,
    the,
)


def sin_cfg(mode="sum", d=4, **kw):
    return EncodingConfig(method="sin", mode=mode, d_model=d, max_positions=64, **kw)


def la_cfg(mode="sum", d=4, **kw):
    return EncodingConfig(method="la", mode=mode, d_model=d, max_positions=64, **kw)


class TestSinusoidal:
    def test_position_zero(self):
        assert torch.allclose(sinusoidal_pe(0, 4), torch.tensor([0.0, 1.0, 0.0, 1.0], dtype=torch.float64))

    def test_position_one_d4(self):
        got = sinusoidal_pe(1, 4)
        want = torch.tensor(
            [math.sin(1.0), math.cos(1.0), math.sin(1e-2), math.cos(1e-2)],
            dtype=torch.float64,
        )
        assert torch.allclose(got, want, atol=1e-6)
        # frozen reference values
        assert got[0].item() == pytest.approx(0.841471, abs=1e-6)
        assert got[1].item() == pytest.approx(0.540302, abs=1e-6)
        assert got[2].item() == pytest.approx(0.010000, abs=1e-6)
        assert got[3].item() == pytest.approx(0.999950, abs=1e-6)

    def test_pair_identity(self):
        for pos in (0, 1, 7, 123, 5000):
            v = sinusoidal_pe(pos, 16)
            pairs = v[0::2] ** 2 + v[1::2] ** 2
            assert torch.allclose(pairs, torch.ones_like(pairs), atol=1e-12)

    def test_table_matches_scalar(self):
        tab = sinusoid_table(torch.tensor([0, 1, 9]), 6, dtype=torch.float64)
        for i, pos in enumerate((0, 1, 9)):
            assert torch.allclose(tab[i], sinusoidal_pe(pos, 6), atol=1e-12)

    def test_la_out_of_range(self):
        table = torch.zeros(4, 4)
        with pytest.raises(IndexError):
            pe(4, 4, method="la", table=table)

    def test_la_returns_row(self):
        table = torch.randn(4, 4)
        assert torch.equal(pe(2, 4, method="la", table=table), table[2])


class TestSHE:
    def test_sin_concat_zero(self):
        got = she(SSV(0, 0), sin_cfg(mode="concat", d=4))
        assert torch.allclose(got.double(), torch.tensor([0.0, 1.0, 0.0, 1.0]).double())

    def test_sin_sum_derived(self):
        got = she(SSV(2, 5), sin_cfg(mode="sum", d=2))
        want = torch.tensor([math.sin(2) + math.sin(5), math.cos(2) + math.cos(5)])
        assert torch.allclose(got, want, atol=1e-6)

    def test_mean_is_half_sum(self):
        cfg = sin_cfg(mode="sum", d=8)
        enc = HierarchicalEncoder(2, cfg)
        positions = torch.tensor([[3, 9], [0, 0], [7, 1]])
        assert torch.equal(enc(positions, mode="mean"), enc(positions, mode="sum") / 2)

    def test_mean_is_half_sum_la(self):
        enc = HierarchicalEncoder(2, la_cfg(d=8))
        positions = torch.tensor([[3, 9], [0, 0], [7, 1]])
        assert torch.equal(enc(positions, mode="mean"), enc(positions, mode="sum") / 2)

    def test_la_out_of_table(self):
        enc = HierarchicalEncoder(2, la_cfg(d=4))
        with pytest.raises(IndexError):
            enc(torch.tensor([[64, 0]]))

    def test_degenerate_one_sentence_sections(self):
        # every section holding exactly one sentence collapses toward a
        # linear encoding: concat first half equals pe(s, d/2)
        cfg = sin_cfg(mode="concat", d=8)
        for s in range(5):
            v = she(SSV(s, 0), cfg)
            assert torch.allclose(v[:4].double(), sinusoidal_pe(s, 4), atol=1e-12)

    def test_sin_has_no_parameters(self):
        enc = HierarchicalEncoder(2, sin_cfg())
        assert sum(p.numel() for p in enc.parameters()) == 0


class TestTHE:
    def test_sin_sum_zero(self):
        got = the(TSV(0, 0, 0), sin_cfg(mode="sum", d=4))
        assert torch.allclose(got.double(), torch.tensor([0.0, 3.0, 0.0, 3.0]).double())

    def test_sin_mean_zero(self):
        got = the(TSV(0, 0, 0), sin_cfg(mode="mean", d=4))
        assert torch.allclose(got.double(), torch.tensor([0.0, 1.0, 0.0, 1.0]).double())

    def test_concat_divisibility(self):
        with pytest.raises(ValueError):
            HierarchicalEncoder(3, sin_cfg(mode="concat", d=5))

    def test_mean_is_third_of_sum(self):
        enc = HierarchicalEncoder(3, la_cfg(d=6))
        positions = torch.tensor([[1, 2, 3], [0, 5, 9]])
        assert torch.equal(enc(positions, mode="mean"), enc(positions, mode="sum") / 3)


@settings(max_examples=50)
@given(
    pos=st.integers(min_value=0, max_value=10_000),
    i=st.integers(min_value=0, max_value=15),
)
def test_pair_identity_property(pos, i):
    v = sinusoidal_pe(pos, 32)
    assert abs(float(v[2 * i] ** 2 + v[2 * i + 1] ** 2) - 1.0) < 1e-12


class TestExtendByCopy:
    def test_tiling(self):
        base = torch.randn(4, 3)
        ext = extend_positions_by_copy(base, 10)
        for p in range(10):
            assert torch.equal(ext[p], base[p % 4])

    def test_identity_length(self):
        base = torch.randn(4, 3)
        assert torch.equal(extend_positions_by_copy(base, 4), base)

    def test_shrink_rejected(self):
        with pytest.raises(ValueError):
            extend_positions_by_copy(torch.randn(4, 3), 2)

    def test_copies_train_independently(self):
        table = torch.nn.Parameter(extend_positions_by_copy(torch.randn(4, 3), 10))
        assert torch.equal(table.data[6], table.data[2])
        opt = torch.optim.SGD([table], lr=0.1)
        for _ in range(5):
            opt.zero_grad()
            table[6].sum().backward()
            opt.step()
        assert not torch.equal(table.data[6], table.data[2])


class TestGradientSparsity:
    def test_only_indexed_rows_update(self):
        enc = HierarchicalEncoder(2, la_cfg(d=4))
        before = [t.detach().clone() for t in enc.tables]
        opt = torch.optim.SGD(enc.parameters(), lr=0.1, weight_decay=0.0)
        opt.zero_grad()
        enc(torch.tensor([[3, 7]])).sum().backward()
        opt.step()
        for level, touched in enumerate((3, 7)):
            after = enc.tables[level].data
            for row in range(after.shape[0]):
                if row == touched:
                    assert not torch.equal(after[row], before[level][row])
                else:
                    assert torch.equal(after[row], before[level][row])


class TestEncodingConfig:
    def test_setting_round_trip(self):
        cfg = EncodingConfig(method="sin", mode="concat", d_model=8)
        assert cfg.setting == "sin-concat"
        assert cfg.with_setting("la-mean").setting == "la-mean"

    def test_unknown_setting(self):
        with pytest.raises(ValueError):
            EncodingConfig().with_setting("rotary-sum")
