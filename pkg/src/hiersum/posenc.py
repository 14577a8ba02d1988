"""Linear and hierarchical position encodings.

Two linear encoding methods are supported: the fixed sinusoidal one ("sin")
and a trainable table ("la"). Hierarchical embeddings combine the per-level
linear encodings of a structure vector with one of three modes: sum, mean or
concat. Sentence-level vectors have two levels (section, sentence-in-section),
token-level ones three (section, sentence, token-in-sentence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .corpus import SSV, TSV

PE_METHODS = ("sin", "la")
COMBINE_MODES = ("sum", "mean", "concat")


@dataclass
class EncodingConfig:
    """Selects the encoding setting and the injection flags."""

    method: str = "la"
    mode: str = "sum"
    d_model: int = 64
    max_positions: int = 128
    inject_she: bool = True
    inject_ste: bool = False
    classified_ste: bool = False
    inject_spe: bool = True
    inject_the: bool = False
    la_init_std: float = 0.02

    def __post_init__(self) -> None:
        if self.method not in PE_METHODS:
            raise ValueError(f"unknown PE method {self.method!r}")
        if self.mode not in COMBINE_MODES:
            raise ValueError(f"unknown combination mode {self.mode!r}")

    @property
    def setting(self) -> str:
        return f"{self.method}-{self.mode}"

    def with_setting(self, setting: str) -> "EncodingConfig":
        method, _, mode = setting.partition("-")
        if method not in PE_METHODS or mode not in COMBINE_MODES:
            raise ValueError(f"unknown encoding setting {setting!r}")
        return EncodingConfig(**{**self.__dict__, "method": method, "mode": mode})


def sinusoidal_pe(pos: int, d: int) -> torch.Tensor:
    """Sinusoidal encoding of one position, float64.

    Component 2i is sin(pos / 10000^(2i/d)), component 2i+1 the matching cos.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    out = torch.empty(d, dtype=torch.float64)
    for i in range(0, d, 2):
        angle = pos / (10000.0 ** (i / d))
        out[i] = math.sin(angle)
        if i + 1 < d:
            out[i + 1] = math.cos(angle)
    return out


def sinusoid_table(positions: torch.Tensor, d: int, dtype=torch.float32) -> torch.Tensor:
    """Vectorized sinusoidal encodings; positions of any shape -> [..., d]."""
    pos = positions.to(torch.float64).unsqueeze(-1)
    even = torch.arange(0, d, 2, dtype=torch.float64)
    angles = pos / torch.pow(10000.0, even / d)
    out = torch.zeros(*positions.shape, d, dtype=torch.float64)
    out[..., 0::2] = torch.sin(angles)
    out[..., 1::2] = torch.cos(angles)[..., : d // 2]
    return out.to(dtype)


def pe(pos: int, d: int, method: str = "sin", table: torch.Tensor | None = None) -> torch.Tensor:
    """Linear position encoding of a single position.

    For "la" a trainable table must be supplied; the row is returned as-is.
    """
    if pos < 0:
        raise IndexError("position must be non-negative")
    if method == "sin":
        return sinusoidal_pe(pos, d)
    if method == "la":
        if table is None:
            raise ValueError("la method needs a learned table")
        if pos >= table.shape[0]:
            raise IndexError(f"position {pos} outside learned table of length {table.shape[0]}")
        return table[pos]
    raise ValueError(f"unknown PE method {method!r}")


def _part_dim(d_model: int, mode: str, arity: int) -> int:
    if mode != "concat":
        return d_model
    if d_model % arity != 0:
        raise ValueError(
            f"concat mode needs d_model divisible by {arity}, got {d_model}"
        )
    return d_model // arity


class HierarchicalEncoder(nn.Module):
    """Combines per-level linear position encodings into one vector.

    arity 2 covers sentence structure vectors, arity 3 token structure
    vectors. With the "la" method each hierarchy level owns its own table of
    max_positions rows; "sin" has no parameters.
    """

    def __init__(self, arity: int, cfg: EncodingConfig):
        super().__init__()
        self.arity = arity
        self.method = cfg.method
        self.mode = cfg.mode
        self.d_model = cfg.d_model
        self.max_positions = cfg.max_positions
        self.part_dim = _part_dim(cfg.d_model, cfg.mode, arity)
        if cfg.method == "la":
            self.tables = nn.ParameterList(
                nn.Parameter(torch.randn(cfg.max_positions, self.part_dim) * cfg.la_init_std)
                for _ in range(arity)
            )
        else:
            self.tables = None

    def _level(self, level: int, positions: torch.Tensor) -> torch.Tensor:
        if self.method == "la":
            if int(positions.max()) >= self.max_positions:
                raise IndexError(
                    f"hierarchical position {int(positions.max())} outside the "
                    f"learned table of length {self.max_positions}"
                )
            return nn.functional.embedding(positions, self.tables[level])
        return sinusoid_table(positions, self.part_dim)

    def forward(self, positions: torch.Tensor, mode: str | None = None) -> torch.Tensor:
        """positions: integer tensor [..., arity] -> embeddings [..., d_model]."""
        if positions.shape[-1] != self.arity:
            raise ValueError(f"expected trailing dimension {self.arity}")
        if (positions < 0).any():
            raise IndexError("hierarchical positions must be non-negative")
        mode = mode or self.mode
        parts = [self._level(i, positions[..., i]) for i in range(self.arity)]
        if mode == "concat":
            if self.part_dim * self.arity != self.d_model:
                raise ValueError("encoder was not built for concat mode")
            return torch.cat(parts, dim=-1)
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        if mode == "mean":
            return total / self.arity
        return total


def she(ssv: SSV, cfg: EncodingConfig, encoder: HierarchicalEncoder | None = None) -> torch.Tensor:
    """Sentence hierarchical position embedding of one SSV."""
    if encoder is None:
        if cfg.method != "sin":
            raise ValueError("la method needs a HierarchicalEncoder with tables")
        encoder = HierarchicalEncoder(2, cfg)
    return encoder(torch.tensor([ssv.a_s, ssv.b_s]), mode=cfg.mode)


def the(tsv: TSV, cfg: EncodingConfig, encoder: HierarchicalEncoder | None = None) -> torch.Tensor:
    """Token hierarchical position embedding of one TSV."""
    if encoder is None:
        if cfg.method != "sin":
            raise ValueError("la method needs a HierarchicalEncoder with tables")
        encoder = HierarchicalEncoder(3, cfg)
    return encoder(torch.tensor([tsv.a_t, tsv.b_t, tsv.c_t]), mode=cfg.mode)


def extend_positions_by_copy(base_table: torch.Tensor, target_len: int) -> torch.Tensor:
    """Tile a position table until target_len rows are covered.

    Row p of the result equals base row (p mod L) at initialization; the
    returned tensor is a fresh copy, so wrapped as a parameter the duplicated
    rows train independently afterwards.
    """
    L = base_table.shape[0]
    if L < 1:
        raise ValueError("base table must have at least one row")
    if target_len < L:
        raise ValueError(f"target length {target_len} shorter than base table {L}")
    reps = -(-target_len // L)
    return base_table.detach().repeat(reps, 1)[:target_len].clone()
