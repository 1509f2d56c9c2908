"""Random Rician channel realizations and the sorted cascaded coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ValidationError
from .model import SystemParams

__all__ = [
    "ChannelRealization",
    "CascadedChannel",
    "sample",
    "cascade",
    "make_rng",
    "save_realization",
    "load_realization",
]


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Tx->RIS vector ``h``, RIS->Rx vector ``g`` and the feedback gain ``h_F``."""

    h: np.ndarray
    g: np.ndarray
    h_F: complex

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex).ravel()
        g = np.asarray(self.g, dtype=complex).ravel()
        if h.shape != g.shape or h.size < 1:
            raise ValidationError(f"h and g must be non-empty and equally long, got {h.size} and {g.size}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g)) and np.isfinite(self.h_F)):
            raise ValidationError("channel entries must be finite")
        h.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h_F", complex(self.h_F))

    @property
    def n_elements(self) -> int:
        return self.h.size

    def __eq__(self, other):
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return (
            np.array_equal(self.h, other.h)
            and np.array_equal(self.g, other.g)
            and self.h_F == other.h_F
        )


@dataclass(frozen=True, eq=False)
class CascadedChannel:
    """Cascaded magnitudes ``|h_n g_n|`` sorted non-increasingly.

    ``perm[k]`` is the (0-based) original index of the k-th strongest element;
    ``prefix[k]`` is the sum of the ``k + 1`` strongest magnitudes.
    """

    alpha: np.ndarray
    prefix: np.ndarray
    perm: np.ndarray
    source: ChannelRealization = field(repr=False)

    @property
    def alpha_max(self) -> float:
        return float(self.alpha[0])

    @property
    def n_elements(self) -> int:
        return self.alpha.size

    def strongest(self, n: int) -> np.ndarray:
        """Original indices of the ``n`` strongest elements."""
        return self.perm[:n]

    @classmethod
    def from_alpha(cls, alpha, h_F: complex = 1.0) -> "CascadedChannel":
        """Cascade of a synthetic realization with ``h = alpha`` and ``g = 1``."""
        alpha = np.asarray(alpha, dtype=float)
        if np.any(alpha < 0):
            raise ValidationError("cascaded magnitudes must be non-negative")
        return cascade(ChannelRealization(alpha.astype(complex), np.ones_like(alpha, dtype=complex), h_F))


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _rician(rng: np.random.Generator, los: float, size) -> np.ndarray:
    xy = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
    return los + (xy[0] + 1j * xy[1]) / math.sqrt(2.0)


def sample(params: SystemParams, seed) -> ChannelRealization:
    """Draw ``h``, ``g`` (length ``N_hw``) and ``h_F`` as CN(v, 1).

    The line-of-sight mean ``v`` is real with ``v**2 = rice_los_ratio`` so that
    the LOS power is ``rice_los_ratio`` times the unit scattered power.  Draw
    order is h, g, h_F from one PCG64 stream, so a seed pins the realization.
    """
    rng = make_rng(seed)
    los = math.sqrt(params.rice_los_ratio)
    h = _rician(rng, los, params.N_hw)
    g = _rician(rng, los, params.N_hw)
    h_F = complex(_rician(rng, los, 1)[0])
    return ChannelRealization(h, g, h_F)


def cascade(ch: ChannelRealization) -> CascadedChannel:
    raw = np.abs(ch.h * ch.g)
    # stable sort on the negated values keeps ties in ascending original index
    perm = np.argsort(-raw, kind="stable")
    alpha = raw[perm]
    prefix = np.cumsum(alpha)
    for arr in (alpha, prefix, perm):
        arr.flags.writeable = False
    return CascadedChannel(alpha, prefix, perm, ch)


_HEADER = "# risopt-channel v1"


def save_realization(ch: ChannelRealization, path: str | Path) -> None:
    """Write a realization as text.

    Line 1 is a header, line 2 ``h_F <re> <im>``, then one line per element
    ``<h_re> <h_im> <g_re> <g_im>``.  Floats use ``repr`` and round-trip exactly.
    """
    lines = [f"{_HEADER} n={ch.n_elements}", f"h_F {ch.h_F.real!r} {ch.h_F.imag!r}"]
    for hn, gn in zip(ch.h, ch.g):
        lines.append(f"{float(hn.real)!r} {float(hn.imag)!r} {float(gn.real)!r} {float(gn.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_realization(path: str | Path) -> ChannelRealization:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(_HEADER):
        raise ValidationError(f"{path}: not a channel record (missing header)")
    tag, re_, im_ = lines[1].split()
    if tag != "h_F":
        raise ValidationError(f"{path}: second line must hold h_F")
    rows = np.array([[float(x) for x in ln.split()] for ln in lines[2:]])
    if rows.ndim != 2 or rows.shape[1] != 4:
        raise ValidationError(f"{path}: element lines need 4 columns")
    return ChannelRealization(rows[:, 0] + 1j * rows[:, 1], rows[:, 2] + 1j * rows[:, 3], complex(float(re_), float(im_)))
