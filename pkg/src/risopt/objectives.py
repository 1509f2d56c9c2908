"""Phase alignment and the rate / energy-efficiency / trade-off objectives.

Scalar evaluators work in O(1) per element count thanks to the prefix sums of
the sorted cascade.  The ``*_curve`` functions evaluate a whole range of element
counts with numpy and are used by the exhaustive search and the Monte Carlo
harness.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import CascadedChannel, ChannelRealization
from .exceptions import DomainError
from .model import DerivedConstants

__all__ = [
    "PhaseConfig",
    "ObjectiveKind",
    "Objective",
    "ObjectiveValue",
    "optimal_phases",
    "composite_gain",
    "spectral_gain",
    "rate",
    "total_power",
    "energy_efficiency",
    "scalarized_tradeoff",
    "evaluate",
    "rate_curve",
    "power_curve",
    "objective_curves",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """Phase shifts ``phi`` (radians, [0, 2pi)) of the active elements ``indices``."""

    indices: np.ndarray
    phi: np.ndarray

    def __len__(self):
        return self.indices.size

    def coefficients(self, n_elements: int) -> np.ndarray:
        """Diagonal of the reflection matrix over all elements; inactive ones are 0."""
        out = np.zeros(n_elements, dtype=complex)
        out[self.indices] = np.exp(1j * self.phi)
        return out


class ObjectiveKind(str, enum.Enum):
    RATE = "rate"
    EE = "ee"
    TRADEOFF = "tradeoff"


@dataclass(frozen=True)
class Objective:
    """What to maximize.  Build with :meth:`rate`, :meth:`energy_efficiency` or :meth:`tradeoff`."""

    kind: ObjectiveKind
    w: float | None = None
    R_opt: float | None = None
    EE_opt: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.kind is ObjectiveKind.TRADEOFF:
            if self.w is None or not (0.0 < self.w < 1.0):
                raise DomainError(f"trade-off weight must lie in (0, 1), got {self.w!r}")
            if self.R_opt is None or self.EE_opt is None or not (
                math.isfinite(self.R_opt) and math.isfinite(self.EE_opt)
            ):
                raise DomainError("trade-off needs finite R_opt and EE_opt")

    @classmethod
    def rate(cls) -> "Objective":
        return cls(ObjectiveKind.RATE)

    @classmethod
    def energy_efficiency(cls) -> "Objective":
        return cls(ObjectiveKind.EE)

    @classmethod
    def tradeoff(cls, w: float, R_opt: float, EE_opt: float) -> "Objective":
        return cls(ObjectiveKind.TRADEOFF, w, R_opt, EE_opt)

    @classmethod
    def parse(cls, name: str) -> "Objective":
        return cls(ObjectiveKind(name.lower()))


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    rate: float
    power: float
    ee: float


def optimal_phases(ch: ChannelRealization, active) -> PhaseConfig:
    """Co-phase every active element so each term ``conj(g_n) e^{j phi_n} h_n`` is real and >= 0."""
    idx = np.atleast_1d(np.asarray(active, dtype=int))
    if idx.size == 0:
        raise DomainError("active element set is empty")
    if idx.min() < 0 or idx.max() >= ch.n_elements:
        raise DomainError(f"active indices must lie in [0, {ch.n_elements})")
    phi = np.mod(-np.angle(np.conj(ch.g[idx]) * ch.h[idx]), TWO_PI)
    # mod can return exactly 2pi for tiny negative angles
    phi[phi >= TWO_PI] = 0.0
    return PhaseConfig(idx, phi)


def composite_gain(ch: ChannelRealization, phases: PhaseConfig) -> float:
    """``|g^H Phi h|`` with only the configured elements reflecting."""
    idx = phases.indices
    return float(abs(np.sum(np.conj(ch.g[idx]) * np.exp(1j * phases.phi) * ch.h[idx])))


def _check_n(cc: CascadedChannel, N: int) -> None:
    if not 1 <= N <= cc.n_elements:
        raise DomainError(f"element count {N} outside [1, {cc.n_elements}]")


def spectral_gain(cc: CascadedChannel, N: int, beta: float) -> float:
    """``log2(1 + beta * (sum of the N strongest alphas)**2)``, i.e. f(N)/B."""
    _check_n(cc, N)
    s = float(cc.prefix[N - 1])
    return math.log2(1.0 + beta * s * s)


def rate(cc: CascadedChannel, N: int, dc: DerivedConstants, B: float) -> float:
    """Overhead-aware achievable rate in bit/s with the ``N`` strongest elements."""
    _check_n(cc, N)
    if N > dc.n_frame:
        raise DomainError(f"N={N} exceeds the frame cap {dc.n_frame}: no time left for data")
    return (dc.c - dc.d * N) * B * spectral_gain(cc, N, dc.beta)


def total_power(N: int, dc: DerivedConstants) -> float:
    if N < 0:
        raise DomainError(f"element count must be non-negative, got {N}")
    return dc.gamma + dc.psi * N


def energy_efficiency(cc: CascadedChannel, N: int, dc: DerivedConstants, B: float) -> float:
    return evaluate(cc, N, dc, B, Objective.energy_efficiency()).ee


def scalarized_tradeoff(cc: CascadedChannel, N: int, dc: DerivedConstants, B: float, obj: Objective) -> float:
    if obj.kind is not ObjectiveKind.TRADEOFF:
        raise DomainError("scalarized_tradeoff needs a trade-off objective")
    return evaluate(cc, N, dc, B, obj).value


def evaluate(cc: CascadedChannel, N: int, dc: DerivedConstants, B: float, obj: Objective) -> ObjectiveValue:
    r = rate(cc, N, dc, B)
    power = total_power(N, dc)
    if not power > 0:
        raise DomainError(f"total power {power} W is not positive at N={N}")
    ee = r / power
    if obj.kind is ObjectiveKind.RATE:
        value = r
    elif obj.kind is ObjectiveKind.EE:
        value = ee
    else:
        value = min(obj.w * (r - obj.R_opt), (1.0 - obj.w) * (ee - obj.EE_opt))
    return ObjectiveValue(value, r, power, ee)


def rate_curve(cc: CascadedChannel, dc: DerivedConstants, B: float, n_max: int | None = None) -> np.ndarray:
    """Rates for N = 1..n_max (default ``dc.n_upper``)."""
    n_max = dc.n_upper if n_max is None else n_max
    _check_n(cc, n_max)
    N = np.arange(1, n_max + 1)
    s = cc.prefix[:n_max]
    return (dc.c - dc.d * N) * B * np.log2(1.0 + dc.beta * s * s)


def power_curve(dc: DerivedConstants, n_max: int) -> np.ndarray:
    return dc.gamma + dc.psi * np.arange(1, n_max + 1)


def objective_curves(cc: CascadedChannel, dc: DerivedConstants, B: float, obj: Objective, n_max: int | None = None):
    """``(values, rates, ees)`` arrays over N = 1..n_max."""
    n_max = dc.n_upper if n_max is None else n_max
    rates = rate_curve(cc, dc, B, n_max)
    power = power_curve(dc, n_max)
    if np.any(power <= 0):
        raise DomainError("total power is not positive over the search range")
    ees = rates / power
    if obj.kind is ObjectiveKind.RATE:
        values = rates
    elif obj.kind is ObjectiveKind.EE:
        values = ees
    else:
        values = np.minimum(obj.w * (rates - obj.R_opt), (1.0 - obj.w) * (ees - obj.EE_opt))
    return values, rates, ees
