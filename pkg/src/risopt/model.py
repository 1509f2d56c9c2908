"""System parameters, unit conversion and the derived scalars of the RIS link.

Everything inside the package is SI linear units.  dB/dBm values are accepted
only by :func:`from_config`, which is the configuration boundary.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

from .exceptions import ConfigError, DegenerateChannelError, InfeasibleInstanceError, ValidationError

__all__ = [
    "SystemParams",
    "DerivedConstants",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "from_config",
    "load_config",
    "reference_config",
    "compute_beta",
    "feedback_slot_time",
    "derive_constants",
    "total_power_expanded",
    "frame_fraction_expanded",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    return 10.0 * math.log10(x_w) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants of the link, SI units.

    ``mu`` and ``mu_F`` are inverse amplifier efficiencies (>= 1), ``delta`` and
    ``delta_F`` linear attenuations in (0, 1], ``b_F`` the feedback bits spent
    per RIS element.
    """

    p: float
    p_F: float
    P_0: float
    B: float
    B_F: float
    N0: float
    delta: float
    delta_F: float
    mu: float
    mu_F: float
    P_c0: float
    P_cn: float
    b_F: float
    T_0: float
    T: float = 1.0
    N_hw: int = 200
    rice_los_ratio: float = 4.0

    def __post_init__(self):
        for name in ("p", "p_F", "P_0", "B", "B_F", "N0", "P_c0", "P_cn", "T_0", "T"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and strictly positive, got {value!r}")
        for name in ("delta", "delta_F"):
            value = getattr(self, name)
            if not (0 < value <= 1):
                raise ValidationError(f"{name} must lie in (0, 1], got {value!r}")
        for name in ("mu", "mu_F"):
            if not getattr(self, name) >= 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if not (math.isfinite(self.b_F) and self.b_F >= 0):
            raise ValidationError(f"b_F must be finite and non-negative, got {self.b_F!r}")
        if not (math.isfinite(self.rice_los_ratio) and self.rice_los_ratio >= 0):
            raise ValidationError(f"rice_los_ratio must be non-negative, got {self.rice_los_ratio!r}")
        if int(self.N_hw) != self.N_hw or self.N_hw < 1:
            raise ValidationError(f"N_hw must be a positive integer, got {self.N_hw!r}")
        object.__setattr__(self, "N_hw", int(self.N_hw))
        if not self.T > 2 * self.T_0:
            raise ValidationError(f"frame T={self.T} must exceed 2*T_0={2 * self.T_0}")

    def with_(self, **changes) -> "SystemParams":
        """Copy with some fields replaced (re-validated)."""
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedConstants:
    """Scalars shared by every objective for one feedback-channel realization.

    Rate is ``(c - d*N) * B * log2(1 + beta * S_N**2)`` and total power is
    ``gamma + psi*N``.  ``feedback_time`` is the feedback duration per element.
    """

    beta: float
    c: float
    d: float
    gamma: float
    psi: float
    feedback_time: float
    n_phys: int
    n_frame: int
    n_upper: int

    @property
    def feasible(self) -> bool:
        return self.n_upper >= 1


# (field, linear key, dB key, converter, required)
_KEYS = (
    ("p", "p", "p_dbm", dbm_to_watts, True),
    ("p_F", "p_F", "p_F_dbm", dbm_to_watts, True),
    ("P_0", "P_0", "P_0_dbm", dbm_to_watts, True),
    ("B", "B", None, None, True),
    ("B_F", "B_F", None, None, True),
    ("N0", "N0", "N0_dbm_hz", dbm_to_watts, True),
    ("delta", "delta", "delta_loss_db", lambda x: db_to_linear(-x), True),
    ("delta_F", "delta_F", "delta_F_loss_db", lambda x: db_to_linear(-x), False),
    ("mu", "mu", None, None, True),
    ("mu_F", "mu_F", None, None, True),
    ("P_c0", "P_c0", "P_c0_dbm", dbm_to_watts, True),
    ("P_cn", "P_cn", "P_cn_dbm", dbm_to_watts, True),
    ("b_F", "b_F", None, None, True),
    ("T_0", "T_0", None, None, True),
    ("T", "T", None, None, False),
    ("N_hw", "N_hw", None, None, False),
    ("rice_los_ratio", "rice_los_ratio", None, None, False),
)
KNOWN_KEYS = frozenset(k for row in _KEYS for k in row[1:3] if k)


def _number(key, value) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: value must be finite, got {value!r}")
    return x


def from_config(raw: Mapping[str, object]) -> SystemParams:
    """Build :class:`SystemParams` from a flat key/value mapping.

    Each quantity may be given either in linear SI units (``p``) or in
    dB/dBm (``p_dbm``), not both.  Path losses are given as positive losses,
    e.g. ``delta_loss_db = 110`` means ``delta = 1e-11``.  ``delta_F``
    defaults to ``delta``; ``T``, ``N_hw`` and ``rice_los_ratio`` fall back to
    the dataclass defaults.
    """
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")
    values = {}
    for name, lin_key, db_key, conv, required in _KEYS:
        has_lin = lin_key in raw
        has_db = db_key is not None and db_key in raw
        if has_lin and has_db:
            raise ConfigError(f"{name}: give either {lin_key!r} or {db_key!r}, not both")
        if has_lin:
            x = _number(lin_key, raw[lin_key])
            if x <= 0 and name not in ("b_F", "rice_los_ratio"):
                raise ValidationError(f"{lin_key} must be strictly positive, got {x!r}")
            values[name] = x
        elif has_db:
            values[name] = conv(_number(db_key, raw[db_key]))
        elif required:
            raise ConfigError(f"missing configuration key {lin_key!r}" + (f" (or {db_key!r})" if db_key else ""))
    values.setdefault("delta_F", values["delta"])
    if "N_hw" in values:
        if values["N_hw"] != int(values["N_hw"]):
            raise ValidationError(f"N_hw must be an integer, got {values['N_hw']!r}")
        values["N_hw"] = int(values["N_hw"])
    return SystemParams(**values)


def load_config(path: str | Path, base: Mapping[str, object] | None = None) -> SystemParams:
    """Read a flat ``key = value`` text file (``#`` comments, no sections needed).

    Keys in the file override ``base`` when given.  A key overriding a base
    entry also drops the base's alternative-unit spelling of the same quantity.
    """
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[params]\n" + text if not text.lstrip().startswith("[") else text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    entries = {}
    for section in parser.sections():
        entries.update(parser[section])
    merged = dict(base or {})
    for name, lin_key, db_key, *_ in _KEYS:
        if lin_key in entries or (db_key and db_key in entries):
            merged.pop(lin_key, None)
            if db_key:
                merged.pop(db_key, None)
    merged.update(entries)
    return from_config(merged)


def reference_config(p_dbm: float = 30.0, **overrides) -> dict:
    """Raw configuration of the reference numerical setup (T = 1 s assumed)."""
    raw = {
        "p_dbm": p_dbm,
        "p_F_dbm": 30.0,
        "P_0_dbm": 10.0,
        "B": 5e6,
        "B_F": 1e6,
        "N0_dbm_hz": -174.0,
        "delta_loss_db": 110.0,
        "mu": 1.0,
        "mu_F": 1.0,
        "P_c0_dbm": 45.0,
        "P_cn_dbm": 10.0,
        "b_F": 16,
        "T_0": 0.5e-3,
        "T": 1.0,
        "N_hw": 200,
        "rice_los_ratio": 4.0,
    }
    raw.update(overrides)
    return raw


def compute_beta(params: SystemParams) -> float:
    """Receive SNR scale p*delta/(B*N0)."""
    return params.p * params.delta / (params.B * params.N0)


def feedback_slot_time(params: SystemParams, h_F: complex) -> float:
    """Seconds needed to feed back one element's configuration over ``h_F``."""
    gain = abs(h_F) ** 2
    if params.b_F == 0:
        return 0.0
    if not gain > 0:
        raise DegenerateChannelError("feedback channel gain is zero: feedback time is infinite")
    snr = params.p_F * params.delta_F * gain / (params.N0 * params.B_F)
    return params.b_F / (params.B_F * math.log2(1.0 + snr))


def derive_constants(
    params: SystemParams,
    h_F: complex,
    alpha_max: float,
    *,
    psi_shorthand: bool = False,
    check: bool = True,
) -> DerivedConstants:
    """Derived scalars for one realization.

    ``psi`` comes from expanding the total power model.  ``psi_shorthand``
    switches to the compact form ``(P_0 - mu*p - 1)*T_0/T + d + P_cn``, which
    agrees with the expansion only when ``mu_F*p_F - mu*p == 1``.

    With ``check=True`` an instance whose element cap ``n_upper`` is below 1
    raises :class:`InfeasibleInstanceError`.
    """
    if not alpha_max > 0:
        raise ValidationError(f"alpha_max must be positive, got {alpha_max!r}")
    T, T_0 = params.T, params.T_0
    beta = compute_beta(params)
    tf = feedback_slot_time(params, h_F)
    c = 1.0 - T_0 / T
    d = T_0 / T + tf / T
    gamma = params.P_c0 + params.P_0 * T_0 / T + params.mu * params.p * c
    if psi_shorthand:
        psi = (params.P_0 - params.mu * params.p - 1.0) * T_0 / T + d + params.P_cn
    else:
        psi = (
            (params.P_0 - params.mu * params.p) * T_0 / T
            + (tf / T) * (params.mu_F * params.p_F - params.mu * params.p)
            + params.P_cn
        )
    sqrt_delta = math.sqrt(params.delta)
    n_phys = math.floor(min(1.0 / (alpha_max * sqrt_delta), math.sqrt(beta / params.delta)))
    n_frame = math.floor(c / d)
    n_upper = min(params.N_hw, n_phys, n_frame)
    dc = DerivedConstants(beta, c, d, gamma, psi, tf, n_phys, n_frame, n_upper)
    if check and n_upper < 1:
        raise InfeasibleInstanceError(
            f"no feasible element count: N_hw={params.N_hw}, n_phys={n_phys}, n_frame={n_frame}"
        )
    return dc


def frame_fraction_expanded(params: SystemParams, feedback_time: float, N: int) -> float:
    """Share of the frame left for data: 1 - (T_E + T_F)/T, built from durations."""
    T_E = params.T_0 * (N + 1)
    T_F = N * feedback_time
    return 1.0 - (T_E + T_F) / params.T


def total_power_expanded(params: SystemParams, feedback_time: float, N: int) -> float:
    """Total consumed power summed term by term from the phase durations."""
    T = params.T
    T_E = params.T_0 * (N + 1)
    T_F = N * feedback_time
    P_E = T_E * params.P_0 / T
    return (
        P_E
        + (1.0 - T_E / T) * params.mu * params.p
        + (T_F / T) * (params.mu_F * params.p_F - params.mu * params.p)
        + N * params.P_cn
        + params.P_c0
    )
