"""Greedy element activation, the exhaustive oracle and the Pareto sweep.

Elements are switched on one at a time in non-increasing order of their
cascaded gain.  The objective is evaluated after each activation and the
search stops at the first decrease; under ``beta * alpha_max**2 >= 1`` every
objective here is unimodal in N, so the stopping point is the global optimum.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import CascadedChannel
from .exceptions import DomainError, InfeasibleInstanceError, OracleCapError, StaleOptimaError
from .model import DerivedConstants
from .objectives import (
    Objective,
    ObjectiveKind,
    PhaseConfig,
    evaluate,
    objective_curves,
    optimal_phases,
)

__all__ = [
    "Method",
    "AssumptionCheck",
    "OptimizationResult",
    "ParetoPoint",
    "DEFAULT_ORACLE_CAP",
    "default_weights",
    "check_assumption",
    "greedy",
    "brute_force",
    "greedy_stop",
    "pareto_sweep",
    "filter_dominated",
]

DEFAULT_ORACLE_CAP = 10_000
# relative slack when checking that trade-off references are true maxima
_STALE_RTOL = 1e-9


class Method(str, enum.Enum):
    GREEDY = "greedy"
    BRUTE_FORCE = "brute_force"


@dataclass(frozen=True)
class AssumptionCheck:
    ok: bool
    peak_snr: float  # beta * alpha_max**2
    margin: float  # peak_snr - 1

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    n_star: int
    value: float
    rate: float
    ee: float
    power: float
    phases: PhaseConfig
    assumption_ok: bool
    trace: tuple  # ((N, value), ...) in visiting order
    method: Method
    objective: Objective

    def as_dict(self) -> dict:
        return {
            "objective": self.objective.kind.value,
            "method": self.method.value,
            "n_star": self.n_star,
            "value": self.value,
            "rate_bps": self.rate,
            "ee_bpj": self.ee,
            "power_w": self.power,
            "assumption_ok": self.assumption_ok,
            "active_elements": self.phases.indices.tolist(),
            "phases_rad": self.phases.phi.tolist(),
            "trace": [list(t) for t in self.trace],
        }


@dataclass(frozen=True)
class ParetoPoint:
    w: float
    n_star: int
    rate: float
    ee: float


def default_weights() -> np.ndarray:
    """99 uniform weights 0.01, 0.02, ..., 0.99."""
    return np.round(np.arange(1, 100) / 100.0, 2)


def check_assumption(cc: CascadedChannel, dc: DerivedConstants) -> AssumptionCheck:
    """Whether the strongest reflected path alone has SNR >= 1."""
    peak = dc.beta * cc.alpha_max**2
    return AssumptionCheck(peak >= 1.0, peak, peak - 1.0)


def _require_feasible(dc: DerivedConstants, cc: CascadedChannel) -> int:
    n_upper = min(dc.n_upper, cc.n_elements)
    if n_upper < 1:
        raise InfeasibleInstanceError(f"n_upper={dc.n_upper}: no feasible element count")
    return n_upper


def _check_not_stale(obj: Objective, rate, ee) -> None:
    if obj.kind is not ObjectiveKind.TRADEOFF:
        return
    r_tol = _STALE_RTOL * max(abs(obj.R_opt), 1e-300)
    e_tol = _STALE_RTOL * max(abs(obj.EE_opt), 1e-300)
    if np.any(np.asarray(rate) > obj.R_opt + r_tol) or np.any(np.asarray(ee) > obj.EE_opt + e_tol):
        raise StaleOptimaError("a visited element count beats R_opt or EE_opt: references belong to another instance")


def greedy(
    cc: CascadedChannel,
    dc: DerivedConstants,
    obj: Objective,
    B: float,
    *,
    fallback_brute_force_on_assumption_violation: bool = True,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
) -> OptimizationResult:
    """Activate elements strongest-first until the objective first decreases.

    Ties continue the ascent, so the returned N is the last point before the
    first strict decrease (or ``n_upper``).  At most ``n_star + 1`` counts are
    evaluated.  When the SNR assumption fails and the fallback is enabled, the
    exhaustive search is used instead (``method`` reports which one ran).
    """
    n_upper = _require_feasible(dc, cc)
    assumption = check_assumption(cc, dc)
    if not assumption.ok and fallback_brute_force_on_assumption_violation and n_upper <= oracle_cap:
        return brute_force(cc, dc, obj, B, cap=oracle_cap)

    N = 1
    best = evaluate(cc, 1, dc, B, obj)
    _check_not_stale(obj, best.rate, best.ee)
    trace = [(1, best.value)]
    while N < n_upper:
        nxt = evaluate(cc, N + 1, dc, B, obj)
        _check_not_stale(obj, nxt.rate, nxt.ee)
        trace.append((N + 1, nxt.value))
        if nxt.value < best.value:
            break
        N += 1
        best = nxt
    return OptimizationResult(
        n_star=N,
        value=best.value,
        rate=best.rate,
        ee=best.ee,
        power=best.power,
        phases=optimal_phases(cc.source, cc.strongest(N)),
        assumption_ok=assumption.ok,
        trace=tuple(trace),
        method=Method.GREEDY,
        objective=obj,
    )


def brute_force(
    cc: CascadedChannel,
    dc: DerivedConstants,
    obj: Objective,
    B: float,
    *,
    cap: int = DEFAULT_ORACLE_CAP,
) -> OptimizationResult:
    """Evaluate every N in [1, n_upper]; ties go to the smaller N."""
    n_upper = _require_feasible(dc, cc)
    if n_upper > cap:
        raise OracleCapError(f"n_upper={n_upper} exceeds the exhaustive-search cap {cap}")
    values, rates, ees = objective_curves(cc, dc, B, obj, n_upper)
    _check_not_stale(obj, rates, ees)
    k = int(np.argmax(values))
    N = k + 1
    return OptimizationResult(
        n_star=N,
        value=float(values[k]),
        rate=float(rates[k]),
        ee=float(ees[k]),
        power=dc.gamma + dc.psi * N,
        phases=optimal_phases(cc.source, cc.strongest(N)),
        assumption_ok=check_assumption(cc, dc).ok,
        trace=tuple((i + 1, float(v)) for i, v in enumerate(values)),
        method=Method.BRUTE_FORCE,
        objective=obj,
    )


def greedy_stop(values) -> np.ndarray | int:
    """The greedy stopping rule applied to precomputed objective sequences.

    ``values[..., k]`` is the objective at N = k + 1.  Returns the 1-based N
    reached by the ascent (last point before the first strict decrease) along
    the last axis; a scalar for 1-D input.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[-1] < 1:
        raise DomainError("empty objective sequence")
    if v.shape[-1] == 1:
        stop = np.ones(v.shape[:-1], dtype=int)
    else:
        dec = v[..., 1:] < v[..., :-1]
        stop = np.where(dec.any(axis=-1), dec.argmax(axis=-1), v.shape[-1] - 1) + 1
    return int(stop) if np.ndim(stop) == 0 else stop


def filter_dominated(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """Drop strictly dominated points and duplicates; sort by rate ascending."""
    ordered = sorted(points, key=lambda p: (p.rate, p.ee, p.w))
    kept: list[ParetoPoint] = []
    for p in ordered:
        dominated = any(
            (q.rate >= p.rate and q.ee >= p.ee and (q.rate > p.rate or q.ee > p.ee)) for q in ordered
        )
        duplicate = any(q.rate == p.rate and q.ee == p.ee for q in kept)
        if not dominated and not duplicate:
            kept.append(p)
    return kept


def pareto_sweep(
    cc: CascadedChannel,
    dc: DerivedConstants,
    B: float,
    weights=None,
    *,
    filtered: bool = True,
    **greedy_kwargs,
) -> list[ParetoPoint]:
    """Trace the rate/EE frontier by max-min scalarization over ``weights``.

    The individual optima are computed once; each weight is then solved with
    :func:`greedy`.  With ``filtered=False`` one point per weight is returned in
    weight order.
    """
    weights = default_weights() if weights is None else np.asarray(weights, dtype=float)
    if weights.size == 0:
        raise DomainError("weight grid is empty")
    if np.any((weights <= 0) | (weights >= 1)):
        raise DomainError("weights must lie strictly inside (0, 1)")
    r_best = greedy(cc, dc, Objective.rate(), B, **greedy_kwargs)
    e_best = greedy(cc, dc, Objective.energy_efficiency(), B, **greedy_kwargs)
    points = []
    for w in weights:
        res = greedy(cc, dc, Objective.tradeoff(float(w), r_best.rate, e_best.ee), B, **greedy_kwargs)
        points.append(ParetoPoint(float(w), res.n_star, res.rate, res.ee))
    return filter_dominated(points) if filtered else points
