"""Monte Carlo experiments: scheme comparison, average maximizers, Pareto regions.

Channel draws are paired across schemes and objectives: realization ``r`` at
power index ``i`` always uses ``SeedSequence(master_seed, spawn_key=(i, r, 0))``
for the channel and ``spawn_key=(i, r, 1)`` for the random choices of the
baseline schemes.  Results therefore do not depend on worker count or order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .channel import cascade, make_rng, sample
from .exceptions import DomainError, InfeasibleInstanceError, InfeasibleRunError
from .model import SystemParams, dbm_to_watts, derive_constants
from .objectives import power_curve, rate_curve
from .optimizer import default_weights, greedy_stop

__all__ = [
    "SCHEMES",
    "ExperimentSpec",
    "SweepRow",
    "ParetoRow",
    "AggregateResult",
    "child_seed",
    "run_scheme",
    "table_maximizers",
    "pareto_experiment",
    "frontier_summary",
    "SWEEP_FIELDS",
    "PARETO_FIELDS",
]

SCHEMES = ("a", "b", "c")
SCHEME_NAMES = {"a": "OptimalBoth", "b": "RandomN_OptimalPhase", "c": "RandomBoth"}
SWEEP_FIELDS = (
    "power_dbm", "scheme", "objective", "mean_rate_bps", "se_rate", "mean_ee_bpj", "se_ee",
    "mean_n_star", "se_n_star", "n_realizations", "n_skipped",
)
PARETO_FIELDS = ("power_dbm", "p_cn_dbm", "w", "mean_rate_bps", "mean_ee_bpj")


@dataclass(frozen=True)
class ExperimentSpec:
    params: SystemParams
    power_sweep_dbm: tuple = (0.0, 10.0, 20.0, 30.0, 40.0)
    n_realizations: int = 10_000
    schemes: tuple = SCHEMES
    master_seed: int = 0
    objectives: tuple = ("rate", "ee")
    p_cn_sweep_dbm: tuple = (10.0, 15.0)
    weights: tuple | None = None
    n_jobs: int = 1
    max_skip_fraction: float = 0.01
    fallback_brute_force_on_assumption_violation: bool = True

    def __post_init__(self):
        object.__setattr__(self, "power_sweep_dbm", tuple(float(p) for p in self.power_sweep_dbm))
        object.__setattr__(self, "schemes", tuple(str(s).lower() for s in self.schemes))
        object.__setattr__(self, "objectives", tuple(str(o).lower() for o in self.objectives))
        object.__setattr__(self, "p_cn_sweep_dbm", tuple(float(p) for p in self.p_cn_sweep_dbm))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.n_realizations < 1:
            raise DomainError("n_realizations must be >= 1")
        if not self.power_sweep_dbm:
            raise DomainError("power sweep is empty")
        bad = set(self.schemes) - set(SCHEMES)
        if bad or not self.schemes:
            raise DomainError(f"unknown scheme(s) {sorted(bad)}; choose from a, b, c")
        bad = set(self.objectives) - {"rate", "ee", "pareto"}
        if bad or not self.objectives:
            raise DomainError(f"unknown objective(s) {sorted(bad)}; choose from rate, ee, pareto")
        if self.n_jobs < 1:
            raise DomainError("n_jobs must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    power_dbm: float
    scheme: str
    objective: str
    mean_rate_bps: float
    se_rate: float
    mean_ee_bpj: float
    se_ee: float
    mean_n_star: float
    se_n_star: float
    n_realizations: int
    n_skipped: int


@dataclass(frozen=True)
class ParetoRow:
    power_dbm: float
    p_cn_dbm: float
    w: float
    mean_rate_bps: float
    mean_ee_bpj: float


@dataclass
class AggregateResult:
    rows: list = field(default_factory=list)
    pareto: list = field(default_factory=list)

    def row(self, power_dbm: float, scheme: str, objective: str) -> SweepRow:
        for r in self.rows:
            if r.power_dbm == power_dbm and r.scheme == scheme and r.objective == objective:
                return r
        raise KeyError((power_dbm, scheme, objective))

    def to_csv(self, kind: str = "sweep") -> str:
        rows, names = (self.rows, SWEEP_FIELDS) if kind == "sweep" else (self.pareto, PARETO_FIELDS)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for r in rows:
            writer.writerow([_fmt(getattr(r, n)) for n in names])
        return buf.getvalue()

    def to_json(self, kind: str = "sweep") -> str:
        rows, names = (self.rows, SWEEP_FIELDS) if kind == "sweep" else (self.pareto, PARETO_FIELDS)
        return json.dumps([{n: getattr(r, n) for n in names} for r in rows], indent=2) + "\n"


def _fmt(x):
    return repr(float(x)) if isinstance(x, float) else str(x)


def child_seed(master_seed: int, power_index: int, realization_index: int, stream: int) -> np.random.SeedSequence:
    """Seed for one (power, realization) work item; stream 0 = channel, 1 = scheme draws."""
    return np.random.SeedSequence(master_seed, spawn_key=(power_index, realization_index, stream))


def _maximizer(values: np.ndarray, greedy_ok: bool) -> int:
    # greedy ascent when its optimality condition holds, exhaustive search otherwise
    return greedy_stop(values) if greedy_ok else int(np.argmax(values, axis=-1)) + 1


def _maximizers(values: np.ndarray, greedy_ok: bool) -> np.ndarray:
    return greedy_stop(values) if greedy_ok else np.argmax(values, axis=-1) + 1


def _instance(params: SystemParams, seed):
    ch = sample(params, seed)
    cc = cascade(ch)
    dc = derive_constants(params, ch.h_F, cc.alpha_max)
    return ch, cc, dc


def _sweep_item(args):
    params, p_idx, r_idx, master_seed, schemes, objectives, fallback = args
    try:
        ch, cc, dc = _instance(params, child_seed(master_seed, p_idx, r_idx, 0))
    except InfeasibleInstanceError:
        return None
    out = {}
    n_upper = dc.n_upper
    rates = rate_curve(cc, dc, params.B, n_upper)
    ees = rates / power_curve(dc, n_upper)
    greedy_ok = (dc.beta * cc.alpha_max**2 >= 1.0) or not fallback
    if "a" in schemes:
        for obj in objectives:
            if obj == "pareto":
                continue
            n = _maximizer(rates if obj == "rate" else ees, greedy_ok)
            out[("a", obj)] = (rates[n - 1], ees[n - 1], n)
    if "b" in schemes or "c" in schemes:
        rng = make_rng(child_seed(master_seed, p_idx, r_idx, 1))
        n = int(rng.integers(1, n_upper + 1))
        if "b" in schemes:
            out[("b", "none")] = (rates[n - 1], ees[n - 1], n)
        if "c" in schemes:
            phi = rng.uniform(0.0, 2.0 * math.pi, n)
            idx = cc.strongest(n)
            gain = abs(np.sum(np.conj(ch.g[idx]) * np.exp(1j * phi) * ch.h[idx]))
            # no configuration to report: T_F = 0 and T_E = T_0
            frac = 1.0 - params.T_0 / params.T
            r = frac * params.B * math.log2(1.0 + dc.beta * gain * gain)
            power = params.P_c0 + params.P_0 * params.T_0 / params.T + params.mu * params.p * frac + n * params.P_cn
            out[("c", "none")] = (r, r / power, n)
    return out


def _pareto_item(args):
    params, p_idx, r_idx, master_seed, p_cn_list, weights, fallback = args
    try:
        ch, cc, dc0 = _instance(params, child_seed(master_seed, p_idx, r_idx, 0))
    except InfeasibleInstanceError:
        return None
    w = np.asarray(weights)[:, None]
    out = {}
    for p_cn in p_cn_list:
        dc = derive_constants(params.with_(P_cn=p_cn), ch.h_F, cc.alpha_max)
        n_upper = dc.n_upper
        rates = rate_curve(cc, dc, params.B, n_upper)
        ees = rates / power_curve(dc, n_upper)
        greedy_ok = (dc.beta * cc.alpha_max**2 >= 1.0) or not fallback
        r_opt = rates[_maximizer(rates, greedy_ok) - 1]
        e_opt = ees[_maximizer(ees, greedy_ok) - 1]
        scal = np.minimum(w * (rates - r_opt), (1.0 - w) * (ees - e_opt))
        n = _maximizers(scal, greedy_ok)
        out[p_cn] = (rates[n - 1], ees[n - 1])
    return out


def _map(func, items: list, n_jobs: int) -> list:
    if n_jobs == 1 or len(items) < 2:
        return [func(it) for it in items]
    chunk = max(1, len(items) // (4 * n_jobs))
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _check_skips(n_skipped: int, spec: ExperimentSpec, power_dbm: float) -> None:
    if n_skipped > spec.max_skip_fraction * spec.n_realizations:
        raise InfeasibleRunError(
            f"{n_skipped} of {spec.n_realizations} realizations infeasible at {power_dbm} dBm "
            f"(limit {spec.max_skip_fraction:.1%}); check T, T_0, b_F and the element caps"
        )


def _mean_se(x: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(x, dtype=float)
    if a.size == 0:
        return math.nan, math.nan
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return float(a.mean()), se


def run_scheme(spec: ExperimentSpec) -> AggregateResult:
    """Average rate, EE and element count of each scheme over the power sweep.

    Scheme ``a`` optimizes N per requested objective ("rate", "ee").  Schemes
    ``b`` and ``c`` draw N uniformly in [1, n_upper] and are reported once with
    objective ``"none"``; ``c`` also draws the phases and carries no feedback
    overhead.
    """
    result = AggregateResult()
    keys = []
    if "a" in spec.schemes:
        keys += [("a", o) for o in spec.objectives if o != "pareto"]
    keys += [(s, "none") for s in ("b", "c") if s in spec.schemes]
    for p_idx, p_dbm in enumerate(spec.power_sweep_dbm):
        params = spec.params.with_(p=dbm_to_watts(p_dbm))
        items = [
            (params, p_idx, r, spec.master_seed, spec.schemes, spec.objectives,
             spec.fallback_brute_force_on_assumption_violation)
            for r in range(spec.n_realizations)
        ]
        outs = _map(_sweep_item, items, spec.n_jobs)
        n_skipped = sum(o is None for o in outs)
        _check_skips(n_skipped, spec, p_dbm)
        done = [o for o in outs if o is not None]
        for key in keys:
            vals = np.array([o[key] for o in done], dtype=float).reshape(-1, 3)
            mr, sr = _mean_se(vals[:, 0])
            me, se = _mean_se(vals[:, 1])
            mn, sn = _mean_se(vals[:, 2])
            result.rows.append(SweepRow(p_dbm, key[0], key[1], mr, sr, me, se, mn, sn, len(done), n_skipped))
    return result


def table_maximizers(spec: ExperimentSpec) -> list[dict]:
    """Mean rate- and EE-maximizing element counts per transmit power."""
    sub = replace(spec, schemes=("a",), objectives=("rate", "ee"))
    res = run_scheme(sub)
    return [
        {
            "power_dbm": p,
            "mean_n_rate": res.row(p, "a", "rate").mean_n_star,
            "mean_n_ee": res.row(p, "a", "ee").mean_n_star,
            "se_n_rate": res.row(p, "a", "rate").se_n_star,
            "se_n_ee": res.row(p, "a", "ee").se_n_star,
        }
        for p in spec.power_sweep_dbm
    ]


def pareto_experiment(spec: ExperimentSpec) -> AggregateResult:
    """Per (power, P_cn, w) mean (rate, EE) of the max-min scalarized optimum.

    Both P_cn values are evaluated on the same channel draws.
    """
    weights = tuple(default_weights()) if spec.weights is None else spec.weights
    if any(not 0 < w < 1 for w in weights) or not weights:
        raise DomainError("weights must be a non-empty grid inside (0, 1)")
    p_cn_list = [dbm_to_watts(x) for x in spec.p_cn_sweep_dbm]
    result = AggregateResult()
    for p_idx, p_dbm in enumerate(spec.power_sweep_dbm):
        params = spec.params.with_(p=dbm_to_watts(p_dbm))
        items = [
            (params, p_idx, r, spec.master_seed, p_cn_list, weights,
             spec.fallback_brute_force_on_assumption_violation)
            for r in range(spec.n_realizations)
        ]
        outs = _map(_pareto_item, items, spec.n_jobs)
        n_skipped = sum(o is None for o in outs)
        _check_skips(n_skipped, spec, p_dbm)
        done = [o for o in outs if o is not None]
        for p_cn_dbm, p_cn in zip(spec.p_cn_sweep_dbm, p_cn_list):
            r = np.mean([o[p_cn][0] for o in done], axis=0)
            e = np.mean([o[p_cn][1] for o in done], axis=0)
            for k, w in enumerate(weights):
                result.pareto.append(ParetoRow(p_dbm, p_cn_dbm, w, float(r[k]), float(e[k])))
    return result


def frontier_summary(rows: Iterable[ParetoRow]) -> dict:
    """Per (power, P_cn): rate spread, dominance and EE-monotonicity of the averaged frontier."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.power_dbm, row.p_cn_dbm), []).append(row)
    out = {}
    for key, pts in groups.items():
        rate = np.array([p.mean_rate_bps for p in pts])
        ee = np.array([p.mean_ee_bpj for p in pts])
        dominated = any(
            np.any((rate >= rate[i]) & (ee >= ee[i]) & ((rate > rate[i]) | (ee > ee[i])))
            for i in range(rate.size)
        )
        order = np.lexsort((-ee, rate))
        out[key] = {
            "rate_spread": float(rate.max() - rate.min()),
            "ee_spread": float(ee.max() - ee.min()),
            "non_dominated": not dominated,
            "ee_monotone": bool(np.all(np.diff(ee[order]) <= 0)),
            "n_points": int(rate.size),
        }
    return out
