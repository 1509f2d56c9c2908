"""Random-instance checks of the greedy search against exhaustive search.

Instances are drawn around the reference link budget with a short frame so the
frame cap and the element count interact, and kept only when ``n_upper`` falls
in the requested range and (optionally) ``beta * alpha_max**2 >= 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import CascadedChannel, ChannelRealization, cascade, make_rng, sample
from .exceptions import InfeasibleInstanceError
from .model import DerivedConstants, SystemParams, dbm_to_watts, derive_constants
from .objectives import Objective, objective_curves, spectral_gain
from .optimizer import brute_force, check_assumption, greedy

TRADEOFF_WEIGHTS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True, eq=False)
class Instance:
    params: SystemParams
    channel: ChannelRealization
    cascade: CascadedChannel
    constants: DerivedConstants


def random_params(rng: np.random.Generator, n_hw: int) -> SystemParams:
    return SystemParams(
        p=dbm_to_watts(rng.uniform(0.0, 40.0)),
        p_F=dbm_to_watts(rng.uniform(10.0, 40.0)),
        P_0=dbm_to_watts(rng.uniform(0.0, 20.0)),
        B=10 ** rng.uniform(5.5, 7.5),
        B_F=10 ** rng.uniform(5.0, 6.5),
        N0=dbm_to_watts(-174.0 + rng.uniform(-3.0, 3.0)),
        delta=10 ** (-rng.uniform(9.0, 11.5)),
        delta_F=10 ** (-rng.uniform(9.0, 11.5)),
        mu=rng.uniform(1.0, 3.0),
        mu_F=rng.uniform(1.0, 3.0),
        P_c0=dbm_to_watts(rng.uniform(20.0, 50.0)),
        P_cn=dbm_to_watts(rng.uniform(0.0, 30.0)),
        b_F=float(rng.integers(1, 65)),
        T_0=0.5e-3,
        T=10 ** rng.uniform(math.log10(2.5e-3), 0.0),
        N_hw=n_hw,
        rice_los_ratio=rng.uniform(0.0, 8.0),
    )


def random_instance(
    rng,
    n_range: tuple[int, int] = (4, 64),
    require_assumption: bool = True,
    max_tries: int = 10_000,
) -> Instance:
    """Rejection-sample an instance with ``n_upper`` in ``n_range``."""
    rng = make_rng(rng)
    lo, hi = n_range
    for _ in range(max_tries):
        params = random_params(rng, int(rng.integers(lo, hi + 1)))
        ch = sample(params, rng)
        cc = cascade(ch)
        try:
            dc = derive_constants(params, ch.h_F, cc.alpha_max)
        except InfeasibleInstanceError:
            continue
        if not lo <= dc.n_upper <= hi:
            continue
        if require_assumption and not check_assumption(cc, dc).ok:
            continue
        return Instance(params, ch, cc, dc)
    raise RuntimeError(f"no instance with n_upper in {n_range} after {max_tries} draws")


def objectives_for(inst: Instance) -> list[tuple[str, Objective]]:
    """Rate, EE and one trade-off objective per weight in ``TRADEOFF_WEIGHTS``."""
    B = inst.params.B
    r_opt = brute_force(inst.cascade, inst.constants, Objective.rate(), B).rate
    e_opt = brute_force(inst.cascade, inst.constants, Objective.energy_efficiency(), B).ee
    objs = [("rate", Objective.rate()), ("ee", Objective.energy_efficiency())]
    objs += [(f"tradeoff_w{w}", Objective.tradeoff(w, r_opt, e_opt)) for w in TRADEOFF_WEIGHTS]
    return objs


def value_scale(obj: Objective, res) -> float:
    """Magnitude against which objective values are compared.

    For the trade-off the value is a difference of near-equal numbers, so the
    scale is that of the weighted reference terms rather than the value itself.
    """
    if obj.kind.value == "tradeoff":
        return max(abs(res.value), obj.w * abs(obj.R_opt), (1.0 - obj.w) * abs(obj.EE_opt))
    return max(abs(res.value), 1e-300)


def is_unimodal(values) -> bool:
    """True when the sequence never rises again after its first strict decrease."""
    v = np.asarray(values, dtype=float)
    dv = np.diff(v)
    dec = np.flatnonzero(dv < 0)
    return dec.size == 0 or not np.any(dv[dec[0]:] > 0)


def increment_concavity_slack(inst: Instance) -> float:
    """Smallest ``(f(N+1) - f(N)) - (f(N+2) - f(N+1))`` relative to the larger increment."""
    n = inst.constants.n_upper
    if n < 3:
        return math.inf
    f = np.array([spectral_gain(inst.cascade, k, inst.constants.beta) for k in range(1, n + 1)])
    inc = np.diff(f)
    worst = math.inf
    for a, b in zip(inc[:-1], inc[1:]):
        scale = max(abs(a), abs(b), 1e-300)
        worst = min(worst, (a - b) / scale)
    return worst


@dataclass
class ValidationReport:
    n_instances: int = 0
    agreement: dict = field(default_factory=dict)  # objective -> [passed, total]
    unimodal: dict = field(default_factory=dict)
    concavity: list = field(default_factory=lambda: [0, 0])
    value_mismatch: int = 0

    @property
    def ok(self) -> bool:
        return (
            all(p == t for p, t in self.agreement.values())
            and all(p == t for p, t in self.unimodal.values())
            and self.concavity[0] == self.concavity[1]
            and self.value_mismatch == 0
        )

    def lines(self) -> list[str]:
        out = [f"instances: {self.n_instances}"]
        for name, (p, t) in self.agreement.items():
            out.append(f"{'PASS' if p == t else 'FAIL'} greedy==oracle [{name}]: {p}/{t}")
        for name, (p, t) in self.unimodal.items():
            out.append(f"{'PASS' if p == t else 'FAIL'} unimodal trace [{name}]: {p}/{t}")
        p, t = self.concavity
        out.append(f"{'PASS' if p == t else 'FAIL'} increment concavity: {p}/{t}")
        out.append(f"{'PASS' if self.value_mismatch == 0 else 'FAIL'} value agreement (1e-12 rel): {self.value_mismatch} mismatches")
        return out


def run_oracle_suite(n_instances: int = 1000, seed: int = 0, n_range=(4, 64), concavity_tol: float = 1e-9) -> ValidationReport:
    """Greedy vs exhaustive search, trace unimodality and increment concavity."""
    rng = make_rng(np.random.SeedSequence(seed))
    rep = ValidationReport(n_instances=n_instances)
    for _ in range(n_instances):
        inst = random_instance(rng, n_range)
        B = inst.params.B
        for name, obj in objectives_for(inst):
            g = greedy(inst.cascade, inst.constants, obj, B, fallback_brute_force_on_assumption_violation=False)
            o = brute_force(inst.cascade, inst.constants, obj, B)
            agree = rep.agreement.setdefault(name, [0, 0])
            agree[1] += 1
            agree[0] += g.n_star == o.n_star
            if abs(g.value - o.value) > 1e-12 * value_scale(obj, o):
                rep.value_mismatch += 1
            values, _, _ = objective_curves(inst.cascade, inst.constants, B, obj)
            uni = rep.unimodal.setdefault(name, [0, 0])
            uni[1] += 1
            uni[0] += is_unimodal(values)
        rep.concavity[1] += 1
        rep.concavity[0] += increment_concavity_slack(inst) >= -concavity_tol
    return rep


def counterexample_scan(n_instances: int = 200, seed: int = 1, n_range=(4, 64)) -> list[dict]:
    """Record instances violating the SNR assumption where greedy misses the optimum.

    Such disagreements are allowed (the optimality argument needs the
    assumption); they are collected for inspection, never asserted against.
    """
    rng = make_rng(np.random.SeedSequence(seed))
    found = []
    for _ in range(n_instances):
        inst = random_instance(rng, n_range, require_assumption=False)
        inst = _weaken(inst, rng)
        if check_assumption(inst.cascade, inst.constants).ok:
            continue
        B = inst.params.B
        for name, obj in objectives_for(inst):
            g = greedy(inst.cascade, inst.constants, obj, B, fallback_brute_force_on_assumption_violation=False)
            o = brute_force(inst.cascade, inst.constants, obj, B)
            if g.n_star != o.n_star:
                found.append({"objective": name, "greedy": g.n_star, "oracle": o.n_star,
                              "peak_snr": check_assumption(inst.cascade, inst.constants).peak_snr,
                              "alpha": inst.cascade.alpha.tolist()})
    return found


def _weaken(inst: Instance, rng) -> Instance:
    """Scale the transmit power down until the strongest path's SNR is below 1."""
    peak = inst.constants.beta * inst.cascade.alpha_max**2
    factor = rng.uniform(0.05, 0.9) / peak
    params = inst.params.with_(p=inst.params.p * factor)
    try:
        dc = derive_constants(params, inst.channel.h_F, inst.cascade.alpha_max)
    except InfeasibleInstanceError:
        return inst
    return Instance(params, inst.channel, inst.cascade, dc)
