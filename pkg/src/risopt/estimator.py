"""scikit-learn style front end for a single RIS link."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .channel import ChannelRealization, cascade
from .exceptions import DomainError, ValidationError
from .model import SystemParams, derive_constants, from_config, reference_config
from .objectives import Objective, ObjectiveKind, evaluate, optimal_phases
from .optimizer import DEFAULT_ORACLE_CAP, brute_force, greedy

__all__ = ["RISElementOptimizer", "check_channel"]


def check_channel(X, h_F=None) -> ChannelRealization:
    """Coerce ``X`` to a :class:`ChannelRealization`.

    ``X`` is either a realization or a complex array of shape (N, 2) whose
    columns are ``h`` and ``g``; in the latter case ``h_F`` is required.
    """
    if isinstance(X, ChannelRealization):
        if h_F is not None:
            raise ValidationError("h_F is taken from the realization; do not pass it separately")
        return X
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValidationError(f"expected an (N, 2) array of [h, g] columns, got shape {arr.shape}")
    if h_F is None:
        raise ValidationError("h_F is required when X is an array")
    return ChannelRealization(arr[:, 0], arr[:, 1], h_F)


class RISElementOptimizer(BaseEstimator):
    """Choose how many RIS elements to switch on, and their phases, for one link.

    Parameters
    ----------
    params : SystemParams, optional
        Link parameters; defaults to the reference setup at 30 dBm.
    objective : {"rate", "ee", "tradeoff"}
    w : float, optional
        Trade-off weight in (0, 1); required for ``objective="tradeoff"``.
    method : {"greedy", "brute_force"}
    psi_shorthand : bool
        Use the compact per-element power slope instead of the full expansion.
    fallback : bool
        Exhaustive search when the strongest-path SNR is below one.

    Attributes
    ----------
    n_star_ : int
    phases_ : PhaseConfig
    value_, rate_, ee_ : float
    assumption_ok_ : bool
    result_ : OptimizationResult
    constants_ : DerivedConstants
    """

    def __init__(self, params=None, objective="rate", w=None, method="greedy", psi_shorthand=False,
                 fallback=True, oracle_cap=DEFAULT_ORACLE_CAP):
        self.params = params
        self.objective = objective
        self.w = w
        self.method = method
        self.psi_shorthand = psi_shorthand
        self.fallback = fallback
        self.oracle_cap = oracle_cap

    def _params(self) -> SystemParams:
        return self.params if self.params is not None else from_config(reference_config())

    def _solve(self, cc, dc, obj, B):
        if self.method == "greedy":
            return greedy(cc, dc, obj, B, fallback_brute_force_on_assumption_violation=self.fallback,
                          oracle_cap=self.oracle_cap)
        if self.method == "brute_force":
            return brute_force(cc, dc, obj, B, cap=self.oracle_cap)
        raise DomainError(f"unknown method {self.method!r}")

    def fit(self, X, y=None, h_F=None):
        kind = ObjectiveKind(self.objective)
        ch, cc, dc, params = self._instance(X, h_F)
        if kind is ObjectiveKind.TRADEOFF:
            r_opt = self._solve(cc, dc, Objective.rate(), params.B).rate
            e_opt = self._solve(cc, dc, Objective.energy_efficiency(), params.B).ee
            obj = Objective.tradeoff(self.w, r_opt, e_opt)
        else:
            obj = Objective(kind)
        res = self._solve(cc, dc, obj, params.B)

        self.channel_ = ch
        self.cascade_ = cc
        self.constants_ = dc
        self.objective_ = obj
        self.result_ = res
        self.n_star_ = res.n_star
        self.phases_ = res.phases
        self.value_ = res.value
        self.rate_ = res.rate
        self.ee_ = res.ee
        self.assumption_ok_ = res.assumption_ok
        return self

    def _instance(self, X, h_F):
        ch = check_channel(X, h_F)
        params = self._params()
        if ch.n_elements != params.N_hw:
            params = params.with_(N_hw=ch.n_elements)
        cc = cascade(ch)
        dc = derive_constants(params, ch.h_F, cc.alpha_max, psi_shorthand=self.psi_shorthand)
        return ch, cc, dc, params

    def transform(self, X=None, h_F=None):
        """Reflection coefficients ``exp(j*phi)`` for every element, 0 where inactive.

        With ``X`` given, the fitted element count is applied to the strongest
        elements of that realization, phase-aligned to it.
        """
        check_is_fitted(self, "n_star_")
        if X is None:
            return self.phases_.coefficients(self.channel_.n_elements)
        ch = check_channel(X, h_F)
        cc = cascade(ch)
        n = min(self.n_star_, ch.n_elements)
        return optimal_phases(ch, cc.strongest(n)).coefficients(ch.n_elements)

    def score(self, X=None, y=None, h_F=None):
        """Objective value of the fitted element count, on ``X`` if given."""
        check_is_fitted(self, "n_star_")
        if X is None:
            return self.value_
        if self.objective_.kind is ObjectiveKind.TRADEOFF:
            raise DomainError("trade-off references are specific to the fitted realization")
        _, cc, dc, params = self._instance(X, h_F)
        return evaluate(cc, min(self.n_star_, dc.n_upper), dc, params.B, self.objective_).value
