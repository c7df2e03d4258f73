"""Associated weight function ``omega_M(t) = sup_k ln(t^k / M_k)``.

For a log-convex table the supremum on ``[mu_k, mu_{k+1})`` is attained at
index ``k``, which gives an exact piecewise-linear (in ``ln t``) evaluation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .weights import Window, WeightSequence, check_moderate_growth, is_admissible, tail_trend


class OmegaRangeError(ValueError):
    """Raised when ``t`` lies beyond the last breakpoint ``mu_{k_max}``."""


def _log_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("omega_M is defined for t >= 0")
    with np.errstate(divide="ignore"):
        return np.log(t)


def omega_brute(seq: WeightSequence, t) -> float | np.ndarray:
    """Direct maximum of ``k ln t - ln M_k`` over every stored k (k = 0 gives 0)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("omega_brute requires t > 0")
    log_t = np.log(t_arr)
    return omega_brute_log(seq, log_t) if t_arr.ndim else float(omega_brute_log(seq, log_t)[0])


def omega_brute_log(seq: WeightSequence, log_t) -> np.ndarray:
    log_t = np.atleast_1d(np.asarray(log_t, dtype=float))
    k = np.arange(seq.k_max + 1, dtype=float)
    out = np.empty_like(log_t)
    # chunk to keep the (points x indices) matrix small
    step = max(1, 2_000_000 // k.size)
    for s in range(0, log_t.size, step):
        block = log_t[s:s + step, None] * k[None, :] - seq.log_m[None, :]
        out[s:s + step] = block.max(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class OmegaTable:
    """Breakpoints ``ln mu_k`` and the source table for piecewise evaluation."""

    seq: WeightSequence
    breakpoints: np.ndarray  # ln mu_k, k = 1..k_max

    @classmethod
    def build(cls, seq: WeightSequence) -> "OmegaTable":
        bp = seq.log_mu[1:].copy()
        if np.any(np.diff(bp) < -1e-12 * np.maximum(1.0, np.abs(bp[1:]))):
            raise ValueError(f"{seq.name}: quotients mu_k are not non-decreasing; "
                             "table is not log-convex")
        bp.setflags(write=False)
        return cls(seq, bp)

    @property
    def log_t_max(self) -> float:
        return float(self.breakpoints[-1])

    def segment(self, log_t) -> np.ndarray:
        """Index k with ``mu_k <= t < mu_{k+1}`` (largest k on ties, 0 below mu_1)."""
        return np.searchsorted(self.breakpoints, log_t, side="right")

    def omega_log(self, log_t) -> np.ndarray:
        """Evaluate ``omega_M`` at ``t = exp(log_t)``; ``log_t = -inf`` means t = 0."""
        log_t = np.asarray(log_t, dtype=float)
        if np.any(log_t > self.log_t_max):
            raise OmegaRangeError(
                f"t beyond mu_{self.seq.k_max} = exp({self.log_t_max:.6g}); "
                "the table cannot certify the supremum there")
        k = self.segment(log_t)
        with np.errstate(invalid="ignore"):
            val = k * log_t - self.seq.log_m[k]
        return np.where(k == 0, 0.0, val)

    def __call__(self, t):
        out = self.omega_log(_log_t(t))
        return float(out) if np.ndim(out) == 0 else out


def omega_fast(table: OmegaTable, t):
    return table(t)


@dataclass
class Lemma2Fit:
    H: float
    argmax_k: int
    H_theory: float
    D: float
    within_theory: bool
    bounded: bool
    window: Window
    k: np.ndarray
    log_lambda: np.ndarray
    omega_of_lambda: np.ndarray
    ratio: np.ndarray

    def rows(self):
        for k, ll, om, r in zip(self.k, self.log_lambda, self.omega_of_lambda, self.ratio):
            yield int(k), math.exp(ll), float(om), float(r)

    def to_dict(self):
        return {"H": self.H, "argmax_k": self.argmax_k, "H_theory": self.H_theory,
                "D": self.D, "within_theory": self.within_theory, "bounded": self.bounded,
                "window": list(self.window)}


def lemma2_fit(seq: WeightSequence, window: Window | None = None,
               table: OmegaTable | None = None) -> Lemma2Fit:
    """Fit ``H`` in ``omega_M(Lambda_k) <= H k`` on a window.

    The theoretical value is ``ln D`` with ``D`` the fitted moderate-growth
    constant raised to at least ``e``.
    """
    lo, hi = (1, seq.k_max) if window is None else (int(window[0]), int(window[1]))
    if not is_admissible(seq, (lo, hi)).holds:
        warnings.warn(f"{seq.name} is not admissible on [{lo}, {hi}]; H may not exist",
                      stacklevel=2)
    table = table or OmegaTable.build(seq)
    k = np.arange(lo, hi + 1)
    ll = seq.log_lambda[lo:hi + 1]
    om = table.omega_log(ll)
    ratio = om / k
    i = int(np.argmax(ratio))
    H = float(ratio[i])
    mg = check_moderate_growth(seq, (lo, hi))
    log_d = max(1.0, mg.log_constant)
    return Lemma2Fit(
        H=H, argmax_k=int(k[i]), H_theory=log_d, D=math.exp(min(log_d, 700.0)),
        within_theory=H <= log_d + 1e-9, bounded=tail_trend(ratio).bounded,
        window=(lo, hi), k=k, log_lambda=ll, omega_of_lambda=om, ratio=ratio,
    )
