"""Weight sequences in log-domain arithmetic.

A weight sequence ``M = (M_k)`` is stored as the table ``log_m[k] = ln M_k``
for ``0 <= k <= k_max``.  Values such as ``(10^5)!^3`` overflow any double,
but every inequality we care about is multiplicative and therefore exact
addition in the log domain.

Asymptotic conditions ("there is a finite constant") cannot be decided from a
finite table.  They are decided on a window by a window maximum plus a tail
trend test, see :func:`tail_trend`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import gammaln

DEFAULT_K_MAX = 100_000
LOG_TOL = 1e-12

# fraction of the window used for tail tests
TAIL_FRACTION = 0.1
# increments of a log-ratio decaying like k^-p with p above this are treated
# as summable, i.e. the ratio converges
SUMMABLE_EXPONENT = 1.5

Window = tuple[int, int]


@dataclass(frozen=True, eq=False)
class WeightSequence:
    name: str
    log_m: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)
    log_convex: bool = True

    def __post_init__(self):
        log_m = np.asarray(self.log_m, dtype=float)
        if log_m.ndim != 1 or log_m.size < 2:
            raise ValueError("log_m must be a 1-D table with at least two entries")
        if not np.all(np.isfinite(log_m)):
            raise ValueError("log_m contains non-finite values")
        if log_m[0] != 0.0:
            raise ValueError("M_0 must equal 1 (log_m[0] == 0)")
        if log_m[1] < 0.0:
            raise ValueError("M_1 must be >= 1 (log_m[1] >= 0)")
        log_m.setflags(write=False)
        object.__setattr__(self, "log_m", log_m)
        if self.log_convex and log_m.size > 2:
            bad = _first_convexity_failure(log_m, 1, log_m.size - 2)
            if bad is not None:
                raise ValueError(f"{self.name}: table is not log-convex at k={bad}")

    @property
    def k_max(self) -> int:
        return self.log_m.size - 1

    @property
    def log_mu(self) -> np.ndarray:
        """``ln mu_k`` for all k, with ``-inf`` in slot 0."""
        out = np.empty_like(self.log_m)
        out[0] = -np.inf
        out[1:] = np.diff(self.log_m)
        return out

    @property
    def log_lambda(self) -> np.ndarray:
        """``ln Lambda_k`` for all k, with ``-inf`` in slot 0."""
        out = np.empty_like(self.log_m)
        out[0] = -np.inf
        k = np.arange(1, self.log_m.size)
        out[1:] = self.log_m[1:] / k
        return out

    def __repr__(self):
        return f"WeightSequence({self.name!r}, k_max={self.k_max}, params={self.params})"


@dataclass
class ConditionReport:
    condition: str
    holds: bool
    constant: float | None
    witness: int | None
    window: Window
    log_constant: float | None = None
    witness_log_ratio: float | None = None
    heuristic: bool = False
    tail_exponent: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "holds": self.holds,
            "constant": self.constant,
            "witness": self.witness,
            "window": list(self.window),
            "log_constant": self.log_constant,
            "witness_log_ratio": self.witness_log_ratio,
            "heuristic": self.heuristic,
            "tail_exponent": self.tail_exponent,
        }


# -- construction -----------------------------------------------------------

def _check_k_max(k_max: int) -> int:
    k_max = int(k_max)
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    return k_max


def _log_factorials(k_max: int) -> np.ndarray:
    return gammaln(np.arange(k_max + 1, dtype=float) + 1.0)


def make_gevrey(s: float, k_max: int = DEFAULT_K_MAX) -> WeightSequence:
    """Gevrey sequence ``M_k = (k!)^s``."""
    if not s >= 1:
        raise ValueError("Gevrey order s must satisfy s >= 1")
    k_max = _check_k_max(k_max)
    return WeightSequence(f"G^{s:g}", s * _log_factorials(k_max), {"s": s})


def make_log_family(s: float, sigma: float, k_max: int = DEFAULT_K_MAX) -> WeightSequence:
    """``M_k = (k!)^s (ln(k + e))^(sigma k)``."""
    if not s >= 1:
        raise ValueError("s must satisfy s >= 1")
    if not sigma >= 0:
        raise ValueError("sigma must satisfy sigma >= 0")
    k_max = _check_k_max(k_max)
    k = np.arange(k_max + 1, dtype=float)
    log_m = s * _log_factorials(k_max) + sigma * k * np.log(np.log(k + math.e))
    return WeightSequence(f"N^{{{s:g},{sigma:g}}}", log_m, {"s": s, "sigma": sigma})


def make_q_family(q: float, k_max: int = DEFAULT_K_MAX) -> WeightSequence:
    """``M_k = q^(k^2)``, a weight sequence which is not admissible."""
    if not q > 1:
        raise ValueError("q must satisfy q > 1")
    k_max = _check_k_max(k_max)
    k = np.arange(k_max + 1, dtype=float)
    return WeightSequence(f"L^{q:g}", k * k * math.log(q), {"q": q})


def from_table(name: str, log_m, log_convex: bool = False) -> WeightSequence:
    """Wrap a raw table of ``ln M_k``; log-convexity is not assumed."""
    return WeightSequence(name, np.asarray(log_m, dtype=float), {"table": True}, log_convex)


def sequence_from_spec(spec: dict[str, Any]) -> WeightSequence:
    """Build a sequence from a JSON-style spec.

    ``{"name", "family": gevrey|logfam|qfam|table, "params", "k_max"}``; the
    ``table`` family reads ``log_m`` directly.
    """
    family = spec.get("family")
    params = dict(spec.get("params") or {})
    k_max = int(spec.get("k_max", DEFAULT_K_MAX))
    if family == "gevrey":
        seq = make_gevrey(float(params["s"]), k_max)
    elif family == "logfam":
        seq = make_log_family(float(params["s"]), float(params["sigma"]), k_max)
    elif family == "qfam":
        seq = make_q_family(float(params["q"]), k_max)
    elif family == "table":
        seq = from_table(spec.get("name", "table"), spec["log_m"],
                         bool(spec.get("log_convex", False)))
    else:
        raise ValueError(f"unknown sequence family {family!r}")
    if "name" in spec and family != "table":
        seq = WeightSequence(spec["name"], seq.log_m, seq.params, seq.log_convex)
    return seq


def extend_sequence(seq: WeightSequence, k_max: int) -> WeightSequence | None:
    """Rebuild a built-in family on a longer table; ``None`` for raw tables."""
    p = seq.params
    if set(p) == {"s"}:
        out = make_gevrey(p["s"], k_max)
    elif set(p) == {"s", "sigma"}:
        out = make_log_family(p["s"], p["sigma"], k_max)
    elif set(p) == {"q"}:
        out = make_q_family(p["q"], k_max)
    else:
        return None
    return WeightSequence(seq.name, out.log_m, out.params, out.log_convex)


def load_sequence(path: str | Path) -> WeightSequence:
    with open(path, encoding="utf-8") as fh:
        return sequence_from_spec(json.load(fh))


def parse_sequence(text: str, k_max: int = DEFAULT_K_MAX) -> WeightSequence:
    """Parse a short form such as ``gevrey:2``, ``logfam:1,1`` or ``qfam:2``.

    A path to a JSON spec file is accepted as well.
    """
    if ":" not in text:
        return load_sequence(text)
    family, _, args = text.partition(":")
    values = [float(a) for a in args.split(",") if a.strip()]
    if family == "gevrey" and len(values) == 1:
        return make_gevrey(values[0], k_max)
    if family == "logfam" and len(values) == 2:
        return make_log_family(values[0], values[1], k_max)
    if family == "qfam" and len(values) == 1:
        return make_q_family(values[0], k_max)
    if family == "file":
        return load_sequence(args)
    raise ValueError(f"cannot parse sequence {text!r}")


# -- accessors --------------------------------------------------------------

def _check_index(seq: WeightSequence, k: int) -> int:
    k = int(k)
    if not 1 <= k <= seq.k_max:
        raise IndexError(f"index {k} outside [1, {seq.k_max}]")
    return k


def mu(seq: WeightSequence, k: int) -> float:
    """``ln mu_k = ln M_k - ln M_{k-1}``."""
    k = _check_index(seq, k)
    return float(seq.log_m[k] - seq.log_m[k - 1])


def lam(seq: WeightSequence, k: int) -> float:
    """``ln Lambda_k = (ln M_k) / k``."""
    k = _check_index(seq, k)
    return float(seq.log_m[k] / k)


# -- window tests -----------------------------------------------------------

def _window(seq: WeightSequence, window: Window | None, top: int) -> Window:
    if window is None:
        window = (1, top)
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    if lo < 1 or hi > top:
        raise IndexError(f"window [{lo}, {hi}] outside [1, {top}]")
    return lo, hi


@dataclass(frozen=True)
class TailTrend:
    bounded: bool
    exponent: float | None


def tail_trend(values: np.ndarray, tol: float = 1e-12) -> TailTrend:
    """Decide whether a log-ratio sequence looks bounded on a finite window.

    Bounded when the maximum sits before the tail, when the tail is
    non-increasing, or when the tail increments decay like ``k^-p`` with
    ``p >= SUMMABLE_EXPONENT`` (estimated from two adjacent tail segments).
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 3:
        return TailTrend(bool(n < 2 or values[-1] - values[-2] <= tol), None)
    t = max(1, int(n * TAIL_FRACTION))
    if 2 * t >= n:
        t = (n - 1) // 2
    scale = max(1.0, float(np.max(np.abs(values[-2 * t - 1:]))))
    if int(np.argmax(values)) < n - 1 - t:
        return TailTrend(True, None)
    rise_b = values[-1] - values[-1 - t]
    rise_a = values[-1 - t] - values[-1 - 2 * t]
    if rise_b <= tol * scale:
        return TailTrend(True, None)
    if rise_a <= 0:
        return TailTrend(False, None)
    mid_a = n - 1 - 1.5 * t
    mid_b = n - 1 - 0.5 * t
    # the offset keeps the estimate meaningful for windows starting at k = 1
    p = math.log(rise_a / rise_b) / math.log(mid_b / mid_a) if mid_a > 0 else 0.0
    return TailTrend(p >= SUMMABLE_EXPONENT, p)


def _first_convexity_failure(log_m: np.ndarray, lo: int, hi: int) -> int | None:
    k = np.arange(lo, hi + 1)
    lhs = 2.0 * log_m[k]
    rhs = log_m[k - 1] + log_m[k + 1]
    tol = LOG_TOL * np.maximum(1.0, np.abs(log_m[k]))
    bad = np.nonzero(lhs > rhs + tol)[0]
    return int(k[bad[0]]) if bad.size else None


def check_log_convex(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    lo, hi = _window(seq, window, seq.k_max - 1)
    witness = _first_convexity_failure(seq.log_m, lo, hi)
    return ConditionReport("log-convex", witness is None, None, witness, (lo, hi))


def _ratio_report(tag: str, log_ratio: np.ndarray, lo: int, floor: float = 1.0,
                  heuristic: bool = True) -> ConditionReport:
    trend = tail_trend(log_ratio)
    i = int(np.argmax(log_ratio))
    log_c = max(float(log_ratio[i]), math.log(floor))
    constant = math.exp(log_c) if log_c < 700 else None
    return ConditionReport(
        condition=tag,
        holds=trend.bounded,
        constant=constant,
        witness=None if trend.bounded else lo + i,
        window=(lo, lo + log_ratio.size - 1),
        log_constant=log_c,
        witness_log_ratio=None if trend.bounded else float(log_ratio[i]),
        heuristic=heuristic,
        tail_exponent=trend.exponent,
    )


def check_analytic_inclusion(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    """``k <= delta Lambda_k``; the constant is the fitted ``delta``."""
    lo, hi = _window(seq, window, seq.k_max)
    k = np.arange(lo, hi + 1)
    log_ratio = np.log(k) - seq.log_lambda[lo:hi + 1]
    return _ratio_report("analytic-inclusion", log_ratio, lo)


def check_moderate_growth(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    """Moderate growth through the equivalent form ``mu_k <= D Lambda_k``."""
    lo, hi = _window(seq, window, seq.k_max)
    log_ratio = seq.log_mu[lo:hi + 1] - seq.log_lambda[lo:hi + 1]
    return _ratio_report("moderate-growth", log_ratio, lo)


def check_deriv_closed(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    """``Lambda_{k+1} <= sigma Lambda_k``, sigma clamped to at least 1 + 1e-9."""
    lo, hi = _window(seq, window, seq.k_max - 1)
    ll = seq.log_lambda
    log_ratio = ll[lo + 1:hi + 2] - ll[lo:hi + 1]
    return _ratio_report("deriv-closed", log_ratio, lo, floor=1.0 + 1e-9)


def check_root_divergence(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    """Heuristic only: ``Lambda_k`` still grows over the last tenth of the window."""
    lo, hi = _window(seq, window, seq.k_max)
    t = max(1, int((hi - lo + 1) * TAIL_FRACTION))
    start = max(lo, hi - t)
    growth = float(seq.log_lambda[hi] - seq.log_lambda[start])
    holds = growth > 0
    return ConditionReport("root-divergence", holds, None, None if holds else hi, (lo, hi),
                           heuristic=True)


def is_admissible(seq: WeightSequence, window: Window | None = None) -> ConditionReport:
    ai = check_analytic_inclusion(seq, window)
    mg = check_moderate_growth(seq, window)
    holds = ai.holds and mg.holds
    witness = None if holds else (ai.witness if not ai.holds else mg.witness)
    return ConditionReport("admissible", holds, None, witness, ai.window, heuristic=True)


def admissibility_summary(seq: WeightSequence, window: Window | None = None) -> dict[str, Any]:
    """All condition reports for one sequence, as emitted by the CLI."""
    lo, hi = _window(seq, window, seq.k_max - 1)
    reports = [
        check_log_convex(seq, (lo, hi)),
        check_analytic_inclusion(seq, (lo, hi)),
        check_moderate_growth(seq, (lo, hi)),
        check_deriv_closed(seq, (lo, hi)),
        check_root_divergence(seq, (lo, hi)),
    ]
    adm = is_admissible(seq, (lo, hi))
    mg = reports[2]
    return {
        "sequence": seq.name,
        "params": dict(seq.params),
        "window": [lo, hi],
        "admissible": adm.holds,
        "derived_A": None if mg.constant is None else mg.constant / 2.0,
        "conditions": [r.to_dict() for r in reports],
    }


# -- comparison -------------------------------------------------------------

COMPARE_VERDICTS = (
    "m_precedes_n", "n_precedes_m", "equivalent",
    "strict_m_before_n", "strict_n_before_m", "undetermined",
)


@dataclass
class Comparison:
    verdict: str
    h: float
    log_h: float
    m_le_n: bool
    n_le_m: bool
    window: Window

    @property
    def C(self) -> float:
        return 1.0

    def to_dict(self) -> dict[str, Any]:
        return {"verdict": self.verdict, "h": self.h, "log_h": self.log_h, "C": self.C,
                "m_le_n": self.m_le_n, "n_le_m": self.n_le_m, "window": list(self.window)}


def compare(m: WeightSequence, n: WeightSequence, window: Window | None = None) -> Comparison:
    """Decide ``m <= n`` (``M_k <= C h^k N_k``) on a window.

    ``r_k = (M_k / N_k)^(1/k)``; ``h`` is the window sup of ``r_k`` so that
    ``C = 1`` works on the window.  Strictness is reported when the reverse
    ratio looks divergent.  There is no "divergent" state separate from "not
    bounded" in :func:`tail_trend`, so ``m_precedes_n`` and ``n_precedes_m``
    only occur for windows too short to test the reverse tail.
    """
    top = min(m.k_max, n.k_max)
    if window is not None and int(window[1]) > top:
        raise IndexError(f"window exceeds table size {top}")
    lo, hi = _window(m, window, top)
    k = np.arange(lo, hi + 1)
    log_r = (m.log_m[lo:hi + 1] - n.log_m[lo:hi + 1]) / k
    fwd = tail_trend(log_r)
    rev = tail_trend(-log_r)
    short = hi - lo + 1 < 3
    if fwd.bounded and rev.bounded:
        verdict = "equivalent"
    elif fwd.bounded:
        verdict = "m_precedes_n" if short else "strict_m_before_n"
    elif rev.bounded:
        verdict = "n_precedes_m" if short else "strict_n_before_m"
    else:
        verdict = "undetermined"
    log_h = float(np.max(log_r))
    return Comparison(verdict, math.exp(min(log_h, 700.0)), log_h, fwd.bounded, rev.bounded,
                      (lo, hi))
