"""Numerical checks of the Fourier-side inequalities and the geometric fits.

Every "there are constants C, gamma with ratio_k <= C gamma^k" claim is
turned into an :class:`EstimateReport`: per-k measured sides, a log-linear
least-squares fit, and a certified witness pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy.special import logsumexp

from ..assoc import OmegaTable
from ..ladder import Ladder, build_ladder
from ..weights import WeightSequence, extend_sequence
from .bands import band_decompose
from .cutoff import CutoffFamily
from .grid import (
    TWO_PI,
    Box,
    GridFunction,
    derivative_norms,
    log_g_norm,
    log_triple_norm_from,
)

RESIDUAL_LIMIT = 0.5  # log units
EQ19_RTOL = 1e-8
THETA_TAIL_RTOL = 1e-14
# a Theta sweep lengthens built-in tables by this factor, up to the cap, while
# the sup of Theta sits on the edge of the certified |xi| range
THETA_TABLE_GROWTH = 4
THETA_K_MAX_CAP = 6_400_000

VERDICTS = ("bounded-geometric", "violated", "inconclusive")


@dataclass
class Row:
    k: int
    log_left: float
    log_right: float
    case: int | None = None

    @property
    def skipped(self) -> bool:
        return self.log_left == -math.inf and self.log_right == -math.inf

    @property
    def log_ratio(self) -> float | None:
        if self.skipped:
            return None
        return self.log_left - self.log_right

    def to_dict(self) -> dict[str, Any]:
        ratio = self.log_ratio
        out = {
            "k": self.k,
            "left": _exp(self.log_left),
            "right": _exp(self.log_right),
            "ratio": None if ratio is None else _exp(ratio),
        }
        if self.case is not None:
            out["case"] = self.case
        return out


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


@dataclass
class GeometricFit:
    C: float  # certified: every ratio_k <= C rate^k on the window
    rate: float
    C_fit: float
    max_residual: float
    tail_residual: float  # largest residual over the upper half of the window
    concave: bool

    @property
    def bounded(self) -> bool:
        return self.tail_residual < RESIDUAL_LIMIT or self.concave


def fit_geometric(ks, log_ratios) -> GeometricFit | None:
    """Least squares of ``ln ratio`` on k, certified against every point.

    Rows sharing a k are reduced to their maximum first, since the bound has
    to hold for every case.  The certified ``C`` absorbs the largest positive
    residual.  The fit counts as geometric when the residuals over the upper
    half of the window stay below ``RESIDUAL_LIMIT``: excess at small k only
    inflates ``C``, while excess at large k is what faster-than-geometric
    growth looks like.  Concave log-ratio sequences stay under every tangent
    line and are accepted outright.
    """
    ks = np.asarray(ks, dtype=float)
    y = np.asarray(log_ratios, dtype=float)
    keep = np.isfinite(y)
    ks, y = ks[keep], y[keep]
    if ks.size == 0:
        return None
    uk = np.unique(ks)
    env = np.array([y[ks == k].max() for k in uk])
    if uk.size == 1:
        top = float(env[0])
        return GeometricFit(_exp(top), 1.0, _exp(top), 0.0, 0.0, True)
    slope, intercept = np.polyfit(uk, env, 1)
    resid = env - (intercept + slope * uk)
    max_res = float(resid.max())
    tail_res = float(resid[uk >= np.median(uk)].max())
    second = np.diff(env, 2)
    concave = bool(uk.size < 3 or np.all(second <= 1e-9 * np.maximum(1.0, np.abs(env[1:-1]))))
    return GeometricFit(
        C=_exp(intercept + max(0.0, max_res)),
        rate=math.exp(slope),
        C_fit=_exp(intercept),
        max_residual=max_res,
        tail_residual=tail_res,
        concave=concave,
    )


@dataclass
class EstimateReport:
    tag: str
    params: dict[str, Any]
    rows: list[Row]
    fit: dict[str, Any]
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "params": self.params,
            "rows": [r.to_dict() for r in self.rows],
            "fit": self.fit,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    def log_ratios(self) -> tuple[np.ndarray, np.ndarray]:
        live = [r for r in self.rows if not r.skipped]
        return (np.array([r.k for r in live]), np.array([r.log_ratio for r in live]))


def report_from_rows(tag: str, params: dict, rows: list[Row], rate_name: str,
                     notes: list[str] | None = None) -> EstimateReport:
    """Fit ``ratio <= C rate^k`` over the rows and attach the verdict."""
    ks, lr = (np.array([r.k for r in rows if not r.skipped]),
              np.array([r.log_ratio for r in rows if not r.skipped]))
    notes = list(notes or [])
    if any(r.skipped for r in rows):
        notes.append("degenerate rows (0/0) skipped")
    fit = fit_geometric(ks, lr)
    if fit is None:
        return EstimateReport(tag, params, rows, {"C": None, rate_name: None}, "inconclusive",
                              notes + ["no live rows to fit"])
    fit_d = {"C": fit.C, rate_name: fit.rate, "C_fit": fit.C_fit,
             "max_residual": fit.max_residual, "tail_residual": fit.tail_residual,
             "concave": fit.concave}
    verdict = "bounded-geometric" if fit.bounded else "inconclusive"
    return EstimateReport(tag, params, rows, fit_d, verdict, notes)


def _ks(k_range) -> list[int]:
    if isinstance(k_range, int):
        return [k_range]
    return [int(k) for k in k_range]


# -- the Fourier-weight estimate ---------------------------------------------

def eq19_log_sides(u: GridFunction, seq: WeightSequence, k: int, table=None) -> tuple[float, float]:
    """``ln int (Lambda_k + |xi|)^(2k) |u_hat|^2`` and ``ln 4^k |||u|||^2``."""
    table = table if table is not None else derivative_norms(u, k)
    spec = u.spectrum
    occupied = spec != 0
    if not occupied.any():
        return -math.inf, -math.inf
    lam = math.exp(seq.log_m[k] / k) if k > 0 else 0.0
    terms = 2 * k * np.log(lam + u.xi_abs[occupied]) + 2 * np.log(np.abs(spec[occupied]))
    left = float(logsumexp(terms)) + u.n * math.log(TWO_PI)
    right = k * math.log(4.0) + 2 * log_triple_norm_from(table, seq, k)
    return left, right


def check_eq19(u: GridFunction, seq: WeightSequence, k_range) -> EstimateReport:
    """Fixed-constant check; ``violated`` iff left > right (1 + 1e-8) somewhere."""
    ks = _ks(k_range)
    table = derivative_norms(u, max(ks))
    rows = [Row(k, *eq19_log_sides(u, seq, k, table)) for k in ks]
    bad = [r.k for r in rows if not r.skipped and r.log_ratio > math.log1p(EQ19_RTOL)]
    verdict = "violated" if bad else "bounded-geometric"
    notes = [f"violated at k={bad}"] if bad else []
    return EstimateReport("eq19", {"sequence": seq.name, "ks": ks}, rows,
                          {"C": 1.0, "gamma": 4.0}, verdict, notes)


# -- norm comparison between two weight sequences ---------------------------

CHAIN_RTOL = 1e-12


def check_norm_chain(us: Iterable[GridFunction], m: WeightSequence, n: WeightSequence,
                     k_range, C: float, h: float, domain: Box | None = None) -> EstimateReport:
    """``|||u|||_{m,k} <= C h^k |||u|||_{n,k}`` for every u and k, fixed (C, h).

    ``h`` below 1 is raised to 1: the lower-order terms carry ``Lambda_k^(k-|alpha|)``
    with fewer than k factors, so only ``h >= 1`` makes the bound termwise.
    """
    ks = _ks(k_range)
    h_eff = max(1.0, h)
    rows, bad = [], []
    for case, u in enumerate(us):
        table = derivative_norms(u, max(ks), domain)
        for k in ks:
            row = Row(k, log_triple_norm_from(table, m, k), log_triple_norm_from(table, n, k), case)
            rows.append(row)
            if not row.skipped and row.log_ratio > math.log(C) + k * math.log(h_eff) + CHAIN_RTOL:
                bad.append((case, k))
    params = {"m": m.name, "n": n.name, "ks": ks, "C": C, "h": h_eff}
    notes = [f"{len(bad)} violations, first at (case, k) = {bad[0]}"] if bad else []
    return EstimateReport("corollary1", params, rows, {"C": C, "h": h_eff},
                          "violated" if bad else "bounded-geometric", notes)


# -- cutoff comparison --------------------------------------------------------

def check_lemma4(u: GridFunction, family: CutoffFamily, seq: WeightSequence,
                 k_range) -> EstimateReport:
    """Per-k ratio ``|||chi_k u|||_{full,k} / |||u|||_{U,k}`` and fitted gamma."""
    ks = _ks(k_range)
    if max(ks) > family.k_top:
        raise ValueError(f"k up to {max(ks)} requested, family stops at {family.k_top}")
    den_table = derivative_norms(u, max(ks), family.U)
    rows = []
    for k in ks:
        cu = family.chi(k) * u
        num = log_triple_norm_from(derivative_norms(cu, k), seq, k)
        den = log_triple_norm_from(den_table, seq, k)
        rows.append(Row(k, num, den))
    params = {"sequence": seq.name, "ks": ks, "N": u.N, "Q": family.Q,
              "V": family.V.to_dict(), "U": family.U.to_dict()}
    return report_from_rows("lemma4", params, rows, "gamma")


# -- band decomposition estimate ----------------------------------------------

def lemma6_log_sides(u: GridFunction, seq: WeightSequence, k: int, ladder: Ladder,
                     omega: OmegaTable, table=None) -> tuple[float, float, bool]:
    """Both sides of the band-decomposition bound, plus a coverage flag."""
    dec = band_decompose(u, ladder)
    terms = []
    for j, part in enumerate(dec.parts):
        l2 = part.l2_norm()
        if l2 == 0:
            continue
        log_lam = ladder.log_lambda[j]
        w = float(omega.omega_log(log_lam))
        inner = np.logaddexp(2 * math.log(l2), -2 * w + 2 * log_g_norm(part, omega))
        terms.append(2 * k * log_lam + inner)
    left = float(logsumexp(terms)) if terms else -math.inf
    table = table if table is not None else derivative_norms(u, k)
    right = 2 * log_triple_norm_from(table, seq, k)
    return left, right, dec.covered


def check_lemma6(u: GridFunction, seq: WeightSequence, k: int, ladder: Ladder,
                 omega: OmegaTable) -> EstimateReport:
    left, right, covered = lemma6_log_sides(u, seq, k, ladder, omega)
    notes = [] if covered else ["spectrum beyond the last ladder rung left out of the sum"]
    return report_from_rows("lemma6", {"sequence": seq.name, "k": k, "ladder": list(ladder.indices)},
                            [Row(k, left, right)], "gamma", notes)


def sweep_lemma6(us: Iterable[GridFunction], seq: WeightSequence, k_range, omega: OmegaTable,
                 sigma: float | None = None) -> EstimateReport:
    """Lemma-6 sides over a k-sweep with one ladder per k, fit ``C gamma^k``."""
    ks = _ks(k_range)
    ladders = {k: build_ladder(seq, k, sigma) for k in ks}
    rows, notes = [], []
    for case, u in enumerate(us):
        table = derivative_norms(u, max(ks))
        for k in ks:
            left, right, covered = lemma6_log_sides(u, seq, k, ladders[k], omega, table)
            if not covered:
                notes.append(f"case {case}, k={k}: spectrum beyond the last rung")
            rows.append(Row(k, left, right, case))
    params = {"sequence": seq.name, "ks": ks, "sigma": ladders[ks[0]].sigma}
    return report_from_rows("lemma6", params, rows, "gamma", notes)


# -- theta / Psi / Theta --------------------------------------------------------

def log_theta(j: int, xi_abs, ladder: Ladder, omega: OmegaTable, gamma: float,
              variant: str = "omega_exponent") -> np.ndarray:
    """``ln theta(j, xi)``; the damping exponent is ``omega(Lambda_{k_j})`` or ``Lambda_{k_j}``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not 0 <= j <= ladder.J:
        raise IndexError(f"band {j} is not a completed band")
    log_lam = ladder.log_lambda[j]
    kj = ladder.indices[j]
    if variant == "omega_exponent":
        damp = float(omega.omega_log(log_lam))
    elif variant == "lambda_exponent":
        damp = math.exp(log_lam)
    else:
        raise ValueError(f"unknown theta variant {variant!r}")
    xi = np.asarray(xi_abs, dtype=float)
    with np.errstate(divide="ignore"):
        return -damp + kj * (np.log(xi) - math.log(gamma) - log_lam)


def theta_weight(j: int, xi_abs, ladder: Ladder, omega: OmegaTable, gamma: float,
                 variant: str = "omega_exponent"):
    out = np.exp(log_theta(j, xi_abs, ladder, omega, gamma, variant))
    return float(out) if np.ndim(out) == 0 else out


def log_psi(j: int, xi_abs, k: int, ladder: Ladder, omega: OmegaTable, gamma: float,
            variant: str = "omega_exponent") -> np.ndarray:
    """``ln Psi_j = 2k ln(|xi| / Lambda_{k_j}) - 2 ln(1 + theta)``."""
    xi = np.asarray(xi_abs, dtype=float)
    lt = log_theta(j, xi, ladder, omega, gamma, variant)
    with np.errstate(divide="ignore"):
        return 2 * k * (np.log(xi) - ladder.log_lambda[j]) - 2 * np.logaddexp(0.0, lt)


@dataclass
class ThetaResult:
    k: int
    log_theta_max: float  # over the certified part of the grid; nan if none
    xi_at_max: float
    tail_rtol: float  # worst bound on dropped rungs relative to Theta, certified points
    certified_top: float  # largest |xi| whose dropped-rung tail is negligible
    max_at_edge: bool  # the sup sits on the certified boundary and may lie beyond it
    log_theta: np.ndarray

    @property
    def log_c(self) -> float:
        return self.log_theta_max / (self.k + 1)


def default_xi_grid(ladder: Ladder, k: int, points: int = 4000) -> np.ndarray:
    """``0`` plus log-spaced |xi| from ``Lambda_k / 100`` to the last completed rung."""
    log_lo = ladder.log_base - math.log(100.0)
    log_top = max(ladder.log_lambda[-1], log_lo + 1.0)
    return np.concatenate([[0.0], np.exp(np.linspace(log_lo, log_top, points))])


def theta_profile(ladder: Ladder, omega: OmegaTable, k: int, gamma: float, xi_grid,
                  variant: str = "omega_exponent") -> ThetaResult:
    """Evaluate Theta on a grid and keep the points where the missing rungs are negligible.

    Rungs past J satisfy ``Lambda_{k_j} >= sigma^(j-1) Lambda_k``, so together
    they add at most ``(|xi| / (sigma^J Lambda_k))^(2k) / (1 - sigma^(-2k))``.
    """
    xi = np.asarray(xi_grid, dtype=float)
    logs = np.stack([log_psi(j, xi, k, ladder, omega, gamma, variant) for j in range(ladder.J + 1)])
    log_big = logsumexp(logs, axis=0)
    with np.errstate(divide="ignore"):
        log_tail = (2 * k * (np.log(xi) - ladder.log_base - ladder.J * ladder.log_sigma)
                    - math.log1p(-math.exp(-2 * k * ladder.log_sigma)))
    zero = ~np.isfinite(log_big) & ~np.isfinite(log_tail)  # xi = 0: both vanish
    with np.errstate(invalid="ignore"):
        rel = np.where(zero, -np.inf, log_tail - log_big)
    certified = rel <= math.log(THETA_TAIL_RTOL)
    if not np.any(certified & np.isfinite(log_big)):
        return ThetaResult(k, math.nan, math.nan, math.inf, 0.0, True, log_big)
    masked = np.where(certified, log_big, -np.inf)
    i = int(np.argmax(masked))
    idx = np.flatnonzero(certified)
    last = int(idx[-1])
    edge = i == last and last < xi.size - 1
    tail = float(np.exp(np.max(rel[certified])))
    return ThetaResult(k, float(log_big[i]), float(xi[i]), tail, float(xi[last]), bool(edge), log_big)


def check_theta_bound(ladder: Ladder, seq: WeightSequence, omega: OmegaTable, k: int,
                      gamma: float, xi_grid=None, variant: str = "omega_exponent") -> ThetaResult:
    """``Theta(xi) = sum_j Psi_j(xi)`` over completed rungs on an |xi| grid.

    Needs ``k <= k_0``: for larger k the first term grows like
    ``|xi|^(2(k - k_0))`` and Theta is unbounded.
    """
    if k > ladder.indices[0]:
        raise ValueError(f"k={k} exceeds the ladder base k_0={ladder.indices[0]}; "
                         "Theta is unbounded in |xi|")
    xi_grid = default_xi_grid(ladder, k) if xi_grid is None else xi_grid
    return theta_profile(ladder, omega, k, gamma, xi_grid, variant)


def sweep_theta(seq: WeightSequence, omega: OmegaTable, k_range, gamma: float,
                sigma: float | None = None, variant: str = "omega_exponent") -> EstimateReport:
    """Fit ``sup Theta <= C^(k+1)`` over a k-sweep, one ladder with ``k_0 = k`` per k.

    ``ln sup Theta`` is fitted as a geometric sequence ``C' rate^k`` under the
    usual contract; the reported ``C = max(C', rate)`` then gives
    ``C' rate^k <= C^(k+1)``.  ``log_C_per_k`` lists ``ln sup Theta / (k+1)``
    and ``log_C_monotone`` whether it is non-increasing.
    """
    ks = _ks(k_range)
    results = []
    tables = {seq.k_max: (seq, omega)}
    for k in ks:
        cur, om = seq, omega
        while True:
            ladder = build_ladder(cur, k, sigma)
            res = check_theta_bound(ladder, cur, om, k, gamma, variant=variant)
            grow = cur.k_max * THETA_TABLE_GROWTH
            if not res.max_at_edge or grow > THETA_K_MAX_CAP:
                break
            if grow not in tables:
                longer = extend_sequence(seq, grow)
                if longer is None:
                    break
                tables[grow] = (longer, OmegaTable.build(longer))
            cur, om = tables[grow]
        results.append(res)
    notes = []
    uncertain = [r.k for r in results if r.max_at_edge]
    if uncertain:
        notes.append(f"sup of Theta not reached inside the certified |xi| range for k={uncertain}")
    live = [r for r in results if math.isfinite(r.log_theta_max)]
    rows = [Row(r.k, r.log_theta_max, 0.0) for r in live]
    log_c = np.array([r.log_c for r in live])
    monotone = bool(np.all(np.diff(log_c) <= 1e-12))
    if not monotone:
        notes.append("ln sup Theta / (k+1) increases somewhere in the sweep")
    fit = fit_geometric([r.k for r in live], [r.log_theta_max for r in live])
    if fit is None:
        return EstimateReport("theta", {"sequence": seq.name, "ks": ks, "gamma": gamma},
                              [], {"C": None, "rate": None}, "inconclusive", notes)
    verdict = "bounded-geometric" if fit.bounded and not uncertain else "inconclusive"
    fit_d = {"C": max(fit.C, fit.rate), "C_fit": fit.C, "rate": fit.rate,
             "max_residual": fit.max_residual, "tail_residual": fit.tail_residual,
             "concave": fit.concave, "log_C_per_k": [float(v) for v in log_c],
             "log_C_monotone": monotone, "xi_at_max": [r.xi_at_max for r in live],
             "certified_xi_top": [r.certified_top for r in live],
             "tail_rtol": max(r.tail_rtol for r in live)}
    params = {"sequence": seq.name, "ks": ks, "gamma": gamma, "variant": variant,
              "sigma": build_ladder(seq, ks[0], sigma).sigma}
    return EstimateReport("theta", params, rows, fit_d, verdict, notes)


__all__ = [
    "Row", "EstimateReport", "GeometricFit", "fit_geometric", "report_from_rows",
    "check_eq19", "eq19_log_sides", "check_norm_chain", "check_lemma4", "check_lemma6", "lemma6_log_sides",
    "sweep_lemma6", "theta_weight", "log_theta", "log_psi", "check_theta_bound",
    "theta_profile", "sweep_theta", "default_xi_grid", "ThetaResult",
]
