"""Cutoff sequences ``chi_k`` equal to 1 on V, supported in U, with
``|D^alpha chi_k| <= (Q k)^|alpha|`` for ``|alpha| <= k``.

Construction: the indicator of the ``d/2``-enlargement of V is convolved k
times with a smooth bump of half-width ``d/(2k)``.  The convolutions are
discrete and circular, done by multiplying spectra, so the plateau and the
support are exact on the grid.  2-D families are tensor products of 1-D ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import TWO_PI, Box, GridFunction, frequencies

MIN_BUMP_CELLS = 4  # grid cells per bump half-width


class CutoffError(ValueError):
    pass


def _bump_spectrum(N: int, radius: float) -> np.ndarray:
    """DFT of the sampled bump ``exp(-1/(1 - (x/r)^2))``, normalized to unit sum."""
    idx = np.arange(N)
    offset = TWO_PI * np.minimum(idx, N - idx) / N
    z = offset / radius
    bump = np.zeros(N)
    inside = z < 1.0
    bump[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    bump /= bump.sum()
    # symmetric real kernel: the DFT is real up to rounding
    return np.fft.fft(bump).real


def _axis_cutoffs(N: int, v: tuple[float, float], d: float, k_top: int) -> list[np.ndarray]:
    x = TWO_PI * np.arange(N) / N
    a, b = v
    indicator = ((x >= a - d / 2) & (x <= b + d / 2)).astype(float)
    ind_hat = np.fft.fft(indicator)
    out = []
    for k in range(1, k_top + 1):
        phi_hat = _bump_spectrum(N, d / (2 * k))
        out.append(ind_hat * phi_hat ** k / N)  # normalized spectrum
    return out


@dataclass
class CutoffFamily:
    V: Box
    U: Box
    N: int
    d: float
    chis: list[GridFunction]
    Q: float
    derivative_sups: list[np.ndarray] = field(repr=False)  # per k, sup|D^alpha chi_k| per axis order

    @property
    def k_top(self) -> int:
        return len(self.chis)

    def chi(self, k: int) -> GridFunction:
        if not 1 <= k <= self.k_top:
            raise IndexError(f"cutoff index {k} outside [1, {self.k_top}]")
        return self.chis[k - 1]


def _axis_derivative_sups(spec: np.ndarray, N: int, top: int) -> np.ndarray:
    xi = frequencies(N)
    sups = np.empty(top + 1)
    for a in range(top + 1):
        sups[a] = np.max(np.abs(np.fft.ifft(spec * (1j * xi) ** a) * N))
    return sups


def make_cutoff_family(V: Box, U: Box, k_top: int, N: int, alpha_guard: int | None = None
                       ) -> CutoffFamily:
    """Build ``chi_1 .. chi_{k_top}`` and measure the derivative constant Q.

    Q is the smallest constant with ``sup|D^alpha chi_k| <= (Q k)^|alpha|`` over
    ``1 <= |alpha| <= min(k, alpha_guard)`` and all k of the family.
    """
    if V.n != U.n or V.n not in (1, 2):
        raise CutoffError("V and U must be boxes of the same dimension 1 or 2")
    if not U.contains(V):
        raise CutoffError("V must lie inside U")
    d = U.separation(V)
    if not d > 0:
        raise CutoffError("V must be strictly inside U (positive separation)")
    if N & (N - 1):
        raise CutoffError("grid size must be a power of two")
    dx = TWO_PI / N
    if d / (2 * k_top) < MIN_BUMP_CELLS * dx:
        raise CutoffError(
            f"bump half-width d/(2k) = {d / (2 * k_top):.4g} under {MIN_BUMP_CELLS} grid "
            f"cells at k_top={k_top}; raise N or lower k_top")
    guard = N // 4 if alpha_guard is None else min(alpha_guard, N // 4)

    axes = [_axis_cutoffs(N, (V.lo[i], V.hi[i]), d, k_top) for i in range(V.n)]
    chis, sups = [], []
    log_q = -math.inf
    for k in range(1, k_top + 1):
        specs = [ax[k - 1] for ax in axes]
        top = min(k, guard)
        axis_sups = [_axis_derivative_sups(s, N, top) for s in specs]
        if V.n == 1:
            chis.append(GridFunction(spectrum=specs[0]))
            table = axis_sups[0]
            for a in range(1, top + 1):
                log_q = max(log_q, math.log(table[a]) / a - math.log(k))
        else:
            chis.append(GridFunction(spectrum=specs[0][:, None] * specs[1][None, :]))
            table = np.outer(axis_sups[0], axis_sups[1])
            for a in range(top + 1):
                for b in range(top + 1 - a):
                    if a + b == 0:
                        continue
                    log_q = max(log_q, math.log(table[a, b]) / (a + b) - math.log(k))
        sups.append(table)
    return CutoffFamily(V, U, N, d, chis, math.exp(log_q), sups)


@dataclass
class CutoffCertificate:
    plateau_error: float
    outside_max: float
    min_value: float
    max_value: float
    bound_ratio: float  # max over k, alpha of sup|D^alpha chi_k| / (Q k)^|alpha|

    def ok(self, tol: float = 1e-8) -> bool:
        return (self.plateau_error <= tol and self.outside_max <= tol
                and self.min_value >= -tol and self.max_value <= 1 + tol
                and self.bound_ratio <= 1 + 1e-12)


def certify_cutoffs(family: CutoffFamily) -> CutoffCertificate:
    """Re-derive every family invariant from the samples and spectra."""
    N = family.N
    inside_v = family.V.mask(N)
    outside_u = ~family.U.mask(N)
    plateau = outside = 0.0
    lo, hi = math.inf, -math.inf
    worst = 0.0
    xi = frequencies(N)
    for k, chi in enumerate(family.chis, start=1):
        s = chi.samples
        plateau = max(plateau, float(np.max(np.abs(s[inside_v] - 1.0))))
        if outside_u.any():
            outside = max(outside, float(np.max(np.abs(s[outside_u]))))
        lo = min(lo, float(np.min(s.real)))
        hi = max(hi, float(np.max(s.real)))
        top = min(k, N // 4)
        for level in range(1, top + 1):
            for a in (range(level, level + 1) if chi.n == 1 else range(level + 1)):
                alpha = (a,) if chi.n == 1 else (a, level - a)
                mult = (1j * xi) ** alpha[0]
                if chi.n == 2:
                    mult = mult[:, None] * ((1j * xi) ** alpha[1])[None, :]
                sup = float(np.max(np.abs(np.fft.ifftn(chi.spectrum * mult) * N ** chi.n)))
                worst = max(worst, sup / (family.Q * k) ** level)
    return CutoffCertificate(plateau, outside, lo, hi, worst)
