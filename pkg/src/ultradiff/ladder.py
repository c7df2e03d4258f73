"""Geometric-band subsequences of the root sequence ``Lambda_k``.

For a base index ``k`` and ratio ``sigma > 1`` the ladder is ``k_0 = k`` and,
for ``j >= 1``, ``k_j`` the greatest ``m`` with
``sigma^(j-1) Lambda_k < Lambda_m <= sigma^j Lambda_k``.
All comparisons are made on ``ln Lambda``; values within ``MARGIN_TOL`` of a
band edge count as lying on it (closed upper edge, open lower edge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import WeightSequence, check_deriv_closed

MARGIN_TOL = 1e-10
SIGMA_INFLATION = 1.0 + 1e-6


class LadderError(ValueError):
    def __init__(self, message: str, band: int | None = None):
        super().__init__(message)
        self.band = band


@dataclass(frozen=True)
class Ladder:
    k: int
    sigma: float
    indices: tuple[int, ...]
    log_lambda: tuple[float, ...]
    truncated: bool
    j_limit: int  # bands that fit inside the table

    @property
    def log_sigma(self) -> float:
        return math.log(self.sigma)

    @property
    def J(self) -> int:
        return len(self.indices) - 1

    @property
    def log_base(self) -> float:
        return self.log_lambda[0]

    def band_edges(self, j: int) -> tuple[float, float]:
        """``(ln lower, ln upper)`` of band j; band 0 is ``[0, Lambda_k]``."""
        if j == 0:
            return -math.inf, self.log_base
        return (self.log_base + (j - 1) * self.log_sigma,
                self.log_base + j * self.log_sigma)

    def to_dict(self, margins=None):
        out = {"k": self.k, "sigma": self.sigma, "indices": list(self.indices)}
        if margins is not None:
            out["margins"] = [float(m) for m in margins]
        out["J"] = self.J
        out["truncated"] = self.truncated
        return out


def _lambda_table(seq: WeightSequence) -> np.ndarray:
    ll = seq.log_lambda
    if np.any(np.diff(ll[1:]) < 0):
        raise LadderError(f"{seq.name}: Lambda_k is not non-decreasing; "
                          "ladders need a log-convex table")
    return ll


def default_sigma(seq: WeightSequence) -> float:
    return check_deriv_closed(seq).constant * SIGMA_INFLATION


def build_ladder(seq: WeightSequence, k: int, sigma: float | None = None,
                 j_max: int | None = None) -> Ladder:
    """Construct the ladder by binary search on the non-decreasing Lambda table.

    Only bands whose upper edge lies strictly below ``Lambda_{k_max}`` are
    completed, since band maximality cannot be certified past the table.
    """
    ll = _lambda_table(seq)
    k = int(k)
    if not 1 <= k <= seq.k_max:
        raise IndexError(f"base index {k} outside [1, {seq.k_max}]")
    sigma = default_sigma(seq) if sigma is None else float(sigma)
    if not sigma > 1:
        raise ValueError("sigma must exceed 1")
    log_sigma = math.log(sigma)
    base = float(ll[k])
    top = float(ll[-1])
    j_limit = max(0, math.ceil((top - base) / log_sigma) - 1)
    while j_limit > 0 and not base + j_limit * log_sigma < top:
        j_limit -= 1
    while base + (j_limit + 1) * log_sigma < top:
        j_limit += 1
    target = j_limit if j_max is None else int(j_max)
    truncated = target > j_limit
    n_bands = min(target, j_limit)

    indices = [k]
    values = [base]
    body = ll[1:]
    for j in range(1, n_bands + 1):
        lower = base + (j - 1) * log_sigma
        upper = base + j * log_sigma
        m = int(np.searchsorted(body, upper + MARGIN_TOL, side="right"))
        if m < 1 or not ll[m] > lower + MARGIN_TOL:
            raise LadderError(
                f"band {j} of the ladder at k={k} is empty for sigma={sigma:.10g}; "
                "sigma is below the derivation-closedness constant on this stretch", band=j)
        indices.append(m)
        values.append(float(ll[m]))
    return Ladder(k, sigma, tuple(indices), tuple(values), truncated, j_limit)


@dataclass
class LadderVerification:
    margins: np.ndarray  # min slack per band, log domain
    lower: np.ndarray
    upper: np.ndarray

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())


def verify_ladder(ladder: Ladder, seq: WeightSequence) -> LadderVerification:
    """Recompute every band inequality from the sequence alone.

    Band 0 checks ``Lambda_{k_0} <= Lambda_k``.  Band ``j >= 1`` checks the two
    bounds ``sigma^(j-1) Lambda_k <= Lambda_{k_j} <= sigma^j Lambda_k`` to
    within ``MARGIN_TOL`` and, in addition, strict membership above the lower
    edge, which is how the candidate sets are defined.
    """
    ll = seq.log_lambda
    k = ladder.k
    if ladder.indices[0] != k:
        raise LadderError("k_0 differs from the base index", band=0)
    base = float(ll[k])
    log_sigma = math.log(ladder.sigma)
    lower = np.empty(len(ladder.indices))
    upper = np.empty(len(ladder.indices))
    for j, m in enumerate(ladder.indices):
        if not 1 <= m <= seq.k_max:
            raise LadderError(f"index {m} of band {j} outside the table", band=j)
        value = float(ll[m])
        if j == 0:
            lower[j] = math.inf
            upper[j] = base - value
        else:
            lower[j] = value - (base + (j - 1) * log_sigma)
            upper[j] = base + j * log_sigma - value
    margins = np.minimum(lower, upper)
    for j in range(len(margins)):
        if margins[j] < -MARGIN_TOL:
            raise LadderError(f"band {j} violated by {-margins[j]:.3e}", band=j)
        if j >= 1 and not lower[j] > MARGIN_TOL:
            raise LadderError(f"band {j}: Lambda_{{k_{j}}} sits on the lower edge, "
                              "outside the half-open band", band=j)
    return LadderVerification(margins, lower, upper)


def maximality_check(ladder: Ladder, seq: WeightSequence) -> bool:
    """True iff ``Lambda_{k_j + 1} > sigma^j Lambda_k`` for every band j >= 1."""
    ll = seq.log_lambda
    base = float(ll[ladder.k])
    log_sigma = math.log(ladder.sigma)
    for j, m in enumerate(ladder.indices[1:], start=1):
        if m + 1 > seq.k_max:
            return False
        if not ll[m + 1] > base + j * log_sigma + MARGIN_TOL:
            return False
    return True
