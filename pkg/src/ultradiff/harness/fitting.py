"""Empirical constants for the operator estimates.

``fit_theorem1`` measures ``||u||_{H^k(V)}`` against
``|||Pu|||_{U,k} + M_k ||u||_{L^2(U)}`` and ``fit_prop5`` measures
``||u||_{H^k(V)}`` against ``M_k ||u||_{L^2(U)}`` for kernel elements.
Both fit ``ratio <= C L^k`` under the geometric fitting contract.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..calculus.estimates import EstimateReport, Row, report_from_rows
from ..calculus.grid import (
    GridFunction,
    derivative_norms,
    log_triple_norm_from,
    random_band_limited,
    sobolev_norm_from,
)
from ..weights import WeightSequence
from .config import RunConfig
from .operators import OperatorModel


class KernelError(ValueError):
    """A supposed homogeneous solution is not annihilated by the operator."""


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _check_k(cfg: RunConfig, N: int) -> list[int]:
    ks = cfg.ks
    if ks[-1] > N // 4:
        raise ValueError(f"k up to {ks[-1]} beyond the derivative guard N/4 = {N // 4}")
    return ks


def solved_test_set(op: OperatorModel, cfg: RunConfig) -> list[GridFunction]:
    """``u = R f`` for random mean-zero band-limited f; manufactured u when R is missing."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.cases):
        f = random_band_limited(rng, op.N, op.n, band=cfg.band, mean_zero=True)
        out.append(op.solve(f) if op.pseudo_inverse is not None else f)
    return out


def fit_theorem1(op: OperatorModel, seq: WeightSequence, cfg: RunConfig,
                 test_set: Sequence[GridFunction]) -> EstimateReport:
    V, U = cfg.boxes()
    ks = _check_k(cfg, op.N)
    top = ks[-1]
    rows, skipped = [], 0
    for case, u in enumerate(test_set):
        if not np.any(u.spectrum):
            skipped += 1
            continue
        left_table = derivative_norms(u, top, V)
        pu_table = derivative_norms(op(u), top, U)
        log_u = _log(u.l2_norm(U))
        for k in ks:
            left = 0.5 * _log(float(np.sum(left_table.squares[:k + 1])))
            right = float(np.logaddexp(log_triple_norm_from(pu_table, seq, k),
                                       float(seq.log_m[k]) + log_u))
            rows.append(Row(k, left, right, case))
    notes = ["sampled evidence on the manufactured test set"]
    if skipped:
        notes.append(f"{skipped} zero inputs skipped")
    params = {"operator": op.name, "sequence": seq.name, "n": op.n, "N": op.N, "ks": ks,
              "V": V.to_dict(), "U": U.to_dict(), "cases": len(test_set)}
    return report_from_rows("theorem1", params, rows, "L", notes)


def fit_prop5(op: OperatorModel, seq: WeightSequence, cfg: RunConfig,
              kernel: Sequence[GridFunction] | None = None) -> EstimateReport:
    """Fit ``||u||_{H^k(V)} <= C h^k M_k ||u||_{L^2(U)}`` over kernel elements.

    Raises :class:`KernelError` if a supplied element has ``Pu != 0``.
    """
    V, U = cfg.boxes()
    ks = _check_k(cfg, op.N)
    elements = op.kernel() if kernel is None else list(kernel)
    params = {"operator": op.name, "sequence": seq.name, "n": op.n, "N": op.N, "ks": ks,
              "V": V.to_dict(), "U": U.to_dict()}
    if not elements:
        return EstimateReport("prop5", params, [], {"C": None, "h": None}, "inconclusive",
                              ["empty kernel, nothing to fit"])
    for i, u in enumerate(elements):
        if not op.in_kernel(u):
            raise KernelError(f"kernel element {i} is not annihilated by {op.name}")
    rows = []
    for case, u in enumerate(elements):
        table = derivative_norms(u, ks[-1], V)
        log_u = _log(u.l2_norm(U))
        for k in ks:
            rows.append(Row(k, _log(sobolev_norm_from(table, k)), float(seq.log_m[k]) + log_u, case))
    params["kernel_size"] = len(elements)
    return report_from_rows("prop5", params, rows, "h")
