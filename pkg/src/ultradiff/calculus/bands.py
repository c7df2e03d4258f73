"""Frequency-band decomposition along a ladder.

Bands are ``[0, Lambda_{k_0}]`` and ``(Lambda_{k_{j-1}}, Lambda_{k_j}]`` for
``j >= 1``, which partition the frequency lattice, so the pieces sum back to
``u`` exactly and Parseval splits over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..ladder import Ladder
from .grid import GridFunction


@dataclass
class BandDecomposition:
    parts: list[GridFunction]
    log_edges: list[float]  # upper edge ln Lambda_{k_j} of each ladder band
    residual: GridFunction | None  # modes above the last rung, if any

    @property
    def covered(self) -> bool:
        return self.residual is None

    def band_norms(self) -> list[float]:
        return [p.l2_norm() for p in self.parts]


def band_index(xi_abs: np.ndarray, log_edges) -> np.ndarray:
    """Band of each |xi|; ``len(log_edges)`` marks the residual band."""
    with np.errstate(divide="ignore"):
        log_xi = np.log(xi_abs)
    return np.searchsorted(np.asarray(log_edges), log_xi, side="left")


def band_decompose(u: GridFunction, ladder: Ladder) -> BandDecomposition:
    spec = u.spectrum
    edges = list(ladder.log_lambda)
    which = band_index(u.xi_abs, edges)
    parts = []
    for j in range(len(edges)):
        parts.append(GridFunction(spectrum=np.where(which == j, spec, 0.0)))
    beyond = (which == len(edges)) & (spec != 0)
    residual = GridFunction(spectrum=np.where(beyond, spec, 0.0)) if beyond.any() else None
    return BandDecomposition(parts, edges, residual)


def band_of(xi_abs: float, ladder: Ladder) -> int:
    if xi_abs == 0:
        return 0
    return int(np.searchsorted(np.asarray(ladder.log_lambda), math.log(xi_abs), side="left"))
