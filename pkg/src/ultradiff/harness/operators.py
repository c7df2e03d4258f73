"""Constant-coefficient and Hörmander-type test operators on the periodic grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..calculus.grid import GridFunction, frequencies, spectral_derivative

OPERATOR_NAMES = ("laplacian", "heat", "grushin_sin")
KERNEL_RTOL = 1e-10


class UnknownOperatorError(KeyError):
    pass


@dataclass(frozen=True)
class OperatorModel:
    name: str
    n: int
    N: int
    order: int
    description: str
    apply: Callable[[GridFunction], GridFunction]
    symbol: np.ndarray | None = None  # Fourier multiplier on the grid, FFT order
    pseudo_inverse: Callable[[GridFunction], GridFunction] | None = None

    def __call__(self, u: GridFunction) -> GridFunction:
        self._check(u)
        return self.apply(u)

    def solve(self, f: GridFunction) -> GridFunction:
        """``R f`` with ``P R f = f`` for f orthogonal to the symbol's zeros."""
        if self.pseudo_inverse is None:
            raise NotImplementedError(f"{self.name} carries no pseudo-inverse")
        self._check(f)
        return self.pseudo_inverse(f)

    def kernel(self) -> list[GridFunction]:
        """Grid modes annihilated by the operator."""
        if self.symbol is None:
            # sums of squares with bracket-generating fields: constants only
            return [GridFunction(spectrum=_unit_mode(self.N, self.n, (0,) * self.n))]
        zeros = np.argwhere(self.symbol == 0)
        return [GridFunction(spectrum=_unit_mode(self.N, self.n, tuple(z))) for z in zeros]

    def in_kernel(self, u: GridFunction, rtol: float = KERNEL_RTOL) -> bool:
        return self(u).l2_norm() <= rtol * max(u.l2_norm(), np.finfo(float).tiny)

    def _check(self, u: GridFunction) -> None:
        if (u.n, u.N) != (self.n, self.N):
            raise ValueError(f"{self.name} acts on {self.n}-D grids of size {self.N}, "
                             f"got {u.n}-D of size {u.N}")


def _unit_mode(N: int, n: int, index: tuple[int, ...]) -> np.ndarray:
    spec = np.zeros((N,) * n, dtype=complex)
    spec[index] = 1.0
    return spec


def _symbol_operator(name: str, n: int, N: int, order: int, description: str,
                     symbol: np.ndarray) -> OperatorModel:
    nonzero = symbol != 0
    inverse = np.zeros_like(symbol)
    inverse[nonzero] = 1.0 / symbol[nonzero]

    def apply(u: GridFunction) -> GridFunction:
        return GridFunction(spectrum=u.spectrum * symbol)

    def pseudo_inverse(f: GridFunction) -> GridFunction:
        return GridFunction(spectrum=f.spectrum * inverse)

    return OperatorModel(name, n, N, order, description, apply, symbol, pseudo_inverse)


def builtin_operator(name: str, N: int, n: int = 2) -> OperatorModel:
    """Look up one of ``laplacian``, ``heat`` or ``grushin_sin``.

    ``heat`` is ``d_t - d_x^2`` with t the second coordinate; ``grushin_sin``
    is ``d_x^2 + sin(x)^2 d_y^2`` and has no pseudo-inverse.
    """
    if N < 4 or N & (N - 1):
        raise ValueError("grid size must be a power of two >= 4")
    xi = frequencies(N).astype(complex)
    if name == "laplacian":
        if n not in (1, 2):
            raise ValueError("laplacian is available in dimension 1 or 2")
        sym = -xi ** 2 if n == 1 else -(xi[:, None] ** 2 + xi[None, :] ** 2)
        return _symbol_operator(name, n, N, 2, "sum of second derivatives, symbol -|xi|^2", sym)
    if name == "heat":
        if n != 2:
            raise ValueError("heat lives on the (x, t) torus, n = 2")
        sym = 1j * xi[None, :] + xi[:, None] ** 2
        return _symbol_operator(name, 2, N, 2, "d_t - d_x^2, symbol i xi_t + xi_x^2", sym)
    if name == "grushin_sin":
        if n != 2:
            raise ValueError("grushin_sin is defined on the 2-torus")
        weight = GridFunction.from_function(lambda a, b: np.sin(a) ** 2 + 0 * b, N, 2)

        def apply(u: GridFunction) -> GridFunction:
            return spectral_derivative(u, (2, 0)) + weight * spectral_derivative(u, (0, 2))

        return OperatorModel(name, 2, N, 2, "d_x^2 + sin(x)^2 d_y^2 (X1 = d_x, X2 = sin(x) d_y)",
                             apply)
    raise UnknownOperatorError(f"unknown operator {name!r}; choose from {', '.join(OPERATOR_NAMES)}")
