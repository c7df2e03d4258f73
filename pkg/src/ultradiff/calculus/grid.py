"""Band-limited functions on the periodic box ``[0, 2 pi)^n`` and their norms.

Spectra use the normalization ``u(x) = sum_xi c_xi exp(i xi x)``, so that

    ||u||_{L^2(box)}^2 = (2 pi)^n sum_xi |c_xi|^2
                       = (2 pi / N)^n sum_x |u(x)|^2.

Norms over a sub-box are sample sums over the grid points inside the box.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from ..weights import WeightSequence

TWO_PI = 2.0 * math.pi
SPARSE_PRODUCT_MODES = 256  # products with a factor this sparse are convolved exactly
CHOP_RTOL = 1e-13  # spectral floor for sampled inputs, relative to the largest mode


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box inside the periodic cell."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("box corners differ in dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box must have positive extent")
        if any(a < 0 or b > TWO_PI for a, b in zip(lo, hi)):
            raise ValueError("box must lie inside [0, 2 pi]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, a: float, b: float, n: int) -> "Box":
        return cls((a,) * n, (b,) * n)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def contains(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def separation(self, inner: "Box") -> float:
        """Smallest gap between ``inner`` and the boundary of this box."""
        gaps = [c - a for a, c in zip(self.lo, inner.lo)] + [b - d for b, d in zip(self.hi, inner.hi)]
        return min(gaps)

    def mask(self, N: int) -> np.ndarray:
        x = TWO_PI * np.arange(N) / N
        axes = [(x >= a - 1e-12) & (x <= b + 1e-12) for a, b in zip(self.lo, self.hi)]
        out = axes[0]
        for ax in axes[1:]:
            out = out[:, None] & ax[None, :]
        return out

    def to_dict(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


def frequencies(N: int) -> np.ndarray:
    """Integer frequencies in FFT order, spanning ``[-N/2, N/2)``."""
    return np.fft.fftfreq(N, d=1.0 / N)


class GridFunction:
    """Complex samples on a uniform ``N^n`` grid with a cached spectrum."""

    def __init__(self, samples=None, *, spectrum=None):
        if (samples is None) == (spectrum is None):
            raise ValueError("give exactly one of samples or spectrum")
        arr = np.asarray(samples if spectrum is None else spectrum, dtype=complex)
        if arr.ndim not in (1, 2) or len(set(arr.shape)) != 1:
            raise ValueError("expected a 1-D or square 2-D array")
        N = arr.shape[0]
        if N < 4 or N & (N - 1):
            raise ValueError("grid size must be a power of two >= 4")
        self.n = arr.ndim
        self.N = N
        if spectrum is None:
            self._samples = arr.copy()
            self._spectrum = None
        else:
            self._spectrum = arr.copy()
            self._samples = None

    @classmethod
    def from_function(cls, func, N: int, n: int = 1, chop: float = CHOP_RTOL) -> "GridFunction":
        """Sample ``func`` and zero spectral modes below ``chop`` times the largest.

        Rounding noise sits at every frequency and high derivatives amplify it
        by ``|xi|^k``; chopping keeps trigonometric polynomials exactly band-limited.
        """
        spec = np.fft.fftn(np.asarray(func(*grid_coordinates(N, n)), dtype=complex)) / N ** n
        if chop > 0:
            spec[np.abs(spec) < chop * np.max(np.abs(spec), initial=0.0)] = 0.0
        return cls(spectrum=spec)

    @classmethod
    def from_modes(cls, modes: dict, N: int, n: int = 1) -> "GridFunction":
        """Trigonometric polynomial ``sum c_xi exp(i xi x)`` from ``{xi: c_xi}``."""
        spec = np.zeros((N,) * n, dtype=complex)
        for xi, c in modes.items():
            xi = (xi,) if np.ndim(xi) == 0 else tuple(xi)
            if len(xi) != n or any(not -N // 2 <= x < N // 2 for x in xi):
                raise ValueError(f"frequency {xi} outside the grid")
            spec[tuple(x % N for x in xi)] += c
        return cls(spectrum=spec)

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            self._samples = np.fft.ifftn(self._spectrum) * self.N ** self.n
        return self._samples

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = np.fft.fftn(self._samples) / self.N ** self.n
        return self._spectrum

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return frequency_magnitude(self.N, self.n)

    @property
    def cell(self) -> float:
        return (TWO_PI / self.N) ** self.n

    def _like(self, other: "GridFunction"):
        if (other.n, other.N) != (self.n, self.N):
            raise ValueError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._like(other)
        return GridFunction(spectrum=self.spectrum + other.spectrum)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._like(other)
        return GridFunction(spectrum=self.spectrum - other.spectrum)

    def __mul__(self, other) -> "GridFunction":
        if isinstance(other, GridFunction):
            self._like(other)
            return GridFunction(spectrum=_product_spectrum(self, other))
        return GridFunction(spectrum=self.spectrum * other)

    __rmul__ = __mul__

    def l2_norm(self, domain: Box | None = None) -> float:
        if domain is None:
            return math.sqrt(TWO_PI ** self.n * float(np.sum(np.abs(self.spectrum) ** 2)))
        mask = domain.mask(self.N)
        return math.sqrt(self.cell * float(np.sum(np.abs(self.samples[mask]) ** 2)))

    def grid_l2_norm(self) -> float:
        return math.sqrt(self.cell * float(np.sum(np.abs(self.samples) ** 2)))

    def sup_norm(self, domain: Box | None = None) -> float:
        vals = self.samples if domain is None else self.samples[domain.mask(self.N)]
        return float(np.max(np.abs(vals)))

    def max_occupied_frequency(self) -> float:
        occupied = self.spectrum != 0
        return float(self.xi_abs[occupied].max()) if occupied.any() else 0.0

    # -- serialization --------------------------------------------------

    def to_json_spectrum(self, tol: float = 0.0) -> dict:
        xi = frequencies(self.N).astype(int)
        modes = []
        for idx in zip(*np.nonzero(np.abs(self.spectrum) > tol)):
            c = self.spectrum[idx]
            key = [int(xi[i]) for i in idx]
            modes.append({"xi": key[0] if self.n == 1 else key,
                          "re": float(c.real), "im": float(c.imag)})
        return {"n": self.n, "N": self.N, "modes": modes}

    @classmethod
    def from_json_spectrum(cls, data: dict) -> "GridFunction":
        n, N = int(data["n"]), int(data["N"])
        spec = np.zeros((N,) * n, dtype=complex)
        for mode in data["modes"]:
            xi = np.atleast_1d(mode["xi"]).astype(int)
            if xi.size != n or np.any(xi < -N // 2) or np.any(xi >= N // 2):
                raise ValueError(f"mode {mode['xi']} not representable on N={N}")
            spec[tuple(xi % N)] += complex(mode["re"], mode["im"])
        return cls(spectrum=spec)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "re", "im"] if self.n == 2 else ["i", "re", "im"])
            for idx in np.ndindex(self.samples.shape):
                v = self.samples[idx]
                w.writerow([*idx, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "GridFunction":
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        n = 2 if rows and "j" in rows[0] else 1
        N = round(len(rows) ** (1.0 / n))
        arr = np.zeros((N,) * n, dtype=complex)
        for r in rows:
            idx = (int(r["i"]), int(r["j"])) if n == 2 else (int(r["i"]),)
            arr[idx] = complex(float(r["re"]), float(r["im"]))
        return cls(arr)


def _product_spectrum(a: GridFunction, b: GridFunction) -> np.ndarray:
    """Spectrum of the pointwise product.

    When one factor has few occupied modes the circular convolution is summed
    directly, which keeps the relative accuracy of the dense factor's tail.
    Going through samples would leave an absolute noise floor at every mode.
    """
    sparse, dense = (a, b) if np.count_nonzero(a.spectrum) <= np.count_nonzero(b.spectrum) else (b, a)
    occupied = np.argwhere(sparse.spectrum != 0)
    if len(occupied) > SPARSE_PRODUCT_MODES:
        return np.fft.fftn(a.samples * b.samples) / a.N ** a.n
    out = np.zeros_like(dense.spectrum)
    axes = tuple(range(a.n))
    for idx in occupied:
        out += sparse.spectrum[tuple(idx)] * np.roll(dense.spectrum, tuple(idx), axis=axes)
    return out


def grid_coordinates(N: int, n: int = 1):
    x = TWO_PI * np.arange(N) / N
    if n == 1:
        return (x,)
    return tuple(np.meshgrid(*([x] * n), indexing="ij"))


def frequency_magnitude(N: int, n: int) -> np.ndarray:
    xi = frequencies(N)
    if n == 1:
        return np.abs(xi)
    return np.sqrt(xi[:, None] ** 2 + xi[None, :] ** 2)


def random_band_limited(rng: np.random.Generator, N: int, n: int = 1, band: int = 16,
                        mean_zero: bool = False, decay: float = 0.0) -> GridFunction:
    """Random complex Gaussian spectrum on ``|xi|_inf <= band``.

    ``decay`` damps mode amplitudes by ``(1 + |xi|)^-decay``.
    """
    if band > N // 4:
        raise ValueError("band must stay below N/4")
    xi_abs = frequency_magnitude(N, n)
    cheb = np.abs(frequencies(N))
    if n == 2:
        cheb = np.maximum(cheb[:, None], cheb[None, :])
    shape = (N,) * n
    spec = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec *= (1.0 + xi_abs) ** (-decay)
    spec[cheb > band] = 0.0
    if mean_zero:
        spec[(0,) * n] = 0.0
    return GridFunction(spectrum=spec)


# -- derivatives ------------------------------------------------------------

def _alpha(alpha, n: int) -> tuple[int, ...]:
    a = tuple(int(v) for v in np.atleast_1d(alpha))
    if len(a) != n or any(v < 0 for v in a):
        raise ValueError(f"multi-index {alpha} does not fit dimension {n}")
    return a


def derivative_multiplier(N: int, alpha: tuple[int, ...]) -> np.ndarray:
    xi = frequencies(N)
    factors = [(1j * xi) ** a for a in alpha]
    if len(alpha) == 1:
        return factors[0]
    return factors[0][:, None] * factors[1][None, :]


def spectral_derivative(u: GridFunction, alpha) -> GridFunction:
    """``D^alpha u`` via the multiplier ``(i xi)^alpha``; ``|alpha| <= N/4``."""
    a = _alpha(alpha, u.n)
    if sum(a) > u.N // 4:
        raise ValueError(f"|alpha| = {sum(a)} exceeds the aliasing guard N/4 = {u.N // 4}")
    if sum(a) == 0:
        return GridFunction(spectrum=u.spectrum)
    return GridFunction(spectrum=u.spectrum * derivative_multiplier(u.N, a))


def multi_indices(n: int, order: int):
    """All multi-indices of dimension n with ``|alpha| == order``."""
    if n == 1:
        yield (order,)
        return
    for a in range(order, -1, -1):
        yield (a, order - a)


@dataclass(frozen=True)
class DerivativeNorms:
    """Per-order aggregates of ``||D^alpha u||_{L^2(domain)}``.

    ``sums[l]`` is the sum of norms over ``|alpha| = l``; ``squares[l]`` is the
    sum of squared norms.  One table serves every k of a sweep.
    """

    sums: np.ndarray
    squares: np.ndarray

    @property
    def order(self) -> int:
        return self.sums.size - 1


def derivative_norms(u: GridFunction, order: int, domain: Box | None = None) -> DerivativeNorms:
    if order > u.N // 4:
        raise ValueError(f"order {order} exceeds the aliasing guard N/4 = {u.N // 4}")
    sums = np.zeros(order + 1)
    squares = np.zeros(order + 1)
    scale = float(np.max(np.abs(u.spectrum)))
    if scale == 0.0:
        return DerivativeNorms(sums, squares)
    # work on u / scale so that squares neither underflow nor overflow
    unit = GridFunction(spectrum=u.spectrum / scale)
    mask = None if domain is None else domain.mask(u.N)
    power = np.abs(unit.spectrum) ** 2
    xi = frequencies(u.N)
    for level in range(order + 1):
        for a in multi_indices(u.n, level):
            if mask is None:
                weight = np.abs(xi) ** (2 * a[0])
                if u.n == 2:
                    weight = weight[:, None] * (np.abs(xi) ** (2 * a[1]))[None, :]
                sq = TWO_PI ** u.n * float(np.sum(weight * power))
            else:
                d = spectral_derivative(unit, a).samples[mask]
                sq = u.cell * float(np.sum(np.abs(d) ** 2))
            sums[level] += math.sqrt(sq)
            squares[level] += sq
    return DerivativeNorms(sums * scale, squares * scale * scale)


# -- norms ------------------------------------------------------------------

def log_triple_norm_from(table: DerivativeNorms, seq: WeightSequence, k: int) -> float:
    """``ln sum_{|alpha| <= k} Lambda_k^(k - |alpha|) ||D^alpha u||``."""
    if k > table.order:
        raise ValueError("derivative table too short for k")
    if k == 0:
        return math.log(table.sums[0]) if table.sums[0] > 0 else -math.inf
    log_lam = float(seq.log_m[k]) / k
    levels = np.arange(k + 1)
    with np.errstate(divide="ignore"):
        terms = (k - levels) * log_lam + np.log(table.sums[:k + 1])
    return float(logsumexp(terms))


def log_triple_norm(u: GridFunction, seq: WeightSequence, k: int,
                    domain: Box | None = None) -> float:
    return log_triple_norm_from(derivative_norms(u, k, domain), seq, k)


def triple_norm(u: GridFunction, seq: WeightSequence, k: int, domain: Box | None = None) -> float:
    """Weighted Sobolev scale ``|||u|||_{U,M,k}``; ``domain=None`` is the full box."""
    return math.exp(log_triple_norm(u, seq, k, domain))


def sobolev_norm_from(table: DerivativeNorms, k: int) -> float:
    """``||u||_{H^k} = (sum_{|alpha| <= k} ||D^alpha u||^2)^(1/2)``."""
    return math.sqrt(float(np.sum(table.squares[:k + 1])))


def sobolev_norm(u: GridFunction, k: int, domain: Box | None = None) -> float:
    return sobolev_norm_from(derivative_norms(u, k, domain), k)


class DCNorm(NamedTuple):
    value: float
    log_value: float
    depth: int
    argmax: tuple[int, ...]


def dc_norm(u: GridFunction, seq: WeightSequence, h: float, alpha_top: int,
            domain: Box | None = None) -> DCNorm:
    """``sup_{|alpha| <= alpha_top} ||D^alpha u||_inf / (h^|alpha| M_|alpha|)``."""
    if not h > 0:
        raise ValueError("h must be positive")
    if alpha_top > u.N // 4:
        raise ValueError(f"alpha_top exceeds the aliasing guard N/4 = {u.N // 4}")
    log_h = math.log(h)
    best, arg = -math.inf, (0,) * u.n
    for level in range(alpha_top + 1):
        for a in multi_indices(u.n, level):
            s = spectral_derivative(u, a).sup_norm(domain)
            if s <= 0:
                continue
            val = math.log(s) - level * log_h - float(seq.log_m[level])
            if val > best:
                best, arg = val, a
    return DCNorm(math.exp(best) if best < 700 else math.inf, best, alpha_top, arg)


def log_g_norm(u: GridFunction, omega) -> float:
    """``ln ||exp(omega(|xi|)) u_hat||``, accumulated with max-shifting."""
    spec = u.spectrum
    occupied = spec != 0
    if not occupied.any():
        return -math.inf
    xi = u.xi_abs[occupied]
    with np.errstate(divide="ignore"):
        weights = omega.omega_log(np.log(xi))
    terms = 2.0 * weights + 2.0 * np.log(np.abs(spec[occupied]))
    return 0.5 * (float(logsumexp(terms)) + u.n * math.log(TWO_PI))


def g_norm(u: GridFunction, omega) -> float:
    """Norm of the space ``G_{M}``; infinite when it overflows a double."""
    lg = log_g_norm(u, omega)
    return math.exp(lg) if lg < 709 else math.inf


__all__ = [
    "Box", "GridFunction", "DerivativeNorms", "DCNorm", "frequencies", "grid_coordinates",
    "frequency_magnitude", "random_band_limited", "spectral_derivative", "multi_indices",
    "derivative_norms", "log_triple_norm", "log_triple_norm_from", "triple_norm",
    "sobolev_norm", "sobolev_norm_from", "dc_norm", "log_g_norm", "g_norm",
]
