import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultradiff.assoc import OmegaTable, omega_brute
from ultradiff.calculus.grid import (
    Box,
    GridFunction,
    dc_norm,
    derivative_norms,
    g_norm,
    grid_coordinates,
    random_band_limited,
    sobolev_norm,
    spectral_derivative,
    triple_norm,
)
from ultradiff.weights import make_gevrey

SQRT_PI = math.sqrt(math.pi)
DC_E5 = 26.041666666666668  # 5^5 / 5!


def sine(N=256, n=1):
    return GridFunction.from_function(lambda *x: np.sin(x[0]), N, n)


def test_spectral_derivative_examples():
    N = 256
    (x,) = grid_coordinates(N)
    d = spectral_derivative(sine(N), (1,))
    assert np.max(np.abs(d.samples - np.cos(x))) < 1e-10
    u = random_band_limited(np.random.default_rng(0), N, band=10)
    assert np.array_equal(spectral_derivative(u, 0).spectrum, u.spectrum)
    e3 = GridFunction.from_modes({3: 1.0}, N)
    assert np.allclose(spectral_derivative(e3, 2).samples, -9 * e3.samples, atol=1e-10)
    with pytest.raises(ValueError):
        spectral_derivative(u, (N // 4 + 1,))


def test_2d_mixed_derivative():
    N = 64
    u = GridFunction.from_modes({(2, 3): 1.0}, N, 2)
    d = spectral_derivative(u, (1, 2))
    assert np.allclose(d.spectrum, (2j) * (3j) ** 2 * u.spectrum)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1, 2]), st.integers(1, 8))
def test_parseval_and_round_trip(seed, n, band):
    N = 64 if n == 1 else 32
    u = random_band_limited(np.random.default_rng(seed), N, n, band=band)
    assert u.l2_norm() == pytest.approx(u.grid_l2_norm(), rel=1e-10)
    back = GridFunction(u.samples)
    assert np.allclose(back.spectrum, u.spectrum, rtol=0, atol=1e-10 * np.abs(u.spectrum).max())


def test_triple_norm_examples(g1):
    u = sine(512)
    assert triple_norm(u, g1, 0) == pytest.approx(SQRT_PI, rel=1e-12)
    assert triple_norm(u, g1, 1) == pytest.approx(2 * SQRT_PI, rel=1e-12)
    assert triple_norm(3.5 * u, g1, 3) == pytest.approx(3.5 * triple_norm(u, g1, 3), rel=1e-12)


def test_triple_norm_full_box_matches_quadrature(g1):
    u = random_band_limited(np.random.default_rng(2), 128, band=12)
    box = Box.cube(0.0, 2 * math.pi * (1 - 1 / 128), 1)  # every grid point
    assert triple_norm(u, g1, 5, box) == pytest.approx(triple_norm(u, g1, 5), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.2, 2.0), st.floats(0.3, 1.5))
def test_triple_norm_monotone_in_domain(seed, a, w):
    u = random_band_limited(np.random.default_rng(seed), 128, band=10)
    g = make_gevrey(1, 50)
    inner = Box.cube(a, a + w, 1)
    outer = Box.cube(a - 0.1, a + w + 0.1, 1)
    assert triple_norm(u, g, 4, inner) <= triple_norm(u, g, 4, outer) * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                 allow_infinity=False))
def test_norm_homogeneity_and_triangle(seed, c):
    rng = np.random.default_rng(seed)
    g = make_gevrey(1, 5000)
    om = OmegaTable.build(g)
    u, v = (random_band_limited(rng, 64, band=8) for _ in range(2))
    for norm in (lambda f: triple_norm(f, g, 4), lambda f: dc_norm(f, g, 1.0, 6).value,
                 lambda f: g_norm(f, om)):
        assert norm(u + v) <= (norm(u) + norm(v)) * (1 + 1e-10)
        assert norm(c * u) == pytest.approx(abs(c) * norm(u), rel=1e-10, abs=1e-300)


def test_dc_norm_examples(g1):
    one = GridFunction.from_modes({0: 1.0}, 64)
    assert dc_norm(one, g1, 1.0, 10).value == pytest.approx(1.0, rel=1e-12)
    s = dc_norm(sine(256), g1, 1.0, 12)
    assert s.value == pytest.approx(1.0, rel=1e-10) and s.depth == 12
    e5 = dc_norm(GridFunction.from_modes({5: 1.0}, 256), g1, 1.0, 20)
    assert e5.value == pytest.approx(DC_E5, rel=1e-10) and e5.argmax in ((4,), (5,))  # tie


def test_g_norm_examples(omega_g1):
    c0 = GridFunction.from_modes({0: 0.75}, 64)
    assert g_norm(c0, omega_g1) == pytest.approx(0.75 * math.sqrt(2 * math.pi), rel=1e-14)
    e3 = GridFunction.from_modes({3: 1.0}, 64)
    assert g_norm(e3, omega_g1) == pytest.approx(4.5 * e3.l2_norm(), rel=1e-12)


def test_g_norm_matches_direct_sum(g1, omega_g1):
    u = random_band_limited(np.random.default_rng(4), 256, band=40)
    xi = np.abs(np.fft.fftfreq(256, 1 / 256))
    weights = np.array([1.0 if x == 0 else math.exp(omega_brute(g1, x)) for x in xi])
    direct = math.sqrt(2 * math.pi * np.sum((weights * np.abs(u.spectrum)) ** 2))
    assert g_norm(u, omega_g1) == pytest.approx(direct, rel=1e-10)


def test_g_norm_no_overflow(omega_g1):
    big = GridFunction.from_modes({2000: 1e-300}, 4096)
    val = g_norm(big, omega_g1)
    assert math.isinf(val) or val > 0


def test_sobolev_norm_single_mode():
    e = GridFunction.from_modes({3: 1.0}, 64)
    expected = math.sqrt(2 * math.pi * sum(9 ** a for a in range(4)))
    assert sobolev_norm(e, 3) == pytest.approx(expected, rel=1e-12)


def test_derivative_norm_table_guard():
    with pytest.raises(ValueError):
        derivative_norms(sine(64), 17)


def test_product_is_exact_for_sparse_factor():
    N = 128
    rng = np.random.default_rng(7)
    u = random_band_limited(rng, N, band=6)
    v = GridFunction.from_modes({1: 0.5, -1: 0.5}, N)  # cos x
    direct = GridFunction(u.samples * v.samples)
    assert np.allclose((u * v).spectrum, direct.spectrum, atol=1e-14)
    # modes beyond the combined band stay exactly zero
    assert (u * v).max_occupied_frequency() <= 7


def test_from_function_chops_rounding_noise():
    u = sine(1024)
    assert np.count_nonzero(u.spectrum) == 2
    raw = GridFunction.from_function(np.sin, 1024, chop=0.0)
    assert np.count_nonzero(raw.spectrum) > 2


def test_serialization_round_trips(tmp_path):
    u = random_band_limited(np.random.default_rng(9), 32, 2, band=3)
    back = GridFunction.from_json_spectrum(u.to_json_spectrum())
    assert np.array_equal(back.spectrum, u.spectrum)
    path = tmp_path / "u.csv"
    u.to_csv(path)
    again = GridFunction.from_csv(path)
    assert np.array_equal(again.samples, u.samples)
    with pytest.raises(ValueError):
        GridFunction.from_json_spectrum({"n": 1, "N": 8, "modes": [{"xi": 9, "re": 1, "im": 0}]})


def test_grid_guards():
    with pytest.raises(ValueError):
        GridFunction(np.zeros(12))
    with pytest.raises(ValueError):
        GridFunction(np.zeros(8), spectrum=np.zeros(8))
    with pytest.raises(ValueError):
        Box((1.0,), (0.5,))
    with pytest.raises(ValueError):
        random_band_limited(np.random.default_rng(0), 32, band=9)
