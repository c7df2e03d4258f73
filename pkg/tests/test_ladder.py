import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultradiff.ladder import (
    MARGIN_TOL,
    Ladder,
    LadderError,
    build_ladder,
    default_sigma,
    maximality_check,
    verify_ladder,
)
from ultradiff.weights import make_gevrey, make_log_family, make_q_family

from oracles import linear_scan_ladder


def test_gevrey_k4_sigma2():
    seq = make_gevrey(1, 20_000)
    lad = build_ladder(seq, 4, 2.0, j_max=10)
    assert lad.indices[:2] == (4, 9)
    assert math.exp(seq.log_lambda[9]) <= 2 * math.exp(seq.log_lambda[4]) < math.exp(seq.log_lambda[10])
    assert lad.J == 10 and not lad.truncated
    assert min(verify_ladder(lad, seq).margins) >= -1e-10
    assert maximality_check(lad, seq)


def test_q_family_unit_bands(l2_small):
    lad = build_ladder(l2_small, 3, 2.0, j_max=20)
    assert lad.indices == tuple(range(3, 24))
    verify_ladder(lad, l2_small)


def test_empty_band_raises():
    with pytest.raises(LadderError) as err:
        build_ladder(make_gevrey(1, 1000), 1, 1.05)
    assert err.value.band == 1


def test_decremented_rung_on_q_family_fails(l2_small):
    good = build_ladder(l2_small, 3, 2.0, j_max=3)
    idx = list(good.indices)
    idx[1] -= 1
    bad = Ladder(3, 2.0, tuple(idx), tuple(float(l2_small.log_lambda[m]) for m in idx), False, 3)
    with pytest.raises(LadderError) as err:
        verify_ladder(bad, l2_small)
    assert err.value.band == 1


def test_g2_k10_default_sigma():
    seq = make_gevrey(2, 20_000)
    lad = build_ladder(seq, 10, default_sigma(seq), j_max=15)
    assert lad.J == 15
    verify_ladder(lad, seq)
    assert maximality_check(lad, seq)


def test_maximality_detects_smaller_in_band_index():
    seq = make_gevrey(1, 2000)
    lad = build_ladder(seq, 4, 2.0, j_max=3)
    idx = list(lad.indices)
    idx[1] = 8
    alt = Ladder(4, 2.0, tuple(idx), tuple(float(seq.log_lambda[m]) for m in idx), False, lad.j_limit)
    verify_ladder(alt, seq)  # still inside its band
    assert not maximality_check(alt, seq)


def test_single_band_on_q_family():
    seq = make_q_family(3, 100)
    lad = build_ladder(seq, 5, 3.0, j_max=1)
    assert lad.J == 1 and maximality_check(lad, seq)


def test_truncation_reported():
    seq = make_gevrey(1, 200)
    lad = build_ladder(seq, 4, 2.0, j_max=1000)
    assert lad.truncated and lad.J == lad.j_limit


@pytest.mark.parametrize("family", [lambda K: make_gevrey(1, K), lambda K: make_gevrey(2, K),
                                    lambda K: make_log_family(1, 1, K)])
@pytest.mark.parametrize("k", [2, 4, 8, 16, 32])
def test_linear_scan_oracle(family, k):
    seq = family(1000)
    sigma = default_sigma(seq)
    lad = build_ladder(seq, k, sigma)
    assert list(lad.indices) == linear_scan_ladder(seq.log_lambda, k, sigma, lad.J)


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 3), st.integers(1, 60), st.floats(1.5, 4))
def test_ladder_properties(s, k, sigma):
    seq = make_gevrey(s, 3000)
    sigma = max(sigma, default_sigma(seq))
    lad = build_ladder(seq, k, sigma)
    assert lad.indices[0] == k
    assert all(b > a for a, b in zip(lad.indices[1:], lad.indices[2:]))
    if lad.J >= 1 and seq.log_lambda[k + 1] > seq.log_lambda[k]:
        assert lad.indices[1] > lad.indices[0]
    ll = np.array(lad.log_lambda)
    ls = math.log(sigma)
    # consecutive rungs are at most two bands apart
    assert np.all(ll[2:] - ll[1:-1] <= 2 * ls + 1e-10)
    assert verify_ladder(lad, seq).min_margin >= -1e-10
    assert build_ladder(seq, k, sigma) == lad  # deterministic
