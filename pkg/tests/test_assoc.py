import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultradiff.assoc import OmegaRangeError, OmegaTable, lemma2_fit, omega_brute, omega_fast
from ultradiff.weights import make_gevrey, make_log_family, make_q_family

LN_4_5 = 1.5040773967762741
OMEGA_G1_AT_5 = 3.2596978193884559  # ln(5^5 / 5!)


def _oracle(log_m, t):
    """Plain Python maximum of k ln t - ln M_k, independent of the module."""
    lt = math.log(t)
    return max(k * lt - float(v) for k, v in enumerate(log_m))


def test_examples():
    g = make_gevrey(1, 200)
    tab = OmegaTable.build(g)
    assert tab(1.0) == 0.0
    assert tab(3.0) == pytest.approx(LN_4_5, abs=1e-14)
    assert tab(5.0) == pytest.approx(OMEGA_G1_AT_5, abs=1e-13)
    assert tab(0.0) == 0.0 and tab(1e-300) == 0.0
    assert OmegaTable.build(make_q_family(2, 50))(2.0) == 0.0
    n = make_log_family(1, 1, 500)
    assert omega_fast(OmegaTable.build(n), 10.0) == pytest.approx(_oracle(n.log_m, 10.0), abs=1e-10)


def test_brute_matches_plain_oracle():
    g = make_gevrey(2, 300)
    for t in (0.5, 2.0, 17.0, 400.0):
        assert omega_brute(g, t) == pytest.approx(_oracle(g.log_m, t), abs=1e-12)


def test_range_errors():
    tab = OmegaTable.build(make_gevrey(1, 10))
    with pytest.raises(OmegaRangeError):
        tab(11.0)
    with pytest.raises(ValueError):
        tab(-1.0)


@pytest.mark.parametrize("family", ["g1", "g2", "n11"])
def test_mandelbrojt_identity_at_breakpoints(family, request):
    seq = request.getfixturevalue(family)
    tab = OmegaTable.build(seq)
    k = np.arange(1, seq.k_max + 1)
    lmu = seq.log_mu[1:]
    expected = k * lmu - seq.log_m[1:]
    assert np.array_equal(tab.omega_log(lmu), expected)


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 3), st.lists(st.floats(0, 60), min_size=2, max_size=30))
def test_monotone_and_matches_brute(s, ts):
    seq = make_gevrey(s, 2000)
    tab = OmegaTable.build(seq)
    ts = np.sort(np.asarray(ts))
    vals = tab(ts)
    assert np.all(np.diff(vals) >= -1e-12)
    pos = ts > 0
    assert np.allclose(vals[pos], omega_brute(seq, ts[pos]), atol=1e-10, rtol=0)


def test_zero_below_first_quotient():
    seq = make_log_family(1, 2, 100)
    tab = OmegaTable.build(seq)
    mu1 = math.exp(seq.log_mu[1])
    assert np.all(tab(np.linspace(0, mu1 * (1 - 1e-9), 50)) == 0.0)


def test_omega_of_root_below_omega_of_quotient(g1_small):
    tab = OmegaTable.build(g1_small)
    ll, lm = g1_small.log_lambda[1:], g1_small.log_mu[1:]
    assert np.all(tab.omega_log(ll) <= tab.omega_log(lm) + 1e-12)


def test_lemma2_gevrey(g1):
    fit = lemma2_fit(g1, (1, 10_000))
    assert fit.H <= 1.05
    assert fit.within_theory and fit.H <= math.log(fit.D) + 1e-9
    assert fit.D >= math.e
    assert fit.omega_of_lambda[0] == 0.0  # omega(Lambda_1) = omega(1) = 0
    rows = list(fit.rows())
    assert rows[0][0] == 1 and len(rows) == 10_000


def test_lemma2_on_q_family_has_growing_tail():
    seq = make_q_family(2, 400)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = lemma2_fit(seq, (1, 200))
    assert any("not admissible" in str(w.message) for w in caught)
    assert not fit.bounded
    assert fit.ratio[-1] > fit.ratio[len(fit.ratio) // 2]
