"""Acceptance criteria, each with its tolerance and runtime budget.

Every test times its own work and fails if the budget is exceeded.  The
terminal summary prints one PASS/FAIL line per criterion.
"""

import math
import time

import jsonschema
import numpy as np
import pytest

from ultradiff.assoc import OmegaTable, lemma2_fit, omega_brute
from ultradiff.calculus.bands import band_decompose
from ultradiff.calculus.cutoff import certify_cutoffs, make_cutoff_family
from ultradiff.calculus.estimates import (
    check_eq19,
    check_lemma4,
    check_norm_chain,
    sweep_lemma6,
    sweep_theta,
)
from ultradiff.calculus.grid import Box, GridFunction, random_band_limited
from ultradiff.harness.config import RunConfig
from ultradiff.harness.fitting import fit_theorem1, solved_test_set
from ultradiff.harness.operators import builtin_operator
from ultradiff.harness.report import REPORT_SCHEMA, dumps
from ultradiff.ladder import MARGIN_TOL, build_ladder, maximality_check, verify_ladder
from ultradiff.weights import (
    admissibility_summary,
    check_deriv_closed,
    check_moderate_growth,
    compare,
    make_gevrey,
    make_log_family,
    make_q_family,
)

from oracles import linear_scan_ladder

pytestmark = pytest.mark.acceptance

STD_N = 4096
V_STD = Box.cube(math.pi / 2, 3 * math.pi / 2, 1)
U_STD = Box.cube(math.pi / 4, 7 * math.pi / 4, 1)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False

    def check(self):
        assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


def test_01_admissibility_table():
    """1: G^s and N^{s,sigma} admissible, L^q fails moderate growth with witness q^(k-1)"""
    window = (1, 10_000)
    with Budget(5) as b:
        good = [make_gevrey(s, 10_001) for s in (1, 1.5, 2, 3)]
        good += [make_log_family(1, sg, 10_001) for sg in (0.5, 1, 2)]
        summaries = [admissibility_summary(seq, window) for seq in good]
        failures = []
        for q in (1.5, 2.0):
            seq = make_q_family(q, 10_001)
            failures.append((q, admissibility_summary(seq, window),
                             check_moderate_growth(seq, window)))
    for seq, summary in zip(good, summaries):
        assert summary["admissible"], seq.name
    for q, summary, mg in failures:
        assert not summary["admissible"]
        failed = [c["condition"] for c in summary["conditions"] if not c["holds"]]
        assert "moderate-growth" in failed
        closed = (mg.witness - 1) * math.log(q)  # ln q^(k-1)
        assert abs(mg.witness_log_ratio - closed) <= 1e-10 * closed
    b.check()


def test_02_omega_oracle_equivalence():
    """2: fast omega matches direct maximization on 10^3 random t; Mandelbrojt identity exact"""
    rng = np.random.default_rng(2)
    with Budget(10) as b:
        worst = {}
        identity = {}
        for seq in (make_gevrey(1), make_gevrey(2), make_log_family(1, 1)):
            table = OmegaTable.build(seq)
            t_top = math.exp(seq.log_mu[-1])
            ts = np.exp(rng.uniform(math.log(1e-3), math.log(t_top), 1000))
            worst[seq.name] = float(np.max(np.abs(table(ts) - omega_brute(seq, ts))))
            k = np.arange(1, seq.k_max + 1)
            lmu = seq.log_mu[1:]
            identity[seq.name] = bool(np.array_equal(table.omega_log(lmu), k * lmu - seq.log_m[1:]))
    assert all(w <= 1e-10 for w in worst.values()), worst
    assert all(identity.values()), identity
    b.check()


def test_03_lemma2_witness():
    """3: G^1 on [1, 10^4] gives H <= 1.05 and H <= ln D + 1e-9 with D >= e"""
    with Budget(5) as b:
        fit = lemma2_fit(make_gevrey(1), (1, 10_000))
    assert fit.D >= math.e
    assert fit.H <= 1.05
    assert fit.H <= math.log(fit.D) + 1e-9
    b.check()


def test_04_ladders():
    """4: ladders with sigma from derivation closedness: >= 8 bands, margins, maximality, scan oracle"""
    with Budget(10) as b:
        results = []
        for seq in (make_gevrey(1), make_gevrey(2), make_log_family(1, 1)):
            sigma = check_deriv_closed(seq).constant
            for k in (2, 4, 8, 16, 32):
                lad = build_ladder(seq, k, sigma)
                margins = verify_ladder(lad, seq).margins
                results.append((seq.name, k, lad.J, min(margins), maximality_check(lad, seq)))
        oracle_ok = []
        for seq in (make_gevrey(1, 1000), make_gevrey(2, 1000), make_log_family(1, 1, 1000)):
            sigma = check_deriv_closed(seq).constant
            for k in (2, 4, 8, 16, 32):
                lad = build_ladder(seq, k, sigma)
                scan = linear_scan_ladder(seq.log_lambda, k, sigma, lad.J)
                oracle_ok.append(list(lad.indices) == scan)
    for name, k, J, margin, maximal in results:
        assert J >= 8, (name, k, J)
        assert margin >= -MARGIN_TOL, (name, k, margin)
        assert maximal, (name, k)
    assert all(oracle_ok)
    b.check()


def test_05_band_decomposition_exact():
    """5: band pieces of 100 random functions sum to u and split the norm to 1e-10"""
    rng = np.random.default_rng(5)
    seq = make_gevrey(1)
    ladder = build_ladder(seq, 2)
    with Budget(10) as b:
        worst_norm = worst_sum = 0.0
        for _ in range(100):
            u = random_band_limited(rng, STD_N, 1, band=64)
            dec = band_decompose(u, ladder)
            assert dec.covered
            total = u.l2_norm()
            parts = sum(p.l2_norm() ** 2 for p in dec.parts)
            worst_norm = max(worst_norm, abs(parts - total ** 2) / total ** 2)
            rebuilt = np.sum([p.samples for p in dec.parts], axis=0)
            worst_sum = max(worst_sum, float(np.max(np.abs(rebuilt - u.samples))) / u.sup_norm())
    assert worst_norm <= 1e-10
    assert worst_sum <= 1e-10
    b.check()


def test_06_fourier_weight_bound_never_violated():
    """6: 10^3 random functions, k = 1..8, G^1 and G^2: zero violations of the 4^k bound"""
    rng = np.random.default_rng(6)
    seqs = (make_gevrey(1), make_gevrey(2))
    with Budget(60) as b:
        violations = 0
        for _ in range(1000):
            u = random_band_limited(rng, STD_N, 1)
            for seq in seqs:
                violations += check_eq19(u, seq, range(1, 9)).verdict == "violated"
    assert violations == 0
    b.check()


def test_07_cutoff_certification():
    """7: cutoff family with d = pi/4, k <= 12, N = 4096 certified with one Q"""
    with Budget(30) as b:
        family = make_cutoff_family(V_STD, U_STD, 12, STD_N)
        cert = certify_cutoffs(family)
    assert family.d == pytest.approx(math.pi / 4)
    assert math.isfinite(family.Q) and family.Q > 0
    assert cert.bound_ratio <= 1 + 1e-12
    assert cert.ok(), cert
    b.check()


def test_08_cutoff_band_and_theta_fits():
    """8: G^1 standard setup: cutoff, band and Theta fits bounded, ln sup Theta/(k+1) non-increasing"""
    seq = make_gevrey(1)
    omega = OmegaTable.build(seq)
    rng = np.random.default_rng(8)
    with Budget(120) as b:
        sine = GridFunction.from_function(lambda x: np.sin(x), STD_N)
        family = make_cutoff_family(V_STD, U_STD, 8, STD_N)
        lemma4 = check_lemma4(sine, family, seq, range(1, 9))
        us = [random_band_limited(rng, STD_N, 1) for _ in range(100)]
        lemma6 = sweep_lemma6(us, seq, range(1, 9), omega)
        theta = sweep_theta(seq, omega, range(2, 9), lemma4.fit["gamma"])
    assert lemma4.verdict == "bounded-geometric", lemma4.fit
    assert lemma6.verdict == "bounded-geometric", lemma6.fit
    assert theta.verdict == "bounded-geometric", (theta.fit, theta.notes)
    b.check()
    per_k = theta.fit["log_C_per_k"]
    assert theta.fit["log_C_monotone"], (
        f"ln sup Theta / (k+1) over k = 2..8 is {[round(v, 4) for v in per_k]}, "
        "which increases")


def test_09_pseudo_inverse_round_trip():
    """9: laplacian and heat satisfy P(Rf) = f to 1e-8 on 10^3 random mean-zero inputs"""
    rng = np.random.default_rng(9)
    with Budget(10) as b:
        worst = {}
        for name, n, N in (("laplacian", 1, 256), ("laplacian", 2, 64), ("heat", 2, 64)):
            op = builtin_operator(name, N, n)
            err = 0.0
            for _ in range(1000):
                f = random_band_limited(rng, N, n, band=16, mean_zero=True)
                back = op(op.solve(f))
                err = max(err, (back - f).l2_norm() / f.l2_norm())
            worst[(name, n)] = err
    assert all(e <= 1e-8 for e in worst.values()), worst
    b.check()


def test_10_operator_estimate_fit():
    """10: laplacian with G^1, u = Rf over 100 f, k = 1..8: finite (C, L), schema-valid JSON"""
    import json

    cfg = RunConfig(n=1, k_range=(1, 8), cases=100, seed=10).validate()
    seq = make_gevrey(1)
    with Budget(120) as b:
        op = builtin_operator("laplacian", cfg.grid_size, 1)
        report = fit_theorem1(op, seq, cfg, solved_test_set(op, cfg))
        payload = json.loads(dumps(report.to_dict()))
    jsonschema.validate(payload, REPORT_SCHEMA)
    assert report.verdict == "bounded-geometric", report.fit
    assert math.isfinite(report.fit["C"]) and math.isfinite(report.fit["L"])
    assert all(r.log_ratio <= math.log(report.fit["C"]) + r.k * math.log(report.fit["L"]) + 1e-9
               for r in report.rows if not r.skipped)
    b.check()


def test_11_norm_chain():
    """11: 100 random u, k <= 8: G^1 triple norm <= C h^k times the G^2 one, (C, h) from compare"""
    rng = np.random.default_rng(11)
    g1, g2 = make_gevrey(1), make_gevrey(2)
    with Budget(30) as b:
        cmp = compare(g1, g2)
        us = [random_band_limited(rng, STD_N, 1) for _ in range(100)]
        report = check_norm_chain(us, g1, g2, range(1, 9), cmp.C, cmp.h, U_STD)
    assert cmp.m_le_n
    assert report.verdict == "bounded-geometric", report.notes
    b.check()
