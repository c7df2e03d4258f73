"""Periodic-grid calculus: norms, cutoffs, band decompositions and estimate checks."""

from .bands import BandDecomposition, band_decompose, band_of
from .cutoff import CutoffCertificate, CutoffError, CutoffFamily, certify_cutoffs, make_cutoff_family
from .estimates import (
    EstimateReport,
    check_eq19,
    check_lemma4,
    check_lemma6,
    check_theta_bound,
    fit_geometric,
    sweep_lemma6,
    sweep_theta,
    theta_weight,
)
from .grid import (
    Box,
    GridFunction,
    dc_norm,
    derivative_norms,
    g_norm,
    random_band_limited,
    sobolev_norm,
    spectral_derivative,
    triple_norm,
)

__all__ = [
    "BandDecomposition", "band_decompose", "band_of",
    "CutoffCertificate", "CutoffError", "CutoffFamily", "certify_cutoffs", "make_cutoff_family",
    "EstimateReport", "check_eq19", "check_lemma4", "check_lemma6", "check_theta_bound",
    "fit_geometric", "sweep_lemma6", "sweep_theta", "theta_weight",
    "Box", "GridFunction", "dc_norm", "derivative_norms", "g_norm", "random_band_limited",
    "sobolev_norm", "spectral_derivative", "triple_norm",
]
