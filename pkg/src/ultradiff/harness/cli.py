"""Command line front end.

Every subcommand prints a JSON payload.  Estimate subcommands also write
``report.json`` and ``rows.csv`` into the output directory, which
``ULTRADIFF_OUTPUT_DIR`` overrides.

Exit codes: 0 success, 1 a violated inequality or failed verification,
2 usage or configuration errors, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .. import weights as W
from ..assoc import OmegaRangeError, OmegaTable, lemma2_fit, omega_brute
from ..calculus.bands import band_decompose
from ..calculus.cutoff import CutoffError, certify_cutoffs, make_cutoff_family
from ..calculus.estimates import (
    EstimateReport,
    check_eq19,
    check_lemma4,
    sweep_lemma6,
    sweep_theta,
)
from ..calculus.grid import GridFunction, random_band_limited
from ..ladder import LadderError, build_ladder, maximality_check, verify_ladder
from .config import ConfigError, RunConfig, load_config, parse_range
from .fitting import KernelError, fit_prop5, fit_theorem1, solved_test_set
from .operators import UnknownOperatorError, builtin_operator
from .report import dumps, write_report, write_table

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _json_print(payload: Any) -> None:
    sys.stdout.write(dumps(payload))


def _sequence(text: str, cfg: RunConfig) -> W.WeightSequence:
    try:
        if cfg.k_max is not None:
            return W.parse_sequence(text, k_max=cfg.k_max)
        return W.parse_sequence(text)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot build sequence {text!r}: {exc}") from None


def _load_input(path: str, cfg: RunConfig) -> GridFunction:
    p = Path(path)
    try:
        if p.suffix.lower() == ".json":
            return GridFunction.from_json_spectrum(json.loads(p.read_text(encoding="utf-8")))
        return GridFunction.from_csv(p)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read grid function {path}: {exc}") from None


def _random_inputs(cfg: RunConfig, mean_zero: bool = False) -> list[GridFunction]:
    rng = np.random.default_rng(cfg.seed)
    return [random_band_limited(rng, cfg.grid_size, cfg.n, band=cfg.band, mean_zero=mean_zero)
            for _ in range(cfg.cases)]


def _emit(report: EstimateReport, cfg: RunConfig) -> int:
    payload = report.to_dict()
    json_path, csv_path = write_report(payload, cfg.output_path())
    payload = dict(payload)
    payload["files"] = {"json": str(json_path), "csv": str(csv_path)}
    _json_print(payload)
    return EXIT_VIOLATION if report.verdict == "violated" else EXIT_OK


# -- subcommands ---------------------------------------------------------------

def cmd_check(args, cfg: RunConfig) -> int:
    out = []
    for text in cfg.sequences:
        seq = _sequence(text, cfg)
        summary = W.admissibility_summary(seq, cfg.window)
        out.append({"sequence": seq.name, **summary})
    _json_print(out[0] if len(out) == 1 else out)
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    if not (args.a and args.b):
        raise UsageError("compare needs --a and --b")
    m, n = _sequence(args.a, cfg), _sequence(args.b, cfg)
    result = W.compare(m, n, cfg.window)
    _json_print({"m": m.name, "n": n.name, **result.to_dict()})
    return EXIT_OK


def cmd_ladder(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    if args.k is None:
        raise UsageError("ladder needs --k")
    ladder = build_ladder(seq, args.k, cfg.sigma, args.jmax)
    payload: dict[str, Any] = {"sequence": seq.name}
    try:
        check = verify_ladder(ladder, seq)
    except LadderError as exc:
        payload.update(ladder.to_dict())
        payload["verified"] = False
        payload["error"] = str(exc)
        _json_print(payload)
        return EXIT_VIOLATION
    payload.update(ladder.to_dict(check.margins))
    payload["verified"] = True
    payload["maximal"] = maximality_check(ladder, seq)
    _json_print(payload)
    return EXIT_OK if payload["maximal"] else EXIT_VIOLATION


def cmd_omega(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    if not args.t:
        raise UsageError("omega needs at least one --t value")
    table = OmegaTable.build(seq)
    rows = []
    for t in args.t:
        row = {"t": t, "omega": table(t)}
        if args.brute:
            row["omega_brute"] = float(omega_brute(seq, t))
        rows.append(row)
    csv_path = write_table(["t", "omega"], [(r["t"], r["omega"]) for r in rows],
                           cfg.output_path() / "omega.csv")
    _json_print({"sequence": seq.name, "values": rows, "files": {"csv": str(csv_path)}})
    return EXIT_OK


def cmd_lemma2(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    fit = lemma2_fit(seq, cfg.window)
    csv_path = write_table(["k", "Lambda_k", "omega_of_Lambda_k", "ratio"], fit.rows(),
                           cfg.output_path() / "lemma2.csv")
    _json_print({"sequence": seq.name, **fit.to_dict(), "files": {"csv": str(csv_path)}})
    return EXIT_OK if fit.within_theory else EXIT_VIOLATION


def cmd_decompose(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    if args.k is None:
        raise UsageError("decompose needs --k")
    ladder = build_ladder(seq, args.k, cfg.sigma, args.jmax)
    u = _load_input(args.input, cfg) if args.input else _random_inputs(cfg.with_overrides(cases=1))[0]
    dec = band_decompose(u, ladder)
    norms = dec.band_norms()
    total = u.l2_norm()
    residual = 0.0 if dec.residual is None else dec.residual.l2_norm()
    payload = {"sequence": seq.name, "ladder": ladder.to_dict(), "band_norms": norms,
               "residual_norm": residual, "covered": dec.covered, "norm": total,
               "parseval_gap": abs(math.sqrt(sum(x * x for x in norms) + residual ** 2) - total)}
    _json_print(payload)
    return EXIT_OK


def cmd_verify_eq19(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    us = [_load_input(args.input, cfg)] if args.input else _random_inputs(cfg)
    reports = [check_eq19(u, seq, cfg.ks) for u in us]
    bad = [r for r in reports if r.verdict == "violated"]
    rows = []
    for case, r in enumerate(reports):
        for row in r.rows:
            row.case = case
            rows.append(row)
    merged = EstimateReport("eq19", {"sequence": seq.name, "ks": cfg.ks, "cases": len(us)}, rows,
                            {"C": 1.0, "gamma": 4.0}, "violated" if bad else "bounded-geometric",
                            [f"{len(bad)} of {len(us)} inputs violate"] if bad else [])
    return _emit(merged, cfg)


def _cutoffs(cfg: RunConfig):
    V, U = cfg.boxes()
    return make_cutoff_family(V, U, cfg.k_range[1], cfg.grid_size)


def _sine(cfg: RunConfig) -> GridFunction:
    return GridFunction.from_function(lambda *x: np.sin(x[0]), cfg.grid_size, cfg.n)


def cmd_verify_lemma4(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    family = _cutoffs(cfg)
    u = _load_input(args.input, cfg) if args.input else _sine(cfg)
    report = check_lemma4(u, family, seq, cfg.ks)
    cert = certify_cutoffs(family)
    report.params["cutoff_certificate"] = {"ok": cert.ok(), "bound_ratio": cert.bound_ratio,
                                           "plateau_error": cert.plateau_error}
    return _emit(report, cfg)


def cmd_verify_lemma6(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    omega = OmegaTable.build(seq)
    us = [_load_input(args.input, cfg)] if args.input else _random_inputs(cfg)
    return _emit(sweep_lemma6(us, seq, cfg.ks, omega, cfg.sigma), cfg)


def cmd_verify_theta(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    omega = OmegaTable.build(seq)
    gamma = cfg.gamma
    if gamma is None:
        # gamma from the cutoff comparison on sin x over the same sweep
        lemma4_cfg = cfg.with_overrides(k_range=(1, max(cfg.k_range[1], 2)))
        gamma = check_lemma4(_sine(lemma4_cfg), _cutoffs(lemma4_cfg), seq, lemma4_cfg.ks).fit["gamma"]
    report = sweep_theta(seq, omega, cfg.ks, gamma, cfg.sigma, args.variant)
    return _emit(report, cfg)


def cmd_operator_estimate(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    op = builtin_operator(cfg.operator, cfg.grid_size, cfg.n)
    return _emit(fit_theorem1(op, seq, cfg, solved_test_set(op, cfg)), cfg)


def cmd_prop5_estimate(args, cfg: RunConfig) -> int:
    seq = _sequence(cfg.sequences[0], cfg)
    op = builtin_operator(cfg.operator, cfg.grid_size, cfg.n)
    kernel = [_load_input(args.input, cfg)] if args.input else None
    try:
        report = fit_prop5(op, seq, cfg, kernel)
    except KernelError as exc:
        _json_print({"operator": op.name, "refused": str(exc)})
        return EXIT_VIOLATION
    return _emit(report, cfg)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "check": (cmd_check, "admissibility conditions of weight sequences"),
    "compare": (cmd_compare, "order relation between two sequences"),
    "ladder": (cmd_ladder, "geometric-band subsequence and its verification"),
    "omega": (cmd_omega, "associated weight function values"),
    "lemma2": (cmd_lemma2, "fit H in omega(Lambda_k) <= H k"),
    "decompose": (cmd_decompose, "frequency-band decomposition along a ladder"),
    "verify-eq19": (cmd_verify_eq19, "Fourier-weight bound with constant 4^k"),
    "verify-lemma4": (cmd_verify_lemma4, "cutoff comparison of triple norms"),
    "verify-lemma6": (cmd_verify_lemma6, "band-decomposition bound over a k-sweep"),
    "verify-theta": (cmd_verify_theta, "sup of the Theta series over a k-sweep"),
    "operator-estimate": (cmd_operator_estimate, "fit the a priori operator estimate"),
    "prop5-estimate": (cmd_prop5_estimate, "fit the homogeneous-solution estimate"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="key=value config file")
    common.add_argument("--seq", action="append", default=None,
                        help="gevrey:S, logfam:S,SIGMA, qfam:Q or a JSON table path (repeatable)")
    common.add_argument("--k-max", type=int, default=None, help="weight table length")
    common.add_argument("--window", type=parse_range, default=None, help="lo:hi index window")
    common.add_argument("--k", type=str, default=None, help="k or lo:hi sweep")
    common.add_argument("--sigma", type=float, default=None)
    common.add_argument("--gamma", type=float, default=None)
    common.add_argument("--n", type=int, default=None, help="dimension, 1 or 2")
    common.add_argument("--N", dest="N", type=int, default=None, help="grid size")
    common.add_argument("--V", dest="V", type=str, default=None, help="inner box, e.g. pi/2:3*pi/2")
    common.add_argument("--U", dest="U", type=str, default=None, help="outer box")
    common.add_argument("--cases", type=int, default=None)
    common.add_argument("--band", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--operator", type=str, default=None)
    common.add_argument("--input", type=str, default=None, help="grid function (.json spectrum or .csv)")
    common.add_argument("--out", type=str, default=None, help="output directory")

    parser = argparse.ArgumentParser(prog="ultradiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "compare":
            p.add_argument("--a", type=str, default=None)
            p.add_argument("--b", type=str, default=None)
        if name in ("ladder", "decompose"):
            p.add_argument("--jmax", type=int, default=None)
        if name == "omega":
            p.add_argument("--t", type=float, action="append", default=None)
            p.add_argument("--brute", action="store_true", help="also evaluate by direct maximization")
        if name == "verify-theta":
            p.add_argument("--variant", choices=["omega_exponent", "lambda_exponent"],
                           default="omega_exponent")
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides: dict[str, Any] = {
        "sequences": args.seq, "k_max": args.k_max, "window": args.window, "sigma": args.sigma,
        "gamma": args.gamma, "n": args.n, "N": args.N, "V": args.V, "U": args.U,
        "cases": args.cases, "band": args.band, "seed": args.seed, "operator": args.operator,
        "output_dir": args.out,
    }
    single_k = args.command in ("ladder", "decompose")
    if args.k is not None:
        if single_k:
            args.k = parse_range(args.k)[0]
        else:
            overrides["k_range"] = parse_range(args.k)
    if args.command in ("operator-estimate", "prop5-estimate") and args.n is None and not args.config:
        overrides["n"] = 2
    return cfg.with_overrides(**overrides).validate()


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handler = COMMANDS[args.command][0]
    try:
        cfg = _resolve_config(args)
        return handler(args, cfg)
    except (UsageError, ConfigError, UnknownOperatorError, CutoffError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LadderError, OmegaRangeError, FloatingPointError, OverflowError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
