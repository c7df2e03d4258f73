"""Run configuration: an INI-style key=value file, overridable by CLI flags."""

from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from ..calculus.grid import Box

OUTPUT_DIR_ENV = "ULTRADIFF_OUTPUT_DIR"
DEFAULT_N = {1: 4096, 2: 256}


class ConfigError(ValueError):
    pass


def parse_range(text: str) -> tuple[int, int]:
    """``"3"`` or ``"1:8"`` to an inclusive integer range."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise ConfigError(f"expected an integer or lo:hi range, got {text!r}") from None
    if lo > hi:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def parse_box(text: str, n: int) -> Box:
    """``"a:b"`` (a cube) or ``"a:b,c:d"`` (one interval per axis).

    Endpoints accept ``pi`` expressions such as ``pi/4`` or ``3*pi/2``.
    """
    intervals = [s.strip() for s in str(text).split(",") if s.strip()]
    if len(intervals) == 1:
        intervals *= n
    if len(intervals) != n:
        raise ConfigError(f"box {text!r} does not have {n} intervals")
    lo, hi = [], []
    for iv in intervals:
        ends = iv.split(":")
        if len(ends) != 2:
            raise ConfigError(f"interval {iv!r} is not lo:hi")
        lo.append(_number(ends[0]))
        hi.append(_number(ends[1]))
    try:
        return Box(tuple(lo), tuple(hi))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_NUMBER = re.compile(r"^(?P<coef>[+-]?(\d+\.?\d*|\.\d+)(e[+-]?\d+)?)?(?P<star>\*)?(?P<pi>pi)?"
                     r"(/(?P<den>\d+\.?\d*))?$")


def _number(text: str) -> float:
    """A float, optionally times ``pi`` and over a divisor: ``0.5``, ``3*pi/2``, ``pi/4``."""
    m = _NUMBER.match(text.strip().replace(" ", ""))
    if not m or not (m["coef"] or m["pi"]) or (m["star"] and not (m["coef"] and m["pi"])):
        raise ConfigError(f"not a number: {text!r}")
    value = float(m["coef"]) if m["coef"] not in (None, "+", "-") else 1.0
    if m["pi"]:
        value *= math.pi
    if m["den"]:
        value /= float(m["den"])
    return value


@dataclass
class RunConfig:
    sequences: list[str] = field(default_factory=lambda: ["gevrey:1"])
    operator: str = "laplacian"
    n: int = 1
    N: int | None = None
    k_range: tuple[int, int] = (1, 8)
    V: str = "pi/2:3*pi/2"
    U: str = "pi/4:7*pi/4"
    sigma: float | None = None
    gamma: float | None = None
    cases: int = 100
    band: int = 16
    seed: int = 0
    window: tuple[int, int] | None = None
    k_max: int | None = None
    output_dir: str = "."

    @property
    def grid_size(self) -> int:
        return self.N if self.N is not None else DEFAULT_N[self.n]

    @property
    def ks(self) -> list[int]:
        return list(range(self.k_range[0], self.k_range[1] + 1))

    def boxes(self) -> tuple[Box, Box]:
        V, U = parse_box(self.V, self.n), parse_box(self.U, self.n)
        if not (U.contains(V) and U.separation(V) > 0):
            raise ConfigError("V must lie strictly inside U")
        return V, U

    def validate(self) -> "RunConfig":
        if self.n not in (1, 2):
            raise ConfigError("dimension n must be 1 or 2")
        N = self.grid_size
        if N < 4 or N & (N - 1):
            raise ConfigError("grid size N must be a power of two >= 4")
        if self.k_range[0] < 0 or self.k_range[1] > N // 4:
            raise ConfigError(f"k range {self.k_range} outside [0, N/4]")
        if self.cases < 1 or self.band < 1:
            raise ConfigError("cases and band must be positive")
        if self.sigma is not None and not self.sigma > 1:
            raise ConfigError("sigma must exceed 1")
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        self.boxes()
        return self

    def output_path(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["N"] = self.grid_size
        return out

    def with_overrides(self, **values: Any) -> "RunConfig":
        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in values.items() if k in known and v is not None})


_KEYS = {
    # (section, key): (field, converter)
    ("run", "seq"): ("sequences", lambda s: [p.strip() for p in s.split(";") if p.strip()]),
    ("run", "operator"): ("operator", str),
    ("run", "n"): ("n", int),
    ("run", "n_grid"): ("N", int),
    ("run", "k"): ("k_range", parse_range),
    ("run", "cases"): ("cases", int),
    ("run", "band"): ("band", int),
    ("run", "seed"): ("seed", int),
    ("run", "window"): ("window", parse_range),
    ("run", "k_max"): ("k_max", int),
    ("geometry", "v"): ("V", str),
    ("geometry", "u"): ("U", str),
    ("overrides", "sigma"): ("sigma", float),
    ("overrides", "gamma"): ("gamma", float),
    ("output", "dir"): ("output_dir", str),
}


def load_config(path: str | Path) -> RunConfig:
    """Read a config file with sections ``run``, ``geometry``, ``overrides``, ``output``.

    Several sequences go on one ``seq`` line separated by ``;``.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values: dict[str, Any] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _KEYS.get((section.lower(), key.lower()))
            if spec is None:
                raise ConfigError(f"unknown key [{section}] {key}")
            name, convert = spec
            if raw.strip() == "":
                continue
            try:
                values[name] = convert(raw)
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None
    return RunConfig(**values)
