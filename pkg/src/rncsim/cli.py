"""Command-line front end: ``rncsim {paf,analytic,simulate}``.

Configuration files are INI-style. ``[run]`` holds scalar settings and
``[sweep]`` holds one key per sweep dimension; grid values are comma lists
whose items are numbers, fractions (``2/3``) or inclusive ranges
``start:stop:step``::

    [run]
    seed = 12345
    frames = 100000
    relay_error_mode = count_as_sfee
    common_random_numbers = true

    [sweep]
    protocol = RCNC, RGNC
    R = 2
    scheme = fixed
    kappa = 0.30:0.80:0.05, 2/3
    snr_db = 32

Exit status: 0 success, 2 configuration error, 3 runtime or numeric error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .analytic import performance_gap, sfep_approx
from .channel import snr_db_to_rho
from .constellation import SUPPORTED_RATES
from .montecarlo import COUNT_AS_SFEE, RELAY_ERROR_MODES, SfepEstimate, SimConfig, sweep
from .power_allocation import (
    PROTOCOLS, RCNC, RGNC, AllocationScheme, DegenerateChannelError, ipas_rcnc,
    ospas_kappa, ospas_kappa_rcnc, ospas_kappa_rgnc,
)
from .streams import derive_seed

log = logging.getLogger("rncsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SIMULATE_HEADER = ["protocol", "R", "kappa", "scheme", "snr_db", "frames", "errors",
                   "sfep", "ci_low", "ci_high", "retries"]
ANALYTIC_HEADER = ["protocol", "R", "kappa", "snr_db", "rho", "sfep_approx", "gap"]

RUN_DEFAULTS = {
    "seed": "1",
    "frames": "100000",
    "workers": "1",
    "relay_error_mode": COUNT_AS_SFEE,
    "common_random_numbers": "true",
}


class ConfigError(ValueError):
    """Invalid or unparseable configuration."""


@dataclass
class RunSpec:
    command: str
    config_path: Optional[str] = None
    output_path: Optional[str] = None
    overrides: list = field(default_factory=list)


def fmt(x) -> str:
    """Locale-independent float text that parses back to the same double."""
    return repr(float(x))


def _number(text: str) -> float:
    text = text.strip()
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def parse_grid(text: str) -> list:
    """Parse ``"0.3:0.5:0.1, 2/3"`` into ``[0.3, 0.4, 0.5, 0.666...]``."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) == 1:
            values.append(_number(item))
        elif len(parts) == 3:
            start, stop, step = (Fraction(p.strip()) for p in parts)
            if step <= 0:
                raise ValueError(f"range step must be positive in {item!r}")
            n = int((stop - start) / step)
            values.extend(float(start + i * step) for i in range(n + 1))
        else:
            raise ValueError(f"expected start:stop:step, got {item!r}")
    return values


def _words(text: str) -> list:
    return [w.strip() for w in text.split(",") if w.strip()]


def _key_line(lines, section, key):
    current = None
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip().lower() == key.lower():
            return lineno
    return None


class Config:
    """Parsed configuration with per-key error diagnostics."""

    def __init__(self, text: str = "", source: str = "<config>"):
        self.source = source
        self._lines = text.splitlines()
        self.parser = configparser.ConfigParser(interpolation=None)
        self.parser.optionxform = str
        try:
            self.parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        for name in ("run", "sweep"):
            if not self.parser.has_section(name):
                self.parser.add_section(name)
        unknown = set(self.parser.sections()) - {"run", "sweep"}
        if unknown:
            raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")

    @classmethod
    def from_file(cls, path: str) -> "Config":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls(fh.read(), source=path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def set(self, assignment: str) -> None:
        """Apply ``section.key=value`` (or ``key=value``, looked up in run then sweep)."""
        if "=" not in assignment:
            raise ConfigError(f"override {assignment!r} is not key=value")
        key, value = (s.strip() for s in assignment.split("=", 1))
        if "." in key:
            section, key = key.split(".", 1)
        elif key in RUN_DEFAULTS:
            section = "run"
        else:
            section = "sweep"
        if section not in ("run", "sweep"):
            raise ConfigError(f"override {assignment!r}: unknown section {section!r}")
        self.parser.set(section, key, value)

    def raw(self, section: str, key: str, default=None) -> str:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        if default is None:
            raise ConfigError(f"{self.source}: missing [{section}] {key}")
        return default

    def get(self, section: str, key: str, convert, default=None):
        text = self.raw(section, key, default)
        try:
            return convert(text)
        except (ValueError, TypeError, ArithmeticError) as exc:
            line = _key_line(self._lines, section, key)
            where = f" (line {line})" if line else ""
            raise ConfigError(f"{self.source}: [{section}] {key}{where}: {exc}") from exc

    def run_value(self, key: str, convert):
        return self.get("run", key, convert, RUN_DEFAULTS[key])


def _protocols(text):
    values = [w.upper() for w in _words(text)]
    bad = [v for v in values if v not in PROTOCOLS]
    if bad:
        raise ValueError(f"unknown protocol(s) {bad}")
    return values


def _rates(text):
    values = [int(v) for v in _words(text)]
    bad = [v for v in values if v not in SUPPORTED_RATES]
    if bad:
        raise ValueError(f"unsupported rate(s) {bad}; choose from {SUPPORTED_RATES}")
    return values


def _schemes(text):
    values = [w.lower() for w in _words(text)]
    bad = [v for v in values if v not in ("fixed", "ospas", "ipas")]
    if bad:
        raise ValueError(f"unknown scheme(s) {bad}")
    return values


def _kappas(text):
    values = parse_grid(text)
    bad = [v for v in values if not 0 < v < 1]
    if bad:
        raise ValueError(f"kappa values must lie in (0, 1): {bad}")
    return values


def _boolean(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _mode(text):
    text = text.strip()
    if text not in RELAY_ERROR_MODES:
        raise ValueError(f"relay_error_mode must be one of {RELAY_ERROR_MODES}")
    return text


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise ValueError(f"must be >= 1, got {value}")
    return value


def _nonempty(values, section, key, cfg):
    if not values:
        raise ConfigError(f"{cfg.source}: [{section}] {key}: empty grid")
    return values


@dataclass(frozen=True)
class GridPoint:
    config: SimConfig
    kappa: float


def build_sim_grid(cfg: Config) -> list:
    """Expand the sweep section into simulation configurations."""
    master = cfg.run_value("seed", int)
    frames = cfg.run_value("frames", _positive_int)
    workers = cfg.run_value("workers", _positive_int)
    mode = cfg.run_value("relay_error_mode", _mode)
    crn = cfg.run_value("common_random_numbers", _boolean)

    protocols = _nonempty(cfg.get("sweep", "protocol", _protocols), "sweep", "protocol", cfg)
    rates = _nonempty(cfg.get("sweep", "R", _rates), "sweep", "R", cfg)
    schemes = _nonempty(cfg.get("sweep", "scheme", _schemes, "fixed"), "sweep", "scheme", cfg)
    snrs = _nonempty(cfg.get("sweep", "snr_db", parse_grid), "sweep", "snr_db", cfg)
    kappas = [None]
    if "fixed" in schemes:
        kappas = _nonempty(cfg.get("sweep", "kappa", _kappas), "sweep", "kappa", cfg)
    if "ipas" in schemes and RGNC in protocols:
        raise ConfigError(f"{cfg.source}: [sweep] scheme: ipas is only defined for RCNC")

    points = []
    for protocol, R, scheme_name, snr_db in itertools.product(protocols, rates, schemes, snrs):
        for kappa in (kappas if scheme_name == "fixed" else [None]):
            scheme = AllocationScheme.fixed(kappa) if scheme_name == "fixed" else AllocationScheme(scheme_name)
            if crn:
                seed = derive_seed(master, R, snr_db)
            else:
                seed = derive_seed(master, protocol, R, scheme_name, kappa, snr_db)
            config = SimConfig(protocol, R, snr_db, scheme, frames=frames, seed=seed,
                               relay_error_mode=mode, workers=workers)
            if scheme_name == "fixed":
                shown = kappa
            elif scheme_name == "ospas":
                shown = ospas_kappa(protocol, R)
            else:
                shown = math.nan
            points.append(GridPoint(config, shown))
    return points


def simulate_rows(points, estimates) -> list:
    rows = []
    for p, e in zip(points, estimates):
        c = p.config
        rows.append([c.protocol, str(c.R), fmt(p.kappa), str(c.scheme), fmt(c.snr_db),
                     str(e.trials), str(e.errors), fmt(e.sfep), fmt(e.ci_low), fmt(e.ci_high),
                     str(e.retries)])
    return rows


def analytic_rows(cfg: Config) -> list:
    protocols = _nonempty(cfg.get("sweep", "protocol", _protocols), "sweep", "protocol", cfg)
    rates = _nonempty(cfg.get("sweep", "R", _rates), "sweep", "R", cfg)
    kappas = _nonempty(cfg.get("sweep", "kappa", _kappas), "sweep", "kappa", cfg)
    snrs = _nonempty(cfg.get("sweep", "snr_db", parse_grid), "sweep", "snr_db", cfg)
    rows = []
    for protocol, R, kappa, snr_db in itertools.product(protocols, rates, kappas, snrs):
        rho = snr_db_to_rho(snr_db)
        rows.append([protocol, str(R), fmt(kappa), fmt(snr_db), fmt(rho),
                     fmt(sfep_approx(protocol, R, kappa, rho)), fmt(performance_gap(R, kappa, rho))])
    return rows


def write_csv(header, rows, path: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def read_simulation_csv(path: str) -> list:
    """Parse a ``simulate`` CSV back into ``(row, SfepEstimate)`` pairs."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SIMULATE_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for row in reader:
            est = SfepEstimate(int(row["errors"]), int(row["frames"]), float(row["sfep"]),
                               float(row["ci_low"]), float(row["ci_high"]), int(row["retries"]))
            out.append((row, est))
    return out


def _load(args) -> Config:
    cfg = Config.from_file(args.config) if args.config else Config()
    for assignment in args.set or []:
        cfg.set(assignment)
    for key in ("seed", "frames", "workers"):
        value = getattr(args, key, None)
        if key == "workers" and value is None and os.environ.get("NC_SIM_WORKERS"):
            value = os.environ["NC_SIM_WORKERS"]
        if value is not None:
            cfg.parser.set("run", key, str(value))
    return cfg


def cmd_paf(args) -> int:
    R = args.rate
    if R not in SUPPORTED_RATES:
        raise ConfigError(f"unsupported rate R={R}; choose one of {SUPPORTED_RATES}")
    rows = [("kappa_rcnc", ospas_kappa_rcnc(R)), ("kappa_rgnc", ospas_kappa_rgnc(R))]
    if args.channel:
        try:
            mags = [_number(v) for v in args.channel.split(",")]
        except ValueError as exc:
            raise ConfigError(f"malformed channel magnitudes {args.channel!r}: {exc}") from exc
        if len(mags) != 4 or any(m < 0 for m in mags):
            raise ConfigError("--channel needs four non-negative magnitudes |g1|,|g2|,|h1|,|h2|")
        try:
            paf = ipas_rcnc(*mags, R)
        except DegenerateChannelError as exc:
            raise ConfigError(f"--channel: {exc}") from exc
        rows += [("ipas_kappa1", paf.kappa1), ("ipas_kappa2", paf.kappa2),
                 ("ipas_tau1", paf.tau1), ("ipas_tau2", paf.tau2)]
    for name, value in rows:
        print(f"{name:12s} {value:.6f}")
    return EXIT_OK


def cmd_analytic(args) -> int:
    cfg = _load(args)
    write_csv(ANALYTIC_HEADER, analytic_rows(cfg), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    points = build_sim_grid(cfg)
    log.info("simulating %d grid points", len(points))
    estimates = sweep(p.config for p in points)
    write_csv(SIMULATE_HEADER, simulate_rows(points, estimates), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rncsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paf", help="print power allocation factors")
    p.add_argument("-R", "--rate", type=int, required=True, help="bits per symbol")
    p.add_argument("--channel", help="|g1|,|g2|,|h1|,|h2| for the instantaneous-CSI allocation")
    p.set_defaults(func=cmd_paf)

    for name, func, helptext in (("analytic", cmd_analytic, "evaluate closed-form approximations"),
                                 ("simulate", cmd_simulate, "run Monte Carlo sweeps")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", nargs="?", help="INI configuration file")
        p.add_argument("-o", "--output", help="CSV output path (default stdout)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value, e.g. sweep.snr_db=30")
        p.add_argument("--seed", type=int)
        p.add_argument("--frames", type=int)
        p.add_argument("--workers", type=int, help="worker processes (default $NC_SIM_WORKERS or 1)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rncsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"rncsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
