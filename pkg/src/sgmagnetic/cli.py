"""Command-line interface: sweep, decimate, check and ladder."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checks, fileio
from .decimation import dirichlet_spectrum_decimation
from .forms import b_form
from .ladder import crosscheck_neumann
from .magnetic import beta_sweep

LEVEL_CAP = 7
COMMANDS = ("sweep", "decimate", "check", "ladder")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    level: int = 4
    boundary: str = "dirichlet"
    field: str = ".:1"
    beta_start: float = 0.0
    beta_end: float = 2.0
    beta_steps: int = 81
    cutoff: float = 160.0
    out: str | None = None
    svg: str | None = None
    tol: float | None = None
    jobs: int = 1
    level_cap: int = LEVEL_CAP
    perturb_b_form: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not 1 <= self.level <= self.level_cap:
            raise ConfigError(f"level {self.level} outside 1..{self.level_cap}")
        if self.boundary not in ("dirichlet", "neumann"):
            raise ConfigError(f"boundary must be dirichlet or neumann, got {self.boundary!r}")
        if self.beta_steps < 1:
            raise ConfigError("beta steps must be at least 1")
        if not self.cutoff > 0:
            raise ConfigError("cutoff must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    def betas(self) -> np.ndarray:
        if self.beta_steps == 1:
            return np.array([self.beta_start])
        return np.linspace(self.beta_start, self.beta_end, self.beta_steps)


def _coerce(name, value):
    kind = {f.name: f.type for f in dataclasses.fields(RunConfig)}[name]
    kind = str(kind)
    try:
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            return float(value)
        if kind.startswith("bool"):
            return str(value).strip().lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then flags given on the command line."""
    values = {}
    if args.config:
        known = {f.name for f in dataclasses.fields(RunConfig)} - {"command"}
        for k, v in fileio.read_config(args.config).items():
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}")
            values[k] = _coerce(k, v)
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        values[k] = v
    return RunConfig(command=args.command, **values).validate()


def _emit(text, path):
    if path:
        return
    sys.stdout.write(text)


def cmd_sweep(cfg: RunConfig) -> int:
    spec = fileio.parse_field_spec(cfg.field)
    table = beta_sweep(cfg.level, spec, cfg.betas(), cfg.boundary, cfg.cutoff, cfg.jobs)
    _emit(fileio.write_sweep_csv(table, cfg.out), cfg.out)
    if cfg.svg:
        fileio.sweep_scatter(table, cutoff=cfg.cutoff, y_label="renormalized eigenvalue").write(cfg.svg)
    return 0


def cmd_decimate(cfg: RunConfig) -> int:
    entries = dirichlet_spectrum_decimation(cfg.level, cfg.cutoff)
    _emit(fileio.write_decimation_csv(entries, cfg.out), cfg.out)
    return 0


def cmd_ladder(cfg: RunConfig) -> int:
    tol = cfg.tol if cfg.tol is not None else 5e-2
    report = crosscheck_neumann(max(cfg.level, 2), cfg.betas(), cfg.cutoff, tol, jobs=cfg.jobs)
    _emit(fileio.write_ladder_csv(report, cfg.out), cfg.out)
    print(f"# fitted scale {report.scale:.10g}; worst cosine error {report.max_cosine_error:.3g}", file=sys.stderr)
    return 0


def _perturbed_b_form(hole=""):
    return 1.001 * b_form(hole)


def cmd_check(cfg: RunConfig) -> int:
    factory = _perturbed_b_form if cfg.perturb_b_form else b_form
    report = checks.run_checks(min(cfg.level, 4), factory)
    text = report.format() + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    sys.stdout.write(text)
    return 0 if report.passed else 1


HANDLERS = {"sweep": cmd_sweep, "decimate": cmd_decimate, "check": cmd_check, "ladder": cmd_ladder}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgmagnetic", description="Magnetic Laplacians on Sierpinski gasket graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "eigenvalues of the magnetic Laplacian over a beta grid (CSV, optional SVG)",
        "decimate": "Dirichlet spectrum from spectral decimation records (CSV)",
        "check": "run the invariant suites; exit status 1 on failure",
        "ladder": "compare level-m Neumann spectra with the closed-form formula (CSV)",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        # None means "not given", so config-file values survive
        s.add_argument("--level", type=int)
        s.add_argument("--boundary", choices=("dirichlet", "neumann"))
        s.add_argument("--field", help="field spec, e.g. '.:1' or '.:1.5,01:6.28'")
        s.add_argument("--beta-start", type=float)
        s.add_argument("--beta-end", type=float)
        s.add_argument("--beta-steps", type=int)
        s.add_argument("--cutoff", type=float)
        s.add_argument("--out", help="output path (stdout if omitted)")
        s.add_argument("--svg", help="scatter plot path (sweep only)")
        s.add_argument("--config", help="flat 'key = value' file; flags override it")
        s.add_argument("--jobs", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--level-cap", type=int, help=argparse.SUPPRESS)
        if name == "check":
            s.add_argument(
                "--perturb-b-form", action="store_true", default=None,
                help="test mode: scale b_form by 1.001 so the h_norm suite must fail",
            )
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
