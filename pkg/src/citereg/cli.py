"""Command-line front end.

    citereg figure 3 --iterations 200 --out-dir out/
    citereg sweep experiment.json --threads 4
    citereg fit data.csv --zero-policy auto

Exit codes: 0 success, 2 validation error, 3 runtime or data error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .linear_model import DegenerateDataError
from .montecarlo import (
    ALL_METHODS,
    DEFAULT_ALPHA,
    DEFAULT_ITERATIONS,
    DEFAULT_N_GRID,
    DEFAULT_SEED,
    FIGURE_PRESETS,
    ROBUSTNESS_PRESETS,
    Method,
    SimConfig,
    sweep,
)
from .output import DataFormatError, plain_number, read_citation_csv, render_svg, results_csv_text
from .realdata import ZERO_POLICIES, fit_battery

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

CONFIG_KEYS = ("mu0", "mu1", "sigma", "n_grid", "iterations", "alpha", "seed", "methods", "output_prefix")
REQUIRED_KEYS = ("mu0", "mu1", "sigma")


class ValidationError(ValueError):
    def __init__(self, problems: dict[str, str]):
        self.problems = problems
        super().__init__("invalid configuration: " + "; ".join(f"{k}: {v}" for k, v in problems.items()))


@dataclass
class ExperimentConfig:
    mu0: float
    mu1: float
    sigma: float
    n_grid: list[int] = field(default_factory=lambda: list(DEFAULT_N_GRID))
    iterations: int = DEFAULT_ITERATIONS
    alpha: float = DEFAULT_ALPHA
    seed: int = DEFAULT_SEED
    methods: list[str] = field(default_factory=lambda: [m.value for m in ALL_METHODS])
    output_prefix: str = "sweep"

    def sim_config(self) -> SimConfig:
        return SimConfig(
            mu0=self.mu0,
            mu1=self.mu1,
            sigma=self.sigma,
            n=self.n_grid[0],
            iterations=self.iterations,
            alpha=self.alpha,
            master_seed=self.seed,
            methods=tuple(Method(m) for m in self.methods),
        )

    def manifest(self) -> list[str]:
        """Everything needed to reproduce the rows; the output location is left out."""
        resolved = {k: v for k, v in asdict(self).items() if k != "output_prefix"}
        return [
            f"build: citereg {__version__} numpy {np.__version__}",
            "config: " + json.dumps(resolved, sort_keys=True, separators=(",", ":")),
        ]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def validate_config(raw) -> ExperimentConfig:
    """Check a decoded JSON object, reporting every bad key at once."""
    if not isinstance(raw, dict):
        raise ValidationError({"<root>": "configuration must be a JSON object"})
    problems: dict[str, str] = {}
    for k in raw:
        if k not in CONFIG_KEYS:
            problems[k] = "unknown key"
    for k in REQUIRED_KEYS:
        if k not in raw:
            problems[k] = "required key missing"
    for k in ("mu0", "mu1"):
        if k in raw and not _is_real(raw[k]):
            problems[k] = "must be a finite number"
    if "sigma" in raw and not (_is_real(raw["sigma"]) and raw["sigma"] > 0):
        problems["sigma"] = "must be a positive number"
    if "n_grid" in raw:
        g = raw["n_grid"]
        if not (isinstance(g, list) and g and all(_is_int(n) and n >= 8 and n % 2 == 0 for n in g)):
            problems["n_grid"] = "must be a non-empty array of even integers >= 8"
        elif len(set(g)) != len(g):
            problems["n_grid"] = "duplicate sample sizes"
    if "iterations" in raw and not (_is_int(raw["iterations"]) and raw["iterations"] >= 1):
        problems["iterations"] = "must be a positive integer"
    if "alpha" in raw and not (_is_real(raw["alpha"]) and 0 < raw["alpha"] < 1):
        problems["alpha"] = "must lie strictly between 0 and 1"
    if "seed" in raw and not (_is_int(raw["seed"]) and -(2**63) <= raw["seed"] < 2**64):
        problems["seed"] = "must be a 64-bit integer"
    if "methods" in raw:
        ms = raw["methods"]
        names = {m.value for m in Method}
        if not (isinstance(ms, list) and ms and all(isinstance(m, str) and m in names for m in ms)):
            problems["methods"] = f"must be a non-empty array drawn from {sorted(names)}"
        elif len(set(ms)) != len(ms):
            problems["methods"] = "duplicate method"
    if "output_prefix" in raw and not (isinstance(raw["output_prefix"], str) and raw["output_prefix"]):
        problems["output_prefix"] = "must be a non-empty string"
    if problems:
        raise ValidationError(problems)
    cfg = ExperimentConfig(**raw)
    cfg.mu0, cfg.mu1, cfg.sigma, cfg.alpha = float(cfg.mu0), float(cfg.mu1), float(cfg.sigma), float(cfg.alpha)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError({"<file>": f"cannot read {path}: {exc.strerror}"}) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError({"<json>": f"{path}: line {exc.lineno}: {exc.msg}"}) from exc
    return validate_config(raw)


def preset_config(figure: str) -> ExperimentConfig:
    if figure.isdigit() and int(figure) in FIGURE_PRESETS:
        p = FIGURE_PRESETS[int(figure)]
    elif figure in ROBUSTNESS_PRESETS:
        p = ROBUSTNESS_PRESETS[figure]
    else:
        known = [str(k) for k in FIGURE_PRESETS] + list(ROBUSTNESS_PRESETS)
        raise ValidationError({"figure": f"unknown preset {figure!r}; choose from {known}"})
    return ExperimentConfig(mu0=p.mu0, mu1=p.mu1, sigma=p.sigma, output_prefix=p.name)


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    problems = {}
    if args.seed is not None:
        cfg.seed = args.seed
    if args.iterations is not None:
        if args.iterations < 1:
            problems["iterations"] = "must be a positive integer"
        cfg.iterations = args.iterations
    if args.alpha is not None:
        if not 0 < args.alpha < 1:
            problems["alpha"] = "must lie strictly between 0 and 1"
        cfg.alpha = args.alpha
    if args.threads is not None and args.threads < 1:
        problems["threads"] = "must be a positive integer"
    if problems:
        raise ValidationError(problems)
    return cfg


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path = ".", threads: int = 1, title: str = "") -> tuple[Path, Path]:
    """Sweep ``cfg`` and write ``<prefix>_results.csv`` and ``<prefix>_fig.svg``."""
    rows = sweep(cfg.sim_config(), cfg.n_grid, workers=threads)
    base = Path(out_dir) / cfg.output_prefix
    csv_path = base.parent / f"{base.name}_results.csv"
    svg_path = base.parent / f"{base.name}_fig.svg"
    _write(csv_path, results_csv_text(rows, cfg.manifest()))
    if not title:
        title = (
            f"log means {plain_number(cfg.mu0)} / {plain_number(cfg.mu1)}, "
            f"log SD {plain_number(cfg.sigma)}, {cfg.iterations} iterations"
        )
    _write(svg_path, render_svg(rows, cfg.alpha, title))
    return csv_path, svg_path


def cmd_figure(args) -> int:
    cfg = apply_overrides(preset_config(args.figure), args)
    if args.prefix:
        cfg.output_prefix = args.prefix
    return _run_and_report(cfg, args)


def cmd_sweep(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    return _run_and_report(cfg, args)


def _run_and_report(cfg: ExperimentConfig, args) -> int:
    for line in cfg.manifest():
        print(f"manifest {line}")
    csv_path, svg_path = run_experiment(cfg, args.out_dir, args.threads or 1)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    return EXIT_OK


def _fmt(x: float, digits: int = 6) -> str:
    return "nan" if math.isnan(x) else f"{x:.{digits}g}"


def fit_report_text(report, source: str) -> tuple[str, str]:
    """(CSV report, human-readable table)."""
    head = [
        f"# source: {source}",
        f"# n: {report.n}",
        f"# zeros: {report.zeros}",
        f"# alpha: {plain_number(report.alpha)}",
        f"# zero_policy: {report.policy}",
    ]
    zc = report.zero_check
    if zc is not None:
        head.append(
            f"# zero_fraction_observed: {zc.observed:.6f} expected: {zc.expected:.6f} "
            f"se: {zc.se:.6f} zero_inflation: {'flagged' if zc.flagged else 'not flagged'}"
        )
    lines = head + ["method,n_used,b0,b1,se_b1,p_value,detected,converged,error"]
    for m in report.methods:
        err = m.error.replace(",", ";")
        lines.append(
            f"{m.method.value},{m.n_used},{_fmt(m.b0, 10)},{_fmt(m.b1, 10)},{_fmt(m.se_b1, 10)},"
            f"{_fmt(m.p_value, 10)},{int(m.detected)},{int(m.converged)},{err}"
        )
    csv_text = "\n".join(lines) + "\n"

    table = [
        f"n = {report.n}, zeros = {report.zeros} ({report.zeros / report.n:.1%}), alpha = {plain_number(report.alpha)}",
        f"{'method':<16}{'n_used':>8}{'b1':>12}{'se(b1)':>12}{'p':>12}  detected",
    ]
    for m in report.methods:
        if m.error:
            table.append(f"{m.method.value:<16}{'-':>8}  failed: {m.error}")
            continue
        flag = "yes" if m.detected else "no"
        if not m.converged:
            flag += " (not converged)"
        table.append(f"{m.method.value:<16}{m.n_used:>8}{_fmt(m.b1):>12}{_fmt(m.se_b1):>12}{_fmt(m.p_value):>12}  {flag}")
    if zc is not None:
        if zc.flagged:
            table.append(
                f"zero inflation flagged: {zc.observed:.3f} observed vs {zc.expected:.3f} expected "
                "from a zero-truncated discrete lognormal fit; rely on the *_TRUNC methods"
            )
        else:
            table.append(f"zero share {zc.observed:.3f} is consistent with the fitted {zc.expected:.3f}")
    return csv_text, "\n".join(table)


def cmd_fit(args) -> int:
    if not 0 < args.alpha < 1:
        raise ValidationError({"alpha": "must lie strictly between 0 and 1"})
    data = read_citation_csv(args.data)
    report = fit_battery(data, args.alpha, args.zero_policy)
    csv_text, table = fit_report_text(report, str(args.data))
    prefix = args.prefix or Path(args.data).stem
    out = Path(args.out_dir) / f"{prefix}_fit.csv"
    _write(out, csv_text)
    print(table)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="citereg", description="Regression strategies for citation counts.")
    p.add_argument("--version", action="version", version=f"citereg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--seed", type=int, help="master seed (64-bit integer)")
        sp.add_argument("--iterations", type=int, help="datasets per sample size")
        sp.add_argument("--alpha", type=float, help="significance level")
        sp.add_argument("--threads", type=int, help="worker processes (results do not depend on it)")
        sp.add_argument("--out-dir", default=".", help="directory for output files")

    fig = sub.add_parser("figure", help="reproduce a figure preset (1-5, null_mu1, null_mu1.5)")
    fig.add_argument("figure")
    fig.add_argument("--prefix", help="output file prefix (default: preset name)")
    run_flags(fig)
    fig.set_defaults(func=cmd_figure)

    sw = sub.add_parser("sweep", help="run a sweep described by a JSON config")
    sw.add_argument("config")
    run_flags(sw)
    sw.set_defaults(func=cmd_sweep)

    fit = sub.add_parser("fit", help="apply the model battery to a citations,factor CSV")
    fit.add_argument("data")
    fit.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    fit.add_argument("--zero-policy", choices=ZERO_POLICIES, default="auto")
    fit.add_argument("--out-dir", default=".")
    fit.add_argument("--prefix", help="report file prefix (default: input file stem)")
    fit.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataFormatError, DegenerateDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
