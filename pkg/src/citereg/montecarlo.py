"""Simulated citation datasets and detection rates for the five-method battery."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import DiscreteLogNormal
from .glm import logno_fit, nb_fit
from .linear_model import Dataset, log_transform, ols_binary_fit
from .rng import RngStream

DEFAULT_N_GRID = (30, 50, 100, 200, 350, 500, 750, 1000, 1500, 2000, 3000, 5000)
DEFAULT_SEED = 20140601
DEFAULT_ITERATIONS = 1000
DEFAULT_ALPHA = 0.05

# iteration index occupies the low bits of a stream id, the grid block the high bits
_BLOCK_SHIFT = 32


class Method(str, enum.Enum):
    NB_RAW = "NB_RAW"
    LOGNO_TRUNC = "LOGNO_TRUNC"
    ANOVA_LOG_TRUNC = "ANOVA_LOG_TRUNC"
    LOGNO_PLUS1 = "LOGNO_PLUS1"
    ANOVA_LOG_PLUS1 = "ANOVA_LOG_PLUS1"

    def __str__(self) -> str:
        return self.value


ALL_METHODS = tuple(Method)


class ConfigError(ValueError):
    """A simulation configuration is invalid; ``fields`` names the offenders."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.problems.items()))


@dataclass(frozen=True)
class SimConfig:
    mu0: float
    mu1: float
    sigma: float
    n: int
    iterations: int = DEFAULT_ITERATIONS
    alpha: float = DEFAULT_ALPHA
    master_seed: int = DEFAULT_SEED
    methods: tuple[Method, ...] = ALL_METHODS

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        problems = {}
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 8 and self.n % 2 == 0):
            problems["n"] = f"must be an even integer >= 8, got {self.n!r}"
        if not self.sigma > 0:
            problems["sigma"] = "must be positive"
        if not 0 < self.alpha < 1:
            problems["alpha"] = "must lie strictly between 0 and 1"
        if not (isinstance(self.iterations, (int, np.integer)) and self.iterations >= 1):
            problems["iterations"] = "must be a positive integer"
        if not self.methods:
            problems["methods"] = "at least one method is required"
        elif len(set(self.methods)) != len(self.methods):
            problems["methods"] = "duplicate method"
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class MethodResult:
    detected: bool
    p_value: float
    converged: bool
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None or not self.converged


@dataclass(frozen=True)
class DetectionSummary:
    method: Method
    n: int
    mu0: float
    mu1: float
    sigma: float
    iterations: int
    detections: int
    failures: int

    @property
    def detection_rate(self) -> float:
        return self.detections / self.iterations

    @property
    def mc_se(self) -> float:
        p = self.detection_rate
        return math.sqrt(p * (1.0 - p) / self.iterations)


@dataclass
class SimulationRun:
    """Per-iteration outcomes for one configuration, columns in ``config.methods`` order."""

    config: SimConfig
    detected: np.ndarray
    failed: np.ndarray
    p_values: np.ndarray = field(repr=False)

    def column(self, method: Method) -> int:
        return self.config.methods.index(Method(method))

    def summaries(self) -> list[DetectionSummary]:
        c = self.config
        return [
            DetectionSummary(
                method=m,
                n=c.n,
                mu0=c.mu0,
                mu1=c.mu1,
                sigma=c.sigma,
                iterations=c.iterations,
                detections=int(self.detected[:, j].sum()),
                failures=int(self.failed[:, j].sum()),
            )
            for j, m in enumerate(c.methods)
        ]

    def rate(self, method: Method) -> float:
        return float(self.detected[:, self.column(method)].mean())

    def agreement(self, a: Method, b: Method) -> float:
        """Fraction of iterations where two methods reach the same decision."""
        return float(np.mean(self.detected[:, self.column(a)] == self.detected[:, self.column(b)]))


def generate_dataset(c: SimConfig, iteration: int, block: int = 0) -> Dataset:
    """First half from the B=0 law, second half from the B=1 law, on substream (seed, iteration)."""
    stream = RngStream(c.master_seed, (block << _BLOCK_SHIFT) | iteration)
    half = c.n // 2
    c0 = DiscreteLogNormal(c.mu0, c.sigma).sample(stream, half)
    c1 = DiscreteLogNormal(c.mu1, c.sigma).sample(stream, half)
    factor = np.repeat(np.array([0, 1], dtype=np.int8), half)
    return Dataset(np.concatenate((c0, c1)), factor)


def _fit_one(d: Dataset, method: Method):
    if method is Method.NB_RAW:
        fit = nb_fit(d)
        return fit.p_value, fit.converged
    if method is Method.LOGNO_TRUNC:
        return logno_fit(d, "drop_zeros").p_value, True
    if method is Method.LOGNO_PLUS1:
        return logno_fit(d, "add_one").p_value, True
    if method is Method.ANOVA_LOG_TRUNC:
        y, f, _ = log_transform(d, "drop_zeros")
        return ols_binary_fit(y, f).p_value, True
    if method is Method.ANOVA_LOG_PLUS1:
        y, f, _ = log_transform(d, "add_one")
        return ols_binary_fit(y, f).p_value, True
    raise ValueError(f"unknown method {method!r}")


def run_battery(d: Dataset, alpha: float, methods=ALL_METHODS) -> dict[Method, MethodResult]:
    """Fit each requested method; a failing fit yields a failure record, never an exception."""
    out = {}
    for m in methods:
        m = Method(m)
        try:
            p, converged = _fit_one(d, m)
        except (ValueError, ArithmeticError) as exc:
            out[m] = MethodResult(detected=False, p_value=math.nan, converged=False, error=str(exc))
            continue
        out[m] = MethodResult(detected=converged and p < alpha, p_value=p, converged=converged)
    return out


def _run_chunk(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c, block, start, stop = args
    k = len(c.methods)
    detected = np.zeros((stop - start, k), dtype=bool)
    failed = np.zeros((stop - start, k), dtype=bool)
    pvals = np.full((stop - start, k), np.nan)
    for row, it in enumerate(range(start, stop)):
        results = run_battery(generate_dataset(c, it, block), c.alpha, c.methods)
        for j, m in enumerate(c.methods):
            r = results[m]
            detected[row, j] = r.detected
            failed[row, j] = r.failed
            pvals[row, j] = r.p_value
    return detected, failed, pvals


def _chunks(c: SimConfig, block: int, workers: int):
    size = max(1, math.ceil(c.iterations / (4 * workers)))
    return [(c, block, s, min(s + size, c.iterations)) for s in range(0, c.iterations, size)]


def simulate(c: SimConfig, block: int = 0, workers: int = 1, executor=None) -> SimulationRun:
    """Run every iteration of one configuration; output does not depend on ``workers``."""
    jobs = _chunks(c, block, workers)
    if executor is not None:
        parts = list(executor.map(_run_chunk, jobs))
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    detected, failed, pvals = (np.concatenate(x) for x in zip(*parts))
    return SimulationRun(config=c, detected=detected, failed=failed, p_values=pvals)


def detection_rate(c: SimConfig, workers: int = 1) -> list[DetectionSummary]:
    return simulate(c, workers=workers).summaries()


def sweep_runs(base: SimConfig, n_grid, workers: int = 1) -> list[SimulationRun]:
    """One run per grid size; grid position ``i`` draws from stream block ``i``."""
    n_grid = [int(n) for n in n_grid]
    configs = [replace(base, n=n) for n in n_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return [simulate(cfg, block=i, workers=workers, executor=pool) for i, cfg in enumerate(configs)]
    return [simulate(cfg, block=i) for i, cfg in enumerate(configs)]


def sweep(base: SimConfig, n_grid, workers: int = 1) -> list[DetectionSummary]:
    """Detection summaries for every grid size, ordered by (n, method)."""
    rows = [s for run in sweep_runs(base, n_grid, workers) for s in run.summaries()]
    order = {m: i for i, m in enumerate(ALL_METHODS)}
    return sorted(rows, key=lambda r: (r.n, order[r.method]))


@dataclass(frozen=True)
class Preset:
    name: str
    mu0: float
    mu1: float
    sigma: float

    def config(self, **overrides) -> SimConfig:
        return SimConfig(mu0=self.mu0, mu1=self.mu1, sigma=self.sigma, n=DEFAULT_N_GRID[0], **overrides)


FIGURE_PRESETS = {
    1: Preset("fig1", 0.5, 0.5, 1.0),
    2: Preset("fig2", 0.5, 0.5, 2.0),
    3: Preset("fig3", 0.5, 0.55, 1.0),
    4: Preset("fig4", 0.5, 0.55, 2.0),
    5: Preset("fig5", 0.5, 0.6, 1.0),
}

# null scenarios at the higher log means used as robustness checks
ROBUSTNESS_PRESETS = {
    "null_mu1": Preset("null_mu1", 1.0, 1.0, 1.0),
    "null_mu1.5": Preset("null_mu1.5", 1.5, 1.5, 1.0),
}
