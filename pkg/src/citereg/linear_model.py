"""Least squares with an intercept and one binary factor, plus log preprocessing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .numerics import clamp_p, f_sf

ZeroMode = Literal["drop_zeros", "add_one"]


class DegenerateDataError(ValueError):
    """The data cannot support the requested fit (empty group, no variance, ...)."""


@dataclass(frozen=True)
class Dataset:
    """Citation counts paired with a 0/1 factor."""

    citations: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.citations)
        f = np.asarray(self.factor)
        if c.shape != f.shape or c.ndim != 1:
            raise ValueError("citations and factor must be 1-D and of equal length")
        if c.size and (np.any(c < 0) or np.any(c != np.floor(c))):
            raise ValueError("citations must be non-negative integers")
        if f.size and not np.all((f == 0) | (f == 1)):
            raise ValueError("factor must contain only 0 and 1")
        object.__setattr__(self, "citations", c.astype(np.int64))
        object.__setattr__(self, "factor", f.astype(np.int8))

    def __len__(self) -> int:
        return int(self.citations.size)

    def relabelled(self) -> Dataset:
        return Dataset(self.citations, 1 - self.factor)

    def group_sizes(self) -> tuple[int, int]:
        n1 = int(self.factor.sum())
        return len(self) - n1, n1


@dataclass(frozen=True)
class LinearFit:
    b0: float
    b1: float
    se_b1: float
    f_stat: float
    df1: int
    df2: int
    p_value: float
    n_used: int
    rss: float


def log_transform(d: Dataset, mode: ZeroMode) -> tuple[np.ndarray, np.ndarray, int]:
    """Return (log response, factor, number of observations dropped)."""
    if mode == "drop_zeros":
        keep = d.citations >= 1
        y = np.log(d.citations[keep].astype(float))
        f = d.factor[keep]
        n_dropped = int(d.citations.size - keep.sum())
        if f.size == 0 or f.min() == f.max():
            raise DegenerateDataError("dropping zeros leaves a factor level with no observations")
        return y, f, n_dropped
    if mode == "add_one":
        return np.log1p(d.citations.astype(float)), d.factor.copy(), 0
    raise ValueError(f"unknown zero mode {mode!r}")


def group_moments(y: np.ndarray, factor: np.ndarray) -> tuple[int, int, float, float, float]:
    """Group sizes, group means, and the pooled within-group sum of squares."""
    y = np.asarray(y, dtype=float)
    g1 = np.asarray(factor) == 1
    n1 = int(g1.sum())
    n0 = int(y.size - n1)
    if n0 == 0 or n1 == 0:
        raise DegenerateDataError("both factor levels need observations")
    y0 = y[~g1]
    y1 = y[g1]
    m0 = float(y0.mean())
    m1 = float(y1.mean())
    rss = float(((y0 - m0) ** 2).sum() + ((y1 - m1) ** 2).sum())
    return n0, n1, m0, m1, rss


def ols_binary_fit(y, factor) -> LinearFit:
    """One-way ANOVA of y on a binary factor, reported as an F-test on (1, n-2) df."""
    n0, n1, m0, m1, rss = group_moments(y, factor)
    if n0 < 2 or n1 < 2:
        raise DegenerateDataError("each factor level needs at least two observations")
    n = n0 + n1
    df2 = n - 2
    b1 = m1 - m0
    # rounding noise when every value within each group is identical
    scale = float(np.abs(np.asarray(y, dtype=float)).max())
    if not rss > n * (1e-14 * max(1.0, scale)) ** 2:
        raise DegenerateDataError("zero residual variance")
    mse = rss / df2
    se_b1 = math.sqrt(mse * (1.0 / n0 + 1.0 / n1))
    f_stat = (b1 / se_b1) ** 2
    return LinearFit(
        b0=m0,
        b1=b1,
        se_b1=se_b1,
        f_stat=f_stat,
        df1=1,
        df2=df2,
        p_value=clamp_p(f_sf(f_stat, 1, df2)),
        n_used=n,
        rss=rss,
    )
