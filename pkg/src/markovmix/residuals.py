"""Structured null models for pooled transition counts and Pearson residuals.

Two nulls are provided:

``uniform-offdiag``
    each source state keeps its own stay probability; every other target is
    equally likely.
``neighbor``
    on a (mood, pain) grid, the stay probability and the probabilities of a
    single-step move in either score are free; all remaining targets share the
    leftover mass equally.

Both are fitted by maximum likelihood, i.e. observed share of the row total
for every free cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidInputError
from .states import DEFAULT_SPACE, StateSpace

UNIFORM_OFFDIAG = "uniform-offdiag"
NEIGHBOR = "neighbor"

# column order of NullModelFit.neighbor_probs
NEIGHBOR_DIRECTIONS = ("pain-1", "pain+1", "mood-1", "mood+1")


@dataclass
class NullModelFit:
    model: str
    expected: np.ndarray
    probabilities: np.ndarray
    row_totals: np.ndarray
    stay_probs: np.ndarray
    neighbor_probs: np.ndarray | None = None
    remainder_probs: np.ndarray | None = None

    @property
    def defined_rows(self) -> np.ndarray:
        return self.row_totals > 0

    @property
    def n(self) -> int:
        return self.expected.shape[0]


def _as_counts(Y) -> np.ndarray:
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise InvalidInputError(f"count matrix must be square, got shape {Y.shape}")
    if np.any(Y < 0):
        raise InvalidInputError("count matrix has negative entries")
    return Y.astype(float)


def fit_model1(Y) -> NullModelFit:
    """Stay-or-move-uniformly null. Zero-total rows get NaN parameters and E = 0."""
    Y = _as_counts(Y)
    n = Y.shape[0]
    totals = Y.sum(axis=1)
    ok = totals > 0
    stay = np.full(n, np.nan)
    stay[ok] = np.diag(Y)[ok] / totals[ok]
    P = np.full((n, n), np.nan)
    off = (1.0 - stay[ok]) / (n - 1) if n > 1 else np.zeros(ok.sum())
    P[ok] = off[:, None]
    P[ok, np.flatnonzero(ok)] = stay[ok]
    E = np.zeros((n, n))
    E[ok] = totals[ok, None] * P[ok]
    return NullModelFit(UNIFORM_OFFDIAG, E, P, totals, stay)


def _neighbors(space_shape: tuple[int, int], i: int) -> list[int | None]:
    n_mood, n_pain = space_shape
    m, p = divmod(i, n_pain)
    out = []
    for dm, dp in ((0, -1), (0, 1), (-1, 0), (1, 0)):
        mm, pp = m + dm, p + dp
        out.append(mm * n_pain + pp if 0 <= mm < n_mood and 0 <= pp < n_pain else None)
    return out


def fit_model2(Y, space: StateSpace | tuple[int, int] = DEFAULT_SPACE) -> NullModelFit:
    """Stay / single-step-neighbour / uniform-otherwise null on a mood x pain grid.

    ``space`` is either a StateSpace or a ``(n_mood_levels, n_pain_levels)`` pair;
    state ``i`` is ``(mood, pain) = divmod(i, n_pain_levels)`` (row-major).
    """
    Y = _as_counts(Y)
    n = Y.shape[0]
    shape = (space.mood.size, space.pain.size) if isinstance(space, StateSpace) else tuple(space)
    if shape[0] * shape[1] != n:
        raise InvalidInputError(f"layout {shape[0]}x{shape[1]} does not match {n} states")
    totals = Y.sum(axis=1)
    stay = np.full(n, np.nan)
    nbr = np.full((n, 4), np.nan)
    remainder = np.full(n, np.nan)
    P = np.full((n, n), np.nan)
    E = np.zeros((n, n))
    for i in range(n):
        N = totals[i]
        if N <= 0:
            continue
        targets = [i] + [j for j in _neighbors(shape, i) if j is not None]
        row = np.empty(n)
        free = np.ones(n, dtype=bool)
        free[targets] = False
        row[targets] = Y[i, targets] / N
        stay[i] = row[i]
        for d, j in enumerate(_neighbors(shape, i)):
            if j is not None:
                nbr[i, d] = row[j]
        n_free = int(free.sum())
        left = max(1.0 - row[targets].sum(), 0.0)
        share = left / n_free if n_free else 0.0
        row[free] = share
        remainder[i] = share
        P[i] = row
        E[i] = N * row
    return NullModelFit(NEIGHBOR, E, P, totals, stay, nbr, remainder)


@dataclass
class ResidualReport:
    residuals: np.ndarray
    undefined: np.ndarray
    n_large: int
    mean: float
    variance: float
    histogram: tuple[np.ndarray, np.ndarray] = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        """Residuals of all defined cells, row-major."""
        return self.residuals[~self.undefined]

    @property
    def large_fraction(self) -> float:
        v = self.values
        return self.n_large / v.size if v.size else float("nan")


def pearson_residuals(Y, fit: NullModelFit, bins: int = 30) -> ResidualReport:
    """``(Y - E) / sqrt(E)``; cells with ``E == 0`` are NaN and flagged ``undefined``."""
    Y = _as_counts(Y)
    if Y.shape != fit.expected.shape:
        raise InvalidInputError(f"count matrix {Y.shape} does not match fit {fit.expected.shape}")
    E = fit.expected
    undefined = ~(E > 0)
    R = np.full(Y.shape, np.nan)
    R[~undefined] = (Y[~undefined] - E[~undefined]) / np.sqrt(E[~undefined])
    vals = R[~undefined]
    if vals.size:
        hist = np.histogram(vals, bins=bins)
        mean, var = float(vals.mean()), float(vals.var())
    else:
        hist = (np.zeros(0, dtype=int), np.zeros(0))
        mean = var = float("nan")
    return ResidualReport(R, undefined, int(np.sum(np.abs(vals) > 2)), mean, var, hist)


@dataclass
class NormalityDiagnostics:
    n: int
    mean: float
    variance: float
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    curve_x: np.ndarray
    curve_pdf: np.ndarray
    n_large: int

    def histogram_rows(self):
        for lo, hi, c, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.density):
            yield float(lo), float(hi), int(c), float(d)


def residual_normality(report: ResidualReport, bins: int = 30, curve_points: int = 200) -> NormalityDiagnostics:
    """Histogram of the defined residuals plus a normal density with matching
    mean and variance, sampled for external plotting. A zero-variance sample
    gets an empty curve."""
    vals = report.values
    if vals.size < 2:
        raise InsufficientDataError(f"need at least 2 defined residuals, have {vals.size}")
    mean, var = float(vals.mean()), float(vals.var())
    counts, edges = np.histogram(vals, bins=bins)
    width = np.diff(edges)
    density = counts / (vals.size * width)
    if var > 0:
        sd = np.sqrt(var)
        x = np.linspace(min(edges[0], mean - 4 * sd), max(edges[-1], mean + 4 * sd), curve_points)
        pdf = np.exp(-0.5 * ((x - mean) / sd) ** 2) / (sd * np.sqrt(2 * np.pi))
    else:
        x = pdf = np.zeros(0)
    return NormalityDiagnostics(vals.size, mean, var, edges, counts, density, x, pdf, report.n_large)


def simulate_counts(fit: NullModelFit, rng: np.random.Generator, row_totals=None) -> np.ndarray:
    """Draw a count matrix from a fitted null, one multinomial per defined row."""
    totals = fit.row_totals if row_totals is None else np.asarray(row_totals)
    out = np.zeros(fit.expected.shape, dtype=np.int64)
    for i in np.flatnonzero(fit.defined_rows):
        p = np.clip(fit.probabilities[i], 0.0, None)
        out[i] = rng.multinomial(int(totals[i]), p / p.sum())
    return out
