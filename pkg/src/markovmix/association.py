"""Cluster-vs-covariate association statistics.

A covariate group (e.g. diagnosed conditions, pain sites) is given per
participant as a set of flags, or ``None`` if the participant did not report
that group at all. Each flag is treated as an independent binary membership.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidInputError, ZeroCellError

Z95 = 1.96


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Rows: has covariate / lacks it. Columns: in cluster / in other clusters."""

    n11: int
    n12: int
    n21: int
    n22: int

    def __post_init__(self):
        if min(self.n11, self.n12, self.n21, self.n22) < 0:
            raise InvalidInputError("contingency counts must be nonnegative")
        if self.total <= 0:
            raise InvalidInputError("contingency table is empty")

    @property
    def total(self) -> int:
        return self.n11 + self.n12 + self.n21 + self.n22

    def cells(self) -> dict[str, int]:
        return {"n11": self.n11, "n12": self.n12, "n21": self.n21, "n22": self.n22}

    def swap_rows(self) -> "ContingencyTable2x2":
        return ContingencyTable2x2(self.n21, self.n22, self.n11, self.n12)


@dataclass(frozen=True)
class OddsRatioResult:
    log_or: float
    std_error: float
    ci_low: float
    ci_high: float
    corrected: bool = False


def log_odds_ratio(table: ContingencyTable2x2, correction: bool = False) -> OddsRatioResult:
    """Log odds ratio with its asymptotic standard error and a 95% Wald interval.

    A zero cell raises ZeroCellError unless ``correction`` adds 0.5 to every cell
    (Haldane-Anscombe).
    """
    cells = table.cells()
    if correction:
        cells = {k: v + 0.5 for k, v in cells.items()}
    else:
        for name, v in cells.items():
            if v == 0:
                raise ZeroCellError(f"cell {name} is zero; log odds ratio undefined", cell=name)
    a, b, c, d = cells["n11"], cells["n12"], cells["n21"], cells["n22"]
    # fsum is correctly rounded, so swapping rows negates L and keeps se bit for bit
    L = math.fsum((math.log(a), math.log(d), -math.log(b), -math.log(c)))
    se = math.sqrt(math.fsum((1 / a, 1 / b, 1 / c, 1 / d)))
    return OddsRatioResult(L, se, L - Z95 * se, L + Z95 * se, correction)


@dataclass
class Coverage:
    n_reporting: int
    excluded: list[str] = field(default_factory=list)

    @property
    def n_excluded(self) -> int:
        return len(self.excluded)


def _reporting(assignments: Mapping[str, int], flags: Mapping[str, frozenset | set | None]):
    reporting, excluded = [], []
    for pid in sorted(assignments):
        if flags.get(pid) is None:
            excluded.append(pid)
        else:
            reporting.append(pid)
    return reporting, excluded


def covariate_names(flags: Mapping[str, frozenset | set | None]) -> list[str]:
    names = set()
    for f in flags.values():
        if f:
            names.update(f)
    return sorted(names)


def build_table(
    assignments: Mapping[str, int],
    flags: Mapping[str, frozenset | set | None],
    cluster: int,
    covariate: str,
) -> tuple[ContingencyTable2x2 | None, Coverage]:
    """Tally the 2x2 table for one (cluster, covariate) pair.

    Returns ``None`` for the table when no participant reports the group.
    """
    if cluster not in set(assignments.values()):
        raise InvalidInputError(f"unknown cluster {cluster}", field="cluster")
    known = covariate_names(flags)
    reporting, excluded = _reporting(assignments, flags)
    coverage = Coverage(len(reporting), excluded)
    if not reporting:
        return None, coverage
    if covariate not in known:
        raise InvalidInputError(f"unknown covariate {covariate!r}", field="covariate")
    n = [[0, 0], [0, 0]]
    for pid in reporting:
        row = 0 if covariate in flags[pid] else 1
        col = 0 if assignments[pid] == cluster else 1
        n[row][col] += 1
    return ContingencyTable2x2(n[0][0], n[0][1], n[1][0], n[1][1]), coverage


@dataclass
class OddsRow:
    cluster: int
    covariate: str
    table: ContingencyTable2x2
    result: OddsRatioResult | None
    zero_cell: str | None = None


def odds_ratio_rows(
    assignments: Mapping[str, int],
    flags: Mapping[str, frozenset | set | None],
    covariates: list[str] | None = None,
    correction: bool = False,
) -> tuple[list[OddsRow], Coverage]:
    """One row per (covariate, cluster), covariate-major, clusters ascending.

    Zero-cell tables without correction keep ``result=None`` and name the cell.
    """
    covariates = covariate_names(flags) if covariates is None else covariates
    clusters = sorted(set(assignments.values()))
    rows = []
    coverage = Coverage(0)
    for cov in covariates:
        for k in clusters:
            table, coverage = build_table(assignments, flags, k, cov)
            if table is None:
                continue
            try:
                rows.append(OddsRow(k, cov, table, log_odds_ratio(table, correction)))
            except ZeroCellError as exc:
                rows.append(OddsRow(k, cov, table, None, exc.cell))
    return rows, coverage


@dataclass
class Proportions:
    clusters: list[int]
    covariates: list[str]
    within_cluster: np.ndarray  # [cluster, covariate]: share of the cluster's reporters with the flag
    across_clusters: np.ndarray  # [covariate, cluster]: share of flag holders in each cluster
    cluster_reporters: np.ndarray
    covariate_holders: np.ndarray

    @property
    def empty_clusters(self) -> list[int]:
        return [k for k, n in zip(self.clusters, self.cluster_reporters) if n == 0]


def covariate_proportions(
    assignments: Mapping[str, int],
    flags: Mapping[str, frozenset | set | None],
    covariates: list[str] | None = None,
) -> Proportions:
    covariates = covariate_names(flags) if covariates is None else covariates
    clusters = sorted(set(assignments.values()))
    reporting, _ = _reporting(assignments, flags)
    counts = np.zeros((len(clusters), len(covariates)), dtype=np.int64)
    reporters = np.zeros(len(clusters), dtype=np.int64)
    kpos = {k: i for i, k in enumerate(clusters)}
    cpos = {c: j for j, c in enumerate(covariates)}
    for pid in reporting:
        i = kpos[assignments[pid]]
        reporters[i] += 1
        for c in flags[pid]:
            if c in cpos:
                counts[i, cpos[c]] += 1
    holders = counts.sum(axis=0)
    within = np.divide(counts, reporters[:, None], out=np.zeros(counts.shape), where=reporters[:, None] > 0)
    across = np.divide(counts.T, holders[:, None], out=np.zeros(counts.T.shape), where=holders[:, None] > 0)
    return Proportions(clusters, covariates, within, across, reporters, holders)


@dataclass
class GroupSummaryRow:
    cluster: str
    group: str
    n: int
    n_responding: int
    mean: float | None

    @property
    def response_rate(self) -> float:
        return 100.0 * self.n_responding / self.n if self.n else 0.0


def _to_float(v) -> float | None:
    if v is None:
        return None
    if isinstance(v, (int, float)):
        return None if isinstance(v, float) and math.isnan(v) else float(v)
    text = str(v).strip()
    if not text or text.upper() in ("NA", "NAN"):
        return None
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"non-numeric covariate value {text!r}") from None


def group_summary(
    assignments: Mapping[str, int],
    values: Mapping[str, object],
    groups: Mapping[str, str | None] | None = None,
) -> list[GroupSummaryRow]:
    """Mean of a numeric covariate and percent responding per (cluster, group).

    An ``Overall`` cluster row is included for every group. Without ``groups``
    the single group is ``all``; participants with no group value fall in ``NA``.
    """
    def group_of(pid):
        if groups is None:
            return "all"
        g = groups.get(pid)
        return g if g else "NA"

    cells: dict[tuple[str, str], list] = {}
    for pid in sorted(assignments):
        v = _to_float(values.get(pid))
        g = group_of(pid)
        for key in ((f"Cluster {assignments[pid]}", g), ("Overall", g)):
            cells.setdefault(key, []).append(v)
    rows = []
    clusters = ["Overall"] + [f"Cluster {k}" for k in sorted(set(assignments.values()))]
    group_keys = sorted({g for (_, g) in cells})
    for g in group_keys:
        for c in clusters:
            vals = cells.get((c, g), [])
            present = [v for v in vals if v is not None]
            rows.append(GroupSummaryRow(c, g, len(vals), len(present), float(np.mean(present)) if present else None))
    return rows
