"""Stationary distributions of finite transition matrices."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InvalidInputError, MultiplicityError

ROW_SUM_TOL = 1e-9


def check_stochastic(M, tol: float = ROW_SUM_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"transition matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("transition matrix has non-finite entries")
    if np.any(M < -tol) or np.any(M > 1 + tol):
        raise InvalidInputError("transition matrix entries must lie in [0, 1]")
    worst = np.max(np.abs(M.sum(axis=1) - 1.0))
    if worst > tol:
        raise InvalidInputError(f"transition matrix is not row-stochastic (max row-sum error {worst:.3g})")
    return M


def is_regular(M, max_power: int | None = None) -> bool:
    """True iff some power ``M**t`` with ``t <= max_power`` (default n**2) is strictly positive."""
    M = check_stochastic(M)
    n = M.shape[0]
    max_power = n * n if max_power is None else max_power
    A = (M > 0).astype(np.int64)
    P = A.copy()
    for _ in range(max_power):
        if P.all():
            return True
        P = ((P @ A) > 0).astype(np.int64)
    return False


def _period(adj: np.ndarray, nodes: np.ndarray) -> int:
    # gcd of level differences along edges of a BFS tree within one class
    sub = adj[np.ix_(nodes, nodes)]
    level = {0: 0}
    queue = [0]
    g = 0
    while queue:
        u = queue.pop(0)
        for v in np.flatnonzero(sub[u]):
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = gcd(g, level[u] + 1 - level[v])
    return g


def chain_structure(M) -> dict:
    """Communicating classes, which are closed, transient states and periods."""
    M = check_stochastic(M)
    adj = M > 0
    _, labels = connected_components(adj, directed=True, connection="strong")
    classes = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    closed, transient, periods = [], [], []
    for nodes in classes:
        outside = np.setdiff1d(np.arange(M.shape[0]), nodes)
        if adj[np.ix_(nodes, outside)].any():
            transient.extend(int(i) for i in nodes)
        else:
            closed.append([int(i) for i in nodes])
            periods.append(_period(adj, nodes))
    return {"closed_classes": closed, "transient_states": sorted(transient), "periods": periods}


def describe_irregularity(M) -> str:
    s = chain_structure(M)
    parts = []
    if len(s["closed_classes"]) > 1:
        parts.append(f"reducible with {len(s['closed_classes'])} closed classes {s['closed_classes']}")
    if s["transient_states"]:
        parts.append(f"transient states {s['transient_states']}")
    periodic = [(c, d) for c, d in zip(s["closed_classes"], s["periods"]) if d > 1]
    for c, d in periodic:
        parts.append(f"periodic class {c} with period {d}")
    return "; ".join(parts) or "not regular"


@dataclass(frozen=True)
class StationaryDistribution:
    x: np.ndarray
    residual: float
    method: str
    crosscheck_gap: float | None = None

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, i):
        return self.x[i]


def _direct(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    A = M.T - np.eye(n)
    A[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def power_iteration(M, tol: float = 1e-14, max_iter: int = 100_000) -> np.ndarray:
    M = check_stochastic(M)
    n = M.shape[0]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = x @ M
        if np.max(np.abs(nxt - x)) < tol:
            return nxt / nxt.sum()
        x = nxt
    return x / x.sum()


def stationary(M, max_power: int | None = None, crosscheck: bool = True) -> StationaryDistribution:
    """Unique stationary distribution of a regular chain.

    Solves ``(M^T - I) x = 0`` with one equation replaced by ``sum(x) = 1``.
    Non-regular input raises MultiplicityError describing the chain structure.
    """
    M = check_stochastic(M)
    if not is_regular(M, max_power):
        raise MultiplicityError(
            f"stationary distribution not guaranteed unique: {describe_irregularity(M)}",
            structure=chain_structure(M),
        )
    x = _direct(M)
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    gap = None
    if crosscheck:
        gap = float(np.max(np.abs(power_iteration(M) - x)))
    residual = float(np.max(np.abs(x @ M - x)))
    return StationaryDistribution(x, residual, "direct", gap)
