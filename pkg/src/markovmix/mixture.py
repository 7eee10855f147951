"""Mixture of first-order Markov chains fitted by expectation-maximisation.

Each participant ``s`` contributes a count matrix ``C[s]``. Component ``k``
has weight ``weights[k]`` and transition matrix ``matrices[k]``; the
participant log-likelihood under component ``k`` is
``sum_ij C[s,i,j] * log(matrices[k,i,j])`` (multinomial coefficient dropped).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateInputError, InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EMConfig:
    seed: int = 0
    epsilon: float = 1e-6
    max_iter: int = 1000
    smoothing: float = 0.0

    def to_dict(self) -> dict:
        return dict(seed=self.seed, epsilon=self.epsilon, max_iter=self.max_iter, smoothing=self.smoothing)


@dataclass
class EmTrace:
    log_likelihoods: list[float]
    n_iter: int
    converged: bool
    final_change: float
    seed: int
    raw_order: list[int] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)

    def is_monotone(self, slack: float = 1e-8) -> bool:
        """Whether the maximised objective never dropped by more than ``slack``.

        Without smoothing the objective is the log-likelihood itself; with
        pseudo-counts it also carries their log-prior term, and only that sum
        is guaranteed to rise.
        """
        ll = np.asarray(self.objectives or self.log_likelihoods)
        return bool(np.all(np.diff(ll) >= -slack))


@dataclass
class MixtureModel:
    weights: np.ndarray
    matrices: np.ndarray
    responsibilities: np.ndarray
    log_likelihood: float = float("nan")

    @property
    def K(self) -> int:
        return len(self.weights)

    @property
    def n_states(self) -> int:
        return self.matrices.shape[1]

    def validate(self, tol: float = 1e-9) -> None:
        if abs(self.weights.sum() - 1) > tol or np.any(self.weights < 0):
            raise InvalidInputError("mixture weights are not a probability vector")
        if np.any(self.matrices < 0) or np.any(self.matrices > 1):
            raise InvalidInputError("component transition probabilities outside [0, 1]")
        if np.max(np.abs(self.matrices.sum(axis=2) - 1)) > tol:
            raise InvalidInputError("component matrix is not row-stochastic")
        if self.responsibilities.size and np.max(np.abs(self.responsibilities.sum(axis=1) - 1)) > tol:
            raise InvalidInputError("responsibility rows do not sum to 1")


def _check_counts(counts) -> np.ndarray:
    C = np.asarray(counts, dtype=float)
    if C.ndim != 3 or C.shape[1] != C.shape[2]:
        raise InvalidInputError(f"counts must be an (S, n, n) stack, got shape {C.shape}")
    if np.any(C < 0):
        raise InvalidInputError("counts must be nonnegative")
    return C


def component_log_likelihoods(matrices: np.ndarray, C: np.ndarray) -> np.ndarray:
    """(S, K) array of ``log Lambda[s, k]``; ``-inf`` where a used cell has probability 0."""
    with np.errstate(divide="ignore"):
        logM = np.log(matrices)
    # 0 * log 0 contributes nothing
    finite = np.where(np.isfinite(logM), logM, 0.0)
    out = np.einsum("sij,kij->sk", C, finite)
    impossible = np.einsum("sij,kij->sk", (C > 0).astype(float), (~np.isfinite(logM)).astype(float)) > 0
    out[impossible] = -np.inf
    return out


def log_likelihood(model: MixtureModel, counts) -> float:
    """Total mixture log-likelihood; ``-inf`` if some participant is impossible under every component."""
    C = _check_counts(counts)
    if C.shape[1] != model.n_states:
        raise InvalidInputError("count matrices and model disagree on the number of states")
    if C.shape[0] == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    joint = component_log_likelihoods(model.matrices, C) + logw[None, :]
    per = logsumexp(joint, axis=1)
    return float(np.sum(per))


def _m_step(C: np.ndarray, gamma: np.ndarray, smoothing: float) -> tuple[np.ndarray, np.ndarray]:
    S, K = gamma.shape
    n = C.shape[1]
    weights = gamma.sum(axis=0) / S
    weighted = np.einsum("sk,sij->kij", gamma, C) + smoothing
    rows = weighted.sum(axis=2, keepdims=True)
    empty = rows[..., 0] <= 0
    matrices = np.divide(weighted, rows, out=np.full((K, n, n), 1.0 / n), where=rows > 0)
    matrices[empty] = 1.0 / n
    return weights, matrices


def _e_step(C: np.ndarray, weights: np.ndarray, matrices: np.ndarray) -> tuple[np.ndarray, float]:
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    joint = component_log_likelihoods(matrices, C) + logw[None, :]
    norm = logsumexp(joint, axis=1)
    dead = ~np.isfinite(norm)
    gamma = np.exp(joint - np.where(dead, 0.0, norm)[:, None])
    if dead.any():
        # participant impossible under every component: fall back to the prior
        gamma[dead] = weights
    gamma /= gamma.sum(axis=1, keepdims=True)
    return gamma, float(np.sum(norm))


def _log_prior(matrices: np.ndarray, smoothing: float) -> float:
    if smoothing == 0:
        return 0.0
    return float(smoothing * np.sum(np.log(matrices)))


def _fit_once(C: np.ndarray, K: int, config: EMConfig, seed) -> tuple[MixtureModel, EmTrace]:
    S = C.shape[0]
    rng = np.random.default_rng(seed)
    gamma = rng.dirichlet(np.ones(K), size=S)
    lls: list[float] = []
    objectives: list[float] = []
    converged = False
    change = float("inf")
    it = 0
    for it in range(1, config.max_iter + 1):
        weights, matrices = _m_step(C, gamma, config.smoothing)
        new_gamma, ll = _e_step(C, weights, matrices)
        lls.append(ll)
        objectives.append(ll + _log_prior(matrices, config.smoothing))
        change = float(np.max(np.abs(new_gamma - gamma)))
        gamma = new_gamma
        if change < config.epsilon:
            converged = True
            break
    weights, matrices = _m_step(C, gamma, config.smoothing)
    model = MixtureModel(weights, matrices, gamma)
    model.log_likelihood = log_likelihood(model, C)
    seed_value = seed if isinstance(seed, int) else int(seed.generate_state(1)[0])
    trace = EmTrace(lls, it, converged, change, seed_value, list(range(K)), objectives)
    return model, trace


def canonical_order(model: MixtureModel) -> list[int]:
    """Component order by descending weight; ties keep the raw order."""
    return [int(i) for i in np.argsort(-model.weights, kind="stable")]


def reorder(model: MixtureModel, order) -> MixtureModel:
    order = list(order)
    return MixtureModel(
        model.weights[order].copy(),
        model.matrices[order].copy(),
        model.responsibilities[:, order].copy(),
        model.log_likelihood,
    )


def em_fit(counts, K: int, config: EMConfig = EMConfig(), restarts: int = 1) -> tuple[MixtureModel, EmTrace]:
    """Fit a K-component mixture of Markov chains.

    Responsibilities start from independent uniform-Dirichlet rows; the M-step
    normalises responsibility-weighted counts per row (plus ``smoothing``
    pseudo-counts), and iteration stops once the largest responsibility change
    drops below ``epsilon``. With ``restarts > 1`` the run with the highest
    final log-likelihood is kept; restart ``r`` uses seed ``config.seed + r``.
    Components of the returned model are sorted by descending weight and
    ``trace.raw_order`` records the permutation applied.
    """
    C = _check_counts(counts)
    S = C.shape[0]
    if K < 1:
        raise InvalidInputError("K must be at least 1", field="K")
    if S < K:
        raise InvalidInputError(f"need at least K={K} participants, have {S}", field="K")
    if not np.any(C.sum(axis=(1, 2)) > 0):
        raise DegenerateInputError("every participant has zero observed transitions")
    if restarts < 1:
        raise InvalidInputError("restarts must be at least 1", field="restarts")

    best = None
    for r in range(restarts):
        model, trace = _fit_once(C, K, config, config.seed + r)
        log.debug("restart %d: ll=%.6f iter=%d converged=%s", r, model.log_likelihood, trace.n_iter, trace.converged)
        if best is None or model.log_likelihood > best[0].log_likelihood:
            best = (model, trace)
    model, trace = best
    order = canonical_order(model)
    trace.raw_order = order
    return reorder(model, order), trace


@dataclass(frozen=True)
class Assignment:
    participant: int
    cluster: int
    probability: float
    tied: bool


def assign_clusters(model: MixtureModel, one_based: bool = True) -> list[Assignment]:
    """Most probable cluster per participant; ties go to the lowest index."""
    G = model.responsibilities
    out = []
    for s, row in enumerate(G):
        k = int(np.argmax(row))
        tied = int(np.sum(row == row[k])) > 1
        out.append(Assignment(s, k + 1 if one_based else k, float(row[k]), tied))
    return out


def row_normalize(C) -> np.ndarray:
    """Maximum-likelihood transition matrix of a count matrix; empty rows become uniform."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    rows = C.sum(axis=1, keepdims=True)
    return np.divide(C, rows, out=np.full(C.shape, 1.0 / n), where=rows > 0)


@dataclass
class RatioTable:
    ratios: np.ndarray
    indeterminate: np.ndarray
    unbounded: np.ndarray


def transition_ratio(model: MixtureModel, pooled) -> RatioTable:
    """Elementwise component / pooled transition probability.

    Where pooled is 0 the ratio is NaN and flagged: ``indeterminate`` for 0/0,
    ``unbounded`` when the component entry is positive.
    """
    pooled = np.asarray(pooled, dtype=float)
    M = model.matrices
    zero = pooled[None] == 0
    zero = np.broadcast_to(zero, M.shape)
    ratios = np.divide(M, pooled[None], out=np.full(M.shape, np.nan), where=~zero)
    return RatioTable(ratios, zero & (M == 0), zero & (M > 0))


@dataclass
class SelectionRow:
    K: int
    nll: float
    restarts: int
    converged: bool


def select_k(counts, ks, config: EMConfig = EMConfig(), restarts: int = 5) -> list[SelectionRow]:
    """Best-of-restarts negative log-likelihood for each K, for elbow inspection."""
    ks = list(ks)
    if not ks:
        raise InvalidInputError("empty K range", field="K")
    rows = []
    for K in ks:
        model, trace = em_fit(counts, K, config, restarts=restarts)
        rows.append(SelectionRow(K, -model.log_likelihood, restarts, trace.converged))
    return rows
