"""What-if transforms on 4-state (BH, BL, GH, GL) transition matrices.

Mood improvement touches the bad-mood source rows (BH, BL): each good-mood
target (GH, GL) gains ``beta`` and the remaining bad-mood mass
``M[i,BL] + M[i,BH] - 2*beta`` is re-split ``split : 1-split`` between BL and BH.

Pain improvement touches the high-pain source rows (BH, GH): each low-pain
target (GL, BL) gains ``beta`` and the remaining high-pain mass
``M[i,GH] + M[i,BH] - 2*beta`` is re-split ``split : 1-split`` between GH and BH.

With ``preserve_split=True`` the remaining mass is divided in the row's own
original proportions instead, which makes ``beta = 0`` an exact no-op.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBetaError, InvalidInputError
from .stationary import StationaryDistribution, check_stochastic, stationary
from .states import ReducedState

BH, BL, GH, GL = (s.index for s in (ReducedState.BH, ReducedState.BL, ReducedState.GH, ReducedState.GL))

MOOD = "mood"
PAIN = "pain"

# target -> (source rows, boosted columns, (favoured, other) columns sharing the remainder)
_LAYOUT = {
    MOOD: ((BH, BL), (GL, GH), (BL, BH)),
    PAIN: ((BH, GH), (GL, BL), (GH, BH)),
}


def _layout(target: str):
    try:
        return _LAYOUT[target]
    except KeyError:
        raise InvalidInputError(f"unknown intervention target {target!r}", field="target") from None


@dataclass(frozen=True)
class InterventionSpec:
    target: str
    beta: float | str = 0.0
    split: float = 0.8
    preserve_split: bool = False

    def __post_init__(self):
        _layout(self.target)
        if not 0.0 < self.split < 1.0:
            raise InvalidInputError(f"split must lie in (0, 1), got {self.split}", field="split")
        if self.beta != "max" and float(self.beta) < 0:
            raise InvalidInputError("beta must be nonnegative", field="beta")


def max_feasible_beta(M, target: str) -> float:
    """Largest beta keeping every modified entry within [0, 1]."""
    M = check_stochastic(M)
    rows, boosted, shared = _layout(target)
    bound = np.inf
    for i in rows:
        mass = M[i, shared[0]] + M[i, shared[1]]
        bound = min(bound, mass / 2.0, 1.0 - max(M[i, boosted[0]], M[i, boosted[1]]))
    return float(max(bound, 0.0))


def _transform(M, target: str, beta: float, split: float, preserve_split: bool) -> np.ndarray:
    M = check_stochastic(M)
    if not 0.0 < split < 1.0:
        raise InvalidInputError(f"split must lie in (0, 1), got {split}", field="split")
    if beta < 0:
        raise InvalidInputError("beta must be nonnegative", field="beta")
    bound = max_feasible_beta(M, target)
    if beta > bound:
        raise InfeasibleBetaError(f"beta={beta:g} exceeds the feasible bound {bound:.12g} for {target}", bound)
    rows, boosted, (fav, other) = _layout(target)
    out = M.copy()
    for i in rows:
        mass = M[i, fav] + M[i, other]
        rest = max(mass - 2.0 * beta, 0.0)
        share = split
        if preserve_split and mass > 0:
            share = M[i, fav] / mass
        out[i, boosted[0]] = M[i, boosted[0]] + beta
        out[i, boosted[1]] = M[i, boosted[1]] + beta
        out[i, fav] = share * rest
        out[i, other] = (1.0 - share) * rest
    return out


def improve_mood(M, beta: float, split: float = 0.8, preserve_split: bool = False) -> np.ndarray:
    return _transform(M, MOOD, beta, split, preserve_split)


def improve_pain(M, beta: float, split: float = 0.8, preserve_split: bool = False) -> np.ndarray:
    return _transform(M, PAIN, beta, split, preserve_split)


def apply(M, spec: InterventionSpec) -> tuple[np.ndarray, float]:
    """Apply ``spec`` to one matrix; returns the modified matrix and the beta used."""
    beta = max_feasible_beta(M, spec.target) if spec.beta == "max" else float(spec.beta)
    return _transform(M, spec.target, beta, spec.split, spec.preserve_split), beta


@dataclass
class InterventionResult:
    cluster: int
    beta: float
    original: np.ndarray
    modified: np.ndarray
    original_stationary: StationaryDistribution
    modified_stationary: StationaryDistribution

    @property
    def deltas(self) -> np.ndarray:
        return self.modified_stationary.x - self.original_stationary.x


def intervene(matrices, spec: InterventionSpec) -> list[InterventionResult]:
    """Transform each cluster matrix and compare stationary distributions.

    ``matrices`` is a (K, 4, 4) stack or a fitted MixtureModel; clusters are
    numbered from 1.
    """
    stack = getattr(matrices, "matrices", matrices)
    stack = np.asarray(stack, dtype=float)
    if stack.ndim != 3 or stack.shape[1:] != (4, 4):
        raise InvalidInputError(f"expected a stack of 4x4 matrices, got shape {stack.shape}")
    results = []
    for k, M in enumerate(stack, start=1):
        modified, beta = apply(M, spec)
        results.append(InterventionResult(k, beta, M, modified, stationary(M), stationary(modified)))
    return results


@dataclass
class MonotonicityProbe:
    betas: np.ndarray
    boosted_mass: np.ndarray

    @property
    def non_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.boosted_mass) >= -1e-12))


def monotonicity_probe(M, target: str, n_points: int = 11, split: float = 0.8) -> MonotonicityProbe:
    """Stationary mass on the boosted states over a beta grid from 0 to the bound.

    Reported as an empirical observation; nothing guarantees monotonicity.
    """
    _, boosted, _ = _layout(target)
    bound = max_feasible_beta(M, target)
    betas = np.linspace(0.0, bound, n_points)
    mass = []
    for b in betas:
        x = stationary(_transform(M, target, float(b), split, False), crosscheck=False).x
        mass.append(x[list(boosted)].sum())
    return MonotonicityProbe(betas, np.asarray(mass))
