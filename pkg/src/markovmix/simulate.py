"""Synthetic cohorts drawn from a planted mixture of Markov chains."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import InvalidInputError, MultiplicityError
from .stationary import check_stochastic, stationary
from .states import DEFAULT_SPACE, N_REDUCED, REDUCED_ORDER, StateSpace


def simulate_chain(M, T: int, rng: np.random.Generator, x0: int | None = None, initial=None) -> np.ndarray:
    """Sample ``T`` consecutive states of a Markov chain."""
    M = check_stochastic(M)
    n = M.shape[0]
    if T <= 0:
        return np.zeros(0, dtype=np.int64)
    cum = [list(np.cumsum(row)[:-1]) for row in M]
    if x0 is None:
        p = np.full(n, 1.0 / n) if initial is None else np.asarray(initial, dtype=float)
        x0 = int(rng.choice(n, p=p / p.sum()))
    u = rng.random(T - 1).tolist()
    out = [x0]
    s = x0
    for v in u:
        s = bisect_right(cum[s], v)
        out.append(s)
    return np.asarray(out, dtype=np.int64)


def _attractor(target: int, strength: float, n: int = N_REDUCED) -> np.ndarray:
    M = np.full((n, n), (1.0 - strength) / (n - 1))
    M[:, target] = strength
    return M


def _sticky(stay: float, n: int = N_REDUCED) -> np.ndarray:
    M = np.full((n, n), (1.0 - stay) / (n - 1))
    np.fill_diagonal(M, stay)
    return M


_BH, _BL, _GH, _GL = range(4)

PRESETS: dict[str, tuple[list[float], list[np.ndarray]]] = {
    "two": ([0.5, 0.5], [_attractor(_BH, 0.7), _attractor(_GL, 0.7)]),
    "three": ([0.3, 0.3, 0.4], [_attractor(_BH, 0.6), _attractor(_GL, 0.6), _sticky(0.7)]),
    "four": (
        [0.18, 0.16, 0.20, 0.46],
        [_attractor(_BH, 0.6), _attractor(_GL, 0.6), _attractor(_GH, 0.6), _sticky(0.7)],
    ),
    # one chain drifting hard into bad mood / high pain
    "pessimistic": ([1.0], [np.array([
        [0.70, 0.10, 0.10, 0.10],
        [0.45, 0.35, 0.05, 0.15],
        [0.40, 0.05, 0.40, 0.15],
        [0.30, 0.10, 0.15, 0.45],
    ])]),
}


@dataclass(frozen=True)
class CovariatePlan:
    """Per-cluster prevalence of binary conditions plus an age distribution.

    ``prevalence[name][k]`` is the chance a reporting member of cluster ``k+1``
    has the condition.
    """

    prevalence: dict[str, list[float]]
    report_rate: float = 0.9
    age_mean: list[float] = field(default_factory=list)
    age_sd: float = 12.0
    age_missing: float = 0.04
    female_share: float = 0.8

    @classmethod
    def default(cls, K: int) -> "CovariatePlan":
        last = [1.0 if k == K - 1 else 0.0 for k in range(K)]
        first = [1.0 if k == 0 else 0.0 for k in range(K)]
        return cls(
            prevalence={
                "Fibromyalgia": [0.15 + 0.30 * f for f in first],
                "Osteoarthritis": [0.35] * K,
                "Gout": [0.08 + 0.12 * f for f in last],
            },
            age_mean=[45.0 + 3.0 * k for k in range(K)],
        )


@dataclass
class SimulatedCohort:
    rows: list[tuple[str, date, int | None, int | None]]
    labels: dict[str, int]
    states: dict[str, np.ndarray]
    covariates: list[dict[str, str]] = field(default_factory=list)

    @property
    def n_complete(self) -> int:
        return sum(1 for r in self.rows if r[2] is not None and r[3] is not None)


def simulate_cohort(
    weights,
    matrices,
    S: int,
    T: int,
    seed: int = 0,
    missingness: float = 0.0,
    space: StateSpace = DEFAULT_SPACE,
    covariates: CovariatePlan | None | bool = None,
    start: date = date(2016, 1, 1),
) -> SimulatedCohort:
    """Draw ``S`` participants with ``T`` daily reports each.

    Each participant's component is drawn from ``weights``; its chain starts
    from the component's stationary distribution (uniform if not regular).
    Reduced states are mapped to raw scores uniformly within the binarization
    cut. Each row is made incomplete with probability ``missingness``, blanking
    mood, pain or both with equal chance. Labels are 1-based.
    """
    weights = np.asarray(weights, dtype=float)
    matrices = np.asarray(matrices, dtype=float)
    if matrices.ndim != 3 or matrices.shape[0] != len(weights):
        raise InvalidInputError("weights and matrices disagree on the number of components")
    if matrices.shape[1] != N_REDUCED:
        raise InvalidInputError("planted chains must be over the 4 reduced states")
    if abs(weights.sum() - 1) > 1e-9 or np.any(weights < 0):
        raise InvalidInputError("component weights must form a probability vector")
    if not 0.0 <= missingness <= 1.0:
        raise InvalidInputError("missingness must lie in [0, 1]", field="missingness")
    if S < 0 or T < 0:
        raise InvalidInputError("S and T must be nonnegative")
    K = len(weights)
    rng = np.random.default_rng(seed)
    initials = []
    for M in matrices:
        try:
            initials.append(stationary(M, crosscheck=False).x)
        except MultiplicityError:
            initials.append(np.full(N_REDUCED, 1.0 / N_REDUCED))
    score_sets = [space.scores_for(s) for s in REDUCED_ORDER]
    width = len(str(max(S, 1)))

    rows, labels, states = [], {}, {}
    for s in range(S):
        pid = f"P{s + 1:0{width}d}"
        k = int(rng.choice(K, p=weights))
        labels[pid] = k + 1
        path = simulate_chain(matrices[k], T, rng, initial=initials[k])
        states[pid] = path
        offset = int(rng.integers(0, 31))
        moods_pick = rng.random(T)
        pains_pick = rng.random(T)
        miss = rng.random(T) < missingness
        which = rng.integers(0, 3, size=T)
        for t, st in enumerate(path):
            moods, pains = score_sets[st]
            mood = moods[int(moods_pick[t] * len(moods))]
            pain = pains[int(pains_pick[t] * len(pains))]
            if miss[t]:
                if which[t] in (0, 2):
                    mood = None
                if which[t] in (1, 2):
                    pain = None
            rows.append((pid, start + timedelta(days=offset + t), mood, pain))

    cov_rows = []
    if covariates is not None and covariates is not False:
        plan = CovariatePlan.default(K) if covariates is True else covariates
        for pid in labels:
            k = labels[pid] - 1
            row = {"participant_id": pid, "sex": "F" if rng.random() < plan.female_share else "M"}
            age_mean = plan.age_mean[k] if plan.age_mean else 50.0
            age = rng.normal(age_mean, plan.age_sd)
            row["age"] = "" if rng.random() < plan.age_missing else f"{int(round(age))}"
            if rng.random() < plan.report_rate:
                has = [name for name in sorted(plan.prevalence) if rng.random() < plan.prevalence[name][k]]
                row["conditions"] = ";".join(has) if has else "none"
            else:
                row["conditions"] = ""
            cov_rows.append(row)
    return SimulatedCohort(rows, labels, states, cov_rows)
