"""Ordinal score scales, compound (mood, pain) states and the reduced 4-state space.

The reduced space has a fixed canonical order ``BH, BL, GH, GL`` which every
matrix in the package uses for both rows and columns. The compound space is
ordered row-major by ``(mood, pain)`` ascending.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import InvalidInputError, SchemaError


class ReducedState(enum.Enum):
    BH = "BH"
    BL = "BL"
    GH = "GH"
    GL = "GL"

    @property
    def good_mood(self) -> bool:
        return self.value[0] == "G"

    @property
    def high_pain(self) -> bool:
        return self.value[1] == "H"

    @property
    def index(self) -> int:
        return REDUCED_ORDER.index(self)

    @classmethod
    def from_parts(cls, good_mood: bool, high_pain: bool) -> "ReducedState":
        return cls(("G" if good_mood else "B") + ("H" if high_pain else "L"))

    def __str__(self):
        return self.value


REDUCED_ORDER = (ReducedState.BH, ReducedState.BL, ReducedState.GH, ReducedState.GL)
REDUCED_LABELS = tuple(s.value for s in REDUCED_ORDER)
N_REDUCED = len(REDUCED_ORDER)


def index_of(state: ReducedState | str) -> int:
    """Canonical index of a reduced state (BH=0, BL=1, GH=2, GL=3)."""
    return ReducedState(state if isinstance(state, str) else state.value).index


def state_of(index: int) -> ReducedState:
    if not 0 <= index < N_REDUCED:
        raise InvalidInputError(f"reduced-state index {index} outside [0, {N_REDUCED})", field="index")
    return REDUCED_ORDER[index]


@dataclass(frozen=True)
class OrdinalScale:
    """A Likert-type scale with levels ``1..k``."""

    name: str
    descriptions: tuple[str, ...]
    higher_is_better: bool = True

    def __post_init__(self):
        if len(self.descriptions) < 2:
            raise SchemaError(f"scale {self.name!r} needs at least 2 levels")

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.descriptions) + 1))

    @property
    def size(self) -> int:
        return len(self.descriptions)

    def contains(self, score: int) -> bool:
        return 1 <= score <= self.size

    def describe(self, score: int) -> str:
        return self.descriptions[score - 1]


@dataclass(frozen=True)
class CompoundState:
    mood: int
    pain: int


@dataclass(frozen=True)
class BinarizationRule:
    """Which mood scores count as Bad and which pain scores count as High.

    The complement of each set is Good / Low respectively.
    """

    mood_bad: frozenset[int]
    pain_high: frozenset[int]

    def validate(self, mood: OrdinalScale, pain: OrdinalScale) -> None:
        for scale, cut, what in ((mood, self.mood_bad, "mood bad"), (pain, self.pain_high, "pain high")):
            levels = set(scale.levels)
            if not cut <= levels:
                raise SchemaError(f"{what} set {sorted(cut)} is not within levels {sorted(levels)}")
            if not cut or cut == levels:
                raise SchemaError(f"{what} set must split scale {scale.name!r} into two non-empty parts")


@dataclass(frozen=True)
class StateSpace:
    mood: OrdinalScale
    pain: OrdinalScale
    rule: BinarizationRule
    _labels: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.rule.validate(self.mood, self.pain)
        labels = tuple(f"m{m}p{p}" for m in self.mood.levels for p in self.pain.levels)
        object.__setattr__(self, "_labels", labels)

    @property
    def n_compound(self) -> int:
        return self.mood.size * self.pain.size

    @property
    def compound_labels(self) -> tuple[str, ...]:
        return self._labels

    def check(self, state: CompoundState) -> None:
        if not self.mood.contains(state.mood):
            raise InvalidInputError(
                f"mood score {state.mood} out of range 1..{self.mood.size}", field=self.mood.name
            )
        if not self.pain.contains(state.pain):
            raise InvalidInputError(
                f"pain score {state.pain} out of range 1..{self.pain.size}", field=self.pain.name
            )

    def binarize(self, state: CompoundState) -> ReducedState:
        self.check(state)
        return ReducedState.from_parts(
            good_mood=state.mood not in self.rule.mood_bad,
            high_pain=state.pain in self.rule.pain_high,
        )

    def compound_index(self, state: CompoundState) -> int:
        self.check(state)
        return (state.mood - 1) * self.pain.size + (state.pain - 1)

    def compound_state(self, index: int) -> CompoundState:
        if not 0 <= index < self.n_compound:
            raise InvalidInputError(f"compound index {index} outside [0, {self.n_compound})", field="index")
        m, p = divmod(index, self.pain.size)
        return CompoundState(m + 1, p + 1)

    def scores_for(self, state: ReducedState) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Mood and pain scores that binarize to ``state``."""
        moods = tuple(m for m in self.mood.levels if (m not in self.rule.mood_bad) == state.good_mood)
        pains = tuple(p for p in self.pain.levels if (p in self.rule.pain_high) == state.high_pain)
        return moods, pains

    def to_dict(self) -> dict:
        return {
            "mood": {
                "name": self.mood.name,
                "higher_is_better": self.mood.higher_is_better,
                "levels": list(self.mood.descriptions),
                "bad": sorted(self.rule.mood_bad),
            },
            "pain": {
                "name": self.pain.name,
                "higher_is_better": self.pain.higher_is_better,
                "levels": list(self.pain.descriptions),
                "high": sorted(self.rule.pain_high),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpace":
        try:
            mood, pain = data["mood"], data["pain"]
            return cls(
                mood=OrdinalScale(
                    mood.get("name", "mood"),
                    tuple(str(d) for d in mood["levels"]),
                    bool(mood.get("higher_is_better", True)),
                ),
                pain=OrdinalScale(
                    pain.get("name", "pain"),
                    tuple(str(d) for d in pain["levels"]),
                    bool(pain.get("higher_is_better", False)),
                ),
                rule=BinarizationRule(
                    frozenset(int(s) for s in mood["bad"]),
                    frozenset(int(s) for s in pain["high"]),
                ),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"state-space config is missing or malformed: {exc}") from exc


MOOD_SCALE = OrdinalScale(
    "mood",
    ("Depressed", "Feeling low", "Not very happy", "Quite happy", "Very happy"),
    higher_is_better=True,
)
PAIN_SCALE = OrdinalScale(
    "pain",
    ("No pain", "Low pain", "Moderate pain", "Severe pain", "Very severe pain"),
    higher_is_better=False,
)
DEFAULT_RULE = BinarizationRule(mood_bad=frozenset({1, 2, 3}), pain_high=frozenset({3, 4, 5}))
DEFAULT_SPACE = StateSpace(MOOD_SCALE, PAIN_SCALE, DEFAULT_RULE)


def binarize(state: CompoundState, space: StateSpace = DEFAULT_SPACE) -> ReducedState:
    return space.binarize(state)


def load_state_space(path: str | Path | None) -> StateSpace:
    """Read a YAML state-space config; ``None`` gives the built-in default."""
    if path is None:
        return DEFAULT_SPACE
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    return StateSpace.from_dict(data.get("state_space", data))
