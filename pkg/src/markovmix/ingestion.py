"""Raw daily records -> trajectories -> per-participant transition counts."""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import DuplicateRecordError, InvalidInputError, SchemaError
from .states import DEFAULT_SPACE, N_REDUCED, REDUCED_LABELS, CompoundState, StateSpace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IngestConfig:
    delimiter: str = ","
    date_format: str = "%Y-%m-%d"
    id_column: str = "participant_id"
    date_column: str = "date"
    mood_column: str = "mood"
    pain_column: str = "pain"

    @property
    def mandatory(self) -> tuple[str, ...]:
        return (self.id_column, self.date_column, self.mood_column, self.pain_column)


@dataclass(frozen=True)
class RawRecord:
    participant_id: str
    date: date
    mood: int | None
    pain: int | None
    covariates: dict[str, str] = field(default_factory=dict, compare=False)
    row: int = 0

    @property
    def complete(self) -> bool:
        return self.mood is not None and self.pain is not None


@dataclass(frozen=True)
class Reject:
    row: int
    reason: str


@dataclass
class ParseResult:
    records: list[RawRecord]
    rejects: list[Reject]
    covariate_columns: tuple[str, ...] = ()


class _RowError(Exception):
    pass


def _score(text: str, scale_size: int) -> int | None:
    text = text.strip()
    if not text or text.upper() in ("NA", "NAN"):
        return None
    try:
        value = int(text)
    except ValueError:
        try:
            as_float = float(text)
        except ValueError:
            raise _RowError("unparseable score") from None
        if not as_float.is_integer():
            raise _RowError("unparseable score") from None
        value = int(as_float)
    if not 1 <= value <= scale_size:
        raise _RowError("score out of range")
    return value


def parse_records(
    source: IO | str,
    config: IngestConfig = IngestConfig(),
    space: StateSpace = DEFAULT_SPACE,
) -> ParseResult:
    """Parse a delimited table of daily reports.

    Malformed rows are returned in ``rejects`` with their 1-based line number
    (the header is line 1). A repeated ``(participant, date)`` pair raises.
    Columns other than the four mandatory ones are kept as free-form covariates.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    elif isinstance(source, (io.BufferedIOBase, io.RawIOBase)) or "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(source, delimiter=config.delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("input has no header row") from None
    missing = [c for c in config.mandatory if c not in header]
    if missing:
        raise SchemaError(f"missing mandatory column(s): {', '.join(missing)}")
    pos = {name: i for i, name in enumerate(header)}
    covariate_columns = tuple(h for h in header if h not in config.mandatory)

    records: list[RawRecord] = []
    rejects: list[Reject] = []
    seen: dict[tuple[str, date], int] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            rejects.append(Reject(line_no, f"expected {len(header)} fields, found {len(row)}"))
            continue
        try:
            pid = row[pos[config.id_column]].strip()
            if not pid:
                raise _RowError("missing participant id")
            try:
                day = datetime.strptime(row[pos[config.date_column]].strip(), config.date_format).date()
            except ValueError:
                raise _RowError("unparseable date") from None
            mood = _score(row[pos[config.mood_column]], space.mood.size)
            pain = _score(row[pos[config.pain_column]], space.pain.size)
        except _RowError as exc:
            rejects.append(Reject(line_no, str(exc)))
            continue
        key = (pid, day)
        if key in seen:
            raise DuplicateRecordError(
                f"duplicate record for participant {pid!r} on {day.isoformat()} "
                f"(lines {seen[key]} and {line_no})",
                field=config.date_column,
            )
        seen[key] = line_no
        covariates = {c: row[pos[c]].strip() for c in covariate_columns if row[pos[c]].strip()}
        records.append(RawRecord(pid, day, mood, pain, covariates, line_no))
    log.info("parsed %d records, %d rejects", len(records), len(rejects))
    return ParseResult(records, rejects, covariate_columns)


@dataclass(frozen=True)
class MissingDataPolicy:
    """Incomplete days are always dropped; ``max_gap_days`` optionally discards
    transitions between complete reports further apart than that many days."""

    max_gap_days: int | None = None


@dataclass(frozen=True)
class Trajectory:
    participant_id: str
    dates: tuple[date, ...]
    states: tuple[int, ...]
    n_states: int = N_REDUCED
    scores: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if len(self.dates) != len(self.states):
            raise InvalidInputError("dates and states differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InvalidInputError(f"dates of {self.participant_id!r} are not strictly increasing")

    def __len__(self):
        return len(self.states)

    def compound(self, space: StateSpace = DEFAULT_SPACE) -> "Trajectory":
        if len(self.scores) != len(self.states):
            raise InvalidInputError(f"trajectory {self.participant_id!r} carries no raw scores")
        idx = tuple(space.compound_index(CompoundState(m, p)) for m, p in self.scores)
        return Trajectory(self.participant_id, self.dates, idx, space.n_compound, self.scores)


def build_trajectories(
    records: Iterable[RawRecord],
    space: StateSpace = DEFAULT_SPACE,
) -> list[Trajectory]:
    """One reduced-state trajectory per participant with at least one complete day.

    Output is sorted by participant id; days are sorted by date.
    """
    by_pid: dict[str, list[RawRecord]] = defaultdict(list)
    for rec in records:
        if rec.complete:
            by_pid[rec.participant_id].append(rec)
    out = []
    for pid in sorted(by_pid):
        days = sorted(by_pid[pid], key=lambda r: r.date)
        out.append(
            Trajectory(
                pid,
                tuple(r.date for r in days),
                tuple(space.binarize(CompoundState(r.mood, r.pain)).index for r in days),
                N_REDUCED,
                tuple((r.mood, r.pain) for r in days),
            )
        )
    return out


def count_transitions(
    trajectory: Trajectory | Sequence[int],
    n: int | None = None,
    max_gap_days: int | None = None,
) -> np.ndarray:
    """n x n matrix of consecutive-entry transition counts."""
    if isinstance(trajectory, Trajectory):
        states = trajectory.states
        dates = trajectory.dates
        n = trajectory.n_states if n is None else n
    else:
        states, dates = tuple(trajectory), None
        if n is None:
            raise InvalidInputError("state-space size required for a bare state sequence", field="n")
    counts = np.zeros((n, n), dtype=np.int64)
    if len(states) < 2:
        return counts
    src = np.asarray(states[:-1])
    dst = np.asarray(states[1:])
    if max_gap_days is not None and dates is not None:
        gaps = np.array([(b - a).days for a, b in zip(dates, dates[1:])])
        keep = gaps <= max_gap_days
        src, dst = src[keep], dst[keep]
    np.add.at(counts, (src, dst), 1)
    return counts


def pool_counts(matrices: Sequence[np.ndarray], n: int | None = None) -> np.ndarray:
    if len(matrices) == 0:
        if n is None:
            raise InvalidInputError("cannot infer size when pooling no matrices", field="n")
        return np.zeros((n, n), dtype=np.int64)
    shape = np.shape(matrices[0])
    if n is not None and shape != (n, n):
        raise InvalidInputError(f"expected {n}x{n} matrices, got {shape}")
    total = np.zeros(shape, dtype=np.int64)
    for k, m in enumerate(matrices):
        if np.shape(m) != shape:
            raise InvalidInputError(f"matrix {k} has shape {np.shape(m)}, expected {shape}")
        total += np.asarray(m, dtype=np.int64)
    return total


def participant_counts(
    trajectories: Sequence[Trajectory], max_gap_days: int | None = None
) -> tuple[list[str], np.ndarray]:
    """Stack per-participant count matrices into an (S, n, n) array."""
    if not trajectories:
        return [], np.zeros((0, N_REDUCED, N_REDUCED), dtype=np.int64)
    ids = [t.participant_id for t in trajectories]
    stacked = np.stack([count_transitions(t, max_gap_days=max_gap_days) for t in trajectories])
    return ids, stacked


@dataclass
class CohortSummary:
    n_rows: int
    n_participants: int
    n_retained: int
    n_excluded: int
    n_complete: int
    n_transitions: int
    state_frequencies: dict[str, int]
    mood_mean: float | None
    pain_mean: float | None
    missing_mood: int
    missing_pain: int
    n_rejects: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def summarize_cohort(
    records: Sequence[RawRecord],
    trajectories: Sequence[Trajectory],
    n_rejects: int = 0,
) -> CohortSummary:
    participants = {r.participant_id for r in records}
    moods = [r.mood for r in records if r.mood is not None]
    pains = [r.pain for r in records if r.pain is not None]
    freq = Counter()
    for t in trajectories:
        freq.update(t.states)
    return CohortSummary(
        n_rows=len(records),
        n_participants=len(participants),
        n_retained=len(trajectories),
        n_excluded=len(participants) - len(trajectories),
        n_complete=sum(len(t) for t in trajectories),
        n_transitions=sum(max(len(t) - 1, 0) for t in trajectories),
        state_frequencies={label: int(freq.get(i, 0)) for i, label in enumerate(REDUCED_LABELS)},
        mood_mean=float(np.mean(moods)) if moods else None,
        pain_mean=float(np.mean(pains)) if pains else None,
        missing_mood=len(records) - len(moods),
        missing_pain=len(records) - len(pains),
        n_rejects=n_rejects,
    )
