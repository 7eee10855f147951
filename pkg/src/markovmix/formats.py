"""Plain-text file formats: delimited tables and JSON documents.

All writers are deterministic: fixed column order, ``\\n`` line endings and
floats written with ``repr`` so values round-trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import InputFileError, SchemaError
from .ingestion import Trajectory
from .states import N_REDUCED, REDUCED_LABELS, ReducedState

MODEL_FORMAT = "markovmix-model"
ODDS_COLUMNS = ("row", "cluster", "covariate", "log_or", "std_error", "ci_low", "ci_high")
NO_FLAGS = "none"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "nan" if x != x else repr(x)
    return str(x)


def _open_read(path):
    try:
        return open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise InputFileError(f"file not found: {path}") from None
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc}") from exc


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",") -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path, required: Sequence[str] = (), delimiter: str = ",") -> tuple[list[str], list[dict[str, str]]]:
    with _open_read(path) as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = [{k.strip(): (v or "").strip() for k, v in r.items() if k is not None} for r in reader]
    return header, rows


def write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, allow_nan=True)
        fh.write("\n")


def read_json(path) -> dict:
    with _open_read(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def to_jsonable(x):
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, date):
        return x.isoformat()
    if isinstance(x, Path):
        return str(x)
    return x


# -- matrices ---------------------------------------------------------------


def write_matrix(path, M, labels: Sequence[str]) -> None:
    M = np.asarray(M)
    write_table(path, ["state", *labels], ([lab, *row] for lab, row in zip(labels, M.tolist())))


def read_matrix(path, dtype=float) -> tuple[np.ndarray, list[str]]:
    with _open_read(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0].strip() != "state":
        raise SchemaError(f"{path}: matrix file must start with a 'state' header column")
    labels = [c.strip() for c in rows[0][1:]]
    body = [r for r in rows[1:] if r]
    if [r[0].strip() for r in body] != labels:
        raise SchemaError(f"{path}: row labels do not match column labels")
    try:
        M = np.array([[float(v) for v in r[1:]] for r in body])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric matrix entry ({exc})") from exc
    if M.shape != (len(labels), len(labels)):
        raise SchemaError(f"{path}: matrix is not square")
    if dtype is int:
        if not np.all(M == np.round(M)):
            raise SchemaError(f"{path}: count matrix has non-integer entries")
        M = M.astype(np.int64)
    return M, labels


# -- records, trajectories, labels --------------------------------------------


def write_records(path, rows) -> None:
    write_table(
        path,
        ["participant_id", "date", "mood", "pain"],
        ((pid, d.isoformat(), m, p) for pid, d, m, p in rows),
    )


def write_trajectories(path, trajectories: Sequence[Trajectory]) -> None:
    def rows():
        for t in trajectories:
            scores = t.scores if t.scores else [(None, None)] * len(t)
            for d, s, (m, p) in zip(t.dates, t.states, scores):
                yield t.participant_id, d.isoformat(), m, p, REDUCED_LABELS[s]

    write_table(path, ["participant_id", "date", "mood", "pain", "state"], rows())


def read_trajectories(path) -> list[Trajectory]:
    _, rows = read_table(path, required=("participant_id", "date", "state"))
    by_pid: dict[str, list] = {}
    for line, r in enumerate(rows, start=2):
        try:
            d = date.fromisoformat(r["date"])
            s = ReducedState(r["state"]).index
        except ValueError as exc:
            raise SchemaError(f"{path}:{line}: {exc}") from exc
        m, p = r.get("mood", ""), r.get("pain", "")
        by_pid.setdefault(r["participant_id"], []).append((d, s, (int(m), int(p)) if m and p else None))
    out = []
    for pid in sorted(by_pid):
        days = sorted(by_pid[pid], key=lambda e: e[0])
        scores = tuple(e[2] for e in days)
        out.append(
            Trajectory(
                pid,
                tuple(e[0] for e in days),
                tuple(e[1] for e in days),
                N_REDUCED,
                scores if all(sc is not None for sc in scores) else (),
            )
        )
    return out


def write_labels(path, labels: dict[str, int]) -> None:
    write_table(path, ["participant_id", "cluster"], sorted(labels.items()))


def read_assignments(path) -> dict[str, int]:
    _, rows = read_table(path, required=("participant_id", "cluster"))
    try:
        return {r["participant_id"]: int(r["cluster"]) for r in rows}
    except ValueError as exc:
        raise SchemaError(f"{path}: cluster column must hold integers ({exc})") from exc


def write_covariates(path, rows: list[dict[str, str]]) -> None:
    if not rows:
        write_table(path, ["participant_id"], [])
        return
    header = list(rows[0])
    write_table(path, header, ([r.get(h, "") for h in header] for r in rows))


def read_covariates(path, multi_columns: Sequence[str] = ("conditions", "sites"), sep: str = ";"):
    """Covariate table keyed by participant.

    Returns ``{column: {participant: value}}``. Multi-valued columns map to a
    frozenset of flags (``none`` means reported with no flags) or ``None`` when
    the field is blank; other columns map to the raw text or ``None``.
    """
    header, rows = read_table(path, required=("participant_id",))
    out: dict[str, dict] = {h: {} for h in header if h != "participant_id"}
    for r in rows:
        pid = r["participant_id"]
        for col in out:
            v = r.get(col, "")
            if col in multi_columns:
                if not v:
                    out[col][pid] = None
                elif v.lower() == NO_FLAGS:
                    out[col][pid] = frozenset()
                else:
                    out[col][pid] = frozenset(x.strip() for x in v.split(sep) if x.strip())
            else:
                out[col][pid] = v or None
    return out


# -- model documents ------------------------------------------------------------


def model_document(model, trace, config: dict, participant_ids: Sequence[str]) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": __version__,
        "states": list(REDUCED_LABELS),
        "K": model.K,
        "weights": to_jsonable(model.weights),
        "components": [
            {"cluster": k + 1, "weight": float(model.weights[k]), "matrix": to_jsonable(model.matrices[k])}
            for k in range(model.K)
        ],
        "log_likelihood": float(model.log_likelihood),
        "n_participants": len(participant_ids),
        "config": config,
        "trace": {
            "seed": trace.seed,
            "n_iter": trace.n_iter,
            "converged": trace.converged,
            "final_change": trace.final_change,
            "raw_order": trace.raw_order,
        },
    }


def read_model(path) -> tuple[np.ndarray, np.ndarray, dict]:
    doc = read_json(path)
    if doc.get("format") != MODEL_FORMAT:
        raise SchemaError(f"{path}: not a {MODEL_FORMAT} document")
    try:
        weights = np.asarray(doc["weights"], dtype=float)
        matrices = np.asarray([c["matrix"] for c in doc["components"]], dtype=float)
        states = doc.get("states", list(REDUCED_LABELS))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed model document ({exc})") from exc
    if list(states) != list(REDUCED_LABELS):
        raise SchemaError(f"{path}: state order {states} differs from {list(REDUCED_LABELS)}")
    if matrices.ndim != 3 or matrices.shape[0] != len(weights):
        raise SchemaError(f"{path}: weights and components disagree")
    return weights, matrices, doc


def write_odds_table(path, rows, decimals: int | None = None) -> None:
    """Odds-ratio rows in the ``ODDS_COLUMNS`` layout; zero-cell rows are left blank.

    With ``decimals`` the statistics are written in fixed-point notation.
    """
    def r(x):
        return x if decimals is None or x is None else f"{x:.{decimals}f}"

    def body():
        for i, row in enumerate(rows, start=1):
            res = row.result
            vals = (None,) * 4 if res is None else (res.log_or, res.std_error, res.ci_low, res.ci_high)
            yield (i, f"Cluster {row.cluster}", row.covariate, *(r(v) for v in vals))

    write_table(path, ODDS_COLUMNS, body())


def read_odds_table(path) -> list[dict]:
    header, rows = read_table(path, required=ODDS_COLUMNS)
    if tuple(header) != ODDS_COLUMNS:
        raise SchemaError(f"{path}: columns {header} differ from {list(ODDS_COLUMNS)}")
    out = []
    for r in rows:
        rec = {"row": int(r["row"]), "cluster": r["cluster"], "covariate": r["covariate"]}
        for key in ODDS_COLUMNS[3:]:
            rec[key] = float(r[key]) if r[key] else None
        out.append(rec)
    return out
