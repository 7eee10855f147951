"""Command-line entry point: ``markovmix <subcommand> ...``.

Every subcommand takes its settings from built-in defaults, then an optional
YAML ``--config`` file, then explicit flags. Each run writes ``manifest.json``
in its output directory holding the effective configuration plus SHA-256
digests of inputs and outputs, so the run can be replayed and compared.
Verbosity is read from the ``MARKOVMIX_LOG`` environment variable.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import association as assoc
from . import formats as ff
from .errors import InputFileError, MarkovMixError, SchemaError, UsageError
from .ingestion import (
    IngestConfig,
    build_trajectories,
    count_transitions,
    parse_records,
    participant_counts,
    pool_counts,
    summarize_cohort,
)
from .intervention import InterventionSpec, intervene, max_feasible_beta, monotonicity_probe
from .mixture import EMConfig, assign_clusters, em_fit, row_normalize, select_k, transition_ratio
from .residuals import NEIGHBOR_DIRECTIONS, fit_model1, fit_model2, pearson_residuals, residual_normality
from .simulate import PRESETS, simulate_cohort
from .stationary import stationary
from .states import REDUCED_LABELS, load_state_space

log = logging.getLogger("markovmix")

DEFAULTS: dict[str, dict] = {
    "ingest": {
        "input": None, "out": None, "state_config": None, "delimiter": ",",
        "date_format": "%Y-%m-%d", "max_gap_days": None,
    },
    "residuals": {"counts": None, "out": None, "model": 1, "state_config": None, "bins": 30},
    "cluster": {
        "trajectories": None, "out": None, "k": 4, "k_range": None, "seed": 0, "epsilon": 1e-6,
        "max_iter": 1000, "restarts": 5, "smoothing": 0.0, "max_gap_days": None,
    },
    "stationary": {"model": None, "out": None},
    "intervene": {
        "model": None, "out": None, "target": "mood", "beta": 0.15, "split": 0.8,
        "preserve_split": False, "probe_points": 11,
    },
    "associate": {
        "assignments": None, "covariates": None, "out": None,
        "flag_columns": ["conditions", "sites"], "numeric": ["age"], "group_by": "sex",
        "haldane": False, "decimals": None,
    },
    "simulate": {
        "model": None, "preset": "four", "participants": 500, "length": 100, "seed": 0,
        "missingness": 0.0, "with_covariates": True, "out": None,
    },
}


# -- helpers ---------------------------------------------------------------------


def _out_dir(cfg: dict) -> Path:
    if not cfg.get("out"):
        raise UsageError("an output directory (--out) is required")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path, what: str) -> Path:
    if path is None:
        raise UsageError(f"missing {what} path")
    p = Path(path)
    if not p.is_file():
        raise InputFileError(f"file not found: {p}")
    return p


def _parse_k_range(spec) -> list[int] | None:
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        return [int(k) for k in spec]
    text = str(spec)
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(k) for k in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse K range {spec!r}; use e.g. 1-6 or 1,2,4") from None


def write_manifest(out: Path, command: str, cfg: dict, inputs: dict[str, Path | None], outputs: list[Path]) -> Path:
    doc = {
        "tool": "markovmix",
        "version": __version__,
        "command": command,
        "config": ff.to_jsonable({k: v for k, v in cfg.items() if k != "out"}),
        "inputs": {
            name: {"path": str(p), "sha256": ff.sha256(p)} for name, p in inputs.items() if p is not None
        },
        "outputs": {str(p.relative_to(out)): ff.sha256(p) for p in sorted(outputs)},
    }
    path = out / "manifest.json"
    ff.write_json(path, doc)
    return path


# -- subcommands -----------------------------------------------------------------


def _reject_rows(parsed) -> list[tuple[int, str]]:
    """Malformed rows plus rows dropped for a missing score, by row number."""
    rows = [(r.row, r.reason) for r in parsed.rejects]
    for rec in parsed.records:
        if rec.complete:
            continue
        missing = [name for name, v in (("mood", rec.mood), ("pain", rec.pain)) if v is None]
        rows.append((rec.row, f"incomplete: {' and '.join(missing)} missing"))
    return sorted(rows)


def run_ingest(cfg: dict) -> dict:
    src = _require_file(cfg["input"], "input")
    out = _out_dir(cfg)
    space = load_state_space(cfg.get("state_config"))
    icfg = IngestConfig(delimiter=cfg["delimiter"], date_format=cfg["date_format"])
    with open(src, "rb") as fh:
        parsed = parse_records(fh, icfg, space)
    trajectories = build_trajectories(parsed.records, space)
    gap = cfg.get("max_gap_days")
    summary = summarize_cohort(parsed.records, trajectories, n_rejects=len(parsed.rejects))

    reduced = pool_counts([count_transitions(t, max_gap_days=gap) for t in trajectories], n=4)
    compound = pool_counts(
        [count_transitions(t.compound(space), max_gap_days=gap) for t in trajectories], n=space.n_compound
    )
    paths = {
        "trajectories": out / "trajectories.csv",
        "summary": out / "summary.json",
        "rejects": out / "rejects.csv",
        "counts_reduced": out / "counts_reduced.csv",
        "counts_compound": out / "counts_compound.csv",
    }
    ff.write_trajectories(paths["trajectories"], trajectories)
    ff.write_json(paths["summary"], ff.to_jsonable(summary.to_dict()))
    ff.write_table(paths["rejects"], ["row", "reason"], _reject_rows(parsed))
    ff.write_matrix(paths["counts_reduced"], reduced, REDUCED_LABELS)
    ff.write_matrix(paths["counts_compound"], compound, space.compound_labels)
    if parsed.covariate_columns:
        first: dict[str, dict[str, str]] = {}
        for rec in parsed.records:
            row = first.setdefault(rec.participant_id, {})
            for k, v in rec.covariates.items():
                row.setdefault(k, v)
        rows = [
            {"participant_id": pid, **{c: first[pid].get(c, "") for c in parsed.covariate_columns}}
            for pid in sorted(first)
        ]
        paths["covariates"] = out / "covariates.csv"
        ff.write_covariates(paths["covariates"], rows)
    log.info("ingest: %d participants retained, %d rejects", summary.n_retained, len(parsed.rejects))
    write_manifest(out, "ingest", cfg, {"input": src, "state_config": cfg.get("state_config")}, list(paths.values()))
    return paths


def run_residuals(cfg: dict) -> dict:
    src = _require_file(cfg["counts"], "counts")
    out = _out_dir(cfg)
    model = int(cfg["model"])
    if model not in (1, 2):
        raise UsageError(f"unknown null model {cfg['model']!r}; choose 1 or 2")
    Y, labels = ff.read_matrix(src, dtype=int)
    if model == 1:
        fit = fit_model1(Y)
    else:
        space = load_state_space(cfg.get("state_config"))
        if Y.shape[0] != space.n_compound:
            raise SchemaError(f"model 2 needs a {space.n_compound}-state compound count matrix, got {Y.shape[0]}")
        fit = fit_model2(Y, space)
    report = pearson_residuals(Y, fit, bins=int(cfg["bins"]))
    paths = {
        "expected": out / "expected.csv",
        "residuals": out / "residuals.csv",
        "parameters": out / "parameters.csv",
        "report": out / "residuals.json",
        "histogram": out / "histogram.csv",
        "normal_curve": out / "normal_curve.csv",
    }
    ff.write_matrix(paths["expected"], fit.expected, labels)
    ff.write_matrix(paths["residuals"], report.residuals, labels)
    if model == 1:
        header = ["state", "row_total", "stay", "move_each"]
        rows = (
            (lab, fit.row_totals[i], fit.stay_probs[i], (1 - fit.stay_probs[i]) / (len(labels) - 1))
            for i, lab in enumerate(labels)
        )
    else:
        header = ["state", "row_total", "stay", *NEIGHBOR_DIRECTIONS, "uniform_rest"]
        rows = (
            (lab, fit.row_totals[i], fit.stay_probs[i], *fit.neighbor_probs[i], fit.remainder_probs[i])
            for i, lab in enumerate(labels)
        )
    ff.write_table(paths["parameters"], header, rows)
    doc = {
        "model": fit.model,
        "states": labels,
        "undefined_cells": [[labels[i], labels[j]] for i, j in zip(*np.nonzero(report.undefined))],
        "undefined_rows": [labels[i] for i in np.flatnonzero(~fit.defined_rows)],
        "n_defined": int(report.values.size),
        "n_abs_over_2": report.n_large,
        "mean": report.mean,
        "variance": report.variance,
        "max_abs": float(np.max(np.abs(report.values))) if report.values.size else None,
    }
    if report.values.size >= 2:
        diag = residual_normality(report, bins=int(cfg["bins"]))
        ff.write_table(paths["histogram"], ["bin_low", "bin_high", "count", "density"], diag.histogram_rows())
        ff.write_table(paths["normal_curve"], ["x", "pdf"], zip(diag.curve_x, diag.curve_pdf))
    else:
        ff.write_table(paths["histogram"], ["bin_low", "bin_high", "count", "density"], [])
        ff.write_table(paths["normal_curve"], ["x", "pdf"], [])
    ff.write_json(paths["report"], ff.to_jsonable(doc))
    write_manifest(out, "residuals", cfg, {"counts": src}, list(paths.values()))
    return paths


def run_cluster(cfg: dict) -> dict:
    src = _require_file(cfg["trajectories"], "trajectories")
    out = _out_dir(cfg)
    trajectories = ff.read_trajectories(src)
    ids, C = participant_counts(trajectories, max_gap_days=cfg.get("max_gap_days"))
    em = EMConfig(
        seed=int(cfg["seed"]), epsilon=float(cfg["epsilon"]),
        max_iter=int(cfg["max_iter"]), smoothing=float(cfg["smoothing"]),
    )
    restarts = int(cfg["restarts"])
    paths: dict[str, Path] = {}
    ks = _parse_k_range(cfg.get("k_range"))
    if ks:
        table = select_k(C, ks, em, restarts=restarts)
        paths["nll"] = out / "nll.csv"
        ff.write_table(paths["nll"], ["K", "nll", "restarts", "converged"],
                       ((r.K, r.nll, r.restarts, r.converged) for r in table))
    if cfg.get("k") is not None:
        K = int(cfg["k"])
        model, trace = em_fit(C, K, em, restarts=restarts)
        doc = ff.model_document(model, trace, {**em.to_dict(), "restarts": restarts, "max_gap_days": cfg.get("max_gap_days")}, ids)
        pooled = row_normalize(C.sum(axis=0))
        ratios = transition_ratio(model, pooled)
        paths.update({
            "model": out / "model.json",
            "responsibilities": out / "responsibilities.csv",
            "assignments": out / "assignments.csv",
            "pooled": out / "pooled_transition.csv",
            "ratios": out / "ratios.csv",
            "trace": out / "trace.csv",
        })
        ff.write_json(paths["model"], doc)
        ff.write_table(paths["responsibilities"], ["participant_id", *[f"cluster_{k + 1}" for k in range(K)]],
                       ([pid, *row] for pid, row in zip(ids, model.responsibilities.tolist())))
        ff.write_table(paths["assignments"], ["participant_id", "cluster", "probability", "tied"],
                       ((ids[a.participant], a.cluster, a.probability, a.tied) for a in assign_clusters(model)))
        ff.write_matrix(paths["pooled"], pooled, REDUCED_LABELS)

        def ratio_rows():
            for k in range(K):
                for i, a in enumerate(REDUCED_LABELS):
                    for j, b in enumerate(REDUCED_LABELS):
                        flag = "indeterminate" if ratios.indeterminate[k, i, j] else (
                            "unbounded" if ratios.unbounded[k, i, j] else "")
                        yield k + 1, a, b, model.matrices[k, i, j], pooled[i, j], ratios.ratios[k, i, j], flag

        ff.write_table(paths["ratios"], ["cluster", "from", "to", "cluster_prob", "pooled_prob", "ratio", "flag"],
                       ratio_rows())
        ff.write_table(paths["trace"], ["iteration", "log_likelihood", "objective"],
                       ((i, ll, ob) for i, (ll, ob) in enumerate(zip(trace.log_likelihoods, trace.objectives), start=1)))
    if not paths:
        raise UsageError("cluster needs --k and/or --k-range")
    write_manifest(out, "cluster", cfg, {"trajectories": src}, list(paths.values()))
    return paths


def _load_matrices(path: Path) -> np.ndarray:
    if path.suffix.lower() == ".json":
        return ff.read_model(path)[1]
    M, labels = ff.read_matrix(path)
    return M[None]


def run_stationary(cfg: dict) -> dict:
    src = _require_file(cfg["model"], "model")
    out = _out_dir(cfg)
    matrices = _load_matrices(src)
    labels = REDUCED_LABELS if matrices.shape[1] == 4 else [f"s{i}" for i in range(matrices.shape[1])]
    rows, checks = [], []
    for k, M in enumerate(matrices, start=1):
        sd = stationary(M)
        rows.extend((k, lab, x) for lab, x in zip(labels, sd.x))
        checks.append({"cluster": k, "residual": sd.residual, "method": sd.method, "power_iteration_gap": sd.crosscheck_gap})
    paths = {"stationary": out / "stationary.csv", "checks": out / "stationary.json"}
    ff.write_table(paths["stationary"], ["cluster", "state", "probability"], rows)
    ff.write_json(paths["checks"], checks)
    write_manifest(out, "stationary", cfg, {"model": src}, list(paths.values()))
    return paths


def _beta(value):
    if value is None:
        return None
    if str(value).lower() == "max":
        return "max"
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"beta must be a number or 'max', got {value!r}") from None


def run_intervene(cfg: dict) -> dict:
    src = _require_file(cfg["model"], "model")
    out = _out_dir(cfg)
    matrices = _load_matrices(src)
    spec = InterventionSpec(cfg["target"], _beta(cfg["beta"]), float(cfg["split"]), bool(cfg["preserve_split"]))
    results = intervene(matrices, spec)
    tag = cfg["target"]
    paths = {
        "deltas": out / f"intervention_{tag}.csv",
        "matrices": out / f"intervention_{tag}.json",
        "probe": out / f"monotonicity_{tag}.csv",
    }
    ff.write_table(
        paths["deltas"], ["cluster", "state", "beta", "original", "modified", "delta"],
        ((r.cluster, lab, r.beta, r.original_stationary.x[i], r.modified_stationary.x[i], r.deltas[i])
         for r in results for i, lab in enumerate(REDUCED_LABELS)),
    )
    ff.write_json(paths["matrices"], ff.to_jsonable({
        "target": spec.target, "split": spec.split, "preserve_split": spec.preserve_split,
        "states": list(REDUCED_LABELS),
        "clusters": [
            {"cluster": r.cluster, "beta": r.beta, "bound": max_feasible_beta(r.original, spec.target),
             "original": r.original, "modified": r.modified}
            for r in results
        ],
    }))
    probe_rows = []
    for r in results:
        probe = monotonicity_probe(r.original, spec.target, int(cfg["probe_points"]), spec.split)
        probe_rows.extend((r.cluster, b, m, probe.non_decreasing) for b, m in zip(probe.betas, probe.boosted_mass))
    ff.write_table(paths["probe"], ["cluster", "beta", "boosted_mass", "non_decreasing"], probe_rows)
    write_manifest(out, "intervene", cfg, {"model": src}, list(paths.values()))
    return paths


def run_associate(cfg: dict) -> dict:
    a_path = _require_file(cfg["assignments"], "assignments")
    c_path = _require_file(cfg["covariates"], "covariates")
    out = _out_dir(cfg)
    assignments = ff.read_assignments(a_path)
    flag_cols = [c for c in cfg["flag_columns"]]
    table = ff.read_covariates(c_path, multi_columns=flag_cols)
    paths: dict[str, Path] = {}
    coverage = {}
    decimals = cfg.get("decimals")
    for col in flag_cols:
        if col not in table:
            continue
        flags = table[col]
        rows, cov = assoc.odds_ratio_rows(assignments, flags, correction=bool(cfg["haldane"]))
        p = out / f"odds_{col}.csv"
        ff.write_odds_table(p, rows, None if decimals is None else int(decimals))
        paths[f"odds_{col}"] = p
        props = assoc.covariate_proportions(assignments, flags)
        p1, p2 = out / f"proportions_{col}_within_cluster.csv", out / f"proportions_{col}_across_clusters.csv"
        ff.write_table(p1, ["cluster", "covariate", "proportion", "reporters"],
                       ((k, c, props.within_cluster[i, j], props.cluster_reporters[i])
                        for i, k in enumerate(props.clusters) for j, c in enumerate(props.covariates)))
        ff.write_table(p2, ["covariate", "cluster", "proportion", "holders"],
                       ((c, k, props.across_clusters[j, i], props.covariate_holders[j])
                        for j, c in enumerate(props.covariates) for i, k in enumerate(props.clusters)))
        paths[f"within_{col}"], paths[f"across_{col}"] = p1, p2
        coverage[col] = {
            "reporting": cov.n_reporting, "excluded": cov.n_excluded,
            "clusters_without_reporters": props.empty_clusters,
            "zero_cell_rows": [[r.cluster, r.covariate, r.zero_cell] for r in rows if r.result is None],
        }
    group_col = cfg.get("group_by")
    groups = table.get(group_col) if group_col else None
    for col in cfg.get("numeric") or []:
        if col not in table:
            continue
        summary = assoc.group_summary(assignments, table[col], groups)
        p = out / f"group_summary_{col}.csv"
        ff.write_table(p, ["cluster", "group", "n", "n_responding", "mean", "response_rate"],
                       ((r.cluster, r.group, r.n, r.n_responding, r.mean, r.response_rate) for r in summary))
        paths[f"group_{col}"] = p
    paths["coverage"] = out / "coverage.json"
    ff.write_json(paths["coverage"], coverage)
    write_manifest(out, "associate", cfg, {"assignments": a_path, "covariates": c_path}, list(paths.values()))
    return paths


def run_simulate(cfg: dict) -> dict:
    out = _out_dir(cfg)
    model_path = None
    if cfg.get("model"):
        model_path = _require_file(cfg["model"], "model")
        weights, matrices, _ = ff.read_model(model_path)
    else:
        if cfg.get("preset") not in PRESETS:
            raise UsageError(f"unknown preset {cfg.get('preset')!r}; choose from {', '.join(PRESETS)}")
        weights, matrices = PRESETS[cfg["preset"]]
    cohort = simulate_cohort(
        weights, matrices, int(cfg["participants"]), int(cfg["length"]), seed=int(cfg["seed"]),
        missingness=float(cfg["missingness"]), covariates=bool(cfg["with_covariates"]),
    )
    paths = {"records": out / "records.csv", "labels": out / "labels.csv"}
    ff.write_records(paths["records"], cohort.rows)
    ff.write_labels(paths["labels"], cohort.labels)
    if cohort.covariates:
        paths["covariates"] = out / "covariates.csv"
        ff.write_covariates(paths["covariates"], cohort.covariates)
    write_manifest(out, "simulate", cfg, {"model": model_path}, list(paths.values()))
    return paths


_PATH_KEYS = {"out", "input", "trajectories", "model", "assignments", "covariates", "counts"}


def _settings(section: dict) -> dict:
    return {k: v for k, v in section.items() if k not in _PATH_KEYS}


def run_pipeline(cfg: dict) -> dict:
    """simulate (optional) -> ingest -> cluster -> stationary -> intervene -> associate.

    The manifest records every stage's resolved settings, so passing it back as
    ``--config`` replays the run.
    """
    out = _out_dir(cfg)
    produced: list[Path] = []
    inputs: dict[str, Path | None] = {}
    state_config = cfg.get("state_config")
    effective: dict = {"state_config": state_config}

    raw = cfg.get("input")
    covariates = cfg.get("covariates")
    if raw is not None:
        inputs["input"] = _require_file(raw, "input")
        effective["input"] = raw
    if covariates is not None:
        inputs["covariates"] = _require_file(covariates, "covariates")
        effective["covariates"] = covariates
    if raw is None:
        sim = {**DEFAULTS["simulate"], **(cfg.get("simulate") or {}), "out": out / "simulate"}
        effective["simulate"] = _settings(sim)
        sp = run_simulate(sim)
        produced.extend(sp.values())
        raw = sp["records"]
        covariates = covariates or sp.get("covariates")

    ing = {**DEFAULTS["ingest"], **(cfg.get("ingest") or {}), "input": raw, "out": out / "ingest",
           "state_config": state_config}
    effective["ingest"] = _settings(ing)
    ip = run_ingest(ing)
    produced.extend(ip.values())

    cl = {**DEFAULTS["cluster"], **(cfg.get("cluster") or {}), "trajectories": ip["trajectories"],
          "out": out / "cluster"}
    if cl["max_gap_days"] is None:
        cl["max_gap_days"] = ing["max_gap_days"]
    effective["cluster"] = _settings(cl)
    cp = run_cluster(cl)
    produced.extend(cp.values())

    stp = run_stationary({"model": cp["model"], "out": out / "stationary"})
    produced.extend(stp.values())

    specs = cfg.get("intervene") or [{"target": "mood", "beta": "max"}, {"target": "pain", "beta": "max"}]
    if isinstance(specs, dict):
        specs = [specs]
    effective["intervene"] = []
    for spec in specs:
        iv = {**DEFAULTS["intervene"], **spec, "model": cp["model"], "out": out / "intervene"}
        effective["intervene"].append(_settings(iv))
        produced.extend(run_intervene(iv).values())

    if covariates is None:
        covariates = ip.get("covariates")
    if covariates is not None:
        asc = {**DEFAULTS["associate"], **(cfg.get("associate") or {}), "assignments": cp["assignments"],
               "covariates": covariates, "out": out / "associate"}
        effective["associate"] = _settings(asc)
        produced.extend(run_associate(asc).values())

    write_manifest(out, "pipeline", effective, inputs, sorted(set(produced)))
    return {"manifest": out / "manifest.json"}


COMMANDS = {
    "ingest": run_ingest,
    "residuals": run_residuals,
    "cluster": run_cluster,
    "stationary": run_stationary,
    "intervene": run_intervene,
    "associate": run_associate,
    "simulate": run_simulate,
    "pipeline": run_pipeline,
}


# -- argument parsing -------------------------------------------------------------


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="markovmix", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"markovmix {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--config", help="YAML config file; flags override it")
        sp.add_argument("--out", required=False, help="output directory")
        return sp

    s = common(sub.add_parser("ingest", help="raw daily records -> trajectories, counts, summary"))
    s.add_argument("input")
    s.add_argument("--state-config")
    s.add_argument("--delimiter")
    s.add_argument("--date-format")
    s.add_argument("--max-gap-days", type=int)

    s = common(sub.add_parser("residuals", help="null-model fit and Pearson residuals for a count matrix"))
    s.add_argument("counts")
    s.add_argument("--model", type=int, choices=(1, 2))
    s.add_argument("--state-config")
    s.add_argument("--bins", type=int)

    s = common(sub.add_parser("cluster", help="fit a mixture of Markov chains"))
    s.add_argument("trajectories")
    s.add_argument("--k", type=int)
    s.add_argument("--k-range", help="e.g. 1-6 or 1,2,4: emit a negative log-likelihood table")
    s.add_argument("--seed", type=int)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--restarts", type=int)
    s.add_argument("--smoothing", type=float)
    s.add_argument("--max-gap-days", type=int)

    s = common(sub.add_parser("stationary", help="stationary distribution per cluster"))
    s.add_argument("model", help="model.json or a matrix CSV")

    s = common(sub.add_parser("intervene", help="mood/pain what-if transforms"))
    s.add_argument("model", help="model.json or a 4x4 matrix CSV")
    s.add_argument("--target", choices=("mood", "pain"))
    s.add_argument("--beta", help="number or 'max'")
    s.add_argument("--split", type=float)
    s.add_argument("--preserve-split", action="store_true", default=None)

    s = common(sub.add_parser("associate", help="cluster-covariate odds ratios and proportions"))
    s.add_argument("assignments")
    s.add_argument("covariates")
    s.add_argument("--flag-columns", type=_csv_list)
    s.add_argument("--numeric", type=_csv_list)
    s.add_argument("--group-by")
    s.add_argument("--haldane", action="store_true", default=None, help="add 0.5 to every cell")
    s.add_argument("--decimals", type=int)

    s = common(sub.add_parser("simulate", help="synthetic cohort from a model file or preset"))
    s.add_argument("--model")
    s.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    s.add_argument("--participants", type=int)
    s.add_argument("--length", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--missingness", type=float)
    s.add_argument("--no-covariates", dest="with_covariates", action="store_false", default=None)

    s = common(sub.add_parser("pipeline", help="simulate/ingest -> cluster -> stationary -> intervene -> associate"))
    s.add_argument("--input", help="raw records (otherwise a cohort is simulated)")
    s.add_argument("--covariates")
    s.add_argument("--state-config")
    return p


def load_config(path) -> dict:
    if path is None:
        return {}
    p = _require_file(path, "config")
    if p.suffix.lower() == ".json":
        data = ff.read_json(p)
    else:
        with open(p, encoding="utf-8") as fh:
            try:
                data = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise SchemaError(f"{p}: invalid config ({exc})") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{p}: config must be a mapping")
    # a run manifest replays its recorded configuration
    if data.get("tool") == "markovmix" and "config" in data:
        return data["config"]
    return data


def resolve(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = dict(DEFAULTS.get(cmd, {}))
    cfg.update(load_config(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


def main(argv=None) -> int:
    level = os.environ.get("MARKOVMIX_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        COMMANDS[args.command](cfg)
    except MarkovMixError as exc:
        print(f"markovmix {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"markovmix {args.command}: error: {exc}", file=sys.stderr)
        return InputFileError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
