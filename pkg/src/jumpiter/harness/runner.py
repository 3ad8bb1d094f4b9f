"""Monte Carlo driver: simulate replicates, reduce in order, write reports."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import __version__
from .._accel import default_backend
from ..dolean_milstein import doleans_exact, milstein_scheme
from ..errors import UsageError
from ..iterated_error import (decompose_error, divergent_term, iterated_error_process, jump_terms,
                              s_curve, write_curves_csv)
from ..levy_path import IntegratedPath, build_skeleton, dump_path_csv, integrate_sigma, simulate_jumps
from ..limit_law import draw_ingredients, sample_limit_U, sample_limit_X
from ..randomness import stream
from ..stats import ks_threshold, ks_two_sample, loglog_rate, summarize
from .config import ExperimentConfig

log = logging.getLogger(__name__)

RAW_COLUMNS = {
    "X_error": ("replicate_id", "n", "value"),
    "divergent": ("replicate_id", "n", "value"),
    "milstein": ("replicate_id", "n", "value", "x_scheme", "x_exact"),
    "decomposition": ("replicate_id", "n", "value", "epsilon", "S", "M", "F", "sup_abs_nK",
                      "identity_residual"),
    "jump_terms": ("replicate_id", "n", "ordinal", "time", "delta_z", "xi_n", "alpha", "beta", "gamma",
                   "collision", "ref_alpha", "ref_beta_lemma", "ref_gamma_lemma", "ref_beta_corrected",
                   "ref_gamma_corrected"),
}
LIMIT_COLUMNS = ("replicate_id", "t", "value", "form")
_RUN_ONLY = ("workers", "out_dir")


def simulate_path(cfg: ExperimentConfig, replicate_id: int) -> IntegratedPath:
    """The driving path of one replicate; each ingredient has its own stream."""
    tr = cfg.triplet
    seed = cfg.master_seed
    jumps = simulate_jumps(tr, stream(seed, replicate_id, "jumps"))
    sk = build_skeleton(tr, jumps, cfg.mesh_n, stream(seed, replicate_id, "brownian"))
    return integrate_sigma(cfg.sigma, sk, stream(seed, replicate_id, "sigma"))


def _limit_rows(cfg, path, rep, x_exact=None):
    ing = draw_ingredients(path, cfg.master_seed, rep)
    rows = []
    for form in cfg.limit_forms:
        if x_exact is None:
            curve = sample_limit_X(path, ing, form, max(cfg.n_list), jump_sign=cfg.jump_sign)
        else:
            weights = None if cfg.u_weights == "auto" else cfg.u_weights
            curve = sample_limit_U(path, x_exact, ing, form, solver_mesh=max(cfg.n_list),
                                   weights=weights, jump_sign=cfg.jump_sign)
        rows.append((rep, 1.0, curve.endpoint, form))
    return rows


def _jump_rows(cfg, path, rep):
    c = path.skeleton.triplet.c
    rows = []
    for n in cfg.n_list:
        records = jump_terms(path, n)
        if not records:
            continue
        ref = draw_ingredients(path, cfg.master_seed, rep, prefix=f"check-{n}")
        for k, rec in enumerate(records):
            xi, dz = ref.xi[k], rec.delta_z
            rows.append((rep, n, rec.ordinal, rec.time, dz, rec.xi_n, rec.alpha, rec.beta, rec.gamma,
                         int(rec.collision),
                         math.sqrt(c * xi * (1 - xi)) * ref.n1[k] * ref.n2[k] * dz,
                         0.5 * math.sqrt(c * xi) * ref.k1[k] * dz,
                         0.5 * math.sqrt(c * (1 - xi)) * ref.k2[k] * dz,
                         0.5 * c * xi * ref.k1[k] * dz,
                         0.5 * c * (1 - xi) * ref.k2[k] * dz))
    return rows


def replicate_rows(cfg: ExperimentConfig, replicate_id: int) -> dict:
    """All raw rows produced by one replicate, keyed by table name."""
    path = simulate_path(cfg, replicate_id)
    rep = replicate_id
    fn = cfg.functional
    out = {"raw": [], "limit": []}
    if fn == "X_error":
        for n in cfg.n_list:
            out["raw"].append((rep, n, iterated_error_process(path, n, method=cfg.method).endpoint))
        out["limit"] = _limit_rows(cfg, path, rep)
    elif fn == "limit_only":
        out["limit"] = _limit_rows(cfg, path, rep)
    elif fn == "divergent":
        out["raw"] = [(rep, n, divergent_term(path, n)) for n in cfg.n_list]
    elif fn == "milstein":
        exact = doleans_exact(path)
        for n in cfg.n_list:
            sc = milstein_scheme(path, n, exact=exact)
            out["raw"].append((rep, n, float(sc.u[-1]), float(sc.x_scheme[-1]), float(sc.x_exact[-1])))
        out["limit"] = _limit_rows(cfg, path, rep, x_exact=exact)
    elif fn == "decomposition":
        for n in cfg.n_list:
            s = s_curve(path, n)
            for eps in cfg.epsilon_list:
                m, f, k = decompose_error(path, n, eps)
                resid = float(np.max(np.abs(s.values - m.values - f.values - k.values)))
                out["raw"].append((rep, n, k.endpoint, eps, s.endpoint, m.endpoint, f.endpoint,
                                   float(np.max(np.abs(n * k.values))), resid))
    elif fn == "jump_terms":
        out["raw"] = _jump_rows(cfg, path, rep)
    return out


def _run_chunk(args):
    cfg, lo, hi = args
    return [replicate_rows(cfg, r) for r in range(lo, hi)]


def collect(cfg: ExperimentConfig) -> dict:
    """Rows of every replicate, concatenated in replicate order whatever ``workers`` is."""
    R = cfg.replicates
    results = []
    if cfg.workers == 1:
        results = [_run_chunk((cfg, 0, R))]
    else:
        nchunks = min(R, cfg.workers * 8)
        edges = np.linspace(0, R, nchunks + 1).astype(int)
        jobs = [(cfg, int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    tables = {"raw": [], "limit": []}
    for chunk in results:
        for rows in chunk:
            for key in tables:
                tables[key].extend(rows[key])
    return tables


@dataclass
class RunResult:
    config: ExperimentConfig
    raw: list
    limit: list
    summary: dict
    rates: list


def _column(rows, idx, where=None):
    return np.array([r[idx] for r in rows if where is None or where(r)], dtype=np.float64)


def _ks_block(sample, limit_rows, forms):
    out = {}
    for form in forms:
        ref = _column(limit_rows, 2, lambda r, f=form: r[3] == f)
        out[form] = {"ks": ks_two_sample(sample, ref),
                     "threshold95": ks_threshold(sample.size, ref.size)}
    out["winning_form"] = min(forms, key=lambda f: out[f]["ks"])
    return out


def _rate(points, label):
    try:
        return loglog_rate(points), None
    except UsageError as exc:
        return None, f"{label}: {exc}"


def _per_n_block(raw, cfg, value_idx=2):
    per_n, means = {}, []
    for n in cfg.n_list:
        v = _column(raw, value_idx, lambda r, n=n: r[1] == n)
        per_n[str(n)] = {"value": summarize(v).as_dict(), "scaled": summarize(n * v).as_dict(),
                         "abs": summarize(np.abs(v)).as_dict(),
                         "abs_scaled": summarize(np.abs(n * v)).as_dict()}
        means.append((n, float(np.mean(np.abs(v)))))
    return per_n, means


def summarise(cfg: ExperimentConfig, tables: dict):
    raw, limit = tables["raw"], tables["limit"]
    fn = cfg.functional
    # settings that cannot change any number are kept out so reports compare byte for byte
    echo = {k: v for k, v in cfg.echo().items() if k not in _RUN_ONLY}
    summary = {"functional": fn, "config": echo, "version": __version__,
               "replicates": cfg.replicates}
    rates, notes = [], []
    if fn in ("X_error", "milstein"):
        label = "E|X^n_1|" if fn == "X_error" else "E|U^n_1|"
        per_n, means = _per_n_block(raw, cfg)
        summary["per_n"] = per_n
        if len(means) >= 3:
            fit, note = _rate(means, label)
            if fit is not None:
                rates.append((label, fit))
            else:
                notes.append(note)
        n_top = max(cfg.n_list)
        top = n_top * _column(raw, 2, lambda r: r[1] == n_top)
        summary["limit_ks"] = {"n": n_top, **_ks_block(top, limit, cfg.limit_forms)}
        summary["limit"] = {f: summarize(_column(limit, 2, lambda r, f=f: r[3] == f)).as_dict()
                            for f in cfg.limit_forms}
    elif fn == "limit_only":
        summary["limit"] = {f: summarize(_column(limit, 2, lambda r, f=f: r[3] == f)).as_dict()
                            for f in cfg.limit_forms}
    elif fn == "divergent":
        per_n, _ = _per_n_block(raw, cfg)
        summary["per_n"] = per_n
        var = [per_n[str(n)]["value"]["variance"] for n in cfg.n_list]
        summary["variance_ratios"] = [b / a if a > 0 else math.inf for a, b in zip(var, var[1:])]
        if len(var) >= 3:
            fit, note = _rate(list(zip(cfg.n_list, var)), "Var(D^n_1)")
            if fit is not None:
                rates.append(("Var(D^n_1)", fit))
            else:
                notes.append(note)
    elif fn == "decomposition":
        block = {}
        for n in cfg.n_list:
            for eps in cfg.epsilon_list:
                sel = lambda r, n=n, e=eps: r[1] == n and r[3] == e
                sup = summarize(_column(raw, 7, sel))
                block[f"n={n},eps={eps!r}"] = {
                    "sup_abs_nK": sup.as_dict(),
                    "K_1": summarize(_column(raw, 2, sel)).as_dict(),
                    "max_identity_residual": float(np.max(_column(raw, 8, sel))),
                    "max_abs_S": float(np.max(np.abs(_column(raw, 4, sel)))),
                }
        summary["decomposition"] = block
    elif fn == "jump_terms":
        block = {}
        for n in cfg.n_list:
            every = [r for r in raw if r[1] == n]
            # cells holding two or more jumps are left out of the distribution checks
            rows = [r for r in every if not r[9]]
            entry = {"jumps": len(every), "collisions": len(every) - len(rows)}
            if rows:
                col = lambda i: _column(rows, i)
                pairs = {"alpha": (6, {"lemma_derived": 10, "corrected": 10}),
                         "beta": (7, {"lemma_derived": 11, "corrected": 13}),
                         "gamma": (8, {"lemma_derived": 12, "corrected": 14})}
                for term, (idx, refs) in pairs.items():
                    entry[term] = {form: ks_two_sample(col(idx), col(ref)) for form, ref in refs.items()}
                    entry[term]["summary"] = summarize(col(idx)).as_dict()
                entry["xi_n"] = summarize(col(5)).as_dict()
            block[str(n)] = entry
        summary["jump_terms"] = block
    summary["rate_notes"] = notes
    summary["rates"] = {label: fit.as_dict() for label, fit in rates}
    return summary, rates


def _write_csv(filename, header, rows):
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_reports(result: RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    if result.raw:
        _write_csv(os.path.join(out_dir, f"raw_{cfg.functional}.csv"), RAW_COLUMNS[cfg.functional], result.raw)
    if result.limit:
        _write_csv(os.path.join(out_dir, "raw_limit.csv"), LIMIT_COLUMNS, result.limit)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    _write_csv(os.path.join(out_dir, "rates.csv"), ("functional", "slope", "ci", "intercept"),
               [(label, fit.slope, fit.slope_halfwidth, fit.intercept) for label, fit in result.rates])


def dump_replicate(cfg: ExperimentConfig, replicate_id: int, out_dir: str) -> list:
    """Path, curve and (for Milstein runs) scheme CSVs of a single replicate."""
    os.makedirs(out_dir, exist_ok=True)
    path = simulate_path(cfg, replicate_id)
    written = [os.path.join(out_dir, f"path_{replicate_id}.csv")]
    dump_path_csv(path, written[0])
    curves = [iterated_error_process(path, n, method=cfg.method) for n in cfg.n_list]
    if cfg.functional == "decomposition":
        for n in cfg.n_list:
            for eps in cfg.epsilon_list:
                curves.extend(decompose_error(path, n, eps))
    written.append(os.path.join(out_dir, f"curves_{replicate_id}.csv"))
    write_curves_csv(curves, written[-1])
    if cfg.functional == "milstein":
        exact = doleans_exact(path)
        for n in cfg.n_list:
            written.append(os.path.join(out_dir, f"milstein_{replicate_id}_n{n}.csv"))
            milstein_scheme(path, n, exact=exact).write_csv(written[-1])
    return written


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None, write: bool = True) -> RunResult:
    """Run all replicates and (optionally) write ``raw_*.csv``, ``summary.json`` and ``rates.csv``.

    Wall-clock and host details go to ``run_info.json`` so that the other
    files are byte-identical across reruns and worker counts.
    """
    start = time.perf_counter()
    log.info("running %s (%s) with R=%d, workers=%d", cfg.preset or "custom", cfg.functional,
             cfg.replicates, cfg.workers)
    tables = collect(cfg)
    summary, rates = summarise(cfg, tables)
    result = RunResult(cfg, tables["raw"], tables["limit"], summary, rates)
    if write:
        out_dir = out_dir or cfg.out_dir
        write_reports(result, out_dir)
        info = {"wall_seconds": time.perf_counter() - start, "workers": cfg.workers, "out_dir": out_dir,
                "backend": default_backend(), "python": platform.python_version(),
                "numpy": np.__version__}
        with open(os.path.join(out_dir, "run_info.json"), "w") as fh:
            json.dump(info, fh, indent=2, sort_keys=True)
    return result
