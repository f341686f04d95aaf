"""Run orchestration and artifact I/O.

A run directory holds::

    config.json        resolved config (dB inputs plus linear values)
    scenario.json      physical inputs and their hash
    front.csv          final archive, raw/normalized objectives + decoded deployment
    population.csv     final incumbents, same columns
    ep_history.csv     archive objectives after every generation
    hv_log.csv         generation, evaluations, hv, ep_size
    transcripts.jsonl  one record per LLM call (ledma only)
    summary.json       headline numbers
    front.svg, hv_convergence.svg
"""
from __future__ import annotations

import csv
import json
import logging
import os
import shutil
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from .config import RunConfig
from .llm import HttpBackend, LlmOperator, MockBackend
from .llm.prompt import TEMPLATE_VERSION
from .metrics import DEFAULT_REF, FrontNormalization, hypervolume_2d, normalize_front
from .model import IsacProblem, Scenario, decode
from .moead import RunResult, run
from .operators import DeOperator, GaOperator, RandomOperator
from .plotting import plot_fronts, plot_hv_curves

log = logging.getLogger(__name__)


class ScenarioMismatch(ValueError):
    pass


@dataclass
class RunArtifacts:
    path: Path
    summary: dict
    result: RunResult


def build_operator(cfg: RunConfig, scn: Scenario):
    if cfg.algo == "moead-ga":
        return GaOperator(cfg.ga_params())
    if cfg.algo == "moead-de":
        return DeOperator(cfg.de_params())
    if cfg.algo == "random":
        return RandomOperator()
    if cfg.backend == "http":
        backend = HttpBackend(cfg.llm_config())
    else:
        backend = MockBackend(noise=cfg.mock_noise)
    return LlmOperator(
        backend,
        num_users=scn.num_users,
        fallback=GaOperator(),
        max_retries=cfg.llm.max_retries,
        keep_transcripts=cfg.keep_transcripts,
    )


def normalization_for(points) -> FrontNormalization:
    """Min/max bounds of ``points``; a flat coordinate gets a unit span."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    return FrontNormalization(tuple(lo.tolist()), tuple(hi.tolist()))


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


def solution_rows(xs, fs, scn: Scenario, norm: FrontNormalization):
    K = scn.num_uavs
    header = ["f1_utility", "f2_log_crb", "f1_tilde", "f2_tilde", "f1_norm", "f2_norm"]
    for k in range(1, K + 1):
        header += [f"x_{k}", f"y_{k}", f"p_rad_{k}", f"p_com_{k}"]
    header += [f"g_{i}" for i in range(scn.dim)]
    rows = []
    nf = normalize_front(fs, norm) if len(fs) else np.empty((0, 2))
    for x, f, n in zip(xs, fs, nf):
        dep = decode(x, scn)
        row = [-f[0], f[1], f[0], f[1], n[0], n[1]]
        for k in range(K):
            row += [dep.uav_xy[k, 0], dep.uav_xy[k, 1], dep.p_rad_mw[k], dep.p_com_mw[k]]
        row += list(x)
        rows.append([_fmt(v) for v in row])
    return header, rows


def hv_curve(trace, norm: FrontNormalization, ref=DEFAULT_REF):
    out = []
    for rec in trace:
        hv = hypervolume_2d(normalize_front(rec.archive_f, norm), ref) if len(rec.archive_f) else 0.0
        out.append((rec.generation, rec.evaluations, hv, len(rec.archive_f)))
    return out


def _run_dir_name(cfg: RunConfig, root: Path) -> Path:
    stamp = datetime.now().strftime("%Y%m%dT%H%M%S")
    base = f"{cfg.algo}-seed{cfg.seed}-{stamp}"
    path, i = root / base, 1
    while path.exists():
        path = root / f"{base}-{i}"
        i += 1
    return path


def run_experiment(cfg: RunConfig, out_dir=None) -> RunArtifacts:
    """Run one (algorithm, seed) cell and write its artifacts atomically."""
    scn = cfg.scenario()
    problem = IsacProblem(scn)
    operator = build_operator(cfg, scn)
    workers = cfg.llm.max_in_flight if cfg.uses_http() else 1
    t0 = time.perf_counter()
    result = run(problem, operator, cfg.algo_params(), workers=workers)
    wall = time.perf_counter() - t0

    root = Path(out_dir if out_dir is not None else cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    final = _run_dir_name(cfg, root)
    tmp = Path(tempfile.mkdtemp(prefix=".tmp-", dir=root))
    os.chmod(tmp, 0o755)
    try:
        summary = write_run(tmp, cfg, scn, result, operator, wall)
        os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    log.info("run written to %s", final)
    return RunArtifacts(final, summary, result)


def write_run(path: Path, cfg: RunConfig, scn: Scenario, result: RunResult, operator, wall: float) -> dict:
    scn_hash = scn.hash()
    ax, af = result.archive.sorted()
    norm = normalization_for(af if len(af) else result.population.f)

    (path / "config.json").write_text(json.dumps(cfg.snapshot(), indent=2, sort_keys=True) + "\n")
    (path / "scenario.json").write_text(
        json.dumps({"scenario_hash": scn_hash, **scn.to_dict()}, indent=2, sort_keys=True) + "\n"
    )
    header, rows = solution_rows(ax, af, scn, norm)
    _write_csv(path / "front.csv", header, rows)
    header, rows = solution_rows(result.population.x, result.population.f, scn, norm)
    _write_csv(path / "population.csv", header, rows)
    _write_csv(
        path / "ep_history.csv",
        ["generation", "evaluations", "f1_tilde", "f2_tilde"],
        ([rec.generation, rec.evaluations, _fmt(f[0]), _fmt(f[1])] for rec in result.trace for f in rec.archive_f),
    )
    curve = hv_curve(result.trace, norm)
    _write_csv(
        path / "hv_log.csv",
        ["generation", "evaluations", "hv", "ep_size"],
        ([g, e, _fmt(h), n] for g, e, h, n in curve),
    )
    summary = {
        "algo": cfg.algo,
        "seed": cfg.seed,
        "backend": cfg.backend if cfg.algo == "ledma" else None,
        "scenario_hash": scn_hash,
        "evaluations": result.evaluations,
        "ep_size": len(af),
        "final_hv": curve[-1][2],
        "hv_ref": list(DEFAULT_REF),
        "normalization": norm.to_dict(),
        "operator_failures": result.operator_failures,
        "wall_time_s": round(wall, 3),
    }
    if isinstance(operator, LlmOperator):
        summary.update(
            llm_calls=operator.calls,
            fallback_rate=operator.fallback_rate,
            partial_replies=operator.partials,
            prompt_template=TEMPLATE_VERSION,
        )
        if cfg.keep_transcripts:
            operator.write_transcripts(path / "transcripts.jsonl")
    (path / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    plot_fronts({cfg.algo: np.column_stack([-af[:, 0], af[:, 1]]) if len(af) else af}, path / "front.svg")
    plot_hv_curves({cfg.algo: ([c[1] for c in curve], [c[2] for c in curve])}, path / "hv_convergence.svg")
    return summary


# --- comparison -----------------------------------------------------------


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def load_run(run_dir):
    run_dir = Path(run_dir)
    summary = json.loads((run_dir / "summary.json").read_text())
    front = np.array(
        [[float(r["f1_tilde"]), float(r["f2_tilde"])] for r in _read_csv(run_dir / "front.csv")]
    ).reshape(-1, 2)
    history: dict[int, tuple[int, list]] = {}
    for r in _read_csv(run_dir / "ep_history.csv"):
        g = int(r["generation"])
        ev, pts = history.setdefault(g, (int(r["evaluations"]), []))
        pts.append((float(r["f1_tilde"]), float(r["f2_tilde"])))
    return summary, front, history


def compare(run_dirs, out_dir, ref=DEFAULT_REF) -> dict:
    """Union-normalize the final fronts of several runs and rank them by HV."""
    if len(run_dirs) < 2:
        raise ValueError("compare needs at least two runs")
    runs = []
    for d in run_dirs:
        summary, front, history = load_run(d)
        runs.append((Path(d).name, summary, front, history))
    hashes = {r[1]["scenario_hash"] for r in runs}
    if len(hashes) != 1:
        raise ScenarioMismatch(f"runs come from different scenarios: {sorted(hashes)}")
    fronts = [r[2] for r in runs if len(r[2])]
    if not fronts:
        raise ValueError("all fronts are empty")
    norm = normalization_for(np.vstack(fronts))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table, merged, curves, curve_rows = [], [], {}, []
    for label, summary, front, history in runs:
        nf = normalize_front(front, norm)
        hv = hypervolume_2d(nf, ref)
        table.append({"run": label, "algo": summary["algo"], "seed": summary["seed"], "hv": hv, "ep_size": len(front)})
        for f, n in zip(front, nf):
            merged.append([label, summary["algo"], summary["seed"], _fmt(-f[0]), _fmt(f[1]), _fmt(f[0]), _fmt(f[1]), _fmt(n[0]), _fmt(n[1])])
        evals, hvs = [], []
        for g in sorted(history):
            ev, pts = history[g]
            h = hypervolume_2d(normalize_front(pts, norm), ref)
            evals.append(ev)
            hvs.append(h)
            curve_rows.append([label, summary["algo"], g, ev, _fmt(h)])
        curves[label] = (evals, hvs)
    table.sort(key=lambda r: (-r["hv"], r["run"]))

    _write_csv(
        out / "hv_table.csv",
        ["rank", "run", "algo", "seed", "hv", "ep_size"],
        ([i + 1, r["run"], r["algo"], r["seed"], _fmt(r["hv"]), r["ep_size"]] for i, r in enumerate(table)),
    )
    _write_csv(
        out / "fronts.csv",
        ["run", "algo", "seed", "f1_utility", "f2_log_crb", "f1_tilde", "f2_tilde", "f1_norm", "f2_norm"],
        merged,
    )
    _write_csv(out / "hv_curves.csv", ["run", "algo", "generation", "evaluations", "hv"], curve_rows)
    meta = {"scenario_hash": hashes.pop(), "normalization": norm.to_dict(), "hv_ref": list(ref), "runs": [r[0] for r in runs]}
    (out / "normalization.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    plot_fronts({r[0]: np.column_stack([-r[2][:, 0], r[2][:, 1]]) for r in runs}, out / "fronts.svg")
    plot_hv_curves(curves, out / "hv_curves.svg")
    return {"table": table, "normalization": norm}
