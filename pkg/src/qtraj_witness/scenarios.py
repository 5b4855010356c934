"""Figure-regeneration scenarios and their output files."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import replace
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .classical import ClassicalNoiseConfig, chi_distribution, run_ensemble, static_pair_concurrence, sweep_diffusivity
from .config import ScenarioConfig
from .numerics import RngStream
from .quantum import (
    DecayParams,
    channel_binned_s2,
    esd_time,
    pure_concurrences,
    sample_trajectories,
    subensemble_concurrence,
    unconditional_state,
)
from .witness import concurrence_mixed, random_witness_density

HEADERS = {
    "static_pair": ("t", "concurrence"),
    "brownian_traj": ("t", "r3", "concurrence_12"),
    "diffusivity_sweep": ("D", "mean_C_over_Cmax", "stderr"),
    "chi_hist": ("bin_lo", "bin_hi", "count"),
    "esd": ("t", "C_mixed", "C_mc", "C_mc_err", "C_n2", "C_n2_err", "C_n5", "C_n5_err", "C_n50", "C_n50_err"),
    "s2_channels": ("channel", "count_outcome0", "count_outcome2", "mean_S2"),
    "scatter": ("s2_expectation", "concurrence"),
}


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def write_table(out_dir: str, name: str, rows: Sequence[Sequence], fmt: str) -> str:
    header = HEADERS[name]
    if fmt == "csv":
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_fmt(v) for v in row] for row in rows)
    else:
        path = os.path.join(out_dir, f"{name}.json")
        records = [{k: _plain(v) for k, v in zip(header, row)} for row in rows]
        write_json(path, records)
    return path


def write_json(path: str, data) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _classical_config(cfg: ScenarioConfig, D: float, record_every: int = 0) -> ClassicalNoiseConfig:
    p = cfg.parameters
    return ClassicalNoiseConfig(
        delta=float(p["delta"]), g0=float(p["g0"]), L=float(p["L"]), D=float(D),
        dt=p["dt"], t_end=p["t_end"], n_traj=cfg.n_traj, epsilon=float(p["epsilon"]),
        seed=cfg.seed, burn_in_fraction=float(p["burn_in_fraction"]), record_every=record_every,
    )


def _decay_params(cfg: ScenarioConfig) -> DecayParams:
    p = cfg.parameters
    return DecayParams(alpha=float(p["alpha"]), gamma=float(p["gamma"]), interacting=bool(p["interacting"]))


def _static_pair(cfg, threads):
    p = cfg.parameters
    delta, g0 = float(p["delta"]), float(p["g0"])
    omega = math.hypot(delta, g0)
    t_end = int(p["periods"]) * 2 * math.pi / omega
    n = int(p["n_points"])
    t = t_end * np.arange(n) / n  # periodic grid: endpoint excluded
    c = static_pair_concurrence(delta, g0, t)
    rows = list(zip(t, c))
    summary = {
        "time_averaged_C": float(np.mean(c)),
        "max_C": float(np.max(c)),
        "C_max_closed_form": 2 * g0 * delta / omega**2 if delta else 1.0,
    }
    return {"static_pair": rows}, {}, summary


def _brownian_ensemble(cfg, threads):
    p = cfg.parameters
    path_cfg = _classical_config(cfg, p["D"], record_every=int(p["record_every"]))
    n_paths = min(int(p["n_paths"]), cfg.n_traj)
    rows = []
    for res in run_ensemble(path_cfg, threads, indices=range(n_paths)):
        rows.extend(zip(res.path.times, res.path.positions, res.concurrence_series))
    sweep = sweep_diffusivity(_classical_config(cfg, p["D"]), [float(d) for d in p["D_grid"]], threads)
    sweep_rows = [(r.D, r.mean_c_over_cmax, r.stderr) for r in sweep]
    summary = {
        "max_mean_C_over_Cmax": max(r.mean_c_over_cmax for r in sweep),
        "C_max": path_cfg.c_max,
    }
    return {"brownian_traj": rows, "diffusivity_sweep": sweep_rows}, {}, summary


def _chi_distribution(cfg, threads):
    p = cfg.parameters
    dist = chi_distribution(_classical_config(cfg, p["D"]), float(p["bin_width"]), threads)
    rows = list(zip(dist.bin_edges[:-1], dist.bin_edges[1:], dist.counts))
    side = {"chi_summary": {"mean": dist.mean, "stderr": dist.stderr, "tail_below_1.45": dist.tail_below}}
    summary = {"mean_chi_over_beta": dist.mean, "stderr": dist.stderr, "tail_below_1.45": dist.tail_below}
    return {"chi_hist": rows}, side, summary


def _esd_compare(cfg, threads):
    p = cfg.parameters
    params = _decay_params(cfg)
    dt = p["dt"] if p["dt"] is not None else 1e-3 / params.gamma
    times = np.linspace(0.0, float(p["t_end"]), int(p["n_points"]))
    batch = sample_trajectories(params, dt, float(p["t_end"]), cfg.n_traj, cfg.seed,
                                record_times=times, threads=threads)
    sizes = [int(n) for n in p["subensembles"]]
    rows = []
    for j, t in enumerate(batch.times):
        states = batch.states[:, j]
        c = pure_concurrences(states)
        err = c.std(ddof=1) / math.sqrt(len(c)) if len(c) > 1 else 0.0
        row = [t, concurrence_mixed(unconditional_state(params, t)), c.mean(), err]
        for n in sizes:
            est = subensemble_concurrence(states, n, t)
            row += [est.mean_concurrence, est.stderr]
        rows.append(row)
    summary = {"t_ESD": esd_time(params), "max_C_mc": max(r[2] for r in rows)}
    return {"esd": rows}, {}, summary


def _s2_channels(cfg, threads):
    p = cfg.parameters
    params = _decay_params(cfg)
    t_measure = p["t_measure"] if p["t_measure"] is not None else 2 * esd_time(params)
    if not math.isfinite(t_measure):
        raise ValueError("no sudden death for these amplitudes; set t_measure explicitly")
    stats = channel_binned_s2(params, float(t_measure), cfg.n_traj, cfg.seed, p["dt"], threads)
    rows = [(s.channel, s.count_outcome0, s.count_outcome2, s.mean_s2) for s in stats]
    summary = {f"mean_S2_{s.channel}": s.mean_s2 for s in stats}
    summary["t_measure"] = float(t_measure)
    return {"s2_channels": rows}, {}, summary


def _witness_scatter(cfg, threads):
    rows = []
    for i in range(cfg.n_traj):
        _, s2, c = random_witness_density(RngStream(cfg.seed, i))
        rows.append((s2, c))
    arr = np.array(rows)
    summary = {
        "n_samples": len(rows),
        "violations": int(np.sum((arr[:, 0] < 1) & (arr[:, 1] == 0))),
        "fraction_witnessed": float(np.mean(arr[:, 0] < 1)),
    }
    return {"scatter": rows}, {}, summary


RUNNERS: dict[str, Callable] = {
    "static-pair": _static_pair,
    "brownian-ensemble": _brownian_ensemble,
    "chi-distribution": _chi_distribution,
    "esd-compare": _esd_compare,
    "s2-channels": _s2_channels,
    "witness-scatter": _witness_scatter,
}


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> dict[str, Any]:
    """Run one scenario, write its tables plus ``manifest.json``, return the summary.

    Outputs depend only on ``cfg``; ``threads`` affects speed, never bytes.
    """
    os.makedirs(cfg.output_dir, exist_ok=True)
    tables, side, summary = RUNNERS[cfg.scenario](cfg, threads)
    written = [write_table(cfg.output_dir, name, rows, cfg.format) for name, rows in tables.items()]
    for name, data in side.items():
        written.append(write_json(os.path.join(cfg.output_dir, f"{name}.json"), data))
    resolved = cfg.resolved()
    resolved.pop("output_dir")
    manifest = {
        "version": __version__,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config": resolved,
        "checksums": {os.path.basename(p): _sha256(p) for p in written},
        "summary": summary,
    }
    write_json(os.path.join(cfg.output_dir, "manifest.json"), manifest)
    return summary
