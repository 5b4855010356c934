"""Two static spins coupled through a diffusing third spin.

The mobile particle moves by overdamped Brownian motion between reflecting
walls; its position sets both its own Zeeman frequency and its dipolar
couplings to the static spins. Only the single-excitation sector is
propagated, starting from ``|up, down, down>``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .brownian import BrownianPath, LangevinParams
from .numerics import RngStream
from .spin_model import sector_embed
from .witness import susceptibility_witness

NORM_ABORT = 1e-6


@dataclass(frozen=True)
class ClassicalNoiseConfig:
    """Run controls for the diffusing-particle scenario.

    Frequencies and rates are in units of ``g0`` and lengths in units of
    ``L``. ``dt`` defaults to ``0.001 / delta`` and ``t_end`` to
    ``250 / Omega`` with ``Omega = sqrt(delta**2 + g0**2)``.
    """

    delta: float = 100.0
    g0: float = 1.0
    L: float = 1.0
    D: float = 100.0
    dt: Optional[float] = None
    t_end: Optional[float] = None
    n_traj: int = 1000
    epsilon: float = 0.1
    seed: int = 0
    burn_in_fraction: float = 0.1
    record_every: int = 0

    def __post_init__(self):
        if self.g0 < 0 or self.L <= 0:
            raise ValueError("g0 must be non-negative and L positive")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.D < 0:
            raise ValueError("D must be non-negative")
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        if not 0 <= self.burn_in_fraction < 1:
            raise ValueError("burn_in_fraction must lie in [0, 1)")
        if self.record_every < 0:
            raise ValueError("record_every must be non-negative")
        if self.omega == 0:
            raise ValueError("delta and g0 cannot both vanish")
        if self.dt is None:
            object.__setattr__(self, "dt", 1e-3 / max(self.delta, self.g0))
        if self.t_end is None:
            object.__setattr__(self, "t_end", 250.0 / self.omega)
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        fastest = max(self.delta, self.g0 / self.epsilon**3)
        if self.dt * fastest >= 0.1:
            raise ValueError(
                f"dt={self.dt:g} too coarse: dt * max(delta, wall coupling {fastest:g}) must stay below 0.1"
            )

    @property
    def omega(self) -> float:
        return math.hypot(self.delta, self.g0)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    @property
    def c_max(self) -> float:
        """Largest static off-resonant concurrence ``2 g0 delta / Omega**2``."""
        return 2.0 * self.g0 * self.delta / self.omega**2

    @property
    def langevin(self) -> LangevinParams:
        return LangevinParams.corridor(self.D, self.L, self.epsilon)


@dataclass
class ClassicalTrajectoryResult:
    trajectory_id: int
    path: BrownianPath
    concurrence_series: np.ndarray
    amplitudes: np.ndarray
    mean_concurrence: float
    chi_final: float
    norm_drift: float

    @property
    def final_state(self) -> np.ndarray:
        """Final state on the full eight-dimensional register."""
        return sector_embed(self.amplitudes)


def static_pair_concurrence(delta, g0, t):
    """Concurrence of two fixed spins started in ``|up, down>``.

    With ``Omega = sqrt(delta**2 + g0**2)`` the transferred population is
    ``P = (g0/Omega)**2 sin(Omega t / 2)**2`` and ``C = 2 sqrt(P (1 - P))``.
    """
    t = np.asarray(t, dtype=float)
    omega = math.hypot(delta, g0)
    if omega == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    p = (g0 / omega) ** 2 * np.sin(0.5 * omega * t) ** 2
    c = 2.0 * np.sqrt(np.clip(p * (1.0 - p), 0.0, None))
    return float(c) if c.ndim == 0 else c


def run_classical_trajectory(config: ClassicalNoiseConfig, stream_index: int) -> ClassicalTrajectoryResult:
    """Simulate one realization with its own random stream."""
    n_steps = config.n_steps
    noise = RngStream(config.seed, stream_index).normal(n_steps)
    params = config.langevin
    sigma = math.sqrt(2.0 * params.D * config.dt)
    burn_in = int(math.ceil(config.burn_in_fraction * n_steps))
    burn_in = min(max(burn_in, 1), n_steps)
    every = config.record_every
    n_rec = n_steps // every + 1 if every > 0 else 0
    rec_x = np.empty(n_rec)
    rec_c = np.empty(n_rec)
    psi = np.array([1.0, 0.0, 0.0], dtype=complex)
    mean_c, _ = _kernels.classical_trajectory(
        noise, 0.5 * config.L, sigma, params.wall_lo, params.wall_hi, config.dt,
        config.delta, config.g0, config.L, burn_in, every, psi, rec_x, rec_c,
    )
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > NORM_ABORT:
        raise RuntimeError(
            f"trajectory {stream_index}: norm drift {drift:.3e} exceeds {NORM_ABORT:g}; reduce dt"
        )
    chi = susceptibility_witness(sector_embed(psi), 3)
    times = np.arange(n_rec) * every * config.dt
    return ClassicalTrajectoryResult(
        trajectory_id=stream_index,
        path=BrownianPath(times, rec_x),
        concurrence_series=rec_c,
        amplitudes=psi,
        mean_concurrence=float(mean_c),
        chi_final=float(chi),
        norm_drift=drift,
    )


def run_ensemble(config: ClassicalNoiseConfig, threads: int = 1,
                 indices: Optional[Sequence[int]] = None) -> list[ClassicalTrajectoryResult]:
    """Run trajectories ``0..n_traj-1`` (or ``indices``) in index order.

    Each trajectory owns its random stream, so the output does not depend on
    ``threads``.
    """
    if indices is None:
        indices = range(config.n_traj)
    if threads is None or threads <= 0:
        threads = _auto_threads()
    if threads == 1:
        return [run_classical_trajectory(config, i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: run_classical_trajectory(config, i), indices))


def _auto_threads() -> int:
    import os

    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


@dataclass
class SweepRow:
    D: float
    mean_c_over_cmax: float
    stderr: float


def sweep_diffusivity(config: ClassicalNoiseConfig, D_grid: Sequence[float], threads: int = 1) -> list[SweepRow]:
    """Time-and-ensemble averaged ``C12`` normalized by the static off-resonant maximum.

    The time average skips the first ``burn_in_fraction`` of the run. The
    standard error is taken across trajectories.
    """
    if len(D_grid) == 0:
        raise ValueError("D_grid must not be empty")
    rows = []
    for D in D_grid:
        cfg = replace(config, D=float(D), record_every=0)
        means = np.array([r.mean_concurrence for r in run_ensemble(cfg, threads)])
        stderr = means.std(ddof=1) / math.sqrt(len(means)) if len(means) > 1 else 0.0
        rows.append(SweepRow(float(D), float(means.mean() / cfg.c_max), float(stderr / cfg.c_max)))
    return rows


@dataclass
class ChiDistribution:
    samples: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float
    stderr: float
    tail_below: float
    tail_threshold: float = 1.45
    s2_final: np.ndarray = field(default=None, repr=False)


def chi_histogram(samples, bin_width: float = 0.02, lo: float = 0.4, hi: float = 3.6):
    n_bins = int(round((hi - lo) / bin_width))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    return edges, counts


def chi_distribution(config: ClassicalNoiseConfig, bin_width: float = 0.02, threads: int = 1,
                     tail_threshold: float = 1.45) -> ChiDistribution:
    """Distribution of the final ``chi/beta`` over ``config.n_traj`` realizations."""
    from .witness import s2_expectation

    results = run_ensemble(replace(config, record_every=0), threads)
    chi = np.array([r.chi_final for r in results])
    s2 = np.array([s2_expectation(r.final_state, 3) for r in results])
    edges, counts = chi_histogram(chi, bin_width)
    stderr = chi.std(ddof=1) / math.sqrt(len(chi)) if len(chi) > 1 else 0.0
    return ChiDistribution(
        samples=chi,
        bin_edges=edges,
        counts=counts,
        mean=float(chi.mean()),
        stderr=float(stderr),
        tail_below=float(np.mean(chi < tail_threshold)),
        tail_threshold=tail_threshold,
        s2_final=s2,
    )
