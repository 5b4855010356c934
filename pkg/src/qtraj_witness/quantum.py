"""Photodetection unraveling of two spontaneously decaying qubits.

Each qubit relaxes ``|up> -> |down>`` at rate ``gamma`` while a detector
registers every emitted photon. For independent qubits the detector tells
which qubit emitted; for interacting qubits it resolves the two spectral
lines of the entangled one-excitation eigenstates ``psi_+`` and ``psi_-``.
Both unravelings average to the same density matrix, but their individual
trajectories carry very different entanglement.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .numerics import RngStream
from .spin_model import SIGMA_MINUS, embed
from .witness import CHANNELS, concurrence_mixed

KRAUS_TOL = 1e-12
NORM_ABORT = 1e-6

PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)

INDEPENDENT_LABELS = ("0", "1", "2", "3")
INTERACTING_LABELS = ("0", "+", "-", "3")


@dataclass(frozen=True)
class DecayParams:
    """Initial state ``alpha |up,up> + delta |down,down>`` decaying at rate ``gamma``.

    ``delta`` defaults to the non-negative real value that normalizes the state.
    """

    alpha: complex = 3 / math.sqrt(10)
    delta: Optional[complex] = None
    gamma: float = 1.0
    interacting: bool = False

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.delta is None:
            rest = 1.0 - abs(self.alpha) ** 2
            if rest < -1e-12:
                raise ValueError(f"|alpha| = {abs(self.alpha)} exceeds 1")
            object.__setattr__(self, "delta", math.sqrt(max(rest, 0.0)))
        norm = abs(self.alpha) ** 2 + abs(self.delta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |delta|^2 = {norm!r}, expected 1")

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.alpha, 0, 0, self.delta], dtype=complex)

    @property
    def labels(self) -> tuple[str, ...]:
        return INTERACTING_LABELS if self.interacting else INDEPENDENT_LABELS


@dataclass(frozen=True)
class KrausSet:
    duration: float
    labels: tuple[str, ...]
    operators: np.ndarray  # shape (4, 4, 4), operators[k] belongs to labels[k]

    def completeness_defect(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.operators.shape[-1]))))

    def __getitem__(self, label: str) -> np.ndarray:
        return self.operators[self.labels.index(label)]


def single_qubit_kraus(gamma: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """No-click and click operators of a monitored decaying qubit over time ``t``."""
    if t < 0:
        raise ValueError(f"duration must be non-negative, got {t}")
    decay = math.exp(-gamma * t)
    k0 = np.array([[math.sqrt(decay), 0], [0, 1]], dtype=complex)
    k1 = np.array([[0, 0], [math.sqrt(-math.expm1(-gamma * t)), 0]], dtype=complex)
    return k0, k1


def pair_kraus(params: DecayParams, t: float) -> KrausSet:
    k0, k1 = single_qubit_kraus(params.gamma, t)
    ops = [np.kron(k0, k0), np.kron(k1, k0), np.kron(k0, k1), np.kron(k1, k1)]
    if params.interacting:
        ops[1], ops[2] = (ops[1] + ops[2]) / math.sqrt(2), (ops[1] - ops[2]) / math.sqrt(2)
    return KrausSet(float(t), params.labels, np.array(ops))


def unconditional_state(params: DecayParams, t: float) -> np.ndarray:
    """Ensemble-averaged state ``sum_k K_k |psi0><psi0| K_k^dagger``."""
    kraus = pair_kraus(params, t)
    psi = kraus.operators @ params.initial_state
    return np.einsum("ki,kj->ij", psi, psi.conj())


def decay_lindblads(gamma: float) -> list[np.ndarray]:
    return [math.sqrt(gamma) * embed(SIGMA_MINUS, i, 2) for i in range(2)]


def lindblad_rhs(rho, hamiltonian, lindblads):
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for op in lindblads:
        op_dag = op.conj().T
        ldl = op_dag @ op
        out += op @ rho @ op_dag - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def lindblad_integrate(rho0, hamiltonian, lindblads: Sequence[np.ndarray], dt: float, t_end: float):
    """Classical fourth-order Runge-Kutta for the Lindblad master equation.

    Returns
    -------
    times : ndarray, shape (n + 1,)
    states : ndarray, shape (n + 1, d, d)
    """
    rho = np.array(rho0, dtype=complex)
    h = np.asarray(hamiltonian, dtype=complex)
    lindblads = [np.asarray(op, dtype=complex) for op in lindblads]
    if dt <= 0 or t_end < 0:
        raise ValueError("dt must be positive and t_end non-negative")
    rate = max((float(np.linalg.norm(op, 2)) ** 2 for op in lindblads), default=0.0)
    if dt * rate >= 0.01:
        raise ValueError(f"dt * decay rate = {dt * rate:g} must stay below 0.01")
    n = int(round(t_end / dt))
    step = t_end / n if n else 0.0
    states = np.empty((n + 1,) + rho.shape, dtype=complex)
    states[0] = rho
    tr0 = np.trace(rho).real
    for k in range(n):
        k1 = lindblad_rhs(rho, h, lindblads)
        k2 = lindblad_rhs(rho + 0.5 * step * k1, h, lindblads)
        k3 = lindblad_rhs(rho + 0.5 * step * k2, h, lindblads)
        k4 = lindblad_rhs(rho + step * k3, h, lindblads)
        rho = rho + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(np.trace(rho).real - tr0)
        if drift > 1e-6:
            raise RuntimeError(f"trace drift {drift:.3e} at step {k + 1}; reduce dt")
        states[k + 1] = rho
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if min_eig < -1e-9:
        raise RuntimeError(f"integrated state lost positivity (min eigenvalue {min_eig:.3e})")
    return np.arange(n + 1) * step, states


def esd_concurrence(params: DecayParams, t):
    """Concurrence of the unmonitored state, vanishing in finite time when ``|alpha| > |delta|``."""
    e = np.exp(-params.gamma * np.asarray(t, dtype=float))
    a, d = abs(params.alpha), abs(params.delta)
    c = np.maximum(0.0, 2.0 * e * a * (d - a * (1.0 - e)))
    return float(c) if c.ndim == 0 else c


def esd_time(params: DecayParams) -> float:
    """Time at which the unmonitored concurrence dies, ``-ln(1 - |delta/alpha|) / gamma``.

    Infinite when ``|alpha| <= |delta|``.
    """
    a, d = abs(params.alpha), abs(params.delta)
    if a <= d:
        return math.inf
    return -math.log1p(-d / a) / params.gamma


def interacting_peak_time(params: DecayParams) -> float:
    """Maximum of the interacting mean concurrence, ``(ln 2 - ln(1 + delta/alpha)) / gamma``."""
    a, d = abs(params.alpha), abs(params.delta)
    return (math.log(2.0) - math.log1p(d / a)) / params.gamma


def mean_trajectory_concurrence(params: DecayParams, t):
    """Average pure-trajectory concurrence under photodetection.

    Independent qubits give ``2|alpha delta| e^{-gamma t}``; interacting ones
    add ``2|alpha|^2 e^{-gamma t}(1 - e^{-gamma t})`` from the one-photon
    ``psi_+-`` states.
    """
    e = np.exp(-params.gamma * np.asarray(t, dtype=float))
    c = 2.0 * abs(params.alpha * np.conj(params.delta)) * e
    if params.interacting:
        c = c + 2.0 * abs(params.alpha) ** 2 * e * (1.0 - e)
    return float(c) if c.ndim == 0 else c


@dataclass
class JumpRecord:
    events: list[tuple[float, str]]
    channel_bin: str


@dataclass
class TrajectoryRecord:
    trajectory_id: int
    times: np.ndarray
    states: np.ndarray
    jumps: JumpRecord
    channel_bins: list[str]

    @property
    def concurrence(self) -> np.ndarray:
        return pure_concurrences(self.states)


@dataclass
class TrajectoryBatch:
    """Conditional states of many trajectories on a shared time grid.

    ``states[i, j]`` is trajectory ``trajectory_ids[i]`` at ``times[j]`` and
    ``bins[i, j]`` its photon-record channel (index into ``CHANNELS``) then.
    """

    trajectory_ids: np.ndarray
    times: np.ndarray
    states: np.ndarray
    bins: np.ndarray
    events: list[list[tuple[float, str]]]
    labels: tuple[str, ...]
    extra_uniforms: Optional[np.ndarray] = None

    def record(self, i: int) -> TrajectoryRecord:
        ev = self.events[i]
        return TrajectoryRecord(
            int(self.trajectory_ids[i]),
            self.times,
            self.states[i],
            JumpRecord(list(ev), CHANNELS[self.bins[i, -1]]),
            [CHANNELS[b] for b in self.bins[i]],
        )


def pure_concurrences(states) -> np.ndarray:
    """Vectorized ``2 |psi_0 psi_3 - psi_1 psi_2|`` over the last axis."""
    s = np.asarray(states)
    return np.minimum(1.0, 2.0 * np.abs(s[..., 0] * s[..., 3] - s[..., 1] * s[..., 2]))


def _step_grid(dt: float, t_end: float, record_times) -> tuple[int, float, np.ndarray]:
    if t_end < 0 or dt <= 0:
        raise ValueError("dt must be positive and t_end non-negative")
    n_steps = max(1, int(round(t_end / dt))) if t_end > 0 else 0
    step = t_end / n_steps if n_steps else dt
    if record_times is None:
        record_steps = np.array([n_steps])
    else:
        record_steps = np.rint(np.asarray(record_times, dtype=float) / step).astype(int)
        if np.any(record_steps < 0) or np.any(record_steps > n_steps):
            raise ValueError("record_times must lie within [0, t_end]")
    return n_steps, step, record_steps


def _simulate_batch(params, kraus_ops, psi0, uniforms, record_steps, step, labels):
    n_traj, n_steps = uniforms.shape
    psi = np.tile(psi0, (n_traj, 1))
    photons = np.zeros(n_traj, dtype=np.int64)
    first = np.zeros(n_traj, dtype=np.int64)
    events: list[list[tuple[float, str]]] = [[] for _ in range(n_traj)]
    out_states = np.empty((n_traj, len(record_steps), 4), dtype=complex)
    out_bins = np.empty((n_traj, len(record_steps)), dtype=np.int64)
    kt = np.swapaxes(kraus_ops, -1, -2)
    rows = np.arange(n_traj)

    def snapshot(k_step):
        for j in np.nonzero(record_steps == k_step)[0]:
            out_states[:, j] = psi
            out_bins[:, j] = np.where(photons == 0, 0, np.where(photons >= 2, 3, first))

    snapshot(0)
    for k in range(n_steps):
        cand = psi[None, :, :] @ kt  # (4 channels, n_traj, 4)
        probs = np.einsum("kbi,kbi->bk", cand, cand.conj()).real
        cum = np.cumsum(probs, axis=1)
        total = cum[:, -1]
        drift = np.max(np.abs(total - 1.0))
        if drift > NORM_ABORT:
            raise RuntimeError(f"Kraus step lost normalization by {drift:.3e}")
        choice = np.minimum((cum < (uniforms[:, k] * total)[:, None]).sum(axis=1), 3)
        psi = cand[choice, rows] / np.sqrt(probs[rows, choice])[:, None]
        jumped = np.nonzero(choice)[0]
        if jumped.size:
            t = (k + 1) * step
            for b in jumped:
                c = int(choice[b])
                events[b].append((t, labels[c]))
                if photons[b] == 0:
                    first[b] = c
                photons[b] += 2 if c == 3 else 1
        snapshot(k + 1)
    return out_states, out_bins, events


def _uniform_block(seed: int, indices, n: int) -> np.ndarray:
    return np.stack([RngStream(seed, int(i)).uniform(n) for i in indices]) if len(indices) else np.empty((0, n))


def sample_trajectories(params: DecayParams, dt: float, t_end: float, n_traj: int, seed: int,
                        record_times=None, start_index: int = 0, batch_size: int = 2000,
                        threads: int = 1, extra_draws: int = 0) -> TrajectoryBatch:
    """Monte Carlo photodetection trajectories, one random stream per trajectory.

    Every step applies one Kraus operator of duration ``dt`` (rescaled so the
    grid ends exactly at ``t_end``), chosen with its Born probability, and
    renormalizes. Trajectory ``i`` consumes the first ``n_steps`` uniforms of
    ``RngStream(seed, i)``; ``extra_draws`` further uniforms per trajectory
    are returned for downstream measurements.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    n_steps, step, record_steps = _step_grid(dt, t_end, record_times)
    if n_steps and step * params.gamma >= 0.01 and n_steps > 1:
        raise ValueError(f"step * gamma = {step * params.gamma:g} must stay below 0.01")
    kraus = pair_kraus(params, step)
    ids = np.arange(start_index, start_index + n_traj)
    chunks = [ids[i:i + batch_size] for i in range(0, n_traj, batch_size)]

    def run(chunk):
        u = _uniform_block(seed, chunk, n_steps + extra_draws)
        s, b, ev = _simulate_batch(params, kraus.operators, params.initial_state,
                                   u[:, :n_steps], record_steps, step, kraus.labels)
        return s, b, ev, u[:, n_steps:]

    if threads is not None and threads != 1 and len(chunks) > 1:
        workers = threads if threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    events = [e for p in parts for e in p[2]]
    return TrajectoryBatch(
        trajectory_ids=ids,
        times=record_steps * step,
        states=np.concatenate([p[0] for p in parts]),
        bins=np.concatenate([p[1] for p in parts]),
        events=events,
        labels=kraus.labels,
        extra_uniforms=np.concatenate([p[3] for p in parts]) if extra_draws else None,
    )


def sample_trajectory(params: DecayParams, dt: float, t_end: float, stream_index: int, seed: int = 0,
                      record_times=None) -> TrajectoryRecord:
    """Single trajectory; identical to entry ``stream_index`` of :func:`sample_trajectories`."""
    batch = sample_trajectories(params, dt, t_end, 1, seed, record_times, start_index=stream_index)
    return batch.record(0)


@dataclass
class SubensembleEstimate:
    n: int
    time: float
    mean_concurrence: float
    stderr: float
    n_groups: int


def subensemble_concurrence(states, n: int, time: float = float("nan")) -> SubensembleEstimate:
    """Mean concurrence of ``n``-trajectory mixtures, grouped in sampling order.

    Trailing states that do not fill a whole group are dropped.
    """
    states = np.asarray(states, dtype=complex)
    if n < 1:
        raise ValueError("subensemble size must be at least 1")
    if n > len(states):
        raise ValueError(f"subensemble size {n} exceeds the {len(states)} available states")
    n_groups = len(states) // n
    groups = states[: n_groups * n].reshape(n_groups, n, 4)
    rho = np.einsum("gni,gnj->gij", groups, groups.conj()) / n
    c = np.atleast_1d(concurrence_mixed(rho))
    stderr = c.std(ddof=1) / math.sqrt(n_groups) if n_groups > 1 else 0.0
    return SubensembleEstimate(n, float(time), float(c.mean()), float(stderr), n_groups)


@dataclass
class ChannelStats:
    channel: str
    count_outcome0: int
    count_outcome2: int

    @property
    def count(self) -> int:
        return self.count_outcome0 + self.count_outcome2

    @property
    def mean_s2(self) -> float:
        return 2.0 * self.count_outcome2 / self.count if self.count else float("nan")


def channel_binned_s2(params: DecayParams, t_measure: float, n_traj: int, seed: int,
                      dt: Optional[float] = None, threads: int = 1) -> list[ChannelStats]:
    """Bin a single projective ``S^2`` readout per trajectory by its photon record.

    A0 holds trajectories without a photon, A1/A2 those with exactly one
    (first line/qubit and second line/qubit), A3 those with two.
    """
    if t_measure <= 0:
        raise ValueError("t_measure must be positive")
    if dt is None:
        dt = 1e-3 / params.gamma
    batch = sample_trajectories(params, dt, t_measure, n_traj, seed, threads=threads, extra_draws=1)
    final = batch.states[:, -1]
    bins = batch.bins[:, -1]
    p0 = np.abs(final @ PSI_MINUS.conj()) ** 2
    outcome = np.where(batch.extra_uniforms[:, 0] < p0, 0, 2)
    stats = []
    for c, name in enumerate(CHANNELS):
        sel = bins == c
        stats.append(ChannelStats(name, int(np.sum(outcome[sel] == 0)), int(np.sum(outcome[sel] == 2))))
    return stats
