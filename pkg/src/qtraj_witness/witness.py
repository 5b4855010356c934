"""Entanglement measures and witnesses for two and three spins.

All functions accept kets (shape ``(d,)``) or density matrices (shape
``(d, d)``); the concurrence routines additionally broadcast over leading
batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import RngStream
from .spin_model import SIGMA_Y, collective_operators

NORM_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
# eigenvalues of rho below this are treated as exact zeros before taking sqrt(rho)
RHO_ZERO_CUTOFF = 1e-14

YY = np.kron(SIGMA_Y, SIGMA_Y)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)

KINDS = ("concurrence", "chi_over_beta", "s2_expectation", "s2_outcome")
CHANNELS = ("A0", "A1", "A2", "A3")


@dataclass(frozen=True)
class WitnessSample:
    value: float
    kind: str
    trajectory_id: int = -1
    time: float = 0.0
    channel: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")
        if self.channel is not None and self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")


def _as_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def _expect(op: np.ndarray, state) -> float:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return float(np.real(np.vdot(state, op @ state)))
    return float(np.real(np.trace(op @ state)))


def concurrence_pure(state) -> float:
    """Concurrence ``2 |alpha delta - gamma nu|`` of a normalized two-qubit ket."""
    psi = np.asarray(state, dtype=complex).ravel()
    if psi.shape != (4,):
        raise ValueError(f"expected a two-qubit ket of length 4, got shape {psi.shape}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized: <psi|psi> = {norm2!r}")
    a, g, n, d = psi
    return float(min(1.0, 2.0 * abs(a * d - g * n)))


def _validate_density(rho: np.ndarray) -> np.ndarray:
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"expected 4x4 density matrices, got shape {rho.shape}")
    herm = np.max(np.abs(rho - np.swapaxes(rho, -1, -2).conj()))
    if herm > TRACE_TOL:
        raise ValueError(f"density matrix is not Hermitian (defect {herm:.3e})")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise ValueError(f"density matrix trace deviates from 1 (worst {tr.flat[np.argmax(np.abs(tr - 1))]!r})")
    rho = 0.5 * (rho + np.swapaxes(rho, -1, -2).conj())
    w, v = np.linalg.eigh(rho)
    if np.any(w[..., 0] < -PSD_TOL):
        raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {w[..., 0].min():.3e})")
    return w, v


def concurrence_mixed(rho) -> float | np.ndarray:
    """Wootters concurrence of one or a stack of two-qubit density matrices.

    The square roots ``lambda_i`` of the spectrum of ``rho @ rho_tilde`` are
    obtained as the singular values of ``sqrt(rho) @ YY @ conj(sqrt(rho))``,
    which avoids amplifying round-off through a square root near zero.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = _validate_density(rho)
    w = np.where(w < RHO_ZERO_CUTOFF, 0.0, w)
    sqrt_rho = (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2).conj()
    lam = np.linalg.svd(sqrt_rho @ YY @ sqrt_rho.conj(), compute_uv=False)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    c = np.clip(c, 0.0, 1.0)
    return float(c) if c.ndim == 0 else c


def partial_trace(rho: np.ndarray, keep: tuple[int, ...], n_spins: int) -> np.ndarray:
    """Reduced density matrix on the spins listed in ``keep`` (0-based, in order)."""
    rho = _as_density(rho).reshape((2,) * (2 * n_spins))
    traced = [k for k in range(n_spins) if k not in keep]
    # contract bra/ket legs of traced spins, highest index first so axes stay valid
    for offset, k in enumerate(sorted(traced, reverse=True)):
        n_left = n_spins - offset
        rho = np.trace(rho, axis1=k, axis2=k + n_left)
    d = 2 ** len(keep)
    return rho.reshape(d, d)


def pairwise_concurrence(state, pair: tuple[int, int] = (0, 1)) -> float:
    """Concurrence between two spins of a three-spin ket after tracing out the third.

    ``pair`` uses 0-based spin labels.
    """
    psi = np.asarray(state, dtype=complex).ravel()
    if psi.shape != (8,):
        raise ValueError(f"expected a three-spin ket of length 8, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized: |psi| = {norm!r}")
    i, j = sorted(pair)
    if i == j or not (0 <= i < 3 and 0 <= j < 3):
        raise ValueError(f"invalid spin pair {pair}")
    rho = partial_trace(psi / norm, (i, j), 3)
    return concurrence_mixed(rho)


def susceptibility_witness(state, n_spins: int = 3) -> float:
    """Zero-field fluctuation sum ``chi/beta = sum_a Var(M_a)``.

    Values below ``n_spins / 2`` witness entanglement.
    """
    ops = collective_operators(n_spins)
    total = 0.0
    for m in ops.components:
        mean = _expect(m, state)
        total += _expect(m @ m, state) - mean * mean
    return total


def s2_expectation(state, n_spins: int = 2) -> float:
    """Expectation value of the total spin squared."""
    return _expect(collective_operators(n_spins).S2, state)


def singlet_probability(state) -> float:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return float(abs(np.vdot(SINGLET, state)) ** 2)
    return float(np.real(SINGLET.conj() @ state @ SINGLET))


def s2_sample(state, rng: RngStream) -> int:
    """Projective measurement of ``S^2`` on two qubits; returns 0 (singlet) or 2 (triplet)."""
    p0 = singlet_probability(state)
    return 0 if rng.uniform() < p0 else 2


def sample_unit_disk(rng: RngStream) -> complex:
    u, phi = rng.uniform(2)
    return complex(np.sqrt(u) * np.cos(2 * np.pi * phi), np.sqrt(u) * np.sin(2 * np.pi * phi))


def random_witness_density(rng: RngStream, damping: Optional[complex] = None, max_tries: int = 10_000):
    """Random two-qubit state for the ``S^2`` witness scatter.

    A Gaussian ket is normalized and turned into a projector; every
    off-diagonal element is then multiplied by one complex factor drawn
    uniformly from the unit disk (conjugated below the diagonal). Candidates
    that are not positive semidefinite are resampled.

    Parameters
    ----------
    rng : RngStream
    damping : complex, optional
        Fix the off-diagonal factor instead of sampling it.
    max_tries : int
        Rejection cap.

    Returns
    -------
    rho : ndarray, shape (4, 4)
    s2 : float
    concurrence : float
    """
    upper = np.triu(np.ones((4, 4), dtype=bool), 1)
    worst = None
    for _ in range(max_tries):
        z = rng.normal(4) + 1j * rng.normal(4)
        psi = z / np.linalg.norm(z)
        rho = np.outer(psi, psi.conj())
        lam = sample_unit_disk(rng) if damping is None else complex(damping)
        rho = np.where(upper, lam * rho, np.where(upper.T, np.conj(lam) * rho, rho))
        min_eig = np.linalg.eigvalsh(rho)[0]
        if min_eig >= -PSD_TOL:
            return rho, s2_expectation(rho, 2), concurrence_mixed(rho)
        worst = min_eig if worst is None else min(worst, min_eig)
    raise RuntimeError(
        f"no positive semidefinite sample after {max_tries} tries (most negative eigenvalue {worst:.3e})"
    )
