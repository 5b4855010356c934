"""Small dense complex linear algebra and reproducible random streams."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest elementwise deviation ``max |A_ij - conj(A_ji)|``."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect >= tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |A - A^dagger| = {defect:.3e} (tol {tol:g})"
        )
    return a


def hermitian_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like, shape (d, d)
        Hermitian matrix (checked to ``HERMITIAN_TOL``).

    Returns
    -------
    eigenvalues : ndarray, shape (d,)
        Real eigenvalues in ascending order.
    eigenvectors : ndarray, shape (d, d)
        Orthonormal eigenvectors stored as columns.
    """
    a = check_hermitian(a)
    # symmetrize so LAPACK sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, v


def unitary_propagator(h, dt: float) -> np.ndarray:
    """Return ``exp(-i H dt)`` built from the eigendecomposition of ``H``."""
    if not np.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def ket(*amplitudes) -> np.ndarray:
    """Normalized complex column vector from amplitudes."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    return psi / np.linalg.norm(psi)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


class RngStream:
    """Counter-based random stream keyed by ``(master_seed, stream_index)``.

    Each stream is a Philox generator seeded from
    ``SeedSequence(master_seed, spawn_key=(stream_index,))``, so trajectory
    ``i`` always receives the same draws no matter how work is split between
    workers.
    """

    __slots__ = ("master_seed", "stream_index", "generator")

    def __init__(self, master_seed: int, stream_index: int = 0):
        if master_seed < 0 or master_seed >= 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)
