"""Spin-1/2 Hamiltonians with dipolar flip-flop couplings.

Basis convention: ``|up> = (1, 0)``, ``|down> = (0, 1)`` and spin 1 is the
leftmost tensor factor, so the two-qubit basis is
``(|uu>, |ud>, |du>, |dd>)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .numerics import HERMITIAN_TOL, check_hermitian

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


def embed(op: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    """Place a single-spin operator on ``site`` of an ``n_spins`` register."""
    factors = [np.eye(2, dtype=complex)] * n_spins
    factors[site] = op
    return reduce(np.kron, factors)


def product_state(*spins: str) -> np.ndarray:
    """Product ket from a string of ``"u"``/``"d"`` labels, e.g. ``product_state("u", "d")``."""
    if len(spins) == 1 and len(spins[0]) > 1:
        spins = tuple(spins[0])
    lookup = {"u": UP, "d": DOWN}
    return reduce(np.kron, [lookup[s] for s in spins])


def total_sigma_z(n_spins: int) -> np.ndarray:
    return sum(embed(SIGMA_Z, i, n_spins) for i in range(n_spins))


def excitation_index(site: int, n_spins: int) -> int:
    """Basis index of the state with only ``site`` spin up."""
    return (2**n_spins - 1) - 2 ** (n_spins - 1 - site)


def dipole_coupling(r, g0: float, L: float = 1.0):
    """Inverse-cube coupling ``g0 / (r / L)**3``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError(f"separation must be positive, got {r}")
    out = g0 / (r / L) ** 3
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpinSystemSpec:
    """Frequencies and 1-D positions of 2 or 3 dipole-coupled spins."""

    frequencies: tuple[float, ...]
    positions: tuple[float, ...]
    g0: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        object.__setattr__(self, "positions", tuple(float(r) for r in self.positions))
        n = len(self.frequencies)
        if n not in (2, 3):
            raise ValueError(f"n_spins must be 2 or 3, got {n}")
        if len(self.positions) != n:
            raise ValueError("frequencies and positions must have the same length")
        if self.g0 <= 0 or self.L <= 0:
            raise ValueError("g0 and L must be positive")
        for i in range(n):
            for j in range(i + 1, n):
                if self.positions[i] == self.positions[j]:
                    raise ValueError(f"spins {i + 1} and {j + 1} sit at the same position")

    @property
    def n_spins(self) -> int:
        return len(self.frequencies)

    @property
    def detuning(self) -> float:
        return self.frequencies[1] - self.frequencies[0]

    def coupling(self, i: int, j: int) -> float:
        return dipole_coupling(abs(self.positions[i] - self.positions[j]), self.g0, self.L)

    @classmethod
    def pair(cls, delta: float, g0: float = 1.0, L: float = 1.0) -> SpinSystemSpec:
        """Two static spins at ``0`` and ``L`` with ``omega_1 = 0``, ``omega_2 = delta``."""
        return cls((0.0, delta), (0.0, L), g0, L)

    @classmethod
    def with_mobile(cls, delta: float, r3: float, g0: float = 1.0, L: float = 1.0) -> SpinSystemSpec:
        """Static pair plus a third spin at ``r3`` whose frequency sweeps linearly, ``r3 * delta / L``."""
        return cls((0.0, delta, r3 * delta / L), (0.0, L, r3), g0, L)


def build_hamiltonian(spec: SpinSystemSpec) -> np.ndarray:
    """Full ``2**N`` Hamiltonian: Zeeman terms plus flip-flop hopping ``g_ij/2 s+_i s-_j``."""
    n = spec.n_spins
    h = sum(0.5 * w * embed(SIGMA_Z, i, n) for i, w in enumerate(spec.frequencies))
    for i in range(n):
        for j in range(n):
            if i != j:
                h = h + 0.5 * spec.coupling(i, j) * (
                    embed(SIGMA_PLUS, i, n) @ embed(SIGMA_MINUS, j, n)
                )
    return h


def single_excitation_block(h: np.ndarray, n_spins: int) -> np.ndarray:
    """Restrict ``h`` to the states with exactly one spin up.

    Row/column ``i`` is the state with spin ``i`` up.
    """
    h = check_hermitian(h)
    sz = total_sigma_z(n_spins)
    if h.shape != sz.shape:
        raise ValueError(f"expected a {sz.shape} operator for {n_spins} spins, got {h.shape}")
    comm = np.max(np.abs(h @ sz - sz @ h))
    if comm >= HERMITIAN_TOL:
        raise ValueError(f"operator does not conserve excitation number: |[H, Sz]| = {comm:.3e}")
    idx = [excitation_index(i, n_spins) for i in range(n_spins)]
    return h[np.ix_(idx, idx)]


def sector_embed(amplitudes: Sequence[complex]) -> np.ndarray:
    """Lift single-excitation amplitudes ``(c_1, ..., c_N)`` to the full register."""
    c = np.asarray(amplitudes, dtype=complex)
    n = c.shape[-1]
    out = np.zeros(c.shape[:-1] + (2**n,), dtype=complex)
    for i in range(n):
        out[..., excitation_index(i, n)] = c[..., i]
    return out


@dataclass(frozen=True)
class CollectiveOperators:
    M_x: np.ndarray
    M_y: np.ndarray
    M_z: np.ndarray
    S2: np.ndarray

    @property
    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.M_x, self.M_y, self.M_z


@lru_cache(maxsize=None)
def collective_operators(n_spins: int) -> CollectiveOperators:
    """Total spin components ``M_a = sum_i sigma^a_i / 2`` and ``S^2``."""
    if n_spins not in (2, 3):
        raise ValueError(f"n_spins must be 2 or 3, got {n_spins}")
    ms = []
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        m = 0.5 * sum(embed(s, i, n_spins) for i in range(n_spins))
        m.flags.writeable = False
        ms.append(m)
    s2 = sum(m @ m for m in ms)
    s2.flags.writeable = False
    return CollectiveOperators(*ms, s2)
