"""Quantum-trajectory simulation and entanglement-witness statistics."""

__version__ = "0.1.0"

from .numerics import RngStream, hermitian_eig, unitary_propagator  # noqa: E402
from .witness import (  # noqa: E402
    concurrence_mixed,
    concurrence_pure,
    pairwise_concurrence,
    s2_expectation,
    susceptibility_witness,
)

__all__ = [
    "RngStream",
    "hermitian_eig",
    "unitary_propagator",
    "concurrence_mixed",
    "concurrence_pure",
    "pairwise_concurrence",
    "s2_expectation",
    "susceptibility_witness",
]
