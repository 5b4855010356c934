import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtraj_witness.numerics import hermitian_eig, unitary_propagator
from qtraj_witness.spin_model import (
    SpinSystemSpec,
    build_hamiltonian,
    collective_operators,
    dipole_coupling,
    excitation_index,
    product_state,
    single_excitation_block,
    total_sigma_z,
)


@pytest.mark.parametrize("r, expected", [(1.0, 1.0), (0.5, 8.0), (2.0, 0.125)])
def test_dipole_coupling(r, expected):
    assert dipole_coupling(r * 2.0, 3.0, 2.0) == pytest.approx(3.0 * expected, rel=1e-15)


def test_dipole_coupling_rejects_nonpositive():
    with pytest.raises(ValueError):
        dipole_coupling(0.0, 1.0, 1.0)


def test_resonant_pair_splitting():
    h = build_hamiltonian(SpinSystemSpec.pair(0.0, g0=1.7))
    block = single_excitation_block(h, 2)
    w, _ = hermitian_eig(block)
    # [[c, g/2], [g/2, c]] splits by exactly g
    assert w[1] - w[0] == pytest.approx(1.7, abs=1e-12)
    assert block[0, 1] == pytest.approx(0.85)


def test_vanishing_coupling_gives_diagonal():
    h = build_hamiltonian(SpinSystemSpec((0.0, 2.0), (0.0, 1e6)))
    assert np.abs(h - np.diag(np.diag(h))).max() < 1e-15


def test_three_spin_block_at_midpoint():
    spec = SpinSystemSpec.with_mobile(delta=100.0, r3=0.5)
    h = build_hamiltonian(spec)
    block = single_excitation_block(h, 3)
    assert block[0, 1].real == pytest.approx(0.5)
    assert block[0, 2].real == pytest.approx(4.0)
    assert block[1, 2].real == pytest.approx(4.0)
    np.testing.assert_allclose(block, block.conj().T)
    # diagonal follows the frequencies up to one common constant
    shift = np.diag(block).real - np.array(spec.frequencies)
    assert np.ptp(shift) < 1e-12


def test_three_spin_conserves_excitations():
    h = build_hamiltonian(SpinSystemSpec.with_mobile(10.0, 0.3))
    sz = total_sigma_z(3)
    assert np.abs(h @ sz - sz @ h).max() < 1e-12


def test_coincident_positions_rejected():
    with pytest.raises(ValueError, match="same position"):
        SpinSystemSpec((0.0, 1.0, 2.0), (0.0, 1.0, 1.0))


def test_non_conserving_operator_rejected():
    from qtraj_witness.spin_model import SIGMA_X, embed

    with pytest.raises(ValueError, match="excitation"):
        single_excitation_block(embed(SIGMA_X, 0, 2), 2)


specs = st.builds(
    lambda w, r, g0: SpinSystemSpec(tuple(w), (0.0, 1.0, r), g0=g0),
    st.lists(st.floats(-50, 50), min_size=3, max_size=3),
    st.floats(0.05, 0.95),
    st.floats(0.1, 10),
)


@settings(max_examples=100, deadline=None)
@given(specs)
def test_hamiltonian_hermitian_and_conserving(spec):
    h = build_hamiltonian(spec)
    assert np.abs(h - h.conj().T).max() < 1e-12
    sz = total_sigma_z(3)
    assert np.abs(h @ sz - sz @ h).max() < 1e-12 * max(1, np.abs(h).max())


def test_sector_population_does_not_leak():
    h = build_hamiltonian(SpinSystemSpec.with_mobile(100.0, 0.3))
    u = unitary_propagator(h, 1e-3)
    psi = product_state("udd")
    idx = [excitation_index(i, 3) for i in range(3)]
    for _ in range(10_000):
        psi = u @ psi
    leak = 1 - np.sum(np.abs(psi[idx]) ** 2)
    assert abs(leak) < 1e-10


def test_collective_two_spin():
    ops = collective_operators(2)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(ops.S2 @ singlet, 0, atol=1e-15)
    up_up = product_state("uu")
    np.testing.assert_allclose(ops.S2 @ up_up, 2 * up_up, atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(ops.S2), [0, 2, 2, 2], atol=1e-12)
    # S2 = 2 P_triplet
    triplet = [product_state("uu"), product_state("dd"), np.array([0, 1, 1, 0]) / np.sqrt(2)]
    p = sum(np.outer(t, t.conj()) for t in triplet)
    assert np.abs(ops.S2 - 2 * p).max() < 1e-12


def test_collective_three_spin_spectrum():
    ops = collective_operators(3)
    w = np.linalg.eigvalsh(ops.S2)
    # brute-force: every eigenvalue is s(s+1) with s in {1/2, 3/2}
    assert all(min(abs(x - 0.75), abs(x - 3.75)) < 1e-12 for x in w)
    assert np.abs(ops.S2 @ ops.M_z - ops.M_z @ ops.S2).max() < 1e-12
