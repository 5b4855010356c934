import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtraj_witness import _kernels
from qtraj_witness.brownian import brownian_path
from qtraj_witness.classical import (
    ClassicalNoiseConfig,
    chi_distribution,
    chi_histogram,
    run_classical_trajectory,
    run_ensemble,
    static_pair_concurrence,
    sweep_diffusivity,
)
from qtraj_witness.numerics import RngStream, hermitian_eig, unitary_propagator
from qtraj_witness.spin_model import (
    SpinSystemSpec,
    build_hamiltonian,
    excitation_index,
    product_state,
    single_excitation_block,
)
from qtraj_witness.witness import pairwise_concurrence, s2_expectation


def eigh3(a):
    w = np.empty(3)
    v = np.empty((3, 3))
    _kernels.eigh3(a[0, 0], a[1, 1], a[2, 2], a[0, 1], a[0, 2], a[1, 2], w, v)
    return w, v


sym = st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6)


@settings(max_examples=300, deadline=None)
@given(sym)
def test_eigh3_matches_reference(entries):
    a00, a11, a22, a01, a02, a12 = entries
    a = np.array([[a00, a01, a02], [a01, a11, a12], [a02, a12, a22]])
    w, v = eigh3(a)
    ref, _ = hermitian_eig(a)
    scale = max(1.0, np.abs(a).max())
    np.testing.assert_allclose(w, ref, atol=1e-12 * scale)
    assert np.abs(v.T @ v - np.eye(3)).max() < 1e-12
    # exponential built from the kernel's frame equals the reference propagator
    dt = 0.05 / scale
    u = (v * np.exp(-1j * w * dt)) @ v.T
    assert np.abs(u - unitary_propagator(a, dt)).max() < 1e-12


def test_eigh3_degenerate_cases():
    for a in (np.eye(3) * 2.5, np.diag([1.0, 1.0, 3.0]), np.diag([1.0, 3.0, 3.0]), np.zeros((3, 3))):
        w, v = eigh3(a)
        np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-14)
        assert np.abs(v.T @ v - np.eye(3)).max() < 1e-14


@pytest.mark.parametrize("r3", [0.1, 0.13, 0.5, 0.77, 0.9])
def test_eigh3_on_model_blocks(r3):
    spec = SpinSystemSpec.with_mobile(100.0, r3)
    block = single_excitation_block(build_hamiltonian(spec), 3).real
    block -= np.eye(3) * block[0, 0]
    w, v = eigh3(block)
    ref, _ = hermitian_eig(block)
    np.testing.assert_allclose(w, ref, atol=1e-12 * np.abs(block).max())


def test_static_pair_examples():
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(static_pair_concurrence(0.0, 1.0, t), np.abs(np.sin(t)), atol=1e-14)
    omega = math.hypot(100, 1)
    assert static_pair_concurrence(100.0, 1.0, math.pi / omega) == pytest.approx(2 * 100 / omega**2, abs=1e-14)
    assert np.all(static_pair_concurrence(3.0, 0.0, t) == 0)


def test_static_pair_matches_propagation():
    spec = SpinSystemSpec.pair(7.0, g0=1.3)
    h = build_hamiltonian(spec)
    psi0 = product_state("ud")
    for t in (0.1, 0.7, 2.3):
        psi = unitary_propagator(h, t) @ psi0
        c = 2 * abs(psi[1] * psi[2])
        assert c == pytest.approx(static_pair_concurrence(7.0, 1.3, t), abs=1e-12)


def test_config_defaults_and_guard():
    cfg = ClassicalNoiseConfig()
    assert cfg.dt == pytest.approx(1e-5)
    assert cfg.t_end * cfg.omega == pytest.approx(250)
    assert cfg.c_max == pytest.approx(0.019998, abs=1e-6)
    with pytest.raises(ValueError, match="too coarse"):
        ClassicalNoiseConfig(dt=2e-4)
    with pytest.raises(ValueError):
        ClassicalNoiseConfig(n_traj=0)


def test_positions_follow_brownian_path():
    cfg = ClassicalNoiseConfig(D=50.0, dt=5e-5, t_end=0.05, n_traj=1, seed=4, record_every=1)
    res = run_classical_trajectory(cfg, 2)
    ref = brownian_path(0.5, cfg.dt, cfg.n_steps, cfg.langevin, RngStream(4, 2))
    np.testing.assert_allclose(res.path.positions, ref.positions, atol=1e-12)


def test_kernel_matches_stepwise_propagators():
    cfg = ClassicalNoiseConfig(D=20.0, dt=5e-5, t_end=0.01, n_traj=1, seed=9, record_every=1)
    res = run_classical_trajectory(cfg, 0)
    psi = product_state("udd")
    idx = [excitation_index(i, 3) for i in range(3)]
    for k, x in enumerate(res.path.positions[1:], start=1):
        h = build_hamiltonian(SpinSystemSpec.with_mobile(cfg.delta, x))
        psi = unitary_propagator(h, cfg.dt) @ psi
        assert pairwise_concurrence(psi, (0, 1)) == pytest.approx(res.concurrence_series[k], abs=1e-10)
    # the kernel drops a global phase only
    assert abs(abs(np.vdot(psi[idx], res.amplitudes)) - 1) < 1e-10


def test_pinned_particle_matches_static_oracle():
    cfg = ClassicalNoiseConfig(D=0.0, dt=5e-5, t_end=0.5, n_traj=1, record_every=100)
    res = run_classical_trajectory(cfg, 0)
    assert np.all(res.path.positions == 0.5)
    w, v = hermitian_eig(build_hamiltonian(SpinSystemSpec.with_mobile(cfg.delta, 0.5)))
    psi0 = product_state("udd")
    for t, c in zip(res.path.times, res.concurrence_series):
        psi = (v * np.exp(-1j * w * t)) @ (v.conj().T @ psi0)
        assert pairwise_concurrence(psi, (0, 1)) == pytest.approx(c, abs=1e-8)
    idx = [excitation_index(i, 3) for i in range(3)]
    assert abs(abs(np.vdot(psi[idx], res.amplitudes)) - 1) < 1e-8


def test_no_coupling_no_concurrence():
    cfg = ClassicalNoiseConfig(g0=0.0, D=10.0, dt=5e-5, t_end=0.2, n_traj=1, record_every=10)
    res = run_classical_trajectory(cfg, 0)
    assert np.all(res.concurrence_series == 0)
    assert res.mean_concurrence == 0


def test_unitarity_over_full_horizon():
    cfg = ClassicalNoiseConfig(n_traj=1, seed=1)  # default dt over Omega t = 250
    res = run_classical_trajectory(cfg, 0)
    assert res.norm_drift < 1e-8
    assert np.all((res.concurrence_series >= 0) & (res.concurrence_series <= 1)) if res.concurrence_series.size else True


def test_chi_identity_and_bounds():
    cfg = ClassicalNoiseConfig(D=100.0, dt=5e-5, t_end=0.3, n_traj=30, seed=2)
    for res in run_ensemble(cfg):
        assert abs(res.chi_final - (s2_expectation(res.final_state, 3) - 0.25)) < 1e-12
        assert 0.5 - 1e-9 <= res.chi_final <= 3.5 + 1e-9


def test_thread_count_does_not_change_results():
    cfg = ClassicalNoiseConfig(D=100.0, dt=5e-5, t_end=0.05, n_traj=12, seed=3, record_every=50)
    one = run_ensemble(cfg, threads=1)
    four = run_ensemble(cfg, threads=4)
    for a, b in zip(one, four):
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert np.array_equal(a.concurrence_series, b.concurrence_series)
        assert a.chi_final == b.chi_final


def test_sweep_shape_and_determinism():
    cfg = ClassicalNoiseConfig(dt=5e-5, t_end=0.05, n_traj=8, seed=5)
    rows = sweep_diffusivity(cfg, [1.0, 100.0])
    again = sweep_diffusivity(cfg, [1.0, 100.0], threads=2)
    assert [(r.D, r.mean_c_over_cmax, r.stderr) for r in rows] == [
        (r.D, r.mean_c_over_cmax, r.stderr) for r in again
    ]
    with pytest.raises(ValueError):
        sweep_diffusivity(cfg, [])


def test_stderr_shrinks_like_sqrt_n():
    cfg = ClassicalNoiseConfig(D=100.0, dt=5e-5, t_end=0.05, seed=6)
    small = sweep_diffusivity(replace(cfg, n_traj=500), [100.0])[0].stderr
    large = sweep_diffusivity(replace(cfg, n_traj=1000), [100.0])[0].stderr
    assert abs(small / large / math.sqrt(2) - 1) < 0.2


def test_chi_histogram_bins():
    edges, counts = chi_histogram(np.array([0.5, 1.5, 1.5, 3.5]))
    assert len(edges) == 161 and edges[0] == pytest.approx(0.4) and edges[-1] == pytest.approx(3.6)
    assert counts.sum() == 4


def test_chi_distribution_summary():
    cfg = ClassicalNoiseConfig(D=100.0, dt=5e-5, t_end=0.2, n_traj=40, seed=7)
    dist = chi_distribution(cfg)
    assert dist.counts.sum() == 40
    assert dist.mean == pytest.approx(dist.samples.mean())
    assert dist.tail_below == pytest.approx(np.mean(dist.samples < 1.45))
