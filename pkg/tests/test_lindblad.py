from dataclasses import replace

import numpy as np
import pytest

from drivendicke.lindblad import (
    IntegrationError,
    apply_rhs,
    build_master_equation,
    evolve,
    ground_state,
    observables,
)
from drivendicke.model import (
    Kind,
    PerturbationSpec,
    collective_operator,
    realize,
    reference_config,
)


def random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian_unit_trace(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    return h + (1 - np.trace(h)) * np.eye(dim) / dim


def test_hamiltonian_hermitian():
    for kind, s in [
        (Kind.NONE, 0.0),
        (Kind.DRIVING_PHASE, 0.01),
        (Kind.SEPARATION, 0.02),
        (Kind.LINEAR_DETUNING, 0.2),
    ]:
        cfg = realize(PerturbationSpec(kind, s), reference_config(3))
        me = build_master_equation(cfg)
        assert np.abs(me.hamiltonian - me.hamiltonian.conj().T).max() < 1e-12


def test_unperturbed_hamiltonian_is_collective():
    cfg = reference_config(4)
    me = build_master_equation(cfg)
    sp = collective_operator(cfg, "raise")
    sm = collective_operator(cfg, "lower")
    expected = cfg.rabi_amplitude / 2 * (sp + sm)
    assert np.abs(me.hamiltonian - expected).max() < 1e-12


def test_rhs_traceless_on_random_inputs():
    rng = np.random.default_rng(0)
    cfg = realize(PerturbationSpec(Kind.DEPHASING, 0.01), reference_config(3))
    me = build_master_equation(cfg)
    for _ in range(100):
        rho = random_hermitian_unit_trace(8, rng)
        out = apply_rhs(me, rho)
        assert abs(np.trace(out)) < 1e-10
        assert np.abs(out - out.conj().T).max() < 1e-10


def test_rhs_single_qubit_decay():
    cfg = replace(reference_config(1), rabi_amplitude=0.0)
    me = build_master_equation(cfg)
    rho = np.array([[0, 0], [0, 1]], dtype=complex)
    out = apply_rhs(me, rho)
    assert np.allclose(out, np.diag([1.0, -1.0]), atol=1e-14)


def test_rhs_ground_state_has_no_dissipative_part():
    cfg = reference_config(2)
    me = build_master_equation(cfg)
    rho = ground_state(cfg)
    h = me.hamiltonian
    coherent = -1j * (h @ rho - rho @ h)
    assert np.abs(apply_rhs(me, rho) - coherent).max() < 1e-14


def test_dephasing_vanishes_on_maximally_mixed():
    base = reference_config(3)
    with_deph = realize(PerturbationSpec(Kind.DEPHASING, 0.7), base)
    rho = np.eye(8, dtype=complex) / 8
    diff = apply_rhs(build_master_equation(with_deph), rho) - apply_rhs(
        build_master_equation(base), rho
    )
    assert np.abs(diff).max() < 1e-14


def test_rhs_dimension_mismatch():
    me = build_master_equation(reference_config(2))
    with pytest.raises(ValueError):
        apply_rhs(me, np.eye(8, dtype=complex))


def test_observables_ground_state():
    cfg = reference_config(3)
    g0, gsr, gtot, pop = observables(cfg, ground_state(cfg))
    assert (g0, gsr, gtot) == (0.0, 0.0, 0.0)
    assert pop == pytest.approx(1.0, abs=1e-12)


def test_observables_singlet():
    cfg = reference_config(2)
    vec = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    rho = np.outer(vec, vec.conj())
    g0, gsr, gtot, pop = observables(cfg, rho)
    assert gsr / 2 == pytest.approx(-0.5, abs=1e-12)  # gammaSR/(N Gamma)
    assert gtot == pytest.approx(0.0, abs=1e-12)
    assert pop == pytest.approx(0.0, abs=1e-12)


def test_observables_fully_inverted():
    cfg = reference_config(4)
    rho = np.zeros((16, 16), dtype=complex)
    rho[15, 15] = 1.0
    g0, gsr, gtot, pop = observables(cfg, rho)
    assert g0 == pytest.approx(4.0, abs=1e-12)
    assert gsr == pytest.approx(0.0, abs=1e-12)
    assert gtot == pytest.approx(4.0, abs=1e-12)
    assert pop == pytest.approx(1.0, abs=1e-12)


def test_observables_triplet_consistency():
    # with all Gamma_nm = Gamma: gammaSR = Gamma<S_+S_-> - gamma0
    cfg = reference_config(2)
    vec = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    rho = np.outer(vec, vec.conj())
    g0, gsr, _, _ = observables(cfg, rho)
    sp = collective_operator(cfg, "raise")
    sm = collective_operator(cfg, "lower")
    expect = np.trace(sp @ sm @ rho).real
    assert gsr == pytest.approx(expect - g0, abs=1e-12)


def test_evolve_single_qubit_decay():
    cfg = replace(reference_config(1), rabi_amplitude=0.0)
    me = build_master_equation(cfg)
    rho0 = np.array([[0, 0], [0, 1]], dtype=complex)
    traj = evolve(me, rho0, 1.0, sample_times=np.array([0.0, 0.5, 1.0]))
    assert traj.final_rho[1, 1].real == pytest.approx(np.exp(-1.0), abs=1e-6)
    assert traj.gamma0[0] == pytest.approx(1.0)  # gamma0/(N Gamma) = <e>
    assert traj.gamma0[2] == pytest.approx(np.exp(-1.0), abs=1e-6)


def test_trajectory_invariants():
    cfg = realize(PerturbationSpec(Kind.DEPHASING, 0.01), reference_config(3))
    me = build_master_equation(cfg)
    traj = evolve(me, ground_state(cfg), 20.0, sample_times=np.linspace(0, 20, 81))
    assert np.allclose(traj.gamma_tot, traj.gamma0 + traj.gamma_sr, atol=1e-10)
    assert np.all(traj.gamma0 >= -1e-12) and np.all(traj.gamma0 <= 1 + 1e-12)
    assert np.all(traj.pop_smax >= -1e-10) and np.all(traj.pop_smax <= 1 + 1e-10)
    rho = traj.final_rho
    assert abs(np.trace(rho).real - 1) < 1e-10
    assert np.abs(rho - rho.conj().T).max() < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-8


def test_evolve_matches_expm_propagation():
    # independent oracle: scipy matrix exponential on the vectorized form
    import scipy.linalg

    from drivendicke.liouville import build_liouvillian, unvectorize, vectorize

    cfg = reference_config(2)
    me = build_master_equation(cfg)
    liou = build_liouvillian(me).entries
    rho0 = ground_state(cfg)
    for tau in (1.0, 5.0):
        traj = evolve(me, rho0, tau, sample_times=np.array([0.0, tau]))
        expected = unvectorize(scipy.linalg.expm(liou * tau) @ vectorize(rho0))
        assert np.abs(traj.final_rho - expected).max() < 1e-6


def test_evolve_steady_state_detection():
    cfg = replace(reference_config(1), rabi_amplitude=0.0)
    me = build_master_equation(cfg)
    rho0 = np.array([[0, 0], [0, 1]], dtype=complex)
    traj = evolve(
        me,
        rho0,
        400.0,
        sample_times=np.linspace(0, 400, 5),
        stop_at_steady=True,
    )
    assert traj.steady_time is not None
    assert traj.steady_time < 400.0
    assert len(traj.times) < 5


def test_evolve_grid_validation():
    cfg = reference_config(2)
    me = build_master_equation(cfg)
    rho0 = ground_state(cfg)
    with pytest.raises(ValueError):
        evolve(me, rho0, 1.0, sample_times=np.array([0.0, 0.5, 0.5]))
    with pytest.raises(ValueError):
        evolve(me, rho0, 1.0, sample_times=np.array([0.0, 2.0]))


def test_evolve_step_underflow():
    # a non-finite state defeats the error estimate; the controller must
    # shrink the step until it reports underflow with the last good tau
    cfg = reference_config(2)
    me = build_master_equation(cfg)
    rho0 = ground_state(cfg)
    rho0[0, 0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(IntegrationError) as err:
        evolve(me, rho0, 1.0, sample_times=np.array([0.0, 1.0]))
    assert err.value.last_tau >= 0.0
