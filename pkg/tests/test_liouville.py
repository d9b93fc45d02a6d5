from dataclasses import replace

import numpy as np
import pytest

from drivendicke.lindblad import apply_rhs, build_master_equation, evolve, ground_state
from drivendicke.liouville import (
    build_liouvillian,
    cluster_eigenvalues,
    project_onto_null,
    propagate,
    scaling_fit,
    spectrum,
    steady_states,
    unvectorize,
    vectorize,
)
from drivendicke.model import Kind, PerturbationSpec, realize, reference_config


def group_by_gap(values, frac=0.05):
    """Group sorted reals where consecutive gaps stay below frac * span."""
    values = np.sort(values)
    span = values[-1] - values[0]
    groups = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] > frac * span:
            groups.append([v])
        else:
            groups[-1].append(v)
    return groups


@pytest.fixture(scope="module")
def sd4():
    me = build_master_equation(reference_config(4))
    return spectrum(build_liouvillian(me))


def test_single_qubit_amplitude_damping_spectrum():
    cfg = replace(reference_config(1), rabi_amplitude=0.0)
    sd = spectrum(build_liouvillian(build_master_equation(cfg)))
    expected = np.sort([0.0, -1.0, -0.5, -0.5])
    assert np.allclose(np.sort(sd.eigenvalues.real), expected, atol=1e-12)
    assert np.abs(sd.eigenvalues.imag).max() < 1e-12


def test_vectorization_consistency():
    rng = np.random.default_rng(5)
    cfg = realize(PerturbationSpec(Kind.SEPARATION, 0.01), reference_config(3))
    me = build_master_equation(cfg)
    liou = build_liouvillian(me)
    for _ in range(20):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = (a + a.conj().T) / 2
        lhs = liou.entries @ vectorize(rho)
        rhs = vectorize(apply_rhs(me, rho))
        assert np.abs(lhs - rhs).max() < 1e-10


def test_trace_is_left_null_vector():
    me = build_master_equation(reference_config(3))
    liou = build_liouvillian(me)
    trace_vec = vectorize(np.eye(8, dtype=complex))
    assert np.abs(trace_vec.conj() @ liou.entries).max() < 1e-10


@pytest.mark.parametrize("n,expected", [(2, 2), (3, 5)])
def test_null_dimension_small(n, expected):
    sd = spectrum(build_liouvillian(build_master_equation(reference_config(n))))
    assert sd.null_dim == expected


def test_unperturbed_four_qubits(sd4):
    assert sd4.null_dim == 14
    assert sd4.eigenvalues.real.max() < 1e-9
    dim = len(sd4.eigenvalues)
    assert np.abs(sd4.left.conj().T @ sd4.right - np.eye(dim)).max() < 1e-8


def test_dephasing_cluster_multiplicities():
    cfg = realize(PerturbationSpec(Kind.DEPHASING, 1 / 200), reference_config(4))
    sd = spectrum(build_liouvillian(build_master_equation(cfg)))
    cluster = cluster_eigenvalues(sd, 14)
    assert np.abs(cluster.imag).max() < 1e-12
    groups = group_by_gap(cluster.real)
    # descending decay rate: multiplicities (3, 4, 6, 1) ending at zero
    assert [len(g) for g in groups] == [3, 4, 6, 1]


def test_driving_phase_pairing_structure():
    cfg = realize(PerturbationSpec(Kind.DRIVING_PHASE, 1 / 400), reference_config(4))
    sd = spectrum(build_liouvillian(build_master_equation(cfg)))
    cluster = cluster_eigenvalues(sd, 14)
    # exactly one zero eigenvalue in the whole spectrum
    assert sd.null_dim == 1
    # three mutually conjugate pairs, eight pure real members
    complex_members = cluster[np.abs(cluster.imag) > 1e-9]
    real_members = cluster[np.abs(cluster.imag) <= 1e-9]
    assert len(complex_members) == 6 and len(real_members) == 8
    for mu in complex_members:
        assert np.min(np.abs(np.conj(mu) - complex_members)) < 1e-10
    # equal real parts appear at sorted positions (5,6), (7,8), (11,12)
    re = cluster.real
    for a, b in [(5, 6), (7, 8), (11, 12)]:
        assert abs(re[a] - re[b]) < 1e-12
        assert abs(cluster[a].imag + cluster[b].imag) < 1e-12
    assert abs(re[6] - re[7]) > 1e-12
    assert abs(re[8] - re[11]) > 1e-9


def test_steady_state_single_qubit():
    cfg = replace(reference_config(1), rabi_amplitude=0.0)
    sd = spectrum(build_liouvillian(build_master_equation(cfg)))
    ss = steady_states(sd)
    assert ss.null_dim == 1
    assert np.allclose(ss.unique_steady, np.diag([1.0, 0.0]), atol=1e-10)


def test_steady_state_reached_from_ground_lies_in_null_span(sd4):
    cfg = reference_config(4)
    me = build_master_equation(cfg)
    traj = evolve(me, ground_state(cfg), 60.0, sample_times=np.array([0.0, 60.0]))
    rho_inf = traj.final_rho
    recon = unvectorize(project_onto_null(sd4, rho_inf))
    assert np.abs(recon - rho_inf).max() < 1e-6


def test_spectral_reconstruction_matches_integration():
    # sum_n c_n exp(mu_n t) against direct integration, three qubits, t = 5
    cfg = reference_config(3)
    me = build_master_equation(cfg)
    sd = spectrum(build_liouvillian(me))
    rho0 = ground_state(cfg)
    traj = evolve(me, rho0, 5.0, sample_times=np.array([0.0, 5.0]))
    recon = propagate(sd, rho0, 5.0)
    assert np.abs(recon - traj.final_rho).max() < 1e-6


def test_null_dim_one_for_each_perturbation():
    for kind, s in [
        (Kind.DEPHASING, 1 / 400),
        (Kind.DRIVING_PHASE, 1 / 400),
        (Kind.SEPARATION, 1 / 400),
    ]:
        cfg = realize(PerturbationSpec(kind, s), reference_config(4))
        sd = spectrum(build_liouvillian(build_master_equation(cfg)))
        assert sd.null_dim == 1, kind


def test_scaling_fit_validation():
    with pytest.raises(ValueError):
        scaling_fit(Kind.DEPHASING, [0.001, 0.002])
    with pytest.raises(ValueError):
        scaling_fit(Kind.DEPHASING, [0.001, 0.0015, 0.002])


def test_scaling_fit_small_system():
    fit = scaling_fit(Kind.DEPHASING, [0.005, 0.01, 0.02, 0.05], n_qubits=2)
    assert fit.tracked.shape == (1, 4)
    assert fit.slopes[0] == pytest.approx(1.0, abs=0.05)


def test_spectrum_dimension_guard():
    from drivendicke.liouville import LiouvillianMatrix, SpectralFailure

    fake = LiouvillianMatrix(dim=4**7, entries=np.zeros((2, 2)))
    with pytest.raises(SpectralFailure):
        spectrum(fake)
