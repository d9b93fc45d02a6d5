import math

import numpy as np
import pytest

from drivendicke.couplings import coupling_deltas, green_function_tables
from drivendicke.model import SystemConfig, reference_config


def config_at(positions):
    n = len(positions)
    return SystemConfig(
        n_qubits=n,
        rabi_amplitude=0.0,
        drive_phases=(0.0,) * n,
        detunings=(0.0,) * n,
        positions=tuple(positions),
    )


def test_unit_lattice():
    t = green_function_tables(reference_config(4))
    assert np.abs(t.omega_nm).max() < 1e-12
    assert np.allclose(t.gamma_nm, 1.0, atol=1e-12)


def test_quarter_wavelength_pair():
    t = green_function_tables(config_at([0.0, 0.25]))
    assert t.omega_nm[0, 1] == pytest.approx(0.5, abs=1e-14)
    assert t.gamma_nm[0, 1] == pytest.approx(0.0, abs=1e-14)


def test_half_wavelength_pair():
    t = green_function_tables(config_at([0.0, 0.5]))
    assert t.omega_nm[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert t.gamma_nm[0, 1] == pytest.approx(-1.0, abs=1e-14)


def test_tables_structure():
    rng = np.random.default_rng(7)
    t = green_function_tables(config_at(rng.uniform(0, 5, size=5)))
    assert np.allclose(t.omega_nm, t.omega_nm.T)
    assert np.allclose(t.gamma_nm, t.gamma_nm.T)
    assert np.allclose(np.diag(t.gamma_nm), 1.0)
    assert np.abs(np.diag(t.omega_nm)).max() == 0.0
    # Green's-function modulus: omega^2 + (gamma/2)^2 = (Gamma/2)^2 off diagonal
    n = 5
    for i in range(n):
        for j in range(n):
            if i != j:
                mod = t.omega_nm[i, j] ** 2 + (t.gamma_nm[i, j] / 2) ** 2
                assert mod == pytest.approx(0.25, abs=1e-12)


def test_translation_invariance():
    rng = np.random.default_rng(11)
    z = rng.uniform(0, 3, size=4)
    t1 = green_function_tables(config_at(z))
    t2 = green_function_tables(config_at(z + 17.3))
    assert np.allclose(t1.omega_nm, t2.omega_nm, atol=1e-10)
    assert np.allclose(t1.gamma_nm, t2.gamma_nm, atol=1e-10)


def test_deltas_zero():
    d = coupling_deltas(0.0, reference_config(3))
    assert np.abs(d.d_omega_nm).max() == 0.0
    assert np.abs(d.d_gamma_nm).max() == 0.0


def test_neighbor_delta_values():
    # nearest-neighbor pair at lattice constant 1 + 1/400
    d = coupling_deltas(1 / 400, reference_config(4))
    expected_omega = 0.5 * math.sin(2 * math.pi / 400)
    expected_gamma = math.cos(2 * math.pi / 400) - 1.0
    assert d.d_omega_nm[0, 1] == pytest.approx(expected_omega, abs=1e-14)
    assert abs(d.d_omega_nm[0, 1]) == pytest.approx(7.854e-3, abs=1e-5)
    assert d.d_gamma_nm[0, 1] == pytest.approx(expected_gamma, abs=1e-14)
    assert d.d_gamma_nm[0, 1] == pytest.approx(-1.2337e-4, abs=1e-8)


def test_delta_scaling_slopes():
    # |d_omega| ~ delta_d and |d_gamma| ~ delta_d^2 for the neighbor pair
    cfg = reference_config(4)
    deltas = [1 / 1600, 1 / 800, 1 / 400]
    om = [abs(coupling_deltas(d, cfg).d_omega_nm[0, 1]) for d in deltas]
    ga = [abs(coupling_deltas(d, cfg).d_gamma_nm[0, 1]) for d in deltas]
    x = np.log(deltas)
    slope_om = np.polyfit(x, np.log(om), 1)[0]
    slope_ga = np.polyfit(x, np.log(ga), 1)[0]
    assert slope_om == pytest.approx(1.0, rel=0.01)
    assert slope_ga == pytest.approx(2.0, rel=0.01)
