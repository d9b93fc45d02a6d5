"""Waveguide-mediated couplings from the bidirectional 1D Green's function.

The matrix element between qubits n and m is
``Omega_nm - i*Gamma_nm/2 = -i*(Gamma/2) * exp(i*k*|z_n - z_m|)``,
split into the coherent exchange strength ``Omega_nm = (Gamma/2) sin(k d)``
and the correlated decay rate ``Gamma_nm = Gamma cos(k d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import Kind, PerturbationSpec, SystemConfig, realize

__all__ = ["CouplingTables", "CouplingDeltas", "green_function_tables", "coupling_deltas"]


@dataclass(frozen=True)
class CouplingTables:
    """Exchange strengths and correlated decay rates, both N x N symmetric.

    The n = m diagonal of ``omega_nm`` (a Lamb-shift-like constant) is set
    to zero; ``gamma_nm`` has the individual decay rate on its diagonal.
    """

    omega_nm: np.ndarray
    gamma_nm: np.ndarray


@dataclass(frozen=True)
class CouplingDeltas:
    """Exact coupling changes induced by a lattice-constant deviation."""

    d_omega_nm: np.ndarray
    d_gamma_nm: np.ndarray


@lru_cache(maxsize=None)
def green_function_tables(config: SystemConfig) -> CouplingTables:
    """Evaluate Omega_nm and Gamma_nm for the positions in ``config``."""
    z = np.asarray(config.positions, dtype=float)
    phase = config.wave_number * np.abs(z[:, None] - z[None, :])
    g = -0.5j * config.gamma * np.exp(1j * phase)
    omega = g.real.copy()
    np.fill_diagonal(omega, 0.0)
    gamma = (-2.0 * g.imag).copy()
    omega.flags.writeable = False
    gamma.flags.writeable = False
    return CouplingTables(omega_nm=omega, gamma_nm=gamma)


def coupling_deltas(delta_d: float, config: SystemConfig) -> CouplingDeltas:
    """Exact (non-Taylor) coupling change for lattice constant 1 + delta_d.

    ``config`` is the unperturbed unit lattice. The leading orders are
    d_omega ~ delta_d and d_gamma ~ delta_d**2.
    """
    base = green_function_tables(config)
    pert = green_function_tables(realize(PerturbationSpec(Kind.SEPARATION, delta_d), config))
    return CouplingDeltas(
        d_omega_nm=pert.omega_nm - base.omega_nm,
        d_gamma_nm=pert.gamma_nm - base.gamma_nm,
    )
