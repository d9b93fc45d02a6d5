"""Master-equation assembly, time evolution, and emission observables.

The equation of motion is

    d rho / dt = -i [H, rho] + L[rho] + L_dephasing[rho]

with H = H_drive + H_exchange built from a :class:`SystemConfig`, the
correlated-decay dissipator driven by the Gamma_nm table, and an optional
local sigma^z dephasing channel. The dissipator is applied through the
eigendecomposition of the symmetric Gamma_nm matrix (collective jump
operators), which is exact and keeps the right-hand side to a handful of
dense matrix products.

Observables are the individual emission rate gamma_0 = Gamma sum_n <e_n>,
the correlated rate gamma_SR = sum_{n != m} Gamma_nm <sigma_m^+ sigma_n^->,
their total, and the population of the S = N/2 subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angular import build_basis, smax_projector
from .couplings import green_function_tables
from .model import SystemConfig, site_operator

__all__ = [
    "IntegrationError",
    "MasterEquation",
    "Trajectory",
    "apply_rhs",
    "build_master_equation",
    "evolve",
    "ground_state",
    "observables",
]


class IntegrationError(RuntimeError):
    """Step-size underflow; carries the last successfully reached tau."""

    def __init__(self, message: str, last_tau: float):
        super().__init__(f"{message} (last good tau = {last_tau:.6g})")
        self.last_tau = last_tau


@dataclass(frozen=True)
class MasterEquation:
    """Hamiltonian plus the data needed to apply the dissipator."""

    config: SystemConfig
    hamiltonian: np.ndarray
    gamma_nm: np.ndarray
    dephasing_rate: float
    # collective jump operators: rates[k] * (jumps[k] rho jumps[k]^dagger - ...)
    _jump_rates: np.ndarray = field(repr=False)
    _jumps: np.ndarray = field(repr=False)
    _anticomm: np.ndarray = field(repr=False)  # K = sum_k rate_k J_k^dag J_k
    _dephase_weights: np.ndarray | None = field(repr=False)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def ground_state(config: SystemConfig) -> np.ndarray:
    """Density matrix with every qubit in its ground state."""
    rho = np.zeros((config.dim, config.dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def build_master_equation(config: SystemConfig) -> MasterEquation:
    """Assemble H = H_drive + H_exchange and the dissipator tables."""
    n = config.n_qubits
    tables = green_function_tables(config)
    sp = [site_operator(config, i, "raise") for i in range(n)]
    sm = [site_operator(config, i, "lower") for i in range(n)]
    h = np.zeros((config.dim, config.dim), dtype=complex)
    for i in range(n):
        drive = config.rabi_amplitude * np.exp(1j * config.drive_phases[i])
        h += drive / 2 * sp[i] + np.conj(drive) / 2 * sm[i]
        h -= config.detunings[i] / 2 * site_operator(config, i, "z")
    for i in range(n):
        for j in range(n):
            if i != j:
                h += tables.omega_nm[i, j] * (sp[j] @ sm[i])
    # jump decomposition of the symmetric rate matrix
    rates, vecs = np.linalg.eigh(tables.gamma_nm)
    keep = rates > 1e-13 * max(abs(rates[0]), abs(rates[-1]), 1.0)
    rates = rates[keep]
    jumps = np.array([sum(vecs[i, k] * sm[i] for i in range(n)) for k in np.where(keep)[0]])
    anticomm = sum(
        r * (j.conj().T @ j) for r, j in zip(rates, jumps)
    ) if len(rates) else np.zeros_like(h)
    weights = None
    if config.dephasing_rate > 0:
        zdiags = [np.real(np.diag(site_operator(config, i, "z"))) for i in range(n)]
        weights = sum(np.outer(z, z) for z in zdiags)
    return MasterEquation(
        config=config,
        hamiltonian=h,
        gamma_nm=tables.gamma_nm,
        dephasing_rate=config.dephasing_rate,
        _jump_rates=rates,
        _jumps=jumps,
        _anticomm=np.asarray(anticomm, dtype=complex),
        _dephase_weights=weights,
    )


def apply_rhs(me: MasterEquation, rho: np.ndarray) -> np.ndarray:
    """Evaluate d rho / dt for one density matrix."""
    if rho.shape != me.hamiltonian.shape:
        raise ValueError(f"rho has shape {rho.shape}, expected {me.hamiltonian.shape}")
    h = me.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for rate, jump in zip(me._jump_rates, me._jumps):
        out += rate * (jump @ rho @ jump.conj().T)
    k = me._anticomm
    out -= 0.5 * (k @ rho + rho @ k)
    if me._dephase_weights is not None:
        out += me.dephasing_rate / 4 * (me._dephase_weights * rho - me.config.n_qubits * rho)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Sampled observables along one evolution, normalized by N*Gamma.

    ``gamma_tot[i] == gamma0[i] + gamma_sr[i]`` holds by construction;
    ``steady_time`` is set when steady-state detection stopped the run early,
    in which case the sample arrays are truncated at that point.
    """

    times: np.ndarray
    gamma0: np.ndarray
    gamma_sr: np.ndarray
    gamma_tot: np.ndarray
    pop_smax: np.ndarray
    final_rho: np.ndarray
    steady_time: float | None = None


@lru_cache(maxsize=32)
def _observable_operators(config: SystemConfig):
    """Matrices whose expectations give (gamma0, gammaSR, popSmax)."""
    n = config.n_qubits
    tables = green_function_tables(config)
    sp = [site_operator(config, i, "raise") for i in range(n)]
    sm = [site_operator(config, i, "lower") for i in range(n)]
    g0_op = config.gamma * sum(sp[i] @ sm[i] for i in range(n))
    gsr_op = np.zeros((config.dim, config.dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i != j:
                gsr_op += tables.gamma_nm[i, j] * (sp[j] @ sm[i])
    proj = smax_projector(build_basis(n))
    return g0_op, gsr_op, proj


def observables(config: SystemConfig, rho: np.ndarray):
    """Raw emission rates (units of Gamma) and S = N/2 population.

    Returns ``(gamma0, gamma_sr, gamma_tot, pop_smax)``; divide the rates by
    N*Gamma for the normalized values stored in trajectories.
    """
    g0_op, gsr_op, proj = _observable_operators(config)
    g0 = np.einsum("ij,ji->", g0_op, rho).real
    gsr = np.einsum("ij,ji->", gsr_op, rho).real
    pop = np.einsum("ij,ji->", proj, rho).real
    return g0, gsr, g0 + gsr, pop


# Dormand-Prince embedded 5(4) pair
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def evolve(
    me: MasterEquation,
    rho0: np.ndarray,
    t_max: float,
    sample_times: np.ndarray | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    stop_at_steady: bool = False,
    steady_rtol: float = 1e-9,
) -> Trajectory:
    """Integrate the master equation with an adaptive embedded RK 4/5 pair.

    ``t_max`` and ``sample_times`` (default: 201 points on [0, t_max]) are in
    units of tau = Gamma*t, matching the reported trajectory times. The state
    is re-symmetrized (rho <- (rho + rho^dag)/2) after every accepted step.
    With ``stop_at_steady``, ||d rho/dt||_F < steady_rtol * ||rho||_F checked
    every 50 accepted steps ends the run early.
    """
    gamma = me.config.gamma
    if sample_times is None:
        sample_times = np.linspace(0.0, t_max, 201)
    taus = np.asarray(sample_times, dtype=float)
    if taus.ndim != 1 or len(taus) == 0 or np.any(np.diff(taus) <= 0):
        raise ValueError("sample_times must be strictly increasing and non-empty")
    if taus[0] < 0 or taus[-1] > t_max * (1 + 1e-12):
        raise ValueError("sample_times must lie in [0, t_max]")
    times = taus / gamma  # integration runs in plain time; tau = gamma * t

    g0_op, gsr_op, proj = _observable_operators(me.config)
    norm = me.config.n_qubits * gamma

    def sample(rho):
        return (
            np.einsum("ij,ji->", g0_op, rho).real / norm,
            np.einsum("ij,ji->", gsr_op, rho).real / norm,
            np.einsum("ij,ji->", proj, rho).real,
        )

    rho = np.array(rho0, dtype=complex)
    t = 0.0
    out_g0, out_gsr, out_pop, out_t = [], [], [], []
    gi = 0
    accepted = 0
    steady_time = None
    h = min(1e-3 / gamma, times[-1] if times[-1] > 0 else 1.0)
    k = [None] * 7
    k[0] = apply_rhs(me, rho)
    while True:
        while gi < len(times) and times[gi] - t <= 1e-12 * max(1.0, abs(t)):
            g0, gsr, pop = sample(rho)
            out_t.append(taus[gi])
            out_g0.append(g0)
            out_gsr.append(gsr)
            out_pop.append(pop)
            gi += 1
        if gi >= len(times) or steady_time is not None:
            break
        h = min(h, times[gi] - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", last_tau=t * gamma)
        for i in range(1, 7):
            y = rho
            for a, kk in zip(_DP_A[i], k):
                if a:
                    y = y + (h * a) * kk
            k[i] = apply_rhs(me, y)
        y5 = rho + h * sum(b * kk for b, kk in zip(_DP_B5, k) if b)
        err = h * sum(
            (b5 - b4) * kk for b5, b4, kk in zip(_DP_B5, _DP_B4, k) if b5 != b4
        )
        scale = atol + rtol * np.maximum(np.abs(rho), np.abs(y5))
        enorm = np.sqrt(np.mean((np.abs(err) / scale) ** 2))
        if not np.isfinite(enorm):
            h *= 0.2
            continue
        if enorm <= 1.0:
            t += h
            rho = (y5 + y5.conj().T) / 2
            k[0] = apply_rhs(me, rho)
            accepted += 1
            if stop_at_steady and accepted % 50 == 0:
                if np.linalg.norm(k[0]) < steady_rtol * np.linalg.norm(rho):
                    steady_time = t * gamma
        h *= min(5.0, max(0.2, 0.9 * enorm ** -0.2 if enorm > 0 else 5.0))
    g0 = np.array(out_g0)
    gsr = np.array(out_gsr)
    return Trajectory(
        times=np.array(out_t),
        gamma0=g0,
        gamma_sr=gsr,
        gamma_tot=g0 + gsr,
        pop_smax=np.array(out_pop),
        final_rho=rho,
        steady_time=steady_time,
    )
