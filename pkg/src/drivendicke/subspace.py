"""First-order perturbation theory on the degenerate steady-state subspace.

For the unperturbed lattice the Liouvillian has an N_ss-dimensional null
space spanned by the operators

    rho_eta = rho_S^{a,b} = sum_{M,M'} rho^S_{M,M'} |a,S,M><b,S,M'|

built from the per-spin-block steady coefficients (the same coefficients for
every coupling pair a, b). Their duals are the left operators

    rho_eta^L = sum_M |b,S,M><a,S,M|,

satisfying Tr(rho_eta^L rho_eta') = delta. A perturbation superoperator P
projects to the coupling matrix C_{eta,eta'} = Tr(rho_eta^L P[rho_eta']),
whose spectrum gives the first-order decay and oscillation rates inside the
subspace. The generic trace route is the production path for every
perturbation kind; the dephasing overlap-matrix form and the commutator
matrix-element form are provided as independent cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import BlockSteadyState, CoupledBasis, block_steady_state, build_basis
from .lindblad import apply_rhs, build_master_equation
from .model import (
    ConfigurationError,
    Kind,
    PerturbationSpec,
    SystemConfig,
    realize,
    site_operator,
)

__all__ = [
    "SubspaceProjection",
    "build_subspace",
    "coupling_matrix",
    "dephasing_overlap_matrix",
    "hamiltonian_coupling_matrix",
    "steady_blocks",
]


@dataclass(frozen=True)
class SubspaceProjection:
    """Degenerate-subspace basis operators and a projected perturbation.

    ``eta_index[i] = (S, a, b)``; ``basis_ops[i]`` and ``left_ops[i]`` are the
    corresponding operators in the product basis. ``coupling`` is the
    N_ss x N_ss projected perturbation (None until a perturbation is
    projected); ``overlap`` is set for the dephasing kind only.
    """

    basis: CoupledBasis
    eta_index: tuple[tuple[float, int, int], ...]
    basis_ops: np.ndarray
    left_ops: np.ndarray
    blocks: dict[float, BlockSteadyState]
    coupling: np.ndarray | None = None
    overlap: np.ndarray | None = None

    @property
    def n_ss(self) -> int:
        return len(self.eta_index)


def steady_blocks(config: SystemConfig) -> dict[float, BlockSteadyState]:
    """Block steady states for every total spin present in the basis."""
    table = build_basis(config.n_qubits).d_table
    return {
        s: block_steady_state(s, config.rabi_amplitude, 0.0, config.gamma)
        for s in table
    }


def build_subspace(
    basis: CoupledBasis, blocks: dict[float, BlockSteadyState]
) -> SubspaceProjection:
    """Materialize rho_eta and rho_eta^L, eta ordered by (S, a, b) ascending."""
    for s, d in basis.d_table.items():
        if s not in blocks:
            raise ConfigurationError(f"missing steady block for total spin {s}")
    dim = 2**basis.n_qubits
    etas: list[tuple[float, int, int]] = []
    ops: list[np.ndarray] = []
    lefts: list[np.ndarray] = []
    for s in sorted(basis.d_table):
        block = blocks[s]
        ms = block.projections
        cols = {
            (st.coupling_index, st.projection): basis.transform[:, i]
            for i, st in enumerate(basis.states)
            if st.total_spin == s
        }
        for a in range(basis.d_table[s]):
            for b in range(basis.d_table[s]):
                rho = np.zeros((dim, dim), dtype=complex)
                left = np.zeros((dim, dim), dtype=complex)
                for i, m in enumerate(ms):
                    for j, mp in enumerate(ms):
                        rho += block.coefficients[i, j] * np.outer(
                            cols[(a, m)], cols[(b, mp)]
                        )
                    left += np.outer(cols[(b, m)], cols[(a, m)])
                etas.append((s, a, b))
                ops.append(rho)
                lefts.append(left)
    return SubspaceProjection(
        basis=basis,
        eta_index=tuple(etas),
        basis_ops=np.array(ops),
        left_ops=np.array(lefts),
        blocks=dict(blocks),
    )


def coupling_matrix(
    proj: SubspaceProjection,
    perturbation: PerturbationSpec,
    config: SystemConfig,
) -> SubspaceProjection:
    """Project a perturbation: C_{eta,eta'} = Tr(rho_eta^L P[rho_eta']).

    ``config`` is the unperturbed reference; the perturbation superoperator
    is the exact right-hand-side difference between the perturbed and
    reference master equations, so every kind (including the combined
    separation perturbation) runs through the same path.
    """
    base_me = build_master_equation(realize(PerturbationSpec(Kind.NONE), config))
    pert_me = build_master_equation(realize(perturbation, config))

    def superop(rho: np.ndarray) -> np.ndarray:
        return apply_rhs(pert_me, rho) - apply_rhs(base_me, rho)

    n_ss = proj.n_ss
    coupling = np.empty((n_ss, n_ss), dtype=complex)
    for j in range(n_ss):
        image = superop(proj.basis_ops[j])
        coupling[:, j] = np.einsum("kij,ji->k", proj.left_ops, image)
    overlap = None
    if perturbation.kind is Kind.DEPHASING:
        overlap = dephasing_overlap_matrix(proj, config)
    return SubspaceProjection(
        basis=proj.basis,
        eta_index=proj.eta_index,
        basis_ops=proj.basis_ops,
        left_ops=proj.left_ops,
        blocks=proj.blocks,
        coupling=coupling,
        overlap=overlap,
    )


def dephasing_overlap_matrix(
    proj: SubspaceProjection, config: SystemConfig
) -> np.ndarray:
    """Overlap matrix O via sigma_n^z matrix elements in the coupled basis.

    Only the M-diagonal block coefficients contribute: sigma_n^z conserves
    the total projection, so the trace against the left operator forces
    M = M'. The dephasing coupling matrix is (Gamma_phi/4)(O - N I).
    """
    basis = proj.basis
    n = basis.n_qubits
    sz = [site_operator(config, i, "z").real for i in range(n)]
    # <a,S,M| sigma_n^z |a',S',M> for all coupled-state pairs, per site
    u = basis.transform
    zmats = [u.T @ z @ u for z in sz]
    index = {
        (st.total_spin, st.coupling_index, st.projection): i
        for i, st in enumerate(basis.states)
    }
    n_ss = proj.n_ss
    overlap = np.zeros((n_ss, n_ss), dtype=complex)
    for col, (sp, ap, bp) in enumerate(proj.eta_index):
        block = proj.blocks[sp]
        for row, (s, a, b) in enumerate(proj.eta_index):
            total = 0.0
            for i, m in enumerate(block.projections):
                ka = index.get((s, a, m))
                kb = index.get((s, b, m))
                if ka is None or kb is None:
                    continue
                kap = index[(sp, ap, m)]
                kbp = index[(sp, bp, m)]
                coeff = block.coefficients[i, i]
                for z in zmats:
                    total += coeff * z[ka, kap] * z[kbp, kb]
            overlap[row, col] = total
    return overlap


def hamiltonian_coupling_matrix(proj: SubspaceProjection, delta_h: np.ndarray) -> np.ndarray:
    """Commutator-perturbation coupling matrix from Delta-H matrix elements.

    C_{eta,eta'} = -i sum_{M,M'} rho^{S}_{M,M'} delta_{S,S'} (
        delta_{b,b'} <a,S,M'|dH|a',S,M> - delta_{a,a'} <b',S,M'|dH|b,S,M> ).
    Cross-check oracle for the pure-Hamiltonian kinds.
    """
    basis = proj.basis
    u = basis.transform
    dh = u.T @ delta_h @ u
    index = {
        (st.total_spin, st.coupling_index, st.projection): i
        for i, st in enumerate(basis.states)
    }
    n_ss = proj.n_ss
    out = np.zeros((n_ss, n_ss), dtype=complex)
    for col, (sp, ap, bp) in enumerate(proj.eta_index):
        block = proj.blocks[sp]
        ms = block.projections
        for row, (s, a, b) in enumerate(proj.eta_index):
            if s != sp:
                continue
            total = 0.0 + 0.0j
            for i, m in enumerate(ms):
                for j, mp in enumerate(ms):
                    coeff = block.coefficients[i, j]
                    if coeff == 0:
                        continue
                    term = 0.0 + 0.0j
                    if b == bp:
                        term += dh[index[(s, a, mp)], index[(sp, ap, m)]]
                    if a == ap:
                        term -= dh[index[(sp, bp, mp)], index[(s, b, m)]]
                    total += coeff * term
            out[row, col] = -1j * total
    return out
