"""Driven Dicke superradiance in waveguide-coupled qubit arrays.

A dense-matrix simulation library for arrays of driven two-level emitters
coupled through a bidirectional 1D waveguide: master-equation time
evolution of photon-emission observables, full Liouvillian spectra with
left/right eigenvectors, the sequential angular-momentum coupling basis
with its steady-state degeneracy counting, and first-order perturbation
theory on the degenerate steady-state subspace. A CLI (``drivendicke``)
reproduces the bundled figure and table pipelines as CSV plus PNG output.
"""

from .angular import (
    BlockSteadyState,
    CoupledBasis,
    CoupledState,
    block_steady_state,
    build_basis,
    degeneracy,
    smax_projector,
)
from .couplings import CouplingDeltas, CouplingTables, coupling_deltas, green_function_tables
from .lindblad import (
    IntegrationError,
    MasterEquation,
    Trajectory,
    apply_rhs,
    build_master_equation,
    evolve,
    ground_state,
    observables,
)
from .liouville import (
    LiouvillianMatrix,
    SpectralDecomposition,
    SteadyStateSet,
    build_liouvillian,
    scaling_fit,
    spectrum,
    steady_states,
)
from .model import (
    ConfigurationError,
    Kind,
    PerturbationSpec,
    SystemConfig,
    collective_operator,
    realize,
    reference_config,
    site_operator,
)
from .subspace import (
    SubspaceProjection,
    build_subspace,
    coupling_matrix,
    dephasing_overlap_matrix,
    hamiltonian_coupling_matrix,
    steady_blocks,
)

__version__ = "0.1.0"
