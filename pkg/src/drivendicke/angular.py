"""Sequential angular-momentum coupling basis for N spin-1/2 qubits.

The coupled states ``|a, S, M>`` are built by adding one spin-1/2 at a time
in site order (qubit 0 first) with Condon-Shortley-phase Clebsch-Gordan
coefficients. ``S`` is the total spin, ``M`` its z projection in the
standard convention where the excited qubit counts +1/2 (so the all-ground
product state is ``|S = N/2, M = -N/2>``), and ``a`` ranks the tuple of
intermediate spins (S_12, ..., S_1,N-1) lexicographically ascending among
the paths that reach the same final ``S``.

Half-integer spins are represented as floats; all values are multiples of
1/2 and therefore exact in binary floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, sqrt

import numpy as np
from scipy.linalg import null_space

__all__ = [
    "BlockDegeneracyError",
    "BlockSteadyState",
    "CoupledBasis",
    "CoupledState",
    "block_steady_state",
    "build_basis",
    "degeneracy",
    "ladder_factor",
    "smax_projector",
]


class BlockDegeneracyError(RuntimeError):
    """Raised when a spin block has no unique steady state."""


@dataclass(frozen=True)
class CoupledState:
    """One coupled basis state |a, S, M> with its intermediate-spin path."""

    intermediate_spins: tuple[float, ...]
    total_spin: float
    projection: float
    coupling_index: int


@dataclass(frozen=True)
class CoupledBasis:
    """All 2^N coupled states plus the product->coupled transform.

    ``transform`` columns hold the coupled states in the product basis, in
    the order of ``states`` (sorted by (S, a, M) ascending); it is unitary
    and diagonalizes S^2 and S_z with eigenvalues S(S+1) and M.
    ``d_table`` maps S -> D_S, and ``n_ss = sum(D_S**2)``.
    """

    n_qubits: int
    states: tuple[CoupledState, ...]
    transform: np.ndarray
    d_table: dict[float, int]
    n_ss: int

    def column(self, total_spin: float, coupling_index: int, projection: float) -> np.ndarray:
        """Product-basis vector of |a, S, M>."""
        key = (total_spin, coupling_index, projection)
        return self.transform[:, self._index[key]]

    @property
    def _index(self) -> dict[tuple[float, int, float], int]:
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {
                (s.total_spin, s.coupling_index, s.projection): i
                for i, s in enumerate(self.states)
            }
            self.__dict__["_index_cache"] = idx
        return idx


def ladder_factor(total_spin: float, projection: float) -> float:
    """A_M = sqrt(S(S+1) - M(M+1)), the S_+ matrix element out of |S, M>."""
    x = total_spin * (total_spin + 1) - projection * (projection + 1)
    return sqrt(x) if x > 0 else 0.0


def _cg_half(s1: float, m: float, up: bool, stretch: bool) -> float:
    """<s1, m -/+ 1/2; 1/2, +/-1/2 | J, m> for J = s1 +/- 1/2 (Condon-Shortley).

    ``up`` selects the added spin's m_s = +1/2 component, ``stretch`` selects
    J = s1 + 1/2 (else J = s1 - 1/2).
    """
    denom = 2 * s1 + 1
    if stretch:
        return sqrt(((s1 + m + 0.5) if up else (s1 - m + 0.5)) / denom)
    if up:
        return -sqrt((s1 - m + 0.5) / denom)
    return sqrt((s1 + m + 0.5) / denom)


@lru_cache(maxsize=None)
def build_basis(n_qubits: int) -> CoupledBasis:
    """Enumerate all coupling paths and materialize the basis transform.

    The recursion keeps, per (path, S) tower, the product-basis vectors of
    every M; adding qubit k appends it as the least significant bit.
    """
    n = int(n_qubits)
    if not 1 <= n <= 8:
        raise ValueError(f"n_qubits must be in 1..8, got {n}")
    # towers: {(path, S): {M: vector}}; m_s = +1/2 is the excited state |1>.
    towers: dict[tuple[tuple[float, ...], float], dict[float, np.ndarray]] = {
        ((), 0.5): {+0.5: np.array([0.0, 1.0]), -0.5: np.array([1.0, 0.0])}
    }
    for _ in range(1, n):
        grown: dict[tuple[tuple[float, ...], float], dict[float, np.ndarray]] = {}
        for (path, s1), mvecs in towers.items():
            dim = 2 * len(next(iter(mvecs.values())))
            for stretch in (True, False):
                j = s1 + 0.5 if stretch else s1 - 0.5
                if j < 0:
                    continue
                new_path = path + (j,)
                out = grown.setdefault((new_path, j), {})
                for m in np.arange(-j, j + 0.5):
                    w = np.zeros(dim)
                    m1 = m - 0.5  # added spin up (excited, new bit = 1)
                    if -s1 <= m1 <= s1:
                        w[1::2] += _cg_half(s1, m, True, stretch) * mvecs[m1]
                    m1 = m + 0.5  # added spin down (ground, new bit = 0)
                    if -s1 <= m1 <= s1:
                        w[0::2] += _cg_half(s1, m, False, stretch) * mvecs[m1]
                    out[float(m)] = w
        towers = grown
    # paths include S_12..S_1N; a ranks (S_12..S_1,N-1) within each final S.
    by_s: dict[float, list[tuple[tuple[float, ...], dict]]] = {}
    for (path, s), mvecs in towers.items():
        by_s.setdefault(s, []).append((path[:-1] if path else (), mvecs))
    states: list[CoupledState] = []
    columns: list[np.ndarray] = []
    d_table: dict[float, int] = {}
    for s in sorted(by_s):
        entries = sorted(by_s[s], key=lambda e: e[0])
        d_table[s] = len(entries)
        for a, (ipath, mvecs) in enumerate(entries):
            for m in sorted(mvecs):
                states.append(CoupledState(ipath, s, m, a))
                columns.append(mvecs[m])
    transform = np.array(columns, dtype=float).T
    transform.flags.writeable = False
    n_ss = sum(d * d for d in d_table.values())
    return CoupledBasis(n, tuple(states), transform, d_table, n_ss)


def degeneracy(n_qubits: int) -> tuple[dict[float, int], int]:
    """Closed-form degeneracy table D_S and N_ss = sum_S D_S^2.

    D_S = (2S+1) N! / ((N/2+S+1)! (N/2-S)!); N_ss is the Catalan number
    (2N)! / (N! (N+1)!).
    """
    n = int(n_qubits)
    if n < 1:
        raise ValueError("n_qubits must be >= 1")
    table: dict[float, int] = {}
    for two_s in range(n % 2, n + 1, 2):
        hi = (n + two_s) // 2 + 1
        lo = (n - two_s) // 2
        table[two_s / 2] = (two_s + 1) * factorial(n) // (factorial(hi) * factorial(lo))
    n_ss = comb(2 * n, n) // (n + 1)
    assert sum(d * d for d in table.values()) == n_ss
    return table, n_ss


def smax_projector(basis: CoupledBasis) -> np.ndarray:
    """Projector onto the S = N/2 subspace, in the product basis."""
    smax = basis.n_qubits / 2
    cols = [
        basis.transform[:, i]
        for i, st in enumerate(basis.states)
        if st.total_spin == smax
    ]
    v = np.array(cols).T
    return (v @ v.T).astype(complex)


@dataclass(frozen=True)
class BlockSteadyState:
    """Steady-state coefficients rho^S_{M,M'} of one total-spin block.

    ``coefficients[i, j]`` corresponds to M = -S + i, M' = -S + j.
    """

    total_spin: float
    coefficients: np.ndarray
    ladder_factors: np.ndarray  # A_M for M = -S .. S

    @property
    def projections(self) -> np.ndarray:
        s = self.total_spin
        return np.arange(-s, s + 0.5)


def block_steady_state(
    total_spin: float, omega: float, delta: float, gamma: float
) -> BlockSteadyState:
    """Solve the (2S+1)^2 block equations of motion for their null vector.

    The block dynamics couple only the projection indices:

        d rho_{M,M'} = -i [ (omega/2)(A_{M-1} rho_{M-1,M'} + A_M rho_{M+1,M'}
                            - A_{M'-1} rho_{M,M'-1} - A_{M'} rho_{M,M'+1})
                            - delta (M - M') rho_{M,M'} ]
                       + (gamma/2)(2 A_M A_{M'} rho_{M+1,M'+1}
                            - (A_{M-1}^2 + A_{M'-1}^2) rho_{M,M'})

    The null vector is reshaped, Hermitized, and trace-normalized.
    """
    if not (omega > 0 and gamma > 0):
        raise ValueError("omega and gamma must be > 0 for a unique steady state")
    s = float(total_spin)
    d = int(round(2 * s + 1))
    ms = [-s + i for i in range(d)]
    a = {m: ladder_factor(s, m) for m in ms}
    a[ms[0] - 1] = ladder_factor(s, ms[0] - 1)  # A_{-S-1} = 0 boundary
    idx = {(m, mp): i * d + j for i, m in enumerate(ms) for j, mp in enumerate(ms)}
    gen = np.zeros((d * d, d * d), dtype=complex)
    for i, m in enumerate(ms):
        for j, mp in enumerate(ms):
            r = idx[(m, mp)]
            if (m - 1, mp) in idx:
                gen[r, idx[(m - 1, mp)]] += -1j * omega / 2 * a[m - 1]
            if (m + 1, mp) in idx:
                gen[r, idx[(m + 1, mp)]] += -1j * omega / 2 * a[m]
            if (m, mp - 1) in idx:
                gen[r, idx[(m, mp - 1)]] += 1j * omega / 2 * a[mp - 1]
            if (m, mp + 1) in idx:
                gen[r, idx[(m, mp + 1)]] += 1j * omega / 2 * a[mp]
            gen[r, r] += 1j * delta * (m - mp)
            if (m + 1, mp + 1) in idx:
                gen[r, idx[(m + 1, mp + 1)]] += gamma * a[m] * a[mp]
            gen[r, r] -= gamma / 2 * (a[m - 1] ** 2 + a[mp - 1] ** 2)
    kernel = null_space(gen, rcond=1e-12)
    if kernel.shape[1] != 1:
        raise BlockDegeneracyError(
            f"spin-{s} block has null dimension {kernel.shape[1]}, expected 1"
        )
    rho = kernel[:, 0].reshape(d, d)
    rho = (rho + rho.conj().T) / 2
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise BlockDegeneracyError(f"spin-{s} block null vector is traceless")
    rho = rho / tr
    return BlockSteadyState(s, rho, np.array([a[m] for m in ms]))
