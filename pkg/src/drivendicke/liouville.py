"""Vectorized Liouvillian, its non-Hermitian spectrum, and scaling fits.

Vectorization uses the column-stacking convention throughout:
``vec(rho) = rho.flatten(order="F")`` and ``vec(A rho B) = (B^T kron A) vec(rho)``.
Eigenvalues mu = kappa + i*nu are sorted by descending real part, ties by
ascending imaginary part, then by original index. Left and right eigenvectors
are re-biorthonormalized blockwise over (numerically) degenerate clusters so
that ``left^dagger right = identity``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .angular import degeneracy
from .lindblad import MasterEquation, build_master_equation
from .model import Kind, PerturbationSpec, realize, reference_config, site_operator

__all__ = [
    "LiouvillianMatrix",
    "ScalingFit",
    "SpectralDecomposition",
    "SpectralFailure",
    "SteadyStateSet",
    "TrackingError",
    "build_liouvillian",
    "cluster_eigenvalues",
    "project_onto_null",
    "propagate",
    "scaling_fit",
    "spectrum",
    "spectrum_rows",
    "steady_states",
    "vectorize",
    "unvectorize",
]


class SpectralFailure(RuntimeError):
    """Eigensolver did not converge or produced an inconsistent result."""


class TrackingError(RuntimeError):
    """Eigenvalue tracking across a strength sweep was ambiguous."""


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vec(rho)."""
    return np.asarray(rho).flatten(order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(vec.size)))
    return np.asarray(vec).reshape((d, d), order="F")


@dataclass(frozen=True)
class LiouvillianMatrix:
    """The 4^N x 4^N generator acting on column-stacked density matrices."""

    dim: int
    entries: np.ndarray

    @property
    def zero_tolerance(self) -> float:
        """Scale-aware threshold below which |mu| counts as zero."""
        return 1e-9 * np.abs(self.entries).max() * self.dim


def build_liouvillian(me: MasterEquation) -> LiouvillianMatrix:
    """Assemble the matrix form of the master-equation right-hand side."""
    h = me.hamiltonian
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    liou = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, jump in zip(me._jump_rates, me._jumps):
        liou += rate * np.kron(jump.conj(), jump)
    k = me._anticomm
    liou -= 0.5 * (np.kron(eye, k) + np.kron(k.T, eye))
    if me.dephasing_rate > 0:
        n = me.config.n_qubits
        for i in range(n):
            z = site_operator(me.config, i, "z").real
            liou += me.dephasing_rate / 4 * (np.kron(z, z.astype(complex)) - np.kron(eye, eye))
    return LiouvillianMatrix(dim=d * d, entries=liou)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full eigensystem of one Liouvillian matrix.

    ``right[:, i]`` and ``left[:, i]`` belong to ``eigenvalues[i]`` and
    satisfy biorthonormality after the blockwise correction.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    null_dim: int
    zero_tolerance: float


def _canonical_order(values: np.ndarray, tie_tol: float) -> np.ndarray:
    """Indices sorting by descending Re, Im ascending among Re-ties.

    Real parts within ``tie_tol`` of each other count as tied (conjugate
    pairs come back from the solver with real parts split at rounding level).
    """
    order = list(np.lexsort((np.arange(len(values)), values.imag, -values.real)))
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while (
            j < len(order)
            and values[order[j - 1]].real - values[order[j]].real <= tie_tol
        ):
            j += 1
        group = sorted(order[i:j], key=lambda k: (values[k].imag, k))
        out.extend(group)
        i = j
    return np.array(out)


def _degenerate_clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group indices of eigenvalues closer than ``tol`` in the complex plane."""
    order = np.argsort(values.real, kind="stable")
    parent = list(range(len(values)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(len(order)):
        i = order[a]
        for b in range(a + 1, len(order)):
            j = order[b]
            if values[j].real - values[i].real > tol:
                break
            if abs(values[j] - values[i]) < tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return [np.array(sorted(g)) for g in groups.values()]


def spectrum(liou: LiouvillianMatrix) -> SpectralDecomposition:
    """Dense eigendecomposition with left vectors and null-space counting."""
    if liou.dim > 4096:
        raise SpectralFailure(
            f"dense decomposition limited to dim <= 4096, got {liou.dim}"
        )
    try:
        w, vl, vr = scipy.linalg.eig(liou.entries, left=True, right=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - solver failure
        raise SpectralFailure(str(exc)) from exc
    tie_tol = 1e-10 * max(1.0, np.abs(liou.entries).max())
    order = _canonical_order(w, tie_tol)
    w = w[order]
    vl = vl[:, order]
    vr = vr[:, order]
    # Blockwise biorthonormalization. Degenerate eigenvalues of the
    # non-normal matrix come back split by ~sqrt(eps)*norm, so the grouping
    # tolerance must sit well above that scale.
    cluster_tol = 1e-6 * max(1.0, np.abs(liou.entries).max())
    for idx in _degenerate_clusters(w, cluster_tol):
        if len(idx) == 1:
            i = idx[0]
            vl[:, i] = vl[:, i] / np.vdot(vl[:, i], vr[:, i]).conj()
            continue
        overlap = vl[:, idx].conj().T @ vr[:, idx]
        try:
            vl[:, idx] = np.linalg.solve(overlap, vl[:, idx].conj().T).conj().T
        except np.linalg.LinAlgError as exc:
            raise SpectralFailure(
                f"defective degenerate block of size {len(idx)}"
            ) from exc
    tol = liou.zero_tolerance
    null_dim = int(np.sum(np.abs(w) < tol))
    return SpectralDecomposition(
        eigenvalues=w, right=vr, left=vl, null_dim=null_dim, zero_tolerance=tol
    )


@dataclass(frozen=True)
class SteadyStateSet:
    """Density operators reconstructed from the null right eigenvectors."""

    null_dim: int
    states: tuple[np.ndarray, ...]
    unique_steady: np.ndarray | None


def steady_states(sd: SpectralDecomposition) -> SteadyStateSet:
    """Reconstruct the steady-state subspace; normalize when it is unique."""
    sel = np.abs(sd.eigenvalues) < sd.zero_tolerance
    mats = []
    for i in np.where(sel)[0]:
        rho = unvectorize(sd.right[:, i])
        mats.append((rho + rho.conj().T) / 2)
    unique = None
    if len(mats) == 1:
        trace = np.trace(mats[0]).real
        if abs(trace) < 1e-12:
            raise SpectralFailure("unique null vector is traceless")
        unique = mats[0] / trace
    return SteadyStateSet(null_dim=len(mats), states=tuple(mats), unique_steady=unique)


def project_onto_null(sd: SpectralDecomposition, rho: np.ndarray) -> np.ndarray:
    """Project vec(rho) onto the null span using the left null vectors."""
    sel = np.abs(sd.eigenvalues) < sd.zero_tolerance
    coeffs = sd.left[:, sel].conj().T @ vectorize(rho)
    return sd.right[:, sel] @ coeffs


def propagate(sd: SpectralDecomposition, rho0: np.ndarray, t: float) -> np.ndarray:
    """Spectral propagation rho(t) = sum_n c_n exp(mu_n t) rho_n."""
    coeffs = sd.left.conj().T @ vectorize(rho0)
    vec = sd.right @ (coeffs * np.exp(sd.eigenvalues * t))
    return unvectorize(vec)


def cluster_eigenvalues(sd: SpectralDecomposition, count: int) -> np.ndarray:
    """The ``count`` eigenvalues of smallest |Re|, in the canonical order.

    The full spectrum is already canonically ordered, so the cluster keeps
    descending-Re order with conjugate partners adjacent (Im ascending).
    """
    idx = np.sort(np.argsort(np.abs(sd.eigenvalues.real), kind="stable")[:count])
    return sd.eigenvalues[idx]


def _liouvillian_for(kind: Kind, strength: float, n_qubits: int) -> LiouvillianMatrix:
    config = realize(PerturbationSpec(kind, strength), reference_config(n_qubits))
    return build_liouvillian(build_master_equation(config))


@dataclass(frozen=True)
class ScalingFit:
    """Tracked near-null eigenvalues across a strength sweep.

    ``tracked[k, j]`` is eigenvalue k at ``strengths[j]``; ``slopes[k]`` the
    log-log slope of |Re mu_k| versus strength.
    """

    strengths: tuple[float, ...]
    tracked: np.ndarray
    slopes: np.ndarray


def scaling_fit(
    kind: Kind,
    strengths,
    n_qubits: int = 4,
    n_track: int | None = None,
) -> ScalingFit:
    """Track cluster eigenvalues by complex-plane continuity and fit slopes.

    For each strength the exact null eigenvalue (argmin |mu|) is removed and
    the ``n_track`` smallest-|Re| survivors form the tracked set (default:
    N_ss - 1). Successive strengths are matched by minimum-cost assignment
    on complex distance. Requires at least three strengths spanning a factor
    of four (the detuning fit range is [0.025, 0.1]; the other kinds span a
    decade or more).
    """
    from scipy.optimize import linear_sum_assignment

    strengths = sorted(float(s) for s in strengths)
    if len(strengths) < 3:
        raise ValueError("need at least 3 strengths")
    if strengths[-1] < 4 * strengths[0] * (1 - 1e-12):
        raise ValueError("strengths must span at least a factor of 4")
    if n_track is None:
        n_track = degeneracy(n_qubits)[1] - 1
    rows = []
    for s in strengths:
        sd = spectrum(_liouvillian_for(kind, s, n_qubits))
        w = sd.eigenvalues
        w = np.delete(w, np.argmin(np.abs(w)))
        rows.append(w[np.argsort(np.abs(w.real), kind="stable")[:n_track]])
    tracked = np.empty((n_track, len(strengths)), dtype=complex)
    order = np.argsort(rows[0].real, kind="stable")
    tracked[:, 0] = rows[0][order]
    for j in range(1, len(strengths)):
        prev = tracked[:, j - 1]
        cand = rows[j]
        dist = np.abs(prev[:, None] - cand[None, :])
        # squared distance: strictly convex, so branch-preserving (monotone)
        # matchings beat crossing ones even for collinear real spectra
        ri, ci = linear_sum_assignment(dist**2)
        chosen = np.empty(n_track, dtype=complex)
        for r, c in zip(ri, ci):
            best = dist[r, c]
            near = np.abs(dist[r] - best) < 1e-12
            if near.sum() > 1 and np.abs(cand[near] - cand[c]).max() > 1e-12:
                raise TrackingError(
                    f"ambiguous eigenvalue tracking at strength {strengths[j]}"
                )
            chosen[r] = cand[c]
        tracked[:, j] = chosen
    logs = np.log(np.asarray(strengths))
    slopes = np.empty(n_track)
    for i in range(n_track):
        mags = np.abs(tracked[i].real)
        if np.any(mags <= 0):
            slopes[i] = np.nan
        else:
            slopes[i] = np.polyfit(logs, np.log(mags), 1)[0]
    return ScalingFit(tuple(strengths), tracked, slopes)


def spectrum_rows(kind: Kind, strength: float, sd: SpectralDecomposition, count: int | None = None):
    """Rows (index, re, im, strength, kind) for CSV export."""
    values = sd.eigenvalues if count is None else cluster_eigenvalues(sd, count)
    return [
        (i, mu.real, mu.imag, strength, kind.value) for i, mu in enumerate(values)
    ]
