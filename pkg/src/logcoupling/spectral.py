"""Low-lying spectra of non-Hermitian chains and their Jordan structure.

The eigensolver returns a partial Schur form ``H Q = Q T`` (``Q``
orthonormal, ``T`` upper triangular, diagonal sorted by real part).  Clusters
of nearly equal diagonal entries are then resolved into Jordan chains inside
the small matrix ``T`` and lifted back with ``Q``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.linalg import lapack

from .errors import ConvergenceError, IdentificationError

DENSE_LIMIT = 512


@dataclass
class SpectrumRecord:
    """Partial Schur decomposition of a chain Hamiltonian.

    Attributes
    ----------
    eigenvalues : ndarray
        Diagonal of ``T`` (ascending real part).
    schur_vectors : ndarray
        ``dim x k`` orthonormal columns ``Q`` with ``H Q = Q T``.
    schur_form : ndarray
        ``k x k`` upper-triangular ``T``.
    residual : float
        ``||H Q - Q T||`` (Frobenius).
    method : str
        ``"dense"`` or ``"krylov-schur"``.
    restarts : int
        Number of Krylov-Schur restarts performed.
    labels : dict
        Free-form metadata (chain length, sector, ...).
    """

    eigenvalues: np.ndarray
    schur_vectors: np.ndarray
    schur_form: np.ndarray
    residual: float
    method: str
    restarts: int = 0
    norm: float = 1.0
    labels: dict = field(default_factory=dict)


@dataclass
class JordanCellRecord:
    """A Jordan block of ``H`` restricted to the computed invariant subspace.

    For ``size == 2``: ``(H - E) phi = 0`` and ``(H - E) psi = scale * phi``.
    For ``size == 1`` only ``phi`` (the eigenvector) is set.
    """

    eigenvalue: complex
    size: int
    phi: np.ndarray
    psi: Optional[np.ndarray] = None
    psi_min_norm: Optional[np.ndarray] = None
    h: float = math.nan
    labels: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScalingFit:
    """Finite-size fit ``E_0(L) = e L + e_S - pi v_F c / (24 L)``."""

    bulk: float
    surface: float
    c: float
    residual: float
    bulk_reference: Optional[float] = None


# -- Schur reordering ---------------------------------------------------------------

def _move(t: np.ndarray, q: np.ndarray, src: int, dst: int) -> Tuple[np.ndarray, np.ndarray]:
    if src == dst:
        return t, q
    t2, q2, info = lapack.ztrexc(t, q, src + 1, dst + 1, wantq=1)
    if info != 0:
        raise ConvergenceError(f"Schur reordering failed (info={info})")
    return t2, q2


def sort_schur(t: np.ndarray, q: np.ndarray, count: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Reorder a complex Schur form so the first ``count`` diagonal entries ascend by real part."""
    t = np.asarray(t, dtype=complex).copy(order="F")
    q = np.asarray(q, dtype=complex).copy(order="F")
    size = t.shape[0]
    count = size if count is None else min(count, size)
    for pos in range(count):
        d = np.diag(t)[pos:]
        idx = pos + int(np.lexsort((d.imag, d.real))[0])
        t, q = _move(t, q, idx, pos)
    return t, q


def _cut(values: np.ndarray, k: int, gap: float) -> int:
    """Smallest count >= k that does not split a cluster of real parts closer than ``gap``."""
    order = np.sort(values.real)
    k = min(k, len(order))
    while k < len(order) and order[k] - order[k - 1] < gap:
        k += 1
    return k


# -- eigensolvers -----------------------------------------------------------------------

def _operator_norm(h) -> float:
    if sp.issparse(h):
        return float(sp.linalg.norm(h, 1))
    return float(np.linalg.norm(h, 1))


def dense_schur(h, k: int, cluster_gap: float = 1e-6) -> SpectrumRecord:
    """Dense complex Schur decomposition, reordered to the ``k`` lowest real parts."""
    mat = h.toarray() if sp.issparse(h) else np.asarray(h)
    mat = mat.astype(complex)
    t, q = la.schur(mat, output="complex")
    count = _cut(np.diag(t), k, cluster_gap)
    if count < len(t):
        threshold = np.sort(np.diag(t).real)[count - 1]
        select = (np.diag(t).real <= threshold).astype(np.int32)
        t, q, _, _, _, _, info = lapack.ztrsen(select, t, q, job="N")
        if info != 0:
            raise ConvergenceError(f"Schur reordering failed (info={info})")
    t, q = sort_schur(t, q, count)
    t, q = t[:count, :count], q[:, :count]
    res = float(np.linalg.norm(mat @ q - q @ t))
    return SpectrumRecord(np.diag(t).copy(), q, np.triu(t), res, "dense", 0, _operator_norm(mat))


def krylov_schur(
    h,
    k: int = 30,
    ncv: int = 120,
    tol: float = 1e-13,
    max_restarts: int = 400,
    seed: int = 0,
    cluster_gap: float = 1e-6,
) -> SpectrumRecord:
    """Thick-restart Arnoldi (Krylov-Schur) for the ``k`` lowest-real-part eigenvalues.

    Parameters
    ----------
    h : sparse matrix
        Operator with ``@`` product.
    k : int
        Number of wanted Schur vectors (increased so clusters are not split).
    ncv : int
        Maximal Krylov subspace dimension.
    tol : float
        Convergence threshold on ``||b_k|| / ||H||`` where ``H Q = Q T + v b^T``.
    seed : int
        Seed of the deterministic start vector.
    """
    n = h.shape[0]
    anorm = _operator_norm(h)
    ncv = min(ncv, n)
    if k >= ncv:
        raise ValueError(f"k={k} must be smaller than the subspace size {ncv}")
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    basis = np.zeros((n, ncv + 1), dtype=complex)
    basis[:, 0] = v0 / np.linalg.norm(v0)
    rayleigh = np.zeros((ncv + 1, ncv), dtype=complex)
    start = 0
    restarts = 0
    while True:
        for j in range(start, ncv):
            w = h @ basis[:, j]
            for _ in range(2):  # full reorthogonalization, applied twice
                coeff = basis[:, : j + 1].conj().T @ w
                w = w - basis[:, : j + 1] @ coeff
                rayleigh[: j + 1, j] += coeff
            beta = np.linalg.norm(w)
            rayleigh[j + 1, j] = beta
            if beta < 1e-14 * anorm:
                w = rng.standard_normal(n) + 0j
                for _ in range(2):
                    w = w - basis[:, : j + 1] @ (basis[:, : j + 1].conj().T @ w)
                basis[:, j + 1] = w / np.linalg.norm(w)
                rayleigh[j + 1, j] = 0.0
            else:
                basis[:, j + 1] = w / beta
        t, z = la.schur(rayleigh[:ncv, :ncv], output="complex")
        want = _cut(np.diag(t), k, cluster_gap)
        keep = min(ncv - 1, max(want + (ncv - want) // 2, want))
        keep = _cut(np.diag(t), keep, cluster_gap)
        if keep >= ncv:
            keep = want
        t, z = sort_schur(t, z, keep)
        b = rayleigh[ncv, :ncv] @ z
        if np.linalg.norm(b[:want]) <= tol * anorm:
            q = basis[:, :ncv] @ z[:, :want]
            tk = np.triu(t[:want, :want])
            res = float(np.linalg.norm(h @ q - q @ tk))
            return SpectrumRecord(np.diag(tk).copy(), q, tk, res, "krylov-schur", restarts, anorm)
        restarts += 1
        if restarts > max_restarts:
            raise ConvergenceError(f"Krylov-Schur did not converge after {restarts} restarts")
        new_basis = np.zeros_like(basis)
        new_basis[:, :keep] = basis[:, :ncv] @ z[:, :keep]
        new_basis[:, keep] = basis[:, ncv]
        basis = new_basis
        rayleigh = np.zeros_like(rayleigh)
        rayleigh[:keep, :keep] = t[:keep, :keep]
        rayleigh[keep, :keep] = b[:keep]
        start = keep


def low_spectrum(h, k: int = 30, ncv: int = 120, tol: float = 1e-13, dense_limit: int = DENSE_LIMIT) -> SpectrumRecord:
    """``k`` lowest-real-part eigenvalues with Schur vectors.

    Uses a dense Schur decomposition when the dimension is at most
    ``dense_limit`` and Krylov-Schur otherwise.
    """
    n = h.shape[0]
    if n <= dense_limit or k + 10 >= n:
        return dense_schur(h, k)
    return krylov_schur(h, k=k, ncv=max(ncv, 2 * k + 20), tol=tol)


# -- Jordan structure -------------------------------------------------------------------

def _clusters(diag: np.ndarray, tol: float) -> List[List[int]]:
    groups: List[List[int]] = []
    assigned = [-1] * len(diag)
    for i in range(len(diag)):
        if assigned[i] >= 0:
            continue
        assigned[i] = len(groups)
        members = [i]
        stack = [i]
        while stack:
            a = stack.pop()
            for b in range(len(diag)):
                if assigned[b] < 0 and abs(diag[a] - diag[b]) < tol:
                    assigned[b] = assigned[i]
                    members.append(b)
                    stack.append(b)
        groups.append(sorted(members))
    return groups


def _contiguous(t: np.ndarray, q: np.ndarray, tol: float):
    """Permute the Schur form so every cluster occupies consecutive positions."""
    t = np.asarray(t, dtype=complex).copy(order="F")
    q = np.asarray(q, dtype=complex).copy(order="F")
    pos = 0
    while pos < t.shape[0]:
        diag = np.diag(t)
        members = [i for i in range(pos, len(diag)) if abs(diag[i] - diag[pos]) < tol]
        # pull transitive neighbours as well
        grown = True
        while grown:
            grown = False
            for i in range(pos, len(diag)):
                if i not in members and any(abs(diag[i] - diag[m]) < tol for m in members):
                    members.append(i)
                    grown = True
        members.sort()
        dst = pos
        for src in members:
            t, q = _move(t, q, src, dst)
            dst += 1
        pos = dst
    return t, q


def _solve_upper(t: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return la.solve_triangular(t, rhs, lower=False) if t.size else rhs


def jordanize(
    record: SpectrumRecord,
    tol: float = 1e-6,
    scale: float = 1.0,
    rank_tol: Optional[float] = None,
) -> List[JordanCellRecord]:
    """Resolve the Schur form into Jordan blocks.

    Parameters
    ----------
    record : SpectrumRecord
        Partial Schur data.
    tol : float
        Diagonal entries closer than ``tol * max(1, ||H||)`` form a cluster.
    scale : float
        Off-diagonal normalization: ``(H - E) psi = scale * phi`` (``pi v_F / L``).
    rank_tol : float, optional
        Singular values of the shifted cluster block above this threshold count
        towards its rank (default ``1e-6 * max(1, ||H||)``).

    Returns
    -------
    list of JordanCellRecord
        Sorted by real part of the eigenvalue.
    """
    norm = max(1.0, record.norm)
    atol = tol * norm
    rank_tol = 1e-6 * norm if rank_tol is None else rank_tol
    t, q = _contiguous(record.schur_form, record.schur_vectors, atol)
    t = np.triu(t)
    size = t.shape[0]
    blocks: List[JordanCellRecord] = []
    pos = 0
    diag = np.diag(t)
    while pos < size:
        end = pos + 1
        while end < size and any(abs(diag[end] - diag[m]) < atol for m in range(pos, end)):
            end += 1
        lam = complex(np.mean(diag[pos:end]))
        head = t[:pos, :pos] - lam * np.eye(pos)
        couple = t[:pos, pos:end]
        shifted = t[pos:end, pos:end] - lam * np.eye(end - pos)
        u, sv, vh = np.linalg.svd(shifted)
        rank = int(np.sum(sv > rank_tol))
        if rank and np.linalg.norm(shifted @ shifted) > rank_tol * max(1.0, sv[0]):
            raise IdentificationError("Jordan block larger than 2 detected")
        vecs = vh.conj().T

        def lift_coords(local: np.ndarray, rhs_head: Optional[np.ndarray] = None) -> np.ndarray:
            y = np.zeros(size, dtype=complex)
            y[pos:end] = local
            r = -couple @ local if rhs_head is None else rhs_head - couple @ local
            y[:pos] = _solve_upper(head, r)
            return y

        for r in range(rank):
            phi_loc = u[:, r]
            psi_loc = vecs[:, r] / sv[r]
            y_phi = lift_coords(phi_loc)
            y_psi = lift_coords(psi_loc, y_phi[:pos])
            factor = 1.0 / scale
            if abs(factor) > 1e8:
                warnings.warn(f"ill-conditioned Jordan chain rescaling {factor:.3g}", RuntimeWarning)
            phi = factor * (q @ y_phi)
            psi = q @ y_psi
            gamma = np.vdot(phi, psi) / np.vdot(phi, phi)
            blocks.append(JordanCellRecord(lam, 2, phi, psi, psi - gamma * phi))
        # eigenvectors orthogonal to the range of the cluster block
        kernel = vecs[:, rank:]
        if rank:
            rng = u[:, :rank]
            kernel = kernel - rng @ (rng.conj().T @ kernel)
            keep = []
            for col in range(kernel.shape[1]):
                vec = kernel[:, col]
                for prev in keep:
                    vec = vec - prev * np.vdot(prev, vec)
                nrm = np.linalg.norm(vec)
                if nrm > 1e-6:
                    keep.append(vec / nrm)
            kernel = np.array(keep).T if keep else np.zeros((end - pos, 0))
        for col in range(kernel.shape[1]):
            blocks.append(JordanCellRecord(lam, 1, q @ lift_coords(kernel[:, col])))
        pos = end
    blocks.sort(key=lambda b: (b.eigenvalue.real, b.eigenvalue.imag))
    return blocks


def conformal_weight(E, E0, L: int, v_F: float) -> float:
    """``h = L/(pi v_F) * (E - E0)`` (real part)."""
    if v_F <= 0:
        raise ValueError("v_F must be positive")
    return float(L / (math.pi * v_F) * (complex(E) - complex(E0)).real)


def fit_central_charge(sizes: Sequence[int], energies: Sequence[float], v_F: float, e_inf: Optional[float] = None) -> ScalingFit:
    """Least-squares fit of ``E_0(L) = e L + e_S - pi v_F c/(24 L)``."""
    sizes = np.asarray(sizes, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if len(sizes) < 3:
        raise ValueError("need at least three sizes")
    design = np.column_stack([sizes, np.ones_like(sizes), -math.pi * v_F / (24 * sizes)])
    coef, _, rank, _ = np.linalg.lstsq(design, energies, rcond=None)
    if rank < 3:
        raise ValueError("rank-deficient central-charge fit")
    resid = float(np.linalg.norm(design @ coef - energies))
    return ScalingFit(float(coef[0]), float(coef[1]), float(coef[2]), resid, None if e_inf is None else -e_inf)


def annotate_weights(blocks: Sequence[JordanCellRecord], E0: float, L: int, v_F: float) -> None:
    for b in blocks:
        b.h = conformal_weight(b.eigenvalue, E0, L, v_F)


def _pick(cands: List[JordanCellRecord], target: float, window: float, ambiguity: float, what: str) -> JordanCellRecord:
    inside = sorted((c for c in cands if abs(c.h - target) < window), key=lambda c: abs(c.h - target))
    if not inside:
        raise IdentificationError(f"no {what} candidate within {window} of h={target}")
    best = inside[0]
    for other in inside[1:]:
        if abs(other.h - best.h) < ambiguity:
            raise IdentificationError(
                f"ambiguous {what}: h={best.h:.4f} and h={other.h:.4f} both near {target}"
            )
    return best


def _overlap(phi: np.ndarray, probe: np.ndarray) -> float:
    den = np.linalg.norm(phi) * np.linalg.norm(probe)
    return float(abs(np.vdot(phi, probe)) / den) if den > 0 else 0.0


def _pick_by_overlap(
    cands: List[JordanCellRecord], target: float, window: float, ambiguity: float, probe: np.ndarray
) -> JordanCellRecord:
    inside = [c for c in cands if abs(c.h - target) < window]
    if not inside:
        raise IdentificationError(f"no Jordan cell candidate within {window} of h={target}")
    ranked = sorted(inside, key=lambda c: -_overlap(c.phi, probe))
    if len(ranked) > 1:
        a, b = _overlap(ranked[0].phi, probe), _overlap(ranked[1].phi, probe)
        if a - b < ambiguity:
            raise IdentificationError(
                f"ambiguous Jordan cell: h={ranked[0].h:.4f} (overlap {a:.3f}) and "
                f"h={ranked[1].h:.4f} (overlap {b:.3f}) near {target}"
            )
    return ranked[0]


def identify_multiplet(
    blocks: Sequence[JordanCellRecord],
    h_xi: float,
    h_psi: float,
    window: float = 0.5,
    ambiguity: float = 0.05,
    probe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> Tuple[JordanCellRecord, JordanCellRecord]:
    """Locate ``xi`` (an eigenvector near ``h_xi``) and the Jordan cell near ``h_psi``.

    Blocks must carry conformal weights (see :func:`annotate_weights`).
    Without ``probe`` the cell nearest ``h_psi`` wins.  With ``probe``
    (a map ``xi -> A xi``) the cells inside the window are ranked by
    ``|<phi, A xi>| / (|phi| |A xi|)``, which survives finite-size level
    crossings; ``ambiguity`` then bounds the gap between the two best overlaps.
    """
    singles = [b for b in blocks if b.size == 1]
    cells = [b for b in blocks if b.size == 2]
    xi = _pick(singles, float(h_xi), window, ambiguity, "xi")
    if probe is None:
        cell = _pick(cells, float(h_psi), window, ambiguity, "Jordan cell")
    else:
        cell = _pick_by_overlap(cells, float(h_psi), window, ambiguity, probe(xi.phi))
    return xi, cell
