"""Dilute O(n) chains built from the nine plaquette operators.

Two representations of the dilute Temperley-Lieb operators are provided.

``loop``
    Dilute link patterns: each site is empty, paired with another site by a
    non-crossing arc, or carries one of ``2j`` through lines.  Closed loops
    weigh ``n = -2 cos 4 lambda``.
``vertex``
    Spin-1 states ``0, +, -`` per site, sector ``S_z``.  Pair creation uses
    ``u = a |+-> + b |-+>`` with ``a b = 1`` and ``a^2 = exp(i(pi - 4 lambda))``,
    so a closed loop weighs ``u^T u = n``.  This representation glues the
    link-pattern sectors together and carries the Jordan cells.

Sites are numbered ``1..L``; ``O^k_i`` acts on sites ``i, i+1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from ..errors import ConvergenceError, SingularParameterError
from .tl import THROUGH, _connect_through, standard_module_dim

LOOP = "loop"
VERTEX = "vertex"
REPRESENTATIONS = (LOOP, VERTEX)

EMPTY = -2

# vertex site states
ZERO, UP, DOWN = 0, 1, 2


@dataclass(frozen=True)
class DiluteSpec:
    """Size, anisotropy and sector of a dilute chain.

    Attributes
    ----------
    L : int
        Number of sites.
    lam : float
        Anisotropy ``lambda`` in ``[pi/4, pi/2]``.
    sector : Fraction
        ``j`` (loop, ``2j`` through lines) or ``S_z`` (vertex).
    representation : str
        ``"loop"`` or ``"vertex"``.
    """

    L: int
    lam: float
    sector: Fraction = Fraction(0)
    representation: str = VERTEX

    def __post_init__(self):
        object.__setattr__(self, "sector", Fraction(self.sector))
        if self.L < 2:
            raise ValueError("need at least two sites")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        if not math.pi / 4 - 1e-12 <= self.lam <= math.pi / 2 + 1e-12:
            raise ValueError(f"lambda={self.lam} outside [pi/4, pi/2]")
        if self.sector.denominator != 1 and self.representation == VERTEX:
            raise ValueError("spin-1 sectors have integer S_z")

    @property
    def loop_weight(self) -> float:
        return -2 * math.cos(4 * self.lam)

    @property
    def central_charge(self) -> float:
        return dilute_central_charge(self.lam)


def dilute_central_charge(lam: float) -> float:
    """``c = 1 - 3 (4 lambda - pi)^2 / (2 lambda pi)``."""
    return 1 - 3 * (4 * lam - math.pi) ** 2 / (2 * lam * math.pi)


# -- weights ---------------------------------------------------------------------

def _check_lambda(lam: float) -> Tuple[float, float]:
    s2, s3 = math.sin(2 * lam), math.sin(3 * lam)
    if abs(s2) < 1e-12 or abs(s3) < 1e-12:
        raise SingularParameterError(f"sin(2 lambda) or sin(3 lambda) vanishes at lambda={lam}")
    return s2, s3


def plaquette_weights(u: float, lam: float) -> Tuple[float, ...]:
    """The nine integrable weights ``rho_1..rho_9`` at spectral parameter ``u``."""
    s2, s3 = _check_lambda(lam)
    su, a3, a2, a1 = math.sin(u), math.sin(3 * lam - u), math.sin(2 * lam - u), math.sin(lam - u)
    r6 = su * a3 / (s2 * s3)
    r2 = a3 / s3
    r4 = su / s3
    return (1 + r6, r2, r2, r4, r4, r6, r6, a2 * a3 / (s2 * s3), -su * a1 / (s2 * s3))


def hamiltonian_coefficients(lam: float) -> Tuple[float, ...]:
    """Coefficients of ``O^1..O^9`` in ``h_{i,i+1} = dR/du`` at ``u = 0``."""
    s2, s3 = _check_lambda(lam)
    cot2, cot3 = math.cos(2 * lam) / s2, math.cos(3 * lam) / s3
    return (
        1 / s2,
        -cot3,
        -cot3,
        1 / s3,
        1 / s3,
        1 / s2,
        1 / s2,
        -(cot2 + cot3),
        -math.sin(lam) / (s2 * s3),
    )


# -- link patterns ---------------------------------------------------------------

def _dilute_strings(L: int, through: int) -> List[str]:
    out: List[str] = []

    def grow(prefix: str, depth: int, left: int):
        remaining = L - len(prefix)
        if remaining == 0:
            if depth == 0 and left == 0:
                out.append(prefix)
            return
        if depth + left > remaining:
            return
        grow(prefix + ".", depth, left)
        grow(prefix + "(", depth + 1, left)
        if depth > 0:
            grow(prefix + ")", depth - 1, left)
        if depth == 0 and left > 0:
            grow(prefix + "|", depth, left - 1)

    grow("", 0, through)
    return sorted(out)


def _dilute_partners(word: str) -> Tuple[int, ...]:
    stack: List[int] = []
    partner = [EMPTY if ch == "." else THROUGH for ch in word]
    for i, ch in enumerate(word):
        if ch == "(":
            stack.append(i)
        elif ch == ")":
            k = stack.pop()
            partner[i], partner[k] = k, i
    return tuple(partner)


def dilute_link_patterns(L: int, j) -> List[Tuple[int, ...]]:
    """Dilute patterns with ``2j`` through lines.

    Each entry is the partner index of a site, ``-1`` for a through line and
    ``-2`` for an empty site.
    """
    through = Fraction(2) * Fraction(j)
    if through.denominator != 1 or not 0 <= through <= L:
        raise ValueError(f"no dilute patterns with 2j={through} on {L} sites")
    return [_dilute_partners(w) for w in _dilute_strings(L, int(through))]


def dilute_pattern_string(pattern: Sequence[int]) -> str:
    return "".join(
        "." if p == EMPTY else "|" if p == THROUGH else ("(" if p > i else ")")
        for i, p in enumerate(pattern)
    )


def dilute_sector_dim(L: int, j) -> int:
    """``sum_k binom(L, k) d_j(k)`` over occupied-site counts ``k``."""
    j = Fraction(j)
    total = 0
    for k in range(L + 1):
        if k >= 2 * j and (k - 2 * j) % 2 == 0:
            total += math.comb(L, k) * standard_module_dim(Fraction(k, 2), j)
    return total


def dilute_pair(a: Sequence[int], b: Sequence[int], n: float) -> float:
    """Mirror-gluing pairing; zero unless both patterns have the same empty sites."""
    if len(a) != len(b):
        raise ValueError("patterns of different lengths")
    if any((x == EMPTY) != (y == EMPTY) for x, y in zip(a, b)):
        return 0.0
    occupied = [i for i, x in enumerate(a) if x != EMPTY]
    loops, ok = _connect_through(a, b, occupied)
    return n ** loops if ok else 0.0


def _join(p: List[int], a: int, b: int) -> Tuple[float, bool]:
    """Remove the strands at ``a`` and ``b`` by joining them; returns (loops, alive)."""
    pa, pb = p[a], p[b]
    p[a] = p[b] = EMPTY
    if pa == b:
        return 1, True
    if pa == THROUGH and pb == THROUGH:
        return 0, False
    if pa == THROUGH:
        p[pb] = THROUGH
    elif pb == THROUGH:
        p[pa] = THROUGH
    else:
        p[pa], p[pb] = pb, pa
    return 0, True


def _loop_action(k: int, pattern: Tuple[int, ...], a: int, b: int, n: float):
    """Image of ``pattern`` under ``O^k`` on sites ``a, b`` (0-based): (coeff, pattern) or None."""
    occ_a, occ_b = pattern[a] != EMPTY, pattern[b] != EMPTY
    p = list(pattern)
    if k == 1:
        return (1.0, pattern) if not occ_a and not occ_b else None
    if k == 2:
        return (1.0, pattern) if occ_a and not occ_b else None
    if k == 3:
        return (1.0, pattern) if not occ_a and occ_b else None
    if k == 8:
        return (1.0, pattern) if occ_a and occ_b else None
    if k == 5:
        if occ_a or occ_b:
            return None
        p[a], p[b] = b, a
        return 1.0, tuple(p)
    if k in (6, 7):
        src, dst = (a, b) if k == 6 else (b, a)
        if p[src] == EMPTY or p[dst] != EMPTY:
            return None
        partner = p[src]
        p[dst], p[src] = partner, EMPTY
        if partner >= 0:
            p[partner] = dst
        return 1.0, tuple(p)
    if k in (4, 9):
        if not (occ_a and occ_b):
            return None
        loops, alive = _join(p, a, b)
        if not alive:
            return None
        if k == 9:
            p[a], p[b] = b, a
        return n ** loops, tuple(p)
    raise ValueError(f"plaquette index {k} not in 1..9")


# -- vertex states ---------------------------------------------------------------

def spin1_basis(L: int, sz: int) -> np.ndarray:
    """Sorted base-3 codes (site 1 most significant) with ``#(+) - #(-) = sz``."""
    codes = np.arange(3 ** L, dtype=np.int64)
    digits = _digits(codes, L)
    mag = (digits == UP).sum(axis=1) - (digits == DOWN).sum(axis=1)
    return codes[mag == sz]


def _digits(codes: np.ndarray, L: int) -> np.ndarray:
    powers = 3 ** np.arange(L - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % 3


def pair_amplitudes(lam: float) -> Tuple[complex, complex]:
    """``(a, b)`` of the pair state ``a|+-> + b|-+>``; ``a^2 + b^2 = n``."""
    a = cmath.exp(0.5j * (math.pi - 4 * lam))
    return a, 1 / a


# -- chain ------------------------------------------------------------------------

@dataclass
class DiluteChain:
    """A dilute O(n) chain with plaquette operators, Hamiltonian and bilinear form."""

    spec: DiluteSpec
    basis: object = field(init=False, repr=False)

    def __post_init__(self):
        if self.spec.representation == LOOP:
            self.basis = dilute_link_patterns(self.spec.L, self.spec.sector)
            self._index = {p: k for k, p in enumerate(self.basis)}
        else:
            self.basis = spin1_basis(self.spec.L, int(self.spec.sector))
            self._digits = _digits(self.basis, self.spec.L)
        self._cache: dict = {}

    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def loop_weight(self) -> float:
        return self.spec.loop_weight

    @property
    def central_charge(self) -> float:
        return self.spec.central_charge

    def local_operator(self, k: int, i: int) -> sp.csr_matrix:
        """``O^k_i`` acting on sites ``i, i+1`` (1-based)."""
        if not 1 <= k <= 9:
            raise ValueError(f"plaquette index {k} not in 1..9")
        if not 1 <= i <= self.L - 1:
            raise IndexError(f"site {i} out of range for L={self.L}")
        key = (k, i)
        if key not in self._cache:
            if self.spec.representation == LOOP:
                self._cache[key] = self._loop_operator(k, i)
            else:
                self._cache[key] = self._vertex_operator(k, i)
        return self._cache[key]

    def r_matrix(self, u: float, i: int) -> sp.csr_matrix:
        """``sum_k rho_k(u) O^k_i``."""
        weights = plaquette_weights(u, self.spec.lam)
        return _combine(weights, [self.local_operator(k, i) for k in range(1, 10)])

    def density(self, i: int) -> sp.csr_matrix:
        """``h_{i,i+1}``; the Hamiltonian is ``H = -sum_i h_{i,i+1}``."""
        coeffs = hamiltonian_coefficients(self.spec.lam)
        return _combine(coeffs, [self.local_operator(k, i) for k in range(1, 10)])

    def densities(self) -> List[sp.csr_matrix]:
        return [self.density(i) for i in range(1, self.L)]

    @cached_property
    def hamiltonian(self) -> sp.csr_matrix:
        h = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for d in self.densities():
            h = h + d
        return (-h).tocsr()

    @cached_property
    def form(self) -> sp.spmatrix:
        """Matrix ``G`` of the bilinear form, ``<u|v> = u^T G v``."""
        if self.spec.representation == VERTEX:
            return sp.identity(self.dim, dtype=complex, format="csr")
        n = self.loop_weight
        g = np.array([[dilute_pair(a, b, n) for b in self.basis] for a in self.basis], dtype=complex)
        return sp.csr_matrix(g)

    def pair(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Bilinear (non-conjugating) pairing of coordinate vectors."""
        if u.shape != (self.dim,) or v.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        return complex(u @ (self.form @ v))

    def reference(self) -> "DiluteReference":
        """Bulk constants; ``h_inf`` falls back to a lattice estimate where the integral diverges."""
        try:
            return dilute_reference(self.spec.lam)
        except ConvergenceError:
            return DiluteReference(
                self.central_charge, math.pi / (3 * self.spec.lam), self.bulk_density_estimate()
            )

    def bulk_density_estimate(self) -> float:
        """Ground-state value of the central ``h_{i,i+1}`` (bilinear expectation)."""
        if "h_est" not in self._cache:
            from ..spectral import low_spectrum

            rec = low_spectrum(self.hamiltonian, k=1)
            gs = rec.schur_vectors[:, 0]
            mid = self.density(max(1, self.L // 2))
            self._cache["h_est"] = float((self.pair(gs, mid @ gs) / self.pair(gs, gs)).real)
        return self._cache["h_est"]

    # construction
    def _loop_operator(self, k: int, i: int) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        n = self.loop_weight
        for col, pat in enumerate(self.basis):
            image = _loop_action(k, pat, i - 1, i, n)
            if image is None or image[0] == 0:
                continue
            coeff, new = image
            rows.append(self._index[new])
            cols.append(col)
            vals.append(coeff)
        return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(self.dim, self.dim))

    def _vertex_operator(self, k: int, i: int) -> sp.csr_matrix:
        L = self.L
        da, db = self._digits[:, i - 1], self._digits[:, i]
        wa, wb = 3 ** (L - i), 3 ** (L - i - 1)
        codes = self.basis
        a, b = pair_amplitudes(self.spec.lam)
        occ_a, occ_b = da != ZERO, db != ZERO
        cols = np.arange(self.dim)
        entries: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []

        def shift(mask, new_a, new_b, coeff):
            sel = cols[mask]
            new = codes[sel] + (new_a - da[sel]) * wa + (new_b - db[sel]) * wb
            rows = np.searchsorted(codes, new)
            entries.append((rows, sel, np.broadcast_to(np.asarray(coeff, dtype=complex), sel.shape)))

        if k in (1, 2, 3, 8):
            mask = {1: ~occ_a & ~occ_b, 2: occ_a & ~occ_b, 3: ~occ_a & occ_b, 8: occ_a & occ_b}[k]
            shift(mask, da[mask], db[mask], 1.0)
        elif k == 4:
            for (sa, sb), amp in (((UP, DOWN), a), ((DOWN, UP), b)):
                mask = (da == sa) & (db == sb)
                shift(mask, ZERO, ZERO, amp)
        elif k == 5:
            mask = ~occ_a & ~occ_b
            shift(mask, UP, DOWN, a)
            shift(mask, DOWN, UP, b)
        elif k == 6:
            mask = occ_a & ~occ_b
            shift(mask, ZERO, da[mask], 1.0)
        elif k == 7:
            mask = ~occ_a & occ_b
            shift(mask, db[mask], ZERO, 1.0)
        else:
            for (sa, sb), amp in (((UP, DOWN), a), ((DOWN, UP), b)):
                mask = (da == sa) & (db == sb)
                shift(mask, UP, DOWN, amp * a)
                shift(mask, DOWN, UP, amp * b)
        rows = np.concatenate([e[0] for e in entries])
        sel = np.concatenate([e[1] for e in entries])
        vals = np.concatenate([e[2] for e in entries])
        return sp.csr_matrix((vals, (rows, sel)), shape=(self.dim, self.dim))


def _combine(coeffs: Sequence[float], ops: Sequence[sp.spmatrix]) -> sp.csr_matrix:
    out = sp.csr_matrix(ops[0].shape, dtype=complex)
    for c, op in zip(coeffs, ops):
        if c != 0:
            out = out + c * op
    return out.tocsr()


def build_dilute_chain(spec: DiluteSpec) -> DiluteChain:
    return DiluteChain(spec)


def dilute_hamiltonian(spec: DiluteSpec) -> sp.csr_matrix:
    return DiluteChain(spec).hamiltonian


# -- reference constants -----------------------------------------------------------

@dataclass(frozen=True)
class DiluteReference:
    """Central charge, Fermi velocity and ground-state mean of ``h_{i,i+1}``."""

    c: float
    v_F: float
    h_inf: float


def dilute_reference(lam: float) -> DiluteReference:
    """Bulk constants of the dilute chain at anisotropy ``lam``.

    ``h_inf = 2 int_R tanh(3 lam k) cosh((5 lam - pi) k) cosh(lam k) / sinh(pi k) dk``.
    The integrand grows like ``exp((|5 lam - pi| + lam - pi) k)``, so the
    integral only exists for ``lam < pi/3``; elsewhere a
    :class:`ConvergenceError` is raised.
    """
    if not math.pi / 4 - 1e-12 <= lam <= math.pi / 2 + 1e-12:
        raise ValueError(f"lambda={lam} outside [pi/4, pi/2]")
    c = dilute_central_charge(lam)
    v_F = math.pi / (3 * lam)
    rate = abs(5 * lam - math.pi) + lam - math.pi
    if rate >= 0:
        raise ConvergenceError(f"h_inf integral diverges at lambda={lam} (growth rate {rate:.4f})")
    p = 5 * lam - math.pi

    def integrand(k):
        if k == 0.0:
            return 3 * lam / math.pi
        # tanh(3 lam k) cosh(p k) cosh(lam k) / sinh(pi k) with decaying exponentials
        th = math.tanh(3 * lam * k)
        num = 0.25 * (
            math.exp((p + lam - math.pi) * k)
            + math.exp((p - lam - math.pi) * k)
            + math.exp((-p + lam - math.pi) * k)
            + math.exp((-p - lam - math.pi) * k)
        )
        return 2 * th * num / (1 - math.exp(-2 * math.pi * k))

    value, err = quad(integrand, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    if not math.isfinite(value) or err > 1e-10:
        raise ConvergenceError(f"h_inf quadrature error estimate {err}")
    return DiluteReference(c, v_F, 4 * value)
