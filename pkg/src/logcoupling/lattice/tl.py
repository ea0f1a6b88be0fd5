"""Dense Temperley-Lieb chains: XXZ, loop and free-fermion representations.

Sites are numbered ``1..L``.  Spin and fermion bases are bit patterns with
site 1 as the most significant bit (1 = up / occupied), sorted increasingly.
Sectors are labelled by ``S_z`` for the XXZ and free-fermion chains and by
the spin ``j`` (2j through lines) for link patterns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from ..errors import ConvergenceError
from ..symbolic.kac import as_fraction, central_charge

XXZ = "xxz"
LOOP = "loop"
FREE_FERMION = "free_fermion"
REPRESENTATIONS = (XXZ, LOOP, FREE_FERMION)

THROUGH = -1


@dataclass(frozen=True)
class ChainSpec:
    """Definition of a dense chain.

    Attributes
    ----------
    L : int
        Number of sites.
    representation : str
        ``"xxz"``, ``"loop"`` or ``"free_fermion"``.
    x : Fraction
        Kac parameter; ``q = exp(i pi/(x+1))``.
    sector : Fraction
        ``S_z`` (xxz, free_fermion) or the through-line spin ``j`` (loop).
    hamiltonian_sign : int
        ``H = sign * sum(e_i)``; -1 is the antiferromagnetic default.
    """

    L: int
    representation: str = XXZ
    x: Fraction = Fraction(2)
    sector: Fraction = Fraction(0)
    hamiltonian_sign: int = -1

    def __post_init__(self):
        object.__setattr__(self, "x", as_fraction(self.x))
        object.__setattr__(self, "sector", Fraction(self.sector))
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.L < 2:
            raise ValueError("need at least two sites")
        if (Fraction(self.L, 2) + self.sector).denominator != 1:
            raise ValueError(f"sector {self.sector} incompatible with L={self.L}")
        if abs(self.sector) > Fraction(self.L, 2):
            raise ValueError(f"sector {self.sector} out of range for L={self.L}")
        if self.representation == LOOP and self.sector < 0:
            raise ValueError("loop sectors are labelled by j >= 0")
        if self.representation == FREE_FERMION and self.x != 1:
            raise ValueError("the free-fermion representation exists only at x = 1")
        if self.hamiltonian_sign not in (-1, 1):
            raise ValueError("hamiltonian_sign must be +1 or -1")

    @property
    def gamma(self) -> float:
        return math.pi / float(self.x + 1)

    @property
    def q(self) -> complex:
        return complex(np.exp(1j * self.gamma))

    @property
    def loop_weight(self) -> float:
        return 2 * math.cos(self.gamma)


def standard_module_dim(N, j) -> int:
    """``binom(2N, N+j) - binom(2N, N+j+1)`` for half-integer ``N`` and ``j``."""
    N, j = Fraction(N), Fraction(j)
    if (N + j).denominator != 1 or (2 * N).denominator != 1 or not 0 <= j <= N:
        raise ValueError(f"invalid (N, j) = ({N}, {j})")
    L, a = int(2 * N), int(N + j)
    return math.comb(L, a) - math.comb(L, a + 1)


# -- bases ------------------------------------------------------------------------

def spin_basis(L: int, sz) -> np.ndarray:
    """Sorted bit patterns with ``#up - #down = 2 sz``."""
    ups = Fraction(L, 2) + Fraction(sz)
    if ups.denominator != 1 or not 0 <= ups <= L:
        raise ValueError(f"no states with S_z={sz} on {L} sites")
    states = [sum(1 << (L - 1 - s) for s in combo) for combo in combinations(range(L), int(ups))]
    return np.array(sorted(states), dtype=np.int64)


def _link_strings(L: int, through: int) -> List[str]:
    out: List[str] = []

    def grow(prefix: str, depth: int, left: int):
        remaining = L - len(prefix)
        if remaining == 0:
            if depth == 0 and left == 0:
                out.append(prefix)
            return
        if depth + left > remaining:
            return
        grow(prefix + "(", depth + 1, left)
        if depth > 0:
            grow(prefix + ")", depth - 1, left)
        if depth == 0 and left > 0:
            grow(prefix + "|", depth, left - 1)

    grow("", 0, through)
    return sorted(out)


def _partners(word: str) -> Tuple[int, ...]:
    stack: List[int] = []
    partner = [THROUGH] * len(word)
    for i, ch in enumerate(word):
        if ch == "(":
            stack.append(i)
        elif ch == ")":
            k = stack.pop()
            partner[i], partner[k] = k, i
    return tuple(partner)


def link_patterns(L: int, j) -> List[Tuple[int, ...]]:
    """Standard-module basis: partner index per site (``-1`` for a through line).

    Ordered by the bracket word with ``'(' < ')' < '|'``.
    """
    through = Fraction(2) * Fraction(j)
    if through.denominator != 1 or through > L or (L - through) % 2:
        raise ValueError(f"no link patterns with 2j={through} on {L} sites")
    return [_partners(w) for w in _link_strings(L, int(through))]


def pattern_string(pattern: Sequence[int]) -> str:
    return "".join("|" if p == THROUGH else ("(" if p > i else ")") for i, p in enumerate(pattern))


def _connect_through(a: Sequence[int], b: Sequence[int], occupied: Sequence[int]):
    """Glue the mirror of ``a`` on ``b``: (closed loops, valid) on the ``occupied`` sites."""
    layers = (a, b)
    seen = set()
    loops = 0
    for start in occupied:
        if start in seen:
            continue
        # walk alternating a-arcs and b-arcs; an open path ends on two through lines
        ends = []
        for first in (0, 1):
            site, layer = start, first
            while True:
                seen.add(site)
                nxt = layers[layer][site]
                if nxt == THROUGH:
                    ends.append(layer)
                    break
                site = nxt
                seen.add(site)
                layer = 1 - layer
                if site == start and layer == first:
                    break
            if not ends:
                break
        if not ends:
            loops += 1
        elif ends[0] == ends[1]:
            return 0, False
    return loops, True


def loop_pairing(a: Sequence[int], b: Sequence[int], n: float) -> float:
    """Mirror-gluing pairing of two link patterns (zero if through lines contract)."""
    if len(a) != len(b):
        raise ValueError("patterns of different lengths")
    loops, ok = _connect_through(a, b, range(len(a)))
    return n ** loops if ok else 0.0


# -- chains -----------------------------------------------------------------------

@dataclass
class DenseChain:
    """A dense TL chain with its generators, Hamiltonian and bilinear form."""

    spec: ChainSpec
    basis: list = field(init=False, repr=False)

    def __post_init__(self):
        rep = self.spec.representation
        if rep in (XXZ, FREE_FERMION):
            self.basis = spin_basis(self.spec.L, self.spec.sector)
        else:
            self.basis = link_patterns(self.spec.L, self.spec.sector)
        self._generators = [self._build_e(i) for i in range(1, self.spec.L)]

    # public data
    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def loop_weight(self) -> float:
        return self.spec.loop_weight

    def e(self, i: int) -> sp.csr_matrix:
        """Generator ``e_i`` acting on sites ``i, i+1`` (1-based)."""
        if not 1 <= i <= self.L - 1:
            raise IndexError(f"e_{i} out of range for L={self.L}")
        return self._generators[i - 1]

    def densities(self) -> List[sp.csr_matrix]:
        """Local Hamiltonian densities ``h_i`` with ``H = -sum h_i``."""
        sign = -self.spec.hamiltonian_sign
        return [sign * g for g in self._generators]

    @cached_property
    def hamiltonian(self) -> sp.csr_matrix:
        h = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for gen in self._generators:
            h = h + gen
        return (self.spec.hamiltonian_sign * h).tocsr()

    @cached_property
    def form(self) -> sp.spmatrix:
        """Matrix ``G`` of the bilinear form, ``<u|v> = u^T G v``."""
        rep = self.spec.representation
        if rep == XXZ:
            return sp.identity(self.dim, dtype=complex, format="csr")
        if rep == FREE_FERMION:
            return sp.diags(self._fermion_signs().astype(complex), format="csr")
        n = self.loop_weight
        g = np.array([[loop_pairing(a, b, n) for b in self.basis] for a in self.basis], dtype=complex)
        return sp.csr_matrix(g)

    def pair(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Bilinear (non-conjugating) pairing of coordinate vectors."""
        if u.shape != (self.dim,) or v.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        return complex(u @ (self.form @ v))

    def reference(self) -> "BulkReference":
        return bethe_reference(self.spec.x)

    @property
    def central_charge(self) -> float:
        return float(central_charge(self.spec.x))

    # construction
    def _build_e(self, i: int) -> sp.csr_matrix:
        rep = self.spec.representation
        if rep == XXZ:
            return self._xxz_e(i)
        if rep == FREE_FERMION:
            return self._fermion_e(i)
        return self._loop_e(i)

    def _site_bits(self, i: int):
        L = self.L
        return 1 << (L - i), 1 << (L - i - 1)

    def _xxz_e(self, i: int) -> sp.csr_matrix:
        q = self.spec.q
        states = self.basis
        left, right = self._site_bits(i)
        up_l = (states & left) != 0
        up_r = (states & right) != 0
        mixed = np.nonzero(up_l != up_r)[0]
        flipped = states[mixed] ^ (left | right)
        target = np.searchsorted(states, flipped)
        diag = np.where(up_l[mixed], 1 / q, q)
        rows = np.concatenate([mixed, target])
        cols = np.concatenate([mixed, mixed])
        vals = np.concatenate([diag, -np.ones(len(mixed), dtype=complex)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def _fermion_e(self, i: int) -> sp.csr_matrix:
        # e_i = (-1)^{i+1} [n_i - n_{i+1} + c+_i c_{i+1} - c+_{i+1} c_i]
        sign = -1.0 if i % 2 == 0 else 1.0
        states = self.basis
        left, right = self._site_bits(i)
        occ_l = (states & left) != 0
        occ_r = (states & right) != 0
        diag = sign * (occ_l.astype(float) - occ_r.astype(float))
        mixed = np.nonzero(occ_l != occ_r)[0]
        flipped = states[mixed] ^ (left | right)
        target = np.searchsorted(states, flipped)
        # hopping right -> left (c+_i c_{i+1}) has +1, left -> right has -1
        hop = np.where(occ_r[mixed], sign, -sign)
        rows = np.concatenate([np.arange(self.dim), target])
        cols = np.concatenate([np.arange(self.dim), mixed])
        vals = np.concatenate([diag, hop]).astype(complex)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def _fermion_signs(self) -> np.ndarray:
        L = self.L
        even_mask = sum(1 << (L - s) for s in range(2, L + 1, 2))
        parity = np.array([bin(int(s) & even_mask).count("1") % 2 for s in self.basis])
        return 1.0 - 2.0 * parity

    def _loop_e(self, i: int) -> sp.csr_matrix:
        index = {p: k for k, p in enumerate(self.basis)}
        a, b = i - 1, i
        n = self.loop_weight
        rows, cols, vals = [], [], []
        for col, pat in enumerate(self.basis):
            pa, pb = pat[a], pat[b]
            if pa == b:
                rows.append(col)
                cols.append(col)
                vals.append(n)
                continue
            if pa == THROUGH and pb == THROUGH:
                continue
            new = list(pat)
            new[a], new[b] = b, a
            if pa == THROUGH:
                new[pb] = THROUGH
            elif pb == THROUGH:
                new[pa] = THROUGH
            else:
                new[pa], new[pb] = pb, pa
            rows.append(index[tuple(new)])
            cols.append(col)
            vals.append(1.0)
        return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(self.dim, self.dim))


def build_chain(spec: ChainSpec) -> DenseChain:
    return DenseChain(spec)


def build_e(spec: ChainSpec, i: int) -> sp.csr_matrix:
    return DenseChain(spec).e(i)


def build_hamiltonian(spec: ChainSpec) -> sp.csr_matrix:
    return DenseChain(spec).hamiltonian


def pauli_hamiltonian(L: int, x) -> np.ndarray:
    """Full ``2^L`` XXZ Hamiltonian written with Pauli matrices.

    ``(1/2) sum (sx sx + sy sy + (q+1/q)/2 sz sz) + (q-1/q)/4 (sz_1 - sz_L) - (L/2) cos(gamma)``;
    it equals ``-sum e_i`` up to the constant ``-cos(gamma)/2``.
    """
    gamma = math.pi / float(as_fraction(x) + 1)
    q = np.exp(1j * gamma)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)

    def site(op, k):
        mats = [np.eye(2)] * L
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    h = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for k in range(L - 1):
        for op, w in ((sx, 0.5), (sy, 0.5), (sz, 0.25 * (q + 1 / q))):
            h += w * site(op, k) @ site(op, k + 1)
    h += (q - 1 / q) / 4 * (site(sz, 0) - site(sz, L - 1))
    h -= (L / 2) * math.cos(gamma) * np.eye(2 ** L)
    return h


@dataclass(frozen=True)
class BulkReference:
    """Bulk constants entering the lattice Virasoro generators."""

    h_inf: float
    v_F: float
    c: float


def bethe_reference(x) -> BulkReference:
    """Ground-state mean of ``e_i`` and the sound velocity of the dense chain.

    ``e_inf = sin(g) * int_R sinh((pi-g)t) / (sinh(pi t) cosh(g t)) dt`` (the
    Bethe-ansatz energy of the equivalent XXZ chain) and ``v_F = pi sin(g)/g``
    with ``g = pi/(x+1)``.  At ``g = pi/2`` this gives ``e_inf = 2/pi``.
    """
    x = as_fraction(x)
    g = math.pi / float(x + 1)
    if not 0 < g < math.pi:
        raise ValueError("gamma must lie in (0, pi)")
    a = math.pi - g

    def integrand(t):
        if t == 0.0:
            return a / math.pi
        # sinh(a t)/(sinh(pi t) cosh(g t)) written with decaying exponentials
        return (
            2.0 * (1.0 - math.exp(-2 * a * t)) * math.exp(-2 * g * t)
            / ((1.0 - math.exp(-2 * math.pi * t)) * (1.0 + math.exp(-2 * g * t)))
        )

    value, err = quad(integrand, 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-12:
        raise ConvergenceError(f"e_inf quadrature error estimate {err}")
    e_inf = 2 * math.sin(g) * value
    return BulkReference(e_inf, math.pi * math.sin(g) / g, float(central_charge(x)))
