"""Lattice Virasoro generators built from Hamiltonian densities.

For a chain with ``H = -sum_i h_i``,

    L_n = (L/pi) [ -(1/v_F) sum_{i=1}^{L-1} (h_i - h_inf) cos(n i pi/L)
                   + (1/v_F^2) sum_{i=1}^{L-2} [h_i, h_{i+1}] sin(n i pi/L) ]
          + (c/24) delta_{n,0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Protocol, Tuple

import numpy as np
import scipy.sparse as sp

from .symbolic.verma import VirasoroWord

PLAIN = "plain"
SYMMETRIZED = "symmetrized"
VARIANTS = (PLAIN, SYMMETRIZED)


class LatticeChain(Protocol):
    """What the generators need from a chain."""

    L: int
    dim: int

    def densities(self) -> List[sp.csr_matrix]: ...

    def reference(self): ...


@dataclass
class LatticeVirasoro:
    """Sparse lattice mode ``L_n`` of a chain."""

    n: int
    operator: sp.csr_matrix
    h_inf: float
    v_F: float

    def __matmul__(self, vec: np.ndarray) -> np.ndarray:
        return self.operator @ vec


def lattice_virasoro(chain, n: int, h_inf: float | None = None, v_F: float | None = None, c: float | None = None) -> LatticeVirasoro:
    """Assemble ``L_n`` on ``chain``.

    ``h_inf``, ``v_F`` and ``c`` default to ``chain.reference()``.
    """
    ref = chain.reference()
    h_inf = ref.h_inf if h_inf is None else h_inf
    v_F = ref.v_F if v_F is None else v_F
    c = ref.c if c is None else c
    L = chain.L
    dens = chain.densities()
    dim = chain.dim
    eye = sp.identity(dim, dtype=complex, format="csr")
    cos_part = sp.csr_matrix((dim, dim), dtype=complex)
    for i, h in enumerate(dens, start=1):
        w = math.cos(n * i * math.pi / L)
        if abs(w) > 1e-15:
            cos_part = cos_part + w * (h - h_inf * eye)
    op = (-L / (math.pi * v_F)) * cos_part
    if n != 0:
        sin_part = sp.csr_matrix((dim, dim), dtype=complex)
        for i in range(1, L - 1):
            w = math.sin(n * i * math.pi / L)
            if abs(w) > 1e-15:
                a, b = dens[i - 1], dens[i]
                sin_part = sin_part + w * (a @ b - b @ a)
        op = op + (L / (math.pi * v_F ** 2)) * sin_part
    else:
        op = op + (c / 24) * eye
    return LatticeVirasoro(n, op.tocsr(), h_inf, v_F)


@dataclass
class LatticeWord:
    """Linear combination of products of lattice modes.

    Each term is ``(coefficient, (n_1, ..., n_r))`` standing for
    ``L_{n_1} ... L_{n_r}``; several modes in one factor (symmetrized
    realizations) are stored as tuples of indices summed together.
    """

    terms: List[Tuple[complex, Tuple[Tuple[int, ...], ...]]]
    modes: dict

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to ``vec``, right-most factor first."""
        out = np.zeros_like(vec, dtype=complex)
        for coeff, factors in self.terms:
            w = vec.astype(complex)
            for factor in reversed(factors):
                w = sum(self.modes[m].operator @ w for m in factor)
            out += coeff * w
        return out


def realize_word(
    word: VirasoroWord,
    chain,
    variant: str = PLAIN,
    on_vacuum: bool = False,
    **reference,
) -> LatticeWord:
    """Replace each ``L_{-k}`` of ``word`` by its lattice counterpart.

    ``variant="plain"`` uses ``L_{-k}``; ``"symmetrized"`` uses
    ``L_{-k} + L_{+k}`` (appropriate when the raising part annihilates the
    state acted upon, e.g. on the vacuum).

    With ``on_vacuum=True`` the word acts on the identity state, where
    ``L_{-1}`` vanishes in the continuum; monomials whose first-acting factor
    is ``L_{-1}`` are dropped so that the lattice ``L_{-1}`` (which does not
    annihilate the finite-size ground state) does not pollute the result.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unsupported variant {variant!r}")
    needed = set()
    terms = []
    for mono, coeff in word.terms.items():
        if on_vacuum and mono and mono[-1] == 1:
            continue
        factors = []
        for k in mono:
            factor = (-k,) if variant == PLAIN else (-k, k)
            needed.update(factor)
            factors.append(factor)
        terms.append((complex(coeff), tuple(factors)))
    modes = {n: lattice_virasoro(chain, n, **reference) for n in sorted(needed)}
    return LatticeWord(terms, modes)
