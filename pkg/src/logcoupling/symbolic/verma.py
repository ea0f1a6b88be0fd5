"""Exact Verma-module algebra over the rationals.

States of the Verma module ``V(h, c)`` are stored as dictionaries mapping
partitions (descending tuples ``(k1, k2, ...)`` standing for the PBW monomial
``L_{-k1} L_{-k2} ... |h>``) to :class:`~fractions.Fraction` coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from ..errors import AmbiguousNullVectorError, NoNullVectorError, NormalizationError
from .kac import as_fraction

Monomial = Tuple[int, ...]
Vector = Dict[Monomial, Fraction]

ACONV = "Lminus_n_leading"
L1POWER = "L1_power_leading"
CONVENTIONS = (ACONV, L1POWER)


@dataclass(frozen=True)
class Partition:
    """A partition labelling a PBW basis vector."""

    parts: Tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts) or list(parts) != sorted(parts, reverse=True):
            raise ValueError(f"not a partition: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def level(self) -> int:
        return sum(self.parts)


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> Tuple[Monomial, ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, largest), 0, -1):
        out.extend((first,) + rest for rest in _partitions(n - first, first))
    return tuple(out)


def partitions(level: int) -> Tuple[Monomial, ...]:
    """Partitions of ``level`` in reverse lexicographic order, ``(level,)`` first."""
    if level < 0:
        raise ValueError("level must be non-negative")
    return _partitions(level, level)


def verma_basis(level: int) -> List[Partition]:
    """PBW basis of the level-``level`` subspace, e.g. ``[(2,), (1, 1)]`` at level 2."""
    return [Partition(p) for p in partitions(level)]


class VirasoroWord:
    """Formal linear combination of products of lowering modes.

    A monomial ``(k1, ..., kr)`` stands for ``L_{-k1} ... L_{-kr}``; the
    right-most mode acts first.  Monomials need not be normal ordered but all
    share the same total level.
    """

    __slots__ = ("terms", "level")

    def __init__(self, terms: Mapping[Sequence[int], object] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: Dict[Monomial, Fraction] = {}
        for mono, coeff in items:
            mono = tuple(int(k) for k in mono)
            if any(k <= 0 for k in mono):
                raise ValueError(f"lowering modes must be positive magnitudes: {mono}")
            merged[mono] = merged.get(mono, Fraction(0)) + as_fraction(coeff)
        merged = {m: c for m, c in merged.items() if c != 0}
        levels = {sum(m) for m in merged}
        if len(levels) > 1:
            raise ValueError(f"mixed levels in word: {sorted(levels)}")
        self.terms: Dict[Monomial, Fraction] = dict(sorted(merged.items(), reverse=True))
        self.level = levels.pop() if levels else 0

    @classmethod
    def generator(cls, k: int) -> "VirasoroWord":
        return cls({(k,): 1})

    @classmethod
    def identity(cls) -> "VirasoroWord":
        return cls({(): 1})

    def coefficient(self, mono: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def scaled(self, factor) -> "VirasoroWord":
        return VirasoroWord({m: c * as_fraction(factor) for m, c in self.terms.items()})

    def __mul__(self, other: "VirasoroWord") -> "VirasoroWord":
        if not isinstance(other, VirasoroWord):
            return self.scaled(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[m1 + m2] = out.get(m1 + m2, Fraction(0)) + c1 * c2
        return VirasoroWord(out)

    def __add__(self, other: "VirasoroWord") -> "VirasoroWord":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return VirasoroWord(out)

    def __sub__(self, other: "VirasoroWord") -> "VirasoroWord":
        return self + other.scaled(-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, VirasoroWord) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mono, coeff in self.terms.items():
            ops = "".join(f"L_{{-{k}}}" for k in mono) or "1"
            pieces.append(f"{coeff}*{ops}" if coeff != 1 else ops)
        return " + ".join(pieces)


class VermaModule:
    """The Verma module ``V(h, c)`` with memoized mode actions."""

    def __init__(self, h, c):
        self.h = as_fraction(h)
        self.c = as_fraction(c)
        self._lower: Dict[Tuple[int, Monomial], Vector] = {}
        self._raise: Dict[Tuple[int, Monomial], Vector] = {}

    # -- single-mode actions on basis monomials -------------------------------
    def lower_monomial(self, k: int, mono: Monomial) -> Vector:
        """``L_{-k}`` applied to a PBW monomial, re-expressed in the PBW basis."""
        key = (k, mono)
        hit = self._lower.get(key)
        if hit is not None:
            return hit
        if not mono or k >= mono[0]:
            out = {(k,) + mono: Fraction(1)}
        else:
            # L_{-k} L_{-m} = L_{-m} L_{-k} + (m - k) L_{-k-m}  for k < m
            m, rest = mono[0], mono[1:]
            out = {}
            _axpy(out, 1, self.lower(m, self.lower_monomial(k, rest)))
            _axpy(out, m - k, self.lower_monomial(k + m, rest))
        self._lower[key] = out
        return out

    def raise_monomial(self, m: int, mono: Monomial) -> Vector:
        """``L_{+m}`` (m > 0) applied to a PBW monomial."""
        key = (m, mono)
        hit = self._raise.get(key)
        if hit is not None:
            return hit
        out: Vector = {}
        if mono:
            k, rest = mono[0], mono[1:]
            # L_m L_{-k} = L_{-k} L_m + (m + k) L_{m-k} + (c/12)(m^3 - m) delta_{m,k}
            _axpy(out, 1, self.lower(k, self.raise_monomial(m, rest)))
            _axpy(out, m + k, self.mode_monomial(m - k, rest))
            if m == k:
                _axpy(out, self.c * (m ** 3 - m) / 12, {rest: Fraction(1)})
        self._raise[key] = out
        return out

    def mode_monomial(self, n: int, mono: Monomial) -> Vector:
        """Any mode ``L_n`` on a PBW monomial."""
        if n > 0:
            return self.raise_monomial(n, mono)
        if n < 0:
            return self.lower_monomial(-n, mono)
        return {mono: self.h + sum(mono)}

    # -- linear extensions ----------------------------------------------------
    def lower(self, k: int, vec: Mapping[Monomial, Fraction]) -> Vector:
        out: Vector = {}
        for mono, coeff in vec.items():
            _axpy(out, coeff, self.lower_monomial(k, mono))
        return out

    def mode(self, n: int, vec: Mapping[Monomial, Fraction]) -> Vector:
        out: Vector = {}
        for mono, coeff in vec.items():
            _axpy(out, coeff, self.mode_monomial(n, mono))
        return out

    def apply_word(self, word: VirasoroWord, vec: Mapping[Monomial, Fraction] | None = None) -> Vector:
        """Apply ``word`` to ``vec`` (default: the highest-weight vector)."""
        start = {(): Fraction(1)} if vec is None else dict(vec)
        out: Vector = {}
        for mono, coeff in word.terms.items():
            v = start
            for k in reversed(mono):
                v = self.lower(k, v)
            _axpy(out, coeff, v)
        return out

    def raising_matrix(self, m: int, level: int) -> List[List[Fraction]]:
        """Matrix of ``L_{+m}`` from level ``level`` to level ``level - m``."""
        rows = partitions(level - m)
        index = {p: i for i, p in enumerate(rows)}
        cols = partitions(level)
        mat = [[Fraction(0)] * len(cols) for _ in rows]
        for j, p in enumerate(cols):
            for mono, coeff in self.raise_monomial(m, p).items():
                mat[index[mono]][j] += coeff
        return mat

    def gram(self, level: int) -> List[List[Fraction]]:
        """Gram matrix at ``level`` using ``L_{-k}^dagger = L_{+k}``.

        Built recursively: ``<L_{-k} X | Y> = <X | L_{+k} Y>``.
        """
        cache = getattr(self, "_gram", None)
        if cache is None:
            cache = self._gram = {0: [[Fraction(1)]]}
        if level in cache:
            return cache[level]
        basis = partitions(level)
        size = len(basis)
        g = [[Fraction(0)] * size for _ in range(size)]
        for a, pa in enumerate(basis):
            k, rest = pa[0], pa[1:]
            lower_basis = partitions(level - k)
            lower_index = {p: i for i, p in enumerate(lower_basis)}
            lower_row = self.gram(level - k)[lower_index[rest]]
            for b in range(a, size):
                acc = Fraction(0)
                for mono, coeff in self.raise_monomial(k, basis[b]).items():
                    acc += coeff * lower_row[lower_index[mono]]
                g[a][b] = acc
                g[b][a] = acc
        cache[level] = g
        return g

    def norm(self, word: VirasoroWord) -> Fraction:
        """``<h| word^dagger word |h>``."""
        vec = self.apply_word(word)
        basis = partitions(word.level)
        coords = [vec.get(p, Fraction(0)) for p in basis]
        g = self.gram(word.level)
        return sum(
            (coords[a] * g[a][b] * coords[b] for a in range(len(basis)) if coords[a] for b in range(len(basis)) if coords[b]),
            Fraction(0),
        )


def _axpy(out: Vector, alpha, vec: Mapping[Monomial, Fraction]) -> None:
    if alpha == 0:
        return
    for mono, coeff in vec.items():
        value = out.get(mono, Fraction(0)) + alpha * coeff
        if value:
            out[mono] = value
        else:
            out.pop(mono, None)


def apply_lowering_word(word: VirasoroWord, h, c) -> List[Fraction]:
    """Coordinates of ``word |h>`` in :func:`verma_basis` order."""
    vec = VermaModule(h, c).apply_word(word)
    return [vec.get(p, Fraction(0)) for p in partitions(word.level)]


def gram_matrix(h, c, level: int) -> List[List[Fraction]]:
    """Exact Gram matrix of ``V(h, c)`` at ``level``."""
    return [row[:] for row in VermaModule(h, c).gram(level)]


def determinant(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [list(map(Fraction, row)) for row in mat]
    size = len(a)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, size):
            f = a[r][col] / a[col][col]
            if f:
                for k in range(col, size):
                    a[r][k] -= f * a[col][k]
    return det


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of the right kernel of an exact matrix via reduced row echelon form."""
    a = [list(map(Fraction, row)) for row in rows]
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][col]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == len(a):
            break
    free = [col for col in range(ncols) if col not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * ncols
        vec[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            vec[pcol] = -a[i][fcol]
        basis.append(vec)
    return basis


def null_vector_operator(h, c, level: int, convention: str = ACONV) -> VirasoroWord:
    """The word ``A`` with ``A|h>`` singular at ``level``.

    Parameters
    ----------
    h, c : rational
        Highest weight and central charge.
    level : int
        Level of the singular vector.
    convention : str
        ``"Lminus_n_leading"`` pins the coefficient of ``L_{-level}`` to one,
        ``"L1_power_leading"`` pins the coefficient of ``L_{-1}^level``.

    Raises
    ------
    NoNullVectorError, AmbiguousNullVectorError, NormalizationError
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if level < 1:
        raise NoNullVectorError("singular vectors need level >= 1")
    module = VermaModule(h, c)
    rows = module.raising_matrix(1, level)
    if level >= 2:
        rows = rows + module.raising_matrix(2, level)
    basis = partitions(level)
    kernel = nullspace(rows, len(basis))
    if not kernel:
        raise NoNullVectorError(f"no singular vector at level {level} for h={h}, c={c}")
    if len(kernel) > 1:
        raise AmbiguousNullVectorError(f"{len(kernel)}-dimensional singular space at level {level}")
    vec = kernel[0]
    pin = (level,) if convention == ACONV else (1,) * level
    lead = vec[basis.index(pin)]
    if lead == 0:
        raise NormalizationError(f"coefficient of {pin} vanishes in the singular vector")
    return VirasoroWord({p: v / lead for p, v in zip(basis, vec)})
