"""Truncated q-series for Virasoro characters.

A :class:`QSeries` is ``q**offset * sum_k coeffs[k] q**(k * step)`` with
``offset`` and ``step`` exact rationals.  The coefficient list is exactly known up to (but excluding)
index ``len(coeffs)``; beyond that nothing is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Tuple

from .symbolic.kac import _label_weight, as_fraction, central_charge

DENSE = "dense"
DILUTE = "dilute"


@dataclass(frozen=True)
class QSeries:
    """Exact truncated series in ``q`` on a rational grid of exponents.

    Attributes
    ----------
    offset : Fraction
        Power of ``q`` multiplying ``coeffs[0]``.
    coeffs : tuple of int
        Coefficients of ``q**(offset + k * step)`` for ``k < len(coeffs)``.
    step : Fraction
        Grid spacing of the exponents; sums and products of series on
        different grids are carried out on the common refinement.
    """

    offset: Fraction
    coeffs: Tuple[int, ...]
    step: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "offset", Fraction(self.offset))
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "step", Fraction(self.step))
        if self.step <= 0:
            raise ValueError("step must be positive")

    @property
    def known_to(self) -> Fraction:
        """Exclusive upper bound of the exponents that are known exactly."""
        return self.offset + len(self.coeffs) * self.step

    @classmethod
    def monomial(cls, power, known_to) -> "QSeries":
        """``q**power`` known up to exponent ``known_to`` (exclusive)."""
        power = Fraction(power)
        return cls(power, [1] + [0] * max(0, _ceil(known_to - power) - 1))

    @classmethod
    def zero(cls, offset, known_to) -> "QSeries":
        offset = Fraction(offset)
        return cls(offset, [0] * max(0, _ceil(known_to - offset)))

    def shifted(self, power) -> "QSeries":
        """Multiply by ``q**power``."""
        return QSeries(self.offset + Fraction(power), self.coeffs, self.step)

    def regrid(self, step) -> "QSeries":
        """The same series on a finer grid ``step`` dividing ``self.step``."""
        ratio = self.step / Fraction(step)
        if ratio.denominator != 1:
            raise ValueError(f"step {step} does not refine {self.step}")
        ratio = int(ratio)
        if ratio == 1:
            return self
        out = [0] * (len(self.coeffs) * ratio)
        out[::ratio] = self.coeffs
        return QSeries(self.offset, out, step)

    def _common_step(self, other: "QSeries", with_offsets: bool) -> Fraction:
        step = _fraction_gcd(self.step, other.step)
        if with_offsets and other.offset != self.offset:
            step = _fraction_gcd(step, abs(other.offset - self.offset))
        return step

    def __add__(self, other: "QSeries") -> "QSeries":
        step = self._common_step(other, True)
        a, b = self.regrid(step), other.regrid(step)
        base = min(a.offset, b.offset)
        top = min(a.known_to, b.known_to)
        size = max(0, int((top - base) / step))
        out = [0] * size
        for series in (a, b):
            shift = int((series.offset - base) / step)
            for k, c in enumerate(series.coeffs):
                if shift + k < size:
                    out[shift + k] += c
        return QSeries(base, out, step)

    def __neg__(self) -> "QSeries":
        return QSeries(self.offset, [-c for c in self.coeffs], self.step)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def scaled(self, factor: int) -> "QSeries":
        return QSeries(self.offset, [factor * c for c in self.coeffs], self.step)

    def __rmul__(self, factor: int) -> "QSeries":
        return self.scaled(factor)

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, int):
            return self.scaled(other)
        step = self._common_step(other, False)
        a, b = self.regrid(step), other.regrid(step)
        # relative precision is the shorter of the two coefficient lists
        size = min(len(a.coeffs), len(b.coeffs))
        out = [0] * size
        for i, x in enumerate(a.coeffs[:size]):
            if x:
                for j, y in enumerate(b.coeffs[: size - i]):
                    out[i + j] += x * y
        return QSeries(a.offset + b.offset, out, step)

    def truncated(self, known_to) -> "QSeries":
        size = max(0, _ceil((Fraction(known_to) - self.offset) / self.step))
        if size > len(self.coeffs):
            raise ValueError("cannot extend a truncated series")
        return QSeries(self.offset, self.coeffs[:size], self.step)

    def terms(self) -> Iterable[Tuple[Fraction, int]]:
        for k, c in enumerate(self.coeffs):
            if c:
                yield self.offset + k * self.step, c

    def agrees_with(self, other: "QSeries", known_to=None) -> bool:
        """Coefficient-wise equality on the exponents both series know."""
        diff = self - other
        if known_to is not None:
            diff = diff.truncated(known_to)
        return not any(diff.coeffs)

    def __str__(self) -> str:
        parts = [f"{c}*q^({e})" for e, c in self.terms()]
        return (" + ".join(parts) or "0") + f" + O(q^({self.known_to}))"


def _fraction_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(gcd(a.numerator * b.denominator, b.numerator * a.denominator), a.denominator * b.denominator)


def _ceil(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def euler_function(trunc: int) -> QSeries:
    """``prod_{n>=1} (1 - q^n)`` known through ``q**trunc``."""
    if trunc < 0:
        raise ValueError("trunc must be non-negative")
    coeffs = [0] * (trunc + 1)
    coeffs[0] = 1
    for n in range(1, trunc + 1):
        for k in range(trunc, n - 1, -1):
            coeffs[k] -= coeffs[k - n]
    return QSeries(0, coeffs)


def inverse_euler(trunc: int) -> QSeries:
    """``1/prod(1 - q^n)``: partition numbers through ``q**trunc``."""
    coeffs = [0] * (trunc + 1)
    coeffs[0] = 1
    for n in range(1, trunc + 1):
        for k in range(n, trunc + 1):
            coeffs[k] += coeffs[k - n]
    return QSeries(0, coeffs)


def _over_euler(numerator_terms: Iterable[Tuple[Fraction, int]], trunc: int) -> QSeries:
    """``sum(coeff q^power) / prod(1 - q^n)`` known to relative order ``trunc``.

    ``trunc`` counts integer steps above the leading power of the numerator.
    """
    terms = [(Fraction(p), k) for p, k in numerator_terms if k]
    if not terms:
        raise ValueError("empty numerator")
    base = min(p for p, _ in terms)
    coeffs = [0] * (trunc + 1)
    for p, k in terms:
        d = p - base
        if d.denominator != 1:
            raise ValueError("numerator powers must differ by integers")
        if d <= trunc:
            coeffs[int(d)] += k
    return QSeries(base, coeffs) * inverse_euler(trunc)


def kac_character(x, j, family: str = DENSE, trunc: int = 30) -> QSeries:
    """Character of the standard module with 2j through lines.

    Dense: ``(q^{h_{1,1+2j}} - q^{h_{1,-1-2j}}) q^{-c/24} / P(q)``;
    dilute uses the labels ``(1+2j, 1)`` and ``(-1-2j, 1)``.
    """
    x = as_fraction(x)
    j = Fraction(j)
    c = central_charge(x)
    if family == DENSE:
        top, sub = _label_weight(x, 1, 1 + 2 * j), _label_weight(x, 1, -1 - 2 * j)
    elif family == DILUTE:
        top, sub = _label_weight(x, 1 + 2 * j, 1), _label_weight(x, -1 - 2 * j, 1)
    else:
        raise ValueError(f"unknown family {family!r}")
    return _over_euler([(top - c / 24, 1), (sub - c / 24, -1)], trunc)


# (first, second, excluded window) per residue of j mod 4; the numerators are
# q^{(24n + first + 24p)^2/48} - q^{(24n + second + 24p)^2/48}
_ISING_BRANCHES = {
    0: (-1, 17, lambda p: (-2 * p, -1)),
    1: (5, 11, lambda p: (-2 * p, -1)),
    2: (11, 29, lambda p: (-2 * p - 1, -1)),
    3: (17, 23, lambda p: (-2 * p - 1, -1)),
}


def ising_simple_character(j: int, trunc: int = 30) -> QSeries:
    """Irreducible character ``chi_j`` of the ``x = 3`` theory with weight ``h_{1,1+2j}``.

    Each residue of ``j`` mod 4 sums ``(q^{a^2/48} - q^{b^2/48}) / eta(q)`` over
    all integers outside a finite window; terms with exponents beyond the
    truncation are dropped.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    p, r = divmod(j, 4)
    first, second, window = _ISING_BRANCHES[r]
    lo, hi = window(p)
    eta_shift = Fraction(1, 24)
    lead = _label_weight(Fraction(3), 1, 1 + 2 * j) - Fraction(1, 48)
    cutoff = lead + trunc + 1
    terms = []
    span = 2 * p + trunc + 6
    for n in range(-span, span + 1):
        if lo <= n <= hi:
            continue
        for offset, sign in ((first, 1), (second, -1)):
            power = Fraction((24 * n + offset + 24 * p) ** 2, 48) - eta_shift
            if power < cutoff:
                terms.append((power, sign))
    series = _over_euler(terms, trunc + 1)
    if series.offset != lead:
        raise ArithmeticError(f"leading power {series.offset} differs from h - c/24 = {lead}")
    return series.truncated(cutoff)


def partition_function(
    x,
    parity: str = "even",
    multiplicity: Callable[[Fraction], int] | None = None,
    trunc: int = 30,
    family: str = DENSE,
    j_max: int | None = None,
) -> QSeries:
    """``sum_j multiplicity(j) K_j`` over integer (``even``) or half-integer (``odd``) spins."""
    mult = multiplicity or (lambda j: int(2 * j + 1))
    start = Fraction(0) if parity == "even" else Fraction(1, 2)
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    total = None
    base = None
    j = start
    limit = Fraction(j_max) if j_max is not None else start + trunc + 8
    while j <= limit:
        k = mult(j)
        if k:
            term = kac_character(x, j, family, trunc + 60).scaled(k)
            if base is None:
                base = term.offset
            total = term if total is None else total + term
        j += 1
    if total is None:
        raise ValueError("multiplicity vanishes everywhere")
    return total.truncated(base + trunc + 1)


def dense_polymer_simple_character(j: int, trunc: int = 30) -> QSeries:
    """Irreducible character of weight ``h_{j,1}`` at ``c = -2``.

    At ``x = 1`` every Verma module has a single chain of singular vectors, the
    first one at level ``j``, so the character is
    ``(q^{h_{j,1}} - q^{h_{j+1,1}}) q^{1/12} / P(q)``.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    x = Fraction(1)
    shift = central_charge(x) / 24
    top, sub = _label_weight(x, j, 1), _label_weight(x, j + 1, 1)
    if top == sub:
        return QSeries.zero(top - shift, top - shift + trunc + 1)
    return _over_euler([(top - shift, 1), (sub - shift, -1)], trunc)


# K_j = chi_j + chi_{j+3} (j even), chi_j + chi_{j+1} (j odd), by residue mod 4
_ISING_PARTNER = {0: 3, 1: 1, 2: 3, 3: 1}


def ising_decomposition(j: int, trunc: int = 30) -> Tuple[QSeries, QSeries]:
    """``(K_j, chi_a + chi_b)`` for the simple content of the ``x = 3`` standard module."""
    rhs = ising_simple_character(j, trunc) + ising_simple_character(j + _ISING_PARTNER[j % 4], trunc)
    return kac_character(3, j, DENSE, trunc), rhs


def ising_decomposition_checks(trunc: int = 30, p_max: int = 0) -> dict:
    """Verdicts for ``K_{4p+r}`` against its simple content, ``r = 0..3``, ``p <= p_max``."""
    out = {}
    for p in range(p_max + 1):
        for r in range(4):
            j = 4 * p + r
            lhs, rhs = ising_decomposition(j, trunc)
            out[f"K_{j} = chi_{j} + chi_{j + _ISING_PARTNER[r]}"] = lhs.agrees_with(rhs, lhs.offset + trunc + 1)
    return out


def dense_polymer_identity(trunc: int = 20) -> Tuple[QSeries, QSeries]:
    """``sum (2j+1) K_j`` at ``x = 1`` and ``sum_{j>=1} j (2 chi_j + chi_{j+1} + chi_{j-1})``."""
    lhs = partition_function(1, "even", trunc=trunc)
    rhs = None
    for j in range(1, trunc + 4):
        term = (
            dense_polymer_simple_character(j, trunc + 8).scaled(2)
            + dense_polymer_simple_character(j + 1, trunc + 8)
            + dense_polymer_simple_character(j - 1, trunc + 8)
        ).scaled(j)
        rhs = term if rhs is None else rhs + term
    return lhs, rhs.truncated(lhs.known_to)
