"""Exact logarithmic couplings from the epsilon -> 0 limit.

For a diamond at ``x0`` the coupling is ``-F'(0)/G'(0)`` with
``F(eps) = <xi|A^dagger A|xi>`` evaluated in the Verma module at
``x0 + eps`` (``A`` frozen at ``eps = 0``) and
``G(eps) = h_psi - h_xi - n``.  Both are rational in ``eps`` with
denominators powers of ``(x0+eps)(x0+1+eps)``; after clearing them the
numerators are recovered by exact interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, List, Sequence

from ..errors import DegreeBoundError, LimitError
from .kac import as_fraction, central_charge
from .staggered import StaggeredShape
from .verma import ACONV, CONVENTIONS, L1POWER, VermaModule, VirasoroWord, null_vector_operator


@dataclass(frozen=True)
class BetaExact:
    """An exact coupling together with the convention used for ``A``."""

    value: Fraction
    convention: str
    shape: StaggeredShape
    operator: VirasoroWord


def newton_coefficients(points: Sequence[Fraction], values: Sequence[Fraction]) -> List[Fraction]:
    """Divided differences of ``values`` sampled at ``points``."""
    coeffs = list(values)
    size = len(points)
    for order in range(1, size):
        for i in range(size - 1, order - 1, -1):
            coeffs[i] = (coeffs[i] - coeffs[i - 1]) / (points[i] - points[i - order])
    return coeffs


def newton_eval(points: Sequence[Fraction], coeffs: Sequence[Fraction], at: Fraction) -> Fraction:
    acc = Fraction(0)
    for k in range(len(coeffs) - 1, -1, -1):
        acc = acc * (at - points[k]) + coeffs[k]
    return acc


def derivative_at_zero(
    func: Callable[[Fraction], Fraction],
    x0: Fraction,
    power: int,
    degree: int,
) -> tuple[Fraction, Fraction]:
    """Value and first derivative at ``eps = 0`` of a rational function.

    ``func(eps) * ((x0+eps)(x0+1+eps))**power`` must be a polynomial of
    degree at most ``degree``; this is checked at one extra point.
    """
    points = [Fraction(k) for k in range(degree + 1)]
    clear = lambda e: ((x0 + e) * (x0 + 1 + e)) ** power  # noqa: E731
    values = [func(e) * clear(e) for e in points]
    coeffs = newton_coefficients(points, values)
    check = Fraction(degree + 1)
    if newton_eval(points, coeffs, check) != func(check) * clear(check):
        raise DegreeBoundError(f"numerator exceeds degree {degree}")
    p0 = coeffs[0]
    dp0 = Fraction(0)
    prod = Fraction(1)
    for k in range(1, len(coeffs)):
        dp0 += coeffs[k] * prod
        prod *= -points[k]
    d0 = clear(Fraction(0))
    dd0 = power * (x0 * (x0 + 1)) ** (power - 1) * (2 * x0 + 1) if power else Fraction(0)
    value = p0 / d0
    return value, (dp0 - value * dd0) / d0


def beta_exact(shape: StaggeredShape, convention: str = ACONV) -> BetaExact:
    """Exact coupling of a staggered diamond.

    Parameters
    ----------
    shape : StaggeredShape
        Diamond returned by :func:`staggered_shape`.
    convention : str
        Normalization of ``A``: ``"Lminus_n_leading"`` (default) or
        ``"L1_power_leading"``.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    x0 = shape.x0
    c0 = central_charge(x0)
    op = null_vector_operator(shape.h_xi, c0, shape.n, convention)
    return BetaExact(limit_coupling(shape, op), convention, shape, op)


def limit_coupling(shape: StaggeredShape, word: VirasoroWord, gap_level: int | None = None) -> Fraction:
    """``-F'(0)/G'(0)`` for an arbitrary lowering word acting on ``xi``.

    ``gap_level`` is the level subtracted in ``G`` (defaults to ``shape.n``).
    """
    x0 = shape.x0
    n = shape.n if gap_level is None else gap_level
    degree = 4 * word.level + 4

    def norm(eps: Fraction) -> Fraction:
        x = x0 + eps
        return VermaModule(shape.h_xi_at(x), central_charge(x)).norm(word)

    def gap(eps: Fraction) -> Fraction:
        x = x0 + eps
        return shape.h_psi_at(x) - shape.h_xi_at(x) - n

    f0, df0 = derivative_at_zero(norm, x0, word.level, degree)
    if f0 != 0:
        raise LimitError(f"<phi|phi> = {f0} at eps=0: the module is not logarithmic here")
    g0, dg0 = derivative_at_zero(gap, x0, 1, 4)
    if g0 != 0:
        raise LimitError(f"weight gap does not close at eps=0 (G(0) = {g0})")
    if dg0 == 0:
        raise LimitError("G'(0) vanishes; the limit is undefined")
    return -df0 / dg0


def convention_ratio(shape: StaggeredShape) -> Fraction:
    """Factor turning an ``L_{-1}^n``-normalized coupling into the ``L_{-n}`` one."""
    c0 = central_charge(shape.x0)
    a = null_vector_operator(shape.h_xi, c0, shape.n, ACONV)
    lead = a.coefficient((1,) * shape.n)
    return lead ** 2


def dense_polymer_beta_closed_form(j: int) -> Fraction:
    """``-[(2j-3)!]^2 / 4^(j-2) * (j-1)`` for the ``x = 1`` diamonds (``L_{-1}^n`` normalization)."""
    if j < 2:
        raise ValueError("j must be >= 2")
    return -Fraction(factorial(2 * j - 3) ** 2, 4 ** (j - 2)) * (j - 1)


def descendant_beta(beta, c, n: int) -> Fraction:
    """Coupling between ``L_{-n} psi`` and ``L_{-n} phi`` when ``A = L_{-2}`` on the vacuum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    beta = as_fraction(beta)
    c = as_fraction(c)
    return (c / 12 * n * (n * n - 1) + (c / 2 if n == 2 else 0) + 4 * n) * beta


__all__ = [
    "ACONV",
    "L1POWER",
    "BetaExact",
    "beta_exact",
    "limit_coupling",
    "convention_ratio",
    "dense_polymer_beta_closed_form",
    "descendant_beta",
    "derivative_at_zero",
]
