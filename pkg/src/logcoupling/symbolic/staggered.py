"""Staggered-module diamonds of logarithmic minimal models.

A diamond glues the standard module of spin ``j1`` (bottom-left, weight
``h_xi``) to the one of spin ``j`` (top, weight ``h_psi``).  Its shape is fixed
by the integer ``p`` of the equivalent ``x = p`` dense theory:
``j = k/2 (mod (p+1)/2)`` with ``0 <= k <= p``; ``k = p`` gives a simple
module, otherwise ``j1 = j - (k+1)`` and ``j2 = j + p - k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from ..errors import InvalidTheoryError, NotADiamondError
from .kac import _label_weight, as_fraction

DENSE = "dense"
DILUTE = "dilute"

SIMPLE = "simple"
STANDARD = "standard"
PLAIN_JORDAN = "plain_jordan"


@dataclass(frozen=True)
class StaggeredShape:
    """Corner data of a staggered diamond at a fixed Kac point.

    Attributes
    ----------
    family : str
        ``"dense"`` (labels ``(1, 1+2j)``) or ``"dilute"`` (labels ``(1+2j, 1)``).
    x0 : Fraction
        Kac parameter of the logarithmic theory.
    j, j1, j2 : Fraction
        Spins of the top, bottom-left and right standard modules.
    h_xi, h_psi : Fraction
        Weights of the bottom-left and top fields.
    n : int
        Level of the singular vector, ``h_psi - h_xi``.
    """

    family: str
    x0: Fraction
    j: Fraction
    j1: Fraction
    j2: Fraction
    h_xi: Fraction
    h_psi: Fraction
    n: int

    @property
    def kac_label_psi(self) -> Tuple[Fraction, Fraction]:
        return label(self.family, self.j)

    @property
    def kac_label_xi(self) -> Tuple[Fraction, Fraction]:
        return label(self.family, self.j1)

    def h_xi_at(self, x: Fraction) -> Fraction:
        return _label_weight(x, *self.kac_label_xi)

    def h_psi_at(self, x: Fraction) -> Fraction:
        return _label_weight(x, *self.kac_label_psi)

    def describe(self) -> str:
        r, s = self.kac_label_psi
        return f"{self.family} x0={self.x0} beta_{{{r},{s}}}: h {self.h_xi} -> {self.h_psi} (level {self.n})"


def label(family: str, j) -> Tuple[Fraction, Fraction]:
    """Kac label of the sector with 2j through lines."""
    j = Fraction(j)
    if family == DENSE:
        return Fraction(1), 1 + 2 * j
    if family == DILUTE:
        return 1 + 2 * j, Fraction(1)
    raise InvalidTheoryError(f"unknown family {family!r}")


def equivalent_p(family: str, x0) -> int:
    """Integer ``p`` of the dense ``x = p`` theory with the same module structure.

    Dense ``x0 = p`` and ``x0 = 1/p`` share a structure; dilute ``x0`` has the
    loop fugacity of dense ``x0 - 1``.
    """
    x0 = as_fraction(x0)
    if family == DILUTE:
        if x0.denominator == 1 and x0 >= 2:
            return int(x0) - 1
        raise InvalidTheoryError(f"dilute x0={x0} is not an integer >= 2")
    if family == DENSE:
        if x0.denominator == 1 and x0 >= 1:
            return int(x0)
        if x0.numerator == 1 and x0.denominator >= 2:
            return x0.denominator
        raise InvalidTheoryError(f"dense x0={x0} is neither p nor 1/p")
    raise InvalidTheoryError(f"unknown family {family!r}")


def staggered_shape(family: str, x0, j) -> StaggeredShape:
    """Diamond with top spin ``j``.

    Raises
    ------
    NotADiamondError
        With ``kind`` one of ``"simple"``, ``"standard"`` or ``"plain_jordan"``
        when the module carries no coupling.
    InvalidTheoryError
        If ``x0`` is not a supported point.
    """
    x0 = as_fraction(x0)
    j = Fraction(j)
    if j < 0 or (2 * j).denominator != 1:
        raise ValueError(f"j must be a non-negative half-integer, got {j}")
    p = equivalent_p(family, x0)
    period = Fraction(p + 1, 2)
    k = int(2 * (j % period))
    if k == p:
        raise NotADiamondError(SIMPLE, f"j={j} sits in a simple module at p={p}")
    j1 = j - (k + 1)
    j2 = j + p - k
    if j1 < 0:
        raise NotADiamondError(STANDARD, f"j={j} is the top of a standard module only")
    h_xi = _label_weight(x0, *label(family, j1))
    h_psi = _label_weight(x0, *label(family, j))
    gap = h_psi - h_xi
    if gap == 0:
        raise NotADiamondError(PLAIN_JORDAN, f"j={j}: Jordan cell between equal weights, no coupling")
    if gap.denominator != 1 or gap < 0:
        raise InvalidTheoryError(f"weights {h_xi} -> {h_psi} are not separated by a positive integer")
    return StaggeredShape(family, x0, j, j1, j2, h_xi, h_psi, int(gap))


def diamond_kind(family: str, x0, j) -> str:
    """``"diamond"`` or the kind of the non-diamond outcome."""
    try:
        staggered_shape(family, x0, j)
    except NotADiamondError as exc:
        return exc.kind
    return "diamond"
