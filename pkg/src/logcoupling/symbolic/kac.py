"""Kac parametrization of central charges and conformal weights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ..errors import SingularParameterError

Rational = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction (floats are rejected)."""
    if isinstance(value, float):
        raise TypeError("exact arithmetic requires int, Fraction or 'p/q' string, got float")
    return Fraction(value)


def _check(x: Fraction) -> None:
    if x == 0 or x == -1:
        raise SingularParameterError(f"Kac parameter x={x} is singular")


def central_charge(x: Rational) -> Fraction:
    """Return ``c = 1 - 6/(x(x+1))``.

    Examples
    --------
    >>> central_charge(2), central_charge(1), central_charge(Fraction(1, 2))
    (Fraction(0, 1), Fraction(-2, 1), Fraction(-7, 1))
    """
    x = as_fraction(x)
    _check(x)
    return 1 - Fraction(6) / (x * (x + 1))


def kac_weight(x: Rational, r: int, s: int) -> Fraction:
    """Return ``h_{r,s} = ([(x+1)r - xs]^2 - 1) / (4x(x+1))``."""
    x = as_fraction(x)
    _check(x)
    return ((x + 1) * r - x * s) ** 2 / (4 * x * (x + 1)) - Fraction(1) / (4 * x * (x + 1))


@dataclass(frozen=True)
class KacPoint:
    """A point of the Kac parametrization.

    Attributes
    ----------
    x : Fraction
        Kac parameter; ``q = exp(i*pi/(x+1))``.
    """

    x: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_fraction(self.x))
        _check(self.x)

    @property
    def c(self) -> Fraction:
        return central_charge(self.x)

    @property
    def gamma_over_pi(self) -> Fraction:
        return 1 / (self.x + 1)

    def weight(self, r: int, s: int) -> Fraction:
        return kac_weight(self.x, r, s)

    def dense_weight(self, j: Fraction) -> Fraction:
        """Weight ``h_{1,1+2j}`` of a dense sector with 2j through lines."""
        return _label_weight(self.x, 1, 1 + 2 * Fraction(j))

    def dilute_weight(self, j: Fraction) -> Fraction:
        """Weight ``h_{1+2j,1}`` of a dilute sector with 2j through lines."""
        return _label_weight(self.x, 1 + 2 * Fraction(j), 1)


def _label_weight(x: Fraction, r: Fraction, s: Fraction) -> Fraction:
    # labels may be half-integers for odd chains; the formula is polynomial in r, s
    return (((x + 1) * r - x * s) ** 2 - 1) / (4 * x * (x + 1))
