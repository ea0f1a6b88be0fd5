from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logcoupling.errors import NotADiamondError, SingularParameterError
from logcoupling.symbolic.beta import (
    beta_exact,
    convention_ratio,
    dense_polymer_beta_closed_form,
    descendant_beta,
)
from logcoupling.symbolic.kac import KacPoint, as_fraction, central_charge, kac_weight
from logcoupling.symbolic.staggered import diamond_kind, staggered_shape
from oracles import naive_gram, partition_count

from logcoupling.symbolic.verma import (
    ACONV,
    L1POWER,
    VermaModule,
    VirasoroWord,
    determinant,
    gram_matrix,
    null_vector_operator,
    partitions,
)

F = Fraction


def kac_product(h, x, level):
    out = F(1)
    for r in range(1, level + 1):
        for s in range(1, level // r + 1):
            out *= (h - kac_weight(x, r, s)) ** partition_count(level - r * s)
    return out


# -- Kac parametrization ---------------------------------------------------------------

@pytest.mark.parametrize("x, c", [(1, -2), (2, 0), (3, F(1, 2)), (4, F(7, 10)), (5, F(4, 5)), (F(1, 2), -7)])
def test_central_charge(x, c):
    assert central_charge(x) == c


@pytest.mark.parametrize(
    "x, r, s, h",
    [(2, 1, 5, 2), (2, 1, 4, 1), (3, 1, 5, F(5, 2)), (3, 1, 3, F(1, 2)), (1, 1, 5, 1), (3, 1, 2, F(1, 16)), (3, 2, 1, F(1, 2)), (2, 3, 1, 2)],
)
def test_kac_weight(x, r, s, h):
    assert kac_weight(x, r, s) == h


@pytest.mark.parametrize("x", [0, -1])
def test_singular_kac_parameter(x):
    with pytest.raises(SingularParameterError):
        central_charge(x)


def test_floats_rejected():
    with pytest.raises(TypeError):
        as_fraction(2.0)


def test_kac_point_weights():
    point = KacPoint(F(3))
    assert point.dense_weight(2) == F(5, 2)
    assert point.dilute_weight(1) == kac_weight(3, 3, 1)
    assert point.gamma_over_pi == F(1, 4)


@given(st.fractions(min_value=F(1, 10), max_value=10, max_denominator=50), st.integers(1, 6), st.integers(1, 6))
def test_kac_symmetry(x, r, s):
    assert kac_weight(x, r, s) == kac_weight(x, -r, -s)


# -- Verma modules ---------------------------------------------------------------------

@pytest.mark.parametrize("level", range(0, 9))
def test_partition_counts(level):
    assert len(partitions(level)) == partition_count(level)


@pytest.mark.parametrize("level", range(1, 7))
@pytest.mark.parametrize("h, c", [(F(0), F(0)), (F(1, 3), F(-2)), (F(5, 7), F(1, 2)), (F(-2, 3), F(25, 3))])
def test_gram_matches_naive_oracle(h, c, level):
    assert gram_matrix(h, c, level) == naive_gram(h, c, level)


@settings(max_examples=25, deadline=None)
@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.fractions(min_value=-10, max_value=2, max_denominator=20),
    st.integers(1, 4),
)
def test_gram_symmetric_and_naive(h, c, level):
    g = gram_matrix(h, c, level)
    assert g == [list(row) for row in zip(*g)]
    assert g == naive_gram(h, c, level)


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from([F(2), F(3), F(1, 2), F(5, 3)]),
    st.fractions(min_value=-3, max_value=3, max_denominator=30),
    st.integers(1, 4),
)
def test_kac_determinant(x, h, level):
    """``det G = const(level) * prod (h - h_{r,s})^{p(level - rs)}`` with an h-independent constant."""
    c = central_charge(x)
    ref_h = F(7, 11)
    det, ref = determinant(gram_matrix(h, c, level)), determinant(gram_matrix(ref_h, c, level))
    prod, ref_prod = kac_product(h, x, level), kac_product(ref_h, x, level)
    assert ref_prod != 0
    assert det * ref_prod == ref * prod


def test_level_two_null_vector():
    x = F(2)
    h = kac_weight(x, 1, 2)
    word = null_vector_operator(h, central_charge(x), 2)
    assert word == VirasoroWord({(2,): 1, (1, 1): F(-3, 2) / (2 * h + 1)})


@pytest.mark.parametrize("x, r, s", [(2, 1, 5), (3, 1, 4), (1, 1, 7), (3, 3, 1), (2, 1, 3)])
@pytest.mark.parametrize("convention", [ACONV, L1POWER])
def test_null_vector_is_singular(x, r, s, convention):
    x = F(x)
    c = central_charge(x)
    h = kac_weight(x, r, s)
    word = null_vector_operator(h, c, r * s, convention)
    module = VermaModule(h, c)
    vec = module.apply_word(word)
    for m in (1, 2):
        assert not any(module.mode(m, vec).values())
    pin = (r * s,) if convention == ACONV else (1,) * (r * s)
    assert word.coefficient(pin) == 1


def test_word_algebra():
    a, b = VirasoroWord.generator(1), VirasoroWord.generator(2)
    assert (a * b).coefficient((1, 2)) == 1
    assert (a + a).coefficient((1,)) == 2
    assert (a - a) == VirasoroWord()
    assert VirasoroWord.identity().level == 0


# -- staggered shapes ------------------------------------------------------------------

@pytest.mark.parametrize(
    "family, x0, j, h_xi, h_psi",
    [("dense", 2, 2, 0, 2), ("dense", 2, F(3, 2), 0, 1), ("dense", 3, 2, F(1, 2), F(5, 2)), ("dilute", 2, 1, 0, 2)],
)
def test_shapes(family, x0, j, h_xi, h_psi):
    shape = staggered_shape(family, x0, j)
    assert (shape.h_xi, shape.h_psi, shape.n) == (h_xi, h_psi, h_psi - h_xi)


@pytest.mark.parametrize(
    "x0, j, kind",
    [(2, F(1, 2), "standard"), (2, 1, "simple"), (3, F(3, 2), "simple"), (1, 1, "plain_jordan"), (2, 2, "diamond")],
)
def test_diamond_kinds(x0, j, kind):
    assert diamond_kind("dense", x0, j) == kind
    if kind != "diamond":
        with pytest.raises(NotADiamondError):
            staggered_shape("dense", x0, j)


# -- couplings --------------------------------------------------------------------------

EXACT = [
    ("dense", 2, F(3, 2), F(-1, 2)),
    ("dense", 2, 2, F(-5, 8)),
    ("dense", 2, 3, F(-35, 3)),
    ("dense", 2, F(7, 2), F(-13475, 216)),
    ("dense", 1, 2, F(-1)),
    ("dense", 1, 3, F(-9, 2)),
    ("dense", 1, 4, F(-75, 4)),
    ("dense", 3, 2, F(-35, 24)),
    ("dense", 3, F(5, 2), F(-13475, 243)),
    ("dense", 3, 3, F(-49049, 17496)),
    ("dense", 3, 4, F(-40415375, 944784)),
    ("dense", 4, F(5, 2), F(-693, 100)),
    ("dense", 5, 3, F(-676039, 59895)),
    ("dilute", 2, 1, F(5, 6)),
    ("dilute", 2, 2, F(67375, 676)),
    ("dilute", 3, F(3, 2), F(175, 12)),
    ("dilute", 3, 2, F(49049, 15552)),
    ("dense", F(1, 2), 3, F(-2)),
    ("dense", F(1, 2), F(7, 2), F(8)),
]


@pytest.mark.parametrize("family, x0, j, value", EXACT)
def test_exact_couplings(family, x0, j, value):
    assert beta_exact(staggered_shape(family, x0, j)).value == value


@pytest.mark.parametrize("j, value", [(2, -1), (3, -18), (4, -2700)])
def test_l1_power_convention(j, value):
    shape = staggered_shape("dense", 1, j)
    l1 = beta_exact(shape, L1POWER).value
    assert l1 == value
    assert l1 * convention_ratio(shape) == beta_exact(shape, ACONV).value


@pytest.mark.parametrize("j", range(2, 9))
def test_dense_polymer_closed_form(j):
    assert beta_exact(staggered_shape("dense", 1, j), L1POWER).value == dense_polymer_beta_closed_form(j)


def test_closed_form_values():
    assert dense_polymer_beta_closed_form(2) == -1
    assert dense_polymer_beta_closed_form(5) == -F(factorial(7) ** 2, 64) * 4


def test_descendant_beta_at_c0():
    # L_{-2} acting on both Jordan partners of the stress tensor at c = 0
    assert descendant_beta(F(-5, 8), 0, 1) == F(-5, 2)
    assert descendant_beta(F(5, 6), 0, 2) == F(5, 6) * 8
