from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logcoupling.errors import ConvergenceError, SingularParameterError
from logcoupling.lattice.dilute import (
    EMPTY,
    LOOP,
    VERTEX,
    DiluteChain,
    DiluteSpec,
    _dilute_partners,
    dilute_central_charge,
    dilute_hamiltonian,
    dilute_link_patterns,
    dilute_pair,
    dilute_pattern_string,
    dilute_reference,
    dilute_sector_dim,
    hamiltonian_coefficients,
    pair_amplitudes,
    plaquette_weights,
)
from logcoupling.spectral import fit_central_charge, low_spectrum

LAM = 3 * math.pi / 8
LAMS = [LAM, 0.3 * math.pi, 0.42 * math.pi]


def chain(L, rep, lam=LAM, sector=0):
    return DiluteChain(DiluteSpec(L, lam, Fraction(sector), rep))


def op(ch, k, i):
    return ch.local_operator(k, i).toarray()


def brute_force_count(L, j):
    """Strings over ``. ( ) |`` with balanced arcs and no through line under an arc."""
    count = 0
    for word in itertools.product(".()|", repeat=L):
        depth, through, ok = 0, 0, True
        for ch in word:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                ok &= depth >= 0
            elif ch == "|":
                through += 1
                ok &= depth == 0
            if not ok:
                break
        count += ok and depth == 0 and through == 2 * j
    return count


# -- plaquette operators ------------------------------------------------------------

@pytest.mark.parametrize("rep, sector", [(LOOP, 0), (LOOP, 1), (VERTEX, 0), (VERTEX, 1)])
@pytest.mark.parametrize("lam", LAMS)
def test_identity_at_zero(rep, sector, lam):
    ch = chain(4, rep, lam, sector)
    eye = np.eye(ch.dim)
    for i in range(1, 4):
        assert np.allclose(op(ch, 1, i) + op(ch, 2, i) + op(ch, 3, i) + op(ch, 8, i), eye)
        assert np.allclose(ch.r_matrix(0.0, i).toarray(), eye)


@pytest.mark.parametrize("rep, sector", [(LOOP, 0), (LOOP, 1), (VERTEX, 0), (VERTEX, 1)])
def test_dilute_tl_relations(rep, sector):
    ch = chain(5, rep, 0.42 * math.pi, sector)
    n = ch.loop_weight
    for i in range(1, 5):
        e = op(ch, 9, i)
        assert np.allclose(e @ e, n * e, atol=1e-12)
        assert np.allclose(op(ch, 4, i) @ op(ch, 5, i), n * op(ch, 1, i), atol=1e-12)
        if i < 4:
            f = op(ch, 9, i + 1)
            # E_i E_{i+1} E_i = E_i P(site i+2 occupied) and the mirror relation
            assert np.allclose(e @ f @ e, e @ (op(ch, 3, i + 1) + op(ch, 8, i + 1)), atol=1e-12)
            assert np.allclose(f @ e @ f, f @ (op(ch, 2, i) + op(ch, 8, i)), atol=1e-12)
        for k in range(i + 2, 5):
            g = op(ch, 9, k)
            assert np.allclose(e @ g, g @ e, atol=1e-12)


@pytest.mark.parametrize("rep", [LOOP, VERTEX])
def test_yang_baxter(rep):
    rng = np.random.default_rng(7)
    ch = chain(3, rep, 0.42 * math.pi)
    for u, v in rng.uniform(-0.4, 0.4, size=(5, 2)):
        lhs = ch.r_matrix(u, 1) @ ch.r_matrix(u + v, 2) @ ch.r_matrix(v, 1)
        rhs = ch.r_matrix(v, 2) @ ch.r_matrix(u + v, 1) @ ch.r_matrix(u, 2)
        assert abs(lhs - rhs).max() < 1e-10


@pytest.mark.parametrize("rep", [LOOP, VERTEX])
def test_hamiltonian_is_derivative(rep):
    ch = chain(4, rep)
    d = 1e-6
    total = np.zeros((ch.dim, ch.dim), dtype=complex)
    for i in range(1, 4):
        fd = ((ch.r_matrix(d, i) - ch.r_matrix(-d, i)) / (2 * d)).toarray()
        assert np.allclose(fd, ch.density(i).toarray(), atol=1e-6)
        total -= fd
    assert np.allclose(total, ch.hamiltonian.toarray(), atol=1e-6)
    assert np.allclose(dilute_hamiltonian(ch.spec).toarray(), ch.hamiltonian.toarray())


@pytest.mark.parametrize("rep, L", [(LOOP, 4), (LOOP, 6), (LOOP, 8), (VERTEX, 4), (VERTEX, 6)])
def test_hamiltonian_symmetric_under_form(rep, L):
    ch = chain(L, rep)
    g = ch.form.toarray()
    h = ch.hamiltonian.toarray()
    assert np.allclose(g, g.T)
    assert np.allclose(g @ h, h.T @ g, atol=1e-12)


def test_weights_at_zero():
    rho = plaquette_weights(0.0, LAM)
    assert rho[0] == pytest.approx(1.0)
    assert rho[3] == 0.0
    assert rho[1] == rho[2] and rho[3] == rho[4] and rho[5] == rho[6]


def test_o8_coefficient():
    coeffs = hamiltonian_coefficients(LAM)
    cot = lambda t: math.cos(t) / math.sin(t)
    assert coeffs[7] == pytest.approx(-(cot(3 * math.pi / 4) + cot(9 * math.pi / 8)), abs=1e-14)


def test_singular_lambda():
    with pytest.raises(SingularParameterError):
        hamiltonian_coefficients(math.pi / 3)


def test_lambda_range():
    with pytest.raises(ValueError):
        DiluteSpec(4, 0.2, 0)


def test_pair_amplitudes_give_loop_weight():
    for lam in LAMS:
        a, b = pair_amplitudes(lam)
        assert a * b == pytest.approx(1.0)
        assert a * a + b * b == pytest.approx(-2 * math.cos(4 * lam))


# -- link patterns and pairing -------------------------------------------------------

@pytest.mark.parametrize("L", range(1, 9))
@pytest.mark.parametrize("j", [0, Fraction(1, 2), 1, Fraction(3, 2), 2])
def test_sector_dimension_brute_force(L, j):
    if 2 * j > L:
        return
    expected = brute_force_count(L, j)
    assert len(dilute_link_patterns(L, j)) == expected
    assert dilute_sector_dim(L, j) == expected


@pytest.mark.parametrize("j", [0, 1])
def test_sector_dimension_ten_sites(j):
    assert len(dilute_link_patterns(10, j)) == dilute_sector_dim(10, j) == brute_force_count(10, j)


def test_pattern_round_trip():
    for p in dilute_link_patterns(6, 1):
        assert _dilute_partners(dilute_pattern_string(p)) == p


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-2, max_value=2, allow_nan=False))
def test_pairing_examples(n):
    matched_a, matched_b = _dilute_partners("(.)()."), _dilute_partners("(.()).")
    assert dilute_pair(matched_a, matched_b, n) == pytest.approx(n)
    assert dilute_pair(matched_a, _dilute_partners("().()."), n) == 0.0
    empty = (EMPTY,) * 6
    assert dilute_pair(empty, empty, n) == 1.0


def test_pairing_length_mismatch():
    with pytest.raises(ValueError):
        dilute_pair((EMPTY,), (EMPTY, EMPTY), 1.0)


# -- representations -----------------------------------------------------------------

@pytest.mark.parametrize("L", [4, 6])
def test_loop_spectra_inside_vertex(L):
    # generic lambda: at n = 0 Jordan cells split eigenvalues by sqrt(eps)
    lam = 0.42 * math.pi
    vertex = np.linalg.eigvals(chain(L, VERTEX, lam).hamiltonian.toarray())
    for j in range(0, L // 2 + 1):
        loop = np.linalg.eigvals(chain(L, LOOP, lam, sector=j).hamiltonian.toarray())
        for ev in loop:
            assert np.min(np.abs(vertex - ev)) < 1e-9


# -- reference constants --------------------------------------------------------------

def test_reference_at_polymer_point():
    assert dilute_central_charge(LAM) == pytest.approx(0.0, abs=1e-12)
    assert math.pi / (3 * LAM) == pytest.approx(8 / 9)
    assert dilute_central_charge(math.pi / 4) == pytest.approx(1.0)
    assert DiluteSpec(4, LAM).loop_weight == pytest.approx(0.0, abs=1e-15)


def test_h_inf_divergent_regime():
    with pytest.raises(ConvergenceError):
        dilute_reference(LAM)


def test_h_inf_matches_ground_state_energy():
    lam = 0.28 * math.pi
    ref = dilute_reference(lam)
    sizes = [6, 7, 8, 9, 10]
    energies = [low_spectrum(chain(L, VERTEX, lam).hamiltonian, k=1).eigenvalues[0].real for L in sizes]
    fit = fit_central_charge(sizes, energies, ref.v_F, ref.h_inf)
    assert fit.bulk == pytest.approx(-ref.h_inf, abs=1e-3)


def test_reference_falls_back_to_ground_state():
    ref = chain(6, VERTEX).reference()
    assert ref.v_F == pytest.approx(8 / 9)
    assert math.isfinite(ref.h_inf)
