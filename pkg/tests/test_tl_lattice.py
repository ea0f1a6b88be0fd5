from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logcoupling.lattice.tl import (
    FREE_FERMION,
    LOOP,
    XXZ,
    ChainSpec,
    DenseChain,
    bethe_reference,
    link_patterns,
    loop_pairing,
    pattern_string,
    pauli_hamiltonian,
    spin_basis,
    standard_module_dim,
)
from logcoupling.spectral import fit_central_charge, low_spectrum

F = Fraction

CHAINS = [
    (XXZ, 2, 0, 6),
    (XXZ, 3, F(1, 2), 7),
    (XXZ, F(7, 3), 1, 8),
    (LOOP, 2, 0, 6),
    (LOOP, 3, 1, 8),
    (LOOP, F(1, 2), F(1, 2), 7),
    (FREE_FERMION, 1, 0, 6),
    (FREE_FERMION, 1, 1, 8),
]


def dense(rep, x, sector, L):
    return DenseChain(ChainSpec(L, rep, F(x), F(sector)))


@pytest.mark.parametrize("rep, x, sector, L", CHAINS)
def test_tl_relations(rep, x, sector, L):
    chain = dense(rep, x, sector, L)
    n = chain.loop_weight
    e = [chain.e(i).toarray() for i in range(1, L)]
    for i, ei in enumerate(e):
        assert np.allclose(ei @ ei, n * ei, atol=1e-12)
        if i + 1 < len(e):
            assert np.allclose(ei @ e[i + 1] @ ei, ei, atol=1e-12)
            assert np.allclose(e[i + 1] @ ei @ e[i + 1], e[i + 1], atol=1e-12)
        for k in range(i + 2, len(e)):
            assert np.allclose(ei @ e[k], e[k] @ ei, atol=1e-12)


@pytest.mark.parametrize("rep, x, sector, L", CHAINS)
def test_form_makes_generators_symmetric(rep, x, sector, L):
    chain = dense(rep, x, sector, L)
    g = chain.form.toarray()
    assert np.allclose(g, g.T)
    for i in range(1, L):
        e = chain.e(i).toarray()
        assert np.allclose(g @ e, e.T @ g, atol=1e-12)
    h = chain.hamiltonian.toarray()
    assert np.allclose(g @ h, h.T @ g, atol=1e-12)


@pytest.mark.parametrize("L, j", [(4, 0), (6, 1), (8, 2), (7, F(1, 2)), (9, F(3, 2)), (10, 0)])
def test_loop_dimension(L, j):
    assert len(link_patterns(L, j)) == standard_module_dim(F(L, 2), j)


def test_standard_dimension_values():
    assert [standard_module_dim(3, j) for j in range(4)] == [5, 9, 5, 1]
    with pytest.raises(ValueError):
        standard_module_dim(3, F(1, 2))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.data())
def test_xxz_sector_dimensions(L, data):
    sz = data.draw(st.integers(0, L)) - F(L, 2)
    assert len(spin_basis(L, sz)) == math.comb(L, int(F(L, 2) + sz))


def test_pattern_string_and_pairing():
    pats = link_patterns(4, 0)
    assert sorted(pattern_string(p) for p in pats) == ["(())", "()()"]
    a, b = pats
    n = 0.7
    assert loop_pairing(a, a, n) == pytest.approx(n ** 2)
    assert loop_pairing(a, b, n) == pytest.approx(n)
    through = link_patterns(2, 1)[0]
    assert loop_pairing(through, through, n) == pytest.approx(1.0)


@pytest.mark.parametrize("x", [2, 3])
@pytest.mark.parametrize("sz", [0, 1])
def test_pauli_hamiltonian_blocks(x, sz):
    L = 6
    full = pauli_hamiltonian(L, x)
    chain = dense(XXZ, x, sz, L)
    idx = (2 ** L - 1) ^ chain.basis
    block = full[np.ix_(idx, idx)]
    gamma = math.pi / (x + 1)
    assert np.allclose(block, chain.hamiltonian.toarray() - math.cos(gamma) / 2 * np.eye(len(idx)), atol=1e-13)


@pytest.mark.parametrize("x, j, L", [(F(7, 3), 0, 8), (F(7, 3), 1, 8), (F(5, 2), F(1, 2), 7)])
def test_loop_spectrum_inside_xxz(x, j, L):
    loop = np.linalg.eigvals(dense(LOOP, x, j, L).hamiltonian.toarray())
    xxz = np.linalg.eigvals(dense(XXZ, x, j, L).hamiltonian.toarray())
    for ev in loop:
        assert np.min(np.abs(xxz - ev)) < 1e-10


@pytest.mark.parametrize("sector", [0, 1, 2])
def test_free_fermion_similar_to_xxz(sector):
    a = dense(XXZ, 1, sector, 8).hamiltonian.toarray()
    b = dense(FREE_FERMION, 1, sector, 8).hamiltonian.toarray()
    pa, pb = np.eye(len(a)), np.eye(len(b))
    for _ in range(5):
        pa, pb = pa @ a, pb @ b
        assert np.trace(pa) == pytest.approx(np.trace(pb), rel=1e-12, abs=1e-9)


def test_free_fermion_requires_x1():
    with pytest.raises(ValueError):
        ChainSpec(6, FREE_FERMION, F(2), F(0))


@pytest.mark.parametrize("L, sector", [(6, F(1, 2)), (7, 0), (4, 3)])
def test_invalid_sectors(L, sector):
    with pytest.raises(ValueError):
        ChainSpec(L, XXZ, F(2), sector)


def test_bethe_reference_free_point():
    ref = bethe_reference(1)
    assert ref.h_inf == pytest.approx(2 / math.pi, abs=1e-10)
    assert ref.v_F == 2
    assert ref.c == -2


def test_bethe_reference_percolation():
    ref = bethe_reference(2)
    assert ref.h_inf == pytest.approx(1.0, abs=1e-10)
    assert ref.v_F == pytest.approx(3 * math.sqrt(3) / 2, abs=1e-14)


@pytest.mark.parametrize("x, c, tol", [(2, 0.0, 1e-8), (1, -2.0, 0.05), (3, 0.5, 0.15)])
def test_central_charge_fit(x, c, tol):
    sizes = [8, 10, 12, 14, 16]
    energies = [low_spectrum(dense(XXZ, x, 0, L).hamiltonian, k=1).eigenvalues[0].real for L in sizes]
    ref = bethe_reference(x)
    fit = fit_central_charge(sizes, energies, ref.v_F, ref.h_inf)
    assert fit.c == pytest.approx(c, abs=tol)
    assert fit.bulk == pytest.approx(fit.bulk_reference, abs=1e-3)
