import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fock_for, random_vector
from fermifuse import linalg
from fermifuse.clifford_fock import (
    ClElement,
    annihilate,
    bogoliubov,
    create,
    half_chirality,
    half_generators,
    iota_pm,
    klein,
    lambda_alpha_tau,
    modular_j,
    rho,
    right_action,
    tensor_splitting,
)
from fermifuse.errors import NotInDual, NotInLagrangian, NotInMinusAlgebra, NotOrthogonal
from fermifuse.fermion_model import random_theta_orthogonal
from fermifuse.implementers import implement


def test_fock_basis_order():
    f = fock_for(4)
    assert f.dim == 16 and f.basis[0] == ()
    assert f.basis[1:5] == ((0,), (1,), (2,), (3,))
    assert f.basis[5] == (0, 1) and f.basis[-1] == (0, 1, 2, 3)
    assert np.array_equal(f.vacuum, f.basis_vector(()))


def test_create_annihilate_examples(fock):
    m = fock.model
    phi0 = m.mode(0)
    assert np.allclose(create(fock, phi0) @ fock.vacuum, fock.basis_vector((0,)))
    assert np.allclose(annihilate(fock, m.alpha(phi0)) @ fock.vacuum, 0)
    c, a = create(fock, phi0), annihilate(fock, m.alpha(phi0))
    assert linalg.fro(c @ a + a @ c - np.eye(fock.dim)) <= 1e-12


def test_creation_signs():
    f = fock_for(4)
    c = f.creators
    # c_2 on {0,3}: one smaller index, so the sign is -1
    assert np.allclose(c[2] @ f.basis_vector((0, 3)), -f.basis_vector((0, 2, 3)))
    assert np.allclose(c[0] @ f.basis_vector((1, 2)), f.basis_vector((0, 1, 2)))


def test_create_annihilate_domain_errors(fock):
    m = fock.model
    with pytest.raises(NotInLagrangian):
        create(fock, m.alpha(m.mode(0)))
    with pytest.raises(NotInDual):
        annihilate(fock, m.mode(0))


@pytest.mark.parametrize("n", [2, 4])
def test_car_relations(n):
    f = fock_for(n)
    rng = np.random.default_rng(n)
    eye = np.eye(f.dim)
    for _ in range(50):
        a, b = random_vector(rng, 2 * n), random_vector(rng, 2 * n)
        ra, rb = rho(f, a).op, rho(f, b).op
        pairing = np.vdot(f.model.alpha(b), a)
        assert linalg.fro(ra @ rb + rb @ ra - 2 * pairing * eye) <= 1e-10
        assert linalg.fro(linalg.adjoint(ra) - rho(f, f.model.alpha(a)).op) <= 1e-10


def test_rho_on_vacuum(fock):
    phi0 = fock.model.mode(0)
    assert np.allclose(rho(fock, phi0).op @ fock.vacuum, np.sqrt(2) * fock.basis_vector((0,)))


def test_irreducible(fock):
    assert len(linalg.intertwiner_space(fock.sample_generators, fock.sample_generators)) == 1


def test_klein(fock):
    k = klein(fock)
    assert np.allclose(k @ fock.vacuum, fock.vacuum)
    assert np.allclose(k @ fock.basis_vector((0,)), 1j * fock.basis_vector((0,)))
    assert np.allclose(k @ k, fock.gamma)
    assert linalg.is_unitary(k)


def test_lambda_alpha_tau(fock):
    lam = lambda_alpha_tau(fock)
    m = fock.model
    assert np.allclose(lam(fock.vacuum), fock.vacuum)
    rng = np.random.default_rng(0)
    v, z = random_vector(rng, fock.dim), 0.3 - 1.7j
    assert np.allclose(lam(z * v), np.conj(z) * lam(v))
    at = m.alpha @ m.tau
    for _ in range(5):
        f = random_vector(rng, m.dim)
        assert linalg.fro(lam.sandwich(rho(fock, f).op) - rho(fock, at(f)).op) <= 1e-10


def test_modular_j_basics(fock):
    j = modular_j(fock)
    assert linalg.fro(j.square() - np.eye(fock.dim)) <= 1e-10
    assert np.allclose(j(fock.vacuum), fock.vacuum)


def test_right_action(fock):
    rng = np.random.default_rng(5)
    basis = fock.minus_basis
    assert np.allclose(right_action(fock, np.eye(fock.dim)), np.eye(fock.dim))
    for _ in range(5):
        a = np.tensordot(random_vector(rng, len(basis)), basis, axes=1)
        b = np.tensordot(random_vector(rng, len(basis)), basis, axes=1)
        rb = right_action(fock, b)
        assert linalg.fro(a @ rb - rb @ a) <= 1e-9
        assert linalg.fro(right_action(fock, a @ b) - right_action(fock, b) @ right_action(fock, a)) <= 1e-9
    with pytest.raises(NotInMinusAlgebra):
        right_action(fock, fock.side_generators("+")[0])


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 2 * np.pi))
def test_j_conjugation_ignores_lambda_phase(theta):
    # the global phase of Lambda is pinned by vacuum -> vacuum; conjugation
    # by J does not see it
    fock = fock_for(2)
    j = modular_j(fock)
    shifted = linalg.AntiUnitaryOp(np.exp(1j * theta) * j.linear_part)
    a = fock.sample_generators[0] @ fock.sample_generators[1] + 0.3j * fock.sample_generators[2]
    assert linalg.fro(shifted.sandwich(a) - j.sandwich(a)) <= 1e-12


def test_j_maps_minus_generators_to_commutant(fock):
    j = modular_j(fock)
    for r in fock.side_generators("-"):
        jr = j.sandwich(linalg.adjoint(r))
        for s in fock.side_generators("-"):
            assert linalg.fro(jr @ s - s @ jr) <= 1e-10


def test_bogoliubov(fock):
    m = fock.model
    rng = np.random.default_rng(2)
    f = random_vector(rng, m.dim)
    a = rho(fock, f)
    assert np.allclose(bogoliubov(fock, np.eye(m.dim), a).op, a.op)
    g = random_theta_orthogonal(m, 9)
    assert linalg.fro(bogoliubov(fock, g, a).op - rho(fock, g.g @ f).op) <= 1e-10
    b = a @ rho(fock, g.g @ f)
    via_word = bogoliubov(fock, g, b).op
    via_unitary = bogoliubov(fock, g, ClElement(b.op)).op
    assert linalg.fro(via_word - via_unitary) <= 1e-9
    with pytest.raises(NotOrthogonal):
        bogoliubov(fock, 1j * np.eye(m.dim), a)


def test_half_generators():
    for n in (2, 4, 6):
        gens = half_generators(n)
        d = gens[0].shape[0]
        for i, a in enumerate(gens):
            for k, b in enumerate(gens):
                want = 2 * np.eye(d) if i == k else 0
                assert np.allclose(a @ b + b @ a, want)
        w = half_chirality(n)
        assert np.allclose(w @ w, np.eye(d))


def test_iota_examples(fock):
    d = 2 ** (fock.n_modes // 2)
    assert np.allclose(iota_pm(fock, "-", np.eye(d)).op, np.eye(fock.dim))
    gens = half_generators(fock.n_modes)
    x = gens[0] @ gens[1]
    y = gens[-1] @ gens[0]
    ix, iy = iota_pm(fock, "-", x).op, iota_pm(fock, "+", y).op
    assert linalg.fro(ix @ iy - iy @ ix) <= 1e-12
    rng = np.random.default_rng(0)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    for side in "-+":
        img = iota_pm(fock, side, a).op
        assert np.isclose(np.linalg.norm(img, 2), np.linalg.norm(a, 2))
        b = rng.normal(size=(d, d))
        prod = iota_pm(fock, side, a @ b).op
        assert linalg.fro(prod - img @ iota_pm(fock, side, b).op) <= 1e-10


def test_tensor_splitting(fock):
    ts = tensor_splitting(fock)
    d, w = ts.half_dim, ts.w
    assert linalg.is_unitary(w, 1e-10)
    rng = np.random.default_rng(3)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    lhs = w @ iota_pm(fock, "-", a).op @ linalg.adjoint(w)
    assert linalg.fro(lhs - np.kron(a, np.eye(d))) <= 1e-10
    even = half_generators(fock.n_modes)[0] @ half_generators(fock.n_modes)[-1]
    lhs = w @ iota_pm(fock, "+", even).op @ linalg.adjoint(w)
    assert linalg.fro(lhs - np.kron(np.eye(d), even)) <= 1e-10


def _half_implementer(block):
    gens = half_generators(block.shape[0])
    tgt = [np.tensordot(block[:, j], np.array(gens), axes=1) for j in range(len(gens))]
    (x,) = linalg.intertwiner_space(tgt, gens)
    return linalg.polar(x)[0]


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_bogoliubov_splits(seed):
    f = fock_for(4)
    m = f.model
    g = random_theta_orthogonal(m, seed)
    ts = tensor_splitting(f)
    d = ts.half_dim
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    um, up = _half_implementer(m.minus_block(g.g)), _half_implementer(m.plus_block(g.g))
    w = ts.w
    lhs = bogoliubov(f, g, linalg.adjoint(w) @ np.kron(a, b) @ w).op
    rhs = linalg.adjoint(w) @ np.kron(um @ a @ linalg.adjoint(um), up @ b @ linalg.adjoint(up)) @ w
    assert linalg.fro(lhs - rhs) <= 1e-9 * max(1, linalg.fro(lhs))


@pytest.mark.slow
def test_car_n6():
    f = fock_for(6)
    rng = np.random.default_rng(6)
    for _ in range(10):
        a, b = random_vector(rng, 12), random_vector(rng, 12)
        ra, rb = rho(f, a).op, rho(f, b).op
        assert linalg.fro(ra @ rb + rb @ ra - 2 * np.sum(a * b) * np.eye(64)) <= 1e-10
    assert linalg.fro(modular_j(f).square() - np.eye(64)) <= 1e-10
