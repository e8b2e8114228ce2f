import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fock_for
from fermifuse import linalg
from fermifuse.clifford_fock import half_chirality, iota_pm, modular_j
from fermifuse.errors import NotCyclic, NotFactor, NotFaithful, NotIsomorphism, NotSeparating
from fermifuse.vn_algebra import (
    algebra_from_generators,
    center,
    commutant,
    connecting_unitary,
    double_commutant,
    gns,
    gns_standard_form,
    hs_j,
    hs_model,
    identity_representation,
    is_factor,
    standard_form,
    standard_form_residuals,
    subspace_distance,
    tomita,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def minus_algebra(fock):
    return algebra_from_generators(fock.dim, fock.side_generators("-"))


def test_algebra_from_generators_examples():
    assert algebra_from_generators(3, []).dim == 1
    assert algebra_from_generators(2, [SX, SZ]).dim == 4
    diag = algebra_from_generators(2, [np.diag([1.0, 2.0])])
    assert diag.dim == 2
    assert diag.contains(np.diag([5.0, -1.0])) and not diag.contains(SX)


def test_algebra_basis_closed():
    alg = algebra_from_generators(4, [np.kron(SX, np.eye(2)), np.kron(SZ, SZ)])
    b = alg.span_basis
    gram = np.einsum("kij,lij->kl", np.conj(b), b)
    assert linalg.fro(gram - np.eye(alg.dim)) <= 1e-12
    for x in b:
        assert alg.contains(linalg.adjoint(x))
        for y in b:
            assert alg.contains(x @ y)
    assert alg.contains(np.eye(4))


def test_commutant_examples():
    full = algebra_from_generators(2, [SX, SZ])
    assert commutant(full).dim == 1
    trivial = algebra_from_generators(3, [])
    assert commutant(trivial).dim == 9


@pytest.mark.parametrize("n", [2, 4])
def test_minus_algebra_factor_and_commutant(n):
    f = fock_for(n)
    alg = minus_algebra(f)
    assert alg.dim == 4 ** (n // 2) and is_factor(alg)
    com = commutant(alg)
    assert com.dim == 4 ** (n // 2)
    # the commutant is the plus algebra twisted by the minus chirality on odd elements
    omega = iota_pm(f, "-", half_chirality(n)).op
    twisted = algebra_from_generators(f.dim, [g @ omega for g in f.side_generators("+")])
    assert subspace_distance(com, twisted) <= 1e-9
    plain = algebra_from_generators(f.dim, f.side_generators("+"))
    assert plain.dim == com.dim and subspace_distance(com, plain) > 0.5


@pytest.mark.parametrize("n", [2, 4])
def test_bicommutant(n):
    alg = minus_algebra(fock_for(n))
    assert subspace_distance(double_commutant(alg), alg) <= 1e-9


def test_center_of_non_factor():
    alg = algebra_from_generators(3, [np.diag([1.0, 1.0, 2.0]), np.kron(np.eye(1), np.diag([1.0, 0, 0]))])
    assert center(alg).dim == 3 and not is_factor(alg)


def test_gns_examples():
    one = algebra_from_generators(1, [])
    assert gns(one, lambda a: complex(a[0, 0])).dim == 1
    m2 = algebra_from_generators(2, [SX, SZ])
    space = gns(m2, np.eye(2) / 2)
    assert space.dim == 4
    # tracial state: left action is unitarily a (x) 1 and the Gram is a multiple of the identity
    assert linalg.fro(space.gram_sqrt - np.eye(4) / np.sqrt(2)) <= 1e-12
    for a in (SX, SZ, SX @ SZ):
        img = space.left(a)
        assert np.allclose(np.sort(np.linalg.eigvals(img).real), np.sort(np.repeat(np.linalg.eigvals(a).real, 2)))
    with pytest.raises(NotFaithful):
        gns(m2, np.diag([1.0, 0.0]))


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_gns_vector_cyclic_separating(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ linalg.adjoint(a) + 0.1 * np.eye(3)
    rho /= np.trace(rho)
    alg = algebra_from_generators(3, [np.diag([1.0, 2.0, 3.0]), np.roll(np.eye(3), 1, axis=0)])
    space = gns(alg, rho)
    td = tomita(space.left, space.omega)
    assert td.cyclic_margin >= 1e-8 and td.separating_margin >= 1e-8
    for b in alg.span_basis:
        v = space.vector(b)
        assert linalg.fro(space.left(b) @ space.omega - v) <= 1e-10
        assert linalg.fro(space.element(v) - b) <= 1e-9


def test_tomita_tracial_example():
    alg = algebra_from_generators(4, [np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))])
    omega = np.array([1, 0, 0, 1]) / np.sqrt(2)
    td = tomita(identity_representation(alg), omega)
    assert linalg.fro(td.delta - np.eye(4)) <= 1e-10
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert linalg.fro(td.j.linear_part - swap) <= 1e-10


def test_tomita_errors():
    alg = algebra_from_generators(4, [np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))])
    with pytest.raises(NotCyclic):
        tomita(identity_representation(alg), np.array([1, 0, 0, 0.0]))
    # M_2 on C^2: every nonzero vector is cyclic but none separates
    full = algebra_from_generators(2, [SX, SZ])
    with pytest.raises(NotSeparating):
        tomita(identity_representation(full), np.array([1, 0.0]))
    diag = algebra_from_generators(2, [np.diag([1.0, 2.0])])
    with pytest.raises(NotCyclic):
        tomita(identity_representation(diag), np.array([1.0, 0.0]))


@pytest.mark.parametrize("n", [2, 4])
def test_fock_modular_data(n):
    f = fock_for(n)
    rep = identity_representation(minus_algebra(f))
    td = tomita(rep, f.vacuum)
    assert linalg.fro(td.j.linear_part - modular_j(f).linear_part) <= 1e-8
    assert td.cyclic_margin >= 1e-8 and td.separating_margin >= 1e-8
    s_resid = linalg.fro(td.s_linear - td.j.linear_part @ np.conj(linalg.psd_sqrt(td.delta)))
    assert s_resid <= 1e-9
    sf = standard_form(rep, f.vacuum)
    res = standard_form_residuals(sf)
    assert max(res.values()) <= 1e-9
    assert linalg.fro(sf.cone_samples[0] - f.vacuum) <= 1e-12


def test_hs_model_properties(fock):
    alg = minus_algebra(fock)
    rep = identity_representation(alg)
    model = hs_model(rep, fock.vacuum)
    rho = model.density
    for a in alg.span_basis[:5]:
        for b in alg.span_basis[:5]:
            lhs = np.vdot(b @ fock.vacuum, a @ fock.vacuum)
            rhs = np.trace(rho @ linalg.adjoint(model.matrix(b)) @ model.matrix(a))
            assert abs(lhs - rhs) <= 1e-10
    j = modular_j(fock)
    rng = np.random.default_rng(0)
    v = rng.normal(size=fock.dim) + 1j * rng.normal(size=fock.dim)
    assert linalg.fro(model.to_hs(j(v)) - linalg.adjoint(model.to_hs(v))) <= 1e-9
    assert linalg.fro(hs_j(model).linear_part - j.linear_part) <= 1e-9


def test_hs_model_already_hs():
    alg = algebra_from_generators(4, [np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))])
    omega = np.array([1, 0, 0, 1]) / np.sqrt(2)
    model = hs_model(identity_representation(alg), omega)
    # identity up to the matrix-unit gauge: w = V (x) conj(V) for a unitary V
    w = model.w.reshape(2, 2, 2, 2)
    v = w[:, 0, :, 0]
    v = v / np.sqrt(abs(np.sum(abs(v) ** 2) / 2))
    assert linalg.is_unitary(v, 1e-9)


def test_hs_model_requires_factor():
    alg = algebra_from_generators(2, [np.diag([1.0, 2.0])])
    with pytest.raises(NotFactor):
        hs_model(identity_representation(alg), np.array([1.0, 1.0]) / np.sqrt(2))


def test_connecting_unitary_identity(fock):
    sf = standard_form(identity_representation(minus_algebra(fock)), fock.vacuum)
    u = connecting_unitary(sf, sf)
    assert linalg.fro(u - np.eye(fock.dim)) <= 1e-9


def test_connecting_unitary_gauge_independent(fock):
    rep = identity_representation(minus_algebra(fock))
    sf_a = standard_form(rep, fock.vacuum, seed=0)
    sf_b = standard_form(rep, fock.vacuum, seed=1)
    space, target = gns_standard_form(rep.algebra, fock.vacuum, seed=5)
    u_a = connecting_unitary(sf_a, target, space.left)
    u_b = connecting_unitary(sf_b, target, space.left)
    assert linalg.fro(u_a - u_b) <= 1e-9
    # Fock vacuum to L^2: a Omega goes to a
    for b in rep.algebra.span_basis:
        assert linalg.fro(u_a @ b @ fock.vacuum - space.vector(b)) <= 1e-9


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_connecting_unitary_between_states(seed):
    f = fock_for(2)
    alg = minus_algebra(f)
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ linalg.adjoint(a) + 0.05 * np.eye(4)
    rho /= np.trace(rho)
    s1, sf1 = gns_standard_form(alg, f.vacuum)
    s2, sf2 = gns_standard_form(alg, rho, seed=3)
    u = connecting_unitary(sf1, sf2, lambda op: s2.left(s1.element(op @ s1.omega)))
    assert linalg.is_unitary(u, 1e-9)
    for b in alg.span_basis:
        assert linalg.fro(u @ s1.left(b) @ linalg.adjoint(u) - s2.left(b)) <= 1e-8
    assert linalg.fro(u @ sf1.j.linear_part - sf2.j.linear_part @ np.conj(u)) <= 1e-8
    for v in sf1.cone_samples:
        assert sf2.cone_min_eig(u @ v) >= -1e-9 * max(1, linalg.fro(v))


def test_connecting_unitary_rejects_non_isomorphism():
    f = fock_for(2)
    sf = standard_form(identity_representation(minus_algebra(f)), f.vacuum)
    with pytest.raises(NotIsomorphism):
        connecting_unitary(sf, sf, lambda op: np.zeros_like(op) + op @ op)
