import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fock_for
from fermifuse import linalg
from fermifuse.errors import NotEven, NotOrthogonal, NotThetaOrthogonal, OddInput
from fermifuse.fermion_model import OrthogonalElement, random_theta_orthogonal, reflect
from fermifuse.implementers import (
    EVEN,
    ODD,
    Implementer,
    distance_up_to_phase,
    fusable,
    generator_unitary,
    implement,
    implementation_residual,
    kappa,
    parity,
    recover_g,
)


def test_implement_identity(fock):
    imp = implement(fock, np.eye(fock.model.dim))
    assert np.allclose(imp.u, np.eye(fock.dim), atol=1e-12)
    assert imp.parity == EVEN


def test_implement_pi_rotation(fock):
    m = fock.model
    g = np.eye(m.dim)
    g[:2, :2] = -np.eye(2)  # rotation by pi in the plane of the first two minus samples
    imp = implement(fock, g)
    assert linalg.fro(imp.u @ linalg.adjoint(imp.u) - np.eye(fock.dim)) <= 1e-10
    assert implementation_residual(fock, imp) <= 1e-9


def test_implement_rejects_non_orthogonal(fock):
    with pytest.raises(NotOrthogonal):
        implement(fock, 1j * np.eye(fock.model.dim))


@pytest.mark.parametrize("n", [2, 4])
def test_implementer_suite(n):
    f = fock_for(n)
    for seed in range(10):
        g = random_theta_orthogonal(f.model, seed)
        h = random_theta_orthogonal(f.model, seed + 100)
        ug, uh, ugh = implement(f, g), implement(f, h), implement(f, g @ h)
        assert implementation_residual(f, ug) <= 1e-9
        assert ug.parity == EVEN
        z = linalg.hs_inner(ug.u @ uh.u, ugh.u) / f.dim
        assert abs(abs(z) - 1) <= 1e-9
        assert distance_up_to_phase(ugh.u, ug.u @ uh.u) <= 1e-9


def test_parity_examples(fock):
    assert parity(fock, implement(fock, np.eye(fock.model.dim))) == EVEN
    e = np.zeros(fock.model.dim)
    e[1] = 1
    gen = generator_unitary(fock, e)
    assert parity(fock, gen) == ODD
    assert implementation_residual(fock, gen) <= 1e-12


def test_recover_g_is_homomorphism(fock):
    m = fock.model
    g, h = random_theta_orthogonal(m, 1), random_theta_orthogonal(m, 2)
    ug, uh = implement(fock, g), implement(fock, h)
    assert linalg.fro(recover_g(fock, ug.u @ uh.u).g - (g @ h).g) <= 1e-10
    assert linalg.fro(recover_g(fock, ug.u).g - g.g) <= 1e-10


def test_kappa(fock):
    m = fock.model
    ident = implement(fock, np.eye(m.dim))
    assert np.allclose(kappa(fock, ident).u, np.eye(fock.dim), atol=1e-12)
    imp = implement(fock, random_theta_orthogonal(m, 4))
    twice = kappa(fock, kappa(fock, imp))
    assert distance_up_to_phase(twice.u, imp.u) <= 1e-9
    k = kappa(fock, imp)
    assert np.allclose(k.g.g, reflect(m, imp.g).g)
    assert implementation_residual(fock, k) <= 1e-9
    assert parity(fock, k) == EVEN
    with pytest.raises(OddInput):
        kappa(fock, generator_unitary(fock, np.eye(m.dim)[0]))


def test_evenness_stable(fock):
    m = fock.model
    a, b = implement(fock, random_theta_orthogonal(m, 1)), implement(fock, random_theta_orthogonal(m, 2))
    assert parity(fock, a @ b) == EVEN
    assert parity(fock, kappa(fock, a)) == EVEN


def fusable_pair(fock, seed):
    m = fock.model
    g = random_theta_orthogonal(m, seed)
    h = random_theta_orthogonal(m, seed + 1)
    flip = np.eye(m.n_modes)[::-1]
    g2 = m.block_diag(flip @ m.plus_block(g.g) @ flip, m.plus_block(h.g))
    return implement(fock, g), implement(fock, g2)


def test_fusable(fock):
    ident = implement(fock, np.eye(fock.model.dim))
    assert fusable(fock, ident, ident)
    u1, u2 = fusable_pair(fock, 3)
    assert fusable(fock, u1, u2)
    u = implement(fock, random_theta_orthogonal(fock.model, 11))
    assert not fusable(fock, u, u)
    with pytest.raises(NotEven):
        fusable(fock, generator_unitary(fock, np.eye(fock.model.dim)[0]), ident)
    with pytest.raises(NotThetaOrthogonal):
        fusable(fock, implement(fock, fock.model.tau.real), ident)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_implementer_json_round_trip(seed):
    f = fock_for(2)
    imp = implement(f, random_theta_orthogonal(f.model, seed))
    back = Implementer.from_json(json.dumps(imp.to_json()))
    assert np.array_equal(back.u, imp.u) and np.array_equal(back.g.g, imp.g.g)
    assert back.parity == imp.parity


@pytest.mark.slow
def test_implementer_n6():
    f = fock_for(6)
    imp = implement(f, random_theta_orthogonal(f.model, 0))
    assert implementation_residual(f, imp) <= 1e-9
