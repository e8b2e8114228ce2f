"""Connes fusion of fusable implementers and the fusion factorisation.

The Fock space ``F`` is a standard form of ``N = Cl(V_-)''`` with the vacuum,
so it is neutral for Connes fusion over ``N``; the resulting unitary
``chi: F (x) F -> F`` turns the fusion of implementers into an operation on
``F`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import linalg
from .clifford_fock import FockSpace, modular_j
from .connes_fusion import (
    Bimodule,
    FusionResult,
    L2Space,
    fuse,
    fuse_maps,
    l2_space,
    standard_bimodule,
    standard_unitors,
)
from .errors import ConeAmbiguity, NoJCommutingPhase, NotFusable, OddInput
from .fermion_model import OrthogonalElement
from .implementers import EVEN, Implementer, fusable, implement, implementation_residual, recover_g
from .vn_algebra import (
    StandardFormData,
    VNAlgebra,
    algebra_from_generators,
    connecting_unitary,
    identity_representation,
    standard_form,
)

# Frozen by scripts/calibrate_orientation.py: mu_hat(U, U') = U r^{-1} U'.
ORIENTATION = "inverse"


@dataclass(frozen=True, eq=False)
class FockFusion:
    """Fusion data of the Fock space over ``N``."""

    fock: FockSpace = field(repr=False)
    algebra: VNAlgebra = field(repr=False)
    sf: StandardFormData = field(repr=False)
    bimodule: Bimodule = field(repr=False)
    l2: L2Space = field(repr=False)

    @cached_property
    def to_l2(self) -> np.ndarray:
        """Connecting unitary ``u: F -> L^2(N)``, ``a Omega -> a``."""
        return connecting_unitary(self.sf, self.l2.sf)

    @cached_property
    def fused(self) -> FusionResult:
        return fuse(self.bimodule, self.bimodule, self.l2)

    @cached_property
    def chi(self) -> np.ndarray:
        return chi(self)

    def twist(self, imp: Implementer):
        """Conjugation by ``imp``, an automorphism of ``N`` for theta-orthogonal ``g``."""
        u = imp.u
        return lambda a: u @ a @ linalg.adjoint(u)


@lru_cache(maxsize=8)
def fock_fusion(fock: FockSpace) -> FockFusion:
    alg = algebra_from_generators(fock.dim, fock.side_generators("-"))
    sf = standard_form(identity_representation(alg), fock.vacuum)
    return FockFusion(fock, alg, sf, standard_bimodule(sf), l2_space(alg, fock.vacuum))


def chi(ff: FockFusion) -> np.ndarray:
    """``chi(x (x) v) = p(u x) v`` on the spanning set of ``F (x) F``."""
    fr = ff.fused
    u = ff.to_l2
    cols = [ff.l2.p(u @ x) @ e for x in fr.d_basis for e in np.eye(ff.fock.dim)]
    return np.array(cols).T @ fr.iso_pinv


def chi_via_unitors(ff: FockFusion) -> np.ndarray:
    return standard_unitors(ff.sf, ff.bimodule, ff.l2, "left")


def fuse_implementers(ff: FockFusion, u: Implementer, v: Implementer) -> np.ndarray:
    """``U (x) U'`` on ``F (x) F``; the middle isomorphism is conjugation by ``U'``."""
    fr = ff.fused
    return fuse_maps(fr, fr, u.u, v.u, ff.twist(v))


def mu_hat(ff: FockFusion, u: Implementer, v: Implementer) -> Implementer:
    if u.parity != EVEN or v.parity != EVEN:
        raise OddInput("fusion is restricted to even implementers")
    if not fusable(ff.fock, u, v, 1e-8):
        raise NotFusable("minus block of the second implementer must equal tau g_+ tau")
    c = ff.chi
    op = c @ fuse_implementers(ff, u, v) @ linalg.adjoint(c)
    m = ff.fock.model
    g = OrthogonalElement(m.block_diag(m.minus_block(u.g.g), m.plus_block(v.g.g)))
    return Implementer(op, g, EVEN, "fusion")


@dataclass(frozen=True)
class FusionFactorization:
    h_plus: np.ndarray
    r: np.ndarray
    j_residual: float
    cone_margin: float

    def implementer(self, fock: FockSpace) -> Implementer:
        m = fock.model
        flip = np.eye(m.n_modes)[::-1]
        g = m.block_diag(flip @ self.h_plus @ flip, self.h_plus)
        return Implementer(self.r, OrthogonalElement(g), EVEN, "fusion-factorization")


def reflected_diagonal(fock: FockSpace, h_plus) -> OrthogonalElement:
    m = fock.model
    flip = np.eye(m.n_modes)[::-1]
    h_plus = np.asarray(h_plus, dtype=complex)
    return OrthogonalElement(m.block_diag(flip @ h_plus @ flip, h_plus))


def fusion_factorization(fock: FockSpace, h_plus, tol: float = 1e-9) -> FusionFactorization:
    """The implementer of ``tau h tau (+) h`` commuting with ``J`` and fixing the cone."""
    ff = fock_fusion(fock)
    r0 = implement(fock, reflected_diagonal(fock, h_plus)).u
    j = modular_j(fock)
    jrj = j.sandwich(r0)
    z = linalg.hs_inner(r0, jrj) / fock.dim
    if abs(abs(z) - 1) > 1e-6 or linalg.fro(jrj - z * r0) > 1e-6:
        raise NoJCommutingPhase(f"J r J is not a multiple of r (residual {linalg.fro(jrj - z * r0):.2e})")
    # J (c r0) J = conj(c) z r0, so c^2 = z
    c = np.sqrt(z / abs(z))
    margins = []
    for cand in (c, -c):
        v = cand * r0 @ fock.vacuum
        margins.append(ff.sf.cone_min_eig(v) / max(1.0, linalg.fro(v)))
    ok = [m >= -tol for m in margins]
    if ok[0] == ok[1]:
        raise ConeAmbiguity(f"cone test margins {margins[0]:.2e}, {margins[1]:.2e}")
    sign = 1.0 if ok[0] else -1.0
    r = sign * c * r0
    resid = linalg.fro(j.sandwich(r) - r)
    return FusionFactorization(np.asarray(h_plus), r, resid, max(margins))


def group_product(fock: FockSpace, u: Implementer, v: Implementer, orientation: str = ORIENTATION) -> np.ndarray:
    """``U r^{-1} U'`` (or ``U r U'``) with ``r`` the factorisation of the middle block."""
    m = fock.model
    r = fusion_factorization(fock, m.plus_block(u.g.g)).r
    mid = linalg.adjoint(r) if orientation == "inverse" else r
    return u.u @ mid @ v.u


@dataclass(frozen=True)
class TheoremReport:
    delta: float
    orientation: str
    j_commutation: float
    block_form: float
    fixed_point: float
    passed: bool

    def residuals(self) -> dict:
        return {
            "delta": self.delta,
            "k_commutes_with_j": self.j_commutation,
            "g_minus_plus_identity_block": self.block_form,
            "mu_hat_k_inverse_fixed": self.fixed_point,
        }


def theorem_fusion_products_agree(fock: FockSpace, u: Implementer, v: Implementer, orientation: str = ORIENTATION, tol: float = 1e-7) -> TheoremReport:
    ff = fock_fusion(fock)
    m = fock.model
    fac = fusion_factorization(fock, m.plus_block(u.g.g))
    delta = linalg.fro(mu_hat(ff, u, v).u - group_product(fock, u, v, orientation))
    k = linalg.adjoint(fac.r)
    j = modular_j(fock)
    j_comm = linalg.fro(j.sandwich(k) - k)
    g_uk = recover_g(fock, u.u @ k).g
    n = m.n_modes
    block = linalg.fro(g_uk[n:, n:] - np.eye(n)) + linalg.fro(g_uk[:n, n:]) + linalg.fro(g_uk[n:, :n])
    r_imp = fac.implementer(fock)
    fixed = linalg.fro(mu_hat(ff, r_imp, r_imp).u - fac.r)
    return TheoremReport(delta, orientation, j_comm, block, fixed, delta <= tol)


def associativity_residual(ff: FockFusion) -> float:
    """``||chi (1 (x) chi) alpha - chi (chi (x) 1)||`` on ``(F (x) F) (x) F``."""
    from .connes_fusion import associator

    f, l2 = ff.bimodule, ff.l2
    c = ff.chi
    ff_bim = ff.fused.as_bimodule
    a = associator(f, f, f, l2)
    left = fuse_maps(fuse(ff_bim, f, l2), ff.fused, c, np.eye(f.dim))
    right = fuse_maps(fuse(f, ff_bim, l2), ff.fused, np.eye(f.dim), c)
    return linalg.fro(c @ right @ a.matrix - c @ left)


__all__ = [
    "ORIENTATION",
    "FockFusion",
    "FusionFactorization",
    "TheoremReport",
    "associativity_residual",
    "chi",
    "chi_via_unitors",
    "fock_fusion",
    "fuse_implementers",
    "fusion_factorization",
    "group_product",
    "implementation_residual",
    "mu_hat",
    "reflected_diagonal",
    "theorem_fusion_products_agree",
]
