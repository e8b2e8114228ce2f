"""Fibrewise fusion of spinor fibres through frames.

A fibre over a pair of paths ``(i, j)`` is modelled as an ``N``-``N``
bimodule ``X_ij``: a copy of ``F`` transported by a unitary ``W_ij``.  A frame
is a unitary ``nu_ij = U_ij W_ij: X_ij -> F`` where ``U_ij`` is an even
implementer; it intertwines the actions up to the Bogoliubov automorphisms
of the blocks of ``U_ij``.  The fibre fusion is
``chi_123 = nu_13* chi (nu_12 (x) nu_23)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import linalg
from .clifford_fock import FockSpace
from .connes_fusion import Bimodule, associator, fuse, fuse_maps
from .errors import IncompatibleTriple
from .fermion_model import OrthogonalElement
from .implementer_fusion import FockFusion, fock_fusion, fusion_factorization, mu_hat
from .implementers import EVEN, Implementer, fusable, implement
from .vn_algebra import Representation

COMPAT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Fibre:
    label: tuple
    bimodule: Bimodule = field(repr=False)
    transport: np.ndarray = field(repr=False)  # W: X -> F


def make_fibre(ff: FockFusion, label, seed) -> Fibre:
    """``F`` moved by a Haar-random unitary ``W``: actions ``W* a W``."""
    d = ff.fock.dim
    w = unitary_group.rvs(d, random_state=np.random.default_rng(seed))
    wh = linalg.adjoint(w)
    f = ff.bimodule
    left = Representation(f.left.algebra, np.einsum("ij,kjl,lm->kim", wh, f.left.images, w))
    right = Representation(f.right.algebra, np.einsum("ij,kjl,lm->kim", wh, f.right.images, w))
    return Fibre(tuple(label), Bimodule(d, left, right), w)


@dataclass(frozen=True, eq=False)
class FibreFrame:
    pair_label: tuple
    lift: Implementer = field(repr=False)
    fibre: Fibre = field(repr=False)

    @property
    def nu(self) -> np.ndarray:
        return self.lift.u @ self.fibre.transport

    def blocks(self, model):
        return model.minus_block(self.lift.g.g), model.plus_block(self.lift.g.g)

    def reframed(self, v: Implementer) -> "FibreFrame":
        """The frame ``V nu`` of the same fibre."""
        return FibreFrame(self.pair_label, v @ self.lift, self.fibre)

    def rephased(self, z: complex) -> "FibreFrame":
        lift = Implementer(z * self.lift.u, self.lift.g, self.lift.parity, self.lift.phase_convention)
        return FibreFrame(self.pair_label, lift, self.fibre)


@dataclass(frozen=True, eq=False)
class FibreTriple:
    nu12: FibreFrame
    nu23: FibreFrame
    nu13: FibreFrame

    def compatibility_residual(self, ff: FockFusion) -> float:
        return linalg.fro(self.nu13.lift.u - mu_hat(ff, self.nu12.lift, self.nu23.lift).u)


def fibre_chi(ff: FockFusion, triple: FibreTriple, check: bool = True) -> np.ndarray:
    """``nu_13* chi (nu_12 (x) nu_23)`` from ``X_12 (x) X_23`` to ``X_13``."""
    a, b = triple.nu12.lift, triple.nu23.lift
    if not fusable(ff.fock, a, b, COMPAT_TOL):
        raise IncompatibleTriple("frames 12 and 23 are not fusable")
    if check and triple.compatibility_residual(ff) > COMPAT_TOL:
        raise IncompatibleTriple("frame 13 is not the fusion of frames 12 and 23")
    src = fuse(triple.nu12.fibre.bimodule, triple.nu23.fibre.bimodule, ff.l2)
    bu = b.u
    twist = lambda x: bu @ x @ linalg.adjoint(bu)
    glued = fuse_maps(src, ff.fused, triple.nu12.nu, triple.nu23.nu, twist)
    return linalg.adjoint(triple.nu13.nu) @ ff.chi @ glued


def fibre_chi_intertwining_residual(ff: FockFusion, triple: FibreTriple, chi13: np.ndarray) -> float:
    src = fuse(triple.nu12.fibre.bimodule, triple.nu23.fibre.bimodule, ff.l2)
    x13 = triple.nu13.fibre.bimodule
    worst = 0.0
    for g in ff.algebra.generators:
        worst = max(worst, linalg.fro(chi13 @ src.left(g) - x13.left(g) @ chi13))
        worst = max(worst, linalg.fro(chi13 @ src.right(g) - x13.right(g) @ chi13))
    return worst


def _rand_so(rng, n):
    from scipy.stats import special_ortho_group

    return special_ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)


def fusable_lifts(fock: FockSpace, blocks) -> list[Implementer]:
    """Implementers of ``b_0 (+) b_1``, ``R b_1 R (+) b_2``, ... for plus-side blocks ``b_k``.

    ``blocks[0]`` is the minus block of the first lift; the rest are plus blocks.
    """
    m = fock.model
    flip = np.eye(m.n_modes)[::-1]
    out = [implement(fock, m.block_diag(blocks[0], blocks[1]))]
    for k in range(1, len(blocks) - 1):
        out.append(implement(fock, m.block_diag(flip @ blocks[k] @ flip, blocks[k + 1])))
    return out


def build_triple(ff: FockFusion, blocks, seed: int = 0) -> FibreTriple:
    """Fibres ``X_12, X_23, X_13`` with frames whose lifts fuse compatibly."""
    u12, u23 = fusable_lifts(ff.fock, blocks)
    x = {lab: make_fibre(ff, lab, seed * 7 + k) for k, lab in enumerate([(1, 2), (2, 3), (1, 3)])}
    return FibreTriple(
        FibreFrame((1, 2), u12, x[(1, 2)]),
        FibreFrame((2, 3), u23, x[(2, 3)]),
        FibreFrame((1, 3), mu_hat(ff, u12, u23), x[(1, 3)]),
    )


def random_blocks(fock: FockSpace, rng, count: int = 3) -> list[np.ndarray]:
    return [_rand_so(rng, fock.n_modes) for _ in range(count)]


def reframe(ff: FockFusion, triple: FibreTriple, v12: Implementer, v23: Implementer) -> FibreTriple:
    """New frames ``V_12 nu_12``, ``V_23 nu_23`` and ``mu(V_12, V_23) nu_13``.

    The change of the 13-frame uses the group-level product
    ``V_12 r^{-1} V_23`` rather than ``mu_hat``.
    """
    m = ff.fock.model
    r = fusion_factorization(ff.fock, m.plus_block(v12.g.g)).r
    prod_u = v12.u @ linalg.adjoint(r) @ v23.u
    g = OrthogonalElement(m.block_diag(m.minus_block(v12.g.g), m.plus_block(v23.g.g)))
    v13 = Implementer(prod_u, g, EVEN, "group-product")
    return FibreTriple(triple.nu12.reframed(v12), triple.nu23.reframed(v23), triple.nu13.reframed(v13))


@dataclass(frozen=True)
class FrameReport:
    difference: float
    unitarity: float
    intertwining: float
    passed: bool


def frame_independence(ff: FockFusion, triple: FibreTriple, other: FibreTriple, tol: float = 1e-7) -> FrameReport:
    a = fibre_chi(ff, triple)
    b = fibre_chi(ff, other, check=False)
    diff = linalg.fro(a - b)
    unit = linalg.fro(linalg.adjoint(b) @ b - np.eye(b.shape[1]))
    inter = fibre_chi_intertwining_residual(ff, other, b)
    return FrameReport(diff, unit, inter, diff <= tol)


@dataclass(frozen=True, eq=False)
class FibreQuadruple:
    frames: dict  # pair label -> FibreFrame


def build_quadruple(ff: FockFusion, blocks, seed: int = 0) -> FibreQuadruple:
    """Frames for all six pairs of four paths, compatible through ``mu_hat``."""
    u12, u23, u34 = fusable_lifts(ff.fock, blocks)
    u13 = mu_hat(ff, u12, u23)
    u24 = mu_hat(ff, u23, u34)
    u14 = mu_hat(ff, u13, u34)
    lifts = {(1, 2): u12, (2, 3): u23, (3, 4): u34, (1, 3): u13, (2, 4): u24, (1, 4): u14}
    frames = {}
    for k, (lab, lift) in enumerate(sorted(lifts.items())):
        frames[lab] = FibreFrame(lab, lift, make_fibre(ff, lab, seed * 11 + k))
    return FibreQuadruple(frames)


def _triple(q: FibreQuadruple, i, j, k) -> FibreTriple:
    return FibreTriple(q.frames[(i, j)], q.frames[(j, k)], q.frames[(i, k)])


def fibre_associativity(ff: FockFusion, q: FibreQuadruple, tol: float = 1e-7) -> dict:
    """Residual of ``chi_134 (chi_123 (x) 1)`` against ``chi_124 (1 (x) chi_234) alpha``."""
    x = {lab: fr.fibre.bimodule for lab, fr in q.frames.items()}
    l2 = ff.l2
    c123 = fibre_chi(ff, _triple(q, 1, 2, 3), check=False)
    c134 = fibre_chi(ff, _triple(q, 1, 3, 4), check=False)
    c234 = fibre_chi(ff, _triple(q, 2, 3, 4), check=False)
    c124 = fibre_chi(ff, _triple(q, 1, 2, 4), check=False)
    x12_23 = fuse(x[(1, 2)], x[(2, 3)], l2).as_bimodule
    x23_34 = fuse(x[(2, 3)], x[(3, 4)], l2).as_bimodule
    alpha = associator(x[(1, 2)], x[(2, 3)], x[(3, 4)], l2)
    lhs = c134 @ fuse_maps(fuse(x12_23, x[(3, 4)], l2), fuse(x[(1, 3)], x[(3, 4)], l2), c123, np.eye(x[(3, 4)].dim))
    rhs = c124 @ fuse_maps(fuse(x[(1, 2)], x23_34, l2), fuse(x[(1, 2)], x[(2, 4)], l2), np.eye(x[(1, 2)].dim), c234) @ alpha.matrix
    resid = linalg.fro(lhs - rhs)
    return {"square": resid, "associator": alpha.residual, "passed": resid <= tol}
