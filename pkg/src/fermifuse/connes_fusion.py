"""Connes fusion of bimodules over a finite-dimensional factor.

Given a faithful state ``phi`` on the middle algebra ``A``, the fusion
``H (x)_phi K`` is modelled as the quotient of ``D(H, phi) (x) K`` by the
kernel of the ``A``-valued inner product, where ``D(H, phi)`` is the space of
right ``A``-linear maps ``L^2_phi(A) -> H``.  Every fused space is realised
as ``C^r`` through an explicit map ``E`` from spanning coefficients onto an
orthonormal model; a second presentation ``H (x) D'(K, phi)`` is kept
together with the unitary identifying the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np

from . import linalg
from .errors import AlgebraMismatch, NotFaithful, NotIntertwiner, NotIsomorphism, NotStandardForm
from .vn_algebra import (
    GNSSpace,
    Representation,
    StandardFormData,
    VNAlgebra,
    connecting_unitary,
    gns,
    standard_form,
)

GRAM_FLOOR = 1e-9
INTERTWINER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class L2Space:
    """``L^2_phi(A)`` as a standard form, with the maps ``p_phi`` and ``p'_phi``."""

    space: GNSSpace = field(repr=False)
    sf: StandardFormData = field(repr=False)

    @property
    def algebra(self) -> VNAlgebra:
        return self.space.algebra

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def omega(self) -> np.ndarray:
        return self.space.omega

    def left(self, a) -> np.ndarray:
        return self.space.left(a)

    def right(self, a) -> np.ndarray:
        return self.sf.right(a)

    def p(self, x, tol: float = INTERTWINER_TOL) -> np.ndarray:
        """The algebra element acting on the left as the right-linear map ``x``."""
        x = np.asarray(x)
        a = self.space.element(x @ self.omega)
        if linalg.fro(self.left(a) - x) > tol * max(1.0, linalg.fro(x)):
            raise NotIntertwiner("map does not commute with the right action")
        return a

    def p_prime(self, y, tol: float = INTERTWINER_TOL) -> np.ndarray:
        """The algebra element acting on the right as the left-linear map ``y``."""
        y = np.asarray(y)
        a = linalg.adjoint(self.space.element(self.sf.j(y @ self.omega)))
        if linalg.fro(self.right(a) - y) > tol * max(1.0, linalg.fro(y)):
            raise NotIntertwiner("map does not commute with the left action")
        return a


def l2_space(alg: VNAlgebra, state, seed: int = 0) -> L2Space:
    space = gns(alg, state)
    return L2Space(space, standard_form(space.left, space.omega, seed=seed))


@dataclass(frozen=True, eq=False)
class Bimodule:
    """Commuting left and right actions on ``C^dim``; ``right`` is antimultiplicative."""

    dim: int
    left: Representation = field(repr=False)
    right: Representation = field(repr=False)

    def commutation_residual(self) -> float:
        worst = 0.0
        for a in self.left.generator_images:
            for b in self.right.generator_images:
                worst = max(worst, linalg.fro(a @ b - b @ a))
        return worst


def _paired_gens(rep_a: Representation, rep_b: Representation) -> tuple[list, list]:
    """Images of the same algebra generators (and their adjoints) under two actions."""
    gens = list(rep_a.algebra.generators) or [np.eye(rep_a.algebra.ambient_dim)]
    outa, outb = [], []
    for g in gens:
        for h in (g, linalg.adjoint(g)) if linalg.fro(g - linalg.adjoint(g)) > 1e-12 else (g,):
            outa.append(rep_a(h))
            outb.append(rep_b(h))
    return outa, outb


def standard_bimodule(sf: StandardFormData) -> Bimodule:
    """A standard form as an ``A``-``A`` bimodule with right action ``J a* J``."""
    right = np.array([sf.j.sandwich(linalg.adjoint(img)) for img in sf.rep.images])
    return Bimodule(sf.space_dim, sf.rep, Representation(sf.algebra, right))


def l2_bimodule(l2: L2Space) -> Bimodule:
    return _l2_bimodule_cached(l2)


@lru_cache(maxsize=None)
def _l2_bimodule_cached(l2: L2Space) -> Bimodule:
    return standard_bimodule(l2.sf)


def _check_algebra(a: VNAlgebra, b: VNAlgebra) -> None:
    if a is b:
        return
    if a.ambient_dim != b.ambient_dim or a.dim != b.dim:
        raise AlgebraMismatch("middle algebras differ")
    flat_a = a.span_basis.reshape(a.dim, -1)
    flat_b = b.span_basis.reshape(b.dim, -1)
    if linalg.fro(flat_a.T @ np.conj(flat_a) - flat_b.T @ np.conj(flat_b)) > 1e-8:
        raise AlgebraMismatch("middle algebras differ")


def left_bounded_space(h: Bimodule, l2: L2Space) -> np.ndarray:
    """Orthonormal basis of ``D(H, phi)``, shape ``(k, dim H, dim L2)``."""
    if h.dim == 0:
        return np.zeros((0, 0, l2.dim), dtype=complex)
    _check_algebra(h.right.algebra, l2.algebra)
    rh, rl = _paired_gens(h.right, Representation(l2.algebra, l2_bimodule(l2).right.images))
    return np.array(linalg.intertwiner_space(rh, rl)).reshape(-1, h.dim, l2.dim)


def right_bounded_space(k: Bimodule, l2: L2Space) -> np.ndarray:
    """Orthonormal basis of ``D'(K, phi)``, maps commuting with the left action."""
    if k.dim == 0:
        return np.zeros((0, 0, l2.dim), dtype=complex)
    _check_algebra(k.left.algebra, l2.algebra)
    lk, ll = _paired_gens(k.left, l2.space.left)
    return np.array(linalg.intertwiner_space(lk, ll)).reshape(-1, k.dim, l2.dim)


def p_phi(l2: L2Space, x) -> np.ndarray:
    return l2.p(x)


def _quotient(gram: np.ndarray, floor: float = GRAM_FLOOR):
    gram = 0.5 * (gram + linalg.adjoint(gram))
    w, v = linalg.hermitian_eig(gram, 1e-7)
    top = max(w[-1], 0.0) if w.size else 0.0
    if w.size and w[0] < -floor * max(1.0, top):
        raise NotFaithful(f"fusion Gram matrix has eigenvalue {w[0]:.2e}")
    keep = w > floor * max(1.0, top)
    w, v = w[keep], v[:, keep]
    iso = np.sqrt(w)[:, None] * linalg.adjoint(v)
    pinv = v / np.sqrt(w)[None, :]
    return gram, iso, pinv


@dataclass(frozen=True, eq=False)
class FusionResult:
    h: Bimodule = field(repr=False)
    k: Bimodule = field(repr=False)
    l2: L2Space = field(repr=False)
    d_basis: np.ndarray = field(repr=False)
    dprime_basis: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)
    iso: np.ndarray = field(repr=False)
    iso_pinv: np.ndarray = field(repr=False)
    alt_gram: np.ndarray = field(repr=False)
    alt_iso: np.ndarray = field(repr=False)
    alt_pinv: np.ndarray = field(repr=False)
    identification: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.iso.shape[0]

    @property
    def spanning_set(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(len(self.d_basis)) for b in range(self.k.dim)]

    def d_coefficients(self, x) -> np.ndarray:
        return np.tensordot(np.conj(self.d_basis), np.asarray(x), axes=([1, 2], [0, 1]))

    def vector(self, x, v) -> np.ndarray:
        """Model vector of ``x (x) v`` for ``x`` in ``D(H)`` and ``v`` in ``K``."""
        return self.iso @ np.kron(self.d_coefficients(x), np.asarray(v))

    def alt_vector(self, w, y) -> np.ndarray:
        """Model vector (main presentation) of ``w (x) y`` for ``w`` in ``H``, ``y`` in ``D'(K)``."""
        c = np.tensordot(np.conj(self.dprime_basis), np.asarray(y), axes=([1, 2], [0, 1]))
        return linalg.adjoint(self.identification) @ (self.alt_iso @ np.kron(np.asarray(w), c))

    def _d_action(self, op_h: np.ndarray) -> np.ndarray:
        return np.array([[linalg.hs_inner(xg, op_h @ xa) for xa in self.d_basis] for xg in self.d_basis])

    def left(self, a) -> np.ndarray:
        coeff = np.kron(self._d_action(self.h.left(a)), np.eye(self.k.dim))
        return self.iso @ coeff @ self.iso_pinv

    def right(self, b) -> np.ndarray:
        coeff = np.kron(np.eye(len(self.d_basis)), self.k.right(b))
        return self.iso @ coeff @ self.iso_pinv

    def alt_left(self, a) -> np.ndarray:
        coeff = np.kron(self.h.left(a), np.eye(len(self.dprime_basis)))
        return self.alt_iso @ coeff @ self.alt_pinv

    @cached_property
    def as_bimodule(self) -> Bimodule:
        left = Representation(self.h.left.algebra, np.array([self.left(b) for b in self.h.left.algebra.span_basis]))
        right = Representation(self.k.right.algebra, np.array([self.right(b) for b in self.k.right.algebra.span_basis]))
        return Bimodule(self.dim, left, right)

    def identification_residual(self) -> float:
        u = self.identification
        return linalg.fro(linalg.adjoint(u) @ u - np.eye(self.dim))


def _inner_gram(bases: np.ndarray, l2: L2Space, act: Callable, prime: bool) -> np.ndarray:
    """Blocks ``act(p(x_g* x_a))`` indexed ``[g, a]``."""
    n = len(bases)
    blocks = np.empty((n, n), dtype=object)
    for g in range(n):
        for a in range(n):
            prod = linalg.adjoint(bases[g]) @ bases[a]
            elem = l2.p_prime(prod) if prime else l2.p(prod)
            blocks[g, a] = act(elem)
    return blocks


def fuse(h: Bimodule, k: Bimodule, l2: L2Space) -> FusionResult:
    return _fuse_cached(h, k, l2)


@lru_cache(maxsize=256)
def _fuse_cached(h: Bimodule, k: Bimodule, l2: L2Space) -> FusionResult:
    _check_algebra(h.right.algebra, l2.algebra)
    _check_algebra(k.left.algebra, l2.algebra)
    d = left_bounded_space(h, l2)
    dp = right_bounded_space(k, l2)
    nd, nk, nh, ndp = len(d), k.dim, h.dim, len(dp)
    # <x_a (x) v_b, x_g (x) v_d> = <p(x_g* x_a) v_b, v_d>
    blocks = _inner_gram(d, l2, k.left, prime=False)
    gram = np.zeros((nd * nk, nd * nk), dtype=complex)
    for g in range(nd):
        for a in range(nd):
            gram[g * nk : (g + 1) * nk, a * nk : (a + 1) * nk] = blocks[g, a]
    gram, iso, pinv = _quotient(gram)
    # <w_b (x) y_a, w_d (x) y_g> = <w_b <| p'(y_g* y_a), w_d>
    blocks = _inner_gram(dp, l2, h.right, prime=True)
    alt = np.zeros((nh * ndp, nh * ndp), dtype=complex)
    for g in range(ndp):
        for a in range(ndp):
            alt[g::ndp, a::ndp] = blocks[g, a]
    alt, alt_iso, alt_pinv = _quotient(alt)
    # x (x) y(Omega) and x(Omega) (x) y are the same vector
    omega = l2.omega
    phi1 = np.array([iso @ np.kron(np.eye(nd)[a], y @ omega) for a in range(nd) for y in dp]).T
    phi2 = np.array([alt_iso @ np.kron(x @ omega, np.eye(ndp)[c]) for x in d for c in range(ndp)]).T
    ident = phi2 @ np.linalg.pinv(phi1, rcond=1e-10)
    return FusionResult(h, k, l2, d, dp, gram, iso, pinv, alt, alt_iso, alt_pinv, ident)


def _solve_map(source_vectors: np.ndarray, target_vectors: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares ``A`` with ``A @ source = target`` and its residual."""
    a = target_vectors @ np.linalg.pinv(source_vectors, rcond=1e-10)
    return a, linalg.fro(a @ source_vectors - target_vectors)


def left_unitor(k: Bimodule, l2: L2Space) -> np.ndarray:
    """``L^2 (x) K -> K``, ``x (x) v -> p(x) v``."""
    fr = fuse(l2_bimodule(l2), k, l2)
    cols = [k.left(l2.p(x)) @ e for x in fr.d_basis for e in np.eye(k.dim)]
    return np.array(cols).T @ fr.iso_pinv


def right_unitor(h: Bimodule, l2: L2Space) -> np.ndarray:
    """``H (x) L^2 -> H``, ``w (x) y -> w <| p'(y)`` on the second presentation."""
    fr = fuse(h, l2_bimodule(l2), l2)
    cols = [h.right(l2.p_prime(y)) @ e for e in np.eye(h.dim) for y in fr.dprime_basis]
    return np.array(cols).T @ fr.alt_pinv @ fr.identification


@dataclass(frozen=True, eq=False)
class Associator:
    source: FusionResult = field(repr=False)
    target: FusionResult = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    residual: float = 0.0


def associator(h: Bimodule, k: Bimodule, l: Bimodule, l2: L2Space, l2_right: L2Space | None = None) -> Associator:
    """``(H (x) K) (x) L -> H (x) (K (x) L)``, ``(x (x) v) (x) y -> x (x) (v (x) y)``.

    ``l2`` is the state space used for the first fusion and ``l2_right`` the
    one for the second (defaults to ``l2``).
    """
    l2r = l2 if l2_right is None else l2_right
    hk = fuse(h, k, l2)
    src = fuse(hk.as_bimodule, l, l2r)
    kl = fuse(k, l, l2r)
    tgt = fuse(h, kl.as_bimodule, l2)
    s_cols, t_cols = [], []
    for x in hk.d_basis:
        for v in np.eye(k.dim):
            w = hk.vector(x, v)
            for y in src.dprime_basis:
                s_cols.append(src.alt_vector(w, y))
                t_cols.append(tgt.vector(x, kl.alt_vector(v, y)))
    mat, resid = _solve_map(np.array(s_cols).T, np.array(t_cols).T)
    return Associator(src, tgt, mat, resid)


def fuse_maps(
    src: FusionResult,
    dst: FusionResult,
    nu_h,
    nu_k,
    nu_2: Callable | None = None,
) -> np.ndarray:
    """The fusion ``nu_h (x) nu_k`` of bimodule maps, as a matrix between fused models.

    ``nu_2`` is the middle algebra isomorphism (on ambient operators); with a
    different middle state on the target, the state transport goes through
    the connecting unitary of the two standard forms.
    """
    nu_h, nu_k = np.asarray(nu_h, dtype=complex), np.asarray(nu_k, dtype=complex)
    _check_middle(src, dst, nu_h, nu_k, nu_2)
    w = _middle_transport(src.l2, dst.l2, nu_2)
    cols = []
    for x in src.d_basis:
        xc = dst.d_coefficients(nu_h @ x @ w)
        for e in np.eye(src.k.dim):
            cols.append(dst.iso @ np.kron(xc, nu_k @ e))
    return np.array(cols).T @ src.iso_pinv


def _check_middle(src: FusionResult, dst: FusionResult, nu_h, nu_k, nu_2) -> None:
    # nu_h must intertwine the right actions and nu_k the left actions, up to nu_2
    nu = nu_2 if nu_2 is not None else (lambda a: a)
    scale = 1e-7 * max(1.0, linalg.fro(nu_h), linalg.fro(nu_k))
    for g in src.l2.algebra.generators:
        bad_h = linalg.fro(nu_h @ src.h.right(g) - dst.h.right(nu(g)) @ nu_h)
        bad_k = linalg.fro(nu_k @ src.k.left(g) - dst.k.left(nu(g)) @ nu_k)
        if max(bad_h, bad_k) > scale:
            raise NotIntertwiner(f"map breaks the middle action (residuals {bad_h:.2e}, {bad_k:.2e})")


def _middle_transport(l2_src: L2Space, l2_dst: L2Space, nu_2: Callable | None) -> np.ndarray:
    """``u* nu2bar*``: a map ``L^2_{phi'}(A') -> L^2_phi(A)``."""
    if nu_2 is None and l2_src is l2_dst:
        return np.eye(l2_src.dim, dtype=complex)
    nu = nu_2 if nu_2 is not None else (lambda a: a)
    alg = l2_src.algebra
    dst_space = l2_dst.space
    # psi = phi' o nu_2 on the source algebra
    psi = lambda a: complex(np.vdot(dst_space.omega, dst_space.left(nu(a)) @ dst_space.omega))
    l2_psi = l2_space(alg, psi)
    u = connecting_unitary(l2_src.sf, l2_psi.sf)
    src_cols = np.array([l2_psi.space.vector(b) for b in alg.span_basis]).T
    dst_cols = np.array([dst_space.vector(nu(b)) for b in alg.span_basis]).T
    nubar = dst_cols @ np.linalg.pinv(src_cols)
    return linalg.adjoint(u) @ linalg.adjoint(nubar)


def standard_unitors(i_sf: StandardFormData, k: Bimodule, l2: L2Space, side: str = "left") -> np.ndarray:
    """``lambda^I_K = lambda_K o (u (x) 1)`` or ``rho^I_K = rho_K o (1 (x) u)``."""
    try:
        u = connecting_unitary(i_sf, l2.sf)
    except NotIsomorphism as exc:
        raise NotStandardForm(str(exc)) from exc
    i_bim = standard_bimodule(i_sf)
    l2b = l2_bimodule(l2)
    if side == "left":
        src, dst = fuse(i_bim, k, l2), fuse(l2b, k, l2)
        return left_unitor(k, l2) @ fuse_maps(src, dst, u, np.eye(k.dim))
    src, dst = fuse(k, i_bim, l2), fuse(k, l2b, l2)
    return right_unitor(k, l2) @ fuse_maps(src, dst, np.eye(k.dim), u)


def pentagon_residual(h: Bimodule, k: Bimodule, l: Bimodule, m: Bimodule, l2: L2Space) -> float:
    """``||a(H,K,LM) a(HK,L,M) - (1 x a(K,L,M)) a(H,KL,M) (a(H,K,L) x 1)||``."""
    hk = fuse(h, k, l2).as_bimodule
    lm = fuse(l, m, l2).as_bimodule
    kl = fuse(k, l, l2).as_bimodule
    lhs = associator(h, k, lm, l2).matrix @ associator(hk, l, m, l2).matrix
    a_hkl = associator(h, k, l, l2)
    a_klm = associator(k, l, m, l2)
    first = fuse_maps(fuse(a_hkl.source.as_bimodule, m, l2), fuse(a_hkl.target.as_bimodule, m, l2), a_hkl.matrix, np.eye(m.dim))
    middle = associator(h, kl, m, l2).matrix
    last = fuse_maps(fuse(h, a_klm.source.as_bimodule, l2), fuse(h, a_klm.target.as_bimodule, l2), np.eye(h.dim), a_klm.matrix)
    return linalg.fro(lhs - last @ middle @ first)


def triangle_residual(h: Bimodule, k: Bimodule, l2: L2Space) -> float:
    """``||rho_H x 1 - (1 x lambda_K) a(H, L^2, K)||`` on ``(H (x) L^2) (x) K``."""
    l2b = l2_bimodule(l2)
    hl = fuse(h, l2b, l2).as_bimodule
    lk = fuse(l2b, k, l2).as_bimodule
    hk = fuse(h, k, l2)
    lhs = fuse_maps(fuse(hl, k, l2), hk, right_unitor(h, l2), np.eye(k.dim))
    rhs = fuse_maps(fuse(h, lk, l2), hk, np.eye(h.dim), left_unitor(k, l2)) @ associator(h, l2b, k, l2).matrix
    return linalg.fro(lhs - rhs)


def comparison_unitary(h: Bimodule, k: Bimodule, l2_from: L2Space, l2_to: L2Space) -> np.ndarray:
    """The canonical unitary ``H (x)_phi K -> H (x)_phi' K`` (all maps identities)."""
    src, dst = fuse(h, k, l2_from), fuse(h, k, l2_to)
    return fuse_maps(src, dst, np.eye(h.dim), np.eye(k.dim), lambda a: a)
