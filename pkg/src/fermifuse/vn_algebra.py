"""Finite-dimensional von Neumann algebras, modular theory and standard forms.

An algebra is stored concretely, as a span of operators on ``C^ambient_dim``
with a Hilbert-Schmidt orthonormal basis.  A :class:`Representation` assigns an
operator to every basis element; modular data are computed for a
representation together with a cyclic and separating vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import linalg
from .errors import (
    NotCyclic,
    NotFactor,
    NotFaithful,
    NotIsomorphism,
    NotSeparating,
    VacuumDegenerate,
)
from .linalg import AntiUnitaryOp

CYCLIC_MARGIN = 1e-8
SPAN_TOL = 1e-10


def _orthonormal_extend(basis: np.ndarray, candidates: np.ndarray, tol: float = SPAN_TOL) -> np.ndarray:
    """Extend rows of ``basis`` (orthonormal) by the new directions in ``candidates``."""
    if basis.shape[0]:
        candidates = candidates - (candidates @ linalg.adjoint(basis)) @ basis
        candidates = candidates - (candidates @ linalg.adjoint(basis)) @ basis
    if not candidates.shape[0]:
        return basis
    scale = max(1.0, float(np.max(np.linalg.norm(candidates, axis=1))))
    u, s, v = linalg.svd(candidates.T)
    keep = s > tol * scale
    if not np.any(keep):
        return basis
    return np.vstack([basis, u[:, : int(np.sum(keep))].T])


@dataclass(frozen=True, eq=False)
class VNAlgebra:
    ambient_dim: int
    generators: tuple = field(repr=False)
    span_basis: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.span_basis.shape[0]

    def coefficients(self, a) -> np.ndarray:
        return np.tensordot(np.conj(self.span_basis), np.asarray(a, dtype=complex), axes=([1, 2], [0, 1]))

    def element(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs), self.span_basis, axes=1)

    def distance(self, a) -> float:
        """HS distance from ``a`` to the span of the algebra."""
        return linalg.fro(np.asarray(a) - self.element(self.coefficients(a)))

    def contains(self, a, tol: float = 1e-9) -> bool:
        return self.distance(a) <= tol * max(1.0, linalg.fro(a))

    @cached_property
    def projector(self) -> np.ndarray:
        flat = self.span_basis.reshape(self.dim, -1)
        return flat.T @ np.conj(flat)

    def random_element(self, rng) -> np.ndarray:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return self.element(c)


def algebra_from_generators(dim: int, gens) -> VNAlgebra:
    gens = [np.asarray(g, dtype=complex) for g in gens]
    for g in gens:
        if g.shape != (dim, dim):
            raise linalg.LinalgError(f"generator of shape {g.shape} on a {dim}-dimensional space")
    closed = gens + [linalg.adjoint(g) for g in gens]
    flat = lambda ops: np.array([o.ravel() for o in ops]).reshape(len(ops), dim * dim)
    basis = _orthonormal_extend(np.zeros((0, dim * dim), dtype=complex), flat([np.eye(dim)]))
    basis = _orthonormal_extend(basis, flat(closed)) if closed else basis
    while True:
        mats = basis.reshape(-1, dim, dim)
        words = [g @ m for g in closed for m in mats]
        grown = _orthonormal_extend(basis, flat(words)) if words else basis
        if grown.shape[0] == basis.shape[0]:
            break
        basis = grown
    return VNAlgebra(dim, tuple(gens), basis.reshape(-1, dim, dim))


def _generating_set(alg: VNAlgebra) -> list[np.ndarray]:
    return list(alg.generators) if alg.generators else [np.eye(alg.ambient_dim)]


def commutant(alg: VNAlgebra) -> VNAlgebra:
    gens = _generating_set(alg)
    gens = gens + [linalg.adjoint(g) for g in gens if linalg.fro(g - linalg.adjoint(g)) > 1e-12]
    sols = linalg.intertwiner_space(gens, gens)
    basis = np.array(sols)
    return VNAlgebra(alg.ambient_dim, tuple(sols), basis)


def double_commutant(alg: VNAlgebra) -> VNAlgebra:
    return commutant(commutant(alg))


def center(alg: VNAlgebra) -> VNAlgebra:
    gens = _generating_set(alg)
    cols = np.array([[(g @ b - b @ g).ravel() for b in alg.span_basis] for g in gens])
    system = np.concatenate(list(cols), axis=1).T if len(gens) > 1 else cols[0].T
    # absolute scale: commutators of unit-norm elements are O(1) when nonzero
    null = linalg.nullspace(system, 1e-9) if linalg.fro(system) > 1e-9 else np.eye(alg.dim)
    elems = [alg.element(null[:, k]) for k in range(null.shape[1])]
    flat = np.array([e.ravel() for e in elems])
    basis = _orthonormal_extend(np.zeros((0, alg.ambient_dim**2), dtype=complex), flat)
    basis = basis.reshape(-1, alg.ambient_dim, alg.ambient_dim)
    return VNAlgebra(alg.ambient_dim, tuple(basis), basis)


def is_factor(alg: VNAlgebra) -> bool:
    return center(alg).dim == 1


def subspace_distance(a: VNAlgebra, b: VNAlgebra) -> float:
    """Operator-norm distance between the HS-orthogonal projectors onto the two spans."""
    if a.ambient_dim != b.ambient_dim:
        return float("inf")
    return float(np.linalg.norm(a.projector - b.projector, 2))


@dataclass(frozen=True, eq=False)
class Representation:
    """Images ``images[i]`` of the basis elements ``algebra.span_basis[i]``."""

    algebra: VNAlgebra
    images: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.images.shape[1]

    def __call__(self, a) -> np.ndarray:
        return np.tensordot(self.algebra.coefficients(a), self.images, axes=1)

    @cached_property
    def generator_images(self) -> list[np.ndarray]:
        return [self(g) for g in _generating_set(self.algebra)]

    def image_algebra(self) -> VNAlgebra:
        return algebra_from_generators(self.dim, self.generator_images)


def identity_representation(alg: VNAlgebra) -> Representation:
    return Representation(alg, alg.span_basis)


@dataclass(frozen=True, eq=False)
class GNSSpace:
    """``L^2(A, phi)`` in orthonormal coordinates ``G^{1/2} c`` of ``a = sum c_i b_i``."""

    algebra: VNAlgebra
    gram_sqrt: np.ndarray = field(repr=False)
    gram_isqrt: np.ndarray = field(repr=False)
    left: Representation = field(repr=False)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def vector(self, a) -> np.ndarray:
        return self.gram_sqrt @ self.algebra.coefficients(a)

    def element(self, v) -> np.ndarray:
        return self.algebra.element(self.gram_isqrt @ np.asarray(v))

    @cached_property
    def omega(self) -> np.ndarray:
        return self.vector(np.eye(self.algebra.ambient_dim))


def state_functional(state, dim: int) -> Callable:
    if callable(state):
        return state
    s = np.asarray(state, dtype=complex)
    if s.ndim == 1:
        return lambda a: complex(np.vdot(s, a @ s))
    if s.shape == (dim, dim):
        return lambda a: complex(np.trace(s @ a))
    raise linalg.LinalgError("state must be a vector, a density matrix or a callable")


def gns(alg: VNAlgebra, state, tol: float = 1e-9) -> GNSSpace:
    phi = state_functional(state, alg.ambient_dim)
    b = alg.span_basis
    gram = np.array([[phi(linalg.adjoint(bj) @ bi) for bi in b] for bj in b])
    gram = 0.5 * (gram + linalg.adjoint(gram))
    w, v = linalg.hermitian_eig(gram, 1e-8)
    if w[0] <= tol * max(1.0, w[-1]):
        raise NotFaithful(f"Gram matrix eigenvalue {w[0]:.3e}")
    gsqrt = (v * np.sqrt(w)) @ linalg.adjoint(v)
    gisqrt = (v / np.sqrt(w)) @ linalg.adjoint(v)
    # left multiplication x b_i = sum_j M_ji b_j
    images = []
    for x in b:
        mult = np.array([alg.coefficients(x @ bi) for bi in b]).T
        images.append(gsqrt @ mult @ gisqrt)
    return GNSSpace(alg, gsqrt, gisqrt, Representation(alg, np.array(images)))


@dataclass(frozen=True)
class TomitaData:
    s_linear: np.ndarray
    j: AntiUnitaryOp
    delta: np.ndarray
    cyclic_margin: float
    separating_margin: float

    def apply_s(self, v) -> np.ndarray:
        return self.s_linear @ np.conj(v)


def orbit_matrix(rep: Representation, omega) -> np.ndarray:
    """Columns ``b_i Omega`` for the basis of the algebra."""
    return np.array([img @ omega for img in rep.images]).T


def cyclic_separating_margins(rep: Representation, omega) -> tuple[float, float]:
    """Relative smallest singular values of ``a -> a Omega`` onto the space and from the algebra."""
    x = orbit_matrix(rep, omega)
    s = np.linalg.svd(x, compute_uv=False)
    smax = s[0] if s.size else 0.0
    full = np.zeros(max(x.shape))
    full[: s.size] = s
    cyc = full[x.shape[0] - 1] / smax if smax else 0.0
    sep = full[x.shape[1] - 1] / smax if smax else 0.0
    return float(cyc), float(sep)


def tomita(rep: Representation, omega) -> TomitaData:
    omega = np.asarray(omega, dtype=complex)
    cyc, sep = cyclic_separating_margins(rep, omega)
    if cyc < CYCLIC_MARGIN:
        raise NotCyclic(f"cyclicity margin {cyc:.2e}")
    if sep < CYCLIC_MARGIN:
        raise NotSeparating(f"separating margin {sep:.2e}")
    x = orbit_matrix(rep, omega)
    # images of adjoint basis elements: coefficients of b_i* in the basis
    alg = rep.algebra
    y = np.array([rep(linalg.adjoint(b)) @ omega for b in alg.span_basis]).T
    # S (X c) = Y conj(c)  =>  S v = Y conj(X^{-1} v) = (Y conj(X^{-1})) conj(v)
    s_lin = y @ np.conj(np.linalg.inv(x))
    u_j, pos = linalg.polar(s_lin)
    half = np.conj(pos)
    return TomitaData(s_lin, AntiUnitaryOp(u_j), half @ half, cyc, sep)


@dataclass(frozen=True, eq=False)
class HSModel:
    """Unitary ``w`` from a standard-form space onto ``HS(C^m)`` (row-major vectors)."""

    w: np.ndarray = field(repr=False)
    size: int
    units: np.ndarray = field(repr=False)  # units[i] = e_{i1}
    density: np.ndarray = field(repr=False)

    def matrix(self, a) -> np.ndarray:
        """The ``m x m`` matrix of a represented algebra element."""
        e = self.units
        norm = np.trace(linalg.adjoint(e[0]) @ e[0])
        return np.array([[np.trace(linalg.adjoint(e[i]) @ a @ e[j]) for j in range(self.size)] for i in range(self.size)]) / norm

    def to_hs(self, v) -> np.ndarray:
        return (self.w @ v).reshape(self.size, self.size)

    def from_hs(self, x) -> np.ndarray:
        return linalg.adjoint(self.w) @ np.asarray(x).ravel()


def matrix_units(rep: Representation, seed: int = 0) -> np.ndarray:
    """``e_{i1}`` for a system of matrix units of the represented factor."""
    alg = rep.algebra
    rng = np.random.default_rng(seed)
    m = int(round(np.sqrt(alg.dim)))
    if m * m != alg.dim:
        raise NotFactor(f"algebra of dimension {alg.dim} is not a full matrix algebra")
    for _ in range(8):
        c = rng.normal(size=alg.dim) + 1j * rng.normal(size=alg.dim)
        h = np.tensordot(c, rep.images, axes=1)
        h = h + linalg.adjoint(h)
        w, v = linalg.hermitian_eig(h)
        gaps = np.flatnonzero(np.diff(w) > 1e-6 * max(1.0, np.ptp(w)))
        groups = np.split(np.arange(len(w)), gaps + 1)
        if len(groups) == m:
            break
    else:
        raise NotFactor("could not isolate minimal projections")
    projs = [v[:, g] @ linalg.adjoint(v[:, g]) for g in groups]
    b = np.tensordot(rng.normal(size=alg.dim) + 1j * rng.normal(size=alg.dim), rep.images, axes=1)
    units = []
    for p in projs:
        x = p @ b @ projs[0]
        lam = np.trace(linalg.adjoint(x) @ x) / np.trace(projs[0])
        if abs(lam) < 1e-10:
            raise NotFactor("minimal projections are not equivalent")
        units.append(x / np.sqrt(lam.real))
    return np.array(units)


def hs_model(rep: Representation, omega, seed: int = 0) -> HSModel:
    omega = np.asarray(omega, dtype=complex)
    if rep.algebra.dim > 1 and not is_factor(rep.image_algebra()):
        raise NotFactor("HS model needs a factor")
    units = matrix_units(rep, seed)
    m = len(units)
    partial = HSModel(np.eye(1), m, units, np.eye(m))
    eij = lambda i, j: units[i] @ linalg.adjoint(units[j])
    # phi(e_ij) = tr(rho E_ij) = rho_ji
    rho = np.array([[np.vdot(omega, eij(j, i) @ omega) for j in range(m)] for i in range(m)])
    rho = 0.5 * (rho + linalg.adjoint(rho))
    root = linalg.psd_sqrt(rho)
    x = orbit_matrix(rep, omega)
    hs = np.array([(partial.matrix(img) @ root).ravel() for img in rep.images]).T
    w = hs @ np.linalg.inv(x)
    u, _ = linalg.polar(w)
    if linalg.fro(u - w) > 1e-8 * max(1.0, linalg.fro(w)):
        raise VacuumDegenerate(f"HS map fails to be unitary by {linalg.fro(u - w):.2e}")
    return HSModel(u, m, units, rho)


def hs_j(model: HSModel) -> AntiUnitaryOp:
    """Transport of ``X -> X*`` on ``HS(C^m)`` back to the space."""
    m = model.size
    perm = np.arange(m * m).reshape(m, m).T.ravel()
    swap = np.eye(m * m)[perm]
    w = model.w
    return AntiUnitaryOp(linalg.adjoint(w) @ swap @ np.conj(w))


@dataclass(frozen=True, eq=False)
class StandardFormData:
    algebra: VNAlgebra
    rep: Representation = field(repr=False)
    omega: np.ndarray = field(repr=False)
    j: AntiUnitaryOp = field(repr=False)
    delta: np.ndarray = field(repr=False)
    cone_samples: np.ndarray = field(repr=False)
    hs_iso: HSModel = field(repr=False)

    @property
    def space_dim(self) -> int:
        return self.rep.dim

    def left(self, a) -> np.ndarray:
        return self.rep(a)

    def right(self, a) -> np.ndarray:
        """Right action ``v <| a = J a* J v``."""
        return self.j.sandwich(linalg.adjoint(self.rep(a)))

    def cone_min_eig(self, v) -> float:
        x = self.hs_iso.to_hs(v)
        return float(linalg.hermitian_eig(0.5 * (x + linalg.adjoint(x)), 1e30)[0][0])


def natural_cone(rep: Representation, omega, j: AntiUnitaryOp, sample_count: int = 8, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ops = [np.eye(rep.dim, dtype=complex)] + list(rep.images)
    for _ in range(sample_count):
        c = rng.normal(size=rep.algebra.dim) + 1j * rng.normal(size=rep.algebra.dim)
        ops.append(np.tensordot(c, rep.images, axes=1))
    # a J a J Omega = a J a Omega since J Omega = Omega
    return np.array([a @ j(a @ omega) for a in ops])


def standard_form(rep: Representation, omega, sample_count: int = 8, seed: int = 0) -> StandardFormData:
    omega = np.asarray(omega, dtype=complex)
    td = tomita(rep, omega)
    model = hs_model(rep, omega, seed)
    cone = natural_cone(rep, omega, td.j, sample_count, seed)
    return StandardFormData(rep.algebra, rep, omega, td.j, td.delta, cone, model)


def gns_standard_form(alg: VNAlgebra, state, sample_count: int = 8, seed: int = 0):
    space = gns(alg, state)
    return space, standard_form(space.left, space.omega, sample_count, seed)


def standard_form_residuals(sf: StandardFormData, trials: int = 4, seed: int = 0) -> dict:
    """Residuals of the four standard-form axioms (cone ones as negated min eigenvalues)."""
    rng = np.random.default_rng(seed)
    j = sf.j
    imgs = sf.rep.images
    comm = max(linalg.fro(j.sandwich(a) @ b - b @ j.sandwich(a)) for a in imgs for b in imgs)
    comm = max(comm, linalg.fro(j.square() - np.eye(sf.space_dim)))
    cen = center(sf.rep.image_algebra())
    central = max(linalg.fro(j.sandwich(z) - linalg.adjoint(z)) for z in cen.span_basis)
    fixed = max(linalg.fro(j(v) - v) for v in sf.cone_samples)
    worst = 0.0
    for _ in range(trials):
        c = rng.normal(size=sf.algebra.dim) + 1j * rng.normal(size=sf.algebra.dim)
        a = np.tensordot(c, imgs, axes=1)
        for v in sf.cone_samples:
            img = a @ j(a @ j(v))
            worst = max(worst, -sf.cone_min_eig(img) / max(1.0, linalg.fro(img)))
    samples_psd = max(-sf.cone_min_eig(v) / max(1.0, linalg.fro(v)) for v in sf.cone_samples)
    return {
        "j_commutant": comm,
        "j_center": central,
        "j_fixes_cone": fixed,
        "cone_invariant": max(worst, samples_psd, 0.0),
    }


def connecting_unitary(sf1: StandardFormData, sf2: StandardFormData, pi: Callable | None = None, tol: float = 1e-8) -> np.ndarray:
    """The unique unitary ``u`` with ``u a u* = pi(a)``, ``u J1 = J2 u`` and ``u P1 = P2``.

    ``pi`` takes a represented operator of ``sf1`` to one of ``sf2``; the
    default sends ``sf1.rep(b)`` to ``sf2.rep(b)`` for a shared algebra.
    """
    if pi is None:
        if sf1.algebra is not sf2.algebra:
            raise NotIsomorphism("algebras differ and no isomorphism was given")
        pi_images = sf2.rep.images
    else:
        pi_images = np.array([pi(img) for img in sf1.rep.images])
    _check_isomorphism(sf1.rep, pi_images, tol)
    m1, m2 = sf1.hs_iso, sf2.hs_iso
    if m1.size != m2.size:
        raise NotIsomorphism("factors of different size")
    # transport the first matrix-unit system through pi into the second HS model
    pi_op = _linear_extension(sf1.rep, pi_images)
    units2 = [m2.matrix(pi_op(e)) for e in m1.units]
    # choose a unit vector in the range of the image of e_11
    p11 = units2[0] @ linalg.adjoint(units2[0])
    xi = linalg.hermitian_eig(0.5 * (p11 + linalg.adjoint(p11)))[1][:, -1]
    big_v = np.array([e @ xi for e in units2]).T
    big_v, _ = linalg.polar(big_v)
    u = linalg.adjoint(m2.w) @ np.kron(big_v, np.conj(big_v)) @ m1.w
    return u


def _linear_extension(rep: Representation, images: np.ndarray) -> Callable:
    """Operator-level map ``rep(b_i) -> images[i]`` extended linearly."""
    flat = rep.images.reshape(rep.algebra.dim, -1)
    pinv = np.linalg.pinv(flat.T)

    def apply(op):
        c = pinv @ np.asarray(op).ravel()
        return np.tensordot(c, images, axes=1)

    return apply


def _check_isomorphism(rep: Representation, images: np.ndarray, tol: float) -> None:
    src = rep.images
    apply = _linear_extension(rep, images)
    scale = max(1.0, max(linalg.fro(x) for x in images))
    for i, a in enumerate(src):
        if linalg.fro(apply(linalg.adjoint(a)) - linalg.adjoint(images[i])) > tol * scale:
            raise NotIsomorphism("map does not preserve adjoints")
        for k, b in enumerate(src):
            if linalg.fro(apply(a @ b) - images[i] @ images[k]) > tol * scale * scale:
                raise NotIsomorphism("map is not multiplicative")
