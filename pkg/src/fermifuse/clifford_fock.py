"""Fock space of the truncated model and the Clifford algebra acting on it.

The Fock space is the exterior algebra of the Lagrangian ``L`` with basis
``phi_{k1} ^ ... ^ phi_{kr}`` indexed by subsets ``{k1 < ... < kr}``, sorted by
size and then lexicographically.  Creation of ``phi_k`` carries the sign
``(-1)^{#{j in S : j < k}}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .errors import NotInDual, NotInLagrangian, NotInMinusAlgebra, NotOrthogonal
from .fermion_model import FermionModel, OrthogonalElement, is_orthogonal
from .linalg import AntiUnitaryOp

SIDES = ("-", "+")


@dataclass(frozen=True, eq=False)
class FockSpace:
    model: FermionModel = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.model.n_modes

    @cached_property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        n = self.n_modes
        return tuple(s for r in range(n + 1) for s in itertools.combinations(range(n), r))

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    @cached_property
    def grading(self) -> np.ndarray:
        """Parity ``|S| mod 2`` of each basis subset."""
        return np.array([len(s) % 2 for s in self.basis])

    @cached_property
    def gamma(self) -> np.ndarray:
        """Grading operator: +1 on even, -1 on odd subsets."""
        return np.diag(1.0 - 2.0 * self.grading).astype(complex)

    @cached_property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    @cached_property
    def creators(self) -> tuple[np.ndarray, ...]:
        """Matrices of ``c(phi_k)`` for ``k = 0..N-1``."""
        ops = []
        for k in range(self.n_modes):
            c = np.zeros((self.dim, self.dim), dtype=complex)
            for s in self.basis:
                if k in s:
                    continue
                sign = (-1) ** sum(1 for j in s if j < k)
                c[self.index[tuple(sorted(s + (k,)))], self.index[s]] = sign
            ops.append(c)
        return tuple(ops)

    def basis_vector(self, subset) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(sorted(subset))]] = 1.0
        return v

    def side_indices(self, side: str) -> np.ndarray:
        n = self.n_modes
        if side == "-":
            return np.arange(n)
        if side == "+":
            return np.arange(n, 2 * n)
        raise ValueError(f"side must be '-' or '+', got {side!r}")

    @cached_property
    def sample_generators(self) -> tuple[np.ndarray, ...]:
        """``rho(e_j)`` for the sample basis vectors; Hermitian unitaries."""
        eye = np.eye(self.model.dim)
        return tuple(rho(self, eye[j]).op for j in range(self.model.dim))

    def side_generators(self, side: str) -> list[np.ndarray]:
        return [self.sample_generators[j] for j in self.side_indices(side)]

    @cached_property
    def minus_basis(self) -> np.ndarray:
        """HS-orthonormal basis of ``Cl(V_-)`` (ordered products of generators)."""
        return _word_basis(self.side_generators("-"), self.dim)

    @cached_property
    def plus_basis(self) -> np.ndarray:
        return _word_basis(self.side_generators("+"), self.dim)


def _word_basis(gens, dim) -> np.ndarray:
    """Ordered products over all subsets of ``gens``, scaled to unit HS norm."""
    out = []
    for r in range(len(gens) + 1):
        for sub in itertools.combinations(range(len(gens)), r):
            a = np.eye(dim, dtype=complex)
            for s in sub:
                a = a @ gens[s]
            out.append(a / np.sqrt(dim))
    return np.array(out)


@dataclass(frozen=True)
class ClElement:
    """An operator on Fock space in the image of ``rho``."""

    op: np.ndarray
    word: tuple | None = None

    def __matmul__(self, other: "ClElement") -> "ClElement":
        word = None
        if self.word is not None and other.word is not None:
            word = self.word + other.word
        return ClElement(self.op @ other.op, word)

    def adjoint(self) -> "ClElement":
        word = None
        if self.word is not None:
            word = tuple(np.conj(f) for f in reversed(self.word))
        return ClElement(linalg.adjoint(self.op), word)


def build_fock(model: FermionModel) -> FockSpace:
    return FockSpace(model)


def _op(a) -> np.ndarray:
    return a.op if isinstance(a, ClElement) else np.asarray(a, dtype=complex)


def create(fock: FockSpace, v, tol: float = 1e-10) -> np.ndarray:
    m = fock.model
    v = np.asarray(v, dtype=complex)
    if linalg.fro(v - m.lagrangian_projector @ v) > tol * max(1.0, linalg.fro(v)):
        raise NotInLagrangian("creation needs a vector in L")
    coeffs = linalg.adjoint(m.lagrangian_basis) @ v
    return np.tensordot(coeffs, np.array(fock.creators), axes=1)


def annihilate(fock: FockSpace, w, tol: float = 1e-10) -> np.ndarray:
    m = fock.model
    w = np.asarray(w, dtype=complex)
    if linalg.fro(m.lagrangian_projector @ w) > tol * max(1.0, linalg.fro(w)):
        raise NotInDual("annihilation needs a vector in alpha(L)")
    coeffs = linalg.adjoint(m.dual_basis) @ w
    return np.tensordot(coeffs, np.array([linalg.adjoint(c) for c in fock.creators]), axes=1)


def rho(fock: FockSpace, f) -> ClElement:
    m = fock.model
    f = np.asarray(f, dtype=complex)
    p_l = m.lagrangian_projector
    op = np.sqrt(2) * (create(fock, p_l @ f, 1e-8) + annihilate(fock, f - p_l @ f, 1e-8))
    return ClElement(op, (f,))


def klein(fock: FockSpace) -> np.ndarray:
    return np.diag(np.where(fock.grading == 0, 1.0, 1j))


def _exterior_power(fock: FockSpace, a: np.ndarray) -> np.ndarray:
    """Action of ``a`` (on ``L``, in the ``phi`` basis) on wedges: minors det a[T, S]."""
    out = np.zeros((fock.dim, fock.dim), dtype=complex)
    for j, s in enumerate(fock.basis):
        for i, t in enumerate(fock.basis):
            if len(t) != len(s):
                continue
            out[i, j] = 1.0 if not s else np.linalg.det(a[np.ix_(t, s)])
    return out


def lambda_alpha_tau(fock: FockSpace) -> AntiUnitaryOp:
    """Antilinear second quantisation of ``alpha tau`` restricted to ``L``."""
    m = fock.model
    lag = m.lagrangian_basis
    # antilinear extension: only the images of the phi_k are needed
    images = (m.alpha @ m.tau)(lag)
    coeffs = linalg.adjoint(lag) @ images
    return AntiUnitaryOp(_exterior_power(fock, coeffs))


def modular_j(fock: FockSpace) -> AntiUnitaryOp:
    lam = lambda_alpha_tau(fock)
    return AntiUnitaryOp(np.conj(np.diag(klein(fock)))[:, None] * lam.linear_part)


def minus_coefficients(fock: FockSpace, a, tol: float = 1e-8) -> np.ndarray:
    """Coordinates of ``a`` in ``fock.minus_basis``; rejects operators outside ``Cl(V_-)``."""
    a = _op(a)
    basis = fock.minus_basis
    coeffs = np.tensordot(np.conj(basis), a, axes=([1, 2], [0, 1]))
    resid = linalg.fro(a - np.tensordot(coeffs, basis, axes=1))
    if resid > tol * max(1.0, linalg.fro(a)):
        raise NotInMinusAlgebra(f"operator is {resid:.2e} away from Cl(V_-)")
    return coeffs


def right_action(fock: FockSpace, a, tol: float = 1e-8) -> np.ndarray:
    """The operator ``J a* J`` for ``a`` in ``Cl(V_-)``."""
    a = _op(a)
    minus_coefficients(fock, a, tol)
    j = modular_j(fock)
    return j.sandwich(linalg.adjoint(a))


def bogoliubov(fock: FockSpace, g, a) -> ClElement:
    g = g.g if isinstance(g, OrthogonalElement) else np.asarray(g, dtype=complex)
    if not is_orthogonal(fock.model, g, 1e-8):
        raise NotOrthogonal("Bogoliubov automorphisms need g in O(V)")
    if isinstance(a, ClElement) and a.word is not None:
        out = ClElement(np.eye(fock.dim, dtype=complex), ())
        for f in a.word:
            out = out @ rho(fock, g @ f)
        return out
    from .implementers import implement

    u = implement(fock, OrthogonalElement(g)).u
    return ClElement(u @ _op(a) @ linalg.adjoint(u))


# ---------------------------------------------------------------------------
# half Clifford algebras and the tensor splitting F = F_- (x) F_+


def half_generators(n_gens: int) -> list[np.ndarray]:
    """Jordan-Wigner gammas: ``n_gens`` (even) Hermitian anticommuting unitaries."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1.0, -1.0]).astype(complex)
    q = n_gens // 2
    out = []
    for m in range(q):
        for p in (x, y):
            factors = [z] * m + [p] + [np.eye(2)] * (q - m - 1)
            op = np.eye(1, dtype=complex)
            for fac in factors:
                op = linalg.kron(op, fac)
            out.append(op)
    return out


def half_chirality(n_gens: int) -> np.ndarray:
    """Grading element of the half algebra: square one, anticommutes with every gamma."""
    gens = half_generators(n_gens)
    w = np.eye(gens[0].shape[0], dtype=complex)
    for g in gens:
        w = w @ g
    return w * 1j ** (n_gens // 2)


def iota_pm(fock: FockSpace, side: str, a) -> ClElement:
    """Image in ``Cl(V)`` of an operator on the half Clifford module of ``side``.

    The half algebra is generated by :func:`half_generators`; gamma ``i``
    is sent to ``rho(e_j)`` for the ``i``-th sample coordinate of ``side``.
    """
    a = np.asarray(a, dtype=complex)
    gens = half_generators(fock.n_modes)
    d = gens[0].shape[0]
    if a.shape != (d, d):
        raise ValueError(f"half-algebra operators are {d}x{d}")
    half_words = _word_basis(gens, d)
    full_words = (fock.minus_basis if side == "-" else fock.plus_basis) if side in SIDES else None
    if full_words is None:
        raise ValueError(f"side must be '-' or '+', got {side!r}")
    coeffs = np.tensordot(np.conj(half_words), a, axes=([1, 2], [0, 1]))
    # both word bases are HS-orthonormal; rescale between their dimensions
    op = np.tensordot(coeffs, full_words, axes=1) * np.sqrt(fock.dim / d)
    return ClElement(op)


@dataclass(frozen=True)
class TensorSplitting:
    """Unitary ``w: F -> F_- (x) F_+`` with ``w iota_-(a) w* = a (x) 1``.

    Odd elements of the plus side acquire the chirality of the minus side:
    ``w iota_+(b) w* = omega^{|b|} (x) b``.
    """

    w: np.ndarray
    half_dim: int


def tensor_splitting(fock: FockSpace) -> TensorSplitting:
    n = fock.n_modes
    gens = half_generators(n)
    d = gens[0].shape[0]
    eye = np.eye(d)
    omega_minus = iota_pm(fock, "-", half_chirality(n)).op
    src = [iota_pm(fock, "-", g).op for g in gens]
    src += [iota_pm(fock, "+", g).op @ omega_minus for g in gens]
    tgt = [linalg.kron(g, eye) for g in gens] + [linalg.kron(eye, g) for g in gens]
    sols = linalg.intertwiner_space(tgt, src)
    if len(sols) != 1:
        raise RuntimeError("tensor splitting is not unique")
    w = sols[0] * np.sqrt(fock.dim)
    return TensorSplitting(w, d)
