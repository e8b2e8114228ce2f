"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Antilinear maps
are stored as a unitary linear part followed by entrywise conjugation in the
standard basis, see :class:`AntiUnitaryOp`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import LinalgError, NotHermitian, Singular  # noqa: F401

DEFAULT_TOL = 1e-9
# above this many unknowns the stacked kernel solve is replaced by a group
# average (Pauli-like generators) or by normal equations
STACKED_LIMIT = 1024


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise LinalgError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    return a


def adjoint(m) -> np.ndarray:
    return np.conj(np.asarray(m, dtype=complex)).T


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing tr(a* b), antilinear in the first slot."""
    return complex(np.vdot(np.asarray(a).ravel(), np.asarray(b).ravel()))


def fro(m) -> float:
    return float(np.linalg.norm(m))


def svd(m):
    """Full SVD ``m = U @ diag(s) @ V*``; returns ``(U, s, V)``."""
    a = as_matrix(m)
    u, s, vh = sla.svd(a, lapack_driver="gesvd")
    return u, s, adjoint(vh)


def nullspace(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of ``m``.

    A direction counts as kernel when its singular value is at most
    ``tol * ||m||``.  Tall inputs are first reduced by a QR step, which leaves
    the singular values unchanged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(m, dtype=complex)
    n = a.shape[1]
    if a.shape[0] > n:
        a = sla.qr(a, mode="r")[0][:n]
    if a.size == 0 or not np.any(a):
        return np.eye(n, dtype=complex)
    _, s, vh = sla.svd(a, full_matrices=True, lapack_driver="gesvd")
    smax = s[0]
    sfull = np.zeros(n)
    sfull[: len(s)] = s
    mask = sfull <= tol * smax
    return np.conj(vh[mask]).T.copy()


def hermitian_eig(m, tol: float = DEFAULT_TOL):
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian ``m``."""
    a = as_matrix(m)
    scale = max(fro(a), 1.0)
    if fro(a - adjoint(a)) > tol * scale:
        raise NotHermitian(f"||m - m*|| = {fro(a - adjoint(a)):.3e}")
    a = 0.5 * (a + adjoint(a))
    w, v = sla.eigh(a, driver="evd")
    return w, v


def polar(m, tol: float = DEFAULT_TOL):
    """Right polar decomposition ``m = unitary @ positive``."""
    a = as_matrix(m)
    u, s, v = svd(a)
    if s[-1] <= tol * max(s[0], 1e-300):
        raise Singular(f"smallest singular value {s[-1]:.3e}")
    unitary = u @ adjoint(v)
    positive = v @ np.diag(s) @ adjoint(v)
    return unitary, 0.5 * (positive + adjoint(positive))


def psd_sqrt(m) -> np.ndarray:
    w, v = hermitian_eig(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ adjoint(v)


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and fro(adjoint(u) @ u - np.eye(u.shape[0])) <= tol


def intertwiner_space(rep_a, rep_b, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """HS-orthonormal basis of ``{X : X @ B_i = A_i @ X for all i}``.

    ``rep_a[i]`` acts on a space of dimension ``dA``, ``rep_b[i]`` on one of
    dimension ``dB``; the solutions are ``dA x dB`` matrices.  With row-major
    vectorisation ``vec(A X) = (A (x) 1) vec X`` and
    ``vec(X B) = (1 (x) B^T) vec X``.
    """
    rep_a = [np.asarray(a, dtype=complex) for a in rep_a]
    rep_b = [np.asarray(b, dtype=complex) for b in rep_b]
    if len(rep_a) != len(rep_b):
        raise LinalgError("representations must share an index set")
    if not rep_a:
        raise LinalgError("need at least one operator per representation")
    da, db = rep_a[0].shape[0], rep_b[0].shape[0]
    eye_a, eye_b = np.eye(da), np.eye(db)
    if da * db <= STACKED_LIMIT:
        rows = [np.kron(a, eye_b) - np.kron(eye_a, b.T) for a, b in zip(rep_a, rep_b)]
        basis = nullspace(np.vstack(rows), tol)
    elif _is_pauli_like(rep_a) and _is_pauli_like(rep_b):
        return _group_average_space(rep_a, rep_b, tol)
    else:
        basis = _normal_nullspace(rep_a, rep_b, tol)
    return [basis[:, k].reshape(da, db) for k in range(basis.shape[1])]


def _is_pauli_like(ops, tol: float = 1e-10) -> bool:
    """Unitary involutions that pairwise commute or anticommute."""
    for i, a in enumerate(ops):
        eye = np.eye(a.shape[0])
        if fro(a @ a - eye) > tol * a.shape[0] or fro(a - adjoint(a)) > tol * a.shape[0]:
            return False
        for b in ops[:i]:
            ab, ba = a @ b, b @ a
            if min(fro(ab - ba), fro(ab + ba)) > tol * a.shape[0]:
                return False
    return True


def _group_average_space(rep_a, rep_b, tol: float, batch: int = 16) -> list[np.ndarray]:
    # The generators span a finite group modulo scalars, so the average of
    # X -> A_w X B_w^{-1} over all ordered subset-words w projects onto the
    # intertwiners; it factors as a composition of one two-term average per
    # generator.  Random probes of the projection then span its range.
    da, db = rep_a[0].shape[0], rep_b[0].shape[0]
    rng = np.random.default_rng(0)

    def project(x):
        for a, b in zip(rep_a, rep_b):
            x = 0.5 * (x + a @ x @ b)
        return x

    found = np.zeros((da * db, 0), dtype=complex)
    while found.shape[1] < da * db:
        probes = rng.normal(size=(batch, da, db)) + 1j * rng.normal(size=(batch, da, db))
        cols = np.array([project(x).ravel() for x in probes]).T
        cols -= found @ (adjoint(found) @ cols)
        u, s, _ = svd(cols)
        scale = max(np.sqrt(da * db), 1.0)
        new = u[:, : int(np.sum(s > 1e-6 * scale))]
        if new.shape[1] == 0:
            break
        q, _ = np.linalg.qr(np.hstack([found, new]))
        found = q
    out = [found[:, k].reshape(da, db) for k in range(found.shape[1])]
    for x in out:
        for a, b in zip(rep_a, rep_b):
            if fro(x @ b - a @ x) > max(tol, 1e-8):
                raise LinalgError("group-average intertwiner failed to converge")
    return out


def _normal_nullspace(rep_a, rep_b, tol: float) -> np.ndarray:
    # sum of K*K with K = A (x) 1 - 1 (x) B^T; keeps memory at (da*db)^2 but
    # squares singular values, so the threshold is applied to sqrt(eigenvalues)
    da, db = rep_a[0].shape[0], rep_b[0].shape[0]
    eye_a, eye_b = np.eye(da), np.eye(db)
    normal = np.zeros((da * db, da * db), dtype=complex)
    for a, b in zip(rep_a, rep_b):
        ah, bc = adjoint(a), np.conj(b)
        normal += np.kron(ah @ a, eye_b) + np.kron(eye_a, bc @ b.T)
        normal -= np.kron(ah, b.T) + np.kron(a, bc)
    w, v = sla.eigh(normal, driver="evd")
    sigma = np.sqrt(np.clip(w, 0.0, None))
    if sigma[-1] == 0:
        return v
    return v[:, sigma <= max(tol, 1e-7) * sigma[-1]]


@dataclass(frozen=True)
class AntiUnitaryOp:
    """Antiunitary map ``v -> linear_part @ conj(v)``."""

    linear_part: np.ndarray

    __array_ufunc__ = None  # let ``ndarray @ op`` defer to ``__rmatmul__``

    def __post_init__(self):
        u = as_matrix(self.linear_part)
        if not is_unitary(u, 1e-8):
            raise LinalgError("linear part of an antiunitary map must be unitary")
        object.__setattr__(self, "linear_part", u)

    @property
    def dim(self) -> int:
        return self.linear_part.shape[0]

    def __call__(self, v):
        return self.linear_part @ np.conj(np.asarray(v, dtype=complex))

    def __matmul__(self, other):
        if isinstance(other, AntiUnitaryOp):
            # U1 conj(U2 conj v) = U1 conj(U2) v  -> linear
            return self.linear_part @ np.conj(other.linear_part)
        other = np.asarray(other, dtype=complex)
        if other.ndim == 1:
            return self(other)
        return AntiUnitaryOp(self.linear_part @ np.conj(other))

    def __rmatmul__(self, other):
        return AntiUnitaryOp(np.asarray(other, dtype=complex) @ self.linear_part)

    def inverse(self) -> "AntiUnitaryOp":
        # w = U conj(v)  =>  v = conj(U* w) = U^T conj(w)
        return AntiUnitaryOp(self.linear_part.T.copy())

    def sandwich(self, x) -> np.ndarray:
        """The linear operator ``self @ x @ self^{-1}``."""
        u = self.linear_part
        return u @ np.conj(np.asarray(x, dtype=complex)) @ adjoint(u)

    def square(self) -> np.ndarray:
        return self @ self
