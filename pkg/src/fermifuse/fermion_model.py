"""Truncated free fermions on the circle.

The ambient space ``V = C^{2N}`` is described in the *sample basis*: coordinate
``j`` is the value of a spinor at the point ``t_j = -pi + (j + 1/2) pi / N``.
Points come in pairs ``t_j, -t_j`` (``j <-> 2N-1-j``) and avoid ``0`` and ``pi``,
so the reflection is a permutation and the two semicircles are coordinate
blocks: ``V_-`` is ``j < N`` and ``V_+`` is ``j >= N``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import special_ortho_group

from . import linalg
from .errors import DimensionMismatch, NotOrthogonal, OddN, TooLarge
from .linalg import AntiUnitaryOp

MAX_MODES = 6


@dataclass(frozen=True)
class FermionModel:
    n_modes: int
    sample_points: np.ndarray = field(repr=False)
    mode_basis: np.ndarray = field(repr=False)
    alpha: AntiUnitaryOp = field(repr=False)
    tau: np.ndarray = field(repr=False)
    lagrangian_projector: np.ndarray = field(repr=False)
    minus_projector: np.ndarray = field(repr=False)
    plus_projector: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    def mode(self, n: int) -> np.ndarray:
        """The basis spinor with Fourier index ``n`` in ``-N..N-1``."""
        if not -self.n_modes <= n < self.n_modes:
            raise IndexError(n)
        return self.mode_basis[:, n + self.n_modes]

    @cached_property
    def lagrangian_basis(self) -> np.ndarray:
        """Columns ``phi_0 .. phi_{N-1}``, an orthonormal basis of ``L``."""
        return self.mode_basis[:, self.n_modes :]

    @cached_property
    def dual_basis(self) -> np.ndarray:
        """Columns ``alpha(phi_0) .. alpha(phi_{N-1})``, a basis of ``alpha(L)``."""
        return np.conj(self.lagrangian_basis)

    def minus_block(self, g) -> np.ndarray:
        return np.asarray(g)[: self.n_modes, : self.n_modes]

    def plus_block(self, g) -> np.ndarray:
        return np.asarray(g)[self.n_modes :, self.n_modes :]

    def block_diag(self, g_minus, g_plus) -> np.ndarray:
        n = self.n_modes
        g = np.zeros((2 * n, 2 * n), dtype=complex)
        g[:n, :n] = g_minus
        g[n:, n:] = g_plus
        return g


@dataclass(frozen=True)
class OrthogonalElement:
    """A unitary on ``V`` commuting with the real structure."""

    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", linalg.as_matrix(self.g))

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def __matmul__(self, other: "OrthogonalElement") -> "OrthogonalElement":
        return OrthogonalElement(self.g @ other.g)

    def inverse(self) -> "OrthogonalElement":
        return OrthogonalElement(linalg.adjoint(self.g))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.g.real.ravel().tolist(),
            "im": self.g.imag.ravel().tolist(),
        }

    @classmethod
    def from_json(cls, data) -> "OrthogonalElement":
        if isinstance(data, str):
            data = json.loads(data)
        d = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros(d * d)), dtype=float)
        if re.size != d * d or im.size != d * d:
            raise DimensionMismatch(f"expected {d * d} entries")
        return cls((re + 1j * im).reshape(d, d))


def build_model(n_modes: int) -> FermionModel:
    if n_modes % 2 or n_modes < 2:
        raise OddN(f"number of modes must be even and positive, got {n_modes}")
    if n_modes > MAX_MODES:
        raise TooLarge(f"number of modes capped at {MAX_MODES}, got {n_modes}")
    n = n_modes
    j = np.arange(2 * n)
    t = -np.pi + (j + 0.5) * np.pi / n
    idx = np.arange(-n, n)
    modes = np.exp(-1j * np.outer(t, idx + 0.5)) / np.sqrt(2 * n)
    tau = np.eye(2 * n)[::-1].astype(complex)
    lag = modes[:, n:]
    p_l = lag @ linalg.adjoint(lag)
    minus = np.diag((j < n).astype(float)).astype(complex)
    plus = np.diag((j >= n).astype(float)).astype(complex)
    return FermionModel(
        n_modes=n,
        sample_points=t,
        mode_basis=modes,
        alpha=AntiUnitaryOp(np.eye(2 * n, dtype=complex)),
        tau=tau,
        lagrangian_projector=p_l,
        minus_projector=minus,
        plus_projector=plus,
    )


def _as_array(model: FermionModel, g) -> np.ndarray:
    g = g.g if isinstance(g, OrthogonalElement) else linalg.as_matrix(g)
    if g.shape != (model.dim, model.dim):
        raise DimensionMismatch(f"expected {model.dim}x{model.dim}, got {g.shape}")
    return g


def is_orthogonal(model: FermionModel, g, tol: float = 1e-10) -> bool:
    g = _as_array(model, g)
    # commuting with entrywise conjugation means real entries
    return linalg.is_unitary(g, tol) and linalg.fro(g.imag) <= tol


def is_theta_orthogonal(model: FermionModel, g, tol: float = 1e-10) -> bool:
    if not is_orthogonal(model, g, tol):
        return False
    g = _as_array(model, g)
    n = model.n_modes
    return linalg.fro(g[:n, n:]) <= tol and linalg.fro(g[n:, :n]) <= tol


def random_theta_orthogonal(model: FermionModel, seed) -> OrthogonalElement:
    rng = np.random.default_rng(seed)
    n = model.n_modes
    g_minus = special_ortho_group.rvs(n, random_state=rng)
    g_plus = special_ortho_group.rvs(n, random_state=rng)
    return OrthogonalElement(model.block_diag(g_minus, g_plus))


def reflect(model: FermionModel, g) -> OrthogonalElement:
    """The reflected element ``tau g tau``."""
    arr = _as_array(model, g)
    if not is_orthogonal(model, arr, 1e-8):
        raise NotOrthogonal("reflection is only defined on O(V)")
    return OrthogonalElement(model.tau @ arr @ model.tau)
