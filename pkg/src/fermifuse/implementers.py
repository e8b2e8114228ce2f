"""Unitary implementers of Bogoliubov automorphisms on Fock space."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .clifford_fock import FockSpace, modular_j
from .errors import Indeterminate, NonUnique, NotEven, NotOrthogonal, NotThetaOrthogonal, OddInput
from .fermion_model import OrthogonalElement, is_orthogonal, is_theta_orthogonal, reflect

EVEN, ODD = "even", "odd"
PHASE_CONVENTION = "vacuum-positive"


@dataclass(frozen=True)
class Implementer:
    u: np.ndarray
    g: OrthogonalElement
    parity: str
    phase_convention: str = PHASE_CONVENTION

    def __matmul__(self, other: "Implementer") -> "Implementer":
        par = EVEN if self.parity == other.parity else ODD
        return Implementer(self.u @ other.u, self.g @ other.g, par, "product")

    def adjoint(self) -> "Implementer":
        return Implementer(linalg.adjoint(self.u), self.g.inverse(), self.parity, self.phase_convention)

    def to_json(self) -> dict:
        return {
            "u": {"dim": self.u.shape[0], "re": self.u.real.ravel().tolist(), "im": self.u.imag.ravel().tolist()},
            "g": self.g.to_json(),
            "parity": self.parity,
            "phase_convention": self.phase_convention,
        }

    @classmethod
    def from_json(cls, data) -> "Implementer":
        if isinstance(data, str):
            data = json.loads(data)
        d = int(data["u"]["dim"])
        u = (np.asarray(data["u"]["re"]) + 1j * np.asarray(data["u"]["im"])).reshape(d, d)
        g = OrthogonalElement.from_json(data["g"])
        return cls(u, g, data["parity"], data.get("phase_convention", PHASE_CONVENTION))


def fix_phase(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Rotate ``u`` so that ``<u Omega, Omega>`` (or the first sizeable entry) is positive."""
    if abs(u[0, 0]) > tol:
        z = u[0, 0]
    else:
        flat = u.ravel()
        z = flat[np.flatnonzero(abs(flat) > tol)[0]]
    return u * (abs(z) / z)


def _parity(fock: FockSpace, u: np.ndarray, tol: float = 1e-8) -> str:
    gam = fock.gamma
    comm = linalg.fro(u @ gam - gam @ u)
    anti = linalg.fro(u @ gam + gam @ u)
    scale = linalg.fro(u)
    if comm <= tol * scale:
        return EVEN
    if anti <= tol * scale:
        return ODD
    raise Indeterminate(f"neither even nor odd: {comm:.2e}, {anti:.2e}")


def implement(fock: FockSpace, g) -> Implementer:
    g = g if isinstance(g, OrthogonalElement) else OrthogonalElement(g)
    if not is_orthogonal(fock.model, g, 1e-8):
        raise NotOrthogonal("only elements of O(V) are implementable")
    src = fock.sample_generators
    tgt = [np.tensordot(g.g[:, j], np.array(src), axes=1) for j in range(len(src))]
    sols = linalg.intertwiner_space(tgt, src)
    if len(sols) != 1:
        raise NonUnique(f"intertwiner space has dimension {len(sols)}")
    u, _ = linalg.polar(sols[0])
    u = fix_phase(u)
    return Implementer(u, g, _parity(fock, u))


def parity(fock: FockSpace, imp: Implementer, tol: float = 1e-8) -> str:
    return _parity(fock, imp.u, tol)


def implementation_residual(fock: FockSpace, imp: Implementer) -> float:
    """max_j ||u rho(e_j) u* - rho(g e_j)|| over the sample basis."""
    src = fock.sample_generators
    uh = linalg.adjoint(imp.u)
    worst = 0.0
    for j, r in enumerate(src):
        target = np.tensordot(imp.g.g[:, j], np.array(src), axes=1)
        worst = max(worst, linalg.fro(imp.u @ r @ uh - target))
    return worst


def recover_g(fock: FockSpace, u: np.ndarray) -> OrthogonalElement:
    """The element of O(V) implemented by ``u``, read off from ``u rho(e_j) u*``."""
    src = fock.sample_generators
    uh = linalg.adjoint(u)
    g = np.array([[np.trace(src[i] @ u @ src[j] @ uh) for j in range(len(src))] for i in range(len(src))])
    return OrthogonalElement(g / fock.dim)


def generator_unitary(fock: FockSpace, e) -> Implementer:
    """``rho(e)`` for a real unit vector ``e``: an odd implementer of ``-(1 - 2 e e^T)``."""
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    u = np.tensordot(e, np.array(fock.sample_generators), axes=1)
    g = -(np.eye(len(e)) - 2 * np.outer(e, e))
    return Implementer(u, OrthogonalElement(g), ODD, "generator")


def kappa(fock: FockSpace, imp: Implementer) -> Implementer:
    """``J U J``, an even implementer of ``tau g tau``."""
    if imp.parity != EVEN:
        raise OddInput("kappa is defined on even implementers")
    j = modular_j(fock)
    u = j.sandwich(imp.u)
    return Implementer(u, reflect(fock.model, imp.g), EVEN, imp.phase_convention)


def fusable(fock: FockSpace, imp1: Implementer, imp2: Implementer, tol: float = 1e-9) -> bool:
    m = fock.model
    for imp in (imp1, imp2):
        if imp.parity != EVEN:
            raise NotEven("fusion is restricted to even implementers")
        if not is_theta_orthogonal(m, imp.g, 1e-8):
            raise NotThetaOrthogonal("fusable implementers need block-diagonal g")
    g_plus = m.plus_block(imp1.g.g)
    flip = np.eye(m.n_modes)[::-1]
    return linalg.fro(m.minus_block(imp2.g.g) - flip @ g_plus @ flip) <= tol


def phase_between(a: np.ndarray, b: np.ndarray) -> complex:
    """The unimodular scalar ``z`` minimising ``||a - z b||``."""
    z = linalg.hs_inner(b, a)
    return z / abs(z) if abs(z) > 0 else 1.0


def distance_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    return linalg.fro(a - phase_between(a, b) * b)
