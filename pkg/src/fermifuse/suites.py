"""Verification suites behind the command-line interface.

Every suite returns a :class:`SuiteReport`; a trial passes when each named
residual is at most its threshold.  Residuals that are pinned at ``1e-8``
follow the ``tol`` argument, all other thresholds are fixed.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .clifford_fock import FockSpace, build_fock, modular_j, rho
from .connes_fusion import (
    comparison_unitary,
    l2_bimodule,
    l2_space,
    left_unitor,
    pentagon_residual,
    right_unitor,
    standard_unitors,
    triangle_residual,
)
from .fermion_model import build_model, random_theta_orthogonal
from .fibre_fusion import (
    FibreTriple,
    build_quadruple,
    build_triple,
    fibre_associativity,
    frame_independence,
    fusable_lifts,
    random_blocks,
    reframe,
)
from .implementer_fusion import (
    ORIENTATION,
    fock_fusion,
    group_product,
    mu_hat,
    theorem_fusion_products_agree,
)
from .implementers import EVEN, implement, implementation_residual, parity
from .vn_algebra import (
    algebra_from_generators,
    identity_representation,
    standard_form,
    standard_form_residuals,
    tomita,
)

SUITES = (
    "car",
    "irreducible",
    "implementer",
    "modular",
    "standardform",
    "fusion-coherence",
    "mu-hat",
    "theorem-agree",
    "fibre",
)
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SuiteConfig:
    """Flags shared by every suite; ``tol`` applies to residuals pinned at 1e-8."""

    n: int = 4
    seed: int = 0
    tol: float = DEFAULT_TOL
    trials: int = 10
    timing: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _sig(x: float) -> float:
    return float(f"{x:.6g}")


@dataclass
class Trial:
    seed: int
    residuals: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    error: str | None = None

    def check(self, name: str, value: float, threshold: float) -> None:
        self.residuals[name] = float(value)
        self.thresholds[name] = float(threshold)

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        return all(self.residuals[k] <= self.thresholds[k] for k in self.residuals)

    def to_json(self) -> dict:
        out = {
            "seed": self.seed,
            "residuals": {k: _sig(v) for k, v in self.residuals.items()},
            "thresholds": {k: _sig(v) for k, v in self.thresholds.items()},
            "pass": self.passed,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class SuiteReport:
    suite_name: str
    n: int
    seed: int
    tol: float
    trials: list
    wall_time_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    def max_residual(self) -> float:
        vals = [v for t in self.trials for v in t.residuals.values()]
        return max(vals) if vals else 0.0

    def to_json(self, timing: bool = False) -> dict:
        summary = {
            "passed": sum(t.passed for t in self.trials),
            "failed": sum(not t.passed for t in self.trials),
            "max_residual": _sig(self.max_residual()),
        }
        if timing and self.wall_time_ms is not None:
            summary["wall_time_ms"] = round(self.wall_time_ms, 1)
        return {
            "suite_name": self.suite_name,
            "model_params": {"n": self.n, "seed": self.seed, "tol": self.tol},
            "trials": [t.to_json() for t in self.trials],
            "summary": summary,
        }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FERMIFUSE_THREADS", "1")))
    except ValueError:
        return 1


def _run_trials(seeds, body: Callable[[Trial], None]) -> list:
    def one(seed):
        t = Trial(int(seed))
        try:
            body(t)
        except Exception as exc:  # a crashing trial is a failed trial
            t.error = f"{type(exc).__name__}: {exc}"
        return t

    workers = _threads()
    if workers == 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds))


def _seeds(seed: int, trials: int) -> list:
    return [seed * 1000 + k for k in range(trials)]


_FOCKS: dict = {}


def _fock(n: int) -> FockSpace:
    if n not in _FOCKS:
        _FOCKS[n] = build_fock(build_model(n))
    return _FOCKS[n]


def _fusable_pair(fock: FockSpace, rng):
    return fusable_lifts(fock, random_blocks(fock, rng, 3))


# ---------------------------------------------------------------------------


def suite_car(n, seed, tol, trials):
    fock = _fock(n)
    eye = np.eye(fock.dim)
    alpha = fock.model.alpha

    def body(t):
        rng = np.random.default_rng(t.seed)
        anti = adj = 0.0
        for _ in range(5):
            f = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
            h = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
            rf, rh = rho(fock, f).op, rho(fock, h).op
            pairing = np.vdot(alpha(h), f)
            anti = max(anti, linalg.fro(rf @ rh + rh @ rf - 2 * pairing * eye))
            adj = max(adj, linalg.fro(linalg.adjoint(rf) - rho(fock, alpha(f)).op))
        t.check("anticommutator", anti, 1e-10)
        t.check("adjoint", adj, 1e-10)

    return _run_trials(_seeds(seed, trials), body)


def suite_irreducible(n, seed, tol, trials):
    fock = _fock(n)

    def body(t):
        dim = len(linalg.intertwiner_space(fock.sample_generators, fock.sample_generators))
        t.check("intertwiner_dim_minus_one", abs(dim - 1), 0.0)

    return _run_trials([seed], body)


def suite_implementer(n, seed, tol, trials):
    fock = _fock(n)

    def body(t):
        g = random_theta_orthogonal(fock.model, t.seed)
        h = random_theta_orthogonal(fock.model, t.seed + 500)
        ug, uh, ugh = implement(fock, g), implement(fock, h), implement(fock, g @ h)
        t.check("implementation", implementation_residual(fock, ug), 1e-9)
        t.check("unitarity", linalg.fro(linalg.adjoint(ug.u) @ ug.u - np.eye(fock.dim)), 1e-9)
        z = linalg.hs_inner(ug.u @ uh.u, ugh.u) / fock.dim
        t.check("projectivity_modulus", abs(abs(z) - 1), 1e-9)
        t.check("odd", float(parity(fock, ug) != EVEN), 0.0)

    return _run_trials(_seeds(seed, trials), body)


def _minus_standard_form(fock, seed=0):
    alg = algebra_from_generators(fock.dim, fock.side_generators("-"))
    rep = identity_representation(alg)
    return rep, standard_form(rep, fock.vacuum, seed=seed)


def suite_modular(n, seed, tol, trials):
    fock = _fock(n)

    def body(t):
        rep, sf = _minus_standard_form(fock, t.seed)
        td = tomita(rep, fock.vacuum)
        t.check("j_vs_klein_lambda", linalg.fro(td.j.linear_part - modular_j(fock).linear_part), tol)
        t.check("cyclic_deficit", max(0.0, 1e-8 - td.cyclic_margin), 0.0)
        t.check("separating_deficit", max(0.0, 1e-8 - td.separating_margin), 0.0)
        for k, v in standard_form_residuals(sf, seed=t.seed).items():
            t.check(k, v, 1e-9)

    return _run_trials([seed], body)


def suite_standardform(n, seed, tol, trials):
    fock = _fock(n)

    def body(t):
        _, sf = _minus_standard_form(fock, t.seed)
        for k, v in standard_form_residuals(sf, trials=2, seed=t.seed).items():
            t.check(k, v, 1e-9)

    return _run_trials(_seeds(seed, max(1, min(trials, 3))), body)


def _random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho_ = a @ linalg.adjoint(a) + 0.1 * np.eye(d)
    return rho_ / np.trace(rho_)


def suite_fusion_coherence(n, seed, tol, trials):
    fock = _fock(n)
    ff = fock_fusion(fock)
    f, l2 = ff.bimodule, ff.l2
    lb = l2_bimodule(l2)

    def structural(t):
        t.check("pentagon_l2", pentagon_residual(lb, lb, lb, lb, l2), tol)
        t.check("pentagon_fock", pentagon_residual(f, f, f, f, l2), tol)
        t.check("triangle_fock_l2_fock", triangle_residual(f, f, l2), tol)
        t.check("lambda_equals_rho_l2", linalg.fro(left_unitor(lb, l2) - right_unitor(lb, l2)), tol)
        lam = standard_unitors(ff.sf, f, l2, "left")
        t.check("lambda_equals_rho_fock", linalg.fro(lam - standard_unitors(ff.sf, f, l2, "right")), tol)
        t.check("chi_unitarity", linalg.fro(linalg.adjoint(lam) @ lam - np.eye(f.dim)), tol)

    def states(t):
        rng = np.random.default_rng(t.seed)
        l2a = l2_space(ff.algebra, _random_density(rng, fock.dim))
        l2b = l2_space(ff.algebra, _random_density(rng, fock.dim))
        c0a = comparison_unitary(f, f, l2, l2a)
        cab = comparison_unitary(f, f, l2a, l2b)
        c0b = comparison_unitary(f, f, l2, l2b)
        t.check("comparison_unitarity", linalg.fro(linalg.adjoint(c0a) @ c0a - np.eye(c0a.shape[1])), tol)
        t.check("comparison_coherence", linalg.fro(cab @ c0a - c0b), tol)

    out = _run_trials([seed], structural)
    return out + _run_trials(_seeds(seed, max(1, min(trials, 3))), states)


def suite_mu_hat(n, seed, tol, trials):
    fock = _fock(n)
    ff = fock_fusion(fock)

    def body(t):
        rng = np.random.default_rng(t.seed)
        # U, U' and V, V' fusable pairs with products again fusable
        b = random_blocks(fock, rng, 6)
        u, u2 = fusable_lifts(fock, b[:3])
        v, v2 = fusable_lifts(fock, b[3:])
        lhs = mu_hat(ff, u, u2).u @ mu_hat(ff, v, v2).u
        rhs = mu_hat(ff, u @ v, u2 @ v2).u
        t.check("multiplicativity", linalg.fro(lhs - rhs), tol)
        t.check("implementation", implementation_residual(fock, mu_hat(ff, u, u2)), tol)

    return _run_trials(_seeds(seed, trials), body)


def _calibration_trial(t: Trial) -> None:
    fock = _fock(2)
    ff = fock_fusion(fock)
    m = fock.model
    flip = np.eye(2)[::-1]
    worst = {"inverse": 0.0, "direct": 0.0}
    for theta in np.linspace(0.1, 2 * np.pi - 0.1, 8):
        c, s = np.cos(theta), np.sin(theta)
        h = np.array([[c, -s], [s, c]])
        u = implement(fock, m.block_diag(np.array([[0.6, -0.8], [0.8, 0.6]]), h))
        v = implement(fock, m.block_diag(flip @ h @ flip, np.array([[0.8, 0.6], [-0.6, 0.8]])))
        fused = mu_hat(ff, u, v).u
        for name in worst:
            worst[name] = max(worst[name], linalg.fro(fused - group_product(fock, u, v, name)))
    other = "direct" if ORIENTATION == "inverse" else "inverse"
    t.check("calibrated_orientation", worst[ORIENTATION], 1e-7)
    t.check("other_orientation_rejected", float(worst[other] <= 1e-7), 0.0)


def suite_theorem_agree(n, seed, tol, trials):
    fock = _fock(n)

    def body(t):
        rng = np.random.default_rng(t.seed)
        u, u2 = _fusable_pair(fock, rng)
        rep = theorem_fusion_products_agree(fock, u, u2)
        t.check("delta", rep.delta, 1e-7)
        t.check("k_commutes_with_j", rep.j_commutation, tol)
        t.check("g_minus_plus_identity_block", rep.block_form, tol)
        t.check("mu_hat_k_inverse_fixed", rep.fixed_point, tol)

    return _run_trials([-1], _calibration_trial) + _run_trials(_seeds(seed, trials), body)


def suite_fibre(n, seed, tol, trials):
    fock = _fock(n)
    ff = fock_fusion(fock)

    def independence(t):
        rng = np.random.default_rng(t.seed)
        triple = build_triple(ff, random_blocks(fock, rng, 3), seed=t.seed)
        v12, v23 = _fusable_pair(fock, rng)
        rep = frame_independence(ff, triple, reframe(ff, triple, v12, v23))
        t.check("frame_independence", rep.difference, 1e-7)
        t.check("unitarity", rep.unitarity, tol)
        t.check("intertwining", rep.intertwining, tol)

    def negative_control(t):
        rng = np.random.default_rng(t.seed)
        triple = build_triple(ff, random_blocks(fock, rng, 3), seed=t.seed)
        v12, v23 = _fusable_pair(fock, rng)
        other = reframe(ff, triple, v12, v23)
        broken = FibreTriple(other.nu12, other.nu23, other.nu13.rephased(np.exp(0.3j)))
        rep = frame_independence(ff, triple, broken)
        # the control passes when the broken frame is detected
        t.check("broken_frame_undetected", float(rep.passed), 0.0)

    def associativity(t):
        rng = np.random.default_rng(t.seed)
        res = fibre_associativity(ff, build_quadruple(ff, random_blocks(fock, rng, 4), seed=t.seed))
        t.check("associativity_square", res["square"], 1e-7)

    def grid(t):
        res = fibre_grid(points=3)
        t.check("grid_associativity_max", res["max_square"], 1e-7)
        t.check("grid_points_short", float(res["points"] < 27), 0.0)

    out = _run_trials(_seeds(seed, trials), independence)
    out += _run_trials([seed * 1000 + 999], negative_control)
    out += _run_trials(_seeds(seed, max(1, min(trials, 3))), associativity)
    out += _run_trials([-2], grid)
    return out


def fibre_grid(points: int = 3) -> dict:
    """Associativity square at N=2 over a grid of rotation angles for three blocks."""
    fock = _fock(2)
    ff = fock_fusion(fock)
    angles = np.linspace(0.0, 2 * np.pi, points, endpoint=False) + 0.4
    rot = lambda a: np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    worst, count = 0.0, 0
    for a in angles:
        for b in angles:
            for c in angles:
                blocks = [rot(a), rot(b), rot(c), rot(0.9)]
                res = fibre_associativity(ff, build_quadruple(ff, blocks, seed=count))
                worst = max(worst, res["square"])
                count += 1
    return {"max_square": worst, "points": count}


RUNNERS = {
    "car": suite_car,
    "irreducible": suite_irreducible,
    "implementer": suite_implementer,
    "modular": suite_modular,
    "standardform": suite_standardform,
    "fusion-coherence": suite_fusion_coherence,
    "mu-hat": suite_mu_hat,
    "theorem-agree": suite_theorem_agree,
    "fibre": suite_fibre,
}


def run_suite(name: str, n: int = 4, seed: int = 0, tol: float = DEFAULT_TOL, trials: int = 10) -> SuiteReport:
    start = time.perf_counter()
    results = RUNNERS[name](n, seed, tol, trials)
    elapsed = 1000 * (time.perf_counter() - start)
    return SuiteReport(name, n, seed, tol, results, elapsed)


def run_config(name: str, cfg: SuiteConfig) -> list:
    """Run ``name`` (or every suite for ``"all"``) under ``cfg``."""
    names = SUITES if name == "all" else (name,)
    return [run_suite(x, cfg.n, cfg.seed, cfg.tol, cfg.trials) for x in names]
