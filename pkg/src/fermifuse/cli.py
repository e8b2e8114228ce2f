"""Command-line entry point: ``fermifuse suite ...`` and ``fermifuse fuse ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import linalg
from .errors import FermiFuseError, NotFusable
from .fermion_model import OrthogonalElement, build_model, is_theta_orthogonal
from .implementers import EVEN, implement, implementation_residual, parity

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_FUSABLE = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def build_parser() -> argparse.ArgumentParser:
    from .suites import SUITES

    parser = argparse.ArgumentParser(prog="fermifuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("suite", help="run a verification suite and print a JSON report")
    s.add_argument("name", choices=[*SUITES, "all"])
    s.add_argument("--n", type=int, default=4, help="number of modes (even, 2..6)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-8, help="threshold for residuals pinned at 1e-8")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--timing", action="store_true", help="include wall-clock times (breaks byte-identity)")

    f = sub.add_parser("fuse", help="fuse the implementers of two theta-orthogonal elements")
    f.add_argument("left", help="JSON file with the left orthogonal element")
    f.add_argument("right", help="JSON file with the right orthogonal element")
    f.add_argument("--n", type=int, default=4)
    return parser


def cmd_suite(name: str, n: int, seed: int, tol: float, trials: int, timing: bool = False):
    from .suites import SuiteConfig, run_config

    cfg = SuiteConfig(n, seed, tol, trials, timing)
    build_model(n)  # reject bad N before any work
    reports = run_config(name, cfg)
    ok = all(r.passed for r in reports)
    if name == "all":
        payload = {
            "suite_name": "all",
            "model_params": {"n": n, "seed": seed, "tol": tol},
            "suites": [r.to_json(timing) for r in reports],
            "summary": {
                "passed": sum(r.passed for r in reports),
                "failed": sum(not r.passed for r in reports),
                "max_residual": float(f"{max(r.max_residual() for r in reports):.6g}"),
            },
        }
        if timing:
            payload["summary"]["wall_time_ms"] = round(sum(r.wall_time_ms for r in reports), 1)
    else:
        payload = reports[0].to_json(timing)
    return (EXIT_OK if ok else EXIT_FAIL), payload


def _load_element(path: str, dim: int) -> OrthogonalElement:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    g = OrthogonalElement.from_json(data)
    if g.dim != dim:
        raise FermiFuseError(f"{path}: dimension {g.dim} does not match 2N = {dim}")
    return g


def cmd_fuse(left: str, right: str, n: int):
    from .clifford_fock import build_fock
    from .implementer_fusion import fock_fusion, mu_hat, theorem_fusion_products_agree

    model = build_model(n)
    g1 = _load_element(left, model.dim)
    g2 = _load_element(right, model.dim)
    for label, g in (("left", g1), ("right", g2)):
        if not is_theta_orthogonal(model, g.g):
            raise FermiFuseError(f"{label} element is not theta-orthogonal")
    fock = build_fock(model)
    u, v = implement(fock, g1), implement(fock, g2)
    for label, w in (("left", u), ("right", v)):
        if parity(fock, w) != EVEN:
            raise NotFusable(f"{label} implementer is odd; fusion needs even implementers")
    flip = np.eye(n)[::-1]
    gap = linalg.fro(model.minus_block(g2.g) - flip @ model.plus_block(g1.g) @ flip)
    if gap > 1e-8:
        raise NotFusable(
            f"violated condition g'_- = tau g_+ tau: ||g'_- - tau g_+ tau|| = {gap:.3e}"
        )
    ff = fock_fusion(fock)
    fused = mu_hat(ff, u, v)
    report = theorem_fusion_products_agree(fock, u, v)
    payload = {
        "g_fused": fused.g.to_json(),
        "u_fused": {
            "dim": fock.dim,
            "re": np.real(fused.u).tolist(),
            "im": np.imag(fused.u).tolist(),
        },
        "residuals": {
            "implementation": implementation_residual(fock, fused),
            "unitarity": linalg.fro(linalg.adjoint(fused.u) @ fused.u - np.eye(fock.dim)),
            "theorem_delta": report.delta,
        },
    }
    return EXIT_OK, payload


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with status 2 on bad arguments
    try:
        if args.command == "suite":
            code, payload = cmd_suite(args.name, args.n, args.seed, args.tol, args.trials, args.timing)
        else:
            code, payload = cmd_fuse(args.left, args.right, args.n)
    except NotFusable as exc:
        print(f"fermifuse: not fusable: {exc}", file=sys.stderr)
        return EXIT_NOT_FUSABLE
    except (FermiFuseError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"fermifuse: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(_dump(payload) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
