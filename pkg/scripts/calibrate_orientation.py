"""Decide whether mu_hat(U, U') equals U r^{-1} U' or U r U' at N=2.

Sweeps a one-parameter family of middle blocks h(theta) and reports, for each
orientation, the largest deviation from mu_hat.  Exactly one orientation
should match at every angle; that one is frozen as
``fermifuse.implementer_fusion.ORIENTATION``.
"""

import argparse

import numpy as np

from fermifuse.clifford_fock import build_fock
from fermifuse.fermion_model import build_model
from fermifuse.implementer_fusion import ORIENTATION, fock_fusion, group_product, mu_hat
from fermifuse.implementers import implement


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def calibrate(points: int = 16, tol: float = 1e-8) -> dict:
    fock = build_fock(build_model(2))
    ff = fock_fusion(fock)
    m = fock.model
    flip = np.eye(2)[::-1]
    worst = {"inverse": 0.0, "direct": 0.0}
    best = {"inverse": np.inf, "direct": np.inf}
    for theta in np.linspace(0.1, 2 * np.pi - 0.1, points):
        h = rotation(theta)
        u = implement(fock, m.block_diag(rotation(0.7), h))
        v = implement(fock, m.block_diag(flip @ h @ flip, rotation(-1.3)))
        fused = mu_hat(ff, u, v).u
        for name in worst:
            d = np.linalg.norm(fused - group_product(fock, u, v, name))
            worst[name] = max(worst[name], d)
            best[name] = min(best[name], d)
    matching = [k for k, w in worst.items() if w <= tol]
    return {"worst": worst, "best": best, "matching": matching}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=16)
    args = parser.parse_args()
    res = calibrate(args.points)
    for name in ("inverse", "direct"):
        print(f"{name:8s} max deviation {res['worst'][name]:.3e}  min deviation {res['best'][name]:.3e}")
    print(f"matching orientation(s): {res['matching']}; frozen constant: {ORIENTATION}")


if __name__ == "__main__":
    main()
