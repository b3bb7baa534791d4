#!/usr/bin/env python3
"""Compute spherical t-designs on S^2 and write them as point files.

Symmetric designs (odd t) are written as ``ssTTT.NNNNN`` and hold antipodal
pairs, so only even-degree moments need solving; N = 2 * ceil(((t^2+t)/2 + 2)/2).
Non-symmetric designs (any t) are ``sfTTT.NNNNN`` with N = ceil(((t+1)^2 + 2)/2).

Each design is the root of the moment system sum_i Y_km(x_i) = 0 (k >= 1),
found by damped Gauss-Newton in spherical coordinates from a spiral start.
This is a development tool; the package only reads the resulting files.

    python tools/make_designs.py --out src/sphdki/data/designs 1 3 5 ... 45
    python tools/make_designs.py --nonsym 10 20
"""
import argparse
import math
import sys
import time

import numpy as np

from sphdki.harmonics import quadrature_residuals, real_sph_harm
from sphdki.sphere import save_design, spiral_points


def n_symmetric(t):
    if t == 1:
        return 2
    return 2 * math.ceil(((t * t + t) // 2 + 2) / 2)


def n_nonsymmetric(t):
    return math.ceil(((t + 1) ** 2 + 2) / 2)


def _to_xyz(theta, phi):
    st = np.sin(theta)
    return np.column_stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _columns(t, symmetric):
    cols = []
    for k in range(1, t + 1):
        if symmetric and k % 2:
            continue
        cols.extend(range(k * k, (k + 1) ** 2))
    return np.array(cols, dtype=int)


def solve_design(t, symmetric=True, verbose=False, attempts=20):
    """Retry from jittered spiral starts, adding a point pair after repeated stalls."""
    if symmetric and t % 2 == 0:
        raise ValueError("symmetric designs are generated for odd t")
    n_total = n_symmetric(t) if symmetric else n_nonsymmetric(t)
    rng = np.random.default_rng(t)
    for attempt in range(attempts):
        jitter = 0.0 if attempt == 0 else 0.3 / math.sqrt(n_total)
        try:
            return _solve(t, n_total, symmetric, rng, jitter, verbose)
        except RuntimeError as exc:
            print(f"  {exc}; retrying", file=sys.stderr)
            if attempt % 5 == 4:
                n_total += 2
    raise RuntimeError(f"no {t}-design found")


def _solve(t, n_total, symmetric, rng, jitter, verbose, max_iter=300):
    start = spiral_points(n_total)
    if symmetric:
        n_free = n_total // 2
        start = start[:n_free]
    else:
        n_free = n_total
    start = start + jitter * rng.standard_normal(start.shape)
    start /= np.linalg.norm(start, axis=1, keepdims=True)
    cols = _columns(t, symmetric)
    theta = np.arccos(np.clip(start[:, 2], -1, 1))
    phi = np.arctan2(start[:, 1], start[:, 0])
    h = 1e-6

    def residual(th, ph):
        return real_sph_harm(_to_xyz(th, ph), t)[:, cols].sum(axis=0)

    F = residual(theta, phi)
    mu = 1e-3
    for it in range(max_iter):
        nrm = np.linalg.norm(F)
        if verbose:
            print(f"  t={t} it={it} |F|={nrm:.3e} mu={mu:.1e}", file=sys.stderr)
        if nrm < 1e-12:
            break
        Jt = (real_sph_harm(_to_xyz(theta + h, phi), t)[:, cols]
              - real_sph_harm(_to_xyz(theta - h, phi), t)[:, cols]) / (2 * h)
        Jp = (real_sph_harm(_to_xyz(theta, phi + h), t)[:, cols]
              - real_sph_harm(_to_xyz(theta, phi - h), t)[:, cols]) / (2 * h)
        J = np.hstack([Jt.T, Jp.T])  # (n_eq, 2 n_free)
        JJ = J @ J.T
        while True:
            y = np.linalg.solve(JJ + mu * np.trace(JJ) / JJ.shape[0] * np.eye(JJ.shape[0]), F)
            step = J.T @ y
            th_new = theta - step[:n_free]
            ph_new = phi - step[n_free:]
            F_new = residual(th_new, ph_new)
            if np.linalg.norm(F_new) < nrm:
                theta, phi, F = th_new, ph_new, F_new
                mu = max(mu / 10, 1e-15)
                break
            mu *= 10
            if mu > 1e8:
                raise RuntimeError(f"t={t}, N={n_total}: stalled at |F|={nrm:.3e}")
    else:
        raise RuntimeError(f"t={t}, N={n_total}: no convergence, |F|={nrm:.3e}")
    X = _to_xyz(theta, phi)
    if symmetric:
        X = np.vstack([X, -X]) if t > 1 else np.array([[0, 0, 1.0], [0, 0, -1.0]])
    return X


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("degrees", nargs="+", type=int)
    ap.add_argument("--out", default="src/sphdki/data/designs")
    ap.add_argument("--nonsym", action="store_true", help="write sf (non-symmetric) designs")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    for t in args.degrees:
        t0 = time.perf_counter()
        sym = not args.nonsym
        X = solve_design(t, symmetric=sym, verbose=args.verbose)
        w = np.full(X.shape[0], 1.0 / X.shape[0])
        r = quadrature_residuals(X, w, t + 1)
        worst = float(np.max(np.abs(r[1 : t + 1]))) if t >= 1 else 0.0
        prefix = "ss" if sym else "sf"
        name = f"{prefix}{t:03d}.{X.shape[0]:05d}"
        header = (
            f"spherical {t}-design on S^2, {X.shape[0]} points"
            f"{' (antipodal pairs)' if sym else ''}\n"
            f"max equal-weight residual r_k, 1 <= k <= {t}: {worst:.3e}"
        )
        save_design(f"{args.out}/{name}", X, header=header)
        print(f"{name}: worst r_k={worst:.2e} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
