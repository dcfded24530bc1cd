"""Independent reference computations used to cross-check the solver.

Everything here is deliberately slow and simple: dense grids over the
active-constraint sphere for the euclidean problem, exhaustive basic-point
enumeration for the polyhedral ones. Nothing is shared with the package
internals, so an agreement is evidence rather than tautology.
"""

import itertools

import numpy as np

FEAS_TOL = 1e-9


def vertex_minimize(c, g, h, feas_tol=FEAS_TOL):
    """Minimize c.x over {x : G x <= h} by enumerating basic feasible points.

    Assumes the polyhedron is pointed and the optimum is attained, which
    holds for every program built in this module. Returns the optimal value.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    c = np.asarray(c, dtype=float)
    m, k = g.shape
    best = None
    for rows in itertools.combinations(range(m), k):
        sub = g[list(rows)]
        try:
            x = np.linalg.solve(sub, h[list(rows)])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if np.all(g @ x <= h + feas_tol):
            val = float(c @ x)
            if best is None or val < best:
                best = val
    if best is None:
        raise AssertionError("vertex enumeration found no feasible basic point")
    return best


def lp_min_norm(a, x0, eps, kind):
    """Optimal d for: minimize ||z|| s.t. ||A z - x0|| <= eps, polyhedral norms.

    kind is "l1" or "linf"; the same norm is used for the objective and the
    constraint ball, matching the one-norm-per-space convention.
    """
    a = np.asarray(a, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = a.shape[0]
    eye = np.eye(d)
    zero = np.zeros((d, d))
    if kind == "linf":
        col = np.ones((d, 1))
        g = np.vstack([
            np.hstack([eye, -col]),    # z_i - t <= 0
            np.hstack([-eye, -col]),   # -z_i - t <= 0
            np.hstack([a, 0.0 * col]),     # (A z)_i <= x0_i + eps
            np.hstack([-a, 0.0 * col]),    # -(A z)_i <= -x0_i + eps
        ])
        h = np.concatenate([np.zeros(2 * d), x0 + eps, -x0 + eps])
        c = np.zeros(d + 1)
        c[d] = 1.0
    elif kind == "l1":
        # variables (z, s, u): s dominates |z|, u dominates |A z - x0|,
        # and the l1 constraint ball becomes sum(u) <= eps
        ones_row = np.concatenate([np.zeros(2 * d), np.ones(d)])
        g = np.vstack([
            np.hstack([eye, -eye, zero]),    # z_i - s_i <= 0
            np.hstack([-eye, -eye, zero]),   # -z_i - s_i <= 0
            np.hstack([a, zero, -eye]),      # (A z)_i - u_i <= x0_i
            np.hstack([-a, zero, -eye]),     # -(A z)_i - u_i <= -x0_i
            ones_row[None, :],
        ])
        h = np.concatenate([np.zeros(2 * d), x0, -x0, [eps]])
        c = np.concatenate([np.zeros(d), np.ones(d), np.zeros(d)])
    else:
        raise ValueError(f"not a polyhedral norm: {kind!r}")
    return vertex_minimize(c, g, h)


def _sphere(theta, phi=None):
    if phi is None:
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return np.stack([
        np.sin(phi) * np.cos(theta),
        np.sin(phi) * np.sin(theta),
        np.cos(phi),
    ], axis=-1)


def grid_min_norm_l2(a, x0, eps, coarse=720, rounds=3, keep=3):
    """Optimal d for the euclidean problem in dimension 2 or 3 by grid search.

    When the optimum is positive the ball constraint is active, so the
    minimizer has the form y = A^{-1}(x0 + eps u) with u on the unit sphere.
    A dense coarse grid is refined around the few best directions.
    """
    a = np.asarray(a, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = a.shape[0]
    inv = np.linalg.inv(a)

    def values(u):
        return np.linalg.norm((x0 + eps * u) @ inv.T, axis=-1)

    if d == 2:
        theta = np.linspace(0.0, 2.0 * np.pi, coarse, endpoint=False)
        vals = values(_sphere(theta))
        order = np.argsort(vals)[:keep]
        best = np.inf
        width = 2.0 * np.pi / coarse
        for idx in order:
            centre, w = theta[idx], width
            for _ in range(rounds):
                local = np.linspace(centre - 2.5 * w, centre + 2.5 * w, coarse)
                lv = values(_sphere(local))
                j = int(np.argmin(lv))
                centre, w = local[j], 5.0 * w / coarse
                best = min(best, float(lv[j]))
        return best
    if d == 3:
        nt, np_ = 181, 91
        theta = np.linspace(0.0, 2.0 * np.pi, nt, endpoint=False)
        phi = np.linspace(0.0, np.pi, np_)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        vals = values(_sphere(tt.ravel(), pp.ravel()))
        order = np.argsort(vals)[:keep]
        best = np.inf
        wt, wp = 2.0 * np.pi / nt, np.pi / (np_ - 1)
        for flat in order:
            ct, cp = tt.ravel()[flat], pp.ravel()[flat]
            w1, w2 = wt, wp
            for _ in range(rounds):
                lt = np.linspace(ct - 2.5 * w1, ct + 2.5 * w1, nt)
                lp = np.linspace(cp - 2.5 * w2, cp + 2.5 * w2, np_)
                gt, gp = np.meshgrid(lt, lp, indexing="ij")
                lv = values(_sphere(gt.ravel(), gp.ravel()))
                j = int(np.argmin(lv))
                ct, cp = gt.ravel()[j], gp.ravel()[j]
                w1, w2 = 5.0 * w1 / nt, 5.0 * w2 / np_
                best = min(best, float(lv[j]))
        return best
    raise ValueError(f"grid oracle only covers dimensions 2 and 3, got {d}")
