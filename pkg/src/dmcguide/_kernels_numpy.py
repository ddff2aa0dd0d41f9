"""Pure-numpy kernels, vectorized over evaluation points (and over MPC starts).

Same contracts as ``_kernels_numba``.
"""

import math

import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi
ALL_SAFE_HW = -1.0
ALL_UNSAFE_HW = 4.0
CLAMP_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def wrap(a):
    a = np.asarray(a, dtype=float)
    return np.where((a > -PI) & (a <= PI), a, PI - np.mod(PI - a, TWO_PI))


def half_width(d, mu, R, r, stayout):
    d, mu, R, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d, mu, R, r)))
    mu_r = mu * R
    reach = R + r
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (d * d + mu_r * mu_r - reach * reach) / (2.0 * mu_r * d)
        out = np.arccos(np.clip(arg, -1.0, 1.0))
        if stayout:
            tangent = d >= np.sqrt(reach * reach + mu_r * mu_r)
            out = np.where(tangent, np.arcsin(np.minimum(reach / d, 1.0)), out)
    out = np.where(arg - 1.0 > CLAMP_TOL, ALL_SAFE_HW, out)
    out = np.where((-1.0 - arg > CLAMP_TOL) | (d <= 0.0), ALL_UNSAFE_HW, out)
    return out


def rho(mu, R, r, xi):
    mu_r = mu * R
    c = np.cos(xi)
    q = (R + r) / mu_r
    return mu_r * (c + np.sqrt(c * c - 1.0 + q * q))


def _geometry(px, py, psi, tx, ty):
    dx = tx[None, :] - px[:, None]
    dy = ty[None, :] - py[:, None]
    d = np.sqrt(dx * dx + dy * dy)
    xi = wrap(psi[:, None] - np.arctan2(dy, dx))
    return d, xi


def dmc_many(px, py, psi, tx, ty, mu, R, r, stayout):
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    psi = np.asarray(psi, dtype=float)
    m = px.shape[0]
    n = tx.shape[0]
    if n == 0:
        return np.zeros(m), np.zeros(m, dtype=bool)
    d, xi = _geometry(px, py, psi, tx, ty)
    hw = half_width(d, mu[None, :], R[None, :], r[None, :], stayout)
    valid = hw >= 0.0
    inside = valid & (np.abs(xi) < hw)
    up = np.max(np.where(inside, hw - xi, 0.0), axis=1)
    dn = np.max(np.where(inside, hw + xi, 0.0), axis=1)
    # grow the unsafe component around psi; n passes reach the fixed point
    for _ in range(n):
        for i in range(n):
            for shift in (-TWO_PI, 0.0, TWO_PI):
                c = shift - xi[:, i]
                lo = c - hw[:, i]
                hi = c + hw[:, i]
                hit = valid[:, i] & (lo < up) & (hi > -dn)
                up = np.where(hit, np.maximum(up, hi), up)
                dn = np.where(hit, np.maximum(dn, -lo), dn)
    any_inside = inside.any(axis=1)
    empty = (hw > PI).any(axis=1) | (any_inside & (up + dn >= TWO_PI))
    value = np.where(up <= dn, up, -dn)
    value = np.where(any_inside, value, 0.0)
    value = np.where(empty, PI, value)
    return value, empty


def inside_any_bez(px, py, psi, tx, ty, mu, R, r):
    px = np.asarray(px, dtype=float)
    if tx.shape[0] == 0:
        return np.zeros(px.shape[0], dtype=bool)
    d, xi = _geometry(px, np.asarray(py, float), np.asarray(psi, float), tx, ty)
    return (d <= rho(mu[None, :], R[None, :], r[None, :], xi)).any(axis=1)


def clip_heading(px, py, psi, eps, tx, ty, mu, R, r, stayout):
    val, empty = dmc_many(px, py, psi, tx, ty, mu, R, r, stayout)
    clipped = wrap(psi + val - np.sign(val) * eps)
    keep = empty | (np.abs(val) <= eps)
    return np.where(keep, psi, clipped)


def simple_replay(ax, ay, v, ts, gx, gy, eps, n, tx, ty, mu, R, r, stayout, psi0):
    seq = np.empty(n)
    x, y, prev = ax, ay, psi0
    step = v * ts
    for k in range(n):
        nom = math.atan2(gy - y, gx - x) if math.hypot(gx - x, gy - y) > 1e-12 else prev
        h = float(clip_heading(np.array([x]), np.array([y]), np.array([nom]), eps,
                               tx, ty, mu, R, r, stayout)[0])
        seq[k] = h
        prev = h
        x += step * math.cos(h)
        y += step * math.sin(h)
    return seq


def _positions(seqs, ax, ay, step):
    """Sample positions (S, n) for heading sequences (S, n); sequential sums like the scalar path."""
    s, n = seqs.shape
    dx = np.empty((s, n))
    dy = np.empty((s, n))
    dx[:, 0] = ax
    dy[:, 0] = ay
    dx[:, 1:] = step * np.cos(seqs[:, :-1])
    dy[:, 1:] = step * np.sin(seqs[:, :-1])
    return np.cumsum(dx, axis=1), np.cumsum(dy, axis=1)


def _evaluate(seqs, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout):
    step = v * ts
    n = seqs.shape[1]
    x, y = _positions(seqs, ax, ay, step)
    g = np.hypot(x - gx, y - gy)
    near = g <= step
    arrived = near.any(axis=1)
    first = np.where(arrived, np.argmax(near, axis=1), n)
    live = np.arange(n)[None, :] < first[:, None]
    val, _ = dmc_many(x.ravel(), y.ravel(), seqs.ravel(), tx, ty, mu, R, r, stayout)
    viol = np.where(live, np.abs(val).reshape(seqs.shape) - eps, -eps)
    pen = np.where(viol > 0.0, viol * viol, 0.0).sum(axis=1)
    at = np.minimum(first, n - 1)
    g_first = g[np.arange(seqs.shape[0]), at]
    dist = np.where(arrived, g_first - (n - 1 - at) * step, g[:, -1])
    return dist, viol.max(axis=1), pen


def rollout(seq, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout):
    dist, worst, pen = _evaluate(np.asarray(seq, float)[None, :], ax, ay, v, ts, gx, gy, eps,
                                 tx, ty, mu, R, r, stayout)
    return float(dist[0]), float(worst[0]), float(pen[0])


def descend_batch(seqs, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
                  max_iter, n_golden, half, tol):
    """Coordinate-wise golden-section descent on every row of ``seqs`` (in place)."""

    def cost(rows):
        dist, _, pen = _evaluate(rows, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout)
        return dist + weight * pen

    n_rows, n = seqs.shape
    costs = cost(seqs)
    active = np.ones(n_rows, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        work = seqs[idx]
        cur = costs[idx]
        before = cur.copy()
        for k in range(n):
            x0 = work[:, k].copy()
            a = x0 - half
            b = x0 + half
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            work[:, k] = c
            fc = cost(work)
            work[:, k] = d
            fd = cost(work)
            for _g in range(n_golden):
                left = fc < fd
                b = np.where(left, d, b)
                a = np.where(left, a, c)
                new_c = np.where(left, b - GOLDEN * (b - a), d)
                new_d = np.where(left, c, a + GOLDEN * (b - a))
                c, d = new_c, new_d
                work[:, k] = np.where(left, c, d)
                f = cost(work)
                fc, fd = np.where(left, f, fd), np.where(left, fc, f)
            work[:, k] = wrap(np.where(fc < fd, c, d))
            fnew = cost(work)
            better = fnew < cur
            cur = np.where(better, fnew, cur)
            work[:, k] = np.where(better, work[:, k], x0)
        seqs[idx] = work
        costs[idx] = cur
        active[idx] = (before - cur) >= tol
    return costs


def repair(seq, ax, ay, v, ts, eps, tx, ty, mu, R, r, stayout):
    x, y = ax, ay
    step = v * ts
    for k in range(seq.shape[0]):
        seq[k] = clip_heading(np.array([x]), np.array([y]), np.array([seq[k]]), eps,
                              tx, ty, mu, R, r, stayout)[0]
        x += step * math.cos(seq[k])
        y += step * math.sin(seq[k])


def plan(starts, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
         max_iter, n_golden, half, tol, feas_tol):
    seqs = np.array(starts, dtype=float, copy=True)
    descend_batch(seqs, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
                  max_iter, n_golden, half, tol)
    best, best_key, best_idx = None, None, -1
    for s in range(seqs.shape[0]):
        fixed = seqs[s].copy()
        repair(fixed, ax, ay, v, ts, eps, tx, ty, mu, R, r, stayout)
        for cand in (seqs[s], fixed, np.asarray(starts[s], dtype=float)):
            dist, worst, pen = rollout(cand, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout)
            key = (worst > feas_tol, dist + weight * pen)
            if best_key is None or key < best_key:
                best, best_key, best_idx = cand.copy(), key, s
    return best, best_key[1], best_idx
