"""Numba kernels: multi-threat DMC, field evaluation and the MPC heading search.

Mirrors ``_kernels_numpy`` operation for operation; the two are checked against
each other in the test suite.
"""

import math

import numpy as np
from numba import njit

PI = math.pi
TWO_PI = 2.0 * math.pi
ALL_SAFE_HW = -1.0
ALL_UNSAFE_HW = 4.0
CLAMP_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_opts = dict(cache=True, nogil=True, fastmath=False)


@njit(**_opts)
def wrap(a):
    if -PI < a <= PI:
        return a
    return PI - ((PI - a) % TWO_PI)


@njit(**_opts)
def half_width(d, mu, R, r, stayout):
    """Unsafe-cone half-width for one threat at range d (sentinels for all-safe / all-unsafe)."""
    if d <= 0.0:
        return ALL_UNSAFE_HW
    mu_r = mu * R
    reach = R + r
    arg = (d * d + mu_r * mu_r - reach * reach) / (2.0 * mu_r * d)
    if arg > 1.0:
        if arg - 1.0 > CLAMP_TOL:
            return ALL_SAFE_HW
        arg = 1.0
    elif arg < -1.0:
        if -1.0 - arg > CLAMP_TOL:
            return ALL_UNSAFE_HW
        arg = -1.0
    if stayout and d >= math.sqrt(reach * reach + mu_r * mu_r):
        s = reach / d
        if s > 1.0:
            s = 1.0
        return math.asin(s)
    return math.acos(arg)


@njit(**_opts)
def rho(mu, R, r, xi):
    mu_r = mu * R
    c = math.cos(xi)
    q = (R + r) / mu_r
    return mu_r * (c + math.sqrt(c * c - 1.0 + q * q))


@njit(**_opts)
def dmc_point(x, y, psi, tx, ty, mu, R, r, stayout, xi_buf, hw_buf):
    """Signed multi-threat DMC at one state. Returns (value, safe_set_empty)."""
    n = tx.shape[0]
    up = 0.0
    dn = 0.0
    inside = False
    for i in range(n):
        dx = tx[i] - x
        dy = ty[i] - y
        d = math.sqrt(dx * dx + dy * dy)
        hw = half_width(d, mu[i], R[i], r[i], stayout)
        if hw > PI:
            return PI, True
        xi = wrap(psi - math.atan2(dy, dx))
        hw_buf[i] = hw
        xi_buf[i] = xi
        if hw >= 0.0 and abs(xi) < hw:
            inside = True
            if hw - xi > up:
                up = hw - xi
            if hw + xi > dn:
                dn = hw + xi
    if not inside:
        return 0.0, False
    # grow the connected unsafe component [-dn, up] around psi
    changed = True
    while changed:
        changed = False
        for i in range(n):
            hw = hw_buf[i]
            if hw < 0.0:
                continue
            for shift in (-TWO_PI, 0.0, TWO_PI):
                c = shift - xi_buf[i]
                lo = c - hw
                hi = c + hw
                if lo < up and hi > -dn:
                    if hi > up:
                        up = hi
                        changed = True
                    if -lo > dn:
                        dn = -lo
                        changed = True
        if up + dn >= TWO_PI:
            return PI, True
    if up <= dn:
        return up, False
    return -dn, False


@njit(**_opts)
def dmc_many(px, py, psi, tx, ty, mu, R, r, stayout):
    m = px.shape[0]
    out = np.empty(m)
    empty = np.zeros(m, dtype=np.bool_)
    xi_buf = np.empty(tx.shape[0])
    hw_buf = np.empty(tx.shape[0])
    for j in range(m):
        v, e = dmc_point(px[j], py[j], psi[j], tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
        out[j] = v
        empty[j] = e
    return out, empty


@njit(**_opts)
def inside_any_bez(px, py, psi, tx, ty, mu, R, r):
    m = px.shape[0]
    out = np.zeros(m, dtype=np.bool_)
    for j in range(m):
        for i in range(tx.shape[0]):
            dx = tx[i] - px[j]
            dy = ty[i] - py[j]
            d = math.sqrt(dx * dx + dy * dy)
            xi = wrap(psi[j] - math.atan2(dy, dx))
            if d <= rho(mu[i], R[i], r[i], xi):
                out[j] = True
                break
    return out


@njit(**_opts)
def clip_heading(x, y, psi, eps, tx, ty, mu, R, r, stayout, xi_buf, hw_buf):
    """Nearest heading to psi whose |DMC| <= eps; psi itself if the safe set is empty."""
    val, empty = dmc_point(x, y, psi, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
    if empty or abs(val) <= eps:
        return psi
    if val > 0.0:
        return wrap(psi + val - eps)
    return wrap(psi + val + eps)


@njit(**_opts)
def simple_replay(ax, ay, v, ts, gx, gy, eps, n, tx, ty, mu, R, r, stayout, psi0):
    seq = np.empty(n)
    xi_buf = np.empty(tx.shape[0])
    hw_buf = np.empty(tx.shape[0])
    x = ax
    y = ay
    prev = psi0
    step = v * ts
    for k in range(n):
        if math.hypot(gx - x, gy - y) > 1e-12:
            nom = math.atan2(gy - y, gx - x)
        else:
            nom = prev
        h = clip_heading(x, y, nom, eps, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
        seq[k] = h
        prev = h
        x += step * math.cos(h)
        y += step * math.sin(h)
    return seq


@njit(**_opts)
def _tail_cost(seq, k, x, y, pen, step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf):
    n = seq.shape[0]
    for j in range(k, n):
        g = math.hypot(x - gx, y - gy)
        if g <= step:
            # goal reached: credit the unused part of the horizon
            return g - (n - 1 - j) * step + weight * pen
        val, e = dmc_point(x, y, seq[j], tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
        viol = abs(val) - eps
        if viol > 0.0:
            pen += viol * viol
        if j < n - 1:
            x += step * math.cos(seq[j])
            y += step * math.sin(seq[j])
    return math.hypot(x - gx, y - gy) + weight * pen


@njit(**_opts)
def rollout(seq, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout):
    """Distance-to-go score, worst constraint excess and penalty sum of a heading sequence.

    The score is the terminal distance to the goal, or, when a sample comes
    within one step of the goal, that distance minus the travel left in the
    horizon. Samples after arrival are not constrained.
    """
    n = seq.shape[0]
    xi_buf = np.empty(tx.shape[0])
    hw_buf = np.empty(tx.shape[0])
    x = ax
    y = ay
    worst = -eps
    pen = 0.0
    step = v * ts
    for j in range(n):
        g = math.hypot(x - gx, y - gy)
        if g <= step:
            return g - (n - 1 - j) * step, worst, pen
        val, e = dmc_point(x, y, seq[j], tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
        viol = abs(val) - eps
        if viol > worst:
            worst = viol
        if viol > 0.0:
            pen += viol * viol
        if j < n - 1:
            x += step * math.cos(seq[j])
            y += step * math.sin(seq[j])
    return math.hypot(x - gx, y - gy), worst, pen


@njit(**_opts)
def descend(seq, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
            max_iter, n_golden, half, tol):
    """Coordinate-wise golden-section descent on the penalized horizon cost (in place)."""
    n = seq.shape[0]
    xi_buf = np.empty(tx.shape[0])
    hw_buf = np.empty(tx.shape[0])
    px = np.empty(n)
    py = np.empty(n)
    ppen = np.empty(n)
    step = v * ts
    cost = _tail_cost(seq, 0, ax, ay, 0.0, step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
    for _ in range(max_iter):
        before = cost
        # prefix states: position and accumulated penalty before sample k
        x = ax
        y = ay
        pen = 0.0
        for k in range(n):
            px[k] = x
            py[k] = y
            ppen[k] = pen
            if math.hypot(x - gx, y - gy) <= step:
                break  # later headings no longer matter
            x0 = seq[k]
            a = x0 - half
            b = x0 + half
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            seq[k] = c
            fc = _tail_cost(seq, k, px[k], py[k], ppen[k], step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
            seq[k] = d
            fd = _tail_cost(seq, k, px[k], py[k], ppen[k], step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
            for _g in range(n_golden):
                if fc < fd:
                    b = d
                    d = c
                    fd = fc
                    c = b - GOLDEN * (b - a)
                    seq[k] = c
                    fc = _tail_cost(seq, k, px[k], py[k], ppen[k], step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
                else:
                    a = c
                    c = d
                    fc = fd
                    d = a + GOLDEN * (b - a)
                    seq[k] = d
                    fd = _tail_cost(seq, k, px[k], py[k], ppen[k], step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
            cand = c if fc < fd else d
            seq[k] = wrap(cand)
            fnew = _tail_cost(seq, k, px[k], py[k], ppen[k], step, gx, gy, eps, weight, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
            if fnew < cost:
                cost = fnew
            else:
                seq[k] = x0
            # advance prefix with the accepted heading
            val, e = dmc_point(x, y, seq[k], tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
            viol = abs(val) - eps
            if viol > 0.0:
                pen += viol * viol
            x += step * math.cos(seq[k])
            y += step * math.sin(seq[k])
        if before - cost < tol:
            break
    return cost


@njit(**_opts)
def repair(seq, ax, ay, v, ts, eps, tx, ty, mu, R, r, stayout):
    """Clip every planned heading onto the eps-inflated safe set along the rollout (in place)."""
    xi_buf = np.empty(tx.shape[0])
    hw_buf = np.empty(tx.shape[0])
    x = ax
    y = ay
    step = v * ts
    for k in range(seq.shape[0]):
        seq[k] = clip_heading(x, y, seq[k], eps, tx, ty, mu, R, r, stayout, xi_buf, hw_buf)
        x += step * math.cos(seq[k])
        y += step * math.sin(seq[k])


@njit(**_opts)
def _better(feasible, cost, best_feasible, best_cost):
    if feasible != best_feasible:
        return feasible
    return cost < best_cost


@njit(**_opts)
def plan(starts, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
         max_iter, n_golden, half, tol, feas_tol):
    """Multi-start descent; returns (best sequence, penalized cost, start index).

    Each start contributes its descended sequence, that sequence clipped onto the
    safe set, and the untouched start. Feasible candidates beat infeasible ones,
    then lower cost wins; ties keep the earliest.
    """
    n_starts = starts.shape[0]
    best = starts[0].copy()
    best_cost = np.inf
    best_feasible = False
    best_idx = -1
    for s in range(n_starts):
        desc = starts[s].copy()
        descend(desc, ax, ay, v, ts, gx, gy, eps, weight, tx, ty, mu, R, r, stayout,
                max_iter, n_golden, half, tol)
        fixed = desc.copy()
        repair(fixed, ax, ay, v, ts, eps, tx, ty, mu, R, r, stayout)
        for c in range(3):
            if c == 0:
                cand = desc
            elif c == 1:
                cand = fixed
            else:
                cand = starts[s]
            dist, worst, pen = rollout(cand, ax, ay, v, ts, gx, gy, eps, tx, ty, mu, R, r, stayout)
            cost = dist + weight * pen
            feasible = worst <= feas_tol
            if best_idx < 0 or _better(feasible, cost, best_feasible, best_cost):
                best = cand.copy()
                best_cost = cost
                best_feasible = feasible
                best_idx = s
    return best, best_cost, best_idx
