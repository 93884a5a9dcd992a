"""Compiled path kernels: walk-on-spheres and Euler, both with argument tracking.

Random numbers come from a counter-based SplitMix64 stream keyed by
``(seed, path index)``, so every path is reproducible on its own and the
order in which paths are run does not matter.

Rule codes: 0 exit of a catalog domain (optionally tracking the argument
about 0), 1 continuous argument reaching ``phi_up`` or ``phi_down``, 2 first
hit of ``(-1, 1)`` outside the trivial homotopy class.
"""

import math

import numba as nb
import numpy as np

from ..geometry import _arc_s, contains_kernel, nearest_kernel

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
TWO_PI = 2.0 * math.pi

OK, ABANDONED = 0, 1


@nb.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


@nb.njit(cache=True)
def path_key(seed, path):
    return _mix(_mix(np.uint64(seed) + GOLDEN) ^ (np.uint64(path) * GOLDEN))


@nb.njit(cache=True)
def uniform(key, ctr):
    """Uniform on (0, 1) for draw number ``ctr`` of the stream ``key``."""
    z = _mix(key + (np.uint64(ctr) + np.uint64(1)) * GOLDEN)
    return ((z >> S11) + 0.5) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True)
def _darg(x, y, nx, ny):
    # principal change of argument from (x, y) to (nx, ny), both seen from 0
    return math.atan2(x * ny - y * nx, x * nx + y * ny)


@nb.njit(cache=True)
def _ray_dist(rho, delta):
    if delta >= 0.5 * math.pi:
        return rho
    return rho * math.sin(delta)


@nb.njit(cache=True)
def _homotopy_class(x, y, a1, a2, c2):
    """Winding classes about -1 and +1 the path would have at (x, 0), for |x| < 1."""
    sg = 1.0 if y >= 0.0 else -1.0
    s1 = a1 - math.atan2(y, x + 1.0)
    s2 = a2 + (sg * math.pi - math.atan2(y, x - 1.0))
    k1 = int(round(s1 / TWO_PI))
    k2 = int(round((s2 - c2) / TWO_PI))
    return k1, k2


@nb.njit(cache=True)
def _far_radius(rule, dcode, dp):
    """Radius of a circle enclosing the whole target, or 0 when the target is unbounded."""
    if rule == 2 or (rule == 0 and dcode == 8):
        return 4.0
    if rule == 0 and dcode == 1:
        return 4.0 * dp[0]
    return 0.0


@nb.njit(cache=True)
def _arg_factor(x, y, c):
    """Principal arg of ``1 - c/z``; for |z| > |c| it is continuous, so
    ``arg(z - c) = arg(z) + _arg_factor(z, c)`` along any path outside the disk."""
    q = x * x + y * y
    return math.atan2(c * y / q, 1.0 - c * x / q)


@nb.njit(cache=True)
def wos_paths(rule, dcode, dp, rp, track, x0, y0, eps, max_steps, seed, first, n,
              out_x, out_y, out_idx, out_s, out_w, out_steps, out_status):
    for p in range(n):
        key = path_key(seed, first + p)
        x, y = x0, y0
        ctr = 0
        a = math.atan2(y0, x0)
        a1 = math.atan2(y0, x0 + 1.0)
        a2 = math.atan2(y0, x0 - 1.0)
        c2 = math.pi if y0 >= 0.0 else -math.pi
        out_status[p] = ABANDONED
        out_idx[p] = -1
        far = _far_radius(rule, dcode, dp)
        lr = math.log(math.hypot(x0, y0)) if rule == 1 else 0.0
        extra = 0
        for step in range(max_steps):
            if far > 0.0:
                rho = math.hypot(x, y)
                if rho > 2.0 * far:
                    # exact jump to |z| = far: in log-polar coordinates the exterior
                    # is a half plane and the hit is Cauchy in the continuous angle
                    th = math.atan2(y, x)
                    dth = math.log(rho / far) * math.tan(math.pi * (uniform(key, ctr) - 0.5))
                    ctr += 1
                    nx = far * math.cos(th + dth)
                    ny = far * math.sin(th + dth)
                    a += dth
                    a1 += dth + _arg_factor(nx, ny, -1.0) - _arg_factor(x, y, -1.0)
                    a2 += dth + _arg_factor(nx, ny, 1.0) - _arg_factor(x, y, 1.0)
                    x, y = nx, ny
                    continue
            if rule == 0:
                if dcode == 7:
                    rho = math.hypot(x, y)
                    idx, s, d = 0, 0.0, 1.0 - rho
                    if d < eps:
                        s = _arc_s(x, y, 1.0)
                else:
                    idx, s, d = nearest_kernel(dcode, dp, x, y)
                if d < eps:
                    out_idx[p] = idx
                    out_s[p] = s
                    out_x[p] = x
                    out_y[p] = y
                    out_w[p] = a
                    out_status[p] = OK
                    out_steps[p] = step + extra
                    break
                r = d
                if track:
                    rho = math.hypot(x, y)
                    if rho <= 0.25 * d:
                        # close to 0 compared with the boundary: sphere steps in
                        # log-polar coordinates inside |z| < d/2, which lies in the
                        # domain; work with log|z| so deep excursions cannot underflow
                        lz = math.log(rho)
                        top = math.log(0.5 * d)
                        while lz <= top - math.log(2.0) and extra < max_steps:
                            R = top - lz
                            th = TWO_PI * uniform(key, ctr)
                            ctr += 1
                            lz += R * math.cos(th)
                            a += R * math.sin(th)
                            extra += 1
                        rho = math.exp(lz)
                        x = rho * math.cos(a)
                        y = rho * math.sin(a)
                        continue
                    r = min(r, rho)
            elif rule == 1:
                # state is (log |z|, continuous arg) so deep excursions cannot overflow
                gu = rp[0] - a
                gd = a - rp[1]
                g = min(gu, gd)
                # the targets are scale invariant, so the stop test is angular
                if g < eps:
                    if gu <= gd:
                        out_idx[p] = 0
                        phi = rp[0]
                    else:
                        out_idx[p] = 1
                        phi = rp[1]
                    sr = math.exp(lr) * math.cos(g)
                    out_s[p] = sr
                    out_x[p] = sr * math.cos(phi)
                    out_y[p] = sr * math.sin(phi)
                    out_w[p] = phi
                    out_status[p] = OK
                    out_steps[p] = step + extra
                    break
                th = TWO_PI * uniform(key, ctr)
                ctr += 1
                if g >= 0.5 * math.pi:
                    # both targets far in angle: sphere step in the log-polar plane,
                    # where they are straight lines at distance g
                    lr += g * math.cos(th)
                    a += g * math.sin(th)
                else:
                    # sphere step in the plane, in units of |z|
                    rr = min(_ray_dist(1.0, gu), _ray_dist(1.0, gd))
                    ux = math.cos(a) + rr * math.cos(th)
                    uy = math.sin(a) + rr * math.sin(th)
                    lr += math.log(math.hypot(ux, uy))
                    a += _darg(math.cos(a), math.sin(a), ux, uy)
                continue
            else:
                dm = math.hypot(x + 1.0, y)
                dq = math.hypot(x - 1.0, y)
                r = min(dm, dq)
                if abs(x) < 1.0:
                    k1, k2 = _homotopy_class(x, y, a1, a2, c2)
                    if k1 != 0 or k2 != 0:
                        if abs(y) < eps:
                            out_idx[p] = 0
                            out_s[p] = x
                            out_x[p] = x
                            out_y[p] = 0.0
                            out_w[p] = k1 + k2
                            out_status[p] = OK
                            out_steps[p] = step + extra
                            break
                        r = min(r, abs(y))
            th = TWO_PI * uniform(key, ctr)
            ctr += 1
            nx = x + r * math.cos(th)
            ny = y + r * math.sin(th)
            if rule == 2:
                a1 += _darg(x + 1.0, y, nx + 1.0, ny)
                a2 += _darg(x - 1.0, y, nx - 1.0, ny)
            elif rule == 1 or track:
                a += _darg(x, y, nx, ny)
            x, y = nx, ny
        if out_status[p] == ABANDONED:
            out_steps[p] = max_steps
            out_x[p] = x
            out_y[p] = y


@nb.njit(cache=True)
def _normal_pair(key, ctr):
    u1 = uniform(key, ctr)
    u2 = uniform(key, ctr + 1)
    rad = math.sqrt(-2.0 * math.log(u1))
    return rad * math.cos(TWO_PI * u2), rad * math.sin(TWO_PI * u2)


@nb.njit(cache=True)
def _exit_crossing(dcode, dp, x, y, nx, ny):
    """Point where the step (x, y) -> (nx, ny) leaves the domain, or t = -1."""
    if dcode == 8 or dcode == 9:
        if (y > 0.0 and ny > 0.0) or (y < 0.0 and ny < 0.0) or y == ny:
            return -1.0, 0.0, 0.0
        t = y / (y - ny)
        xc = x + t * (nx - x)
        hit = abs(xc) <= 1.0 if dcode == 8 else abs(xc) >= 1.0
        if hit:
            return t, xc, 0.0
        return -1.0, 0.0, 0.0
    if contains_kernel(dcode, dp, nx, ny):
        return -1.0, 0.0, 0.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if contains_kernel(dcode, dp, x + mid * (nx - x), y + mid * (ny - y)):
            lo = mid
        else:
            hi = mid
    return hi, x + hi * (nx - x), y + hi * (ny - y)


@nb.njit(cache=True)
def euler_paths(rule, dcode, dp, rp, track, x0, y0, h, max_steps, seed, first, n,
                out_x, out_y, out_idx, out_s, out_w, out_steps, out_status):
    """Gaussian steps of variance ``h c(z)^2`` per coordinate.

    ``c`` is 1 for plain exits, ``min(1, |z|)`` when tracking the argument about 0,
    ``|z|`` for argument rules and ``min(1, |z -+ 1|)`` for the homotopy rule.
    A position-dependent step is a time change and leaves the stopping law unchanged.
    """
    sq = math.sqrt(h)
    for p in range(n):
        key = path_key(seed, first + p)
        x, y = x0, y0
        ctr = 0
        a = math.atan2(y0, x0)
        a1 = math.atan2(y0, x0 + 1.0)
        a2 = math.atan2(y0, x0 - 1.0)
        c2 = math.pi if y0 >= 0.0 else -math.pi
        out_status[p] = ABANDONED
        out_idx[p] = -1
        for step in range(max_steps):
            if rule == 0:
                c = min(1.0, math.hypot(x, y)) if track else 1.0
            elif rule == 1:
                c = math.hypot(x, y)
            else:
                c = min(1.0, math.hypot(x + 1.0, y), math.hypot(x - 1.0, y))
            g1, g2 = _normal_pair(key, ctr)
            ctr += 2
            nx = x + sq * c * g1
            ny = y + sq * c * g2
            if rule == 0:
                t, xc, yc = _exit_crossing(dcode, dp, x, y, nx, ny)
                if t >= 0.0:
                    if track:
                        a += _darg(x, y, xc, yc)
                    if dcode == 7:
                        idx, s = 0, _arc_s(xc, yc, 1.0)
                    else:
                        idx, s, d = nearest_kernel(dcode, dp, xc, yc)
                    out_idx[p] = idx
                    out_s[p] = s
                    out_x[p] = xc
                    out_y[p] = yc
                    out_w[p] = a
                    out_status[p] = OK
                    out_steps[p] = step + 1
                    break
                if track:
                    a += _darg(x, y, nx, ny)
            elif rule == 1:
                da = _darg(x, y, nx, ny)
                na = a + da
                hit = -1
                if na >= rp[0]:
                    hit, phi = 0, rp[0]
                elif na <= rp[1]:
                    hit, phi = 1, rp[1]
                if hit >= 0:
                    t = (phi - a) / da
                    sr = math.hypot(x + t * (nx - x), y + t * (ny - y))
                    out_idx[p] = hit
                    out_s[p] = sr
                    out_x[p] = sr * math.cos(phi)
                    out_y[p] = sr * math.sin(phi)
                    out_w[p] = phi
                    out_status[p] = OK
                    out_steps[p] = step + 1
                    break
                a = na
            else:
                if (y >= 0.0) != (ny >= 0.0):
                    t = y / (y - ny)
                    xc = x + t * (nx - x)
                    if abs(xc) < 1.0:
                        k1, k2 = _homotopy_class(x, y, a1, a2, c2)
                        if k1 != 0 or k2 != 0:
                            out_idx[p] = 0
                            out_s[p] = xc
                            out_x[p] = xc
                            out_y[p] = 0.0
                            out_w[p] = k1 + k2
                            out_status[p] = OK
                            out_steps[p] = step + 1
                            break
                a1 += _darg(x + 1.0, y, nx + 1.0, ny)
                a2 += _darg(x - 1.0, y, nx - 1.0, ny)
            x, y = nx, ny
        if out_status[p] == ABANDONED:
            out_steps[p] = max_steps
            out_x[p] = x
            out_y[p] = y
