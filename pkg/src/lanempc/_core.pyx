# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled prediction and cost kernels.

Mirrors lanempc._core_py operation for operation; compiled with
-ffp-contract=off so both backends return bit-identical floats.
"""

from libc.math cimport sin, cos, INFINITY

cdef double VX_FLOOR = 0.1
cdef int MAX_STEPS = 64

# Module attributes mirrored from the Python backend so callers can
# introspect either module interchangeably.
VX_FLOOR_PY = 0.1
MAX_STEPS_PY = 64


cdef int _predict_into(double vx, double vy, double r, double gx, double gy,
                       double psi, object controls, double m, double iz,
                       double lf, double lr, double caf, double car,
                       double rw, double dt, bint yaw_div_m, int n,
                       double *xa, double *ya, double *vxs, double *vys,
                       double *rs, double *psis, double *fcfs, double *fcrs,
                       double *vxgs, double *vygs) except -2:
    """Shared prediction chain; returns 0 on success, -1 on a speed-floor hit."""
    cdef int i
    cdef double d, tq, fcf, fcr, div, vx_n, vy_n, r_n, psi_n, vxg, vyg
    if vx < VX_FLOOR:
        return -1
    for i in range(n):
        d = controls[2 * i]
        tq = controls[2 * i + 1]
        fcf = -caf * ((vy + lf * r) / vx - d)
        fcr = -car * ((vy - lr * r) / vx)
        div = m if yaw_div_m else iz
        vx_n = vx + (vy * r - (2.0 / m) * (fcf * sin(d) - tq / rw)) * dt
        vy_n = vy + (-vx * r + (2.0 / m) * (fcf * cos(d) + fcr)) * dt
        r_n = r + ((2.0 / div) * (lf * fcf - lr * fcr)) * dt
        psi_n = psi + r * dt
        if vx_n < VX_FLOOR:
            return -1
        vxg = vx_n * cos(psi_n) - vy_n * sin(psi_n)
        vyg = vx_n * sin(psi_n) + vy_n * cos(psi_n)
        gx = gx + vxg * dt
        gy = gy + vyg * dt
        xa[i] = gx
        ya[i] = gy
        vxs[i] = vx_n
        vys[i] = vy_n
        rs[i] = r_n
        psis[i] = psi_n
        fcfs[i] = fcf
        fcrs[i] = fcr
        vxgs[i] = vxg
        vygs[i] = vyg
        vx = vx_n
        vy = vy_n
        r = r_n
        psi = psi_n
    return 0


def predict_steps(double vx, double vy, double r, double gx, double gy,
                  double psi, controls, double m, double iz, double lf,
                  double lr, double caf, double car, double rw, double dt,
                  bint yaw_div_m):
    """See lanempc._core_py.predict_steps; same contract, same values."""
    cdef int n = len(controls) // 2
    if n > MAX_STEPS:
        raise ValueError(f"horizon of {n} steps exceeds the cap of {MAX_STEPS}")
    cdef double xa[64]
    cdef double ya[64]
    cdef double vxs[64]
    cdef double vys[64]
    cdef double rs[64]
    cdef double psis[64]
    cdef double fcfs[64]
    cdef double fcrs[64]
    cdef double vxgs[64]
    cdef double vygs[64]
    cdef int rc = _predict_into(vx, vy, r, gx, gy, psi, controls, m, iz, lf,
                                lr, caf, car, rw, dt, yaw_div_m, n,
                                xa, ya, vxs, vys, rs, psis, fcfs, fcrs,
                                vxgs, vygs)
    if rc == -1:
        raise ValueError(
            f"longitudinal speed below floor {VX_FLOOR} in prediction chain")
    cdef int i
    return (tuple([xa[i] for i in range(n)]),
            tuple([ya[i] for i in range(n)]),
            tuple([vxs[i] for i in range(n)]),
            tuple([vys[i] for i in range(n)]),
            tuple([rs[i] for i in range(n)]),
            tuple([psis[i] for i in range(n)]),
            tuple([fcfs[i] for i in range(n)]),
            tuple([fcrs[i] for i in range(n)]),
            tuple([vxgs[i] for i in range(n)]),
            tuple([vygs[i] for i in range(n)]))


def trajectory_cost(xa, ya, rs, double r0, double dt, refs, xu, yu, xl, yl,
                    double a1, double b1, double b2, double b3, int diff_mode,
                    obs_pts, double obs_weight):
    """See lanempc._core_py.trajectory_cost; same contract, same values."""
    cdef int n = len(xa)
    cdef int n_obs = len(obs_pts) // 2
    cdef double j = 0.0
    cdef int i, o
    cdef double ex, ey, dx, dy, q, t, rp, rd, cxa, cya, tu, tl
    for i in range(n):
        cxa = xa[i]
        cya = ya[i]
        ex = cxa - refs[2 * i]
        ey = cya - refs[2 * i + 1]
        j += a1 * (ex * ex + ey * ey)
        # Boundary pair summed before accumulating; mirrored problems score
        # bit-identically.
        tu = 0.0
        if b1 != 0.0:
            dx = cxa - xu[i]
            dy = cya - yu[i]
            q = dx * dx + dy * dy
            if q == 0.0:
                return INFINITY
            t = 1.0 / q
            tu = b1 * (t * t)
        tl = 0.0
        if b2 != 0.0:
            dx = cxa - xl[i]
            dy = cya - yl[i]
            q = dx * dx + dy * dy
            if q == 0.0:
                return INFINITY
            t = 1.0 / q
            tl = b2 * (t * t)
        j += tu + tl
        if obs_weight != 0.0:
            for o in range(n_obs):
                dx = cxa - obs_pts[2 * o]
                dy = cya - obs_pts[2 * o + 1]
                q = dx * dx + dy * dy
                if q == 0.0:
                    return INFINITY
                t = 1.0 / q
                j += obs_weight * (t * t)
        if b3 != 0.0:
            rp = rs[i - 1] if i > 0 else r0
            if diff_mode == 1 and i + 1 < n:
                rd = (rs[i + 1] - rs[i]) / dt
            elif diff_mode == 2 and i + 1 < n:
                rd = (rs[i + 1] - rp) / (2.0 * dt)
            else:
                rd = (rs[i] - rp) / dt
            j += b3 * (rd * rd)
    return j


def horizon_cost(double vx, double vy, double r, double gx, double gy,
                 double psi, controls, double m, double iz, double lf,
                 double lr, double caf, double car, double rw, double dt,
                 bint yaw_div_m, refs, double y_upper, double y_lower,
                 double a1, double b1, double b2, double b3, int diff_mode,
                 obs_pts, double obs_weight):
    """See lanempc._core_py.horizon_cost; same contract, same values."""
    cdef int n = len(controls) // 2
    if n > MAX_STEPS:
        raise ValueError(f"horizon of {n} steps exceeds the cap of {MAX_STEPS}")
    cdef double xa[64]
    cdef double ya[64]
    cdef double vxs[64]
    cdef double vys[64]
    cdef double rs[64]
    cdef double psis[64]
    cdef double fcfs[64]
    cdef double fcrs[64]
    cdef double vxgs[64]
    cdef double vygs[64]
    cdef int rc = _predict_into(vx, vy, r, gx, gy, psi, controls, m, iz, lf,
                                lr, caf, car, rw, dt, yaw_div_m, n,
                                xa, ya, vxs, vys, rs, psis, fcfs, fcrs,
                                vxgs, vygs)
    if rc == -1:
        return INFINITY

    cdef int n_obs = len(obs_pts) // 2
    cdef double j = 0.0
    cdef int i, o
    cdef double ex, ey, dx, dy, q, t, rp, rd, tu, tl
    # Flat obstacle coordinates pulled out of the Python sequence once.
    cdef double obs_buf[32]
    if obs_weight != 0.0:
        if n_obs > 16:
            raise ValueError("too many obstacle repulsion points (max 16)")
        for o in range(2 * n_obs):
            obs_buf[o] = obs_pts[o]
    cdef double ref_buf[128]
    for i in range(2 * n):
        ref_buf[i] = refs[i]

    for i in range(n):
        ex = xa[i] - ref_buf[2 * i]
        ey = ya[i] - ref_buf[2 * i + 1]
        j += a1 * (ex * ex + ey * ey)
        # Abreast boundary sample: same x as the predicted point, so the
        # x-part of the squared distance is exactly zero.  Boundary pair
        # summed before accumulating; mirrored problems score
        # bit-identically.
        tu = 0.0
        if b1 != 0.0:
            dx = xa[i] - xa[i]
            dy = ya[i] - y_upper
            q = dx * dx + dy * dy
            if q == 0.0:
                return INFINITY
            t = 1.0 / q
            tu = b1 * (t * t)
        tl = 0.0
        if b2 != 0.0:
            dx = xa[i] - xa[i]
            dy = ya[i] - y_lower
            q = dx * dx + dy * dy
            if q == 0.0:
                return INFINITY
            t = 1.0 / q
            tl = b2 * (t * t)
        j += tu + tl
        if obs_weight != 0.0:
            for o in range(n_obs):
                dx = xa[i] - obs_buf[2 * o]
                dy = ya[i] - obs_buf[2 * o + 1]
                q = dx * dx + dy * dy
                if q == 0.0:
                    return INFINITY
                t = 1.0 / q
                j += obs_weight * (t * t)
        if b3 != 0.0:
            rp = rs[i - 1] if i > 0 else r
            if diff_mode == 1 and i + 1 < n:
                rd = (rs[i + 1] - rs[i]) / dt
            elif diff_mode == 2 and i + 1 < n:
                rd = (rs[i + 1] - rp) / (2.0 * dt)
            else:
                rd = (rs[i] - rp) / dt
            j += b3 * (rd * rd)
    return j
