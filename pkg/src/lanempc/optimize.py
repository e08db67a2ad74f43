"""Deterministic derivative-free minimization over a box.

Projected gradient descent with central finite-difference gradients and a
backtracking line search, followed by a coordinate pattern-search polish.
No randomness anywhere: identical inputs give identical iterates, and the
returned point never scores worse than the start.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoxResult:
    x: tuple
    fun: float
    converged: bool
    iterations: int
    n_eval: int


def fd_gradient(f, x, steps):
    """Central finite-difference gradient with per-coordinate steps."""
    g = []
    xs = list(x)
    for j, h in enumerate(steps):
        if h == 0.0:
            g.append(0.0)
            continue
        orig = xs[j]
        xs[j] = orig + h
        fp = f(xs)
        xs[j] = orig - h
        fm = f(xs)
        xs[j] = orig
        g.append((fp - fm) / (2.0 * h))
    return g


def minimize_box(f, lower, upper, x0, tol=1e-9, max_iter=100,
                 fd_step=1e-6, pattern_tol=1e-7, max_sweeps=400):
    """Minimize f over the box [lower, upper] starting from x0.

    f takes a sequence of floats and returns a float (+inf is treated as
    "reject").  fd_step and pattern_tol are fractions of each coordinate's
    span.  Returns a BoxResult whose x is exactly inside the box (clipping,
    not tolerance) and whose fun never exceeds f(x0).  converged is False
    when an iteration or sweep budget stopped the search.
    """
    n = len(x0)
    if len(lower) != n or len(upper) != n:
        raise ValueError("lower/upper/x0 lengths differ")
    for j in range(n):
        if lower[j] > upper[j]:
            raise ValueError(f"lower[{j}] > upper[{j}]")
    span = [upper[j] - lower[j] for j in range(n)]

    evals = 0

    def call(xs):
        nonlocal evals
        evals += 1
        return f(xs)

    def clip(v, j):
        return min(upper[j], max(lower[j], v))

    x = [clip(x0[j], j) for j in range(n)]
    fx = call(x)
    if not math.isfinite(fx):
        return BoxResult(tuple(x), fx, False, 0, evals)

    steps = [fd_step * span[j] for j in range(n)]
    iterations = 0
    hit_iter_cap = False
    while True:
        if iterations >= max_iter:
            hit_iter_cap = True
            break
        iterations += 1
        g = fd_gradient(call, x, steps)
        gmax = 0.0
        for j in range(n):
            scaled = abs(g[j]) * span[j]
            if scaled > gmax:
                gmax = scaled
        if gmax == 0.0 or not math.isfinite(gmax):
            break
        t = 1.0 / gmax
        f_before = fx
        accepted = False
        for _ in range(45):
            xt = [clip(x[j] - t * g[j] * span[j] * span[j], j)
                  for j in range(n)]
            if xt == x:
                t *= 0.5
                continue
            ft = call(xt)
            dec = 0.0
            for j in range(n):
                dec += g[j] * (xt[j] - x[j])
            if math.isfinite(ft) and ft < fx and ft <= fx + 1e-4 * dec:
                x, fx = xt, ft
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        if f_before - fx <= tol * (1.0 + abs(fx)):
            break

    # Pattern polish: try +/- h*span on each coordinate, keep the better
    # strict improvement, halve h when a full sweep makes no progress.
    h = 0.1
    sweeps = 0
    while h >= pattern_tol and sweeps < max_sweeps:
        sweeps += 1
        improved = False
        for j in range(n):
            if span[j] == 0.0:
                continue
            step = h * span[j]
            best_f = fx
            best_x = None
            for s in (step, -step):
                xj = clip(x[j] + s, j)
                if xj == x[j]:
                    continue
                xt = list(x)
                xt[j] = xj
                ft = call(xt)
                if ft < best_f:
                    best_f = ft
                    best_x = xt
            if best_x is not None:
                x, fx = best_x, best_f
                improved = True
        if not improved:
            h *= 0.5
    converged = (h < pattern_tol) and not hit_iter_cap
    return BoxResult(tuple(x), fx, converged, iterations, evals)
