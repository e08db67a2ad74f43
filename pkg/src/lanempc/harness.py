"""Closed-loop simulation and metrics.

Runs a scenario under either the integrated receding-horizon controller or
a two-level baseline (geometric plan, then a pure-pursuit tracker with a
proportional speed hold).  One run is strictly sequential; independent runs
share no state and may execute in parallel.

The baseline's internals are an editorial stand-in for "plan first, track
second" architectures: the planner is the same path construction, the
tracker knows nothing about the cost function.
"""

import math
from dataclasses import dataclass

from . import dynamics, kernels
from .dubins import (PathConstructionError, build_lane_change_path,
                     nearest_arclength, reference_for_horizon,
                     sample_reference)
from .mpc import shift_warm_start, solve_step, zero_sequence
from .scenario import min_obstacle_clearance

# Consecutive non-finite solves tolerated before a run aborts.
_MAX_FALLBACKS = 3

# Baseline defaults (editorial): lookahead distance (m) and proportional
# torque gain (N m per m/s of speed error).  The short lookahead makes the
# tracker tight enough to stay clear of obstacle boundaries at the cost of
# a visibly busier yaw response.
DEFAULT_LOOKAHEAD = 2.5
DEFAULT_SPEED_GAIN = 400.0


class SimulationAborted(RuntimeError):
    """A run stopped early; carries the partial log and the cause."""

    def __init__(self, cause, log):
        super().__init__(cause)
        self.cause = cause
        self.log = log


@dataclass(frozen=True)
class LogRow:
    t: float
    state: dynamics.VehicleState
    control: tuple          # (delta_f, Tr)
    cost: float
    ref_x: float
    ref_y: float
    clearance: float
    converged: bool


@dataclass(frozen=True)
class SimulationLog:
    rows: tuple
    dt: float
    controller: str

    @property
    def duration(self):
        return self.rows[-1].t if self.rows else 0.0


@dataclass(frozen=True)
class Metrics:
    rms_lateral_error: float
    max_lateral_error: float
    min_clearance: float
    yaw_smoothness: float        # sum dt * ((r_k - r_{k-1}) / dt)^2
    control_saturation_fraction: float


def _scenario_is_dynamic(scenario):
    return any(ob.is_moving for ob in scenario.obstacles)


def run(scenario, params, cfg, controller="integrated"):
    """Simulate a scenario closed-loop and return the SimulationLog.

    Static-obstacle runs plan the reference once; dynamic runs rebuild it
    every control step against predicted obstacle positions.  Raises
    SimulationAborted (with the partial log attached) on plant failure or
    persistent solver failure.
    """
    if controller == "two_level":
        return run_baseline_two_level(scenario, params, cfg)
    if controller != "integrated":
        raise ValueError(f"unknown controller {controller!r}")

    n_steps = int(round(scenario.duration / cfg.dt))
    dynamic = _scenario_is_dynamic(scenario)
    rows = []

    def abort(cause):
        raise SimulationAborted(
            cause, SimulationLog(tuple(rows), cfg.dt, "integrated"))

    state = scenario.ego_initial
    design_vx = scenario.ego_initial.vx
    path = build_lane_change_path(scenario, design_vx, params)
    warm = zero_sequence(cfg)
    fallbacks = 0
    for k in range(n_steps + 1):
        t = k * cfg.dt
        if dynamic and k > 0:
            try:
                # Rebuilt at the manoeuvre design speed: the arc radius and
                # arrival predictions stay consistent even as the actual
                # speed drifts (the cost has no speed setpoint).
                path = build_lane_change_path(scenario, design_vx, params,
                                              at_time=t, ego_x=state.X,
                                              ego_y=state.Y,
                                              predict_vx=state.vx)
            except PathConstructionError:
                # Transiently boxed in: drive the last feasible plan and let
                # the clearance metric judge the outcome.
                pass
        try:
            res = solve_step(state, scenario, path, params, cfg, warm,
                             at_time=t)
        except dynamics.LowSpeedError as exc:
            abort(f"predictor singular at t={t:.2f}: {exc}")
        fallbacks = fallbacks + 1 if res.fallback else 0
        if fallbacks >= _MAX_FALLBACKS:
            abort(f"solver produced no finite cost for {fallbacks} "
                  f"consecutive steps ending t={t:.2f}")
        clearance = min_obstacle_clearance((state.X, state.Y), t, scenario)
        rows.append(LogRow(t=t, state=state, control=res.u0, cost=res.cost,
                           ref_x=res.refs[0][0], ref_y=res.refs[0][1],
                           clearance=clearance, converged=res.converged))
        if k < n_steps:
            try:
                state = dynamics.step(
                    state, dynamics.ControlInput(*res.u0), params, cfg.dt)
            except (dynamics.LowSpeedError, dynamics.PlantFailureError) as exc:
                abort(f"plant failure at t={t:.2f}: {exc}")
        warm = shift_warm_start(res.sequence)
    return SimulationLog(tuple(rows), cfg.dt, "integrated")


def _pure_pursuit(state, path, params, lookahead):
    """Geometric steering toward a point `lookahead` metres up the path."""
    s0, _ = nearest_arclength(path, state.X, state.Y)
    s = min(s0 + lookahead, path.total_length)
    tx, ty, _, _ = sample_reference(path, s)
    alpha = math.atan2(ty - state.Y, tx - state.X) - state.psi
    alpha = (alpha + math.pi) % (2.0 * math.pi) - math.pi
    wheelbase = params.lf + params.lr
    return math.atan2(2.0 * wheelbase * math.sin(alpha), lookahead)


def run_baseline_two_level(scenario, params, cfg,
                           lookahead=DEFAULT_LOOKAHEAD,
                           speed_gain=DEFAULT_SPEED_GAIN):
    """Two-level baseline: plan the path, then track it.

    Level 1 is the same geometric construction (rebuilt per step for moving
    obstacles); level 2 is pure pursuit for steering plus a proportional
    torque holding the initial speed.  Controls are clipped to the same box
    as the integrated controller.  The logged cost is the integrated cost
    the chosen control would score, for side-by-side comparison.
    """
    n_steps = int(round(scenario.duration / cfg.dt))
    dynamic = _scenario_is_dynamic(scenario)
    rows = []

    def abort(cause):
        raise SimulationAborted(
            cause, SimulationLog(tuple(rows), cfg.dt, "two_level"))

    state = scenario.ego_initial
    vx_ref = state.vx
    path = build_lane_change_path(scenario, vx_ref, params)
    hc = None
    for k in range(n_steps + 1):
        t = k * cfg.dt
        if dynamic and k > 0:
            try:
                path = build_lane_change_path(scenario, vx_ref, params,
                                              at_time=t, ego_x=state.X,
                                              ego_y=state.Y,
                                              predict_vx=state.vx)
            except PathConstructionError:
                # Same stale-plan fallback as the integrated loop.
                pass
        delta = _pure_pursuit(state, path, params, lookahead)
        delta = min(cfg.delta_max, max(-cfg.delta_max, delta))
        torque = speed_gain * (vx_ref - state.vx)
        torque = min(cfg.Td_max, max(-cfg.Tb_max, torque))

        refs = reference_for_horizon(path, state, cfg.Np, cfg.dt)
        refs_flat = []
        for p in refs:
            refs_flat.append(p[0])
            refs_flat.append(p[1])
        hc = kernels.active().horizon_cost
        cost = hc(state.vx, state.vy, state.r, state.X, state.Y, state.psi,
                  [delta, torque] * cfg.Np, params.m, params.Iz, params.lf,
                  params.lr, params.Caf, params.Car, params.Rw, cfg.dt,
                  cfg.yaw_div_m, tuple(refs_flat),
                  scenario.road.upper_boundary_y,
                  scenario.road.lower_boundary_y,
                  cfg.a1, cfg.b1, cfg.b2, cfg.b3, cfg.diff_code,
                  (), 0.0)
        clearance = min_obstacle_clearance((state.X, state.Y), t, scenario)
        rows.append(LogRow(t=t, state=state, control=(delta, torque),
                           cost=cost, ref_x=refs[0][0], ref_y=refs[0][1],
                           clearance=clearance, converged=True))
        if k < n_steps:
            try:
                state = dynamics.step(
                    state, dynamics.ControlInput(delta, torque), params,
                    cfg.dt)
            except (dynamics.LowSpeedError, dynamics.PlantFailureError) as exc:
                abort(f"plant failure at t={t:.2f}: {exc}")
    return SimulationLog(tuple(rows), cfg.dt, "two_level")


def compute_metrics(log, path, scenario, cfg):
    """Metrics over a completed log, lateral error measured to the nearest
    point on the given reference path."""
    if not log.rows:
        raise ValueError("empty log")
    sq_sum = 0.0
    max_err = 0.0
    min_clear = math.inf
    smooth = 0.0
    saturated = 0
    prev_r = None
    for row in log.rows:
        _, err = nearest_arclength(path, row.state.X, row.state.Y)
        sq_sum += err * err
        if err > max_err:
            max_err = err
        if row.clearance < min_clear:
            min_clear = row.clearance
        if prev_r is not None:
            rate = (row.state.r - prev_r) / log.dt
            smooth += log.dt * rate * rate
        prev_r = row.state.r
        delta, torque = row.control
        if (abs(delta) >= cfg.delta_max or torque >= cfg.Td_max
                or torque <= -cfg.Tb_max):
            saturated += 1
    n = len(log.rows)
    return Metrics(rms_lateral_error=math.sqrt(sq_sum / n),
                   max_lateral_error=max_err,
                   min_clearance=min_clear,
                   yaw_smoothness=smooth,
                   control_saturation_fraction=saturated / n)
