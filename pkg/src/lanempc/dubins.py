"""Arc-line lane-change reference paths.

Builds the avoidance reference for a straight two-lane road: drive the home
lane centreline, swerve to the adjacent centreline with a pair of tangent
maximum-lateral-acceleration arcs, pass the blocking traffic, and swerve
back.  Obstacles in the home lane force swerves; obstacles in the adjacent
lane bound how long the vehicle may stay there.  Moving obstacles are frozen
at the position they will occupy when the ego is predicted to reach them
(constant-speed time-of-arrival estimate), so rebuilding the path every
control step tracks dynamic traffic.

This is deliberately *not* a general shortest-path planner between arbitrary
poses; only the lane-change family is constructed.  Paths are immutable and
all queries are pure.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

from .scenario import (Rect, obstacle_boundary_at, obstacle_pose_at,
                       rect_signed_distance)

# Extra clearance (m) the construction keeps beyond each obstacle's inflated
# rectangle, absorbing closed-loop tracking error.
DEFAULT_CORNER_MARGIN = 0.8

# Minimum straight driven on the adjacent centreline before swerving back
# (m); keeps the pass from degenerating to a single touch point.
MIN_PLATEAU = 4.0

# Straight diagonal (m) inserted between the two arcs of a lane change.
# Splitting the curvature reversal into two steps separated by this run
# roughly halves the yaw-acceleration burden of tracking the change.
MID_STRAIGHT = 5.0

# Longitudinal room (m) appended past the last manoeuvre so horizon queries
# near the end of the run stay on the path.
_TAIL = 30.0

# Spacing (m) of the post-construction validation sweep.
_VALIDATE_DS = 0.05


class PathConstructionError(ValueError):
    """The obstacle layout leaves no room for the lane-change geometry."""


@dataclass(frozen=True)
class PathSegment:
    """One straight line or circular arc of the reference chain.

    Lines carry a heading; arcs carry centre, radius, turn direction
    (+1 counter-clockwise, -1 clockwise), the angle of the start point seen
    from the centre, and the signed sweep (direction * |sweep|).
    """

    kind: str
    start: tuple
    end: tuple
    length: float
    heading: float = 0.0
    centre: tuple = (0.0, 0.0)
    radius: float = 0.0
    direction: int = 0
    start_angle: float = 0.0
    sweep: float = 0.0


@dataclass(frozen=True)
class ReferencePath:
    segments: tuple
    waypoints: tuple
    total_length: float
    offsets: tuple  # cumulative arclength at each segment start
    # Speed the geometry was designed for; horizon references advance at
    # this pace (0.0 = advance at the ego's current speed instead).
    design_speed: float = 0.0

    def waypoint_labels(self):
        return tuple(f"P{i}" for i in range(len(self.waypoints)))


def min_turn_radius(vx, params):
    """Radius of the maximum-lateral-acceleration circle at speed vx."""
    return vx * vx / (params.mu * params.g)


# -- arclength <-> pose queries ----------------------------------------------

def _sample_segment(seg, s):
    if seg.kind == "line":
        f = s / seg.length if seg.length > 0.0 else 0.0
        x = seg.start[0] + f * (seg.end[0] - seg.start[0])
        y = seg.start[1] + f * (seg.end[1] - seg.start[1])
        return x, y, seg.heading, 0.0
    phi = seg.start_angle + seg.direction * (s / seg.radius)
    x = seg.centre[0] + seg.radius * math.cos(phi)
    y = seg.centre[1] + seg.radius * math.sin(phi)
    heading = phi + seg.direction * (math.pi / 2.0)
    return x, y, heading, seg.direction / seg.radius


def sample_reference(path, s):
    """Pose on the path at arclength s: (x, y, heading, curvature).

    Curvature is 0 on lines and signed 1/radius on arcs (positive turning
    left).  s outside [0, total_length] raises ValueError.
    """
    if not 0.0 <= s <= path.total_length:
        raise ValueError(
            f"arclength {s!r} outside [0, {path.total_length!r}]")
    i = bisect_right(path.offsets, s) - 1
    i = min(i, len(path.segments) - 1)
    return _sample_segment(path.segments[i], s - path.offsets[i])


def _nearest_on_segment(seg, px, py):
    """(distance^2, local arclength) of the nearest point on one segment."""
    if seg.kind == "line":
        ax, ay = seg.start
        bx, by = seg.end
        vx, vy = bx - ax, by - ay
        denom = vx * vx + vy * vy
        if denom == 0.0:
            f = 0.0
        else:
            f = ((px - ax) * vx + (py - ay) * vy) / denom
            f = min(1.0, max(0.0, f))
        nx, ny = ax + f * vx, ay + f * vy
        return (px - nx) ** 2 + (py - ny) ** 2, f * seg.length
    # Arc: clamp the polar angle of the query point into the swept interval.
    beta = math.atan2(py - seg.centre[1], px - seg.centre[0])
    rel = seg.direction * (beta - seg.start_angle)
    rel = rel % (2.0 * math.pi)
    span = abs(seg.sweep)
    if rel <= span:
        local = rel * seg.radius
    else:
        # Outside the arc: nearer endpoint (gap midpoint decides).
        local = 0.0 if rel - span > (2.0 * math.pi - rel) else span * seg.radius
    x, y, _, _ = _sample_segment(seg, local)
    return (px - x) ** 2 + (py - y) ** 2, local


def nearest_arclength(path, px, py):
    """Arclength of the nearest path point to (px, py), plus the distance."""
    best_d2 = math.inf
    best_s = 0.0
    for seg, off in zip(path.segments, path.offsets):
        d2, local = _nearest_on_segment(seg, px, py)
        if d2 < best_d2:
            best_d2 = d2
            best_s = off + local
    return best_s, math.sqrt(best_d2)


def reference_for_horizon(path, ego, n_steps, dt):
    """Reference points ahead of the ego's path projection.

    For i = 1..n_steps the point at (nearest arclength) + i * dt * v,
    clamped to the path end, where v is the path's design speed (the
    timetable pace the geometry was planned at) or the ego's current speed
    for paths that carry none.  Returns a tuple of (x, y) pairs.
    """
    v = path.design_speed if path.design_speed > 0.0 else ego.vx
    s0, _ = nearest_arclength(path, ego.X, ego.Y)
    out = []
    for i in range(1, n_steps + 1):
        s = s0 + i * dt * v
        if s > path.total_length:
            s = path.total_length
        x, y, _, _ = sample_reference(path, s)
        out.append((x, y))
    return tuple(out)


# -- construction -------------------------------------------------------------

def _change_geometry(radius, h, diag):
    """Turn angle and longitudinal span of an arc-line-arc lane change.

    The two radius-R arcs turn to heading theta with a straight of length
    diag between them; lateral offset: 2R(1-cos theta) + diag sin theta = h.
    """
    c = math.hypot(2.0 * radius, diag)
    arg = (2.0 * radius - h) / c
    if not -1.0 <= arg <= 1.0:
        raise PathConstructionError(
            f"turn radius {radius:.3f} m too small for a {h:.3f} m lane "
            "offset")
    theta = math.acos(arg) - math.atan2(diag, 2.0 * radius)
    if theta <= 0.0 or theta >= 0.5 * math.pi:
        raise PathConstructionError(
            f"turn radius {radius:.3f} m too small for a {h:.3f} m lane "
            "offset")
    s_len = 2.0 * radius * math.sin(theta) + diag * math.cos(theta)
    return theta, s_len


def _rise(d, radius, h, theta, diag, s_len):
    """Height gained d metres into one arc-line-arc lane change (0 -> h)."""
    if d <= 0.0:
        return 0.0
    if d >= s_len:
        return h
    d_arc = radius * math.sin(theta)
    if d <= d_arc:
        return radius - math.sqrt(radius * radius - d * d)
    if d >= s_len - d_arc:
        dd = s_len - d
        return h - (radius - math.sqrt(radius * radius - dd * dd))
    return radius * (1.0 - math.cos(theta)) + (d - d_arc) * math.tan(theta)


def _rise_inv(y, radius, h, theta, diag, s_len):
    """Longitudinal distance at which the lane change first reaches height y."""
    if y <= 0.0:
        return 0.0
    if y >= h:
        return s_len
    y_arc = radius * (1.0 - math.cos(theta))
    if y <= y_arc:
        return math.sqrt(y * (2.0 * radius - y))
    if y >= h - y_arc:
        yy = h - y
        return s_len - math.sqrt(yy * (2.0 * radius - yy))
    return radius * math.sin(theta) + (y - y_arc) / math.tan(theta)


def _catch_time(obstacle, ego_x, ego_vx, t_now, offset=0.0):
    """Earliest t >= t_now at which the ego (constant ego_vx from ego_x at
    t_now) reaches the obstacle's centre x plus ``offset``; None if it never
    does.  offset < 0 targets the leading edge, > 0 the trailing edge."""
    x_at, _, _ = obstacle_pose_at(obstacle, t_now)
    if x_at + offset <= ego_x:
        return t_now
    v0 = obstacle.initial_speed
    vt = obstacle.target_speed
    a = obstacle.acceleration
    t_ramp = 0.0 if a == 0.0 else (vt - v0) / a

    def gap(t):
        x, _, _ = obstacle_pose_at(obstacle, t)
        return x + offset - (ego_x + ego_vx * (t - t_now))

    # Ramp phase: gap(t) is quadratic in t.
    if t_now < t_ramp:
        c2 = 0.5 * a
        c1 = v0 - ego_vx
        c0 = obstacle.x0 + offset - ego_x + ego_vx * t_now
        disc = c1 * c1 - 4.0 * c2 * c0
        if c2 != 0.0 and disc >= 0.0:
            root = math.sqrt(disc)
            for t in sorted(((-c1 - root) / (2.0 * c2),
                             (-c1 + root) / (2.0 * c2))):
                if t_now <= t <= t_ramp and gap(t) <= 1e-9:
                    return t
    # Constant-speed phase: gap(t) is linear.
    t_lin = max(t_now, t_ramp)
    g = gap(t_lin)
    if g <= 0.0:
        return t_lin
    v_hold = vt if a != 0.0 else v0
    rate = ego_vx - v_hold
    if rate <= 0.0:
        return None
    return t_lin + g / rate


def build_lane_change_path(scenario, vx, params, at_time=0.0, ego_x=None,
                           ego_y=None, predict_vx=None,
                           corner_margin=DEFAULT_CORNER_MARGIN):
    """Construct the avoidance reference path for a scenario.

    vx sets the arc radius (max-lateral-acceleration circle); predict_vx
    (defaulting to vx) is the speed assumed for the time-of-arrival
    prediction of moving obstacles, so mid-run rebuilds can keep the design
    geometry while predicting encounters at the actual speed.  at_time /
    ego_x / ego_y anchor the prediction; the default builds from the
    scenario start.  The path itself always starts on the home-lane
    centreline at the scenario's initial x, but mid-run rebuilds only
    constrain (and only validate) the geometry ahead of the ego: traffic
    already passed or already alongside is not plannable-around any more,
    and an obstacle the ego is currently above keeps only its "stay out
    until clear of its trailing edge" role.

    Raises PathConstructionError when the obstacle layout leaves no room for
    radius-R arcs.
    """
    road = scenario.road
    if road.n_lanes != 2:
        raise PathConstructionError(
            f"lane-change construction needs a 2-lane road, got "
            f"{road.n_lanes}")
    if vx <= 0.0:
        raise PathConstructionError(f"need vx > 0, got {vx!r}")

    radius = min_turn_radius(vx, params)
    h = road.lane_width
    diag = MID_STRAIGHT
    theta, s_len = _change_geometry(radius, h, diag)

    ego0 = scenario.ego_initial
    x_start = ego0.X
    ex = x_start if ego_x is None else ego_x
    pvx = vx if predict_vx is None else predict_vx

    # Home lane = nearest centreline to the ego's initial y.
    home = min(range(road.n_lanes),
               key=lambda i: abs(ego0.Y - road.centreline_y(i)))
    target = 1 - home
    y_home = road.centreline_y(home)
    y_target = road.centreline_y(target)
    sgn = 1.0 if y_target > y_home else -1.0

    # Whether the ego currently sits nearer the adjacent centreline (mid
    # overtake) than its home one.
    elevated = ego_y is not None and abs(ego_y - y_target) < abs(ego_y - y_home)

    # Freeze each obstacle at its predicted encounter, inflate by the
    # construction margin, classify by which centreline it covers.  Moving
    # obstacles are frozen as the rectangle swept between the moments the
    # ego meets their leading and trailing edges (an overtake at low
    # relative speed spans metres of obstacle motion).
    blockers = []      # (xmin, xmax, far_edge_height, pinned) in the home lane
    constraints = []   # (xmin, xmax, near_edge_height) in the adjacent lane
    frozen = []
    for ob in scenario.obstacles:
        if ob.is_moving:
            hx = 0.5 * ob.length + ob.safety_gap + corner_margin
            hy = 0.5 * ob.width + ob.safety_gap + corner_margin
            t_lead = _catch_time(ob, ex, pvx, at_time, offset=-hx)
            if t_lead is None:
                continue  # never reached; cannot obstruct the ego
            t_trail = _catch_time(ob, ex, pvx, at_time, offset=hx)
            if t_trail is None:
                # Pass never completes; block out to the end of the run.
                t_trail = max(t_lead, scenario.duration)
            x_lead, y_c, _ = obstacle_pose_at(ob, t_lead)
            x_trail, _, _ = obstacle_pose_at(ob, t_trail)
            rect = Rect(x_lead - hx, y_c - hy, x_trail + hx, y_c + hy)
        else:
            rect = obstacle_boundary_at(ob, at_time).inflated(corner_margin)
        if rect.xmax < max(x_start, ex):
            continue  # strictly behind the ego; cannot constrain what is ahead
        covers_home = rect.ymin <= y_home <= rect.ymax
        covers_target = rect.ymin <= y_target <= rect.ymax
        if covers_home and covers_target:
            raise PathConstructionError(
                "an obstacle blocks both lane centrelines")
        if covers_home:
            far = rect.ymax - y_home if sgn > 0 else y_home - rect.ymin
            if rect.xmin <= ex:
                if not elevated:
                    # Already alongside it in its own lane: no lane-change
                    # geometry ahead can address this; leave it to the
                    # clearance metric.
                    continue
                # The ego is above this one: its swerve-out is history;
                # only "stay out until past its trailing edge" still binds.
                blockers.append((rect.xmin, rect.xmax, far, True))
            else:
                blockers.append((rect.xmin, rect.xmax, far, False))
        elif covers_target:
            near = rect.ymin - y_home if sgn > 0 else y_home - rect.ymax
            constraints.append((rect.xmin, rect.xmax, near))
        frozen.append(rect)

    blockers.sort()
    # Swerve-back caps only matter for descents still ahead of the ego.
    cap_rects = sorted(c for c in constraints if c[0] >= ex - 1.0)
    constraints.sort()
    # Rectangles currently being overflown share one (historical) swerve-out.
    pinned_members = [b for b in blockers if b[3]]
    groups = (([pinned_members] if pinned_members else [])
              + [[b] for b in blockers if not b[3]])

    def plan_groups():
        """(swerve-out x, swerve-back x) per group, or the index to merge.

        Right-to-left pass: the latest usable swerve-out per group, given
        the group's own leading corner, adjacent-lane caps on the
        swerve-back, and the room needed to land and climb again before the
        next group.  Left-to-right pass: final placement and ordering
        checks; returns an index when the dip between that group and the
        next cannot fit and they must be taken as one.
        """
        n_groups = len(groups)
        metas = []
        for grp in groups:
            metas.append((min(b[0] for b in grp), max(b[1] for b in grp),
                          max(b[2] for b in grp), any(b[3] for b in grp)))

        u_late = [0.0] * n_groups
        cap_targets = [math.inf] * n_groups
        cap_dip = [math.inf] * n_groups
        for i in range(n_groups - 1, -1, -1):
            gxmin, _, gfar, pinned = metas[i]
            u_max = (max(ex - s_len, x_start) if pinned
                     else gxmin - _rise_inv(gfar, radius, h, theta, diag, s_len))
            tcap = math.inf
            for cxmin, cxmax, cnear in cap_rects:
                # The swerve is above the constraint's near edge over an
                # (enter, exit) span that must miss the rectangle on one
                # side; rectangles not clearable before the climb cap the
                # swerve-back instead.
                rise_near = _rise_inv(cnear, radius, h, theta, diag, s_len)
                if cxmax > u_max + rise_near:
                    tcap = min(tcap,
                               cxmin - _rise_inv(h - cnear, radius, h, theta, diag, s_len))
            dcap = math.inf if i + 1 == n_groups else u_late[i + 1] - s_len
            if pinned:
                # Already above this group: the swerve-out is not a free
                # variable any more.
                u_late[i] = u_max
            else:
                u_late[i] = min(u_max, min(tcap, dcap) - MIN_PLATEAU - s_len)
            cap_targets[i] = tcap
            cap_dip[i] = dcap

        plan = []
        prev_land = None
        for i in range(n_groups):
            gxmin, gxmax, gfar, pinned = metas[i]
            u = u_late[i]
            u_min = x_start if prev_land is None else prev_land
            if not pinned:
                for cxmin, cxmax, cnear in constraints:
                    rise_near = _rise_inv(cnear, radius, h, theta, diag, s_len)
                    if cxmax <= u + rise_near:
                        u_min = max(u_min, cxmax - rise_near)
            if u < u_min - 1e-9 and not pinned:
                if i > 0:
                    return i - 1  # no room to dip before this group: merge
                raise PathConstructionError(
                    f"obstacle near x={gxmin:.2f} leaves no room to start "
                    f"a radius-{radius:.2f} m turn")
            u = max(u, u_min) if not pinned else u
            # A pinned group is already being overflown; no cosmetic plateau.
            plateau = 0.0 if pinned else MIN_PLATEAU
            d = max(u + s_len + plateau,
                    gxmax - _rise_inv(h - gfar, radius, h, theta, diag, s_len))
            if d > cap_targets[i] + 1e-9:
                raise PathConstructionError(
                    f"no room between home-lane traffic near x={gxmin:.2f} "
                    f"and adjacent-lane traffic near "
                    f"x={cap_targets[i]:.2f} for radius-{radius:.2f} m arcs")
            if d > cap_dip[i] + 1e-9:
                return i  # dip to the next group does not fit: merge
            d = min(d, cap_targets[i], cap_dip[i])
            plan.append((u, d))
            prev_land = d + s_len
        return plan

    while True:
        outcome = plan_groups()
        if isinstance(outcome, int):
            groups[outcome:outcome + 2] = [groups[outcome] + groups[outcome + 1]]
            continue
        plan = outcome
        break

    # Assemble segments; junctions are stored once and shared between
    # neighbouring segments so continuity is exact.
    x_end = max(x_start + vx * scenario.duration,
                (plan[-1][1] + s_len) if plan else x_start) + _TAIL
    segments = []
    waypoints = [(x_start, y_home)]
    cursor = (x_start, y_home)

    def add_line(to_point, heading):
        nonlocal cursor
        length = math.hypot(to_point[0] - cursor[0], to_point[1] - cursor[1])
        if length > 1e-12:
            segments.append(PathSegment(kind="line", start=cursor,
                                        end=to_point, length=length,
                                        heading=heading))
        cursor = to_point

    def add_arc(centre, start_angle, sweep):
        nonlocal cursor
        direction = 1 if sweep > 0 else -1
        end_angle = start_angle + sweep
        end = (centre[0] + radius * math.cos(end_angle),
               centre[1] + radius * math.sin(end_angle))
        segments.append(PathSegment(kind="arc", start=cursor, end=end,
                                    length=radius * abs(sweep),
                                    centre=centre, radius=radius,
                                    direction=direction,
                                    start_angle=start_angle, sweep=sweep))
        cursor = end

    def add_s_curve(x_entry, y_from, sign):
        """Arc, straight diagonal, arc from (x_entry, y_from) to the level
        y_from + sign*h; returns the mid and exit points for labelling."""
        c1 = (x_entry, y_from + sign * radius)
        add_arc(c1, -sign * (math.pi / 2.0), sign * theta)
        if diag > 0.0:
            line_end = (cursor[0] + diag * math.cos(theta),
                        cursor[1] + sign * diag * math.sin(theta))
            add_line(line_end, sign * theta)
        mid = (x_entry + radius * math.sin(theta) + 0.5 * diag * math.cos(theta),
               y_from + sign * (0.5 * h))
        y_to = y_from + sign * h
        c2 = (x_entry + s_len, y_to - sign * radius)
        add_arc(c2, sign * (math.pi / 2.0 + theta), -sign * theta)
        return mid, cursor

    for u, d in plan:
        add_line((u, y_home), 0.0)
        waypoints.append((u, y_home))
        mid, out = add_s_curve(u, y_home, sgn)
        waypoints.append(mid)
        waypoints.append(out)
        add_line((d, y_target), 0.0)
        waypoints.append((d, y_target))
        mid, back = add_s_curve(d, y_target, -sgn)
        waypoints.append(mid)
        waypoints.append(back)
    add_line((x_end, y_home), 0.0)
    waypoints.append((x_end, y_home))
    deduped = [waypoints[0]]
    for point in waypoints[1:]:
        if point != deduped[-1]:
            deduped.append(point)
    waypoints = deduped

    offsets = []
    total = 0.0
    for seg in segments:
        offsets.append(total)
        total += seg.length
    path = ReferencePath(segments=tuple(segments), waypoints=tuple(waypoints),
                         total_length=total, offsets=tuple(offsets),
                         design_speed=vx)

    _validate(path, road, frozen, from_x=ex - 1.0 if ego_x is not None else None)
    return path


def _validate(path, road, rects, from_x=None):
    """Dense sweep: stay inside the road, stay out of every frozen rectangle.

    The construction rectangles already include the corner margin, so grazing
    contact with them is allowed; actual penetration is a construction bug or
    an unplannable layout and raises.  from_x restricts the sweep to the part
    of the path still ahead of the ego on mid-run rebuilds.
    """
    n = max(2, int(path.total_length / _VALIDATE_DS) + 1)
    for i in range(n + 1):
        s = min(path.total_length, path.total_length * i / n)
        x, y, _, _ = sample_reference(path, s)
        if from_x is not None and x < from_x:
            continue
        if not (road.lower_boundary_y < y < road.upper_boundary_y):
            raise PathConstructionError(
                f"constructed path leaves the road at s={s:.2f} (y={y:.3f})")
        for rect in rects:
            if rect_signed_distance((x, y), rect) < -1e-9:
                raise PathConstructionError(
                    f"constructed path enters an obstacle boundary at "
                    f"s={s:.2f} (x={x:.2f}, y={y:.2f})")


def dense_samples(path, ds=0.1):
    """(s, x, y, heading, curvature) rows along the whole path."""
    rows = []
    n = max(1, int(path.total_length / ds))
    for i in range(n + 1):
        s = min(path.total_length, path.total_length * i / n)
        x, y, heading, curvature = sample_reference(path, s)
        rows.append((s, x, y, heading, curvature))
    return rows
