"""Region of interest around the ego vehicle: a clear zone hugging the body and
a focus zone ahead that stretches with speed and bends with the steering angle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .domain import (
    DEFAULT_CLEAR_ZONE,
    DEFAULT_FOCUS_ZONE,
    DomainError,
    EgoState,
    Point,
    Timestamp,
    ZoneSpec,
    ego_problems,
)

MAX_ABS_TAN_STEER = 10.0
DEFAULT_STATIONS = 8
_EDGE_TOL = 1e-12


class Zone(str, enum.Enum):
    OUTSIDE = "Outside"
    IN_CLEAR = "InClear"
    IN_FOCUS = "InFocus"


@dataclass(frozen=True)
class ZonePolygon:
    """Closed simple polygon, vertices counter-clockwise in the vehicle frame."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 4:
            raise DomainError(f"zone polygon needs at least 4 vertices, got {len(verts)}")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise DomainError("zone polygon vertices must be finite")

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    @property
    def x_extent(self) -> tuple[float, float]:
        xs = [v[0] for v in self.vertices]
        return min(xs), max(xs)

    def contains(self, p: Point) -> bool:
        return point_in_polygon(p, self.vertices)


@dataclass(frozen=True)
class RegionOfInterest:
    clear: ZonePolygon
    focus: ZonePolygon
    computed_at: Timestamp
    ego_snapshot: EgoState

    @property
    def focus_far_m(self) -> float:
        return self.focus.x_extent[1]


def polygon_area(vertices: Sequence[Point]) -> float:
    """Signed shoelace area; positive for counter-clockwise order."""
    n = len(vertices)
    acc = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    (px, py), (ax, ay), (bx, by) = p, a, b
    if not (min(ax, bx) - _EDGE_TOL <= px <= max(ax, bx) + _EDGE_TOL
            and min(ay, by) - _EDGE_TOL <= py <= max(ay, by) + _EDGE_TOL):
        return False
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    length = math.hypot(bx - ax, by - ay)
    if length == 0.0:
        return px == ax and py == ay
    return abs(cross) <= _EDGE_TOL * length


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    """Closed point-in-polygon test: boundary points count as inside.

    Uses the winding number, so it is valid for any simple polygon regardless of
    orientation.
    """
    px, py = p
    n = len(vertices)
    winding = 0
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if _on_segment(p, a, b):
            return True
        (ax, ay), (bx, by) = a, b
        side = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        if ay <= py:
            if by > py and side > 0:
                winding += 1
        elif by <= py and side < 0:
            winding -= 1
    return winding != 0


def stopping_far_extent(ego: EgoState, base_far_m: float) -> float:
    """Base far extent plus reaction distance plus braking distance."""
    v = ego.speed_mps
    return base_far_m + v * ego.reaction_time_s + v * v / (2.0 * ego.max_decel_mps2)


def _steer_tan(angle: float) -> float:
    # odd by construction so mirrored steering gives exactly mirrored offsets
    magnitude = min(math.tan(abs(angle)), MAX_ABS_TAN_STEER) if abs(angle) < math.pi / 2 else MAX_ABS_TAN_STEER
    return math.copysign(magnitude, angle) if angle != 0 else 0.0


def body_outline(ego: EgoState) -> tuple[float, float, float]:
    """(rear_x, front_x, half_width) of the body, overhangs split evenly around the wheelbase."""
    overhang = max(0.0, (ego.body_length_m - ego.wheelbase_m) / 2.0)
    return -overhang, ego.wheelbase_m + overhang, ego.body_width_m / 2.0


def _rectangle(x0: float, x1: float, y_right: float, y_left: float) -> ZonePolygon:
    return ZonePolygon(((x0, y_right), (x1, y_right), (x1, y_left), (x0, y_left)))


def focus_stations(base_focus: ZoneSpec, far_m: float, stations: int = DEFAULT_STATIONS) -> list[float]:
    """Longitudinal sample points of the focus zone.

    The spacing is fixed by splitting the base extent into ``stations - 1``
    intervals; a faster ego only appends stations. Keeping the grid independent
    of speed makes the polygon at a lower speed a subset of the one at a higher
    speed.
    """
    near = base_focus.near_m
    step = (base_focus.far_m - near) / (stations - 1)
    xs = []
    k = 0
    while near + k * step < far_m - 1e-9 * max(1.0, far_m):
        xs.append(near + k * step)
        k += 1
    xs.append(far_m)
    return xs


def compute_roi(
    ego: EgoState,
    base_clear: ZoneSpec = DEFAULT_CLEAR_ZONE,
    base_focus: ZoneSpec = DEFAULT_FOCUS_ZONE,
    stations: int = DEFAULT_STATIONS,
) -> RegionOfInterest:
    problems = ego_problems(ego)
    if problems:
        raise DomainError("invalid ego state: " + "; ".join(problems))
    if stations < 2:
        raise DomainError("stations must be >= 2")

    rear, front, half_width = body_outline(ego)
    clear = _rectangle(rear - base_clear.near_m, front + base_clear.far_m,
                       -(half_width + base_clear.right_m), half_width + base_clear.left_m)

    far = stopping_far_extent(ego, base_focus.far_m)
    if clear.x_extent[1] > far:
        raise DomainError(f"clear zone reaches x={clear.x_extent[1]:.3f} m, beyond focus far extent {far:.3f} m")

    t = _steer_tan(ego.steering_angle_rad)
    if t == 0.0:
        focus = _rectangle(base_focus.near_m, far, -base_focus.right_m, base_focus.left_m)
    else:
        xs = focus_stations(base_focus, far, stations)
        curvature = t / (2.0 * ego.wheelbase_m)
        offsets = [curvature * x * x for x in xs[:-1]]
        # last vertex sits on the chord of the fixed grid, not on the parabola
        step = (base_focus.far_m - base_focus.near_m) / (stations - 1)
        x_prev = xs[-2]
        x_next = x_prev + step
        frac = (far - x_prev) / step
        off_prev = curvature * x_prev * x_prev
        offsets.append(off_prev + frac * (curvature * x_next * x_next - off_prev))
        right = [(x, off - base_focus.right_m) for x, off in zip(xs, offsets)]
        left = [(x, off + base_focus.left_m) for x, off in zip(xs, offsets)]
        focus = ZonePolygon(tuple(right + left[::-1]))

    return RegionOfInterest(clear=clear, focus=focus, computed_at=ego.at, ego_snapshot=ego)


def contains(roi: RegionOfInterest, p: Point) -> Zone:
    """Classify a point; the clear zone wins where both zones overlap."""
    if roi.clear.contains(p):
        return Zone.IN_CLEAR
    if roi.focus.contains(p):
        return Zone.IN_FOCUS
    return Zone.OUTSIDE


def roi_to_dict(roi: RegionOfInterest) -> dict:
    return {
        "computed_at": roi.computed_at,
        "clear": [list(v) for v in roi.clear.vertices],
        "focus": [list(v) for v in roi.focus.vertices],
    }
