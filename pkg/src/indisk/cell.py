"""Build the scaled zero cell from a generator stream and measure it.

The cell is the intersection of the half-planes of all stream points.  Points
arrive in nondecreasing norm order, so once the running intersection is
bounded, the first point whose norm reaches the current circumradius proves
every later half-plane redundant: its boundary line lies at distance |x| from
the origin and cannot cut a polygon contained in the centered disk of that
radius.  The returned polygon therefore equals the full infinite
intersection.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field

import numpy as np

from .geom import ConvexPolygon, HalfPlane, cut_polygon, intersect_halfplanes, polygon_minus_disk_area
from .sampler import SAFETY_CAP, max_angle_gap


class UnboundedCellError(RuntimeError):
    """The safety cap was passed while the intersection was still unbounded."""

    def __init__(self, consumed: int, last_norm: float):
        super().__init__(
            f"cell still unbounded after {consumed} generators "
            f"(last norm {last_norm:.3f} past the safety cap)"
        )
        self.consumed = consumed
        self.last_norm = last_norm


@dataclass
class ZeroCellResult:
    """A built cell plus the finite generator realization that produced it.

    ``generators`` holds every point consumed from the stream in order,
    starting with the tangent generator; the final row is the terminating
    point, whose half-plane is provably redundant but which was consumed for
    the termination check.
    """

    polygon: ConvexPolygon
    generators: np.ndarray

    @property
    def n_consumed(self) -> int:
        return len(self.generators)


def build_zero_cell(stream, safety_cap: float = SAFETY_CAP) -> ZeroCellResult:
    """Intersect the half-planes of a norm-sorted generator stream.

    Consumes the stream until the first point whose norm reaches the bounded
    intersection's circumradius (or until a finite stream is exhausted).
    Raises ``UnboundedCellError`` if points beyond ``safety_cap`` are reached
    while the intersection is still unbounded.
    """
    consumed = []
    anchors = []
    angles = []
    poly = None
    last_norm2 = 0.0

    it = iter(stream)
    # phase 1: accumulate half-planes until the anchor directions leave no
    # angular gap of pi, which is exactly when the intersection is bounded
    for x, y in it:
        n2 = x * x + y * y
        if n2 < last_norm2 - 1e-9:
            raise ValueError("generator stream is not sorted by norm")
        last_norm2 = n2
        consumed.append((x, y))
        anchors.append((x, y))
        insort(angles, math.atan2(y, x))
        if len(angles) >= 3 and max_angle_gap(angles) < math.pi - 1e-12:
            poly = intersect_halfplanes(HalfPlane(a) for a in anchors)
            break
        if n2 > safety_cap * safety_cap:
            raise UnboundedCellError(len(consumed), math.sqrt(n2))
    if poly is None:
        raise UnboundedCellError(len(consumed), math.sqrt(last_norm2))

    # phase 2: incremental clipping with early termination
    circ2 = float(np.max(np.sum(poly.vertices * poly.vertices, axis=1)))
    vx = poly.vertices[:, 0]
    vy = poly.vertices[:, 1]
    for x, y in it:
        n2 = x * x + y * y
        if n2 < last_norm2 - 1e-9:
            raise ValueError("generator stream is not sorted by norm")
        last_norm2 = n2
        consumed.append((x, y))
        if n2 >= circ2:
            break  # this and all later half-planes are provably redundant
        if (vx * x + vy * y).max() > n2:  # the new line cuts the polygon
            poly, changed = cut_polygon(poly, HalfPlane((x, y)))
            if changed:
                vx = poly.vertices[:, 0]
                vy = poly.vertices[:, 1]
                circ2 = float(np.max(vx * vx + vy * vy))

    return ZeroCellResult(polygon=poly, generators=np.array(consumed))


def intensity_scale(model: str, r: float) -> float:
    """Process intensity parameter at inradius r: 4 r^2 (Voronoi) or r (Crofton)."""
    if model == "voronoi":
        return 4.0 * r * r
    if model == "crofton":
        return float(r)
    raise ValueError(f"unknown model {model!r}")


def escape_threshold(t: float, alpha: float):
    """Scaled circumradius threshold of the annulus-escape event.

    The event holds when the cell's circumradius exceeds
    ``1 / (1 - 2^(3 alpha) t^(-alpha))``; equivalently the shrunken disk of
    radius ``1 - 2^(3 alpha) t^(-alpha)`` is not covered by the dual grain
    union.  Returns ``None`` when the shrunken radius is nonpositive, in
    which case the event is vacuously false.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    shrink = 1.0 - 2.0 ** (3.0 * alpha) * t ** (-alpha)
    if shrink <= 0.0:
        return None
    return 1.0 / shrink


@dataclass
class CellRecord:
    """Per-replicate observables of one conditioned cell.

    ``area_outside_scaled`` is the area of the scaled cell outside the unit
    disk; the physical area outside the inscribed disk is ``r**2`` times
    that for both models.  ``a_event_flags`` maps each alpha to the
    annulus-escape indicator at intensity scale t(model, r); for the Crofton
    model the same parameterization with t = r is a diagnostic convention,
    not a pinned growth law.
    """

    model: str
    r: float
    replicate: int
    seed: str
    n_vertices: int
    area_outside_scaled: float
    area_outside_physical: float
    circumradius_scaled: float
    a_event_flags: dict = field(default_factory=dict)
    generators_consumed: int = 0


def measure_cell(
    polygon: ConvexPolygon,
    model: str,
    r: float,
    alphas,
    *,
    generators_consumed: int = 0,
    replicate: int = 0,
    seed: str = "",
) -> CellRecord:
    """Extract the per-replicate observables from a built cell."""
    t = intensity_scale(model, r)
    n = len(polygon)
    if n < 3:
        raise ValueError("degenerate cell")
    circ = polygon.circumradius()
    if circ < 1.0 - 1e-9:
        raise ValueError("cell does not contain its inscribed unit disk")
    if polygon.inradius() < 1.0 - 1e-9:
        raise ValueError("cell inradius fell below the unit disk")
    area_out = polygon_minus_disk_area(polygon, 1.0)
    flags = {}
    for alpha in alphas:
        thr = escape_threshold(t, alpha)
        flags[float(alpha)] = bool(thr is not None and circ > thr)
    return CellRecord(
        model=model,
        r=float(r),
        replicate=int(replicate),
        seed=seed,
        n_vertices=n,
        area_outside_scaled=area_out,
        area_outside_physical=r * r * area_out,
        circumradius_scaled=circ,
        a_event_flags=flags,
        generators_consumed=int(generators_consumed),
    )
