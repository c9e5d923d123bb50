"""Exact planar geometry for origin-anchored convex cells.

All coordinates live in the scaled frame where the conditioned cell's
inscribed disk is the unit disk.  A generator point x != 0 induces the closed
half-plane

    H(x) = {y : <y, x> <= |x|^2},

whose boundary passes through x perpendicular to x, at distance |x| from the
origin.  Cells are intersections of such half-planes; their duals under the
unit-circle inversion are convex hulls of inverted generators.

Everything here is pure, deterministic and reentrant.  Configurations closer
than ``TOL`` to degenerate (coincident points, concurrent lines) are resolved
by fixed tie-breaks; under the continuous sampling laws they have probability
zero, so any consistent rule is acceptable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Degeneracy tolerance in unit-disk scale.
TOL = 1e-12

_X0 = np.array([1.0, 0.0])


def invert(p):
    """Inversion in the unit circle, p -> p / |p|^2.

    Accepts a single point (shape (2,)) or a batch (shape (n, 2)); the shape
    is preserved.  Involution; fixes the unit circle and swaps the interior
    and exterior of the unit disk.
    """
    a = np.asarray(p, dtype=float)
    n2 = np.sum(a * a, axis=-1, keepdims=True)
    if np.any(n2 == 0.0):
        raise ValueError("inversion is undefined at the origin")
    return a / n2


@dataclass(frozen=True, eq=False)
class HalfPlane:
    """Closed half-plane containing the origin, keyed by its generator point.

    The boundary line runs through ``anchor`` perpendicular to it, so the
    line's distance from the origin equals ``offset = |anchor|``.
    """

    anchor: np.ndarray

    def __post_init__(self):
        a = np.array(self.anchor, dtype=float).reshape(2)
        if not np.all(np.isfinite(a)):
            raise ValueError("half-plane anchor must be finite")
        if a[0] == 0.0 and a[1] == 0.0:
            raise ValueError("half-plane anchor must be nonzero")
        a.flags.writeable = False
        object.__setattr__(self, "anchor", a)

    @property
    def offset(self) -> float:
        return float(np.hypot(self.anchor[0], self.anchor[1]))

    def contains(self, p, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return float(p @ self.anchor) <= float(self.anchor @ self.anchor) + tol


def halfplane_of(x) -> HalfPlane:
    """Half-plane of a generator point x != 0 (origin side of its line)."""
    return HalfPlane(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class Disk:
    """Closed disk."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(2)
        if not np.all(np.isfinite(c)) or self.radius < 0.0:
            raise ValueError("disk needs a finite center and nonnegative radius")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return float(np.sum((p - self.center) ** 2)) <= self.radius * self.radius


class ConvexPolygon:
    """Bounded convex polygon with counterclockwise vertices.

    When built from half-planes, ``anchors[i]`` is the generator whose
    boundary line carries the edge from ``vertices[i]`` to
    ``vertices[i + 1]``; hull-built polygons have ``anchors = None``.
    """

    __slots__ = ("vertices", "anchors")

    def __init__(self, vertices, anchors=None):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("a polygon needs at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        e = np.empty_like(v)
        e[:-1] = v[1:]
        e[-1] = v[0]
        e -= v  # edge vectors
        if 0.5 * float(np.sum(v[:, 0] * e[:, 1] - v[:, 1] * e[:, 0])) <= 0.0:
            raise ValueError("vertices must be in counterclockwise order")
        f0 = np.concatenate([e[1:, 0], e[:1, 0]])
        f1 = np.concatenate([e[1:, 1], e[:1, 1]])
        if np.any(e[:, 0] * f1 - e[:, 1] * f0 < -1e-9):
            raise ValueError("vertices are not in convex position")
        v.flags.writeable = False
        self.vertices = v
        if anchors is not None:
            anchors = tuple(anchors)
            if len(anchors) != len(v):
                raise ValueError("need one edge anchor per vertex")
        self.anchors = anchors

    def __len__(self):
        return len(self.vertices)

    def area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]))

    def circumradius(self) -> float:
        """Radius of the smallest origin-centered disk containing the polygon."""
        return float(np.sqrt(np.max(np.sum(self.vertices * self.vertices, axis=1))))

    def inradius(self) -> float:
        """Radius of the largest origin-centered disk inside the polygon.

        For anchor-built polygons this is the exact minimum anchor norm (each
        edge line sits at distance |anchor| from the origin); otherwise it is
        computed from the vertices.
        """
        if self.anchors is not None:
            return min(float(np.hypot(a[0], a[1])) for a in self.anchors)
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        num = np.abs(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0])
        den = np.sqrt(np.sum((w - v) ** 2, axis=1))
        return float(np.min(num / den))

    def contains_point(self, p, tol: float = 1e-9) -> bool:
        p = np.asarray(p, dtype=float)
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = (w[:, 0] - v[:, 0]) * (p[1] - v[:, 1]) - (w[:, 1] - v[:, 1]) * (p[0] - v[:, 0])
        return bool(np.all(cross >= -tol))


def circumradius(poly: ConvexPolygon) -> float:
    """Max vertex norm of the polygon (smallest centered covering disk)."""
    return poly.circumradius()


def convex_hull(points) -> ConvexPolygon:
    """Convex hull restricted to strict extreme points.

    Collinear boundary points and interior points are excluded: a point stays
    only if removing it changes the hull's support function.  The output is
    independent of input order (points are processed in lexicographic order,
    which is also the tie-break for coincident inputs).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of points")
    pts = np.unique(pts, axis=0)
    # merge near-coincident points (within TOL) onto their lexicographic head
    keep = np.ones(len(pts), dtype=bool)
    for i in range(1, len(pts)):
        if abs(pts[i, 0] - pts[i - 1, 0]) < TOL and abs(pts[i, 1] - pts[i - 1, 1]) < TOL:
            keep[i] = False
    pts = pts[keep]
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points")

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                cross = (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1]) - (
                    out[-1][1] - out[-2][1]
                ) * (p[0] - out[-2][0])
                if cross <= TOL:  # drop right turns and collinear middles
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise ValueError("points are collinear; hull is degenerate")
    return ConvexPolygon(np.array(hull))


def _near(p, q) -> bool:
    return abs(p[0] - q[0]) < TOL and abs(p[1] - q[1]) < TOL


def _line_meet(a, b):
    """Intersection of the boundary lines of H(a) and H(b), or None if parallel."""
    det = a[0] * b[1] - a[1] * b[0]
    if abs(det) <= 1e-14 * (abs(a[0] * b[1]) + abs(a[1] * b[0]) + 1e-300):
        return None
    ca = a[0] * a[0] + a[1] * a[1]
    cb = b[0] * b[0] + b[1] * b[1]
    return np.array([(ca * b[1] - cb * a[1]) / det, (a[0] * cb - b[0] * ca) / det])


def _dedupe_ring(vertices, anchors):
    """Drop zero-length edges (coincident consecutive vertices) from a ring."""
    n = len(vertices)
    keep = []
    for i in range(n):
        j = (i + 1) % n
        if (
            abs(vertices[i][0] - vertices[j][0]) < TOL
            and abs(vertices[i][1] - vertices[j][1]) < TOL
        ):
            continue  # edge i has zero length: drop vertex j's predecessor slot
        keep.append(i)
    if len(keep) == n:
        return vertices, anchors
    vs = [vertices[i] for i in keep]
    # vertex i survives together with the anchor of the edge leaving it
    an = [anchors[i] for i in keep] if anchors is not None else None
    return vs, an


def cut_polygon(poly: ConvexPolygon, halfplane: HalfPlane):
    """Clip a convex polygon by one origin-containing half-plane.

    Returns ``(polygon, changed)``.  The polygon is returned unchanged
    (same object) when every vertex already satisfies the half-plane, which
    is exactly the redundancy test used for early termination.
    """
    a = halfplane.anchor
    c = float(a @ a)
    v = poly.vertices
    d = v @ a - c
    if np.all(d <= TOL):
        return poly, False
    ins = d <= TOL
    if not ins.any():
        # impossible for an origin-containing polygon cut by an
        # origin-containing half-plane
        raise ValueError("half-plane removes the whole polygon")
    k = len(v)
    nxt = np.empty_like(ins)
    nxt[:-1] = ins[1:]
    nxt[-1] = ins[0]
    exit_idx = int(np.nonzero(ins & ~nxt)[0][0])  # edge: inside -> outside
    entry_idx = int(np.nonzero(~ins & nxt)[0][0])  # edge: outside -> inside

    def edge_cut(i):
        j = (i + 1) % k
        t = d[i] / (d[i] - d[j])
        return v[i] + t * (v[j] - v[i])

    cut_in = edge_cut(entry_idx)
    cut_out = edge_cut(exit_idx)

    # surviving old vertices form the cyclic run entry+1 .. exit
    e, x = entry_idx, exit_idx
    old = poly.anchors
    if e < x:
        mid_v = v[e + 1 : x + 1]
        mid_a = old[e + 1 : x + 1] if old is not None else None
    else:
        mid_v = np.concatenate([v[e + 1 :], v[: x + 1]])
        mid_a = (old[e + 1 :] + old[: x + 1]) if old is not None else None
    new_vertices = np.concatenate([cut_in[None, :], mid_v, cut_out[None, :]])
    if old is not None:
        # edge cut_in -> v[entry+1] rides old edge entry_idx; the edges between
        # ride their old lines; cut_out -> cut_in rides the new half-plane
        new_anchors = (old[entry_idx],) + tuple(mid_a) + (a,)
    else:
        new_anchors = None
    # only adjacencies touching a cut vertex can degenerate into zero length
    n = len(new_vertices)
    close = (
        _near(new_vertices[0], new_vertices[1])
        or _near(new_vertices[n - 2], new_vertices[n - 1])
        or _near(new_vertices[n - 1], new_vertices[0])
    )
    if close:
        vs, an = _dedupe_ring(list(new_vertices), list(new_anchors) if new_anchors else None)
        if len(vs) < 3:
            raise ValueError("cut degenerated the polygon")
        return ConvexPolygon(np.array(vs), an), True
    return ConvexPolygon(new_vertices, new_anchors), True


def _refine_vertices(poly: ConvexPolygon) -> ConvexPolygon:
    """Re-derive each vertex as the exact meet of its two edge lines.

    Removes the interpolation error accumulated while clipping against a
    large working box; a vertex is kept as-is when its edges are nearly
    parallel.
    """
    if poly.anchors is None:
        return poly
    v = poly.vertices.copy()
    anchors = poly.anchors
    k = len(v)
    for j in range(k):
        p = _line_meet(anchors[j - 1], anchors[j])
        if p is not None and np.hypot(p[0] - v[j, 0], p[1] - v[j, 1]) < 1e-6 * (
            1.0 + np.hypot(v[j, 0], v[j, 1])
        ):
            v[j] = p
    vs, an = _dedupe_ring(list(v), list(anchors))
    if len(vs) < 3:
        return poly
    return ConvexPolygon(np.array(vs), an)


def intersect_halfplanes(halfplanes):
    """Intersection of origin-containing half-planes.

    Returns the bounded ``ConvexPolygon`` (counterclockwise, with per-edge
    generating anchors) or ``None`` when the intersection is unbounded.

    Boundedness is decided exactly: the intersection is bounded iff the
    anchor directions leave no angular gap of pi or more.  When bounded, the
    maximal gap certifies the radius bound ``max_offset / cos(gap / 2)``, so
    clipping a working box of that size provably never truncates the result.
    """
    hps = list(halfplanes)
    if not hps:
        return None
    anchors = np.array([hp.anchor for hp in hps])
    offsets = np.sqrt(np.sum(anchors * anchors, axis=1))
    ang = np.sort(np.arctan2(anchors[:, 1], anchors[:, 0]))
    gaps = np.diff(ang)
    wrap = ang[0] + 2.0 * np.pi - ang[-1]
    gmax = float(max(gaps.max(initial=0.0), wrap))
    if gmax >= np.pi - 1e-12:
        return None
    rbound = float(offsets.max()) / np.cos(gmax / 2.0)
    w = rbound * (1.0 + 1e-9) + 1e-9
    box = ConvexPolygon(
        np.array([[w, -w], [w, w], [-w, w], [-w, -w]]),
        (
            np.array([w, 0.0]),
            np.array([0.0, w]),
            np.array([-w, 0.0]),
            np.array([0.0, -w]),
        ),
    )
    poly = box
    for hp in hps:
        poly, _ = cut_polygon(poly, hp)
    # certification: no box edge can survive once the true intersection is
    # inside the box
    max_anchor = max(float(np.hypot(a[0], a[1])) for a in poly.anchors)
    if max_anchor >= w * (1.0 - 1e-12):
        raise AssertionError("working box leaked into a certified-bounded intersection")
    return _refine_vertices(poly)


def _polygon_disk_overlap(vertices: np.ndarray, s: float) -> float:
    """Area of (polygon intersect D(0, s)) by signed sector decomposition."""
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    s2 = s * s
    na2 = np.sum(a * a, axis=1)
    nb2 = np.sum(b * b, axis=1)
    cross_ab = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    d = b - a
    qa = np.sum(d * d, axis=1)
    qb = np.sum(a * d, axis=1)
    qc = na2 - s2
    disc = qb * qb - qa * qc
    sq = np.sqrt(np.maximum(disc, 0.0))
    qa_safe = np.where(qa > 0.0, qa, 1.0)
    t1 = (-qb - sq) / qa_safe
    t2 = (-qb + sq) / qa_safe
    p1 = a + t1[:, None] * d
    p2 = a + t2[:, None] * d

    def sector(u, w):
        cr = u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]
        dt = np.sum(u * w, axis=1)
        return 0.5 * s2 * np.arctan2(cr, dt)

    def tri(u, w):
        return 0.5 * (u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0])

    a_in = na2 <= s2
    b_in = nb2 <= s2
    crossing = (~a_in) & (~b_in) & (disc > 0.0) & (t1 > 0.0) & (t2 < 1.0)
    contrib = np.where(
        a_in & b_in,
        0.5 * cross_ab,
        np.where(
            a_in & ~b_in,
            tri(a, p2) + sector(p2, b),
            np.where(
                ~a_in & b_in,
                sector(a, p1) + tri(p1, b),
                np.where(
                    crossing,
                    sector(a, p1) + tri(p1, p2) + sector(p2, b),
                    sector(a, b),
                ),
            ),
        ),
    )
    return float(np.sum(contrib))


def polygon_minus_disk_area(poly: ConvexPolygon, s: float) -> float:
    """Exact area of the polygon minus the origin-centered disk of radius s.

    Closed-form chord/circular-segment arithmetic; no quadrature.  Equals the
    polygon area at s = 0 and vanishes once the disk covers the polygon.
    """
    if s < 0:
        raise ValueError("disk radius must be nonnegative")
    if s == 0.0:
        return poly.area()
    if s >= poly.circumradius():
        return 0.0
    inside = _polygon_disk_overlap(poly.vertices, s)
    return max(poly.area() - inside, 0.0)
