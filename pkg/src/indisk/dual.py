"""Executable oracles for the inversion dualities.

Inverting a finite generator realization maps the cell pipeline onto the
hull/grain pipeline of the same realization:

* the cell's vertex count equals the number of strict extreme points of the
  convex hull of the inverted generators (vertex duality);
* the area of the cell outside the unit disk equals the inverse-cubic-law
  mass of the part of the unit disk left uncovered by the diameter grains of
  the inverted generators (defect duality);
* the grain union covers a centered disk of radius s exactly when the cell
  fits inside the centered disk of radius 1/s (coverage duality).

The first and third identities are exact pathwise; the second is checked by
importance-sampling the inverse-cubic law.  Realizations within tolerance of
a degenerate configuration (concurrent lines, collinear hull points) are
flagged for skipping rather than resolved: resolving them would test our
tie-breaks, not the geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import Disk, HalfPlane, convex_hull, intersect_halfplanes, invert
from .sampler import RadialLaw, _as_rng, sample_iid

_X0 = np.array([1.0, 0.0])

# borderline distance below which a realization is flagged degenerate
DEGENERACY_TOL = 1e-10


class GrainUnion:
    """Union of diameter grains over germs in the unit disk.

    The grain of a germ y is the disk with diameter segment [0, y], so a
    point z lies in it iff <z, y> >= |z|^2.  The tangent grain of (1, 0) is
    included by default, mirroring the deterministic tangent generator.
    """

    def __init__(self, germs, include_tangent: bool = True):
        g = np.asarray(germs, dtype=float).reshape(-1, 2)
        if include_tangent:
            g = np.vstack([g, _X0]) if len(g) else _X0[None, :]
        if len(g) == 0:
            raise ValueError("grain union needs at least one germ")
        self.germs = g

    def grain_disks(self):
        return [Disk(center=y / 2.0, radius=0.5 * float(np.hypot(y[0], y[1]))) for y in self.germs]

    def covers(self, points) -> np.ndarray:
        """Boolean mask: which points lie in the union."""
        z = np.asarray(points, dtype=float).reshape(-1, 2)
        n2 = np.sum(z * z, axis=1)
        out = np.zeros(len(z), dtype=bool)
        step = max(1, 4_000_000 // max(len(self.germs), 1))
        for i in range(0, len(z), step):
            sl = slice(i, i + step)
            out[sl] = (z[sl] @ self.germs.T >= n2[sl, None]).any(axis=1)
        return out


@dataclass
class DualityCheck:
    """Outcome of the vertex-duality oracle on one realization."""

    n_cell: int
    n_hull: int
    degenerate: bool
    cell_margin: float
    hull_margin: float

    @property
    def matched(self) -> bool:
        return self.n_cell == self.n_hull


def vertices_equal_extremes(generators, tol: float = DEGENERACY_TOL) -> DualityCheck:
    """Run the cell and hull pipelines on one shared finite realization.

    ``generators`` must contain the tangent generator (1, 0) and points of
    norm > 1.  The cell side intersects their half-planes; the hull side
    takes the strict extreme points of the inverted sample.  For every
    non-degenerate realization the two counts agree exactly.
    """
    g = np.asarray(generators, dtype=float).reshape(-1, 2)
    if len(g) < 3:
        raise ValueError("need at least 3 generators")
    poly = intersect_halfplanes(HalfPlane(row) for row in g)
    if poly is None:
        raise ValueError("generator realization does not bound a cell")
    n_cell = len(poly)

    inverted = invert(g)
    hull = convex_hull(inverted)
    n_hull = len(hull)

    cell_margin = _cell_margin(g, poly)
    hull_margin = _hull_margin(inverted, hull)
    degenerate = cell_margin < tol or hull_margin < tol
    return DualityCheck(
        n_cell=n_cell,
        n_hull=n_hull,
        degenerate=degenerate,
        cell_margin=cell_margin,
        hull_margin=hull_margin,
    )


def _cell_margin(generators: np.ndarray, poly) -> float:
    """Distance-to-flip of the cell pipeline.

    For each generator whose half-plane is inactive, the slack by which its
    line misses the polygon; also the shortest active edge length.  A tiny
    value means a line nearly concurrent with a vertex.
    """
    v = poly.vertices
    support = generators @ v.T
    slack = support.max(axis=1) - np.sum(generators * generators, axis=1)
    active = {(float(a[0]), float(a[1])) for a in poly.anchors}
    inactive = np.array(
        [(float(p[0]), float(p[1])) not in active for p in generators], dtype=bool
    )
    margin = float(np.min(-slack[inactive])) if inactive.any() else math.inf
    edges = np.roll(v, -1, axis=0) - v
    margin = min(margin, float(np.min(np.sqrt(np.sum(edges * edges, axis=1)))))
    return margin


def _hull_margin(points: np.ndarray, hull) -> float:
    """Distance-to-flip of the hull pipeline.

    The inward boundary distance of every non-vertex point plus the smallest
    turn at a hull vertex.  A tiny value means a point nearly on the hull
    boundary or three nearly collinear hull points.
    """
    hv = hull.vertices
    keys = {(float(p[0]), float(p[1])) for p in hv}
    others = np.array([(float(p[0]), float(p[1])) not in keys for p in points], dtype=bool)
    margin = math.inf
    if others.any():
        p = points[others]
        a = hv
        b = np.roll(hv, -1, axis=0)
        e = b - a
        elen = np.sqrt(np.sum(e * e, axis=1))
        crossed = (
            e[None, :, 0] * (p[:, 1, None] - a[None, :, 1])
            - e[None, :, 1] * (p[:, 0, None] - a[None, :, 0])
        ) / elen[None, :]
        margin = float(np.min(np.abs(np.min(crossed, axis=1))))
    e = np.roll(hv, -1, axis=0) - hv
    f = np.roll(e, -1, axis=0)
    turns = np.abs(e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0])
    return min(margin, float(np.min(turns)))


def defect_measure_mc(germs, rho_min: float, n_mc: int, rng):
    """Monte Carlo estimate of the uncovered inverse-cubic mass.

    Importance-samples the inverse-cubic law on the annulus
    ``rho_min < rho < 1`` (the defect set of a cell with circumradius
    ``1/rho_min`` lives there) and returns ``(estimate, standard_error)``
    for the mass left uncovered by the grain union of ``germs`` plus the
    tangent grain.  A consistent check against the exact cell area outside
    the unit disk should fall within 4 standard errors.
    """
    if n_mc < 1000:
        raise ValueError("need at least 1000 Monte Carlo samples")
    if rho_min >= 1.0:
        return 0.0, 0.0
    if rho_min <= 0.0:
        raise ValueError("rho_min must be positive (the law has infinite mass near 0)")
    law = RadialLaw("inverse_cubic", rho_min, 1.0)
    z = sample_iid(law, n_mc, _as_rng(rng))
    union = GrainUnion(np.asarray(germs, dtype=float).reshape(-1, 2))
    uncovered = ~union.covers(z)
    p = float(np.mean(uncovered))
    mass = law.mass()
    se = mass * math.sqrt(p * (1.0 - p) / n_mc)
    return mass * p, se


def grain_union_covers(germs, s: float) -> bool:
    """Exact coverage test: does the grain union contain the disk D(0, s)?

    Computed through the dual cell: the union of the grains of ``germs``
    plus the tangent grain covers D(0, s) iff the cell of the inverted germs
    plus the tangent generator fits in D(0, 1/s).  If that cell is unbounded
    (too few germ directions) the answer is False for every s in (0, 1).
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    g = np.asarray(germs, dtype=float).reshape(-1, 2)
    gens = [invert(row) for row in g] + [_X0]
    poly = intersect_halfplanes(HalfPlane(x) for x in gens)
    if poly is None:
        return False
    return poly.circumradius() <= 1.0 / s


def grain_union_covers_sampled(germs, s: float, n: int = 10_000) -> bool:
    """Slow coverage oracle by dense boundary sampling.

    Checks the circle of radius s at n equispaced angles; since every grain
    contains the origin on its boundary, coverage of the circle implies
    coverage of the disk.  One-sided: a gap narrower than the angular step
    can be missed, so use only to cross-check clear-cut cases.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    theta = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    z = s * np.column_stack((np.cos(theta), np.sin(theta)))
    union = GrainUnion(np.asarray(germs, dtype=float).reshape(-1, 2))
    return bool(union.covers(z).all())
