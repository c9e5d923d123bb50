"""Seeded Poisson point-process samplers.

All processes live in the scaled frame where the conditioned cell's inscribed
disk is the unit disk.  Generator streams yield points sorted by norm, ring by
ring, so the cell builder can stop as soon as further points are provably
redundant.  Every sample is keyed by a splittable ``StreamKey``; the same key
always reproduces the same sample regardless of platform, process or thread
schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MODEL_IDS = {"voronoi": 0, "crofton": 1}

# Hard cap (scaled norm) beyond which an unbounded cell build must abort.
SAFETY_CAP = 8.0


@dataclass(frozen=True)
class StreamKey:
    """Deterministic, splittable RNG identity.

    Children are derived by appending integer words, never by drawing from
    the parent, so sibling streams are statistically independent and the
    assignment of streams to workers cannot influence any sample.
    """

    words: tuple

    def __post_init__(self):
        w = tuple(int(x) for x in self.words)
        if any(x < 0 for x in w):
            raise ValueError("key words must be nonnegative integers")
        object.__setattr__(self, "words", w)

    def child(self, *ids) -> "StreamKey":
        return StreamKey(self.words + tuple(ids))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.words))

    def label(self) -> str:
        return "-".join(str(w) for w in self.words)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, StreamKey):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# Radial intensity densities w(rho) in  w(rho) drho dtheta  on an annulus:
#   uniform_area    rho          (planar Lebesgue measure)
#   inverse_cubic   rho^-3       (inversion image of Lebesgue outside the disk)
#   inverse_square  rho^-2       (inversion image of the line-process measure)
#   uniform_radial  1            (flat in the radius)
_LAW_NAMES = ("uniform_area", "inverse_cubic", "inverse_square", "uniform_radial")


@dataclass(frozen=True)
class RadialLaw:
    """Rotation-invariant intensity on the annulus rho_min < rho < rho_max."""

    name: str
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if self.name not in _LAW_NAMES:
            raise ValueError(f"unknown radial law {self.name!r}; expected one of {_LAW_NAMES}")
        if not (0.0 <= self.rho_min < self.rho_max):
            raise ValueError("need 0 <= rho_min < rho_max")
        if self.name in ("inverse_cubic", "inverse_square") and self.rho_min <= 0.0:
            raise ValueError(f"{self.name} has infinite mass near 0; rho_min must be positive")

    def mass(self) -> float:
        """Total intensity mass 2*pi * integral of the radial density."""
        lo, hi = self.rho_min, self.rho_max
        if self.name == "uniform_area":
            return math.pi * (hi * hi - lo * lo)
        if self.name == "inverse_cubic":
            return math.pi * (lo ** -2 - hi ** -2)
        if self.name == "inverse_square":
            return 2.0 * math.pi * (1.0 / lo - 1.0 / hi)
        return 2.0 * math.pi * (hi - lo)

    def quantile(self, u):
        """Closed-form inverse of the radial CDF; vectorized in u."""
        u = np.asarray(u, dtype=float)
        lo, hi = self.rho_min, self.rho_max
        if self.name == "uniform_area":
            return np.sqrt(lo * lo + u * (hi * hi - lo * lo))
        if self.name == "inverse_cubic":
            return (lo ** -2 - u * (lo ** -2 - hi ** -2)) ** -0.5
        if self.name == "inverse_square":
            return 1.0 / (1.0 / lo - u * (1.0 / lo - 1.0 / hi))
        return lo + u * (hi - lo)


def _polar_to_xy(rho, theta):
    return np.column_stack((rho * np.cos(theta), rho * np.sin(theta)))


def sample_poisson_polar(law: RadialLaw, t: float, rng) -> np.ndarray:
    """One draw of the Poisson process with intensity t * law, as (n, 2) xy.

    The count is Poisson(t * mass); radii use the closed-form radial
    quantile; angles are uniform and independent of the radii.
    """
    if t <= 0:
        raise ValueError("intensity scale t must be positive")
    rng = _as_rng(rng)
    n = int(rng.poisson(t * law.mass()))
    rho = law.quantile(rng.random(n))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return _polar_to_xy(rho, theta)


def sample_iid(law: RadialLaw, n: int, rng) -> np.ndarray:
    """n iid points from the normalized law (for importance sampling)."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = _as_rng(rng)
    rho = law.quantile(rng.random(n))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return _polar_to_xy(rho, theta)


def _ring_stream(key: StreamKey, ring_width: float, ring_mean, ring_quantile):
    """Infinite generator of (x, y) sorted by norm, ring by ring.

    Ring k covers norms [1 + k*w, 1 + (k+1)*w) and is drawn from its own
    child key (namespace 0, ring index k), so the realization of a ring never
    depends on how many rings a consumer exhausted before it, and sibling
    draws keyed off the same replicate cannot collide with ring keys.
    """
    k = 0
    while True:
        lo = 1.0 + k * ring_width
        hi = lo + ring_width
        rng = key.child(0, k).generator()
        n = int(rng.poisson(ring_mean(lo, hi)))
        rho = np.sort(ring_quantile(rng.random(n), lo, hi))
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        xs = rho * np.cos(theta)
        ys = rho * np.sin(theta)
        yield from zip(xs.tolist(), ys.tolist())
        k += 1


def voronoi_generator_stream(r: float, key: StreamKey):
    """Scaled generator stream of the Voronoi cell conditioned on inradius r.

    Yields the deterministic tangent generator (1, 0) first, then the points
    of a homogeneous Poisson process of intensity 4 r^2 outside the unit
    disk, in nondecreasing norm order.  The stream never ends; termination
    belongs to the consumer.
    """
    if r <= 0:
        raise ValueError("inradius r must be positive")
    t = 4.0 * r * r
    width = min(0.05, t ** (-1.0 / 3.0))

    def mean(lo, hi):
        return t * math.pi * (hi * hi - lo * lo)

    def quantile(u, lo, hi):
        return np.sqrt(lo * lo + u * (hi * hi - lo * lo))

    yield (1.0, 0.0)
    yield from _ring_stream(key, width, mean, quantile)


def crofton_generator_stream(r: float, key: StreamKey):
    """Scaled generator stream of the Crofton cell conditioned on inradius r.

    Yields (1, 0) first, then points with polar intensity r drho dtheta on
    rho > 1, in nondecreasing norm order, ring by ring.
    """
    if r <= 0:
        raise ValueError("inradius r must be positive")
    width = min(0.05, r ** (-1.0 / 3.0))

    def mean(lo, hi):
        return r * 2.0 * math.pi * (hi - lo)

    def quantile(u, lo, hi):
        return lo + u * (hi - lo)

    yield (1.0, 0.0)
    yield from _ring_stream(key, width, mean, quantile)


def generator_stream(model: str, r: float, key: StreamKey):
    """Dispatch on the tessellation model name."""
    if model == "voronoi":
        return voronoi_generator_stream(r, key)
    if model == "crofton":
        return crofton_generator_stream(r, key)
    raise ValueError(f"unknown model {model!r}")


def ring_width(model: str, r: float) -> float:
    """Ring width used by the lazy generator streams (performance choice)."""
    if model == "voronoi":
        return min(0.05, (4.0 * r * r) ** (-1.0 / 3.0))
    if model == "crofton":
        return min(0.05, r ** (-1.0 / 3.0))
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True, eq=False)
class CoupledTriple:
    """Three nested point sets built from one marked process on an annulus.

    ``points`` carry iid uniform space-time marks; thresholding the marks at
    t, t / rho^4 and t / (1 - eps)^4 produces the homogeneous process, the
    inverse-quartic-tilted process, and the boosted homogeneous process.  The
    inclusions x <= y <= x_up hold pointwise for every draw, not just in law.
    """

    t: float
    eps: float
    points: np.ndarray
    marks: np.ndarray

    @property
    def mask_x(self):
        return self.marks <= self.t

    @property
    def mask_y(self):
        rho2 = np.sum(self.points * self.points, axis=1)
        return self.marks * rho2 * rho2 <= self.t

    @property
    def mask_x_up(self):
        return self.marks <= self.t / (1.0 - self.eps) ** 4

    @property
    def x(self):
        return self.points[self.mask_x]

    @property
    def y(self):
        return self.points[self.mask_y]

    @property
    def x_up(self):
        return self.points[self.mask_x_up]


def coupled_triple(t: float, eps: float, rng) -> CoupledTriple:
    """Draw the coupled triple on the annulus 1 - eps < rho < 1.

    One unit-intensity space-time Poisson process is drawn up to the largest
    mark threshold; the three point sets are mark thresholdings of the same
    realization, so the set inclusions are deterministic.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    rng = _as_rng(rng)
    lo = 1.0 - eps
    t_up = t / lo ** 4
    area = math.pi * (1.0 - lo * lo)
    n = int(rng.poisson(area * t_up))
    rho = np.sqrt(lo * lo + rng.random(n) * (1.0 - lo * lo))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    marks = rng.uniform(0.0, t_up, n)
    return CoupledTriple(t=float(t), eps=float(eps), points=_polar_to_xy(rho, theta), marks=marks)


def coupling_gap_means(t: float, eps: float) -> tuple:
    """Closed-form (E|y| - E|x|, E|x_up| - E|y|) for the coupled triple."""
    g = (2.0 * eps - eps * eps) ** 2
    lo = 1.0 - eps
    return t * math.pi * g / lo ** 2, t * math.pi * g / lo ** 4


def max_angle_gap(sorted_angles) -> float:
    """Largest angular gap (radians) in a sorted list of angles."""
    if len(sorted_angles) <= 1:
        return 2.0 * math.pi
    best = sorted_angles[0] + 2.0 * math.pi - sorted_angles[-1]
    for i in range(1, len(sorted_angles)):
        gap = sorted_angles[i] - sorted_angles[i - 1]
        if gap > best:
            best = gap
    return best
