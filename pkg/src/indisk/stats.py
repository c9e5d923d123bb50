"""Moment summaries, exponent fits, tail and normality diagnostics, and the
closed-form constants of the conditioned-cell growth laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Lanczos approximation, g = 7, 9 coefficients (~13 significant digits).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Gamma function for x > 0, accurate to at least 10 significant digits."""
    if x <= 0:
        raise ValueError("gamma_fn requires x > 0")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    s = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        s += _LANCZOS_COEF[i] / (z + i)
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * s


@dataclass(frozen=True)
class TheoryConstants:
    """Leading coefficients and exponents of the large-inradius growth laws.

    Vertex counts grow like ``coeff * r**exponent`` and so does the mean
    physical area outside the inscribed disk.  The variance coefficients are
    not pinned in closed form anywhere, so only their exponents appear here;
    variance levels are estimated empirically.
    """

    vertex_coeff_voronoi: float  # 4 pi 3^(-1/3) Gamma(5/3)   ~ 7.86565
    vertex_coeff_crofton: float  # 2^(4/3) pi 3^(-1/3) Gamma(5/3) ~ 4.95505
    area_base: float  # Gamma(2/3) (pi/2)^(2/3) 3^(-1/3)
    area_coeff_voronoi: float  # 2 pi (4 pi)^(-2/3) * area_base
    area_coeff_crofton: float  # 2 pi pi^(-2/3) * area_base
    exponents: dict


def theory_constants() -> TheoryConstants:
    """Evaluate the closed-form constants from the gamma function."""
    g53 = gamma_fn(5.0 / 3.0)
    g23 = gamma_fn(2.0 / 3.0)
    third = 3.0 ** (-1.0 / 3.0)
    base = g23 * (math.pi / 2.0) ** (2.0 / 3.0) * third
    return TheoryConstants(
        vertex_coeff_voronoi=4.0 * math.pi * third * g53,
        vertex_coeff_crofton=2.0 ** (4.0 / 3.0) * math.pi * third * g53,
        area_base=base,
        area_coeff_voronoi=2.0 * math.pi * (4.0 * math.pi) ** (-2.0 / 3.0) * base,
        area_coeff_crofton=2.0 * math.pi * math.pi ** (-2.0 / 3.0) * base,
        exponents={
            "voronoi": {"n_vertices": 2.0 / 3.0, "mean_area": 2.0 / 3.0, "var_area": 2.0 / 3.0},
            "crofton": {"n_vertices": 1.0 / 3.0, "mean_area": 4.0 / 3.0, "var_area": 7.0 / 3.0},
        },
    )


@dataclass
class ExperimentDataset:
    """Per-replicate records plus the configuration that produced them."""

    records: list
    config: dict = field(default_factory=dict)
    anomalies: dict = field(default_factory=dict)

    def records_for(self, model=None, r=None):
        rr = None if r is None else float(r)
        return [
            c
            for c in self.records
            if (model is None or c.model == model) and (rr is None or c.r == rr)
        ]

    def models(self):
        return sorted({c.model for c in self.records})

    def r_values(self, model):
        return sorted({c.r for c in self.records if c.model == model})


def anomaly_key(model: str, r: float) -> str:
    return f"{model}:{r:.17g}"


def _moments(values: np.ndarray) -> dict:
    """Unbiased mean/variance with standard errors (variance SE via the
    fourth central moment)."""
    n = len(values)
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1))
    se_mean = math.sqrt(var / n)
    centered = values - mean
    m4 = float(np.mean(centered ** 4))
    se_var = math.sqrt(max(m4 - var * var * (n - 3.0) / (n - 1.0), 0.0) / n)
    return {"mean": mean, "se_mean": se_mean, "var": var, "se_var": se_var}


def summarize(dataset: ExperimentDataset, r: float, model=None) -> dict:
    """Sample moments at one inradius: vertex counts, physical outside area,
    escape-event rates, and the anomaly counters for that sweep point.

    The records are processed in replicate order, so summaries built from any
    partition of the records merge to bit-identical results.
    """
    recs = dataset.records_for(model=model, r=r)
    models = sorted({c.model for c in recs})
    if len(models) > 1:
        raise ValueError("records at this r span several models; pass model=...")
    if len(recs) < 2:
        raise ValueError("need at least 2 replicates to summarize")
    recs = sorted(recs, key=lambda c: c.replicate)
    n_arr = np.array([c.n_vertices for c in recs], dtype=float)
    v_arr = np.array([c.area_outside_physical for c in recs], dtype=float)
    n_mom = _moments(n_arr)
    v_mom = _moments(v_arr)
    out = {
        "n_replicates": len(recs),
        "mean_n_vertices": n_mom["mean"],
        "se_mean_n_vertices": n_mom["se_mean"],
        "var_n_vertices": n_mom["var"],
        "se_var_n_vertices": n_mom["se_var"],
        "mean_area_outside": v_mom["mean"],
        "se_mean_area_outside": v_mom["se_mean"],
        "var_area_outside": v_mom["var"],
        "se_var_area_outside": v_mom["se_var"],
    }
    alphas = sorted(recs[0].a_event_flags)
    rates = {}
    n = len(recs)
    for alpha in alphas:
        p = float(np.mean([1.0 if c.a_event_flags[alpha] else 0.0 for c in recs]))
        rates[f"{alpha:g}"] = {"p": p, "se": math.sqrt(p * (1.0 - p) / n)}
    out["a_event_rate"] = rates
    key = anomaly_key(models[0], r) if models else None
    out["skipped_unbounded"] = int(dataset.anomalies.get("unbounded", {}).get(key, 0))
    return out


def fit_exponent(pairs) -> dict:
    """Least squares on (log r, log value); the slope estimates the exponent."""
    pairs = [(float(r), float(v)) for r, v in pairs]
    if len({r for r, _ in pairs}) < 3:
        raise ValueError("need at least 3 distinct r values")
    if any(r <= 0 for r, _ in pairs):
        raise ValueError("r values must be positive")
    if any(v <= 0 for _, v in pairs):
        raise ValueError("values must be positive for a log-log fit")
    x = np.log([r for r, _ in pairs])
    y = np.log([v for _, v in pairs])
    n = len(x)
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    sxy = float(np.sum((x - xbar) * (y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ssr = float(np.sum(resid ** 2))
    slope_se = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else 0.0
    return {"slope": slope, "intercept": intercept, "slope_se": slope_se, "n": n}


def _normal_cdf(z: np.ndarray) -> np.ndarray:
    # machine-precision normal CDF via erf (far beyond the 8 required digits)
    return np.array([0.5 * (1.0 + math.erf(v / math.sqrt(2.0))) for v in z])


def normality_statistic(samples) -> dict:
    """Kolmogorov-Smirnov distance of the standardized sample to the
    standard normal distribution."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 100:
        raise ValueError("need at least 100 samples")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise ValueError("zero sample variance")
    z = np.sort((x - float(np.mean(x))) / sd)
    cdf = _normal_cdf(z)
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    return {"ks_distance": max(d_plus, d_minus), "n": n}


def wilson_interval(count: int, n: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = count / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def _tail_entry(count: int, n: int, norm_denom: float) -> dict:
    p = count / n
    lo, hi = wilson_interval(count, n)
    return {
        "count": int(count),
        "p": p,
        "wilson_low": lo,
        "wilson_high": hi,
        # zero counts give an upper bound, never a point estimate
        "zero_count_bound": (1.0 / (n + 1)) if count == 0 else None,
        "normalized": (-math.log(p) / norm_denom) if count > 0 else None,
    }


def tail_estimates(dataset: ExperimentDataset, r: float, etas, model=None) -> list:
    """Empirical tail tables of the physical outside area.

    For each eta, the frequencies of exceeding (1 + eta) times the sample
    mean and of falling below (1 - eta) times it, with Wilson intervals.
    ``normalized`` is -log(p) / r**(2/3) for Voronoi records and
    -log(p) / r**(1/3) for Crofton records (a trend diagnostic; the limiting
    rates are out of reach at desk scale).
    """
    recs = dataset.records_for(model=model, r=r)
    models = sorted({c.model for c in recs})
    if len(models) != 1:
        raise ValueError("tail table needs records of exactly one model at one r")
    n = len(recs)
    if n < 1000:
        raise ValueError("tail tables need at least 1000 replicates")
    v = np.array([c.area_outside_physical for c in recs], dtype=float)
    mean = float(np.mean(v))
    exponent = 2.0 / 3.0 if models[0] == "voronoi" else 1.0 / 3.0
    denom = float(r) ** exponent
    rows = []
    for eta in etas:
        eta = float(eta)
        upper = int(np.sum(v >= (1.0 + eta) * mean))
        lower = int(np.sum(v <= (1.0 - eta) * mean))
        rows.append(
            {
                "eta": eta,
                "n": n,
                "upper": _tail_entry(upper, n, denom),
                "lower": _tail_entry(lower, n, denom),
            }
        )
    return rows
