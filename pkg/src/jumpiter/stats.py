"""Sample summaries, two-sample KS distance and log-log rate fits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    stderr: float
    central_moments: tuple  # orders 2, 3, 4 (population normalisation)
    quantiles: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "m2": self.central_moments[0],
            "m3": self.central_moments[1],
            "m4": self.central_moments[2],
            "quantiles": {repr(q): v for q, v in self.quantiles.items()},
        }


def _as_sample(samples, name="samples"):
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise UsageError(f"{name} must be non-empty")
    return x


def summarize(samples) -> SampleSummary:
    # sort first so the result does not depend on input order
    x = np.sort(_as_sample(samples))
    n = x.size
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev ** 2))
    variance = m2 * n / (n - 1) if n > 1 else 0.0
    qs = np.quantile(x, QUANTILES)
    return SampleSummary(
        count=n,
        mean=mean,
        variance=variance,
        stderr=float(np.sqrt(variance / n)),
        central_moments=(m2, float(np.mean(dev ** 3)), float(np.mean(dev ** 4))),
        quantiles={q: float(v) for q, v in zip(QUANTILES, qs)},
    )


def ks_two_sample(a, b) -> float:
    """Sup distance between the right-continuous empirical CDFs of ``a`` and ``b``."""
    a = np.sort(_as_sample(a, "a"))
    b = np.sort(_as_sample(b, "b"))
    pooled = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_threshold(n_a: int, n_b: int, coef: float = 1.36) -> float:
    """Asymptotic KS critical value ``coef * sqrt((n_a + n_b) / (n_a n_b))``."""
    return coef * float(np.sqrt((n_a + n_b) / (n_a * n_b)))


@dataclass(frozen=True)
class RateFit:
    n: tuple
    e: tuple
    slope: float
    intercept: float
    residual_se: float
    slope_halfwidth: float

    def as_dict(self):
        return {"n": list(self.n), "e": list(self.e), "slope": self.slope, "intercept": self.intercept,
                "residual_se": self.residual_se, "slope_ci_halfwidth": self.slope_halfwidth}


def loglog_rate(points, z: float = 1.96) -> RateFit:
    """Least-squares fit of ``log e = intercept + slope * log n``."""
    pts = list(points)
    if len(pts) < 3:
        raise UsageError("need at least 3 points")
    n = np.array([p[0] for p in pts], dtype=np.float64)
    e = np.array([p[1] for p in pts], dtype=np.float64)
    if np.any(n <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise UsageError("rate fit needs positive n and positive finite e")
    x, y = np.log(n), np.log(e)
    design = np.column_stack((np.ones_like(x), x))
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(pts) - 2
    rse = float(np.sqrt(resid @ resid / dof)) if dof > 0 else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    return RateFit(tuple(n.tolist()), tuple(e.tolist()), float(coef[1]), float(coef[0]), rse,
                   float(z * rse / np.sqrt(sxx)))
