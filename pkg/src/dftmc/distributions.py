"""Lifetime distributions for basic events, and their scaled reference laws.

Four families are supported: Exponential (parameterized by MTTF), Weibull,
LogNormal and Normal.  Each family knows its density, CDF, survival function
(kept in log space so values near 1e-300 stay meaningful), and quantile.

Importance sampling replaces a base law ``f`` by a scaled reference law
``g(t) = (1/a) * f(t/a)``, which is the same family with its scale parameter
moved to ``v``.  The scale ``v`` is chosen so that survival past the mission
time drops by a common factor ``d``:

    1 - G(T) = (1 - F(T)) / d

Exponential and Weibull admit closed forms for ``v``; the other families are
solved by bisection on the log-survival residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

__all__ = [
    "Exponential",
    "Weibull",
    "LogNormal",
    "Normal",
    "Lifetime",
    "ReferenceDistribution",
    "ReferenceSolverError",
    "scale",
    "solve_reference",
    "solve_reference_bisect",
]

# Normal mass below zero is folded into the law only when it matters.
_TRUNCATION_THRESHOLD = 1e-12


class ReferenceSolverError(RuntimeError):
    """No reference scale satisfies the survival-matching condition."""


def _check_positive(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class Exponential:
    """Exponential lifetime with mean time to failure ``mttf``."""

    mttf: float
    family = "exp"

    def __post_init__(self):
        _check_positive(self.mttf, "mttf")

    @property
    def scale(self) -> float:
        return self.mttf

    def with_scale(self, v: float) -> "Exponential":
        return Exponential(v)

    def pdf(self, t):
        return np.exp(-np.asarray(t) / self.mttf) / self.mttf

    def cdf(self, t):
        return -np.expm1(-np.asarray(t) / self.mttf)

    def sf(self, t):
        return np.exp(self.log_sf(t))

    def log_sf(self, t):
        return -np.asarray(t) / self.mttf

    def _quantile01(self, p):
        # valid for p in [0, 1); p = 0 maps to 0
        return -self.mttf * np.log1p(-np.asarray(p))

    def quantile(self, p):
        return _checked_quantile(self, p)

    def log_density_ratio(self, other: "Exponential", t):
        # log(f(t)/g(t)) with g the same family at scale other.mttf;
        # written so the normalizing constants never under/overflow
        t = np.asarray(t, dtype=float)
        return np.log(other.mttf / self.mttf) - t / self.mttf + t / other.mttf


@dataclass(frozen=True)
class Weibull:
    """Weibull lifetime with characteristic life ``scale_param`` and shape."""

    scale_param: float
    shape: float
    family = "weibull"

    def __post_init__(self):
        _check_positive(self.scale_param, "scale")
        _check_positive(self.shape, "shape")

    @property
    def scale(self) -> float:
        return self.scale_param

    def with_scale(self, v: float) -> "Weibull":
        return Weibull(v, self.shape)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        z = t / self.scale_param
        b = self.shape
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (b / self.scale_param) * z ** (b - 1.0) * np.exp(-(z**b))
        # pin the support edges: 0**(b-1) at the origin (diverges for b<1,
        # vanishes for b>1) and inf*0 at t=inf
        edge = (1.0 / self.scale_param) if b == 1.0 else (np.inf if b < 1.0 else 0.0)
        out = np.where(t == 0.0, edge, out)
        return np.where(np.isinf(t), 0.0, out)

    def cdf(self, t):
        z = np.asarray(t) / self.scale_param
        return -np.expm1(-(z**self.shape))

    def sf(self, t):
        return np.exp(self.log_sf(t))

    def log_sf(self, t):
        z = np.asarray(t) / self.scale_param
        return -(z**self.shape)

    def _quantile01(self, p):
        return self.scale_param * (-np.log1p(-np.asarray(p))) ** (1.0 / self.shape)

    def quantile(self, p):
        return _checked_quantile(self, p)

    def log_density_ratio(self, other: "Weibull", t):
        if other.shape != self.shape:
            raise ValueError("density ratio requires matching Weibull shapes")
        t = np.asarray(t, dtype=float)
        b = self.shape
        # the t**(b-1) factors cancel, so t = 0 needs no special case
        return b * np.log(other.scale_param / self.scale_param) - (t / self.scale_param) ** b + (t / other.scale_param) ** b


@dataclass(frozen=True)
class LogNormal:
    """LogNormal lifetime: log of the failure time is Normal(mu, sigma)."""

    mu: float
    sigma: float
    family = "lognormal"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        _check_positive(self.sigma, "sigma")

    @property
    def scale(self) -> float:
        # median; the natural scale parameter of the family
        return math.exp(self.mu)

    def with_scale(self, v: float) -> "LogNormal":
        return LogNormal(math.log(v), self.sigma)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        safe = np.where(t > 0.0, t, 1.0)
        z = (np.log(safe) - self.mu) / self.sigma
        out = np.exp(-0.5 * z * z) / (safe * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(t > 0.0, out, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        safe = np.where(t > 0.0, t, 1.0)
        out = ndtr((np.log(safe) - self.mu) / self.sigma)
        return np.where(t > 0.0, out, 0.0)

    def sf(self, t):
        return np.exp(self.log_sf(t))

    def log_sf(self, t):
        t = np.asarray(t, dtype=float)
        safe = np.where(t > 0.0, t, 1.0)
        out = log_ndtr(-(np.log(safe) - self.mu) / self.sigma)
        return np.where(t > 0.0, out, 0.0)

    def _quantile01(self, p):
        with np.errstate(divide="ignore"):
            return np.exp(self.mu + self.sigma * ndtri(np.asarray(p)))

    def quantile(self, p):
        return _checked_quantile(self, p)

    def log_density_ratio(self, other: "LogNormal", t):
        if other.sigma != self.sigma:
            raise ValueError("density ratio requires matching LogNormal sigmas")
        t = np.asarray(t, dtype=float)
        safe = np.where(t > 0.0, t, 1.0)
        lt = np.log(safe)
        num = (lt - other.mu) ** 2 - (lt - self.mu) ** 2
        # t = 0 carries no mass under either law; ratio fixed at 1 there
        return np.where(t > 0.0, num / (2.0 * self.sigma**2), 0.0)


@dataclass(frozen=True)
class Normal:
    """Normal lifetime truncated to non-negative times.

    The mean acts as the scale parameter.  When the mass below zero exceeds
    1e-12 the density and CDF are renormalized over [0, inf); below that the
    stray mass is lumped at t = 0 by the quantile.
    """

    mean: float
    sd: float
    family = "normal"

    def __post_init__(self):
        _check_positive(self.mean, "mean")
        _check_positive(self.sd, "sd")

    @property
    def scale(self) -> float:
        return self.mean

    def with_scale(self, v: float) -> "Normal":
        # scaling multiplies mean and sd together, keeping the shape m/s fixed
        return Normal(v, self.sd * (v / self.mean))

    @property
    def _mass_below_zero(self) -> float:
        return float(ndtr(-self.mean / self.sd))

    @property
    def _renormalized(self) -> bool:
        return self._mass_below_zero > _TRUNCATION_THRESHOLD

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        z = (t - self.mean) / self.sd
        out = np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))
        if self._renormalized:
            out = out / (1.0 - self._mass_below_zero)
        return np.where(t >= 0.0, out, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        lo = self._mass_below_zero
        out = ndtr((t - self.mean) / self.sd)
        if self._renormalized:
            out = (out - lo) / (1.0 - lo)
        return np.clip(np.where(t >= 0.0, out, 0.0), 0.0, 1.0)

    def sf(self, t):
        return np.exp(self.log_sf(t))

    def log_sf(self, t):
        t = np.asarray(t, dtype=float)
        out = log_ndtr(-(t - self.mean) / self.sd)
        if self._renormalized:
            out = out - math.log1p(-self._mass_below_zero)
        return out

    def _quantile01(self, p):
        p = np.asarray(p, dtype=float)
        if self._renormalized:
            lo = self._mass_below_zero
            q = self.mean + self.sd * ndtri(lo + p * (1.0 - lo))
        else:
            q = self.mean + self.sd * ndtri(p)
        return np.maximum(q, 0.0)

    def quantile(self, p):
        return _checked_quantile(self, p)

    def log_density_ratio(self, other: "Normal", t):
        t = np.asarray(t, dtype=float)
        # both laws truncate the same relative mass (m/s is scale-invariant),
        # so the renormalizing constants cancel exactly
        za = (t - self.mean) / self.sd
        zb = (t - other.mean) / other.sd
        return math.log(other.sd / self.sd) + 0.5 * (zb * zb - za * za)


Lifetime = Exponential | Weibull | LogNormal | Normal


def _checked_quantile(dist, p):
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("quantile probability must lie strictly in (0, 1)")
    out = dist._quantile01(p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ReferenceDistribution:
    """A base lifetime law paired with its scaled reference law at scale v."""

    base: Lifetime
    v: float
    law: Lifetime

    def pdf(self, t):
        return self.law.pdf(t)

    def cdf(self, t):
        return self.law.cdf(t)

    def sf(self, t):
        return self.law.sf(t)

    def log_sf(self, t):
        return self.law.log_sf(t)

    def quantile(self, p):
        return self.law.quantile(p)

    def _quantile01(self, p):
        return self.law._quantile01(p)

    def log_density_ratio(self, t):
        """log(f(t)/g(t)) between base and reference densities."""
        return self.base.log_density_ratio(self.law, t)

    def log_survival_ratio(self, t) -> float:
        """log((1-F(t))/(1-G(t))), the lumped tail weight in log space."""
        return float(self.base.log_sf(t) - self.law.log_sf(t))


def scale(dist: Lifetime, v: float) -> ReferenceDistribution:
    """Build the scaled reference law g(t) = (1/a) f(t/a) with scale v."""
    _check_positive(v, "v")
    # identity scaling reuses the base law itself, so g == f holds bit for
    # bit (LogNormal would otherwise round through log(exp(mu)))
    law = dist if v == dist.scale else dist.with_scale(v)
    return ReferenceDistribution(base=dist, v=v, law=law)


def solve_reference(dist: Lifetime, d: float, mission_time: float) -> float:
    """Reference scale v such that survival past ``mission_time`` shrinks by d.

    Exponential and Weibull use closed forms; the other families fall back to
    the bisection solver.  d = 1 always returns the base scale exactly.
    """
    if not (math.isfinite(d) and d >= 1.0):
        raise ValueError(f"d must be >= 1, got {d!r}")
    _check_positive(mission_time, "mission_time")
    if d == 1.0:
        return dist.scale
    log_d = math.log(d)
    if isinstance(dist, Exponential):
        return 1.0 / (1.0 / dist.mttf + log_d / mission_time)
    if isinstance(dist, Weibull):
        b = dist.shape
        return mission_time / ((mission_time / dist.scale_param) ** b + log_d) ** (1.0 / b)
    return solve_reference_bisect(dist, d, mission_time)


def solve_reference_bisect(dist: Lifetime, d: float, mission_time: float) -> float:
    """Generic solver for the survival-matching condition, any family.

    Bisects on v using the residual
        r(v) = log(1 - G_v(T)) - (log(1 - F(T)) - log d),
    which is strictly increasing in v, until v is resolved to machine
    precision.  The residual at the returned v is far below 1e-10.
    """
    if not (math.isfinite(d) and d >= 1.0):
        raise ValueError(f"d must be >= 1, got {d!r}")
    _check_positive(mission_time, "mission_time")
    if d == 1.0:
        return dist.scale

    target = float(dist.log_sf(mission_time)) - math.log(d)

    def residual(v: float) -> float:
        return float(dist.with_scale(v).log_sf(mission_time)) - target

    hi = dist.scale  # residual(hi) = log d > 0
    lo = hi / 2.0
    for _ in range(1100):
        if residual(lo) < 0.0:
            break
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            raise ReferenceSolverError(
                f"no reference scale in (0, {dist.scale!r}] matches a survival drop of {d!r}"
            )
    else:
        raise ReferenceSolverError(
            f"bracket expansion failed for survival drop {d!r} at mission time {mission_time!r}"
        )

    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi
