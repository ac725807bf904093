"""Metric layer for hyperbolic random geometric graphs.

Points live on a Poincare ball of radius ``R`` (curvature parameter
``zeta``) and are described by hyperbolic polar coordinates
``(r, theta_1, ..., theta_{d-1})``.  The depth ``t = R - r`` (distance
from the boundary sphere) is the coordinate that controls connectivity,
so most functions here take depths or radii rather than ball points.

Everything is vectorised: scalar inputs give scalar outputs, array
inputs broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

__all__ = [
    "RadiusRule",
    "ModelParams",
    "HyperbolicPoint",
    "kappa",
    "direction_from_angles",
    "relative_angle",
    "hyperbolic_distance",
    "poincare_distance_oracle",
    "ball_coordinates",
    "distance_approximation",
    "distance_approximation_error_scale",
    "connection_angle_threshold",
    "connection_cos_gap",
    "connection_probability_asymptotic",
    "connection_probability_exact",
    "radial_depth_density",
    "radial_depth_density_approx",
]

# Numerical guards.
_UNIT_TOL = 1e-12          # tolerance for clamping arccos/arccosh arguments
_EXP_SAFE = 350.0          # above this, cosh/sinh ratios move to log space


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class RadiusRule:
    """How the ball radius R_n scales with the intensity n.

    kind
        ``"explicit"``      : R_n = value (fixed radius)
        ``"thermodynamic"`` : R_n = 2 log(n / value) / (zeta (d-1)),
                              value = nu > 0 tunes the expected degree
        ``"logmult"``       : R_n = value * log n
    """

    kind: str
    value: float

    _KINDS = ("explicit", "thermodynamic", "logmult")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown radius rule {self.kind!r}")
        if not self.value > 0:
            raise ValueError("radius rule parameter must be positive")

    @classmethod
    def explicit(cls, R: float) -> "RadiusRule":
        return cls("explicit", float(R))

    @classmethod
    def thermodynamic(cls, nu: float = 1.0) -> "RadiusRule":
        return cls("thermodynamic", float(nu))

    @classmethod
    def log_multiple(cls, c: float) -> "RadiusRule":
        return cls("logmult", float(c))

    @classmethod
    def parse(cls, spec: str) -> "RadiusRule":
        """Parse ``'thermo:NU'``, ``'logmult:C'`` or ``'explicit:R'``."""
        kind, sep, raw = spec.partition(":")
        aliases = {"thermo": "thermodynamic", "thermodynamic": "thermodynamic",
                   "logmult": "logmult", "explicit": "explicit"}
        if kind not in aliases or not sep:
            raise ValueError(f"cannot parse radius rule {spec!r} "
                             "(expected 'thermo:NU', 'logmult:C' or 'explicit:R')")
        return cls(aliases[kind], float(raw))

    def radius(self, n: float, d: int, zeta: float) -> float:
        if self.kind == "explicit":
            return self.value
        if self.kind == "thermodynamic":
            if n <= self.value:
                raise ValueError("thermodynamic rule needs n > nu for a positive radius")
            return 2.0 * math.log(n / self.value) / (zeta * (d - 1))
        return self.value * math.log(n)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the point process and connection rule.

    d     : ambient dimension of the ball, d >= 2
    alpha : radial concentration; larger alpha pushes points to the boundary
    zeta  : curvature scale of the metric
    n     : intensity of the Poisson number of points
    gamma : depth fraction of the annulus used for restricted counts, in (0, 1]
    """

    d: int
    alpha: float
    zeta: float
    n: float
    radius_rule: RadiusRule
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("d must be an integer >= 2")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")
        if not self.n > 0:
            raise ValueError("n must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")

    def radius(self) -> float:
        """Ball radius R for this intensity under the configured rule."""
        return self.radius_rule.radius(self.n, self.d, self.zeta)

    def with_intensity(self, n: float) -> "ModelParams":
        return replace(self, n=float(n))

    def to_dict(self) -> dict:
        return {"d": self.d, "alpha": self.alpha, "zeta": self.zeta,
                "n": self.n, "radius_rule": self.radius_rule.to_dict(),
                "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        rule = data["radius_rule"]
        if isinstance(rule, str):
            rule = RadiusRule.parse(rule)
        else:
            rule = RadiusRule.parse(f"{rule['kind']}:{rule['value']}")
        return cls(d=int(data["d"]), alpha=float(data["alpha"]),
                   zeta=float(data["zeta"]), n=float(data["n"]),
                   radius_rule=rule, gamma=float(data.get("gamma", 1.0)))


# ---------------------------------------------------------------------------
# angular helpers


@lru_cache(maxsize=None)
def kappa(m: int) -> float:
    """Integral of sin(theta)^m over [0, pi] (Wallis recurrence)."""
    if m < 0:
        raise ValueError("kappa is defined for m >= 0")
    if m == 0:
        return math.pi
    if m == 1:
        return 2.0
    return kappa(m - 2) * (m - 1) / m


def direction_from_angles(angles: np.ndarray) -> np.ndarray:
    """Unit direction vector(s) on S^{d-1} from spherical angles.

    ``angles`` has shape (d-1,) or (N, d-1); the first d-2 entries are
    polar angles in [0, pi], the last is azimuthal in [0, 2 pi).
    """
    a = np.asarray(angles, dtype=float)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    npts, dm1 = a.shape
    d = dm1 + 1
    out = np.empty((npts, d))
    sin_prod = np.ones(npts)
    for i in range(dm1 - 1):
        out[:, i] = sin_prod * np.cos(a[:, i])
        sin_prod = sin_prod * np.sin(a[:, i])
    out[:, d - 2] = sin_prod * np.cos(a[:, -1])
    out[:, d - 1] = sin_prod * np.sin(a[:, -1])
    return out[0] if single else out


@dataclass(frozen=True)
class HyperbolicPoint:
    """A single point: depth t, radius r = R - t, angles and unit direction."""

    t: float
    r: float
    angles: np.ndarray
    direction: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.t < 0 or self.r < 0:
            raise ValueError("depth and radius must be nonnegative")
        angles = np.asarray(self.angles, dtype=float)
        object.__setattr__(self, "angles", angles)
        if self.direction is None:
            object.__setattr__(self, "direction", direction_from_angles(angles))
        else:
            direction = np.asarray(self.direction, dtype=float)
            if abs(direction @ direction - 1.0) > 1e-9:
                raise ValueError("direction must be a unit vector")
            object.__setattr__(self, "direction", direction)

    @classmethod
    def from_depth(cls, t: float, angles, R: float) -> "HyperbolicPoint":
        if not 0.0 <= t <= R:
            raise ValueError("depth must lie in [0, R]")
        return cls(t=float(t), r=float(R - t), angles=np.asarray(angles, float))

    @property
    def d(self) -> int:
        return self.direction.shape[0]


def relative_angle(a, b) -> float:
    """Angle between the directions of two points (or two unit vectors)."""
    u = a.direction if isinstance(a, HyperbolicPoint) else np.asarray(a, float)
    v = b.direction if isinstance(b, HyperbolicPoint) else np.asarray(b, float)
    dot = np.clip((u * v).sum(axis=-1), -1.0, 1.0)
    ang = np.arccos(dot)
    return float(ang) if np.ndim(ang) == 0 else ang


# ---------------------------------------------------------------------------
# log-space primitives


def _log_sinh(x):
    """log(sinh(x)) for x >= 0, safe for large x; -inf at x = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return x - math.log(2.0) + np.log1p(-np.exp(-2.0 * x))


def _log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x - math.log(2.0) + np.log1p(np.exp(-2.0 * x))


# ---------------------------------------------------------------------------
# distances


def hyperbolic_distance(r1, r2, theta12, zeta: float):
    """Distance between points at radii r1, r2 with relative angle theta12.

    Uses the law of cosines in the rearranged form

        cosh(zeta*d) = cosh(zeta*(r1-r2)) + 2 sinh(zeta*r1) sinh(zeta*r2) sin^2(theta12/2),

    which avoids cancellation at small angles.  Arguments beyond the
    range of ``cosh`` are handled in log space instead of overflowing.
    """
    r1, r2, theta12 = np.broadcast_arrays(
        np.asarray(r1, float), np.asarray(r2, float), np.asarray(theta12, float))
    a = zeta * r1
    b = zeta * r2
    out = np.empty(a.shape)
    big = (a + b) > _EXP_SAFE
    small = ~big
    if small.any():
        s2 = np.sin(theta12[small] / 2.0) ** 2
        arg = np.cosh(a[small] - b[small]) + 2.0 * np.sinh(a[small]) * np.sinh(b[small]) * s2
        out[small] = np.arccosh(np.maximum(arg, 1.0))
    if big.any():
        with np.errstate(divide="ignore"):
            log_s2 = 2.0 * np.log(np.abs(np.sin(theta12[big] / 2.0)))
        log_arg = np.logaddexp(
            _log_cosh(a[big] - b[big]),
            math.log(2.0) + _log_sinh(a[big]) + _log_sinh(b[big]) + log_s2)
        direct = log_arg <= _EXP_SAFE
        vals = np.empty(log_arg.shape)
        vals[direct] = np.arccosh(np.maximum(np.exp(log_arg[direct]), 1.0))
        vals[~direct] = log_arg[~direct] + math.log(2.0)
        out[big] = vals
    out /= zeta
    return float(out) if out.ndim == 0 else out


def ball_coordinates(r, direction, zeta: float) -> np.ndarray:
    """Euclidean coordinates in the open unit ball for radius r along direction."""
    r = np.asarray(r, dtype=float)
    rho = np.tanh(zeta * r / 2.0)
    return rho[..., None] * np.asarray(direction, dtype=float)


def poincare_distance_oracle(x, y, zeta: float):
    """Independent distance route through unit-ball coordinates.

    d = arccosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))) / zeta.

    Raises ValueError if a point lies on or outside the unit sphere.
    Loses precision for radii beyond ~15/zeta, where 1-|x|^2 underflows
    relative to float64; intended as a cross-check at moderate radii.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx2 = (x * x).sum(axis=-1)
    ny2 = (y * y).sum(axis=-1)
    if np.any(nx2 >= 1.0) or np.any(ny2 >= 1.0):
        raise ValueError("points must lie strictly inside the unit ball")
    diff2 = ((x - y) ** 2).sum(axis=-1)
    arg = 1.0 + 2.0 * diff2 / ((1.0 - nx2) * (1.0 - ny2))
    out = np.arccosh(np.maximum(arg, 1.0)) / zeta
    return float(out) if np.ndim(out) == 0 else out


def distance_approximation(t1, t2, theta12, R: float, zeta: float):
    """Boundary expansion of the distance: 2R - (t1+t2) + (2/zeta) log sin(theta12/2).

    Valid when both points sit near the boundary and the angle is not
    too small (error scale given by ``distance_approximation_error_scale``).
    Raises ValueError at theta12 == 0 where the log term diverges.
    """
    theta12 = np.asarray(theta12, dtype=float)
    if np.any(theta12 <= 0.0):
        raise ValueError("theta12 must be positive for the boundary expansion")
    out = 2.0 * R - (np.asarray(t1, float) + np.asarray(t2, float)) \
        + (2.0 / zeta) * np.log(np.sin(theta12 / 2.0))
    return float(out) if np.ndim(out) == 0 else out


def distance_approximation_error_scale(t1, t2, theta12, R: float, zeta: float):
    """Squared ratio (theta_hat/theta)^2 controlling the expansion error."""
    theta_hat_sq = np.exp(-2.0 * zeta * (R - np.asarray(t1, float))) \
        + np.exp(-2.0 * zeta * (R - np.asarray(t2, float)))
    out = theta_hat_sq / np.asarray(theta12, float) ** 2
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# connection threshold


def connection_cos_gap(r1, r2, R: float, zeta: float):
    """u = 1 - cos(theta*) for the critical connection angle theta*.

    Two points at radii r1, r2 are within distance R of each other
    exactly when 1 - cos(theta12) <= u.  Values u <= 0 mean no angle
    connects; u >= 2 means every angle connects.  This is the raw
    quantity used by graph builders (it avoids the arccos round trip).
    """
    r1, r2 = np.broadcast_arrays(np.asarray(r1, float), np.asarray(r2, float))
    scalar = r1.ndim == 0
    r1 = np.atleast_1d(r1)
    r2 = np.atleast_1d(r2)
    u = np.empty(r1.shape)

    at_origin = (r1 == 0.0) | (r2 == 0.0)
    if at_origin.any():
        other = np.where(r1[at_origin] == 0.0, r2[at_origin], r1[at_origin])
        u[at_origin] = np.where(other <= R, 2.0, 0.0)

    rest = ~at_origin
    if rest.any():
        a1 = zeta * r1[rest]
        a2 = zeta * r2[rest]
        A = zeta * R
        B = np.abs(a1 - a2)
        if A < _EXP_SAFE and (a1 + a2).max() < _EXP_SAFE:
            vals = (math.cosh(A) - np.cosh(B)) / (np.sinh(a1) * np.sinh(a2))
        else:
            # log-space: cosh A - cosh B = e^A (1 + e^{-2A} - e^{B-A} - e^{-A-B}) / 2
            with np.errstate(divide="ignore", invalid="ignore"):
                log_num = A - math.log(2.0) + np.log1p(
                    np.exp(-2.0 * A) - np.exp(B - A) - np.exp(-A - B))
                vals = np.exp(log_num - _log_sinh(a1) - _log_sinh(a2))
            vals = np.where(B >= A, 0.0, vals)
        u[rest] = vals
    return float(u[0]) if scalar else u.reshape(np.broadcast_shapes(r1.shape, r2.shape))


def connection_angle_threshold(r1, r2, R: float, zeta: float):
    """Largest relative angle at which radii (r1, r2) are within distance R.

    Returns pi when every angle connects (r1 + r2 <= R) and 0 when none
    does.  Points at the origin connect to everything within radius R.
    Computed as 2 arcsin(sqrt(u/2)) from the cosine gap, which stays
    accurate for very small thresholds.
    """
    u = np.clip(connection_cos_gap(r1, r2, R, zeta), 0.0, 2.0)
    out = 2.0 * np.arcsin(np.sqrt(u / 2.0))
    return float(out) if np.ndim(out) == 0 else out


def _sin_power_integral(x, m: int):
    """Integral of sin(s)^m over [0, x], by the standard recurrence."""
    x = np.asarray(x, dtype=float)
    if m == 0:
        return x.copy()
    if m == 1:
        return 1.0 - np.cos(x)
    return ((m - 1) * _sin_power_integral(x, m - 2)
            - np.cos(x) * np.sin(x) ** (m - 1)) / m


def connection_probability_exact(t1, t2, R: float, d: int, zeta: float):
    """P(two points at depths t1, t2 connect), over a uniform relative angle.

    Exact: integrates the relative-angle density sin^{d-2}(theta)/kappa_{d-2}
    up to the critical angle.
    """
    theta_star = connection_angle_threshold(
        R - np.asarray(t1, float), R - np.asarray(t2, float), R, zeta)
    out = _sin_power_integral(theta_star, d - 2) / kappa(d - 2)
    return float(out) if np.ndim(out) == 0 else out


def connection_probability_asymptotic(t1, t2, R: float, d: int, zeta: float):
    """Large-R limit of the connection probability at depths (t1, t2).

    (2^{d-1} / ((d-1) kappa_{d-2})) * exp(-zeta (d-1) (R - t1 - t2) / 2),
    capped at 1.  Accurate when t1 + t2 stays well below R.
    """
    coef = 2.0 ** (d - 1) / ((d - 1) * kappa(d - 2))
    val = coef * np.exp(-zeta * (d - 1) * (R - np.asarray(t1, float) - np.asarray(t2, float)) / 2.0)
    out = np.minimum(val, 1.0)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# radial density


def _scaled_sinh_power_integral(a: float, x, m: int, scale: float):
    """exp(-scale) * integral_0^x sinh(a s)^m ds via the closed form.

    The binomial expansion is regrouped into sinh/cosh pairs so that all
    exponentials carry the common shift ``scale`` (no overflow for
    scale >= m*a*max(x)).
    """
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape)
    for j in range((m + 1) // 2):
        mj = m - 2 * j
        cj = math.comb(m, j) * (-1) ** j
        if m % 2 == 0:
            term = (np.exp(mj * a * x - scale) - np.exp(-mj * a * x - scale)) / (mj * a)
        else:
            term = (np.exp(mj * a * x - scale) + np.exp(-mj * a * x - scale)
                    - 2.0 * math.exp(-scale)) / (mj * a)
        total += cj * term
    if m % 2 == 0:
        j = m // 2
        total += math.comb(m, j) * (-1) ** j * x * math.exp(-scale)
    return total * 0.5 ** m


def radial_depth_density(t, params: ModelParams, R: float):
    """Exact density of the depth t = R - r of a sampled point.

    sinh^{d-1}(alpha (R - t)) / integral_0^R sinh^{d-1}(alpha s) ds,
    evaluated through a common exponential shift so large alpha*R cannot
    overflow.
    """
    t = np.asarray(t, dtype=float)
    m = params.d - 1
    a = params.alpha
    scale = m * a * R
    denom = _scaled_sinh_power_integral(a, np.asarray(R, float), m, scale)
    log_num = m * _log_sinh(a * (R - t))
    out = np.exp(log_num - scale) / denom
    return float(out) if np.ndim(out) == 0 else out


def radial_depth_density_approx(t, params: ModelParams):
    """Boundary approximation of the depth density: alpha(d-1) e^{-alpha(d-1)t}."""
    rate = params.alpha * (params.d - 1)
    out = rate * np.exp(-rate * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out
