"""Limit formulas for tree counts in hyperbolic random geometric graphs.

Everything here is a closed form or a deterministic quadrature; no
sampling.  The key quantity is the depth-profile integral

    a_gamma(p) = integral over [0, gamma*R] of exp(c t) dt,
    c = zeta (d-1) (p - 2 alpha/zeta) / 2,

whose finiteness as R grows is governed by the ratio 2*alpha/zeta
against the tree's degrees.  Expectation and variance growth formulas,
the regime classifier, and the six-term normal-approximation bound all
reduce to combinations of a_gamma and elementary factors.

``expected_subtree_exact`` integrates the exact (non-asymptotic) depth
density against the exact connection kernel over the tree and is the
reference the asymptotic formulas are checked against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .census import TreeSpec
from .geometry import (
    ModelParams,
    connection_probability_exact,
    kappa,
    radial_depth_density,
)

__all__ = [
    "RegimeError",
    "RegimeWarning",
    "RegimeReport",
    "VarianceOrders",
    "SteinBounds",
    "a_gamma",
    "expected_subtree_asymptotic",
    "expected_subtree_full",
    "expected_subtree_exact",
    "log_expectation_limit",
    "variance_orders",
    "regime_classify",
    "stein_bounds",
]

_DEGENERATE_TOL = 1e-12


class RegimeError(ValueError):
    """A closed form was requested outside the parameter regime where it holds."""


class RegimeWarning(UserWarning):
    """A computation is running outside its guaranteed regime."""


def _positive_part(x: float) -> float:
    return max(float(x), 0.0)


def _growth_rate(p: float, params: ModelParams) -> float:
    """Exponent c in the integrand exp(c t) of a_gamma(p)."""
    return params.zeta * (params.d - 1) * (p - 2.0 * params.alpha / params.zeta) / 2.0


def a_gamma(p: float, params: ModelParams, R: float | None = None) -> float:
    """Depth-profile integral over the annulus [0, gamma*R] for degree p."""
    if p < 1:
        raise ValueError("degree argument must be >= 1")
    R = params.radius() if R is None else float(R)
    span = params.gamma * R
    c = _growth_rate(p, params)
    if abs(c) <= _DEGENERATE_TOL:
        return span
    try:
        return math.expm1(c * span) / c
    except OverflowError:
        return math.inf


def _log_poisson_scale(k: int, params: ModelParams, R: float) -> float:
    """log of n^k exp(-zeta (d-1)(k-1) R / 2)."""
    return k * math.log(params.n) - params.zeta * (params.d - 1) * (k - 1) * R / 2.0


def expected_subtree_asymptotic(tree: TreeSpec, params: ModelParams,
                                R: float | None = None) -> float:
    """Leading-order expected census of ``tree`` among annulus points.

    Valid for gamma in (0,1); at gamma = 1/2 the value is only an order
    statement (unknown constant), which is flagged with a warning.
    """
    if tree.k < 2:
        raise ValueError("census asymptotics need k >= 2")
    if params.gamma == 0.5:
        warnings.warn("gamma = 1/2: order-only value, constant not guaranteed",
                      RegimeWarning, stacklevel=2)
    R = params.radius() if R is None else float(R)
    d, k = params.d, tree.k
    prefactor = (2.0 ** (d - 1) / kappa(d - 2)) ** (k - 1) \
        * params.alpha ** k * (d - 1)
    profile = 1.0
    for deg in tree.degrees:
        profile *= a_gamma(int(deg), params, R)
    return prefactor * math.exp(_log_poisson_scale(k, params, R)) * profile


def expected_subtree_full(tree: TreeSpec, params: ModelParams,
                          R: float | None = None) -> float:
    """Limit constant times n^k e^{-zeta(d-1)(k-1)R/2} for the full census.

    Only exists when 2*alpha/zeta exceeds the largest tree degree;
    otherwise the constant diverges and a :class:`RegimeError` is raised.
    """
    if tree.k < 2:
        raise ValueError("census asymptotics need k >= 2")
    d_max = tree.max_degree
    if not 2.0 * params.alpha / params.zeta > d_max:
        raise RegimeError(
            f"full-census constant needs 2*alpha/zeta > {d_max}, "
            f"got {2.0 * params.alpha / params.zeta:.6g}")
    R = params.radius() if R is None else float(R)
    d, k = params.d, tree.k
    value = (2.0 ** (d - 1) / ((d - 1) * kappa(d - 2))) ** (k - 1) \
        * params.alpha ** k
    for deg in tree.degrees:
        value /= params.alpha - params.zeta * int(deg) / 2.0
    return value * math.exp(_log_poisson_scale(k, params, R))


def log_expectation_limit(k: int, c: float, alpha: float, zeta: float,
                          d: int, branch: str) -> float:
    """Limit of log E(census) / (R ∨ log n) for the k-star when R/log n -> c.

    Branch "ii" covers 1 < 2*alpha/zeta <= k-1, branch "iii" covers
    0 < 2*alpha/zeta <= 1.  c may be 0 or math.inf.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    if c < 0:
        raise ValueError("c must lie in [0, inf]")
    ratio = 2.0 * alpha / zeta
    if branch == "ii":
        if not 1.0 < ratio <= k - 1:
            raise RegimeError(f"branch ii needs 1 < 2*alpha/zeta <= {k - 1}")
        slope = alpha * (d - 1)
    elif branch == "iii":
        if not 0.0 < ratio <= 1.0:
            raise RegimeError("branch iii needs 0 < 2*alpha/zeta <= 1")
        slope = (d - 1) * (alpha * k - zeta * (k - 1) / 2.0)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    inv_c = math.inf if c == 0 else 1.0 / c
    first = 0.0 if math.isinf(c) else k / max(c, 1.0)
    second = slope / max(1.0, inv_c)
    return first - second


@dataclass(frozen=True)
class VarianceOrders:
    """Lower-bound terms for the census variance, plus exact orders when known.

    ``overlap_term`` comes from two tree copies sharing their max-degree
    vertex; ``poisson_term`` is the expectation-order contribution.  The
    variance is bounded below by a constant times the max of the two.
    When alpha/zeta exceeds the max degree the variance is in fact of
    order ``max(exact_order_pair)`` up to an unspecified constant.
    """

    overlap_term: float
    poisson_term: float
    exact_order_pair: tuple | None

    @property
    def lower_bound(self) -> float:
        return max(self.overlap_term, self.poisson_term)

    @property
    def exact_order(self) -> float | None:
        return max(self.exact_order_pair) if self.exact_order_pair else None

    def to_dict(self) -> dict:
        return {"overlap_term": self.overlap_term,
                "poisson_term": self.poisson_term,
                "exact_order_pair": list(self.exact_order_pair)
                if self.exact_order_pair else None}


def variance_orders(tree: TreeSpec, params: ModelParams,
                    R: float | None = None) -> VarianceOrders:
    """Evaluate the census-variance lower-bound terms at the given scale."""
    if tree.k < 2:
        raise ValueError("census asymptotics need k >= 2")
    R = params.radius() if R is None else float(R)
    k = tree.k
    degs = sorted(int(x) for x in tree.degrees)
    d_max = degs[-1]
    log_pair = (2 * k - 1) * math.log(params.n) \
        - params.zeta * (params.d - 1) * (k - 1) * R
    overlap = math.exp(log_pair) * a_gamma(2 * d_max, params, R)
    for deg in degs[:-1]:
        overlap *= a_gamma(deg, params, R) ** 2
    poisson = math.exp(_log_poisson_scale(k, params, R))
    for deg in degs:
        poisson *= a_gamma(deg, params, R)
    exact = None
    if params.alpha / params.zeta > d_max:
        exact = (math.exp(log_pair), math.exp(_log_poisson_scale(k, params, R)))
    return VarianceOrders(overlap_term=overlap, poisson_term=poisson,
                          exact_order_pair=exact)


@dataclass(frozen=True)
class RegimeReport:
    """Threshold flags and growth exponents for one tree/parameter pair.

    Exponents are powers of n under the thermodynamic radius rule.  When
    2*alpha/zeta sits exactly on an integer the clean power laws pick up
    logarithmic corrections, flagged by ``integer_ratio_correction``.
    """

    ratio_2alpha_zeta: float
    ratio_alpha_zeta: float
    above_2alpha_dmax: bool
    above_alpha_dmax: bool
    above_2alpha_one: bool
    at_most_2alpha_one: bool
    expectation_exponent: float
    variance_exponent_overlap: float
    variance_exponent_poisson: float
    clt_applicable: bool
    integer_ratio_correction: bool

    def to_dict(self) -> dict:
        return asdict(self)


def regime_classify(tree: TreeSpec, params: ModelParams) -> RegimeReport:
    """Classify the parameter regime and report thermodynamic-rule exponents."""
    ratio2 = 2.0 * params.alpha / params.zeta
    ratio1 = params.alpha / params.zeta
    degs = sorted(int(x) for x in tree.degrees)
    d_max = degs[-1] if degs else 0
    gamma = params.gamma
    exp_expect = 1.0 + gamma * sum(_positive_part(deg - ratio2) for deg in degs)
    exp_overlap = 1.0 + 2.0 * gamma * _positive_part(d_max - ratio1) \
        + 2.0 * gamma * sum(_positive_part(deg - ratio2) for deg in degs[:-1])
    return RegimeReport(
        ratio_2alpha_zeta=ratio2,
        ratio_alpha_zeta=ratio1,
        above_2alpha_dmax=ratio2 > d_max,
        above_alpha_dmax=ratio1 > d_max,
        above_2alpha_one=ratio2 > 1.0,
        at_most_2alpha_one=ratio2 <= 1.0,
        expectation_exponent=exp_expect,
        variance_exponent_overlap=exp_overlap,
        variance_exponent_poisson=exp_expect,
        clt_applicable=ratio1 > d_max,
        integer_ratio_correction=abs(ratio2 - round(ratio2)) < 1e-9,
    )


@dataclass(frozen=True)
class SteinBounds:
    """The six normal-approximation error terms and their two sums."""

    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float

    @property
    def wasserstein(self) -> float:
        return self.w1 + self.w2 + self.w3

    @property
    def kolmogorov(self) -> float:
        return self.w1 + self.w2 + self.w3 + self.w4 + self.w5 + self.w6

    def to_dict(self) -> dict:
        out = asdict(self)
        out["wasserstein"] = self.wasserstein
        out["kolmogorov"] = self.kolmogorov
        return out


def stein_bounds(var_estimate: float, c1: float, c2: float, c3: float,
                 lambda_total: float, q_integrals) -> SteinBounds:
    """Evaluate the six-term normal-approximation bound.

    ``c1``/``c2`` are the sup fifth moments of the first and second
    difference of the functional, ``c3`` the integrated third moment of
    the first difference, ``lambda_total`` the total intensity, and
    ``q_integrals`` the three interaction-probability integrals (powers
    1/20, 1/10, 1/10) feeding the first, second and sixth term.
    """
    if not var_estimate > 0:
        raise ValueError("variance must be positive")
    if min(c1, c2, c3, lambda_total) < 0 or min(q_integrals) < 0:
        raise ValueError("moment inputs must be nonnegative")
    q1, q2, q3 = (float(q) for q in q_integrals)
    v = float(var_estimate)
    lam = float(lambda_total)
    w1 = 2.0 * (c1 * c2) ** 0.2 / v * math.sqrt(q1)
    w2 = c2 ** 0.4 / v * math.sqrt(q2)
    w3 = c3 / v ** 1.5
    w4 = c1 ** 0.6 * lam / v ** 1.5 \
        + (c1 ** 0.8 * lam ** 1.25 + 2.0 * c1 ** 0.8 * lam ** 1.5) / v ** 2
    w5 = c1 ** 0.4 * math.sqrt(lam) / v
    w6 = (math.sqrt(6.0) * (c1 * c2) ** 0.2 + math.sqrt(3.0) * c2 ** 0.4) \
        / v * math.sqrt(q3)
    return SteinBounds(w1=w1, w2=w2, w3=w3, w4=w4, w5=w5, w6=w6)


# ---------------------------------------------------------------------------
# exact (non-asymptotic) expectation by quadrature


def expected_subtree_exact(tree: TreeSpec, params: ModelParams,
                           R: float | None = None, nodes: int = 200) -> float:
    """Expected census by exact integration over depth profiles.

    Integrates the exact depth density against the exact pairwise
    connection kernel along the tree (dynamic programming from the
    leaves in), with Gauss-Legendre quadrature on [0, gamma*R].  No
    asymptotics involved; serves as the reference for the closed forms.
    """
    R = params.radius() if R is None else float(R)
    span = params.gamma * R
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    t = 0.5 * span * (x + 1.0)
    wt = 0.5 * span * w * radial_depth_density(t, params, R)

    kernel = connection_probability_exact(t[:, None], t[None, :], R,
                                          params.d, params.zeta)
    order, parent_index = tree.bfs_order()
    children: dict[int, list] = {i: [] for i in range(tree.k)}
    for pos in range(1, tree.k):
        children[parent_index[pos]].append(pos)

    inbound: dict[int, np.ndarray] = {}
    for pos in range(tree.k - 1, 0, -1):
        msg = wt.copy()
        for child in children[pos]:
            msg *= inbound[child]
        inbound[pos] = kernel @ msg
    root_integrand = wt.copy()
    for child in children[0]:
        root_integrand *= inbound[child]
    return float(params.n) ** tree.k * float(np.sum(root_integrand))
