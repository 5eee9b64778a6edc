"""Radial curvature conditions, the completeness integral, and radial distance.

For a radial potential ``f`` write ``x = r^2`` and ``q(x) = f'(x) + x f''(x)``;
``q`` is the metric coefficient along the complex line through the point and
``sqrt(q(r^2)) dr`` is the radial length element.  The pointwise conditions
checked here are::

    (a)  q(x) > 0
    (c)  f''(x) > 0
    (d)  f''(x) + x f'''(x) - x f''(x)^2 / f'(x) > 0
    (e)  (1/r) d/dr ( r d/dr ln q(r^2) ) > 0

and the completeness condition asks that ``∫_0^∞ sqrt(q(r^2)) dr`` diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError, SingularityError
from .jets import Jet, RadialPotential, compose, jet_elementary

CONDITIONS = ("a", "c", "d", "e")
QUAD_RTOL = 1e-8


def default_grid(r_max: float, points: int = 500) -> np.ndarray:
    return np.geomspace(1e-3, r_max, points)


def _q_jet(d) -> Jet:
    """Jet in ``x`` of ``q = f' + x f''`` up to order 2."""
    x, f1, f2, f3, f4 = d
    return Jet((f1 + x * f2, 2 * f2 + x * f3, 3 * f3 + x * f4))


def margin_e(p: RadialPotential, r: float) -> float:
    """Margin of condition (e) by jet composition in ``r``.

    With ``h(r) = ln q(r^2)`` the margin is ``h'(r)/r + h''(r)``.
    """
    x = r * r
    d = p.derivatives(x)
    q = _q_jet((x, d[1], d[2], d[3], d[4]))
    square = Jet((x, 2 * r, 2.0))
    h = jet_elementary("ln", compose(q.v, square))
    return h[1] / r + h[2]


def margins_at(p: RadialPotential, r: float) -> dict[str, float]:
    x = r * r
    f = p.derivatives(x)
    if f[1] == 0:
        raise SingularityError(f"{p.spec}: f'(r^2) = 0 at r = {r}; condition (d) is undefined")
    a = f[1] + x * f[2]
    try:
        e = margin_e(p, r)
    except DomainError:
        # ln q undefined where (a) fails
        e = math.nan
    return {
        "a": float(a),
        "c": float(f[2]),
        "d": float(f[2] + x * f[3] - x * f[2] ** 2 / f[1]),
        "e": float(e),
    }


@dataclass
class CompletenessQuadrature:
    """``∫_0^{R_max} sqrt(f'(r^2) + r^2 f''(r^2)) dr`` with a tail classification.

    ``tail_growth`` is the least-squares slope of ``ln(integrand)`` against
    ``ln r`` over the last 20% of the range.  ``classification`` is
    ``"divergent"`` when the integrand is positive and nondecreasing there and
    ``"inconclusive"`` otherwise; no finite computation can certify
    convergence, so ``"convergent"`` is never produced.
    """

    potential: str
    R_max: float
    integral: float
    tail_growth: float
    classification: str
    error_estimate: float = 0.0

    def as_dict(self) -> dict:
        return {
            "R_max": self.R_max,
            "value": self.integral,
            "tail_growth": self.tail_growth,
            "classification": self.classification,
        }


@dataclass
class ConditionReport:
    potential: str
    grid: np.ndarray
    margins: dict[str, np.ndarray]
    completeness: CompletenessQuadrature | None = None
    verdicts: dict[str, bool] = field(init=False)

    def __post_init__(self):
        self.verdicts = {k: bool(np.all(v > 0)) for k, v in self.margins.items()}

    @property
    def all_pass(self) -> bool:
        pointwise = all(self.verdicts.values())
        if self.completeness is None:
            return pointwise
        return pointwise and self.completeness.classification == "divergent"

    def as_dict(self) -> dict:
        def clean(values):
            return [None if not math.isfinite(v) else float(v) for v in values]

        out = {
            "potential": self.potential,
            "grid": [float(r) for r in self.grid],
            "margins": {k: clean(v) for k, v in self.margins.items()},
            "verdicts": {k: ("pass" if v else "fail") for k, v in self.verdicts.items()},
        }
        if self.completeness is not None:
            out["completeness"] = self.completeness.as_dict()
        return out


def check_conditions(p: RadialPotential, r_grid) -> ConditionReport:
    """Evaluate the margins of (a), (c), (d), (e) at every radius of ``r_grid``.

    Raises
    ------
    DomainError
        If the grid is not strictly increasing and positive, or leaves the
        potential's domain.
    SingularityError
        If ``f'`` vanishes at a grid point.
    """
    grid = np.asarray(r_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("r_grid must be a nonempty 1-D sequence")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("r_grid must be positive and strictly increasing")
    p.check_domain(grid * grid)
    margins = {k: np.empty(grid.size) for k in CONDITIONS}
    for idx, r in enumerate(grid):
        for k, v in margins_at(p, float(r)).items():
            margins[k][idx] = v
    return ConditionReport(p.spec, grid, margins)


def radial_integrand(p: RadialPotential, r):
    """``sqrt(f'(r^2) + r^2 f''(r^2))``; raises where the radicand is not positive."""
    r = np.asarray(r, dtype=float)
    x = r * r
    d = p.derivatives(x, order=2)
    q = d[1] + x * d[2]
    if np.any(q <= 0):
        bad = r[q <= 0].ravel()[0] if r.ndim else float(r)
        raise DomainError(f"{p.spec}: f' + r^2 f'' <= 0 at r = {bad}")
    return np.sqrt(q)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 13, 11, 9]] = np.concatenate([_WG[:3], _WG[:3]])
_GWEIGHTS[7] = _WG[3]


def _gk15(func, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = func(mid + half * _NODES)
    k = half * float(_KWEIGHTS @ vals)
    g = half * float(_GWEIGHTS @ vals)
    return k, abs(k - g)


def adaptive_gk(func, a: float, b: float, panels: int = 16, rtol: float = QUAD_RTOL,
                max_intervals: int = 20000) -> tuple[float, float]:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature starting from ``panels`` panels.

    Raises
    ------
    QuadratureError
        If the summed error estimate cannot be pushed below ``rtol`` times the
        integral within ``max_intervals`` subintervals.
    """
    edges = np.linspace(a, b, max(1, int(panels)) + 1)
    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(func, lo, hi)
        parts.append([err, lo, hi, val])
    while True:
        total = math.fsum(p[3] for p in parts)
        err = math.fsum(p[0] for p in parts)
        if err <= rtol * abs(total) or err == 0.0:
            return total, err
        if len(parts) >= max_intervals:
            raise QuadratureError(
                f"adaptive quadrature stalled at relative error {err / abs(total):.2e} "
                f"with {len(parts)} intervals"
            )
        parts.sort(key=lambda p: p[0])
        # split the worst quarter of intervals at once
        n_split = max(1, len(parts) // 4)
        worst = parts[-n_split:]
        del parts[-n_split:]
        for _, lo, hi, _ in worst:
            mid = 0.5 * (lo + hi)
            for x0, x1 in ((lo, mid), (mid, hi)):
                val, e = _gk15(func, x0, x1)
                parts.append([e, x0, x1, val])


def _check_radius(p: RadialPotential, r: float, name: str):
    if not (r >= 0 and math.isfinite(r)):
        raise DomainError(f"{name} must be a finite nonnegative radius, got {r}")
    if r * r >= p.domain_sup:
        raise DomainError(
            f"{p.spec}: {name} = {r} is outside [0, {math.sqrt(p.domain_sup)})"
        )


def completeness_integral(p: RadialPotential, R_max: float, n_panels: int = 16) -> CompletenessQuadrature:
    """Integrate the radial length element on ``[0, R_max]`` and classify its tail."""
    R_max = float(R_max)
    _check_radius(p, R_max, "R_max")
    if R_max <= 0:
        raise DomainError("R_max must be positive")
    value, err = adaptive_gk(lambda r: radial_integrand(p, r), 0.0, R_max, n_panels)
    tail = np.linspace(0.8 * R_max, R_max, 64)
    vals = radial_integrand(p, tail)
    slope = float(np.polyfit(np.log(tail), np.log(vals), 1)[0])
    steps = np.diff(vals)
    nondecreasing = bool(np.all(steps >= -1e-12 * np.max(vals)))
    divergent = bool(vals.min() > 0 and nondecreasing)
    return CompletenessQuadrature(
        p.spec, R_max, value, slope, "divergent" if divergent else "inconclusive", err
    )


def radial_distance(p: RadialPotential, r: float) -> float:
    """g-distance from the origin to any point of Euclidean radius ``r``."""
    r = float(r)
    _check_radius(p, r, "r")
    if r == 0:
        return 0.0
    value, _ = integrate.quad(
        lambda s: float(radial_integrand(p, s)), 0.0, r, epsabs=0.0, epsrel=1e-13, limit=500
    )
    return value


def radius_at_distance(p: RadialPotential, s: float) -> float:
    """Inverse of :func:`radial_distance` by bracketing root search."""
    from scipy.optimize import brentq

    if s < 0:
        raise DomainError(f"distance must be nonnegative, got {s}")
    if s == 0:
        return 0.0
    hi = 1.0 if math.isinf(p.domain_sup) else 0.5 * math.sqrt(p.domain_sup)
    while radial_distance(p, hi) < s:
        if math.isinf(p.domain_sup):
            hi *= 2
        else:
            hi = 0.5 * (hi + math.sqrt(p.domain_sup))
            if hi * hi >= p.domain_sup:
                raise DomainError(f"{p.spec}: distance {s} is not representable in double precision")
    return brentq(lambda r: radial_distance(p, r) - s, 0.0, hi, xtol=1e-15, rtol=1e-15)
