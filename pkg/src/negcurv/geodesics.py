"""Geodesics of realified radial Kähler metrics.

Christoffel symbols come from finite differences of the real metric
(:func:`negcurv.realified.christoffel_at`), the geodesic equation is
integrated with classical fixed-step RK4, and distances between two points
are estimated by multi-start shooting.

Potentials with a bounded domain (``log_ball``) are integrated in geodesic
normal coordinates at the origin, ``w = arctanh(|z|) z / |z|``.  In Cartesian
coordinates a radial geodesic of the disc reaches ``|z| = 1.0`` in double
precision after about 18 units of time even though the metric is complete;
in normal coordinates the distance from the origin is just ``|w|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, DomainExited, NoConvergence, NotPositiveDefinite, StepTooLarge
from .jets import RadialPotential
from .radial import radial_distance
from .realified import (
    FD_STEP,
    RealifiedMetric,
    complex_structure,
)

DRIFT_LIMIT = 1e-4


def default_steps(T: float) -> int:
    return max(200, int(math.ceil(100 * abs(T))))


# -- normal chart for the unit ball -------------------------------------------


def _sinhc_excess_over_sq(y):
    """``(sinh(y)/y - 1) / y^2``, accurate near 0."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 0.1
    ys = np.where(small, 1.0, y)
    y2 = y * y
    series = 1 / 6 + y2 / 120 + y2 * y2 / 5040 + y2**3 / 362880
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (np.sinh(ys) / ys - 1.0) / (ys * ys)
    return np.where(small, series, direct)


def _ball_normal_metric(w: np.ndarray) -> np.ndarray:
    # G = P_u + a P_Ju + b P_perp, a = sinh^2(2ρ)/(4ρ^2), b = sinh^2(ρ)/ρ^2, ρ = |w|;
    # written as I + α (Jw)(Jw)^T + β (ρ^2 I - w w^T - (Jw)(Jw)^T) with
    # α = (a - 1)/ρ^2 and β = (b - 1)/ρ^2, which are smooth at w = 0
    w = np.asarray(w, dtype=float)
    dim = w.shape[-1]
    rho2 = np.sum(w * w, axis=-1)
    rho = np.sqrt(rho2)
    s2 = _sinhc_excess_over_sq(2 * rho)  # (S(2ρ))/(2ρ)^2
    s1 = _sinhc_excess_over_sq(rho)
    S2 = s2 * 4 * rho2
    S1 = s1 * rho2
    alpha = 4 * s2 * (2 + S2)
    beta = s1 * (2 + S1)
    Jw = w @ complex_structure(dim).T
    eye = np.eye(dim)
    ww = w[..., :, None] * w[..., None, :]
    jj = Jw[..., :, None] * Jw[..., None, :]
    return (
        eye
        + alpha[..., None, None] * jj
        + beta[..., None, None] * (rho2[..., None, None] * eye - ww - jj)
    )


def _ball_to_cartesian(w):
    w = np.asarray(w, dtype=float)
    rho = np.sqrt(np.sum(w * w, axis=-1, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(rho < 1e-8, 1.0 - rho**2 / 3, np.tanh(rho) / np.where(rho == 0, 1, rho))
    return w * scale


def _ball_from_cartesian(x):
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1, keepdims=True))
    if np.any(r >= 1):
        raise DomainError(f"point {x.tolist()} lies outside the unit ball")
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r < 1e-8, 1.0 + r**2 / 3, np.arctanh(r) / np.where(r == 0, 1, r))
    return x * scale


def geodesic_metric(p: RadialPotential, n: int) -> RealifiedMetric:
    """Realified metric in the chart used for geodesic work.

    Cartesian coordinates for potentials defined on all of C^n, geodesic
    normal coordinates for ``log_ball``.
    """
    if p.kind == "log_ball":
        return RealifiedMetric(
            2 * n,
            _ball_normal_metric,
            f"{p.spec} (normal chart, n={n})",
            None,
            _ball_to_cartesian,
            _ball_from_cartesian,
            potential=p,
        )
    return RealifiedMetric.from_potential(p, n)


# -- integration --------------------------------------------------------------


@dataclass
class GeodesicPath:
    """Samples of a geodesic in the chart of ``metric``.

    ``exited`` is set when integration stopped early at the edge of the
    metric's domain; ``t`` then ends at the last valid sample.
    """

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    metric: RealifiedMetric = field(repr=False)
    speeds: np.ndarray = field(repr=False, default=None)
    exited: bool = False

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def speed_drift(self) -> float:
        s0 = self.speeds[0]
        if s0 == 0:
            return 0.0
        return float(np.max(np.abs(self.speeds - s0)) / s0)

    @property
    def length(self) -> float:
        return float(np.trapezoid(self.speeds, self.t))

    def cartesian(self) -> np.ndarray:
        return self.metric.cartesian(self.points)

    def at(self, t: float) -> np.ndarray:
        """Point at time ``t`` by one RK4 step from the preceding sample."""
        if not self.t[0] <= t <= self.t[-1]:
            raise ValueError(f"t = {t} is outside [{self.t[0]}, {self.t[-1]}]")
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        k = min(k, len(self.t) - 1)
        dt = t - self.t[k]
        if dt == 0:
            return self.points[k].copy()
        x, _ = _rk4_step(self.metric, self.points[k], self.velocities[k], dt)
        return x


def _acceleration(G: RealifiedMetric, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``-Γ^a_{bc} v^b v^c`` for a batch of states ``x, v`` of shape ``(B, dim)``."""
    dim = G.dim
    B = x.shape[0]
    h = FD_STEP
    offsets = np.concatenate([np.zeros((1, dim)), h * np.eye(dim), -h * np.eye(dim),
                              0.5 * h * np.eye(dim), -0.5 * h * np.eye(dim)])
    vals = G((x[:, None, :] + offsets[None]).reshape(-1, dim)).reshape(B, 1 + 4 * dim, dim, dim)
    g0 = vals[:, 0]
    d1 = (vals[:, 1: 1 + dim] - vals[:, 1 + dim: 1 + 2 * dim]) / (2 * h)
    d2 = (vals[:, 1 + 2 * dim: 1 + 3 * dim] - vals[:, 1 + 3 * dim:]) / h
    dG = (4 * d2 - d1) / 3
    first = 0.5 * (np.einsum("zbac->zabc", dG) + np.einsum("zcab->zabc", dG) - dG)
    gamma = np.einsum("zad,zdbc->zabc", np.linalg.inv(g0), first)
    return -np.einsum("zabc,zb,zc->za", gamma, v, v)


def _rk4_step(G, x, v, dt):
    """One RK4 step; ``x, v`` are single states or batches of shape ``(B, dim)``."""
    single = x.ndim == 1
    if single:
        x, v = x[None], v[None]
    a1 = _acceleration(G, x, v)
    x2, v2 = x + 0.5 * dt * v, v + 0.5 * dt * a1
    a2 = _acceleration(G, x2, v2)
    x3, v3 = x + 0.5 * dt * v2, v + 0.5 * dt * a2
    a3 = _acceleration(G, x3, v3)
    x4, v4 = x + dt * v3, v + dt * a3
    a4 = _acceleration(G, x4, v4)
    x_new = x + dt / 6 * (v + 2 * v2 + 2 * v3 + v4)
    v_new = v + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    if single:
        return x_new[0], v_new[0]
    return x_new, v_new


def _speed(G: RealifiedMetric, x, v) -> float:
    Gx = G(x)
    try:
        np.linalg.cholesky(Gx)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"metric is not positive definite at {x.tolist()}") from None
    return math.sqrt(float(v @ Gx @ v))


def integrate_geodesic(G: RealifiedMetric, x0, v0, T: float, steps: int | None = None,
                       check_drift: bool = True) -> GeodesicPath:
    """Integrate the geodesic equation from ``(x0, v0)`` for time ``T`` with RK4.

    ``x0`` and ``v0`` are in the chart of ``G``.  ``steps`` defaults to
    ``max(200, 100 T)``.

    Raises
    ------
    DomainExited
        If the path leaves the region where ``G`` is defined and positive
        definite; the partial path is attached to the exception.
    StepTooLarge
        If the relative drift of the g-speed exceeds 1e-4.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    if not G.contains(x):
        raise DomainExited(f"start point {x.tolist()} is outside the domain", exit_time=0.0)
    steps = default_steps(T) if steps is None else int(steps)
    dt = T / steps
    ts = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    speeds = [_speed(G, x, v)]

    def partial():
        return GeodesicPath(np.array(ts), np.array(xs), np.array(vs), G, np.array(speeds), True)

    for k in range(1, steps + 1):
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                x_new, v_new = _rk4_step(G, x, v, dt)
            ok = G.contains(x_new) and np.all(np.isfinite(x_new)) and np.all(np.isfinite(v_new))
            if ok:
                s = _speed(G, x_new, v_new)
        except (FloatingPointError, NotPositiveDefinite, np.linalg.LinAlgError, ValueError):
            ok = False
        if not ok:
            raise DomainExited(
                f"geodesic left the domain of {G.provenance} after t = {ts[-1]:.6g}",
                exit_time=ts[-1],
                path=partial(),
            )
        x, v = x_new, v_new
        ts.append(k * dt)
        xs.append(x.copy())
        vs.append(v.copy())
        speeds.append(s)
    path = GeodesicPath(np.array(ts), np.array(xs), np.array(vs), G, np.array(speeds))
    if check_drift and path.speed_drift > DRIFT_LIMIT:
        raise StepTooLarge(
            f"speed drift {path.speed_drift:.2e} exceeds {DRIFT_LIMIT:g}; use more steps",
            drift=path.speed_drift,
        )
    return path


def unit_speed(G: RealifiedMetric, x, direction) -> np.ndarray:
    direction = np.asarray(direction, dtype=float)
    s = G.norm(x, direction)
    if s == 0:
        raise ValueError("direction must be nonzero")
    return direction / s


def chart_vector(G: RealifiedMetric, x_cart, v_cart) -> np.ndarray:
    """Push a Cartesian tangent vector at ``x_cart`` into the chart of ``G``."""
    x_cart = np.asarray(x_cart, dtype=float)
    v_cart = np.asarray(v_cart, dtype=float)
    if G.from_cartesian is None:
        return v_cart
    h = 1e-7
    return (G.chart(x_cart + h * v_cart) - G.chart(x_cart - h * v_cart)) / (2 * h)


def radial_ray(p: RadialPotential, n: int, T: float, direction=None) -> GeodesicPath:
    """Unit-speed geodesic from the origin along ``direction`` (default ``e_1``)."""
    G = geodesic_metric(p, n)
    d = np.zeros(2 * n)
    d[0] = 1.0
    if direction is not None:
        d = np.asarray(direction, dtype=float)
    x0 = np.zeros(2 * n)
    v0 = unit_speed(G, x0, chart_vector(G, x0, d))
    return integrate_geodesic(G, x0, v0, T)


# -- distances ----------------------------------------------------------------


def _stratified_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic, roughly even unit directions."""
    if dim == 2:
        ang = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    from scipy.stats import norm, qmc

    m = 1 << max(1, math.ceil(math.log2(count)))
    pts = qmc.Sobol(dim, scramble=True, seed=0).random(m)[:count]
    g = norm.ppf(np.clip(pts, 1e-6, 1 - 1e-6))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _step_rows(G, X, V, dt):
    """RK4 step for a batch, returning a mask of rows that stayed valid."""
    with np.errstate(all="ignore"):
        try:
            Xn, Vn = _rk4_step(G, X, V, dt)
        except (DomainError, NotPositiveDefinite, np.linalg.LinAlgError):
            # isolate the offending rows
            Xn = np.full_like(X, np.nan)
            Vn = np.full_like(V, np.nan)
            for k in range(len(X)):
                try:
                    Xn[k], Vn[k] = _rk4_step(G, X[k], V[k], dt)
                except (DomainError, NotPositiveDefinite, np.linalg.LinAlgError):
                    pass
    ok = np.isfinite(Xn).all(axis=1) & np.isfinite(Vn).all(axis=1)
    if G.in_domain is not None:
        ok &= G.in_domain(np.where(ok[:, None], Xn, 0.0))
    return Xn, Vn, ok


def geodesic_endpoints(G: RealifiedMetric, x0, V0, T: float, steps: int) -> np.ndarray:
    """Endpoints of the geodesics from ``x0`` with initial velocities ``V0`` (rows).

    Rows whose geodesic leaves the domain come back as NaN.
    """
    V = np.array(V0, dtype=float)
    X = np.repeat(np.asarray(x0, dtype=float)[None], len(V), axis=0)
    alive = np.ones(len(V), dtype=bool)
    dt = T / steps
    for _ in range(steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        Xn, Vn, ok = _step_rows(G, X[idx], V[idx], dt)
        X[idx[ok]] = Xn[ok]
        V[idx[ok]] = Vn[ok]
        alive[idx[~ok]] = False
    X[~alive] = np.nan
    return X


@dataclass
class ShootingResult:
    length: float
    residual: float
    v0: np.ndarray
    restart: int
    converged: bool


def shoot(G: RealifiedMetric, p, q, starts, steps: int = 200, tol: float = 1e-9,
          max_iter: int = 40) -> list[ShootingResult]:
    """Solve ``exp_p(v) = q`` by damped Newton from each row of ``starts``.

    All restarts and all Jacobian columns (central differences in ``v``) are
    integrated as one batch per iteration.  Points are in the chart of ``G``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dim = G.dim
    V = np.array(starts, dtype=float)
    R = len(V)
    residual = np.full(R, np.inf)
    done = np.zeros(R, dtype=bool)
    failed = np.zeros(R, dtype=bool)
    eye = np.eye(dim)
    for _ in range(max_iter):
        active = np.flatnonzero(~done & ~failed)
        if active.size == 0:
            break
        eps = 1e-6 * np.maximum(1.0, np.linalg.norm(V[active], axis=1))
        probes = [V[active]]
        for k in range(dim):
            probes.append(V[active] + eps[:, None] * eye[k])
            probes.append(V[active] - eps[:, None] * eye[k])
        E = geodesic_endpoints(G, p, np.concatenate(probes), 1.0, steps)
        E = E.reshape(2 * dim + 1, active.size, dim)
        F = E[0] - q
        jac = np.stack(
            [(E[1 + 2 * k] - E[2 + 2 * k]) / (2 * eps[:, None]) for k in range(dim)], axis=2
        )
        for j, r in enumerate(active):
            if not np.all(np.isfinite(F[j])) or not np.all(np.isfinite(jac[j])):
                failed[r] = True
                continue
            res = float(np.linalg.norm(F[j]))
            if res <= tol:
                residual[r] = res
                done[r] = True
                continue
            if res > 1.5 * residual[r]:
                failed[r] = True
                continue
            residual[r] = res
            try:
                step = np.linalg.solve(jac[j], -F[j])
            except np.linalg.LinAlgError:
                failed[r] = True
                continue
            # cap the update at the size of the current velocity
            cap = max(1.0, float(np.linalg.norm(V[r])))
            norm = float(np.linalg.norm(step))
            if norm > cap:
                step *= cap / norm
            V[r] = V[r] + step
    out = []
    for r in range(R):
        length = G.norm(p, V[r]) if done[r] else math.inf
        out.append(ShootingResult(length, float(residual[r]), V[r].copy(), r, bool(done[r])))
    return out


def distance_estimate(G: RealifiedMetric, p, q, budget: int = 32, steps: int = 200,
                      tol: float = 1e-9) -> float:
    """Upper estimate of the g-distance between Cartesian points ``p`` and ``q``.

    If ``G`` carries its radial potential and one point is the origin, the
    exact radial distance is returned.  Otherwise ``budget`` shooting
    restarts (the chord direction first, then stratified directions scaled
    to the chord's g-length) each look for the initial velocity whose time-1
    geodesic from ``p`` ends at ``q``; a converged restart's length is the
    g-norm of that velocity.  The shortest converged length wins, ties going
    to the lowest restart index.

    Raises
    ------
    NoConvergence
        If no restart hits ``q`` within ``tol``; carries the best attempt.
    """
    p_cart = np.asarray(p, dtype=float)
    q_cart = np.asarray(q, dtype=float)
    if np.array_equal(p_cart, q_cart):
        return 0.0
    pot = G.potential
    if pot is not None:
        if not np.any(p_cart):
            return radial_distance(pot, float(np.linalg.norm(q_cart)))
        if not np.any(q_cart):
            return radial_distance(pot, float(np.linalg.norm(p_cart)))
    pc, qc = G.chart(p_cart), G.chart(q_cart)
    chord = qc - pc
    scale = G.norm(pc, chord)
    starts = [chord]
    if budget > 1:
        for d in _stratified_directions(G.dim, budget - 1):
            starts.append(d * scale / G.norm(pc, d))
    results = shoot(G, pc, qc, np.array(starts), steps, tol)
    converged = [r for r in results if r.converged]
    if not converged:
        best = min(results, key=lambda r: (r.residual, r.restart))
        raise NoConvergence(
            f"no shooting restart reached the target (best endpoint miss {best.residual:.2e})",
            best_length=best.length,
            residual=best.residual,
        )
    return min(converged, key=lambda r: (r.length, r.restart)).length


def disc_distance(z, w) -> float:
    """Distance in the unit disc with curvature -4 (metric ``|dz|^2 / (1 - |z|^2)^2``)."""
    z = complex(z)
    w = complex(w)
    num = 2 * abs(z - w) ** 2
    den = (1 - abs(z) ** 2) * (1 - abs(w) ** 2)
    return 0.5 * math.acosh(1 + num / den)
