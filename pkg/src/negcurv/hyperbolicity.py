"""Coarse geometry: products of metric spaces, Gromov products, δ estimators,
thin-triangle defects, bi-Lipschitz ratios, and contraction-bound checkers.

Points of a space are rows of a float array; a product space stores the
coordinates of its first factor followed by those of its second.  Every
distance oracle is vectorized over leading axes, so ``S.distance(P, Q)``
accepts any two broadcast-compatible stacks of points.

Samplers are written as maps from uniform variates to points, and every
estimator draws its uniforms in one row-major block.  A sample of ``m``
quadruples is therefore a prefix of any larger sample with the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import NotAGeodesic

Points = np.ndarray
Distance = Callable[[Points, Points], np.ndarray]

CHUNK = 50_000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class MetricSpaceHandle:
    """A metric space given by oracles.

    ``from_uniform(U, scale)`` turns an array of uniforms of shape
    ``(..., n_uniform)`` into points of shape ``(..., dim)``; ``scale`` is the
    space's size parameter (segment length, hyperbolic radius, ...).
    ``geodesic(p, q, s)`` returns the points at fractions ``s`` of the way
    from ``p`` to ``q``; ``ray(t)`` returns the points at distance ``t`` along
    a geodesic ray from ``basepoint``.
    """

    name: str
    dim: int
    distance: Distance
    from_uniform: Callable[[np.ndarray, float], Points]
    n_uniform: int
    geodesic: Callable[[Points, Points, np.ndarray], Points] | None = None
    ray: Callable[[np.ndarray], Points] | None = None
    combiner: str | None = None
    factors: tuple = field(default=(), repr=False)

    def sample(self, rng: np.random.Generator, m: int, scale: float) -> Points:
        return self.from_uniform(rng.random((m, self.n_uniform)), scale)

    @property
    def basepoint(self) -> Points:
        if self.ray is None:
            raise AttributeError(f"{self.name} has no ray")
        return self.ray(np.zeros(1))[0]

    def d(self, p, q) -> float:
        return float(self.distance(np.asarray(p, dtype=float), np.asarray(q, dtype=float)))


def _interval_geodesic(p, q, s):
    s = np.asarray(s, dtype=float)[..., None]
    return (1 - s) * p + s * q


def real_line(lo: float = 0.0) -> MetricSpaceHandle:
    """Real line; samples are uniform on ``[lo, lo + scale]``."""
    return MetricSpaceHandle(
        "line",
        1,
        lambda P, Q: np.abs(P[..., 0] - Q[..., 0]),
        lambda U, scale: lo + scale * U,
        1,
        _interval_geodesic,
        lambda t: np.asarray(t, dtype=float)[..., None] + lo,
    )


def ray_space() -> MetricSpaceHandle:
    """The ray ``[0, ∞)`` with its standard metric."""
    return MetricSpaceHandle(
        "ray",
        1,
        lambda P, Q: np.abs(P[..., 0] - Q[..., 0]),
        lambda U, scale: scale * U,
        1,
        _interval_geodesic,
        lambda t: np.asarray(t, dtype=float)[..., None],
    )


def euclidean_plane() -> MetricSpaceHandle:
    """R^2; samples are uniform in the square ``[0, scale]^2``."""
    return MetricSpaceHandle(
        "plane",
        2,
        lambda P, Q: np.sqrt(np.sum((P - Q) ** 2, axis=-1)),
        lambda U, scale: scale * U,
        2,
        _interval_geodesic,
        lambda t: np.stack([np.asarray(t, float), np.zeros_like(np.asarray(t, float))], -1),
    )


# -- the disc of curvature -4 ---------------------------------------------------
#
# Points are stored as (ρ, θ): hyperbolic distance from the centre and angle.
# Cartesian disc coordinates tanh(ρ) e^{iθ} stop being representable in double
# precision near ρ ≈ 19, so nothing here goes through them.


def disc_distance_polar(P, Q) -> np.ndarray:
    """Distance of the curvature -4 disc between points in polar form.

    ``sinh^2 d = sinh^2(ρ1 - ρ2) + sinh(2ρ1) sinh(2ρ2) sin^2((θ1 - θ2)/2)``,
    which has no cancellation for nearby points.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    r1, t1 = P[..., 0], P[..., 1]
    r2, t2 = Q[..., 0], Q[..., 1]
    s = np.sinh(r1 - r2) ** 2 + np.sinh(2 * r1) * np.sinh(2 * r2) * np.sin(0.5 * (t1 - t2)) ** 2
    return np.arcsinh(np.sqrt(s))


def disc_distance_cartesian(z, w) -> np.ndarray:
    """``(1/2) arccosh(1 + 2|z - w|^2 / ((1 - |z|^2)(1 - |w|^2)))`` for complex ``z, w``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    arg = 1 + 2 * np.abs(z - w) ** 2 / ((1 - np.abs(z) ** 2) * (1 - np.abs(w) ** 2))
    return 0.5 * np.arccosh(arg)


def polar_to_disc(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    return np.tanh(P[..., 0]) * np.exp(1j * P[..., 1])


def disc_to_polar(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.stack([np.arctanh(np.abs(z)), np.angle(z)], axis=-1)


def _to_hyperboloid(P):
    A = 2 * P[..., 0]
    return np.stack(
        [np.cosh(A), np.sinh(A) * np.cos(P[..., 1]), np.sinh(A) * np.sin(P[..., 1])], axis=-1
    )


def _from_hyperboloid(X):
    A = np.arcsinh(np.hypot(X[..., 1], X[..., 2]))
    return np.stack([A / 2, np.arctan2(X[..., 2], X[..., 1])], axis=-1)


def disc_geodesic(P, Q, s) -> np.ndarray:
    """Points at fractions ``s`` along the geodesic from ``P`` to ``Q``."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    s = np.asarray(s, dtype=float)
    D = 2 * float(disc_distance_polar(P, Q))  # length in the curvature -1 model
    if D < 1e-12:
        return np.repeat(P[None], s.size, axis=0).reshape(s.shape + (2,))
    X, Y = _to_hyperboloid(P), _to_hyperboloid(Q)
    a = (np.sinh((1 - s) * D) / math.sinh(D))[..., None]
    b = (np.sinh(s * D) / math.sinh(D))[..., None]
    return _from_hyperboloid(a * X + b * Y)


def disc4() -> MetricSpaceHandle:
    """Unit disc with curvature -4; samples have hyperbolic radius ≤ ``scale``."""
    return MetricSpaceHandle(
        "disc4",
        2,
        disc_distance_polar,
        lambda U, scale: np.stack([scale * U[..., 0], 2 * np.pi * U[..., 1]], axis=-1),
        2,
        disc_geodesic,
        lambda t: np.stack([np.asarray(t, float), np.zeros_like(np.asarray(t, float))], -1),
    )


def scaled(S: MetricSpaceHandle, k: float) -> MetricSpaceHandle:
    """Same points, distances multiplied by ``k``.  Rays are reparametrized by arc length."""
    ray = None
    if S.ray is not None:
        base_ray = S.ray
        ray = lambda t: base_ray(np.asarray(t, float) / k)  # noqa: E731
    return MetricSpaceHandle(
        f"{k:g}*{S.name}",
        S.dim,
        lambda P, Q: k * S.distance(P, Q),
        S.from_uniform,
        S.n_uniform,
        S.geodesic,
        ray,
        S.combiner,
        S.factors,
    )


# -- products -------------------------------------------------------------------


def product(X1: MetricSpaceHandle, X2: MetricSpaceHandle, combiner: str = "l1") -> MetricSpaceHandle:
    """Product space with ``d = d1 + d2`` (``"l1"``) or ``sqrt(d1^2 + d2^2)`` (``"l2"``).

    A pair of constant-speed factor geodesics is a geodesic for either
    combiner, so the product inherits a geodesic oracle when both factors
    have one.
    """
    if combiner not in ("l1", "l2"):
        raise ValueError(f"combiner must be 'l1' or 'l2', got {combiner!r}")
    k1 = X1.dim

    def split(P):
        P = np.asarray(P, dtype=float)
        return P[..., :k1], P[..., k1:]

    def distance(P, Q):
        p1, p2 = split(P)
        q1, q2 = split(Q)
        a = X1.distance(p1, q1)
        b = X2.distance(p2, q2)
        return a + b if combiner == "l1" else np.hypot(a, b)

    def from_uniform(U, scale):
        return np.concatenate(
            [X1.from_uniform(U[..., : X1.n_uniform], scale), X2.from_uniform(U[..., X1.n_uniform:], scale)],
            axis=-1,
        )

    def pair_geodesic(P, Q, s):
        p1, p2 = split(P)
        q1, q2 = split(Q)
        return np.concatenate([X1.geodesic(p1, q1, s), X2.geodesic(p2, q2, s)], axis=-1)

    geodesic = pair_geodesic if X1.geodesic is not None and X2.geodesic is not None else None

    return MetricSpaceHandle(
        f"{X1.name}x{X2.name}",
        X1.dim + X2.dim,
        distance,
        from_uniform,
        X1.n_uniform + X2.n_uniform,
        geodesic,
        None,
        combiner,
        (X1, X2),
    )


ProductSpace = product


def factor_distances(P: MetricSpaceHandle, A, B):
    """``(d1(a1, b1), d2(a2, b2))`` for points of a product space."""
    X1, X2 = P.factors
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    k1 = X1.dim
    return X1.distance(A[..., :k1], B[..., :k1]), X2.distance(A[..., k1:], B[..., k1:])


def corner_quadruple(P: MetricSpaceHandle, n: float) -> np.ndarray:
    """``(γ1(0),γ2(0)), (γ1(n),γ2(0)), (γ1(0),γ2(n)), (γ1(n),γ2(n))`` for a product of rays."""
    X1, X2 = P.factors
    t = np.array([0.0, n])
    r1, r2 = X1.ray(t), X2.ray(t)
    return np.stack([
        np.concatenate([r1[0], r2[0]]),
        np.concatenate([r1[1], r2[0]]),
        np.concatenate([r1[0], r2[1]]),
        np.concatenate([r1[1], r2[1]]),
    ])


def landmark_quadruples(S: MetricSpaceHandle, scale: float) -> np.ndarray:
    """Deterministic quadruples evaluated before any random ones."""
    if len(S.factors) == 2 and all(f.ray is not None for f in S.factors):
        return corner_quadruple(S, scale)[None]
    return np.empty((0, 4, S.dim))


# -- Gromov products and the four-point condition ------------------------------


def gromov_product(S: MetricSpaceHandle, w, x, y) -> float:
    """``(x|y)_w = (d(w,x) + d(w,y) - d(x,y)) / 2``."""
    return 0.5 * (S.d(w, x) + S.d(w, y) - S.d(x, y))


def quadruple_delta(S: MetricSpaceHandle, Q: np.ndarray) -> np.ndarray:
    """Four-point defect of each quadruple ``Q[k] = (w, x, y, z)``.

    With the three pair sums ``d(w,x)+d(y,z)``, ``d(w,y)+d(x,z)``,
    ``d(w,z)+d(x,y)``, the defect is half the gap between the largest and the
    middle sum.  This equals ``max`` over relabelings of
    ``min((x|z)_w, (y|z)_w) - (x|y)_w`` and is never negative.
    """
    w, x, y, z = Q[:, 0], Q[:, 1], Q[:, 2], Q[:, 3]
    d = S.distance
    sums = np.stack([d(w, x) + d(y, z), d(w, y) + d(x, z), d(w, z) + d(x, y)], axis=1)
    sums.sort(axis=1)
    return 0.5 * (sums[:, 2] - sums[:, 1])


@dataclass
class HyperbolicityReport:
    space: str
    combiner: str | None
    scale: float
    n_quadruples: int
    seed: int
    delta_estimate: float
    worst_quadruple: np.ndarray | None
    triangle_defect: float | None = None

    def as_dict(self) -> dict:
        out = {
            "space": self.space,
            "combiner": self.combiner,
            "scale": self.scale,
            "n_quadruples": self.n_quadruples,
            "seed": self.seed,
            "delta_estimate": self.delta_estimate,
            "worst_quadruple": None if self.worst_quadruple is None else self.worst_quadruple.tolist(),
        }
        if self.triangle_defect is not None:
            out["triangle_defect"] = self.triangle_defect
        return out


def four_point_delta(S: MetricSpaceHandle, n_quadruples: int, seed: int = 0,
                     scale: float = 10.0, landmarks: bool = True) -> HyperbolicityReport:
    """Lower estimate of the four-point δ: the sup of :func:`quadruple_delta`.

    Landmark quadruples (the corner quadruple for products of rays) come
    first, then ``n_quadruples`` seeded random ones.  Ties for the worst
    quadruple go to the first in sample order.
    """
    rng = make_rng(seed)
    U = rng.random((int(n_quadruples), 4, S.n_uniform))
    blocks = []
    if landmarks:
        blocks.append(landmark_quadruples(S, scale))
    best = 0.0
    worst = None
    total = 0
    for block in blocks + [None]:
        if block is None:
            chunks = (S.from_uniform(U[i: i + CHUNK], scale) for i in range(0, len(U), CHUNK))
        else:
            chunks = [block]
        for Q in chunks:
            if len(Q) == 0:
                continue
            vals = quadruple_delta(S, Q)
            total += len(Q)
            k = int(np.argmax(vals))
            if worst is None or vals[k] > best:
                best = max(0.0, float(vals[k]))
                worst = Q[k]
    return HyperbolicityReport(S.name, S.combiner, float(scale), total, int(seed), best, worst)


# -- triangles ------------------------------------------------------------------


@dataclass
class TriangleSpec:
    """Geodesic triangle given by three side parametrizations on ``[0, 1]``.

    Side ``k`` runs from ``vertices[k]`` to ``vertices[(k + 1) % 3]``.
    """

    vertices: np.ndarray
    sides: tuple[Callable[[np.ndarray], Points], Callable, Callable]
    labels: tuple[str, str, str] = ("side0", "side1", "side2")

    def sample(self, k: int, count: int) -> Points:
        return self.sides[k](np.linspace(0.0, 1.0, count))

    def relabel(self, order) -> "TriangleSpec":
        order = list(order)
        return TriangleSpec(
            self.vertices, tuple(self.sides[i] for i in order), tuple(self.labels[i] for i in order)
        )

    @classmethod
    def from_vertices(cls, S: MetricSpaceHandle, a, b, c) -> "TriangleSpec":
        if S.geodesic is None:
            raise ValueError(f"{S.name} has no geodesic oracle")
        V = np.array([a, b, c], dtype=float)
        sides = tuple(
            (lambda s, i=i: S.geodesic(V[i], V[(i + 1) % 3], s)) for i in range(3)
        )
        return cls(V, sides)


def thin_triangle_defect(S: MetricSpaceHandle, T: TriangleSpec, samples_per_side: int = 101) -> float:
    """Largest distance from a sampled point of one side to the other two sides' samples.

    ``samples_per_side`` is rounded up to an odd number so that every side's
    midpoint is sampled.
    """
    if samples_per_side < 2:
        raise ValueError("need at least 2 samples per side")
    k = samples_per_side | 1
    sides = [T.sample(i, k) for i in range(3)]
    worst = 0.0
    for i in range(3):
        others = np.concatenate([sides[j] for j in range(3) if j != i])
        D = S.distance(sides[i][:, None, :], others[None, :, :])
        worst = max(worst, float(np.max(np.min(D, axis=1))))
    return worst


def lemma_not_triangle(n: float, X1: MetricSpaceHandle, X2: MetricSpaceHandle,
                       check_points: int = 41, tol: float = 1e-9) -> tuple[TriangleSpec, MetricSpaceHandle]:
    """Triangle in the ℓ¹ product whose long side stays ``n`` away from the other two.

    With rays γ1, γ2 the sides are ``S1 = γ1([0,n]) × {γ2(0)}``,
    ``S2 = {γ1(0)} × γ2([0,n])`` and the broken path ``σ(t) = (γ1(t), γ2(n))``
    for ``t ≤ n``, ``(γ1(n), γ2(2n - t))`` for ``t ≥ n``.  σ is checked to be
    a geodesic by comparing ``d(σ(t), σ(s))`` with ``|t - s|`` on a grid.

    Returns the triangle (sides ordered S2, σ, S1 reversed) and the product space.

    Raises
    ------
    NotAGeodesic
        If the sampled isometry check fails by more than ``tol``.
    """
    if X1.ray is None or X2.ray is None:
        raise ValueError("both factors need a geodesic ray")
    n = float(n)
    P = product(X1, X2, "l1")
    g1_0 = X1.ray(np.zeros(1))[0]
    g2_0 = X2.ray(np.zeros(1))[0]
    g1_n = X1.ray(np.array([n]))[0]
    g2_n = X2.ray(np.array([n]))[0]

    def sigma_t(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, P.dim))
        first = t <= n
        if first.any():
            out[first] = np.concatenate(
                [X1.ray(t[first]), np.repeat(g2_n[None], first.sum(), axis=0)], axis=1
            )
        if (~first).any():
            out[~first] = np.concatenate(
                [np.repeat(g1_n[None], (~first).sum(), axis=0), X2.ray(2 * n - t[~first])], axis=1
            )
        return out

    def S1(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.concatenate([X1.ray(n * s), np.repeat(g2_0[None], s.size, axis=0)], axis=1)

    def S2(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.concatenate([np.repeat(g1_0[None], s.size, axis=0), X2.ray(n * s)], axis=1)

    ts = np.linspace(0.0, 2 * n, check_points | 1)
    pts = sigma_t(ts)
    D = P.distance(pts[:, None, :], pts[None, :, :])
    err = float(np.max(np.abs(D - np.abs(ts[:, None] - ts[None, :]))))
    if err > tol:
        raise NotAGeodesic(f"σ_n fails the isometry check by {err:.3e} (tolerance {tol:g})", err)

    vertices = np.array([
        np.concatenate([g1_0, g2_0]),
        np.concatenate([g1_0, g2_n]),
        np.concatenate([g1_n, g2_0]),
    ])
    triangle = TriangleSpec(
        vertices,
        (S2, lambda s: sigma_t(2 * n * np.asarray(s, dtype=float)), lambda s: S1(1 - np.asarray(s, dtype=float))),
        ("S2", "sigma_n", "S1"),
    )
    return triangle, P


def lemma_not_witness(n: float, X1: MetricSpaceHandle, X2: MetricSpaceHandle,
                      samples_per_side: int = 201) -> float:
    """Distance from ``σ_n(n)`` to the sampled sides S1 ∪ S2."""
    T, P = lemma_not_triangle(n, X1, X2)
    mid = T.sides[1](np.array([0.5]))
    k = samples_per_side | 1
    others = np.concatenate([T.sample(0, k), T.sample(2, k)])
    return float(np.min(P.distance(mid, others)))


# -- bi-Lipschitz and contraction checks ----------------------------------------


class BiLipschitzRatio(NamedTuple):
    lo: float
    hi: float

    @property
    def L(self) -> float:
        return max(self.hi, 1.0 / self.lo)


def sample_pairs(S: MetricSpaceHandle, pairs: int, seed: int, scale: float):
    rng = make_rng(seed)
    U = rng.random((int(pairs), 2, S.n_uniform))
    pts = S.from_uniform(U, scale)
    return pts[:, 0], pts[:, 1]


def bilipschitz_ratio(d1: Distance, d2: Distance, space: MetricSpaceHandle, pairs: int,
                      seed: int = 0, scale: float = 10.0) -> BiLipschitzRatio:
    """``(inf, sup)`` of ``d2 / d1`` over seeded pairs from ``space``; pairs with ``d1 = 0`` are skipped."""
    A, B = sample_pairs(space, pairs, seed, scale)
    a = d1(A, B)
    b = d2(A, B)
    keep = a > 0
    if not keep.any():
        raise ValueError("every sampled pair has d1 = 0")
    ratio = b[keep] / a[keep]
    return BiLipschitzRatio(float(ratio.min()), float(ratio.max()))


@dataclass(frozen=True)
class SchwarzConstants:
    """Curvature bounds ``c`` (holomorphic sectional, upper) and ``d`` (Ricci, lower).

    Both must be negative; the contraction constant is ``L = sqrt(d / c)``.
    """

    c: float
    d: float

    def __post_init__(self):
        if not (self.c < 0 and self.d < 0):
            raise ValueError(
                f"c and d must both be negative, got c={self.c}, d={self.d}"
            )

    @property
    def L(self) -> float:
        return math.sqrt(self.d / self.c)


VIOLATION_TOL = 1e-9


@dataclass
class SchwarzReport:
    pairs: int
    L: float
    violations: list[dict]
    min_slack: float
    max_slack: float
    max_ratio: float

    def as_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "L": self.L,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "max_slack": self.max_slack,
            "max_ratio": self.max_ratio,
        }


def _violation_rows(idx, A, B, lhs, rhs):
    rows = []
    for k in idx:
        rows.append({
            "index": int(k),
            "p": A[k].tolist(),
            "q": B[k].tolist(),
            "lhs": float(lhs[k]),
            "rhs": float(rhs[k]),
            "slack": float(rhs[k] - lhs[k]),
        })
    return rows


def schwarz_bound_check(f: Callable[[Points], Points], domain: MetricSpaceHandle,
                        target: MetricSpaceHandle, constants: SchwarzConstants | None,
                        pairs: int, seed: int = 0, scale: float = 5.0,
                        L: float | None = None) -> SchwarzReport:
    """Check ``d_target(f p, f q) ≤ L d_domain(p, q)`` on seeded pairs.

    ``slack = L d_domain - d_target``; a pair violates when its slack is below
    ``-1e-9``.  ``L`` overrides ``constants.L`` when given.
    """
    if L is None:
        L = constants.L
    A, B = sample_pairs(domain, pairs, seed, scale)
    lhs = target.distance(f(A), f(B))
    rhs = L * domain.distance(A, B)
    slack = rhs - lhs
    bad = np.flatnonzero(slack < -VIOLATION_TOL)
    pos = rhs > 0
    ratio = float(np.max(lhs[pos] / rhs[pos])) if pos.any() else 0.0
    return SchwarzReport(
        int(pairs), float(L), _violation_rows(bad, A, B, lhs, rhs),
        float(slack.min()), float(slack.max()), ratio,
    )


@dataclass
class KeyLemmaReport:
    """Result of checking both product inequalities on sampled pairs.

    ``max_slack_k`` is the largest signed relative excess ``(lhs - rhs) / rhs``
    of inequality k over pairs with ``rhs > 0``: it is at most 0 exactly when
    the inequality holds on every such pair.
    """

    pairs: int
    L: float
    violations: list[dict]
    max_slack_1: float
    max_slack_2: float

    def as_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "L": self.L,
            "violations": self.violations,
            "max_slack_1": self.max_slack_1,
            "max_slack_2": self.max_slack_2,
        }


def key_lemma_check(P: MetricSpaceHandle, constants: SchwarzConstants | None, pairs: int,
                    seed: int = 0, scale: float = 5.0, L: float | None = None) -> KeyLemmaReport:
    """Check ``d_b + d_a ≤ 2 L^2 d`` and ``d ≤ L (d_a + d_b)`` on a product space.

    The slices ``X1 × {b}`` and ``{a} × X2`` of a metric product are isometric
    to the factors, so ``d_b`` and ``d_a`` are the factor distances.  The
    first pair checked is diagonal (``p = q``), where both sides vanish.
    """
    if len(P.factors) != 2:
        raise ValueError("key_lemma_check needs a product space")
    if L is None:
        L = constants.L
    A, B = sample_pairs(P, pairs, seed, scale)
    if len(A):
        B[0] = A[0]
    d = P.distance(A, B)
    d1, d2 = factor_distances(P, A, B)
    checks = [(d1 + d2, 2 * L * L * d), (d, L * (d1 + d2))]
    violations = []
    excess = []
    for which, (lhs, rhs) in enumerate(checks, start=1):
        bad = np.flatnonzero(lhs - rhs > VIOLATION_TOL)
        for row in _violation_rows(bad, A, B, lhs, rhs):
            row["inequality"] = which
            violations.append(row)
        pos = rhs > 0
        excess.append(float(np.max((lhs[pos] - rhs[pos]) / rhs[pos])) if pos.any() else 0.0)
    violations.sort(key=lambda r: (r["index"], r["inequality"]))
    return KeyLemmaReport(int(pairs), float(L), violations, excess[0], excess[1])


def potential_plane(p, budget: int = 8) -> MetricSpaceHandle:
    """The complex line C with the metric of a radial potential, backed by geodesics.

    Points are Cartesian ``(x, y)``.  The ray is the unit-speed radial geodesic
    along the positive real axis, integrated once up to the largest requested
    time.  Distances between points on a common ray from the origin are exact
    differences of radial distance; other pairs fall back to shooting.
    """
    from .geodesics import distance_estimate, geodesic_metric, radial_ray
    from .radial import radial_distance

    G = geodesic_metric(p, 1)
    cache: dict[str, object] = {}

    def ray(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        T = float(t.max()) if t.size else 0.0
        path = cache.get("path")
        if T > 0 and (path is None or path.t[-1] < T):
            path = radial_ray(p, 1, max(T, 1.0))
            cache["path"] = path
        out = np.zeros((t.size, 2))
        for k, tk in enumerate(t):
            if tk > 0:
                out[k] = G.cartesian(path.at(float(tk)))
        return out

    def pair_distance(a, b):
        ra, rb = float(np.hypot(*a)), float(np.hypot(*b))
        cross = a[0] * b[1] - a[1] * b[0]
        if ra == 0 or rb == 0 or (abs(cross) <= 1e-15 * ra * rb and a @ b > 0):
            return abs(radial_distance(p, ra) - radial_distance(p, rb))
        return distance_estimate(G, a, b, budget=budget)

    def distance(P, Q):
        P, Q = np.broadcast_arrays(np.asarray(P, float), np.asarray(Q, float))
        flat_p = P.reshape(-1, 2)
        flat_q = Q.reshape(-1, 2)
        out = np.array([pair_distance(a, b) for a, b in zip(flat_p, flat_q)])
        return out.reshape(P.shape[:-1])

    def from_uniform(U, scale):
        from .radial import radius_at_distance

        rad = np.vectorize(lambda u: radius_at_distance(p, scale * u))(U[..., 0])
        ang = 2 * np.pi * U[..., 1]
        return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)

    return MetricSpaceHandle(f"plane[{p.spec}]", 2, distance, from_uniform, 2, None, ray)


# -- registry -------------------------------------------------------------------


def make_space(name: str) -> MetricSpaceHandle:
    """Built-in spaces by name."""
    registry = {
        "line": real_line,
        "ray": ray_space,
        "plane": euclidean_plane,
        "disc4": disc4,
        "product-rays": lambda: product(ray_space(), ray_space(), "l1"),
        "product-rays-l2": lambda: product(ray_space(), ray_space(), "l2"),
        "product-discs": lambda: product(disc4(), disc4(), "l2"),
        "product-discs-l1": lambda: product(disc4(), disc4(), "l1"),
    }
    if name not in registry:
        raise KeyError(f"unknown space {name!r}; choose from {sorted(registry)}")
    return registry[name]()


SPACES = ("line", "ray", "plane", "disc4", "product-rays", "product-rays-l2",
          "product-discs", "product-discs-l1")


def default_triangle(S: MetricSpaceHandle, scale: float) -> TriangleSpec | None:
    """A representative triangle of size ``scale`` for spaces with geodesics."""
    if S.name == "rayxray" and S.combiner == "l1":
        return lemma_not_triangle(scale, *S.factors)[0]
    if S.name == "disc4":
        # equilateral: vertices at equal distance from the centre, 120° apart,
        # radius chosen so that the side length is ``scale``
        from scipy.optimize import brentq

        def side(rho):
            return float(disc_distance_polar(np.array([rho, 0.0]), np.array([rho, 2 * np.pi / 3]))) - scale

        rho = brentq(side, 1e-9, scale)
        V = [[rho, 0.0], [rho, 2 * np.pi / 3], [rho, 4 * np.pi / 3]]
        return TriangleSpec.from_vertices(S, *V)
    if S.geodesic is not None and S.dim == 1:
        return TriangleSpec.from_vertices(S, [0.0], [scale / 2], [scale])
    return None
