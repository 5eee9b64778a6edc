"""Metric, curvature tensor and curvature samples of radial Kähler metrics on C^n.

Conventions are pinned by two oracles rather than by a textbook:

* the linear potential ``f(x) = x`` gives the Euclidean metric with unit
  coordinate vectors (see :mod:`negcurv.realified`);
* ``f(x) = -ln(1 - x)`` on the unit disc (n = 1) has Gaussian curvature -4.

With ``R_{ij̄kl̄} = -∂_k ∂_l̄ g_{ij̄} + g^{q̄p} ∂_k g_{iq̄} ∂_l̄ g_{pj̄}`` this
forces ``H(v) = 2 R(v, v̄, v, v̄) / |v|^4`` and a factor 2 between the
complex Ricci form and the real Ricci curvature.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePlane, DomainError, NotPositiveDefinite, ZeroVector
from .jets import Jet, RadialPotential, jet_elementary
from .realified import (
    RealifiedMetric,
    check_positive_definite,
    complex_structure,
    complex_to_real,
    riemann_lower,
    sectional_from_riemann,
)

HOLOMORPHIC_FACTOR = 2.0
RICCI_FACTOR = 2.0


def as_point(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1:
        raise ValueError(f"a point of C^n must be a flat vector, got shape {z.shape}")
    return z


@dataclass(frozen=True)
class HermitianMetric:
    """``g[i, j] = g_{ij̄}`` at ``point`` together with its matrix inverse."""

    g: np.ndarray
    inverse: np.ndarray
    point: np.ndarray
    potential: RadialPotential
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def inner(self, v, w) -> complex:
        """``sum g_{ij̄} v_i conj(w_j)``."""
        return complex(np.asarray(v) @ self.g @ np.conj(np.asarray(w)))

    def norm2(self, v) -> float:
        return self.inner(v, v).real


def _derivs(p: RadialPotential, z: np.ndarray):
    x = float(np.sum(np.abs(z) ** 2))
    try:
        d = p.derivatives(x)
    except DomainError as exc:
        raise DomainError(f"point {z.tolist()} has {exc}") from None
    return x, d


def metric_at(p: RadialPotential, z) -> HermitianMetric:
    """Hermitian metric ``f'(r^2) δ_ij + f''(r^2) conj(z_i) z_j``.

    Raises
    ------
    DomainError
        If ``|z|^2`` is outside the potential's domain.
    NotPositiveDefinite
        If some eigenvalue (``f'`` or ``f' + r^2 f''``) is not positive.
    """
    z = as_point(z)
    _, d = _derivs(p, z)
    n = z.size
    g = d[1] * np.eye(n) + d[2] * np.outer(np.conj(z), z)
    w = np.linalg.eigvalsh(g)
    if not np.all(np.isfinite(w)) or w[0] <= 0:
        raise NotPositiveDefinite(
            f"{p.spec}: metric at z={z.tolist()} has eigenvalue {w[0]!r} <= 0",
            eigenvalue=float(w[0]),
        )
    inv = np.linalg.inv(g)
    err = np.max(np.abs(g @ inv - np.eye(n)))
    if err > 1e-10:
        raise NotPositiveDefinite(
            f"{p.spec}: metric at z={z.tolist()} is too ill-conditioned to invert ({err:.1e})",
            eigenvalue=float(w[0]),
        )
    return HermitianMetric(g, inv, z, p, w)


@dataclass(frozen=True)
class KahlerCurvatureTensor:
    """``R[i, j, k, l] = R_{ij̄kl̄}`` at ``metric.point``."""

    R: np.ndarray
    metric: HermitianMetric

    def __call__(self, v, w, x, y) -> complex:
        """``sum R_{ij̄kl̄} v_i conj(w_j) x_k conj(y_l)``."""
        return complex(
            np.einsum("ijkl,i,j,k,l->", self.R, v, np.conj(w), x, np.conj(y))
        )

    def ricci_trace(self) -> np.ndarray:
        """``g^{ij̄} R_{ij̄kl̄}``; equals the complex Ricci form."""
        return np.einsum("ji,ijkl->kl", self.metric.inverse, self.R)


def metric_derivatives_complex(p: RadialPotential, z):
    """Closed-form ``∂_k g_{ij̄}`` and ``∂_k ∂_l̄ g_{ij̄}`` for a radial potential.

    Returns ``(dg, ddg)`` with ``dg[k, i, j] = ∂_k g_{ij̄}`` and
    ``ddg[k, l, i, j] = ∂_k ∂_l̄ g_{ij̄}``.
    """
    z = as_point(z)
    _, d = _derivs(p, z)
    f2, f3, f4 = d[2], d[3], d[4]
    n = z.size
    I = np.eye(n)
    zb = np.conj(z)
    dg = (
        f2 * np.einsum("k,ij->kij", zb, I)
        + f3 * np.einsum("k,i,j->kij", zb, zb, z)
        + f2 * np.einsum("i,jk->kij", zb, I)
    )
    ddg = (
        f3 * np.einsum("l,k,ij->klij", z, zb, I)
        + f2 * np.einsum("kl,ij->klij", I, I)
        + f4 * np.einsum("l,k,i,j->klij", z, zb, zb, z)
        + f3 * np.einsum("kl,i,j->klij", I, zb, z)
        + f3 * np.einsum("k,il,j->klij", zb, I, z)
        + f3 * np.einsum("l,i,jk->klij", z, zb, I)
        + f2 * np.einsum("il,jk->klij", I, I)
    )
    return dg, ddg


def curvature_tensor_at(p: RadialPotential, z) -> KahlerCurvatureTensor:
    """Kähler curvature tensor from closed-form metric derivatives (no differencing)."""
    metric = metric_at(p, z)
    dg, ddg = metric_derivatives_complex(p, metric.point)
    # ∂_l̄ g_{pj̄} = conj(∂_l g_{jp̄}) by Hermitian symmetry
    dgbar = np.conj(np.swapaxes(dg, 1, 2))
    R = -np.einsum("klij->ijkl", ddg) + np.einsum(
        "kiq,qp,lpj->ijkl", dg, metric.inverse, dgbar
    )
    return KahlerCurvatureTensor(R, metric)


def _nonzero(v, name="v") -> np.ndarray:
    """Reject zero vectors; rescale the rest to unit max-norm.

    H and B are invariant under complex scaling, and the rescaling keeps
    ``|v|_g^4`` clear of underflow for tiny inputs.
    """
    v = np.asarray(v, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    m = np.max(np.abs(v)) if v.size else 0.0
    if m == 0:
        raise ZeroVector(f"{name} must be nonzero")
    return v / m


def holomorphic_sectional(T: KahlerCurvatureTensor, v) -> float:
    """Holomorphic sectional curvature of the complex line spanned by ``v``."""
    v = _nonzero(v)
    nv = T.metric.norm2(v)
    return HOLOMORPHIC_FACTOR * T(v, v, v, v).real / (nv * nv)


def holomorphic_bisectional(T: KahlerCurvatureTensor, v, w) -> float:
    v = _nonzero(v)
    w = _nonzero(w, "w")
    return HOLOMORPHIC_FACTOR * T(v, v, w, w).real / (T.metric.norm2(v) * T.metric.norm2(w))


def realified_metric(p: RadialPotential, n: int) -> RealifiedMetric:
    return RealifiedMetric.from_potential(p, n)


def _plane_check(G0, X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    xx, yy, xy = X @ G0 @ X, Y @ G0 @ Y, X @ G0 @ Y
    if xx * yy - xy * xy <= 1e-12 * xx * yy:
        raise DegeneratePlane("X and Y are (numerically) linearly dependent")


def real_sectional(p: RadialPotential, z, X, Y) -> float:
    """Sectional curvature of ``span{X, Y}`` at ``z`` via the realified metric.

    ``X, Y`` are real ``2n``-vectors ordered as ``(x1, y1, ..., xn, yn)``.
    The Riemann tensor comes from finite differences of the real metric, so
    this is independent of :func:`curvature_tensor_at`.
    """
    z = as_point(z)
    G = realified_metric(p, z.size)
    R, G0 = riemann_lower(G, complex_to_real(z))
    _plane_check(G0, X, Y)
    return float(sectional_from_riemann(R, G0, X, Y)[0])


def complex_ricci(p: RadialPotential, z) -> np.ndarray:
    """``Ric_{ij̄} = -∂_i ∂_j̄ ln det g`` in closed form.

    ``det g = f'^(n-1) (f' + x f'')`` with ``x = |z|^2``, so
    ``ln det g = φ(x)`` and ``Ric = -(φ' δ_ij + φ'' conj(z_i) z_j)``; φ' and φ''
    come from jets in ``x``.
    """
    z = as_point(z)
    x, d = _derivs(p, z)
    n = z.size
    f1, f2, f3, f4 = d[1], d[2], d[3], d[4]
    q = Jet((f1 + x * f2, 2 * f2 + x * f3, 3 * f3 + x * f4))
    phi = jet_elementary("ln", q)
    if n > 1:
        phi = phi + (n - 1) * jet_elementary("ln", Jet((f1, f2, f3)))
    return -(phi[1] * np.eye(n) + phi[2] * np.outer(np.conj(z), z))


def ricci_at(p: RadialPotential, z) -> tuple[np.ndarray, float]:
    """Complex Ricci form and the smallest real Ricci curvature relative to g.

    ``ricci_lower`` is the smallest eigenvalue of ``2 Ric`` relative to ``g``;
    for n = 1 it equals the Gaussian curvature.
    """
    metric = metric_at(p, z)
    ric = complex_ricci(p, metric.point)
    # generalized Hermitian eigenproblem via Cholesky of g
    L = np.linalg.cholesky(metric.g)
    Linv = np.linalg.inv(L)
    M = Linv @ (RICCI_FACTOR * ric) @ Linv.conj().T
    lower = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])
    return ric, lower


# -- sampling -----------------------------------------------------------------


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used for every seeded sample in the package."""
    return np.random.Generator(np.random.Philox(int(seed)))


def max_workers() -> int:
    env = os.environ.get("NEGCURV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def sample_planes(rng: np.random.Generator, G0: np.ndarray, count: int):
    """Random g-orthonormal pairs ``(X, Y)`` in the realified tangent space.

    Gaussian pairs are orthonormalized by Gram-Schmidt in the g inner
    product; pairs whose Gram matrix has condition number above 1e6 are
    redrawn.
    """
    dim = G0.shape[0]
    X = np.empty((count, dim))
    Y = np.empty((count, dim))
    k = 0
    while k < count:
        a, b = rng.standard_normal((2, dim))
        gram = np.array([[a @ G0 @ a, a @ G0 @ b], [a @ G0 @ b, b @ G0 @ b]])
        if np.linalg.cond(gram) > 1e6:
            continue
        a = a / math.sqrt(a @ G0 @ a)
        b = b - (a @ G0 @ b) * a
        b = b / math.sqrt(b @ G0 @ b)
        X[k], Y[k] = a, b
        k += 1
    return X, Y


@dataclass
class CurvatureRow:
    r: float
    K_min: float
    K_max: float
    H_min: float
    H_max: float
    B_min: float
    B_max: float
    ricci_lower: float
    K: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "K_min": self.K_min,
            "K_max": self.K_max,
            "H_min": self.H_min,
            "H_max": self.H_max,
            "B_min": self.B_min,
            "B_max": self.B_max,
            "ricci_lower": self.ricci_lower,
        }


@dataclass
class CurvatureReport:
    potential: str
    n: int
    seed: int
    planes_per_point: int
    rows: list[CurvatureRow]

    @property
    def K_min(self) -> float:
        return min(row.K_min for row in self.rows)

    @property
    def K_max(self) -> float:
        return max(row.K_max for row in self.rows)

    def as_dict(self) -> dict:
        return {
            "potential": self.potential,
            "n": self.n,
            "seed": self.seed,
            "planes_per_point": self.planes_per_point,
            "rows": [row.as_dict() for row in self.rows],
        }


def _radius_row(p: RadialPotential, n: int, r: float, planes: int, seed_seq) -> CurvatureRow:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    z = np.zeros(n, dtype=complex)
    z[0] = r
    T = curvature_tensor_at(p, z)
    G = realified_metric(p, n)
    R, G0 = riemann_lower(G, complex_to_real(z))
    check_positive_definite(G0, f" at r={r}")
    # a tenth of the planes are complex lines {X, JX}: H through the analytic
    # tensor, K through the realified one; both end up in the report
    n_holo = max(1, planes // 10)
    X, Y = sample_planes(rng, G0, planes - n_holo)
    K_generic = sectional_from_riemann(R, G0, X, Y)

    V = rng.standard_normal((n_holo, n)) + 1j * rng.standard_normal((n_holo, n))
    W = rng.standard_normal((n_holo, n)) + 1j * rng.standard_normal((n_holo, n))
    H = np.array([holomorphic_sectional(T, v) for v in V])
    B = np.array([holomorphic_bisectional(T, v, w) for v, w in zip(V, W)])
    J = complex_structure(2 * n)
    XV = complex_to_real(V)
    K_holo = sectional_from_riemann(R, G0, XV, XV @ J.T)
    K = np.concatenate([K_generic, K_holo])
    _, lower = ricci_at(p, z)
    return CurvatureRow(
        r=float(r),
        K_min=float(K.min()),
        K_max=float(K.max()),
        H_min=float(H.min()),
        H_max=float(H.max()),
        B_min=float(B.min()),
        B_max=float(B.max()),
        ricci_lower=lower,
        K=K,
        H=H,
        B=B,
    )


def curvature_range_report(
    p: RadialPotential,
    n: int,
    r_values,
    planes_per_point: int,
    seed: int = 0,
) -> CurvatureReport:
    """Sample sectional, holomorphic, bisectional and Ricci curvature per radius.

    By U(n) symmetry every point at radius ``r`` is equivalent, so each radius
    is evaluated at ``z = (r, 0, ..., 0)``.  Each radius draws from its own
    child stream of the seed, so the result does not depend on the worker
    count.
    """
    if planes_per_point < 1:
        raise ValueError("planes_per_point must be >= 1")
    r_values = [float(r) for r in r_values]
    for r in r_values:
        if r < 0:
            raise DomainError(f"radius must be nonnegative, got {r}")
        p.check_domain(r * r)
    children = np.random.SeedSequence(int(seed)).spawn(len(r_values))
    workers = min(max_workers(), max(1, len(r_values)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(
            pool.map(
                lambda args: _radius_row(p, n, args[0], planes_per_point, args[1]),
                zip(r_values, children),
            )
        )
    return CurvatureReport(p.spec, n, int(seed), planes_per_point, rows)
