"""Real Riemannian view of a radial Kähler metric on C^n = R^2n.

Coordinates are ordered ``(x1, y1, x2, y2, ..., xn, yn)`` with
``z_k = x_k + i y_k``.  A tangent vector ``X`` corresponds to the complex
vector ``v_k = X[2k] + i X[2k+1]`` and the real metric is
``<X, Y> = Re(sum g_{ij̄} v_i conj(w_j))``, so the linear potential gives
the Euclidean metric with unit coordinate vectors.

All derivatives of the metric in this module are central finite differences
(step 1e-4 and one Richardson extrapolation against step 5e-5).  The
complex pipeline in :mod:`negcurv.kahler` is analytic; keeping this one
numerical is what makes the two an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotPositiveDefinite
from .jets import RadialPotential

FD_STEP = 1e-4


def complex_to_real(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    out = np.empty(v.shape[:-1] + (2 * v.shape[-1],))
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def real_to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def complex_structure(dim: int) -> np.ndarray:
    """Matrix of multiplication by i acting on realified vectors."""
    J = np.zeros((dim, dim))
    for k in range(dim // 2):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def realify_matrix(g: np.ndarray) -> np.ndarray:
    """Real symmetric ``2n x 2n`` form of Hermitian ``g`` (batched on leading axes)."""
    n = g.shape[-1]
    G = np.empty(g.shape[:-2] + (2 * n, 2 * n))
    G[..., 0::2, 0::2] = g.real
    G[..., 1::2, 1::2] = g.real
    G[..., 0::2, 1::2] = g.imag
    G[..., 1::2, 0::2] = -g.imag
    return G


def radial_hermitian(p: RadialPotential, z: np.ndarray) -> np.ndarray:
    """``g_{ij̄} = f'(r^2) δ_ij + f''(r^2) conj(z_i) z_j`` for a batch of points."""
    z = np.asarray(z, dtype=complex)
    x = np.sum(np.abs(z) ** 2, axis=-1)
    d = p.derivatives(x, order=2)
    n = z.shape[-1]
    eye = np.eye(n)
    return d[1][..., None, None] * eye + d[2][..., None, None] * (
        np.conj(z)[..., :, None] * z[..., None, :]
    )


@dataclass(frozen=True)
class RealifiedMetric:
    """Batched evaluator of a ``dim x dim`` real metric.

    ``evaluate`` maps points of shape ``(..., dim)`` to matrices of shape
    ``(..., dim, dim)``.  ``in_domain`` reports, per point, whether the
    evaluator may be called there.  ``to_cartesian`` converts chart points to
    Cartesian realified coordinates of C^n (identity for the Cartesian chart).
    ``potential`` records the radial potential the metric came from, if any.
    """

    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    provenance: str
    in_domain: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)
    to_cartesian: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)
    from_cartesian: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)
    potential: RadialPotential | None = None

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    def contains(self, x) -> bool:
        if self.in_domain is None:
            return True
        return bool(np.all(self.in_domain(np.asarray(x, dtype=float))))

    def cartesian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x if self.to_cartesian is None else self.to_cartesian(x)

    def chart(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x if self.from_cartesian is None else self.from_cartesian(x)

    def norm(self, x, v) -> float:
        G = self(x)
        v = np.asarray(v, dtype=float)
        return math.sqrt(float(v @ G @ v))

    @classmethod
    def from_potential(cls, p: RadialPotential, n: int) -> "RealifiedMetric":
        """Cartesian realification of the metric induced by ``p`` on C^n."""

        def evaluate(x):
            return realify_matrix(radial_hermitian(p, real_to_complex(x)))

        def in_domain(x):
            return np.sum(x * x, axis=-1) < p.domain_sup

        return cls(2 * n, evaluate, f"{p.spec} (cartesian, n={n})", in_domain, potential=p)


def check_positive_definite(G: np.ndarray, where="") -> np.ndarray:
    w = np.linalg.eigvalsh(G)
    if not np.all(np.isfinite(w)) or w[0] <= 0:
        raise NotPositiveDefinite(
            f"metric is not positive definite{where}: smallest eigenvalue {w[0]!r}",
            eigenvalue=float(w[0]),
        )
    return w


def _first_derivative_stencil(G: RealifiedMetric, x: np.ndarray, h: float) -> np.ndarray:
    dim = G.dim
    E = np.eye(dim) * h
    pts = np.concatenate([x + E, x - E])
    vals = G(pts)
    return (vals[:dim] - vals[dim:]) / (2 * h)


def metric_first_derivatives(G: RealifiedMetric, x) -> tuple[np.ndarray, np.ndarray]:
    """Metric at ``x`` and ``dG[c, a, b] = ∂_c G_ab`` (Richardson-extrapolated)."""
    x = np.asarray(x, dtype=float)
    g0 = G(x)
    d1 = _first_derivative_stencil(G, x, FD_STEP)
    d2 = _first_derivative_stencil(G, x, FD_STEP / 2)
    return g0, (4 * d2 - d1) / 3


def _second_derivative_stencil(G: RealifiedMetric, x: np.ndarray, h: float, g0: np.ndarray):
    dim = G.dim
    I = np.eye(dim)
    plus = x + h * I
    minus = x - h * I
    iu, ju = np.triu_indices(dim, k=1)
    ei, ej = I[iu], I[ju]
    mixed = np.concatenate(
        [x + h * (ei + ej), x + h * (ei - ej), x - h * (ei - ej), x - h * (ei + ej)]
    )
    vals = G(np.concatenate([plus, minus, mixed]))
    vp, vm = vals[:dim], vals[dim: 2 * dim]
    m = len(iu)
    mpp, mpm, mmp, mmm = (vals[2 * dim + k * m: 2 * dim + (k + 1) * m] for k in range(4))
    first = (vp - vm) / (2 * h)
    second = np.empty((dim, dim, dim, dim))
    diag = (vp - 2 * g0 + vm) / (h * h)
    second[np.arange(dim), np.arange(dim)] = diag
    off = (mpp - mpm - mmp + mmm) / (4 * h * h)
    second[iu, ju] = off
    second[ju, iu] = off
    return first, second


def metric_derivatives(G: RealifiedMetric, x):
    """``(G, dG, ddG)`` with ``dG[c,a,b] = ∂_c G_ab`` and ``ddG[c,d,a,b] = ∂_c ∂_d G_ab``."""
    x = np.asarray(x, dtype=float)
    g0 = G(x)
    f1, s1 = _second_derivative_stencil(G, x, FD_STEP, g0)
    f2, s2 = _second_derivative_stencil(G, x, FD_STEP / 2, g0)
    return g0, (4 * f2 - f1) / 3, (4 * s2 - s1) / 3


def christoffel_from_derivatives(g0: np.ndarray, dG: np.ndarray) -> np.ndarray:
    # first kind: Γ_{a,bc} = (∂_b G_ac + ∂_c G_ab - ∂_a G_bc) / 2
    first = 0.5 * (
        np.einsum("bac->abc", dG) + np.einsum("cab->abc", dG) - dG
    )
    gamma = np.einsum("ad,dbc->abc", np.linalg.inv(g0), first)
    return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))


def christoffel_at(G: RealifiedMetric, x) -> np.ndarray:
    """``Γ[a, b, c] = Γ^a_{bc}`` from finite differences of the metric.

    Symmetric in ``(b, c)`` by construction.

    Raises
    ------
    NotPositiveDefinite
        If the metric at ``x`` is not positive definite.
    """
    g0, dG = metric_first_derivatives(G, x)
    check_positive_definite(g0, f" at {np.asarray(x).tolist()}")
    return christoffel_from_derivatives(g0, dG)


def riemann_lower(G: RealifiedMetric, x) -> tuple[np.ndarray, np.ndarray]:
    """Fully covariant Riemann tensor ``R_abcd`` and the metric at ``x``.

    Sign convention: a round sphere of curvature K has
    ``R_abcd = K (G_ac G_bd - G_ad G_bc)``, so the sectional curvature of
    ``span{X, Y}`` is ``R(X, Y, X, Y) / (|X|^2 |Y|^2 - <X, Y>^2)``.
    """
    g0, dG, ddG = metric_derivatives(G, x)
    check_positive_definite(g0, f" at {np.asarray(x).tolist()}")
    gamma = christoffel_from_derivatives(g0, dG)
    # ddG[c, d, a, b] = ∂_c ∂_d G_ab
    R = 0.5 * (
        np.einsum("bcad->abcd", ddG)
        + np.einsum("adbc->abcd", ddG)
        - np.einsum("bdac->abcd", ddG)
        - np.einsum("acbd->abcd", ddG)
    )
    R += np.einsum("ef,ebc,fad->abcd", g0, gamma, gamma)
    R -= np.einsum("ef,ebd,fac->abcd", g0, gamma, gamma)
    return R, g0


def sectional_from_riemann(R: np.ndarray, g0: np.ndarray, X, Y) -> np.ndarray:
    """Sectional curvature of ``span{X, Y}``; ``X, Y`` may be batched on axis 0."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    num = np.einsum("abcd,ka,kb,kc,kd->k", R, X, Y, X, Y)
    xx = np.einsum("ab,ka,kb->k", g0, X, X)
    yy = np.einsum("ab,ka,kb->k", g0, Y, Y)
    xy = np.einsum("ab,ka,kb->k", g0, X, Y)
    return num / (xx * yy - xy * xy)


def real_ricci(R: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """``Ric_bd = G^{ac} R_abcd`` (positive on spheres with the sign above)."""
    return np.einsum("ac,abcd->bd", np.linalg.inv(g0), R)
