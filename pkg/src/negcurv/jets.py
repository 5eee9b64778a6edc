"""Truncated Taylor jets and the registry of radial Kähler potentials.

A :class:`Jet` stores a value together with its derivatives (not Taylor
coefficients) up to order 4.  Arithmetic propagates derivatives exactly, so
curvature conditions that need f', f'', f''' of a potential, or two radial
derivatives of ``ln(f'(r^2) + r^2 f''(r^2))``, never go through finite
differences.

Jets may carry fewer than five entries.  Differentiating a jet drops its top
order, and every binary operation truncates to the lower of the two orders,
so an entry is never fabricated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

MAX_ORDER = 4

# binomial rows for the Leibniz rule
_BINOM = [[math.comb(n, k) for k in range(n + 1)] for n in range(MAX_ORDER + 1)]


@dataclass(frozen=True)
class Jet:
    """Value and derivatives ``(v0, v1, ..., vk)`` of a scalar at a point, k <= 4."""

    v: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.v) <= MAX_ORDER + 1:
            raise ValueError(f"jet needs 1..{MAX_ORDER + 1} entries, got {len(self.v)}")
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))

    @classmethod
    def variable(cls, x: float, order: int = MAX_ORDER) -> "Jet":
        """Jet of the identity map at ``x``."""
        return cls((x, 1.0) + (0.0,) * (order - 1))

    @classmethod
    def constant(cls, c: float, order: int = MAX_ORDER) -> "Jet":
        return cls((c,) + (0.0,) * order)

    @property
    def order(self) -> int:
        return len(self.v) - 1

    def __getitem__(self, k):
        return self.v[k]

    def __iter__(self):
        return iter(self.v)

    def __len__(self):
        return len(self.v)

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self.v)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.v[: order + 1])

    def derivative(self) -> "Jet":
        """Jet of the derivative; loses the top order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.v[1:])

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), self.order)

    def __add__(self, other):
        o = self._coerce(other)
        m = min(self.order, o.order)
        return Jet(tuple(a + b for a, b in zip(self.v[: m + 1], o.v[: m + 1])))

    __radd__ = __add__

    def __neg__(self):
        return Jet(tuple(-a for a in self.v))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(tuple(float(other) * a for a in self.v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, jet_elementary("reciprocal", other))
        return self * (1.0 / float(other))

    def __rtruediv__(self, other):
        return jet_elementary("reciprocal", self) * float(other)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Product of two jets by the general Leibniz rule."""
    m = min(a.order, b.order)
    out = []
    for n in range(m + 1):
        row = _BINOM[n]
        out.append(sum(row[k] * a.v[k] * b.v[n - k] for k in range(n + 1)))
    return Jet(tuple(out))


def compose(outer: Sequence[float], a: Jet) -> Jet:
    """Jet of ``F(a(t))`` given ``outer = (F(a0), F'(a0), ..., F^(m)(a0))``.

    Faà di Bruno through order 4; the result has order
    ``min(a.order, len(outer) - 1)``.
    """
    m = min(a.order, len(outer) - 1)
    f = outer
    a1 = a.v[1] if m >= 1 else 0.0
    a2 = a.v[2] if m >= 2 else 0.0
    a3 = a.v[3] if m >= 3 else 0.0
    a4 = a.v[4] if m >= 4 else 0.0
    out = [f[0]]
    if m >= 1:
        out.append(f[1] * a1)
    if m >= 2:
        out.append(f[2] * a1 * a1 + f[1] * a2)
    if m >= 3:
        out.append(f[3] * a1**3 + 3.0 * f[2] * a1 * a2 + f[1] * a3)
    if m >= 4:
        out.append(
            f[4] * a1**4
            + 6.0 * f[3] * a1 * a1 * a2
            + f[2] * (3.0 * a2 * a2 + 4.0 * a1 * a3)
            + f[1] * a4
        )
    return Jet(tuple(out))


def _elementary_derivatives(kind: str, x: float, power: float | None) -> list[float]:
    if kind == "exp":
        e = math.exp(x)
        return [e] * (MAX_ORDER + 1)
    if kind == "ln":
        if not x > 0:
            raise DomainError(f"ln requires a positive argument, got {x!r}")
        return [math.log(x), 1 / x, -1 / x**2, 2 / x**3, -6 / x**4]
    if kind == "reciprocal":
        if x == 0 or not math.isfinite(x):
            raise DomainError(f"reciprocal requires a finite nonzero argument, got {x!r}")
        return [1 / x, -1 / x**2, 2 / x**3, -6 / x**4, 24 / x**5]
    if kind == "power":
        if power is None:
            raise ValueError("power kind needs an exponent")
        p = float(power)
        integral = p.is_integer() and p >= 0
        if not integral and not x > 0:
            raise DomainError(f"x**{p} requires a positive argument, got {x!r}")
        out = []
        coeff = 1.0
        for k in range(MAX_ORDER + 1):
            if coeff == 0.0:
                out.append(0.0)
            else:
                out.append(coeff * x ** (p - k))
            coeff *= p - k
        return out
    raise ValueError(f"unknown elementary function {kind!r}")


def jet_elementary(kind: str, a: Jet, power: float | None = None) -> Jet:
    """Compose one of ``exp``, ``ln``, ``reciprocal``, ``power`` with a jet.

    Raises
    ------
    DomainError
        If ``a.v0`` is outside the function's domain (ln and non-integer
        powers need ``v0 > 0``, reciprocal needs ``v0 != 0``).
    """
    return compose(_elementary_derivatives(kind, a.v[0], power), a)


# -- radial potentials -------------------------------------------------------

KINDS = ("linear", "exp", "log_ball", "fubini", "poly")


@dataclass(frozen=True)
class RadialPotential:
    """A potential ``f`` on ``[0, domain_sup)``; the metric is ``i∂∂̄ f(|z|^2)``.

    ``params`` holds ``(c1, ..., ck)`` for ``poly``, meaning
    ``f(x) = c1 x + c2 x^2 + ... + ck x^k``, and is empty otherwise.
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "poly":
            if not self.params:
                raise ValueError("poly potential needs at least one coefficient")
        elif self.params:
            raise ValueError(f"{self.kind} potential takes no parameters")
        object.__setattr__(self, "params", tuple(float(c) for c in self.params))

    @property
    def domain_sup(self) -> float:
        return 1.0 if self.kind == "log_ball" else math.inf

    @property
    def spec(self) -> str:
        if self.kind == "poly":
            return "poly:" + ",".join(repr(c) for c in self.params)
        return self.kind

    def __str__(self):
        return self.spec

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x >= self.domain_sup):
            bad = x[(~np.isfinite(x)) | (x < 0) | (x >= self.domain_sup)].ravel()[0]
            raise DomainError(
                f"{self.spec}: x = r^2 = {bad!r} is outside [0, {self.domain_sup})"
            )

    def derivatives(self, x, order: int = MAX_ORDER) -> np.ndarray:
        """Stack ``(f, f', ..., f^(order))`` evaluated at ``x`` (scalar or array).

        The result has shape ``(order + 1,) + np.shape(x)``.
        """
        self.check_domain(x)
        x = np.asarray(x, dtype=float)
        k = np.arange(order + 1).reshape((-1,) + (1,) * x.ndim)
        if self.kind == "linear":
            out = np.zeros((order + 1,) + x.shape)
            out[0] = x
            if order >= 1:
                out[1] = 1.0
            return out
        if self.kind == "exp":
            return np.broadcast_to(np.exp(x), (order + 1,) + x.shape).copy()
        if self.kind == "log_ball":
            fact = np.array([math.factorial(max(j - 1, 0)) for j in range(order + 1)])
            out = fact.reshape(k.shape) * (1.0 - x) ** (-k.astype(float))
            out[0] = -np.log1p(-x)
            return out
        if self.kind == "fubini":
            fact = np.array([(-1) ** (j - 1) * math.factorial(max(j - 1, 0)) for j in range(order + 1)])
            out = fact.reshape(k.shape) * (1.0 + x) ** (-k.astype(float))
            out[0] = np.log1p(x)
            return out
        # poly: coefficients of x^1..x^m
        coeffs = np.concatenate([[0.0], self.params])
        out = np.empty((order + 1,) + x.shape)
        poly = np.polynomial.Polynomial(coeffs)
        for j in range(order + 1):
            out[j] = poly(x)
            poly = poly.deriv()
        return out

    def __call__(self, x):
        return self.derivatives(x, order=0)[0]


def potential_jet(p: RadialPotential, x: float) -> Jet:
    """``(f(x), f'(x), f''(x), f'''(x), f''''(x))`` from closed forms."""
    return Jet(tuple(p.derivatives(float(x)).tolist()))


def parse_potential(text: str) -> RadialPotential:
    """Parse ``exp``, ``linear``, ``log_ball``, ``fubini`` or ``poly:c1,...,ck``."""
    text = text.strip()
    if text.startswith("poly:"):
        body = text[len("poly:"):]
        try:
            coeffs = tuple(float(c) for c in body.split(",") if c.strip())
        except ValueError as exc:
            raise ValueError(f"bad poly coefficients in {text!r}") from exc
        if not coeffs:
            raise ValueError(f"poly potential {text!r} has no coefficients")
        return RadialPotential("poly", coeffs)
    if text not in KINDS or text == "poly":
        raise ValueError(
            f"unknown potential {text!r}; use exp, linear, log_ball, fubini or poly:c1,...,ck"
        )
    return RadialPotential(text)


LINEAR = RadialPotential("linear")
EXP = RadialPotential("exp")
LOG_BALL = RadialPotential("log_ball")
FUBINI = RadialPotential("fubini")
