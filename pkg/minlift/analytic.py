"""
Analytic functions on the unit disk as immutable expression trees.

Every node evaluates together with its first and second derivatives by exact
propagation rules (no finite differences), and every node has a symbolic
derivative that is again an expression. Logarithms only appear as the
disk-safe atanh-log L(z) = log((1+z)/(1-z)), optionally composed with a
rotation z -> sigma*z, |sigma| = 1.
"""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .errors import DomainError, PoleError

DEFAULT_R_MAX = 0.99
POLE_GUARD = 1e-14
DEFAULT_NODES = 64


def _coerce(value):
    if isinstance(value, AnalyticExpr):
        return value
    if isinstance(value, (int, float, complex, np.number)):
        return Constant(complex(value))
    raise TypeError(f"cannot use {type(value).__name__} in an analytic expression")


def _pair(value: complex):
    return [float(value.real), float(value.imag)]


def _unpair(value) -> complex:
    re, im = value
    return complex(float(re), float(im))


def _fmt(value: complex) -> str:
    if value.imag == 0:
        return f"{value.real:g}"
    if value.real == 0:
        if value.imag == 1:
            return "i"
        if value.imag == -1:
            return "-i"
        return f"{value.imag:g}i"
    return f"({value.real:g}{value.imag:+g}i)"


def _coef(value: complex) -> str:
    # prefix form used in L(iz), -z^6, ...
    if value == 1:
        return ""
    if value == -1:
        return "-"
    return _fmt(value)


def _zeros(z):
    return np.zeros(np.shape(z), dtype=complex)


def unit(angle: float) -> complex:
    """e^{i*angle}, with components within 1e-15 of 0 or +-1 snapped to those values."""
    parts = []
    for value in (np.cos(angle), np.sin(angle)):
        nearest = round(value)
        parts.append(float(nearest) if abs(value - nearest) < 1e-15 else float(value))
    return complex(parts[0] + 0.0, parts[1] + 0.0)


class AnalyticExpr:
    """
    Base class of the expression tree.

    Subclasses are frozen dataclasses; they implement `_jet` (value and
    derivatives up to the requested order at an array of points),
    `derivative` and `_fields` (extra JSON payload besides the children).
    """

    kind = "expr"

    def children(self) -> tuple:
        return ()

    def _fields(self) -> dict:
        return {}

    def _jet(self, z, order):
        raise NotImplementedError

    def derivative(self) -> "AnalyticExpr":
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"kind": self.kind, **self._fields(),
                "children": [child.to_json() for child in self.children()]}

    def rotate(self, sigma) -> "AnalyticExpr":
        return Rotated(complex(sigma), self)

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __sub__(self, other):
        return Sum((self, Scaled(-1.0, _coerce(other))))

    def __rsub__(self, other):
        return Sum((_coerce(other), Scaled(-1.0, self)))

    def __neg__(self):
        return Scaled(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, AnalyticExpr):
            return Product(self, other)
        return Scaled(complex(other), self)

    def __rmul__(self, other):
        if isinstance(other, AnalyticExpr):
            return Product(other, self)
        return Scaled(complex(other), self)

    def __truediv__(self, other):
        if isinstance(other, AnalyticExpr):
            return Quotient(self, other)
        return Scaled(1.0 / complex(other), self)

    def __rtruediv__(self, other):
        return Quotient(_coerce(other), self)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        if isinstance(self, Variable):
            return Power(int(n))
        if n == 0:
            return Constant(1.0)
        result = self
        for _ in range(int(n) - 1):
            result = Product(result, self)
        return result


@dataclass(frozen=True, eq=True)
class Constant(AnalyticExpr):
    value: complex = 0j
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def _fields(self):
        return {"value": _pair(self.value)}

    def _jet(self, z, order):
        return [np.full(np.shape(z), self.value, dtype=complex)] + [_zeros(z) for _ in range(order)]

    def derivative(self):
        return Constant(0.0)

    def __str__(self):
        return _fmt(self.value)


@dataclass(frozen=True, eq=True)
class Variable(AnalyticExpr):
    kind = "variable"

    def _jet(self, z, order):
        out = [np.asarray(z, dtype=complex)]
        if order >= 1:
            out.append(np.ones(np.shape(z), dtype=complex))
        if order >= 2:
            out.append(_zeros(z))
        return out

    def derivative(self):
        return Constant(1.0)

    def __str__(self):
        return "z"


@dataclass(frozen=True, eq=True)
class Power(AnalyticExpr):
    """z**n for a non-negative integer n."""

    n: int = 1
    kind = "power"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"power must be a non-negative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def _fields(self):
        return {"n": self.n}

    def _jet(self, z, order):
        n = self.n
        out = [np.power(z, n)]
        if order >= 1:
            out.append(n * np.power(z, n - 1) if n >= 1 else _zeros(z))
        if order >= 2:
            out.append(n * (n - 1) * np.power(z, n - 2) if n >= 2 else _zeros(z))
        return out

    def derivative(self):
        if self.n == 0:
            return Constant(0.0)
        if self.n == 1:
            return Constant(1.0)
        return Scaled(float(self.n), Power(self.n - 1))

    def __str__(self):
        return "z" if self.n == 1 else f"z^{self.n}"


@dataclass(frozen=True, eq=True)
class AtanhLog(AnalyticExpr):
    """L(z) = log((1+z)/(1-z)) on the principal branch, i.e. 2*atanh(z)."""

    kind = "atanh_log"

    def _jet(self, z, order):
        # Re(1+z) > 0 and Re(1-z) > 0 on the disk, so the two principal logs
        # never cross their cut and their difference is the principal log of the ratio
        out = [np.log1p(z) - np.log1p(-z)]
        w = 1.0 - z * z
        if order >= 1:
            out.append(2.0 / w)
        if order >= 2:
            out.append(4.0 * z / (w * w))
        return out

    def derivative(self):
        return Quotient(Constant(2.0), Sum((Constant(1.0), Scaled(-1.0, Power(2)))))

    def __str__(self):
        return "L(z)"


@dataclass(frozen=True, eq=True)
class Rotated(AnalyticExpr):
    """E(sigma*z) for a unit-modulus sigma."""

    sigma: complex = 1 + 0j
    inner: AnalyticExpr = None
    kind = "rotated"

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        if abs(abs(self.sigma) - 1.0) > 1e-12:
            raise ValueError(f"rotation factor must have modulus 1, got {self.sigma}")
        if not isinstance(self.inner, AnalyticExpr):
            raise TypeError("rotated expression needs an inner expression")

    def children(self):
        return (self.inner,)

    def _fields(self):
        return {"sigma": _pair(self.sigma)}

    def _jet(self, z, order):
        inner = self.inner._jet(self.sigma * np.asarray(z, dtype=complex), order)
        return [value * self.sigma ** k for k, value in enumerate(inner)]

    def derivative(self):
        return Scaled(self.sigma, Rotated(self.sigma, self.inner.derivative()))

    def __str__(self):
        if isinstance(self.inner, AtanhLog):
            return f"L({_coef(self.sigma)}z)"
        return f"({self.inner})[z->{_coef(self.sigma)}z]"


@dataclass(frozen=True, eq=True)
class Sum(AnalyticExpr):
    terms: Tuple[AnalyticExpr, ...] = ()
    kind = "sum"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(_coerce(t) for t in self.terms))
        if not self.terms:
            raise ValueError("a sum needs at least one term")

    def children(self):
        return self.terms

    def _jet(self, z, order):
        total = self.terms[0]._jet(z, order)
        for term in self.terms[1:]:
            total = [a + b for a, b in zip(total, term._jet(z, order))]
        return total

    def derivative(self):
        return Sum(tuple(t.derivative() for t in self.terms))

    def __str__(self):
        text = " + ".join(str(t) for t in self.terms)
        return text.replace("+ -", "- ")


@dataclass(frozen=True, eq=True)
class Scaled(AnalyticExpr):
    value: complex = 1 + 0j
    inner: AnalyticExpr = None
    kind = "scaled"

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "inner", _coerce(self.inner))

    def children(self):
        return (self.inner,)

    def _fields(self):
        return {"value": _pair(self.value)}

    def _jet(self, z, order):
        return [self.value * v for v in self.inner._jet(z, order)]

    def derivative(self):
        return Scaled(self.value, self.inner.derivative())

    def __str__(self):
        inner = str(self.inner)
        if isinstance(self.inner, (Sum, Quotient)):
            inner = f"({inner})"
        if self.value == -1:
            return f"-{inner}"
        return f"{_fmt(self.value)}*{inner}"


@dataclass(frozen=True, eq=True)
class Product(AnalyticExpr):
    left: AnalyticExpr = None
    right: AnalyticExpr = None
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "left", _coerce(self.left))
        object.__setattr__(self, "right", _coerce(self.right))

    def children(self):
        return (self.left, self.right)

    def _jet(self, z, order):
        a = self.left._jet(z, order)
        b = self.right._jet(z, order)
        out = [a[0] * b[0]]
        if order >= 1:
            out.append(a[1] * b[0] + a[0] * b[1])
        if order >= 2:
            out.append(a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2])
        return out

    def derivative(self):
        return Sum((Product(self.left.derivative(), self.right),
                    Product(self.left, self.right.derivative())))

    def __str__(self):
        return f"({self.left})*({self.right})"


@dataclass(frozen=True, eq=True)
class Quotient(AnalyticExpr):
    numerator: AnalyticExpr = None
    denominator: AnalyticExpr = None
    kind = "quotient"

    def __post_init__(self):
        object.__setattr__(self, "numerator", _coerce(self.numerator))
        object.__setattr__(self, "denominator", _coerce(self.denominator))

    def children(self):
        return (self.numerator, self.denominator)

    def _jet(self, z, order):
        a = self.numerator._jet(z, order)
        b = self.denominator._jet(z, order)
        if np.any(np.abs(b[0]) < POLE_GUARD):
            raise PoleError(f"denominator {self.denominator} vanishes (|.| < {POLE_GUARD:g})")
        q0 = a[0] / b[0]
        out = [q0]
        if order >= 1:
            q1 = (a[1] - q0 * b[1]) / b[0]
            out.append(q1)
        if order >= 2:
            out.append((a[2] - 2.0 * q1 * b[1] - q0 * b[2]) / b[0])
        return out

    def derivative(self):
        top = Sum((Product(self.numerator.derivative(), self.denominator),
                   Scaled(-1.0, Product(self.numerator, self.denominator.derivative()))))
        return Quotient(top, Product(self.denominator, self.denominator))

    def __str__(self):
        return f"({self.numerator})/({self.denominator})"


@dataclass(frozen=True, eq=True)
class RadialIntegral(AnalyticExpr):
    """The antiderivative z -> integral of `integrand` over [0, z], by Gauss-Legendre quadrature."""

    integrand: AnalyticExpr = None
    nodes: int = DEFAULT_NODES
    kind = "integral"

    def __post_init__(self):
        object.__setattr__(self, "integrand", _coerce(self.integrand))
        if self.nodes < 2:
            raise ValueError(f"quadrature needs at least 2 nodes, got {self.nodes}")

    def children(self):
        return (self.integrand,)

    def _fields(self):
        return {"nodes": self.nodes}

    def _jet(self, z, order):
        out = [_quadrature(self.integrand, 0j, z, self.nodes)]
        if order >= 1:
            out.extend(self.integrand._jet(z, order - 1))
        return out

    def derivative(self):
        return self.integrand

    def __str__(self):
        return f"int_0^z[{self.integrand}]"


_NODE_KINDS = {
    "constant": lambda data, children: Constant(_unpair(data["value"])),
    "variable": lambda data, children: Variable(),
    "power": lambda data, children: Power(int(data["n"])),
    "atanh_log": lambda data, children: AtanhLog(),
    "rotated": lambda data, children: Rotated(_unpair(data["sigma"]), children[0]),
    "sum": lambda data, children: Sum(tuple(children)),
    "scaled": lambda data, children: Scaled(_unpair(data["value"]), children[0]),
    "product": lambda data, children: Product(children[0], children[1]),
    "quotient": lambda data, children: Quotient(children[0], children[1]),
    "integral": lambda data, children: RadialIntegral(children[0], int(data["nodes"])),
}


def from_json(data) -> AnalyticExpr:
    """Rebuild an expression from `AnalyticExpr.to_json()` output (dict or JSON text)."""
    if isinstance(data, str):
        data = json.loads(data)
    kind = data.get("kind")
    if kind not in _NODE_KINDS:
        raise ValueError(f"unknown expression kind {kind!r}")
    children = [from_json(child) for child in data.get("children", [])]
    return _NODE_KINDS[kind](data, children)


def monomial(expr: AnalyticExpr):
    """Return (c, n) if `expr` is the monomial c*z**n, else None."""
    if isinstance(expr, Variable):
        return 1 + 0j, 1
    if isinstance(expr, Power):
        return 1 + 0j, expr.n
    if isinstance(expr, Constant):
        return expr.value, 0
    if isinstance(expr, Scaled):
        inner = monomial(expr.inner)
        return None if inner is None else (expr.value * inner[0], inner[1])
    if isinstance(expr, Product):
        left, right = monomial(expr.left), monomial(expr.right)
        if left is None or right is None:
            return None
        return left[0] * right[0], left[1] + right[1]
    return None


def square_label(q: AnalyticExpr) -> str:
    """Human-readable q**2, simplified when q is a monomial (z -> z^2, iz^3 -> -z^6)."""
    mono = monomial(q)
    if mono is None:
        return f"({q})^2"
    c, n = mono
    c = c * c
    c = complex(round(c.real, 12) + 0.0, round(c.imag, 12) + 0.0)
    if c == 0 or n == 0:
        return _fmt(c)
    return f"{_coef(c)}{str(Power(2 * n))}"


def _as_points(z, r_max):
    points = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(points)):
        raise DomainError("evaluation point is not finite")
    radius = np.abs(points)
    if np.any(radius >= r_max):
        raise DomainError(f"|z| = {float(np.max(radius)):.6g} is outside the disk of radius {r_max:g}")
    return points


def _unwrap(value, like):
    return complex(value) if np.ndim(like) == 0 else value


def _check_finite(values, what):
    for value in values:
        if not np.all(np.isfinite(value)):
            raise PoleError(f"{what} produced a non-finite value")


def eval_d(expr: AnalyticExpr, z, order: int = 0, r_max: float = DEFAULT_R_MAX):
    """
    Evaluate `expr` and its derivatives at z (scalar or array).

    Returns a tuple (f, f', f'') truncated to `order` + 1 entries. Scalars in,
    Python complex numbers out; arrays in, complex arrays out.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    points = _as_points(z, r_max)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        jet = expr._jet(points, order)
    _check_finite(jet, str(expr))
    return tuple(_unwrap(value, z) for value in jet)


@lru_cache(maxsize=None)
def gauss_legendre(nodes: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    if nodes < 2:
        raise ValueError(f"quadrature needs at least 2 nodes, got {nodes}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    t, w = (x + 1.0) / 2.0, w / 2.0
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _quadrature(expr, a, b, nodes):
    t, w = gauss_legendre(nodes)
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    delta = b - a
    zeta = a[..., None] + delta[..., None] * t
    values = expr._jet(zeta, 0)[0]
    return (values @ w) * delta


def integrate_segment(expr: AnalyticExpr, a, b, nodes: int = DEFAULT_NODES,
                      r_max: float = DEFAULT_R_MAX):
    """Integral of `expr` along the straight segment from a to b."""
    _as_points(a, r_max)
    _as_points(b, r_max)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        value = _quadrature(expr, a, b, nodes)
    _check_finite([value], f"integral of {expr}")
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return complex(value)
    return value


def integrate_radial(expr: AnalyticExpr, z, nodes: int = DEFAULT_NODES,
                     r_max: float = DEFAULT_R_MAX):
    """Integral of `expr` along the radial segment [0, z]."""
    return integrate_segment(expr, 0j, z, nodes, r_max)


def integrate_path(expr: AnalyticExpr, points, nodes: int = DEFAULT_NODES,
                   r_max: float = DEFAULT_R_MAX) -> complex:
    """Integral of `expr` along the polyline through `points` (one path, scalar vertices)."""
    points = [complex(p) for p in points]
    if len(points) < 2:
        raise ValueError("a path needs at least two points")
    total = 0j
    for a, b in zip(points[:-1], points[1:]):
        total += integrate_segment(expr, a, b, nodes, r_max)
    logging.debug(f"Integrated {expr} along a {len(points) - 1}-segment path")
    return total
