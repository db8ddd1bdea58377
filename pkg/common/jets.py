"""Truncated Taylor (jet) arithmetic in the arc-length parameter.

Jets store literal derivatives, ``coeffs[n] = d^n f / dxi^n`` (no division by n!), so
every product below is a Leibniz sum weighted by binomial coefficients.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import GimbalDomain, JetDomain, OrderError, SmallAngleAmbiguous

MAX_TABLE_ORDER = 16
GIBBS_MIN_ANGLE = 1e-6
GIBBS_PI_MARGIN = 1e-3
AXIS_ALIGN_TOL = 1e-12


class Binomial:
    """Pascal triangle built once from C(n, i) = C(n-1, i-1) + C(n-1, i)."""

    def __init__(self, max_order: int):
        rows = [(1,)]
        for n in range(1, max_order + 1):
            prev = rows[-1]
            rows.append((1,) + tuple(prev[i - 1] + prev[i] for i in range(1, n)) + (1,))
        self.max_order = max_order
        self._rows = tuple(rows)

    def __call__(self, n: int, i: int) -> int:
        if not 0 <= i <= n <= self.max_order:
            raise IndexError(f"binomial index ({n}, {i}) outside 0 <= i <= n <= {self.max_order}")
        return self._rows[n][i]


PASCAL = Binomial(MAX_TABLE_ORDER)


def binom(n: int, i: int) -> int:
    return PASCAL(n, i)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class ScalarJet:
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if coeffs.size == 0:
            raise OrderError("a jet needs at least its value")
        if not np.all(np.isfinite(coeffs)):
            raise JetDomain("jet coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @classmethod
    def constant(cls, value: float, order: int) -> "ScalarJet":
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(coeffs)

    @classmethod
    def variable(cls, value: float, order: int) -> "ScalarJet":
        """Jet of the identity map xi -> xi evaluated at ``value``."""
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n])

    def __len__(self) -> int:
        return self.coeffs.size

    def truncate(self, order: int) -> "ScalarJet":
        if order > self.order:
            raise OrderError(f"cannot truncate order {self.order} jet to order {order}")
        return ScalarJet(self.coeffs[: order + 1])

    def derivative(self) -> "ScalarJet":
        if self.order == 0:
            raise OrderError("derivative of an order-0 jet is unknown")
        return ScalarJet(self.coeffs[1:])

    def __add__(self, other):
        if isinstance(other, ScalarJet):
            _check_orders(self, other)
            return ScalarJet(self.coeffs + other.coeffs)
        coeffs = self.coeffs.copy()
        coeffs[0] += float(other)
        return ScalarJet(coeffs)

    __radd__ = __add__

    def __neg__(self) -> "ScalarJet":
        return ScalarJet(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ScalarJet):
            return jet_mul(self, other)
        return ScalarJet(self.coeffs * float(other))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorJet:
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] == 0:
            raise OrderError(f"vector jet rows must have shape (N+1, 3), got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise JetDomain("jet rows must be finite")
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def constant(cls, value, order: int) -> "VectorJet":
        rows = np.zeros((order + 1, 3))
        rows[0] = np.asarray(value, dtype=float)
        return cls(rows)

    @classmethod
    def zeros(cls, order: int) -> "VectorJet":
        return cls(np.zeros((order + 1, 3)))

    @property
    def order(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.rows[0]

    def __getitem__(self, n: int) -> np.ndarray:
        return self.rows[n]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def truncate(self, order: int) -> "VectorJet":
        if order > self.order:
            raise OrderError(f"cannot truncate order {self.order} jet to order {order}")
        return VectorJet(self.rows[: order + 1])

    def derivative(self) -> "VectorJet":
        if self.order == 0:
            raise OrderError("derivative of an order-0 jet is unknown")
        return VectorJet(self.rows[1:])

    def component(self, axis) -> ScalarJet:
        return ScalarJet(self.rows @ np.asarray(axis, dtype=float))

    def __add__(self, other: "VectorJet") -> "VectorJet":
        _check_orders(self, other)
        return VectorJet(self.rows + other.rows)

    def __neg__(self) -> "VectorJet":
        return VectorJet(-self.rows)

    def __sub__(self, other: "VectorJet") -> "VectorJet":
        return self + (-other)

    def __mul__(self, scale: float) -> "VectorJet":
        return VectorJet(self.rows * float(scale))

    __rmul__ = __mul__


def _check_orders(*jets) -> int:
    orders = {jet.order for jet in jets}
    if len(orders) != 1:
        raise OrderError(f"jet orders differ: {sorted(orders)}")
    return orders.pop()


def leibniz(left, right, product: Callable) -> np.ndarray:
    """Row n of the result is sum_i C(n, i) * product(left[n - i], right[i])."""
    order = min(len(left), len(right)) - 1
    out = []
    for n in range(order + 1):
        terms = [binom(n, i) * product(left[n - i], right[i]) for i in range(n + 1)]
        out.append(np.sum(terms, axis=0))
    return np.array(out)


def jet_mul(f: ScalarJet, g: ScalarJet) -> ScalarJet:
    _check_orders(f, g)
    return ScalarJet(leibniz(f.coeffs, g.coeffs, operator.mul))


def jet_dot(u: VectorJet, v: VectorJet) -> ScalarJet:
    _check_orders(u, v)
    return ScalarJet(leibniz(u.rows, v.rows, np.dot))


def jet_cross(u: VectorJet, v: VectorJet) -> VectorJet:
    _check_orders(u, v)
    return VectorJet(leibniz(u.rows, v.rows, np.cross))


def jet_scale(f: ScalarJet, v: VectorJet) -> VectorJet:
    _check_orders(f, v)
    return VectorJet(leibniz(f.coeffs, v.rows, operator.mul))


def jet_sqrt(f: ScalarJet) -> ScalarJet:
    if not f[0] > 0.0:
        raise JetDomain(f"sqrt needs a positive value, got {f[0]!r}")
    g = np.zeros(f.order + 1)
    g[0] = math.sqrt(f[0])
    for n in range(1, f.order + 1):
        inner = sum(binom(n, i) * g[n - i] * g[i] for i in range(1, n))
        g[n] = (f[n] - inner) / (2.0 * g[0])
    return ScalarJet(g)


def jet_recip(f: ScalarJet) -> ScalarJet:
    if f[0] == 0.0:
        raise JetDomain("reciprocal of a jet with zero value")
    r = np.zeros(f.order + 1)
    r[0] = 1.0 / f[0]
    for n in range(1, f.order + 1):
        r[n] = -sum(binom(n, i) * f[n - i] * r[i] for i in range(n)) / f[0]
    return ScalarJet(r)


def jet_tan_half(f: ScalarJet) -> ScalarJet:
    """tan(f/2) from t' = (1 + t^2) f' / 2, differentiated order by order."""
    half = 0.5 * f[0]
    if abs(math.cos(half)) < 1e-12:
        raise JetDomain(f"tan(f/2) has a pole at f = {f[0]!r}")
    order = f.order
    t = np.zeros(order + 1)
    sec2 = np.zeros(order + 1)
    t[0] = math.tan(half)
    for n in range(order):
        sec2[n] = sum(binom(n, i) * t[n - i] * t[i] for i in range(n + 1))
        if n == 0:
            sec2[0] += 1.0
        t[n + 1] = 0.5 * sum(binom(n, i) * sec2[n - i] * f[i + 1] for i in range(n + 1))
    return ScalarJet(t)


def jet_sincos(f: ScalarJet) -> Tuple[ScalarJet, ScalarJet]:
    order = f.order
    s = np.zeros(order + 1)
    c = np.zeros(order + 1)
    s[0] = math.sin(f[0])
    c[0] = math.cos(f[0])
    for n in range(order):
        s[n + 1] = sum(binom(n, i) * c[n - i] * f[i + 1] for i in range(n + 1))
        c[n + 1] = -sum(binom(n, i) * s[n - i] * f[i + 1] for i in range(n + 1))
    return ScalarJet(s), ScalarJet(c)


def jet_cos2_half(f: ScalarJet) -> ScalarJet:
    """cos^2(f/2) squared from the half-angle cosine, so it keeps relative accuracy near f = pi."""
    _, cosine = jet_sincos(0.5 * f)
    return jet_mul(cosine, cosine)


def gibbs_jets(theta: VectorJet, fixed_axis=None) -> Tuple[VectorJet, ScalarJet]:
    """Gibbs vector phi = tan(theta/2)/theta * theta and phi_bar = 2 cos^2(theta/2), as jets.

    A field lying along ``fixed_axis`` goes through the signed angle, which stays smooth
    through zero. Otherwise the norm of theta is not smooth near zero angle, so the field
    must vanish identically there.
    """
    angle = float(np.linalg.norm(theta.rows[0]))
    if angle >= math.pi - GIBBS_PI_MARGIN:
        raise GimbalDomain(f"rotation angle {angle!r} too close to pi for the Gibbs vector")
    if fixed_axis is not None:
        axis = np.asarray(fixed_axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        signed = _signed_angle(theta, axis)
        if signed is not None:
            tangent = jet_tan_half(signed)
            return VectorJet(np.outer(tangent.coeffs, axis)), 2.0 * jet_cos2_half(signed)
    if angle <= GIBBS_MIN_ANGLE:
        if not np.any(theta.rows):
            return VectorJet.zeros(theta.order), ScalarJet.constant(2.0, theta.order)
        if fixed_axis is None:
            raise SmallAngleAmbiguous(
                "rotation angle below 1e-6 with a varying axis; supply the fixed rotation axis"
            )
        raise SmallAngleAmbiguous("rotation vector field is not aligned with the given fixed axis")

    norm = jet_sqrt(jet_dot(theta, theta))
    factor = jet_mul(jet_tan_half(norm), jet_recip(norm))
    return jet_scale(factor, theta), 2.0 * jet_cos2_half(norm)


def _signed_angle(theta: VectorJet, axis: np.ndarray) -> Optional[ScalarJet]:
    along = theta.rows @ axis
    residual = theta.rows - np.outer(along, axis)
    if np.max(np.abs(residual)) > AXIS_ALIGN_TOL * (1.0 + np.max(np.abs(theta.rows))):
        return None
    return ScalarJet(along)
