"""Rotation-vector fields theta(xi) built from analytic curve specs.

Every derivative is taken from the closed form of the field, so jets carry no
differentiation noise of their own.
"""
from __future__ import annotations

import math
from typing import List, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from common.jets import VectorJet

from ..models import CurveSpec


def _poly_derivatives(coeffs: List[float], xi: float, order: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    out = np.zeros(order + 1)
    for k in range(order + 1):
        out[k] = P.polyval(xi, P.polyder(c, k)) if k < c.size else 0.0
    return out


def _fourier_derivatives(coeffs: List[float], frequency: float, xi: float, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    out[0] = coeffs[0]
    for j in range(1, (len(coeffs) - 1) // 2 + 1):
        a_j, b_j = coeffs[2 * j - 1], coeffs[2 * j]
        rate = j * frequency
        phase = rate * xi
        for k in range(order + 1):
            # d^k cos(x) = cos(x + k pi/2), same shift for sin.
            shift = phase + 0.5 * k * math.pi
            out[k] += rate**k * (a_j * math.cos(shift) + b_j * math.sin(shift))
    return out


class RotationField:
    def __init__(self, spec: CurveSpec):
        self.spec = spec
        self.axis: Optional[np.ndarray] = None
        if spec.kind == "fixed-axis-poly":
            self.axis = np.asarray(spec.axis, dtype=float)

    @property
    def fixed_axis(self) -> Optional[np.ndarray]:
        return self.axis

    def check_point(self, xi: float) -> None:
        domain = self.spec.domain
        if domain is not None and not domain[0] <= xi <= domain[1]:
            raise ValueError(f"xi = {xi!r} outside the spec domain [{domain[0]}, {domain[1]}]")

    def jet(self, xi: float, order: int) -> VectorJet:
        """theta and its first ``order`` derivatives at ``xi``."""
        spec = self.spec
        if spec.kind == "fixed-axis-poly":
            scalar = _poly_derivatives(spec.coefficients[0], xi, order)
            return VectorJet(np.outer(scalar, self.axis))
        columns = []
        for index, coeffs in enumerate(spec.coefficients):
            if spec.kind == "poly3":
                column = _poly_derivatives(coeffs, xi, order)
            else:
                column = _fourier_derivatives(coeffs, spec.frequency, xi, order)
                if spec.trend is not None:
                    column = column + _poly_derivatives(spec.trend[index], xi, order)
            columns.append(column)
        return VectorJet(np.column_stack(columns))

    def value(self, xi: float) -> np.ndarray:
        return np.array(self.jet(xi, 0)[0])

    def rate(self, xi: float) -> np.ndarray:
        return np.array(self.jet(xi, 1)[1])
