"""Closed-form spatial curvature derivatives from the Gibbs parametrization."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from common.errors import InconsistentGibbsPair, OrderError
from common.jets import ScalarJet, VectorJet, binom, gibbs_jets
from common.so3 import IDENTITY, hat, lie_bracket, validate_rotation

MAX_DERIVATIVE_ORDER = 8
GIBBS_PAIR_TOL = 1e-10


class CurvatureJet(VectorJet):
    """Spatial curvature vector kappa and its xi-derivatives, one row per order."""

    def hats(self) -> np.ndarray:
        return np.array([hat(row) for row in self.rows])


@dataclass(frozen=True, eq=False)
class RotationJet:
    """Q and its xi-derivatives; row 0 is a proper rotation."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 3 or rows.shape[1:] != (3, 3):
            raise OrderError(f"rotation jet rows must have shape (N+1, 3, 3), got {rows.shape}")
        validate_rotation(rows[0])
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def order(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def rotation(self) -> np.ndarray:
        return self.rows[0]

    def __getitem__(self, n: int) -> np.ndarray:
        return self.rows[n]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def transposed(self) -> np.ndarray:
        return np.transpose(self.rows, (0, 2, 1))


def jmax(m: int) -> int:
    """Largest j kept after pairing the brackets of d^m [a, a']."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if (m + 1) % 2 == 0:
        return (m + 1) // 2 - 1
    return (m + 1) // 2


def bcoef(m: int, j: int) -> int:
    if not 0 <= j <= jmax(m):
        raise IndexError(f"j = {j} outside 0..{jmax(m)} for m = {m}")
    # C(m, m + 1) is zero, which makes b(m, 0) = 1.
    paired = binom(m, m - j + 1) if j >= 1 else 0
    return binom(m, j) - paired


def bcoef_ratio(m: int, j: int) -> Fraction:
    if not 0 <= j <= jmax(m):
        raise IndexError(f"j = {j} outside 0..{jmax(m)} for m = {m}")
    return Fraction(binom(m, j) * (m - 2 * j + 1), m - j + 1)


def table2(n_max: int) -> List[List[int]]:
    """jmax(n - i) for 0 <= i <= n <= n_max."""
    return [[jmax(n - i) for i in range(n + 1)] for n in range(n_max + 1)]


def skew_pair_derivative(a: VectorJet, m: int) -> np.ndarray:
    """d^m [a_hat, d a_hat] using the reduced coefficients b(m, j)."""
    if a.order < m + 1:
        raise OrderError(f"need a jet of order {m + 1}, got {a.order}")
    total = np.zeros((3, 3))
    for j in range(jmax(m) + 1):
        total += bcoef(m, j) * lie_bracket(hat(a[j]), hat(a[m - j + 1]))
    return total


def _pair_term(phi: VectorJet, m: int) -> np.ndarray:
    inner = phi[m + 1].copy()
    for j in range(jmax(m) + 1):
        inner = inner + bcoef(m, j) * np.cross(phi[j], phi[m + 1 - j])
    return inner


def curvature_from_gibbs(phi: VectorJet, phi_bar: ScalarJet) -> Tuple[np.ndarray, np.ndarray]:
    if phi.order < 1 or phi_bar.order < 1:
        raise OrderError("curvature needs Gibbs jets of order >= 1")
    kappa = phi_bar[0] * _pair_term(phi, 0)
    kappa_hat = phi_bar[0] * (hat(phi[1]) + lie_bracket(hat(phi[0]), hat(phi[1])))
    return kappa, kappa_hat


def curvature_derivatives(phi: VectorJet, phi_bar: ScalarJet, order: int) -> CurvatureJet:
    if order > MAX_DERIVATIVE_ORDER:
        raise OrderError(f"derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")
    if phi.order < order + 1 or phi_bar.order < order + 1:
        raise OrderError(
            f"order {order} curvature needs Gibbs jets of order {order + 1}, "
            f"got {phi.order} and {phi_bar.order}"
        )
    rows = np.zeros((order + 1, 3))
    for n in range(order + 1):
        for i in range(n + 1):
            rows[n] += binom(n, i) * phi_bar[i] * _pair_term(phi, n - i)
    return CurvatureJet(rows)


def rotation_from_gibbs(phi, phi_bar: float) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    mismatch = abs(phi_bar * (float(phi @ phi) + 1.0) - 2.0)
    if mismatch > GIBBS_PAIR_TOL:
        raise InconsistentGibbsPair(f"phi_bar * (|phi|^2 + 1) differs from 2 by {mismatch:.3e}")
    # rebuilt from phi alone: the pair identity then holds to rounding and Q stays orthogonal near pi
    scale = 2.0 / (float(phi @ phi) + 1.0)
    skew = hat(phi)
    return validate_rotation(IDENTITY + scale * skew + scale * (skew @ skew))


def rotation_derivatives(rotation, kappa: CurvatureJet, order: int) -> RotationJet:
    if order >= 1 and kappa.order < order - 1:
        raise OrderError(f"order {order} rotation jet needs curvature of order {order - 1}")
    rows = [validate_rotation(rotation)]
    hats = [hat(kappa[i]) for i in range(min(order, kappa.order + 1))]
    for n in range(1, order + 1):
        total = np.zeros((3, 3))
        for i in range(n):
            total += binom(n - 1, i) * hats[i] @ rows[n - 1 - i]
        rows.append(total)
    return RotationJet(np.array(rows))


def director_derivatives(rotation_jet: RotationJet, m: int) -> VectorJet:
    """Derivatives of the director d_m = Q E_m, m in 1..3 (column m of each rotation row)."""
    if m not in (1, 2, 3):
        raise IndexError(f"director index must be 1, 2 or 3, got {m}")
    return VectorJet(rotation_jet.rows[:, :, m - 1])


def evaluate_curvature(
    theta: VectorJet, order: int, fixed_axis: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, CurvatureJet]:
    """Rotation and curvature jet of a rotation-vector field given as a jet of order ``order + 1``."""
    if theta.order < order + 1:
        raise OrderError(f"order {order} curvature needs a rotation-vector jet of order {order + 1}")
    phi, phi_bar = gibbs_jets(theta.truncate(order + 1), fixed_axis)
    rotation = rotation_from_gibbs(phi[0], phi_bar[0])
    return rotation, curvature_derivatives(phi, phi_bar, order)
