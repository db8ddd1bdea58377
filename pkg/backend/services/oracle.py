"""Independent checks for the closed forms.

Nothing here goes through the Gibbs jets or the transport table: curvature is sampled as
the axial vector of ``dQ Q^T`` with ``dQ`` from the chain rule on the Rodrigues formula, and
higher derivatives come from central finite differences with Richardson extrapolation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np

from common.errors import CurvatureError, StencilError
from common.jets import VectorJet, binom
from common.so3 import exp_so3, hat, rodrigues_coefficients, rotation_distance

from ..config import Settings
from ..models import CurveSpec, VerificationReport, VerificationRow
from .corotational import corot_curvature_derivatives, material_curvature_derivatives
from .curvature import CurvatureJet, evaluate_curvature, rotation_derivatives
from .fields import RotationField
from .updating import update_field

logger = logging.getLogger(__name__)

SERIES_ANGLE = 1e-2
MAX_EXPANSION_ORDER = 3


@dataclass(frozen=True)
class SampledField:
    sampler: Callable[[float], object]
    xi0: float
    half_width: float = math.inf


@dataclass(frozen=True)
class FdConfig:
    order: int
    step: float
    accuracy: int = 4
    richardson: int = 0

    def __post_init__(self) -> None:
        if self.order < 0:
            raise StencilError(f"derivative order must be non-negative, got {self.order}")
        if not self.step > 0.0:
            raise StencilError(f"step must be positive, got {self.step}")
        if self.accuracy not in (2, 4, 6):
            raise StencilError(f"stencil accuracy must be 2, 4 or 6, got {self.accuracy}")
        if self.richardson not in (0, 1, 2):
            raise StencilError(f"Richardson levels must be 0, 1 or 2, got {self.richardson}")

    @property
    def radius(self) -> int:
        return stencil_radius(self.order, self.accuracy)

    @property
    def reach(self) -> float:
        return self.radius * self.step


def stencil_radius(n: int, accuracy: int) -> int:
    if n == 0:
        return 0
    return (n + 1) // 2 - 1 + accuracy // 2


@lru_cache(maxsize=None)
def _fornberg(n: int, radius: int) -> tuple:
    nodes = np.arange(-radius, radius + 1, dtype=float)
    count = nodes.size
    c = np.zeros((count, n + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0]
    for i in range(1, count):
        mn = min(i, n)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return tuple(c[:, n])


def central_weights(n: int, accuracy: int) -> np.ndarray:
    """Weights on the integer offsets -r..r for the n-th derivative at unit spacing."""
    if accuracy not in (2, 4, 6):
        raise StencilError(f"stencil accuracy must be 2, 4 or 6, got {accuracy}")
    return np.array(_fornberg(n, stencil_radius(n, accuracy)))


def fd_derivative(field: SampledField, cfg: FdConfig):
    if cfg.reach > field.half_width:
        raise StencilError(
            f"stencil reach {cfg.reach:.3e} exceeds admissible half-width {field.half_width:.3e} "
            f"at xi = {field.xi0!r}"
        )
    if cfg.order == 0:
        return np.asarray(field.sampler(field.xi0), dtype=float)
    weights = central_weights(cfg.order, cfg.accuracy)
    offsets = np.arange(-cfg.radius, cfg.radius + 1)

    def estimate(step: float) -> np.ndarray:
        values = np.stack([np.asarray(field.sampler(field.xi0 + k * step), dtype=float) for k in offsets])
        return np.tensordot(weights, values, axes=1) / step**cfg.order

    tableau = [estimate(cfg.step / 2**level) for level in range(cfg.richardson + 1)]
    for level in range(1, cfg.richardson + 1):
        factor = 2.0 ** (cfg.accuracy + 2 * (level - 1))
        tableau = [(factor * tableau[i + 1] - tableau[i]) / (factor - 1.0) for i in range(len(tableau) - 1)]
    return tableau[0]


def default_fd_config(n: int, settings: Optional[Settings] = None) -> FdConfig:
    settings = settings or Settings()
    step = settings.fd_step_low if n <= 2 else settings.fd_step_high
    return FdConfig(order=n, step=step, accuracy=settings.fd_accuracy, richardson=settings.fd_richardson)


def _rodrigues_rates(angle: float):
    """d/dt of sin(t)/t and (1 - cos t)/t^2, each divided by t."""
    if angle < SERIES_ANGLE:
        sq = angle * angle
        return -1.0 / 3.0 + sq / 30.0 - sq * sq / 840.0, -1.0 / 12.0 + sq / 180.0 - sq * sq / 6720.0
    sin_t = math.sin(angle)
    cos_t = math.cos(angle)
    return (
        (angle * cos_t - sin_t) / angle**3,
        (angle * sin_t - 2.0 * (1.0 - cos_t)) / angle**4,
    )


def exp_so3_derivative(theta, dtheta) -> np.ndarray:
    """d/dxi exp(hat(theta(xi))) given theta and its rate."""
    theta = np.asarray(theta, dtype=float)
    dtheta = np.asarray(dtheta, dtype=float)
    angle = float(np.linalg.norm(theta))
    a, b, _ = rodrigues_coefficients(angle)
    alpha, beta = _rodrigues_rates(angle)
    t_hat = hat(theta)
    dt_hat = hat(dtheta)
    t_sq = t_hat @ t_hat
    radial = float(theta @ dtheta) * (alpha * t_hat + beta * t_sq)
    return radial + a * dt_hat + b * (dt_hat @ t_hat + t_hat @ dt_hat)


def _axial(matrix: np.ndarray) -> np.ndarray:
    skew = 0.5 * (matrix - matrix.T)
    return np.array([skew[2, 1], skew[0, 2], skew[1, 0]])


def rotation_sampler(field: RotationField) -> Callable[[float], np.ndarray]:
    return lambda xi: exp_so3(field.value(xi))


def curvature_sampler(field: RotationField) -> Callable[[float], np.ndarray]:
    def sample(xi: float) -> np.ndarray:
        theta = field.value(xi)
        return _axial(exp_so3_derivative(theta, field.rate(xi)) @ exp_so3(theta).T)

    return sample


def material_sampler(field: RotationField) -> Callable[[float], np.ndarray]:
    kappa = curvature_sampler(field)
    return lambda xi: exp_so3(field.value(xi)).T @ kappa(xi)


def composed_rotation_sampler(
    field_i: RotationField, field_plus: RotationField
) -> Callable[[float], np.ndarray]:
    return lambda xi: exp_so3(field_plus.value(xi)) @ exp_so3(field_i.value(xi))


def composed_curvature_sampler(
    field_i: RotationField, field_plus: RotationField
) -> Callable[[float], np.ndarray]:
    def sample(xi: float) -> np.ndarray:
        theta_i, theta_plus = field_i.value(xi), field_plus.value(xi)
        q_i, q_plus = exp_so3(theta_i), exp_so3(theta_plus)
        dq_f = exp_so3_derivative(theta_plus, field_plus.rate(xi)) @ q_i + q_plus @ exp_so3_derivative(
            theta_i, field_i.rate(xi)
        )
        return _axial(dq_f @ (q_plus @ q_i).T)

    return sample


def bracket_pair_expansion(a: VectorJet, m: int) -> np.ndarray:
    """d^m [a_hat, d a_hat] as the full Leibniz sum, without pairing terms."""
    total = np.zeros((3, 3))
    for j in range(m + 1):
        left, right = hat(a[j]), hat(a[m - j + 1])
        total += binom(m, j) * (left @ right - right @ left)
    return total


def corot_vector_expansion(v: VectorJet, kappa: CurvatureJet, n: int) -> np.ndarray:
    """(d - kappa x)^n v multiplied out by hand for n <= 3."""
    if n > MAX_EXPANSION_ORDER:
        raise ValueError(f"expanded operator form is only written out to order {MAX_EXPANSION_ORDER}")
    if n == 0:
        return np.array(v[0])
    k0 = hat(kappa[0])
    if n == 1:
        return v[1] - k0 @ v[0]
    k1 = hat(kappa[1])
    if n == 2:
        return v[2] + (k0 @ k0 - k1) @ v[0] - 2.0 * k0 @ v[1]
    k2 = hat(kappa[2])
    return (
        v[3]
        - 3.0 * k0 @ v[2]
        + 3.0 * (k0 @ k0 - k1) @ v[1]
        + (-k2 + k1 @ k0 + 2.0 * k0 @ k1 - k0 @ k0 @ k0) @ v[0]
    )


def _half_width(spec: CurveSpec, xi0: float) -> float:
    if spec.domain is None:
        return math.inf
    return min(xi0 - spec.domain[0], spec.domain[1] - xi0)


def _compare(quantity: str, order: int, closed, oracle, tolerance: float) -> VerificationRow:
    closed = np.asarray(closed, dtype=float).reshape(-1)
    oracle = np.asarray(oracle, dtype=float).reshape(-1)
    abs_error = float(np.linalg.norm(closed - oracle))
    mixed = abs_error / (1.0 + float(np.linalg.norm(oracle)))
    return VerificationRow(
        quantity=quantity,
        order=order,
        closed_form=closed.tolist(),
        oracle=oracle.tolist(),
        abs_error=abs_error,
        mixed_error=mixed,
        tolerance=tolerance,
        passed=bool(mixed <= tolerance),
    )


def _rotation_row(quantity: str, closed: np.ndarray, oracle: np.ndarray, tolerance: float) -> VerificationRow:
    distance = rotation_distance(closed, oracle)
    return VerificationRow(
        quantity=quantity,
        order=0,
        closed_form=np.asarray(closed).reshape(-1).tolist(),
        oracle=np.asarray(oracle).reshape(-1).tolist(),
        abs_error=distance,
        mixed_error=distance,
        tolerance=tolerance,
        passed=bool(distance <= tolerance),
    )


def _error_row(exc: Exception, quantity: Optional[str] = None, order: int = 0) -> VerificationRow:
    return VerificationRow(
        quantity=quantity or type(exc).__name__,
        order=order,
        passed=False,
        message=f"{type(exc).__name__}: {exc}",
    )


def _report(xi0: float, rows: List[VerificationRow]) -> VerificationReport:
    status = "pass" if rows and all(row.passed for row in rows) else "fail"
    return VerificationReport(xi=xi0, status=status, rows=rows)


def _fd_row(quantity: str, n: int, closed, sampled: SampledField, settings: Settings) -> VerificationRow:
    try:
        oracle = fd_derivative(sampled, default_fd_config(n, settings))
    except CurvatureError as exc:
        return _error_row(exc, quantity, n)
    return _compare(quantity, n, closed, oracle, settings.tolerance(n))


def verify_curvature(
    spec: CurveSpec, xi0: float, order: int, settings: Optional[Settings] = None
) -> VerificationReport:
    settings = settings or Settings()
    field = RotationField(spec)
    try:
        field.check_point(xi0)
        rotation, kappa = evaluate_curvature(field.jet(xi0, order + 1), order, field.fixed_axis)
        rotation_jet = rotation_derivatives(rotation, kappa, order)
        material = material_curvature_derivatives(rotation_jet, kappa, order)
        corot = corot_curvature_derivatives(rotation_jet, material, order, kappa) if order >= 1 else None
    except CurvatureError as exc:
        logger.warning("closed form failed at xi = %r: %s", xi0, exc)
        return _report(xi0, [_error_row(exc)])

    width = _half_width(spec, xi0)
    rotations = SampledField(rotation_sampler(field), xi0, width)
    curvatures = SampledField(curvature_sampler(field), xi0, width)
    materials = SampledField(material_sampler(field), xi0, width)
    q_oracle = rotations.sampler(xi0)

    rows = [_rotation_row("Q", rotation, q_oracle, settings.tolerance(0))]
    for n in range(order + 1):
        rows.append(_fd_row(f"kappa[{n}]", n, kappa[n], curvatures, settings))
    for n in range(1, min(order, MAX_EXPANSION_ORDER) + 1):
        rows.append(_fd_row(f"dQ[{n}]", n, rotation_jet[n], rotations, settings))
    for n in range(order + 1):
        rows.append(_fd_row(f"kappa_bar[{n}]", n, material[n], materials, settings))
    for n in range(1, order + 1):
        try:
            material_rate = fd_derivative(materials, default_fd_config(n, settings))
        except CurvatureError as exc:
            rows.append(_error_row(exc, f"kappa_tilde[{n}]", n))
            continue
        rows.append(
            _compare(f"kappa_tilde[{n}]", n, corot[n], q_oracle @ material_rate, settings.tolerance(n))
        )

    report = _report(xi0, rows)
    logger.debug("verified %d rows at xi = %r: %s", len(rows), xi0, report.status)
    return report


def verify_update(
    spec_i: CurveSpec,
    spec_plus: CurveSpec,
    xi0: float,
    order: int,
    settings: Optional[Settings] = None,
) -> VerificationReport:
    settings = settings or Settings()
    field_i, field_plus = RotationField(spec_i), RotationField(spec_plus)
    try:
        field_i.check_point(xi0)
        field_plus.check_point(xi0)
        result = update_field(
            field_i.jet(xi0, order + 1),
            field_plus.jet(xi0, order + 1),
            order,
            field_i.fixed_axis,
            field_plus.fixed_axis,
        )
    except CurvatureError as exc:
        logger.warning("update failed at xi = %r: %s", xi0, exc)
        return _report(xi0, [_error_row(exc)])

    width = min(_half_width(spec_i, xi0), _half_width(spec_plus, xi0))
    rotations = composed_rotation_sampler(field_i, field_plus)
    curvatures = SampledField(composed_curvature_sampler(field_i, field_plus), xi0, width)

    rows = [_rotation_row("Q_f", result.rotation, rotations(xi0), settings.tolerance(0))]
    for n in range(order + 1):
        rows.append(_fd_row(f"kappa_f[{n}]", n, result.kappa[n], curvatures, settings))
    return _report(xi0, rows)


def update_errors(
    spec_i: CurveSpec, spec_plus: CurveSpec, xi0: float, rotation_f, kappa_f: CurvatureJet, settings: Settings
) -> tuple:
    """Distance of Q_f and mixed error of every kappa_f row against the composed-field oracle.

    A row whose stencil leaves either domain gets None.
    """
    field_i, field_plus = RotationField(spec_i), RotationField(spec_plus)
    width = min(_half_width(spec_i, xi0), _half_width(spec_plus, xi0))
    q_error = rotation_distance(rotation_f, composed_rotation_sampler(field_i, field_plus)(xi0))
    curvatures = SampledField(composed_curvature_sampler(field_i, field_plus), xi0, width)
    errors = []
    for n in range(kappa_f.order + 1):
        try:
            estimate = fd_derivative(curvatures, default_fd_config(n, settings))
        except StencilError as exc:
            logger.warning("no oracle for kappa_f[%d] at xi = %r: %s", n, xi0, exc)
            errors.append(None)
            continue
        row = _compare("kappa_f", n, kappa_f[n], estimate, 0.0)
        errors.append(row.mixed_error)
    return q_error, errors
