"""SO(3) and so(3) primitives: hat map, Lie bracket, exponential/logarithm, tangent maps."""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from .errors import InvalidRotation, NearPiRotation, NotSkew, TangentMapSingular

SMALL_ANGLE = 1e-4
SKEW_TOL = 1e-12
ROTATION_TOL = 1e-12
LOG_PI_MARGIN = 1e-6
TANGENT_POLE_MARGIN = 1e-3

IDENTITY = np.eye(3)
IDENTITY.setflags(write=False)


def hat(v) -> np.ndarray:
    x, y, z = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -z, y],
            [z, 0.0, -x],
            [-y, x, 0.0],
        ]
    )


def check_skew(matrix) -> np.ndarray:
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != (3, 3):
        raise NotSkew(f"expected a 3x3 matrix, got shape {mat.shape}")
    asymmetry = float(np.max(np.abs(mat + mat.T)))
    if asymmetry > SKEW_TOL * max(1.0, float(np.max(np.abs(mat)))):
        raise NotSkew(f"matrix is not skew-symmetric (|M + M^T| = {asymmetry:.3e})")
    return mat


def unhat(matrix) -> np.ndarray:
    mat = check_skew(matrix)
    return np.array([mat[2, 1], mat[0, 2], mat[1, 0]])


def lie_bracket(a, b) -> np.ndarray:
    left = check_skew(a)
    right = check_skew(b)
    return left @ right - right @ left


def validate_rotation(matrix) -> np.ndarray:
    """Return ``matrix`` as an array if it is proper orthogonal, else raise ``InvalidRotation``."""
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != (3, 3):
        raise InvalidRotation(f"expected a 3x3 matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidRotation("rotation contains non-finite entries")
    drift = float(np.linalg.norm(mat.T @ mat - IDENTITY))
    if drift > ROTATION_TOL:
        raise InvalidRotation(f"|Q^T Q - I| = {drift:.3e} exceeds {ROTATION_TOL:.0e}")
    det = float(np.linalg.det(mat))
    if abs(det - 1.0) > ROTATION_TOL:
        raise InvalidRotation(f"det Q = {det!r} is not 1")
    return mat


def rodrigues_coefficients(angle: float) -> Tuple[float, float, float]:
    """sin(t)/t, (1 - cos t)/t^2 and (t - sin t)/t^3, switching to series below ``SMALL_ANGLE``."""
    if angle < SMALL_ANGLE:
        sq = angle * angle
        return (
            1.0 - sq / 6.0 + sq * sq / 120.0,
            0.5 - sq / 24.0 + sq * sq / 720.0,
            1.0 / 6.0 - sq / 120.0 + sq * sq / 5040.0,
        )
    sin_t = math.sin(angle)
    cos_t = math.cos(angle)
    return (
        sin_t / angle,
        (1.0 - cos_t) / angle**2,
        (angle - sin_t) / angle**3,
    )


def exp_so3(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    angle = float(np.linalg.norm(theta))
    a, b, _ = rodrigues_coefficients(angle)
    skew = hat(theta)
    return IDENTITY + a * skew + b * (skew @ skew)


def _rotation_angle(rotation: np.ndarray) -> float:
    cosine = (float(np.trace(rotation)) - 1.0) / 2.0
    angle = math.acos(min(1.0, max(-1.0, cosine)))
    if angle > math.pi - LOG_PI_MARGIN:
        raise NearPiRotation(f"rotation angle {angle!r} is within {LOG_PI_MARGIN:.0e} of pi")
    return angle


def log_so3(rotation) -> np.ndarray:
    mat = validate_rotation(rotation)
    angle = _rotation_angle(mat)
    if angle < SMALL_ANGLE:
        factor = 0.5 + angle * angle / 12.0
    else:
        factor = angle / (2.0 * math.sin(angle))
    return unhat(factor * (mat - mat.T))


def log_norm(rotation) -> float:
    # Tr(theta_hat^2) = -2 theta^2, hence the minus sign under the root.
    skew = hat(log_so3(rotation))
    return math.sqrt(max(0.0, -0.5 * float(np.trace(skew @ skew))))


def rotation_distance(first, second) -> float:
    """Angle of the relative rotation ``first^T second``; a metric on director triads."""
    return log_norm(np.asarray(first, dtype=float).T @ np.asarray(second, dtype=float))


def tangent_map(theta) -> np.ndarray:
    """T_theta with kappa = T_theta . d(theta)/dxi."""
    theta = np.asarray(theta, dtype=float)
    angle = float(np.linalg.norm(theta))
    a, b, c = rodrigues_coefficients(angle)
    return a * IDENTITY + b * hat(theta) + c * np.outer(theta, theta)


def tangent_map_inv(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    angle = float(np.linalg.norm(theta))
    if angle >= 2.0 * math.pi - TANGENT_POLE_MARGIN:
        raise TangentMapSingular(f"|theta| = {angle!r} is too close to 2*pi")
    if angle < SMALL_ANGLE:
        sq = angle * angle
        half_cot = 1.0 - sq / 12.0 - sq * sq / 720.0
        outer = 1.0 / 12.0 + sq / 720.0 + sq * sq / 30240.0
    else:
        half = 0.5 * angle
        half_cot = half * math.cos(half) / math.sin(half)
        outer = (1.0 - half_cot) / angle**2
    return half_cot * IDENTITY - 0.5 * hat(theta) + outer * np.outer(theta, theta)


def spatial_variation(theta, delta_theta) -> np.ndarray:
    """delta_alpha = T_theta . delta_theta."""
    return tangent_map(theta) @ np.asarray(delta_theta, dtype=float)


def total_variation(theta, delta_alpha) -> np.ndarray:
    """delta_theta = T_theta^-1 . delta_alpha."""
    return tangent_map_inv(theta) @ np.asarray(delta_alpha, dtype=float)


def material_variation(rotation, delta_alpha) -> np.ndarray:
    return np.asarray(rotation, dtype=float).T @ np.asarray(delta_alpha, dtype=float)


def skew_power(v, k: int) -> np.ndarray:
    """hat(v)^k from the odd/even power reduction instead of repeated products."""
    if k < 0:
        raise ValueError("power must be non-negative")
    if k == 0:
        return IDENTITY.copy()
    v = np.asarray(v, dtype=float)
    sq_norm = float(v @ v)
    skew = hat(v)
    n = (k + 1) // 2
    scale = (-1.0) ** (n - 1) * sq_norm ** (n - 1)
    if k % 2:
        return scale * skew
    return scale * (skew @ skew)


def curvature_tensor_trig(theta, dtheta) -> np.ndarray:
    """Spatial curvature tensor from a rotation vector and its first derivative (trigonometric form)."""
    theta = np.asarray(theta, dtype=float)
    dtheta = np.asarray(dtheta, dtype=float)
    a, b, c = rodrigues_coefficients(float(np.linalg.norm(theta)))
    theta_hat = hat(theta)
    dtheta_hat = hat(dtheta)
    bracket = theta_hat @ dtheta_hat - dtheta_hat @ theta_hat
    return a * dtheta_hat + b * bracket + float(theta @ dtheta) * c * theta_hat
