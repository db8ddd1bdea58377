from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings

from backend.services.curvature import CurvatureJet, evaluate_curvature
from backend.services.fields import RotationField
from backend.services.oracle import FdConfig, SampledField, fd_derivative, verify_update
from backend.services.updating import (
    compose,
    transport,
    transport_derivatives,
    update_curvature,
    update_field,
)
from common.errors import NotSkew, OrderError
from common.jets import ScalarJet, VectorJet
from common.so3 import exp_so3, hat, unhat, validate_rotation

from .strategies import rotation_vectors, theta_jets

ORDER = 3


def _taylor(rows, t: float) -> np.ndarray:
    return sum(np.asarray(row) * t**k / math.factorial(k) for k, row in enumerate(rows))


def test_transport_examples():
    skew = hat([0.3, -1.0, 0.2])
    np.testing.assert_array_equal(transport(np.eye(3), skew), skew)
    theta = np.array([0.4, 0.8, -0.2])
    np.testing.assert_allclose(transport(exp_so3(theta), hat(theta)), hat(theta), atol=1e-15)
    with pytest.raises(NotSkew):
        transport(np.eye(3), np.eye(3))


@seed(41)
@given(theta=rotation_vectors(), kappa=rotation_vectors(0.0, 3.0))
def test_transport_rotates_axial_vector(theta, kappa):
    rotation = exp_so3(theta)
    np.testing.assert_allclose(unhat(transport(rotation, hat(kappa))), rotation @ kappa, atol=1e-14)
    material = rotation.T @ kappa
    np.testing.assert_allclose(transport(rotation, hat(material)), hat(kappa), atol=1e-14)


def _table_inputs():
    rotation_plus = exp_so3([0.3, -0.5, 0.6])
    kappa_plus = CurvatureJet([[0.2, 0.1, -0.4], [0.5, -0.3, 0.1], [-0.2, 0.4, 0.3], [0.1, 0.1, 0.1]])
    derivs = [hat(row) for row in [[1.0, 0.0, 0.5], [0.0, -0.3, 0.2], [0.4, 0.4, 0.0], [0.1, 0.0, -0.2]]]
    return rotation_plus, kappa_plus, derivs


def test_transport_table_first_rows():
    rotation_plus, kappa_plus, derivs = _table_inputs()
    table = transport_derivatives(rotation_plus, kappa_plus, derivs, ORDER)
    for k in range(1, ORDER + 2):
        np.testing.assert_allclose(table[(0, k)], transport(rotation_plus, derivs[k - 1]), atol=1e-15)
    k_hat = hat(kappa_plus[0])
    base = transport(rotation_plus, derivs[0])
    expected = transport(rotation_plus, derivs[1]) + k_hat @ base - base @ k_hat
    np.testing.assert_allclose(table[(1, 1)], expected, atol=1e-15)


def test_transport_table_occupancy_and_skewness():
    rotation_plus, kappa_plus, derivs = _table_inputs()
    table = transport_derivatives(rotation_plus, kappa_plus, derivs, ORDER)
    assert table.occupancy() == {0: (1, 2, 3, 4), 1: (1, 2, 3), 2: (1, 2), 3: (1,)}
    assert len(table) == 10
    assert (2, 2) in table and (2, 3) not in table
    for entry in table.entries.values():
        np.testing.assert_allclose(entry + entry.T, np.zeros((3, 3)), atol=1e-12)
    with pytest.raises(IndexError):
        table[(3, 2)]


def test_transport_table_order_errors():
    rotation_plus, kappa_plus, derivs = _table_inputs()
    with pytest.raises(OrderError):
        transport_derivatives(rotation_plus, kappa_plus, derivs[:2], ORDER)
    with pytest.raises(OrderError):
        transport_derivatives(rotation_plus, CurvatureJet([[0.0, 0.0, 1.0]]), derivs, ORDER)
    with pytest.raises(ValueError):
        transport_derivatives(rotation_plus, kappa_plus, derivs, -1)


def test_transport_derivatives_match_finite_differences(increment_spec):
    field = RotationField(increment_spec)
    xi0 = 0.7
    _, kappa_plus = evaluate_curvature(field.jet(xi0, ORDER + 1), ORDER)
    a_rows = [[0.4, -0.2, 0.1], [0.3, 0.5, -0.6], [-0.8, 0.2, 0.4], [0.5, 0.0, 0.3]]
    table = transport_derivatives(exp_so3(field.value(xi0)), kappa_plus, [hat(row) for row in a_rows], ORDER)

    def transported(xi: float) -> np.ndarray:
        return transport(exp_so3(field.value(xi)), hat(_taylor(a_rows, xi - xi0)))

    sampled = SampledField(transported, xi0)
    for n in range(ORDER + 1):
        step = 1e-3 if n <= 2 else 1e-2
        oracle = fd_derivative(sampled, FdConfig(order=n, step=step, accuracy=4, richardson=1))
        error = np.linalg.norm(table[(n, 1)] - oracle) / (1.0 + np.linalg.norm(oracle))
        assert error < 1e-5


@seed(42)
@settings(max_examples=50, deadline=None)
@given(theta=theta_jets(order=ORDER + 1))
def test_zero_increment_is_exact_identity(theta):
    rotation_i, kappa_i = evaluate_curvature(theta, ORDER)
    result = update_field(theta, VectorJet.zeros(ORDER + 1), ORDER)
    np.testing.assert_array_equal(result.rotation_plus, np.eye(3))
    np.testing.assert_array_equal(result.kappa_plus.rows, np.zeros((ORDER + 1, 3)))
    np.testing.assert_array_equal(result.kappa.rows, kappa_i.rows)
    np.testing.assert_array_equal(result.rotation, rotation_i)


@seed(43)
@settings(max_examples=50, deadline=None)
@given(delta=theta_jets(order=ORDER + 1))
def test_identity_initial_field_gives_increment_curvature(delta):
    result = update_field(VectorJet.zeros(ORDER + 1), delta, ORDER)
    np.testing.assert_array_equal(result.kappa.rows, result.kappa_plus.rows)
    np.testing.assert_array_equal(result.rotation, result.rotation_plus)


def test_shared_axis_curvatures_add():
    axis = np.array([2.0, -1.0, 2.0]) / 3.0
    f = ScalarJet([0.4, 0.8, -0.3, 0.5, 0.2])
    g = ScalarJet([-0.2, 0.3, 0.6, -0.4, 1.0])
    result = update_field(
        VectorJet(np.outer(f.coeffs, axis)),
        VectorJet(np.outer(g.coeffs, axis)),
        ORDER,
        axis_i=axis,
        axis_plus=axis,
    )
    total = f + g
    np.testing.assert_allclose(result.kappa.rows, np.outer(total.coeffs[1:], axis), atol=1e-10)
    np.testing.assert_allclose(result.rotation, exp_so3(total[0] * axis), atol=1e-14)


def test_update_curvature_order_mismatch():
    kappa = CurvatureJet(np.zeros((2, 3)))
    with pytest.raises(OrderError):
        update_curvature(kappa, np.eye(3), CurvatureJet(np.zeros((3, 3))), 2)
    with pytest.raises(OrderError):
        update_curvature(CurvatureJet(np.zeros((3, 3))), np.eye(3), kappa, 2)


def test_compose_examples():
    rotation = exp_so3([0.1, -0.6, 0.9])
    np.testing.assert_array_equal(compose(np.eye(3), rotation), rotation)
    e = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(compose(exp_so3(0.4 * e), exp_so3(1.1 * e)), exp_so3(1.5 * e), atol=1e-14)


@seed(44)
@given(first=rotation_vectors(), second=rotation_vectors())
def test_compose_stays_orthogonal(first, second):
    product = compose(exp_so3(first), exp_so3(second))
    validate_rotation(product)
    assert abs(np.linalg.det(product) - 1.0) < 1e-12
    np.testing.assert_allclose(product.T @ product, np.eye(3), atol=1e-12)


def test_update_matches_composed_field_oracle(trig_spec, increment_spec):
    for xi0 in (0.5, 1.0, 2.0):
        report = verify_update(trig_spec, increment_spec, xi0, ORDER)
        assert report.status == "pass", [row for row in report.rows if not row.passed]
        assert [row.quantity for row in report.rows] == ["Q_f"] + [f"kappa_f[{n}]" for n in range(ORDER + 1)]
