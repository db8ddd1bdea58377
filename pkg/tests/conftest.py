from __future__ import annotations

import pytest

from backend.models import CurveSpec


@pytest.fixture
def trig_spec() -> CurveSpec:
    """theta = [0.3 sin xi, 0.2 xi, 0.1 xi^2]."""
    return CurveSpec(
        name="trig",
        kind="fourier3",
        coefficients=[[0.0, 0.0, 0.3], [0.0], [0.0]],
        trend=[[0.0], [0.0, 0.2], [0.0, 0.0, 0.1]],
        domain=(0.2, 3.0),
    )


@pytest.fixture
def poly_spec() -> CurveSpec:
    """theta = [0.3 xi, 0.2 xi^2, 0.1 xi^3]."""
    return CurveSpec(
        name="poly",
        kind="poly3",
        coefficients=[[0.0, 0.3], [0.0, 0.0, 0.2], [0.0, 0.0, 0.0, 0.1]],
    )


@pytest.fixture
def increment_spec() -> CurveSpec:
    return CurveSpec(
        name="increment",
        kind="poly3",
        coefficients=[[0.1, 0.05], [-0.2, 0.0, 0.1], [0.3, -0.1]],
    )


@pytest.fixture
def axis_spec() -> CurveSpec:
    """theta = (0.2 + xi + 0.5 xi^2 - 0.1 xi^3) e, e = [1, 2, 2]/3."""
    return CurveSpec(
        name="axis",
        kind="fixed-axis-poly",
        axis=[1.0, 2.0, 2.0],
        coefficients=[[0.2, 1.0, 0.5, -0.1]],
    )


@pytest.fixture
def zero_spec() -> CurveSpec:
    return CurveSpec(name="zero", kind="fixed-axis-poly", axis=[0.0, 0.0, 1.0], coefficients=[[0.0]])
