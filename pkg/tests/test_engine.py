from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from backend.config import Settings, load_settings
from backend.models import CurveSpec, JobConfig
from backend.services.engine import (
    CurvatureEngine,
    build_tables,
    eval_frame,
    render_csv,
    render_json,
    tables_frames,
    update_frame,
    verify_frame,
)
from backend.services.fields import RotationField
from backend.services.preset_store import PresetStore, load_spec
from common.errors import GimbalDomain, OrderError, SampleFailure
from common.so3 import exp_so3, tangent_map

PRESETS_DIR = Path(__file__).resolve().parent.parent / "knowledge" / "presets"


@pytest.fixture
def engine(tmp_path) -> CurvatureEngine:
    return CurvatureEngine(tmp_path / "settings.yaml", PresetStore(PRESETS_DIR))


def test_eval_linear_fixed_axis(engine):
    spec = CurveSpec(kind="fixed-axis-poly", axis=[0.0, 0.0, 1.0], coefficients=[[0.0, 1.0]])
    sample = engine.evaluate(spec, [0.5], 2).samples[0]
    np.testing.assert_allclose(np.reshape(sample.Q, (3, 3)), exp_so3([0.0, 0.0, 0.5]), atol=1e-14)
    np.testing.assert_allclose(sample.kappa, [[0, 0, 1], [0, 0, 0], [0, 0, 0]], atol=1e-14)
    np.testing.assert_allclose(sample.kappa_bar, [[0, 0, 1], [0, 0, 0], [0, 0, 0]], atol=1e-14)
    np.testing.assert_allclose(sample.kappa_tilde, np.zeros((2, 3)), atol=1e-14)


def test_eval_order_zero(engine, poly_spec):
    sample = engine.evaluate(poly_spec, [1.0], 0).samples[0]
    theta = np.array([0.3, 0.2, 0.1])
    expected = tangent_map(theta) @ np.array([0.3, 0.4, 0.3])
    np.testing.assert_allclose(sample.kappa[0], expected, atol=1e-14)
    np.testing.assert_allclose(np.reshape(sample.Q, (3, 3)), exp_so3(theta), atol=1e-14)
    np.testing.assert_allclose(sample.kappa_bar[0], exp_so3(theta).T @ expected, atol=1e-14)
    assert sample.kappa_tilde == []


def test_eval_wraps_domain_errors(engine):
    spec = CurveSpec(kind="poly3", coefficients=[[math.pi - 1e-4], [0.0, 0.1], [0.0]])
    with pytest.raises(SampleFailure) as info:
        engine.evaluate(spec, [0.0], 2)
    assert info.value.xi == 0.0
    assert isinstance(info.value.cause, GimbalDomain)
    assert "GimbalDomain" in str(info.value)


def test_eval_rejects_bad_order_and_points(engine, trig_spec):
    with pytest.raises(OrderError):
        engine.evaluate(trig_spec, [1.0], 9)
    with pytest.raises(ValueError):
        engine.evaluate(trig_spec, [5.0], 2)


def test_csv_and_json_carry_the_same_numbers(engine, trig_spec):
    output = engine.evaluate(trig_spec, [0.5, 1.25, 2.0], 3)
    frame = pd.read_csv(io.StringIO(render_csv(eval_frame(output))), float_precision="round_trip")
    payload = json.loads(render_json(output))
    assert list(frame.columns[:10]) == ["xi", "Q11", "Q12", "Q13", "Q21", "Q22", "Q23", "Q31", "Q32", "Q33"]
    assert "kappa_3_z" in frame.columns and "kappa_tilde_1_x" in frame.columns
    assert "kappa_tilde_0_x" not in frame.columns
    for index, sample in enumerate(payload["samples"]):
        assert frame.loc[index, "xi"] == sample["xi"]
        assert frame.loc[index, "Q23"] == sample["Q"][5]
        for n in range(4):
            for axis_index, axis in enumerate("xyz"):
                assert frame.loc[index, f"kappa_{n}_{axis}"] == sample["kappa"][n][axis_index]
                assert frame.loc[index, f"kappa_bar_{n}_{axis}"] == sample["kappa_bar"][n][axis_index]
        assert frame.loc[index, "kappa_tilde_3_y"] == sample["kappa_tilde"][2][1]


def test_output_is_deterministic(engine, trig_spec):
    first = engine.evaluate(trig_spec, [0.5, 1.0], 4)
    second = engine.evaluate(trig_spec, [0.5, 1.0], 4)
    assert render_csv(eval_frame(first)) == render_csv(eval_frame(second))
    assert render_json(first) == render_json(second)


def test_zero_increment_update_reproduces_eval(engine, trig_spec, zero_spec):
    points = [0.5, 1.5, 2.5]
    updated = engine.update(trig_spec, zero_spec, points, 3)
    evaluated = engine.evaluate(trig_spec, points, 3)
    for after, before in zip(updated.samples, evaluated.samples):
        assert after.Q == before.Q
        assert after.kappa == before.kappa
        assert after.errors is None


def test_update_with_oracle_errors(engine, trig_spec, increment_spec):
    output = engine.update(trig_spec, increment_spec, [0.8, 1.6], 3, verify=True)
    for sample in output.samples:
        assert sample.errors.Q < engine.settings.tolerance(0)
        assert len(sample.errors.kappa) == 4
        for n, error in enumerate(sample.errors.kappa):
            assert error < engine.settings.tolerance(n)
    frame = update_frame(output)
    assert list(frame.columns[-5:]) == ["err_Q"] + [f"err_kappa_f_{n}" for n in range(4)]
    assert "kappa_f_3_x" in frame.columns


def test_update_oracle_near_domain_edge_keeps_the_sample(engine, trig_spec, increment_spec):
    points = [0.2005, 1.0]
    output = engine.update(trig_spec, increment_spec, points, 3, verify=True)
    plain = engine.update(trig_spec, increment_spec, points, 3)
    assert [sample.kappa for sample in output.samples] == [sample.kappa for sample in plain.samples]
    edge, inner = output.samples
    assert edge.errors.kappa[0] < engine.settings.tolerance(0)
    assert edge.errors.kappa[1:] == [None, None, None]
    assert all(error is not None for error in inner.errors.kappa)
    assert update_frame(output).shape[0] == 2


def test_eval_close_to_half_turn(engine):
    spec = CurveSpec(kind="poly3", coefficients=[[1.81], [1.81], [1.81, 0.01]])
    theta = np.array([1.81, 1.81, 1.81])
    assert math.pi - float(np.linalg.norm(theta)) == pytest.approx(0.0066, abs=1e-4)
    sample = engine.evaluate(spec, [0.0], 3).samples[0]
    np.testing.assert_allclose(np.reshape(sample.Q, (3, 3)), exp_so3(theta), atol=1e-12)
    expected = tangent_map(theta) @ np.array([0.0, 0.0, 0.01])
    np.testing.assert_allclose(sample.kappa[0], expected, atol=1e-12)


def test_verify_with_and_without_increment(engine, trig_spec, increment_spec):
    plain = engine.verify(trig_spec, [1.0], 2)
    assert plain.passed and plain.increment is None
    composed = engine.verify(trig_spec, [1.0], 2, increment=increment_spec)
    assert composed.passed
    assert composed.reports[0].rows[0].quantity == "Q_f"
    frame = verify_frame(composed)
    assert list(frame.columns) == [
        "xi",
        "quantity",
        "order",
        "abs_error",
        "mixed_error",
        "tolerance",
        "passed",
        "message",
    ]
    assert frame["passed"].all()


def test_build_tables():
    tables = build_tables(6)
    assert tables.jmax == [0, 0, 1, 1, 2, 2, 3]
    assert tables.bcoef[4] == [1, 3, 2]
    assert tables.bcoef[0] == [1]
    assert tables.table2[6] == [3, 2, 2, 1, 1, 0, 0]
    listing, triangle = tables_frames(tables)
    assert list(listing.columns) == ["m", "jmax", "b_0", "b_1", "b_2", "b_3"]
    assert listing.loc[0, "b_1"] == "-"
    assert triangle.loc["n=2", "i=0"] == 1
    assert triangle.loc["n=2", "i=5"] == "-"


def test_settings_defaults_and_tolerances(tmp_path):
    settings = load_settings(tmp_path / "missing.yaml")
    assert settings == Settings()
    assert settings.tolerance(0) == 1e-8
    assert settings.tolerance(1) == pytest.approx(1e-7)
    assert settings.tolerance(4) == pytest.approx(1e-4)


def test_settings_override(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text("fd_accuracy: 6\nfd_richardson: 0\nsignificant_digits: 12\n", encoding="utf-8")
    settings = load_settings(path)
    assert (settings.fd_accuracy, settings.fd_richardson, settings.significant_digits) == (6, 0, 12)
    assert settings.max_order == 8


@pytest.mark.parametrize(
    "text",
    ["max_order: [1, 2\n", "- 1\n- 2\n", "fd_accuracy: 5\n", "max_order: 12\n", "fd_step_low: -1.0\n"],
)
def test_malformed_settings(tmp_path, text):
    path = tmp_path / "settings.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError, match="settings.yaml"):
        load_settings(path)


def test_engine_reload_picks_up_settings(tmp_path):
    path = tmp_path / "settings.yaml"
    engine = CurvatureEngine(path)
    assert engine.settings.max_order == 8
    path.write_text("max_order: 3\n", encoding="utf-8")
    engine.reload()
    assert engine.settings.max_order == 3


def test_resolve_spec_or_preset(engine, poly_spec, tmp_path):
    assert engine.resolve(poly_spec, None) is poly_spec
    assert engine.resolve(None, "poly3").name == "poly3"
    with pytest.raises(KeyError):
        engine.resolve(None, "helix")
    with pytest.raises(ValueError):
        engine.resolve(None, None)
    with pytest.raises(ValueError):
        CurvatureEngine(tmp_path / "settings.yaml").resolve(None, "poly3")


def test_preset_store_lists_shipped_presets():
    store = PresetStore(PRESETS_DIR)
    names = [preset["name"] for preset in store.list_presets()]
    assert names == ["fixed-axis-poly", "fourier3", "poly3"]
    assert store.get("fourier3").trend[2] == [0.0, 0.0, 0.1]
    assert store.get("fixed-axis-poly").axis == [0.0, 0.0, 1.0]


def test_preset_store_reload(tmp_path):
    store = PresetStore(tmp_path / "absent")
    assert store.list_presets() == []
    presets = tmp_path / "presets"
    presets.mkdir()
    store = PresetStore(presets)
    (presets / "notes.txt").write_text("ignored", encoding="utf-8")
    (presets / "line.yaml").write_text(
        "kind: fixed-axis-poly\naxis: [1, 0, 0]\ncoefficients: [[0.0, 1.0]]\n", encoding="utf-8"
    )
    assert store.list_presets() == []
    store.reload()
    assert [preset["name"] for preset in store.list_presets()] == ["line"]
    assert store.get("line").kind == "fixed-axis-poly"


def test_load_spec_rejects_lists(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text("[1, 2, 3]", encoding="utf-8")
    with pytest.raises(ValueError):
        load_spec(path)


def test_curve_spec_normalizes_axis():
    spec = CurveSpec(kind="fixed-axis-poly", axis=[0.0, 0.0, 2.0], coefficients=[[1.0]])
    assert spec.axis == [0.0, 0.0, 1.0]


@pytest.mark.parametrize(
    "payload",
    [
        {"kind": "fixed-axis-poly", "coefficients": [[1.0]]},
        {"kind": "fixed-axis-poly", "axis": [0.0, 0.0, 0.0], "coefficients": [[1.0]]},
        {"kind": "fixed-axis-poly", "axis": [0.0, 0.0, 1.0], "coefficients": [[1.0], [2.0]]},
        {"kind": "poly3", "axis": [0.0, 0.0, 1.0], "coefficients": [[1.0], [0.0], [0.0]]},
        {"kind": "poly3", "coefficients": [[1.0], [0.0]]},
        {"kind": "poly3", "coefficients": [[1.0], [], [0.0]]},
        {"kind": "fourier3", "coefficients": [[0.0, 1.0], [0.0], [0.0]]},
        {"kind": "poly3", "coefficients": [[1.0], [0.0], [0.0]], "trend": [[0.0], [0.0], [0.0]]},
        {"kind": "poly3", "coefficients": [[1.0], [0.0], [0.0]], "domain": [2.0, 1.0]},
        {"kind": "helix", "coefficients": [[1.0], [0.0], [0.0]]},
    ],
)
def test_curve_spec_validation(payload):
    with pytest.raises(ValidationError):
        CurveSpec(**payload)


def test_job_config_validation(trig_spec):
    with pytest.raises(ValidationError):
        JobConfig(command="eval", spec=trig_spec)
    with pytest.raises(ValidationError):
        JobConfig(command="update", spec=trig_spec, points=[1.0])
    with pytest.raises(ValidationError):
        JobConfig(command="verify", spec=trig_spec, points=[1.0], order=0)
    with pytest.raises(ValidationError):
        JobConfig(command="eval", spec=trig_spec, points=[1.0], order=9)
    assert JobConfig(command="tables").max_m == 6


def test_rotation_field_derivatives(poly_spec):
    jet = RotationField(poly_spec).jet(2.0, 3)
    np.testing.assert_allclose(
        jet.rows,
        [[0.6, 0.8, 0.8], [0.3, 0.8, 1.2], [0.0, 0.4, 1.2], [0.0, 0.0, 0.6]],
        atol=1e-15,
    )


def test_fourier_field_derivatives():
    spec = CurveSpec(
        kind="fourier3",
        frequency=2.0,
        coefficients=[[0.5, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0]],
        trend=[[0.0], [0.0], [0.0, 1.0]],
    )
    xi = 0.3
    rows = RotationField(spec).jet(xi, 2).rows
    c, s = math.cos(2 * xi), math.sin(2 * xi)
    np.testing.assert_allclose(rows[:, 0], [0.5 + c, -2 * s, -4 * c], atol=1e-14)
    np.testing.assert_allclose(rows[:, 1], [s, 2 * c, -4 * s], atol=1e-14)
    np.testing.assert_allclose(rows[:, 2], [xi, 1.0, 0.0], atol=1e-15)


def test_rotation_field_axis_and_domain(axis_spec, trig_spec):
    field = RotationField(axis_spec)
    np.testing.assert_allclose(field.fixed_axis, [1 / 3, 2 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(field.rate(0.0), field.fixed_axis, atol=1e-15)
    assert RotationField(trig_spec).fixed_axis is None
    with pytest.raises(ValueError):
        RotationField(trig_spec).check_point(0.1)
