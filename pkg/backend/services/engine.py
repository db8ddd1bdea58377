from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from common.errors import CurvatureError, OrderError, SampleFailure

from ..config import Settings, load_settings
from ..models import (
    CurveSpec,
    EvalOutput,
    SampleOutput,
    TablesOutput,
    UpdateErrors,
    UpdateOutput,
    UpdateSample,
    VerifyOutput,
)
from .corotational import corot_curvature_derivatives, material_curvature_derivatives
from .curvature import bcoef, evaluate_curvature, jmax, rotation_derivatives, table2
from .fields import RotationField
from .oracle import update_errors, verify_curvature, verify_update
from .preset_store import PresetStore
from .updating import update_field

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
Q_COLUMNS = [f"Q{i}{j}" for i in range(1, 4) for j in range(1, 4)]


def _rows(values: Iterable[np.ndarray]) -> List[List[float]]:
    return [np.asarray(row, dtype=float).tolist() for row in values]


class CurvatureEngine:
    def __init__(self, settings_path: Path, store: Optional[PresetStore] = None):
        self.settings_path = settings_path
        self.store = store
        self.settings = Settings()
        self.reload()

    def reload(self) -> None:
        self.settings = load_settings(self.settings_path)

    def resolve(self, spec: Optional[CurveSpec], preset: Optional[str]) -> CurveSpec:
        if spec is not None:
            return spec
        if preset is None:
            raise ValueError("either a spec or a preset name is required")
        if self.store is None:
            raise ValueError("no preset store configured")
        return self.store.get(preset)

    def _check_order(self, order: int) -> None:
        if not 0 <= order <= self.settings.max_order:
            raise OrderError(f"order {order} outside 0..{self.settings.max_order}")

    def evaluate_sample(self, field: RotationField, xi: float, order: int) -> SampleOutput:
        field.check_point(xi)
        try:
            rotation, kappa = evaluate_curvature(field.jet(xi, order + 1), order, field.fixed_axis)
            rotation_jet = rotation_derivatives(rotation, kappa, order)
            material = material_curvature_derivatives(rotation_jet, kappa, order)
            corot = corot_curvature_derivatives(rotation_jet, material, order, kappa) if order >= 1 else None
        except CurvatureError as exc:
            logger.warning("evaluation failed at xi = %r: %s", xi, exc)
            raise SampleFailure(xi, exc) from exc
        logger.debug("evaluated xi = %r to order %d", xi, order)
        return SampleOutput(
            xi=xi,
            Q=rotation.reshape(-1).tolist(),
            kappa=_rows(kappa.rows),
            kappa_bar=_rows(material.rows),
            kappa_tilde=_rows(corot.rows) if corot is not None else [],
        )

    def evaluate(self, spec: CurveSpec, points: Sequence[float], order: int) -> EvalOutput:
        self._check_order(order)
        field = RotationField(spec)
        samples = [self.evaluate_sample(field, float(xi), order) for xi in points]
        logger.info("evaluated %d points of %s to order %d", len(samples), spec.name or spec.kind, order)
        return EvalOutput(spec=spec, order=order, samples=samples)

    def update(
        self,
        spec: CurveSpec,
        increment: CurveSpec,
        points: Sequence[float],
        order: int,
        verify: bool = False,
    ) -> UpdateOutput:
        self._check_order(order)
        field_i, field_plus = RotationField(spec), RotationField(increment)
        samples: List[UpdateSample] = []
        for xi in map(float, points):
            field_i.check_point(xi)
            field_plus.check_point(xi)
            try:
                result = update_field(
                    field_i.jet(xi, order + 1),
                    field_plus.jet(xi, order + 1),
                    order,
                    field_i.fixed_axis,
                    field_plus.fixed_axis,
                )
                errors = None
                if verify:
                    q_error, kappa_errors = update_errors(
                        spec, increment, xi, result.rotation, result.kappa, self.settings
                    )
                    errors = UpdateErrors(Q=q_error, kappa=kappa_errors)
            except CurvatureError as exc:
                logger.warning("update failed at xi = %r: %s", xi, exc)
                raise SampleFailure(xi, exc) from exc
            samples.append(
                UpdateSample(
                    xi=xi,
                    Q=result.rotation.reshape(-1).tolist(),
                    kappa=_rows(result.kappa.rows),
                    errors=errors,
                )
            )
        logger.info("updated %d points to order %d", len(samples), order)
        return UpdateOutput(spec=spec, increment=increment, order=order, samples=samples)

    def verify(
        self,
        spec: CurveSpec,
        points: Sequence[float],
        order: int,
        increment: Optional[CurveSpec] = None,
    ) -> VerifyOutput:
        self._check_order(order)
        reports = []
        for xi in map(float, points):
            if increment is None:
                reports.append(verify_curvature(spec, xi, order, self.settings))
            else:
                reports.append(verify_update(spec, increment, xi, order, self.settings))
        output = VerifyOutput(spec=spec, increment=increment, order=order, reports=reports)
        logger.info("verified %d points: %s", len(reports), "pass" if output.passed else "fail")
        return output


def build_tables(max_m: int) -> TablesOutput:
    return TablesOutput(
        max_m=max_m,
        jmax=[jmax(m) for m in range(max_m + 1)],
        bcoef=[[bcoef(m, j) for j in range(jmax(m) + 1)] for m in range(max_m + 1)],
        table2=table2(max_m),
    )


def _vector_columns(prefix: str, orders: Iterable[int]) -> List[str]:
    return [f"{prefix}_{n}_{axis}" for n in orders for axis in AXES]


def eval_frame(output: EvalOutput) -> pd.DataFrame:
    order = output.order
    columns = (
        ["xi"]
        + Q_COLUMNS
        + _vector_columns("kappa", range(order + 1))
        + _vector_columns("kappa_bar", range(order + 1))
        + _vector_columns("kappa_tilde", range(1, order + 1))
    )
    records = []
    for sample in output.samples:
        flat = [sample.xi, *sample.Q]
        for block in (sample.kappa, sample.kappa_bar, sample.kappa_tilde):
            flat.extend(value for row in block for value in row)
        records.append(flat)
    return pd.DataFrame(records, columns=columns)


def update_frame(output: UpdateOutput) -> pd.DataFrame:
    order = output.order
    with_errors = any(sample.errors is not None for sample in output.samples)
    columns = ["xi"] + Q_COLUMNS + _vector_columns("kappa_f", range(order + 1))
    if with_errors:
        columns += ["err_Q"] + [f"err_kappa_f_{n}" for n in range(order + 1)]
    records = []
    for sample in output.samples:
        flat = [sample.xi, *sample.Q]
        flat.extend(value for row in sample.kappa for value in row)
        if with_errors:
            flat.append(sample.errors.Q)
            flat.extend(sample.errors.kappa)
        records.append(flat)
    return pd.DataFrame(records, columns=columns)


def verify_frame(output: VerifyOutput) -> pd.DataFrame:
    records = [
        {
            "xi": report.xi,
            "quantity": row.quantity,
            "order": row.order,
            "abs_error": row.abs_error,
            "mixed_error": row.mixed_error,
            "tolerance": row.tolerance,
            "passed": row.passed,
            "message": row.message or "",
        }
        for report in output.reports
        for row in report.rows
    ]
    return pd.DataFrame(
        records,
        columns=["xi", "quantity", "order", "abs_error", "mixed_error", "tolerance", "passed", "message"],
    )


def tables_frames(tables: TablesOutput) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """(m, jmax, bcoef row) listing and the (n, i)-indexed jmax triangle."""
    width = max(len(row) for row in tables.bcoef)
    listing = pd.DataFrame(
        [[m, tables.jmax[m], *row, *["-"] * (width - len(row))] for m, row in enumerate(tables.bcoef)],
        columns=["m", "jmax"] + [f"b_{j}" for j in range(width)],
    )
    triangle = pd.DataFrame(
        [[*row, *["-"] * (tables.max_m + 1 - len(row))] for row in tables.table2],
        columns=[f"i={i}" for i in range(tables.max_m + 1)],
        index=[f"n={n}" for n in range(tables.max_m + 1)],
    )
    return listing, triangle


def render_csv(frame: pd.DataFrame, digits: int = 17) -> str:
    return frame.to_csv(index=False, float_format=f"%.{digits}g", lineterminator="\n")


def render_json(output) -> str:
    return output.model_dump_json(indent=2) + "\n"
