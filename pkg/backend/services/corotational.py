"""Co-rotational derivatives and material curvature.

The co-rotational derivative differentiates the components of a spatial quantity in the
moving director frame. For a vector it is ``(d - kappa x)^n v``; the recurrence below
evaluates it from plain derivatives of ``v`` and ``kappa`` only.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from common.errors import OrderError
from common.jets import VectorJet, binom, jet_cross, leibniz
from common.so3 import check_skew, hat, unhat

from .curvature import CurvatureJet, RotationJet

logger = logging.getLogger(__name__)

Action = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MaterialCurvatureJet(VectorJet):
    """Material curvature kappa_bar = Q^T kappa and its xi-derivatives."""


@dataclass(frozen=True, eq=False)
class CorotationalJet:
    """Co-rotational derivatives of kappa for orders 1..N; ``jet[n]`` is order ``n``."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float).reshape(-1, 3)
        if rows.shape[0] == 0:
            raise OrderError("co-rotational jet needs at least order 1")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def order(self) -> int:
        return self.rows.shape[0]

    def __getitem__(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.order:
            raise IndexError(f"co-rotational order {n} outside 1..{self.order}")
        return self.rows[n - 1]

    def __len__(self) -> int:
        return self.rows.shape[0]


def _vector_action(kappa_row: np.ndarray, value: np.ndarray) -> np.ndarray:
    return np.cross(kappa_row, value)


def _tensor_action(kappa_row: np.ndarray, value: np.ndarray) -> np.ndarray:
    k_hat = hat(kappa_row)
    return k_hat @ value - value @ k_hat


def _corot_recurrence(
    derivs: Sequence[np.ndarray], kappa: CurvatureJet, n: int, action: Action
) -> np.ndarray:
    """Evaluate d^k d~^m of a quantity by memoized recurrence and return d~^n.

    d^k d~^m X = X[m + k] - sum_{i=1}^{m} sum_j C(i - 1 + k, j) kappa[j] * d^{i-1+k-j} d~^{m-i} X,
    where ``*`` is the infinitesimal rotation ``action``.
    """
    if n < 0:
        raise ValueError(f"derivative order must be non-negative, got {n}")
    if len(derivs) < n + 1:
        raise OrderError(f"order {n} co-rotational derivative needs {n + 1} derivatives, got {len(derivs)}")
    if n >= 1 and kappa.order < n - 1:
        raise OrderError(f"order {n} co-rotational derivative needs curvature of order {n - 1}")

    memo: Dict[Tuple[int, int], np.ndarray] = {}

    def corot(m: int, k: int) -> np.ndarray:
        key = (m, k)
        if key in memo:
            return memo[key]
        value = np.array(derivs[m + k], dtype=float)
        for i in range(1, m + 1):
            outer = i - 1 + k
            for j in range(outer + 1):
                value = value - binom(outer, j) * action(kappa[j], corot(m - i, outer - j))
        memo[key] = value
        return value

    return corot(n, 0)


def corot_vector(v: VectorJet, kappa: CurvatureJet, n: int) -> np.ndarray:
    return _corot_recurrence(v.rows, kappa, n, _vector_action)


def corot_skew(derivs: Sequence[np.ndarray], kappa: CurvatureJet, n: int) -> np.ndarray:
    skews = [check_skew(a) for a in derivs[: n + 1]]
    return _corot_recurrence(skews, kappa, n, _tensor_action)


def corot_tensor(derivs: Sequence[np.ndarray], kappa: CurvatureJet, n: int) -> np.ndarray:
    tensors = [np.asarray(b, dtype=float).reshape(3, 3) for b in derivs[: n + 1]]
    return _corot_recurrence(tensors, kappa, n, _tensor_action)


def corot_vector_operator(v: VectorJet, kappa: CurvatureJet, n: int) -> np.ndarray:
    """Apply ``(d - kappa x)`` ``n`` times on jets."""
    if v.order < n:
        raise OrderError(f"need a vector jet of order {n}, got {v.order}")
    if n >= 1 and kappa.order < n - 1:
        raise OrderError(f"need a curvature jet of order {n - 1}, got {kappa.order}")
    current = v.truncate(n)
    for _ in range(n):
        lower = current.order - 1
        current = current.derivative() - jet_cross(kappa.truncate(lower), current.truncate(lower))
    return np.array(current[0])


def corot_vector_translated(rotation_jet: RotationJet, v: VectorJet, n: int) -> np.ndarray:
    """Left translation Q . d^n (Q^T v)."""
    if rotation_jet.order < n or v.order < n:
        raise OrderError(f"need rotation and vector jets of order {n}")
    material = leibniz(rotation_jet.transposed()[: n + 1], v.rows[: n + 1], np.matmul)
    return rotation_jet.rotation @ material[n]


def material_vector_derivatives(rotation_jet: RotationJet, v: VectorJet, order: int) -> VectorJet:
    """d^n (Q^T v) for n <= order."""
    if rotation_jet.order < order or v.order < order:
        raise OrderError(f"need rotation and vector jets of order {order}")
    return VectorJet(leibniz(rotation_jet.transposed()[: order + 1], v.rows[: order + 1], np.matmul))


def material_curvature_derivatives(
    rotation_jet: RotationJet, kappa: CurvatureJet, order: int
) -> MaterialCurvatureJet:
    if rotation_jet.order < order or kappa.order < order:
        raise OrderError(
            f"order {order} material curvature needs jets of order {order}, "
            f"got rotation {rotation_jet.order} and curvature {kappa.order}"
        )
    return MaterialCurvatureJet(material_vector_derivatives(rotation_jet, kappa, order).rows)


def corot_curvature_derivatives(
    rotation_jet: RotationJet,
    material: MaterialCurvatureJet,
    order: int,
    kappa: Optional[CurvatureJet] = None,
) -> CorotationalJet:
    """Q . d^n kappa_bar for n = 1..order.

    The first row equals d kappa since kappa x kappa vanishes; when ``kappa`` is given that
    row is taken from it directly instead of from the rotated material row.
    """
    if order < 1:
        raise OrderError("co-rotational curvature starts at order 1")
    if material.order < order:
        raise OrderError(f"need a material curvature jet of order {order}, got {material.order}")
    rows = [rotation_jet.rotation @ material[n] for n in range(1, order + 1)]
    if kappa is not None:
        if kappa.order < 1:
            raise OrderError("curvature jet must reach order 1")
        rows[0] = np.array(kappa[1])
    return CorotationalJet(np.array(rows))


def corot_curvature_recurrence(kappa: CurvatureJet, order: int) -> CorotationalJet:
    """d~^n kappa for n = 1..order from the recurrence alone, without the rotation jet."""
    if order < 1:
        raise OrderError("co-rotational curvature starts at order 1")
    if kappa.order < order:
        raise OrderError(f"need a curvature jet of order {order}, got {kappa.order}")
    rows = [corot_vector(kappa, kappa, n) for n in range(1, order + 1)]
    logger.debug("co-rotational curvature recurrence evaluated to order %d", order)
    return CorotationalJet(np.array(rows))


def corot_skew_from_vector(v: VectorJet, kappa: CurvatureJet, n: int) -> np.ndarray:
    """Axial vector of the co-rotational derivative of ``hat(v)``."""
    return unhat(corot_skew([hat(row) for row in v.rows], kappa, n))
