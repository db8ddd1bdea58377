"""Eulerian update of a rotation field and its curvature jet.

An incremental rotation field ``delta_alpha`` composed on the left, ``Q_f = exp(delta_alpha) Q_i``,
gives ``kappa_f = kappa_plus + T_{Q_plus}[kappa_i]``. Derivatives of the transport term are
tabulated by ``transport_derivatives`` so the composed rotation vector is never formed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from common.errors import OrderError
from common.jets import VectorJet, binom
from common.so3 import check_skew, hat, unhat, validate_rotation

from .curvature import CurvatureJet, evaluate_curvature

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportTable:
    """Ragged table of ``d^n T_Q[d^(k-1) A]`` for ``n + k <= order + 1``, ``k >= 1``."""

    order: int
    entries: Dict[Tuple[int, int], np.ndarray]

    def __getitem__(self, key: Tuple[int, int]) -> np.ndarray:
        n, k = key
        if key not in self.entries:
            raise IndexError(f"transport entry ({n}, {k}) outside n + k <= {self.order + 1}")
        return self.entries[key]

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def occupancy(self) -> Dict[int, Tuple[int, ...]]:
        """k values filled in each row n."""
        rows: Dict[int, Tuple[int, ...]] = {}
        for n, k in sorted(self.entries):
            rows[n] = rows.get(n, ()) + (k,)
        return rows


@dataclass(frozen=True)
class UpdateResult:
    rotation: np.ndarray
    kappa: CurvatureJet
    kappa_plus: CurvatureJet
    rotation_plus: np.ndarray
    table: TransportTable


def transport(rotation, skew) -> np.ndarray:
    """T_Q[A] = Q A Q^T."""
    q = np.asarray(rotation, dtype=float)
    return q @ check_skew(skew) @ q.T


def transport_derivatives(
    rotation_plus, kappa_plus: CurvatureJet, derivs: Sequence[np.ndarray], order: int
) -> TransportTable:
    """Fill ``E(n, k) = d^n T_{Q+}[d^(k-1) A]`` row by row in increasing ``n``.

    E(n, k) = T[d^(n+k-1) A] + sum_{k'=1}^{n} sum_{i=0}^{n-k'} C(n-k', i) [kappa_hat+^(i), E(n-k'-i, k+k'-1)]
    """
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    if len(derivs) < order + 1:
        raise OrderError(f"need {order + 1} derivatives of the transported skew, got {len(derivs)}")
    if order >= 1 and kappa_plus.order < order - 1:
        raise OrderError(f"need an incremental curvature jet of order {order - 1}, got {kappa_plus.order}")
    q = validate_rotation(rotation_plus)
    skews = [check_skew(a) for a in derivs[: order + 1]]
    k_hats = [hat(kappa_plus[i]) for i in range(order)]

    entries: Dict[Tuple[int, int], np.ndarray] = {}
    for n in range(order + 1):
        for k in range(1, order + 2 - n):
            value = q @ skews[n + k - 1] @ q.T
            for k_shift in range(1, n + 1):
                for i in range(n - k_shift + 1):
                    lower = entries[(n - k_shift - i, k + k_shift - 1)]
                    bracket = k_hats[i] @ lower - lower @ k_hats[i]
                    value = value + binom(n - k_shift, i) * bracket
            entries[(n, k)] = value
    return TransportTable(order=order, entries=entries)


def compose(rotation_plus, rotation_i) -> np.ndarray:
    return validate_rotation(np.asarray(rotation_plus, dtype=float) @ np.asarray(rotation_i, dtype=float))


def update_curvature(
    kappa_plus: CurvatureJet, rotation_plus, kappa_i: CurvatureJet, order: int
) -> Tuple[CurvatureJet, TransportTable]:
    """d^n kappa_f = d^n kappa_plus + unhat(d^n T_{Q+}[kappa_hat_i]) for n <= order."""
    if kappa_plus.order < order or kappa_i.order < order:
        raise OrderError(
            f"order {order} update needs curvature jets of order {order}, "
            f"got {kappa_plus.order} and {kappa_i.order}"
        )
    table = transport_derivatives(rotation_plus, kappa_plus, kappa_i.hats()[: order + 1], order)
    rows = np.array([kappa_plus[n] + unhat(table[(n, 1)]) for n in range(order + 1)])
    return CurvatureJet(rows), table


def update_field(
    theta_i: VectorJet,
    delta_alpha: VectorJet,
    order: int,
    axis_i: Optional[np.ndarray] = None,
    axis_plus: Optional[np.ndarray] = None,
) -> UpdateResult:
    """Curvature of ``exp(delta_alpha) exp(theta_i)`` from the two rotation-vector jets."""
    rotation_i, kappa_i = evaluate_curvature(theta_i, order, axis_i)
    rotation_plus, kappa_plus = evaluate_curvature(delta_alpha, order, axis_plus)
    kappa_f, table = update_curvature(kappa_plus, rotation_plus, kappa_i, order)
    logger.debug("updated curvature to order %d with %d transport entries", order, len(table))
    return UpdateResult(
        rotation=compose(rotation_plus, rotation_i),
        kappa=kappa_f,
        kappa_plus=kappa_plus,
        rotation_plus=rotation_plus,
        table=table,
    )
