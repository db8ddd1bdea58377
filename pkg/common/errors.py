"""Typed failures raised by the curvature calculus.

Every class derives from ``ValueError`` so callers that only care about bad input
can keep catching that.
"""
from __future__ import annotations


class CurvatureError(ValueError):
    """Root of all domain errors."""


class NotSkew(CurvatureError):
    pass


class InvalidRotation(CurvatureError):
    pass


class NearPiRotation(CurvatureError):
    pass


class TangentMapSingular(CurvatureError):
    pass


class JetDomain(CurvatureError):
    pass


class GimbalDomain(CurvatureError):
    """Rotation angle too close to pi: the Gibbs vector diverges."""


class SmallAngleAmbiguous(CurvatureError):
    """Angle near zero with a varying axis and no fixed axis to fall back on."""


class OrderError(CurvatureError):
    """Jet orders mismatch or are too low for the requested derivative."""


class InconsistentGibbsPair(CurvatureError):
    pass


class StencilError(CurvatureError):
    """Finite-difference stencil does not fit the admissible interval."""


class SampleFailure(CurvatureError):
    """A domain error raised while evaluating one sample point."""

    def __init__(self, xi: float, cause: CurvatureError):
        super().__init__(f"xi = {xi!r}: {type(cause).__name__}: {cause}")
        self.xi = xi
        self.cause = cause
