"""
Metrics module for EulerPose.

This module provides the per-frame error metrics (translation error in meters,
quaternion angle error in degrees) and the median/mean aggregation used for
per-scene summaries.
"""

import math
from typing import Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .errors import DomainError
from .loss import Pose
from .rotations import Quaternion, quat_conjugate, quat_multiply


class ErrorRecord(BaseModel):
    """Errors of one test frame."""
    frame_id: str = Field(..., description="Frame identifier (relative image path)")
    translation_error: float = Field(..., ge=0, description="‖X̂ - X‖₂ in meters")
    angle_error: float = Field(..., ge=0, le=180, description="Angle error Δ in degrees")


class EvalSummary(BaseModel):
    """Median and mean errors of one scene."""
    scene: str = Field(..., description="Scene name")
    n_frames: int = Field(..., ge=1, description="Number of evaluated frames")
    median_t: float = Field(..., ge=0, description="Median translation error, meters")
    median_angle: float = Field(..., ge=0, description="Median angle error, degrees")
    mean_t: float = Field(..., ge=0, description="Mean translation error, meters")
    mean_angle: float = Field(..., ge=0, description="Mean angle error, degrees")

    def median_cell(self, decimals: int = 4) -> str:
        return format_cell(self.median_t, self.median_angle, decimals)

    def mean_cell(self, decimals: int = 4) -> str:
        return format_cell(self.mean_t, self.mean_angle, decimals)


def format_cell(meters: float, degrees: float, decimals: int = 4) -> str:
    """Render a translation/angle pair like ``0.5623m, 5.8011°``."""
    return f"{meters:.{decimals}f}m, {degrees:.{decimals}f}°"


def angle_error(q: Quaternion, q_hat: Quaternion) -> float:
    """
    Angle between two orientations, in degrees.

    The relative rotation is δq = conj(q) ∘ q̂ and Δ = 2·arccos(|δq_w|). The
    value is computed as 2·atan2(‖δq_xyz‖, |δq_w|), which is the same angle for
    a unit δq but keeps full precision near 0° and 180°.

    Args:
        q (Quaternion): Orientation (predicted).
        q_hat (Quaternion): Labeled orientation.

    Returns:
        float: Δ in [0, 180].
    """
    dq = quat_multiply(quat_conjugate(q), q_hat)
    vec = math.sqrt(dq.x * dq.x + dq.y * dq.y + dq.z * dq.z)
    return math.degrees(2.0 * math.atan2(vec, abs(dq.w)))


def translation_error(X: Sequence[float], X_hat: Sequence[float]) -> float:
    """Euclidean distance ‖X̂ - X‖₂ in meters."""
    return float(np.linalg.norm(np.asarray(X_hat, dtype=float) - np.asarray(X, dtype=float)))


def _checked(values: Iterable[float], what: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise DomainError(f"{what} of an empty list is undefined")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} requires finite values")
    return arr


def median(values: Iterable[float]) -> float:
    """Middle value; the average of the two middle values for even lengths."""
    return float(np.median(_checked(values, "median")))


def mean(values: Iterable[float]) -> float:
    return float(np.mean(_checked(values, "mean")))


def evaluate_pose(pred: Pose, label: Pose, frame_id: str) -> ErrorRecord:
    """Errors of one predicted pose against its label, via the quaternion view of both orientations."""
    return ErrorRecord(
        frame_id=frame_id,
        translation_error=translation_error(pred.translation, label.translation),
        angle_error=angle_error(pred.quaternion, label.quaternion),
    )


def summarize(records: List[ErrorRecord], scene: str) -> EvalSummary:
    """
    Aggregate per-frame errors into the median and mean of each column.

    Raises:
        DomainError: If ``records`` is empty.
    """
    if not records:
        raise DomainError(f"no error records to summarize for scene {scene!r}")
    t = [r.translation_error for r in records]
    a = [r.angle_error for r in records]
    return EvalSummary(
        scene=scene,
        n_frames=len(records),
        median_t=median(t),
        median_angle=median(a),
        mean_t=mean(t),
        mean_angle=mean(a),
    )
