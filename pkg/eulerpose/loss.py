"""
Loss module for EulerPose.

This module provides the weighted Euler-angle pose loss

    Loss = w1 · ‖X̂ - X‖₂ + w2 · ‖Φ̂ - Φ‖₂

together with its analytic gradient, and the quaternion baseline loss
‖X̂ - X‖₂ + β · ‖q̂ - q/‖q‖‖₂ used for comparison experiments.

Hatted symbols are labels. Angles are stored in radians and converted to the
configured unit (degrees by default) only when the loss is evaluated, so that
w1 = w2 = 1 weighs one meter against one degree.
"""

import math
from typing import Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import DomainError
from .rotations import EulerAngles, Quaternion, euler_to_quat, quat_to_euler, wrap_angles

AngleUnit = Literal["deg", "rad"]

# Residual norms below this are treated as zero (subgradient 0 at the kink).
ZERO_RESIDUAL = 1e-12


class Pose(BaseModel):
    """Camera pose: translation in meters plus a wrapped Euler orientation."""
    model_config = ConfigDict(frozen=True)

    translation: Tuple[float, float, float] = Field(..., description="Translation X = [x, y, z] in meters")
    orientation: EulerAngles = Field(..., description="Orientation Φ = [ψ, θ, φ] in radians")

    @field_validator("translation")
    @classmethod
    def _check_translation(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if not all(math.isfinite(v) for v in value):
            raise ValueError(f"translation must be finite, got {value!r}")
        return value

    @classmethod
    def identity(cls) -> "Pose":
        return cls(translation=(0.0, 0.0, 0.0), orientation=EulerAngles.zero())

    @classmethod
    def from_arrays(cls, translation: Sequence[float], orientation: Sequence[float]) -> "Pose":
        return cls(
            translation=tuple(float(v) for v in translation),
            orientation=EulerAngles.from_array(orientation),
        )

    @classmethod
    def from_quaternion(cls, translation: Sequence[float], q: Quaternion) -> "Pose":
        return cls(translation=tuple(float(v) for v in translation), orientation=quat_to_euler(q))

    @property
    def quaternion(self) -> Quaternion:
        return euler_to_quat(self.orientation)

    def translation_array(self) -> np.ndarray:
        return np.array(self.translation, dtype=float)


class LossConfig(BaseModel):
    """Weights and angle unit of the Euler pose loss."""
    w1: float = Field(1.0, gt=0, description="Weight per meter of translation error")
    w2: float = Field(1.0, gt=0, description="Weight per angle unit of orientation error")
    angle_unit: AngleUnit = Field("deg", description="Unit the orientation residual is expressed in")
    wrap_residual: bool = Field(False, description="Wrap the angle difference to (-π, π] before taking its norm")

    @property
    def angle_scale(self) -> float:
        """Factor converting radians to the configured unit."""
        return 180.0 / math.pi if self.angle_unit == "deg" else 1.0


class LossGrad(BaseModel):
    """Gradient of the Euler loss with respect to the predicted pose."""
    d_translation: Tuple[float, float, float] = Field(..., description="∂Loss/∂X, per meter")
    d_orientation: Tuple[float, float, float] = Field(..., description="∂Loss/∂Φ, per configured angle unit")
    angle_unit: AngleUnit = Field("deg", description="Unit d_orientation is expressed in")

    def orientation_radians(self) -> np.ndarray:
        """∂Loss/∂Φ with Φ measured in radians."""
        scale = 180.0 / math.pi if self.angle_unit == "deg" else 1.0
        return np.array(self.d_orientation) * scale


def orientation_residual(pred, label, wrap: bool = False) -> np.ndarray:
    """
    Componentwise difference of wrapped angles, in radians.

    The plain difference jumps by 2π when the two angles straddle ±π; pass
    ``wrap=True`` to take the shortest signed difference instead.
    """
    diff = np.asarray(pred, dtype=float) - np.asarray(label, dtype=float)
    return wrap_angles(diff) if wrap else diff


def _unit_direction(residual: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(residual, axis=-1, keepdims=True)
    safe = np.where(norms < ZERO_RESIDUAL, 1.0, norms)
    return np.where(norms < ZERO_RESIDUAL, 0.0, residual / safe)


def euler_loss(pred: Pose, label: Pose, cfg: LossConfig = LossConfig()) -> float:
    """
    Weighted Euler pose loss between a prediction and its label.

    Args:
        pred (Pose): Predicted pose (X, Φ).
        label (Pose): Labeled pose (X̂, Φ̂).
        cfg (LossConfig): Weights and angle unit.

    Returns:
        float: w1·‖X̂ - X‖₂ + w2·‖Φ̂ - Φ‖₂, with the angle residual in cfg.angle_unit.
    """
    dt = pred.translation_array() - label.translation_array()
    do = orientation_residual(pred.orientation.as_array(), label.orientation.as_array(), cfg.wrap_residual)
    return float(cfg.w1 * np.linalg.norm(dt) + cfg.w2 * np.linalg.norm(do * cfg.angle_scale))


def euler_loss_grad(pred: Pose, label: Pose, cfg: LossConfig = LossConfig()) -> LossGrad:
    """Analytic gradient of euler_loss with respect to the prediction."""
    dt = pred.translation_array() - label.translation_array()
    do = orientation_residual(pred.orientation.as_array(), label.orientation.as_array(), cfg.wrap_residual)
    g_t = cfg.w1 * _unit_direction(dt)
    g_o = cfg.w2 * _unit_direction(do * cfg.angle_scale)
    return LossGrad(
        d_translation=tuple(float(v) for v in g_t),
        d_orientation=tuple(float(v) for v in g_o),
        angle_unit=cfg.angle_unit,
    )


def euler_loss_batch(pred_t: np.ndarray, pred_e: np.ndarray, label_t: np.ndarray, label_e: np.ndarray,
                     cfg: LossConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row-wise Euler loss on (B, 3) arrays.

    Returns:
        Tuple of per-row losses (B,), ∂Loss/∂X (B, 3) and ∂Loss/∂Φ in radians (B, 3).
    """
    dt = pred_t - label_t
    do = orientation_residual(pred_e, label_e, cfg.wrap_residual) * cfg.angle_scale
    losses = cfg.w1 * np.linalg.norm(dt, axis=1) + cfg.w2 * np.linalg.norm(do, axis=1)
    g_t = cfg.w1 * _unit_direction(dt)
    g_e = cfg.w2 * cfg.angle_scale * _unit_direction(do)
    return losses, g_t, g_e


def _as_quat_array(q) -> np.ndarray:
    return q.as_array() if isinstance(q, Quaternion) else np.asarray(q, dtype=float)


def quat_baseline_loss(pred_t: Sequence[float], pred_q, label: Pose, beta: float) -> float:
    """
    PoseNet-style baseline: ‖X̂ - X‖₂ + β·‖q̂ - q/‖q‖‖₂.

    The predicted quaternion is normalized but its sign is kept, so a
    prediction of -q̂ is charged 2β even though it is the same rotation.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    q = _as_quat_array(pred_q)
    q_hat = label.quaternion.as_array()
    dt = np.asarray(pred_t, dtype=float) - label.translation_array()
    return float(np.linalg.norm(dt) + beta * np.linalg.norm(q_hat - q / np.linalg.norm(q)))


def quat_baseline_loss_grad(pred_t: Sequence[float], pred_q, label: Pose, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of quat_baseline_loss with respect to the translation and the unnormalized quaternion."""
    losses, g_t, g_q = quat_baseline_loss_batch(
        np.asarray(pred_t, dtype=float)[None, :],
        _as_quat_array(pred_q)[None, :],
        label.translation_array()[None, :],
        label.quaternion.as_array()[None, :],
        beta,
    )
    return g_t[0], g_q[0]


def quat_baseline_loss_batch(pred_t: np.ndarray, pred_q: np.ndarray, label_t: np.ndarray, label_q: np.ndarray,
                             beta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row-wise baseline loss on (B, 3) translations and (B, 4) quaternions.

    Returns:
        Tuple of per-row losses (B,), ∂Loss/∂X (B, 3) and ∂Loss/∂q (B, 4).
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    dt = pred_t - label_t
    q_norm = np.linalg.norm(pred_q, axis=1, keepdims=True)
    q_unit = pred_q / q_norm
    dq = q_unit - label_q
    losses = np.linalg.norm(dt, axis=1) + beta * np.linalg.norm(dq, axis=1)
    g_unit = beta * _unit_direction(dq)
    # chain rule through q / ‖q‖: J = (I - n nᵀ) / ‖q‖
    g_q = (g_unit - q_unit * np.sum(q_unit * g_unit, axis=1, keepdims=True)) / q_norm
    return losses, _unit_direction(dt), g_q
