"""
Rotations module for EulerPose.

This module provides exact conversions and algebra among Euler angles, unit
quaternions and rotation matrices.

Conventions:
    - Euler angles are (yaw ψ, pitch θ, roll φ) in radians, applied as the
      intrinsic sequence Z(ψ), then Y(θ), then X(φ): R = Rz(ψ) · Ry(θ) · Rx(φ).
    - Quaternions are scalar-first [w, x, y, z] with the Hamilton product.
    - Every angle leaving this module is wrapped to (-π, π].
    - Quaternions returned by a conversion carry the canonical sign w >= 0;
      quat_multiply keeps whatever sign the product has.
"""

import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import DomainError, InvalidRotationError

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# Validation tolerance for externally supplied rotations.
VALIDATION_TOL = 1e-6
# |sin θ| above this is treated as gimbal lock.
GIMBAL_LOCK_SIN = 1.0 - 1e-9


def wrap_angle(a: float) -> float:
    """
    Wrap an angle to the half-open interval (-π, π].

    Args:
        a (float): Angle in radians.

    Returns:
        float: The angle congruent to ``a`` modulo 2π that lies in (-π, π].

    Raises:
        DomainError: If ``a`` is NaN or infinite.
    """
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"cannot wrap non-finite angle {a!r}")
    r = math.remainder(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def _finite(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"component must be finite, got {value!r}")
    return value


class Quaternion(BaseModel):
    """Orientation as a quaternion [q_w, q_x, q_y, q_z]."""
    model_config = ConfigDict(frozen=True)

    w: float = Field(..., description="Scalar part q_w")
    x: float = Field(..., description="Vector part q_x")
    y: float = Field(..., description="Vector part q_y")
    z: float = Field(..., description="Vector part q_z")

    @field_validator("w", "x", "y", "z")
    @classmethod
    def _check_finite(cls, value: float) -> float:
        return _finite(value)

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(w=1.0, x=0.0, y=0.0, z=0.0)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Quaternion":
        w, x, y, z = (float(v) for v in values)
        return cls(w=w, x=x, y=y, z=z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(w=-self.w, x=-self.x, y=-self.y, z=-self.z)


class EulerAngles(BaseModel):
    """Yaw/pitch/roll triple Φ = [ψ, θ, φ] in radians, each wrapped to (-π, π]."""
    model_config = ConfigDict(frozen=True)

    yaw: float = Field(..., description="Rotation ψ about the z axis, radians")
    pitch: float = Field(..., description="Rotation θ about the intermediate y axis, radians")
    roll: float = Field(..., description="Rotation φ about the final x axis, radians")

    @field_validator("yaw", "pitch", "roll", mode="before")
    @classmethod
    def _wrap(cls, value: float) -> float:
        return wrap_angle(_finite(value))

    @classmethod
    def zero(cls) -> "EulerAngles":
        return cls(yaw=0.0, pitch=0.0, roll=0.0)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "EulerAngles":
        yaw, pitch, roll = (float(v) for v in values)
        return cls(yaw=yaw, pitch=pitch, roll=roll)

    @classmethod
    def from_degrees(cls, yaw: float, pitch: float, roll: float) -> "EulerAngles":
        return cls(yaw=math.radians(yaw), pitch=math.radians(pitch), roll=math.radians(roll))

    def as_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll], dtype=float)

    def as_degrees(self) -> np.ndarray:
        return np.degrees(self.as_array())


def quat_normalize(q: Quaternion) -> Quaternion:
    """Scale ``q`` to unit norm and apply the canonical sign w >= 0."""
    n = q.norm()
    if n == 0.0:
        raise DomainError("cannot normalize the zero quaternion")
    s = -1.0 / n if q.w < 0.0 else 1.0 / n
    # + 0.0 folds negative zeros so canonical outputs print cleanly
    return Quaternion(w=q.w * s + 0.0, x=q.x * s + 0.0, y=q.y * s + 0.0, z=q.z * s + 0.0)


def quat_conjugate(q: Quaternion) -> Quaternion:
    """Negate the vector part; for a unit quaternion this is the inverse rotation."""
    return Quaternion(w=q.w, x=-q.x, y=-q.y, z=-q.z)


def quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    """
    Hamilton product a ∘ b, renormalized.

    The canonical sign is deliberately not applied: the sign of the product is
    meaningful to callers that compose relative rotations.
    """
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return Quaternion(w=w / n, x=x / n, y=y / n, z=z / n)


def quat_from_axis_angle(axis: Sequence[float], angle: float) -> Quaternion:
    """Unit quaternion rotating by ``angle`` radians about ``axis``."""
    v = np.asarray(axis, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not math.isfinite(n):
        raise DomainError("rotation axis must be finite and non-zero")
    v = v / n
    s = math.sin(0.5 * angle)
    return quat_normalize(Quaternion(w=math.cos(0.5 * angle), x=v[0] * s, y=v[1] * s, z=v[2] * s))


def euler_to_quat(e: EulerAngles) -> Quaternion:
    """
    Convert Euler angles to a unit quaternion.

    Args:
        e (EulerAngles): Wrapped yaw/pitch/roll.

    Returns:
        Quaternion: q_z(ψ) ∘ q_y(θ) ∘ q_x(φ) with the canonical sign applied.
    """
    cy, sy = math.cos(0.5 * e.yaw), math.sin(0.5 * e.yaw)
    cp, sp = math.cos(0.5 * e.pitch), math.sin(0.5 * e.pitch)
    cr, sr = math.cos(0.5 * e.roll), math.sin(0.5 * e.roll)
    return quat_normalize(Quaternion(
        w=cy * cp * cr + sy * sp * sr,
        x=cy * cp * sr - sy * sp * cr,
        y=cy * sp * cr + sy * cp * sr,
        z=sy * cp * cr - cy * sp * sr,
    ))


def quat_to_euler(q: Quaternion) -> EulerAngles:
    """
    Convert a unit quaternion to wrapped Euler angles.

    At gimbal lock (|sin θ| > 1 - 1e-9) roll is fixed to 0 and the whole
    residual rotation about the vertical axis is reported as yaw.
    """
    n = q.norm()
    w, x, y, z = q.w / n, q.x / n, q.y / n, q.z / n
    sin_pitch = 2.0 * (w * y - z * x)
    if abs(sin_pitch) > GIMBAL_LOCK_SIN:
        return EulerAngles(
            yaw=wrap_angle(2.0 * math.atan2(z, w)),
            pitch=math.copysign(HALF_PI, sin_pitch),
            roll=0.0,
        )
    return EulerAngles(
        yaw=math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)),
        pitch=math.asin(sin_pitch),
        roll=math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)),
    )


def validate_rotation_matrix(R, tol: float = VALIDATION_TOL) -> np.ndarray:
    """
    Check that ``R`` is a proper rotation matrix.

    Args:
        R: 3×3 array-like, row-major.
        tol (float): Elementwise tolerance on RᵀR - I and on det R - 1.

    Returns:
        np.ndarray: ``R`` as a float array.

    Raises:
        InvalidRotationError: If ``R`` is not 3×3, not finite, not orthonormal
            or not right-handed within ``tol``.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidRotationError(f"rotation matrix must be 3x3, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidRotationError("rotation matrix has non-finite entries")
    ortho = float(np.max(np.abs(R.T @ R - np.eye(3))))
    if ortho > tol:
        raise InvalidRotationError(f"rotation block is not orthonormal (max |RᵀR - I| = {ortho:.3e})")
    det = float(np.linalg.det(R))
    if abs(det - 1.0) > tol:
        raise InvalidRotationError(f"rotation block has determinant {det:.9f}, expected +1")
    return R


def quat_to_matrix(q: Quaternion) -> np.ndarray:
    """Rotation matrix of a quaternion (normalized first)."""
    n = q.norm()
    w, x, y, z = q.w / n, q.x / n, q.y / n, q.z / n
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])


def matrix_to_quat(R) -> Quaternion:
    """
    Convert a rotation matrix to a unit quaternion.

    Uses Shepperd's method: the square root is taken of whichever of
    (trace, R00, R11, R22) is largest, which keeps the divisor away from zero.

    Raises:
        InvalidRotationError: If ``R`` fails orthonormality by more than 1e-6.
    """
    R = validate_rotation_matrix(R)
    trace = R[0, 0] + R[1, 1] + R[2, 2]
    pivot = int(np.argmax([trace, R[0, 0], R[1, 1], R[2, 2]]))
    if pivot == 0:
        s = 2.0 * math.sqrt(1.0 + trace)
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    elif pivot == 1:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif pivot == 2:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    return quat_normalize(Quaternion(w=w, x=x, y=y, z=z))


def euler_to_matrix(e: EulerAngles) -> np.ndarray:
    return quat_to_matrix(euler_to_quat(e))


def matrix_to_euler(R) -> EulerAngles:
    return quat_to_euler(matrix_to_quat(R))


def wrap_angles(a) -> np.ndarray:
    """Array form of wrap_angle, elementwise."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError("cannot wrap non-finite angles")
    r = a - TWO_PI * np.round(a / TWO_PI)
    r = np.where(r <= -math.pi, r + TWO_PI, r)
    return np.where(r > math.pi, r - TWO_PI, r)
