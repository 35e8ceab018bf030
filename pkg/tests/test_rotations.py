import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from eulerpose.errors import DomainError, InvalidRotationError
from eulerpose.rotations import (
    EulerAngles,
    Quaternion,
    euler_to_matrix,
    euler_to_quat,
    matrix_to_euler,
    matrix_to_quat,
    quat_conjugate,
    quat_from_axis_angle,
    quat_multiply,
    quat_normalize,
    quat_to_euler,
    quat_to_matrix,
    validate_rotation_matrix,
    wrap_angle,
    wrap_angles,
)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(7))


def scipy_quat(e: EulerAngles) -> np.ndarray:
    """Scalar-first quaternion of an intrinsic Z-Y-X rotation, canonical sign."""
    x, y, z, w = Rotation.from_euler("ZYX", [e.yaw, e.pitch, e.roll]).as_quat()
    q = np.array([w, x, y, z])
    return -q if q[0] < 0 else q


def same_rotation(a: Quaternion, b: Quaternion, atol: float = 1e-9) -> bool:
    pa, pb = a.as_array(), b.as_array()
    return np.allclose(pa, pb, atol=atol) or np.allclose(pa, -pb, atol=atol)


@pytest.mark.parametrize("angle, expected", [
    (0.0, 0.0),
    (math.pi, math.pi),
    (-math.pi, math.pi),
    (3 * math.pi / 2, -math.pi / 2),
    (-3 * math.pi / 2, math.pi / 2),
    (2 * math.pi, 0.0),
    (7.0, 7.0 - 2 * math.pi),
])
def test_wrap_angle_examples(angle, expected):
    """Test that angles are wrapped to (-π, π] with -π mapping to π."""
    assert wrap_angle(angle) == pytest.approx(expected, abs=1e-12)


def test_wrap_angle_rejects_non_finite():
    """Test that NaN and infinities cannot be wrapped."""
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(DomainError):
            wrap_angle(bad)


def test_wrap_angle_idempotent_and_periodic(rng):
    """Test that wrapping is idempotent and 2π-periodic."""
    for a in rng.uniform(-20.0, 20.0, 500):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert wrap_angle(w) == w
        assert wrap_angle(a + 2 * math.pi) == pytest.approx(w, abs=1e-12)


def test_wrap_angles_matches_scalar(rng):
    """Test that the array form agrees with the scalar form."""
    a = rng.uniform(-20.0, 20.0, 200)
    np.testing.assert_allclose(wrap_angles(a), [wrap_angle(v) for v in a], atol=1e-12)
    assert wrap_angles([-math.pi])[0] == math.pi


def test_euler_angles_are_wrapped_on_construction():
    """Test that EulerAngles stores wrapped components."""
    e = EulerAngles(yaw=3 * math.pi / 2, pitch=0.1, roll=-3 * math.pi)
    assert e.yaw == pytest.approx(-math.pi / 2)
    assert e.pitch == 0.1
    assert e.roll == pytest.approx(math.pi)


def test_quaternion_rejects_non_finite():
    """Test that quaternion components must be finite."""
    with pytest.raises(ValidationError):
        Quaternion(w=math.nan, x=0.0, y=0.0, z=0.0)


def test_euler_to_quat_identity_and_yaw():
    """Test known Euler to quaternion conversions."""
    np.testing.assert_allclose(euler_to_quat(EulerAngles.zero()).as_array(), [1.0, 0.0, 0.0, 0.0])
    q = euler_to_quat(EulerAngles(yaw=math.pi / 2, pitch=0.0, roll=0.0))
    np.testing.assert_allclose(q.as_array(), [math.cos(math.pi / 4), 0.0, 0.0, math.sin(math.pi / 4)], atol=1e-15)


def test_quat_to_euler_half_turn_about_z():
    """Test that the quaternion [0, 0, 0, 1] is a yaw of π."""
    e = quat_to_euler(Quaternion(w=0.0, x=0.0, y=0.0, z=1.0))
    assert e.yaw == math.pi
    assert e.pitch == 0.0
    assert e.roll == 0.0


def test_euler_to_quat_matches_scipy(rng):
    """Test the Z-Y-X convention against scipy's intrinsic rotations."""
    for angles in rng.uniform(-math.pi, math.pi, (200, 3)):
        e = EulerAngles.from_array(angles)
        np.testing.assert_allclose(euler_to_quat(e).as_array(), scipy_quat(e), atol=1e-12)
        expected = Rotation.from_euler("ZYX", angles).as_matrix()
        np.testing.assert_allclose(euler_to_matrix(e), expected, atol=1e-12)


def test_conversions_return_canonical_sign(rng):
    """Test that conversions return w >= 0."""
    for angles in rng.uniform(-math.pi, math.pi, (200, 3)):
        q = euler_to_quat(EulerAngles.from_array(angles))
        assert q.w >= 0.0
        assert q.norm() == pytest.approx(1.0, abs=1e-12)
        assert matrix_to_quat(quat_to_matrix(q)).w >= 0.0


def test_round_trips_away_from_gimbal_lock(rng):
    """Test quaternion -> Euler -> quaternion and quaternion -> matrix -> quaternion."""
    for angles in rng.uniform(-math.pi, math.pi, (500, 3)):
        angles[1] = rng.uniform(-math.pi / 2 + 0.01, math.pi / 2 - 0.01)
        q = euler_to_quat(EulerAngles.from_array(angles))
        assert same_rotation(euler_to_quat(quat_to_euler(q)), q)
        assert same_rotation(matrix_to_quat(quat_to_matrix(q)), q)
        np.testing.assert_allclose(quat_to_euler(q).as_array(), angles, atol=1e-9)


@pytest.mark.parametrize("pitch", [math.pi / 2, -math.pi / 2])
def test_gimbal_lock_sets_roll_to_zero(pitch):
    """Test that at gimbal lock roll is 0 and the same rotation is reproduced."""
    q = euler_to_quat(EulerAngles(yaw=0.3, pitch=pitch, roll=0.1))
    e = quat_to_euler(q)
    assert e.roll == 0.0
    assert e.pitch == pytest.approx(pitch)
    assert e.yaw == pytest.approx(0.2 if pitch > 0 else 0.4, abs=1e-7)
    assert same_rotation(euler_to_quat(e), q, atol=1e-7)


def test_matrix_to_quat_half_turns():
    """Test the Shepperd branches on 180° rotations about each axis."""
    np.testing.assert_allclose(matrix_to_quat(np.diag([1.0, -1.0, -1.0])).as_array(), [0, 1, 0, 0])
    np.testing.assert_allclose(matrix_to_quat(np.diag([-1.0, 1.0, -1.0])).as_array(), [0, 0, 1, 0])
    np.testing.assert_allclose(matrix_to_quat(np.diag([-1.0, -1.0, 1.0])).as_array(), [0, 0, 0, 1])


@pytest.mark.parametrize("matrix", [
    np.diag([1.0, 1.0, 1.01]),
    np.diag([1.0, 1.0, -1.0]),
    np.ones((3, 3)),
    np.eye(4),
])
def test_matrix_to_quat_rejects_invalid(matrix):
    """Test that non-rotations are rejected."""
    with pytest.raises(InvalidRotationError):
        matrix_to_quat(matrix)


def test_validate_rotation_matrix_accepts_small_noise():
    """Test that deviations within the tolerance are accepted."""
    R = np.eye(3)
    R[0, 1] = 1e-8
    assert validate_rotation_matrix(R).shape == (3, 3)


def test_matrix_to_euler_matches_scipy(rng):
    """Test matrix -> Euler against scipy."""
    for angles in rng.uniform(-math.pi, math.pi, (50, 3)):
        angles[1] *= 0.45
        R = Rotation.from_euler("ZYX", angles).as_matrix()
        np.testing.assert_allclose(matrix_to_euler(R).as_array(), angles, atol=1e-9)


def test_quat_multiply_with_conjugate_is_identity(rng):
    """Test that q ∘ conj(q) is the identity rotation."""
    for angles in rng.uniform(-math.pi, math.pi, (20, 3)):
        q = euler_to_quat(EulerAngles.from_array(angles))
        np.testing.assert_allclose(quat_multiply(q, quat_conjugate(q)).as_array(), [1, 0, 0, 0], atol=1e-12)


def test_quat_multiply_composes_like_matrices(rng):
    """Test that the Hamilton product matches matrix composition."""
    a = euler_to_quat(EulerAngles.from_array(rng.uniform(-1, 1, 3)))
    b = euler_to_quat(EulerAngles.from_array(rng.uniform(-1, 1, 3)))
    np.testing.assert_allclose(quat_to_matrix(quat_multiply(a, b)), quat_to_matrix(a) @ quat_to_matrix(b), atol=1e-12)


def test_quat_normalize_applies_canonical_sign():
    """Test unit scaling, the sign rule and folding of negative zeros."""
    q = quat_normalize(Quaternion(w=-2.0, x=0.0, y=0.0, z=0.0))
    np.testing.assert_array_equal(q.as_array(), [1.0, 0.0, 0.0, 0.0])
    assert math.copysign(1.0, q.x) == 1.0
    with pytest.raises(DomainError):
        quat_normalize(Quaternion(w=0.0, x=0.0, y=0.0, z=0.0))


def test_quat_from_axis_angle():
    """Test axis-angle construction."""
    q = quat_from_axis_angle([0.0, 0.0, 2.0], math.pi / 2)
    np.testing.assert_allclose(q.as_array(), euler_to_quat(EulerAngles(yaw=math.pi / 2, pitch=0, roll=0)).as_array())
    with pytest.raises(DomainError):
        quat_from_axis_angle([0.0, 0.0, 0.0], 1.0)


def test_quat_multiply_is_associative(rng):
    """Test (a ∘ b) ∘ c = a ∘ (b ∘ c)."""
    for _ in range(100):
        a, b, c = (euler_to_quat(EulerAngles.from_array(rng.uniform(-math.pi, math.pi, 3))) for _ in range(3))
        left = quat_multiply(quat_multiply(a, b), c)
        right = quat_multiply(a, quat_multiply(b, c))
        np.testing.assert_allclose(left.as_array(), right.as_array(), atol=1e-12)
