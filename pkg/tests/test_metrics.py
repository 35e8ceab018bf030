import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from eulerpose.errors import DomainError
from eulerpose.loss import Pose
from eulerpose.metrics import (
    ErrorRecord,
    angle_error,
    evaluate_pose,
    format_cell,
    mean,
    median,
    summarize,
    translation_error,
)
from eulerpose.rotations import EulerAngles, Quaternion, euler_to_quat, quat_from_axis_angle, quat_multiply


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(3))


def random_quat(rng) -> Quaternion:
    return euler_to_quat(EulerAngles.from_array(rng.uniform(-math.pi, math.pi, 3)))


def test_angle_error_of_identical_and_negated(rng):
    """Test that q and -q are at zero angle from q."""
    for _ in range(50):
        q = random_quat(rng)
        assert angle_error(q, q) == pytest.approx(0.0, abs=1e-9)
        assert angle_error(q, -q) == pytest.approx(0.0, abs=1e-9)


def test_angle_error_known_rotation(rng):
    """Test that a 10° relative rotation measures 10°."""
    for _ in range(50):
        q = random_quat(rng)
        q_hat = quat_multiply(q, quat_from_axis_angle(rng.standard_normal(3), math.radians(10.0)))
        assert angle_error(q, q_hat) == pytest.approx(10.0, abs=1e-9)


def test_angle_error_half_turn():
    """Test the upper end of the range."""
    assert angle_error(Quaternion.identity(), Quaternion(w=0.0, x=1.0, y=0.0, z=0.0)) == pytest.approx(180.0)


def test_angle_error_matches_scipy(rng):
    """Test Δ against the magnitude of scipy's relative rotation."""
    for _ in range(50):
        a, b = random_quat(rng), random_quat(rng)
        ra = Rotation.from_quat([a.x, a.y, a.z, a.w])
        rb = Rotation.from_quat([b.x, b.y, b.z, b.w])
        assert angle_error(a, b) == pytest.approx(math.degrees((ra.inv() * rb).magnitude()), abs=1e-9)


def test_angle_error_is_left_invariant(rng):
    """Test Δ(r∘q, r∘q̂) = Δ(q, q̂)."""
    for _ in range(50):
        q, q_hat, r = random_quat(rng), random_quat(rng), random_quat(rng)
        assert angle_error(quat_multiply(r, q), quat_multiply(r, q_hat)) == pytest.approx(angle_error(q, q_hat), abs=1e-9)


def test_translation_error():
    """Test the Euclidean distance."""
    assert translation_error([0.0, 0.0, 0.0], [3.0, 4.0, 0.0]) == 5.0


@pytest.mark.parametrize("values, expected", [
    ([3.0, 1.0, 2.0], 2.0),
    ([4.0, 1.0, 3.0, 2.0], 2.5),
    ([7.0], 7.0),
])
def test_median(values, expected):
    """Test odd and even length medians."""
    assert median(values) == expected


def test_mean_exceeds_median_on_skewed_errors():
    """Test that a single outlier pulls the mean above the median."""
    values = [1.0] * 9 + [50.0]
    assert median(values) == 1.0
    assert mean(values) == pytest.approx(5.9)


def test_empty_and_non_finite_rejected():
    """Test that aggregation of empty or non-finite lists fails."""
    with pytest.raises(DomainError):
        median([])
    with pytest.raises(DomainError):
        mean([])
    with pytest.raises(DomainError):
        median([1.0, math.nan])


def test_error_record_bounds():
    """Test that records validate their ranges."""
    with pytest.raises(ValidationError):
        ErrorRecord(frame_id="a", translation_error=-1.0, angle_error=1.0)
    with pytest.raises(ValidationError):
        ErrorRecord(frame_id="a", translation_error=1.0, angle_error=181.0)


def test_evaluate_pose():
    """Test per-frame errors of a pose against its label."""
    label = Pose.from_arrays([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    pred = Pose.from_arrays([1.0, 2.0, 4.0], [math.radians(20.0), 0.0, 0.0])
    record = evaluate_pose(pred, label, "seq-01/frame-000000.color.png")
    assert record.frame_id == "seq-01/frame-000000.color.png"
    assert record.translation_error == pytest.approx(1.0)
    assert record.angle_error == pytest.approx(20.0)


def test_summarize():
    """Test median and mean of each column."""
    records = [
        ErrorRecord(frame_id=f"f{i}", translation_error=t, angle_error=a)
        for i, (t, a) in enumerate([(0.1, 1.0), (0.3, 5.0), (0.2, 3.0), (1.0, 30.0)])
    ]
    summary = summarize(records, "Chess")
    assert summary.n_frames == 4
    assert summary.median_t == pytest.approx(0.25)
    assert summary.median_angle == pytest.approx(4.0)
    assert summary.mean_t == pytest.approx(0.4)
    assert summary.mean_angle == pytest.approx(9.75)
    assert summary.median_cell() == "0.2500m, 4.0000°"
    with pytest.raises(DomainError):
        summarize([], "Chess")


def test_format_cell():
    """Test the report cell rendering."""
    assert format_cell(0.5623, 5.8011) == "0.5623m, 5.8011°"
    assert format_cell(0.32, 8.12, decimals=2) == "0.32m, 8.12°"


def test_angle_error_is_symmetric(rng):
    """Test that the angle error does not depend on argument order."""
    for _ in range(200):
        a, b = random_quat(rng), random_quat(rng)
        assert abs(angle_error(a, b) - angle_error(b, a)) <= 1e-12


def test_angle_error_triangle_inequality(rng):
    """Test the triangle inequality of the angle error on random triples."""
    for _ in range(500):
        a, b, c = random_quat(rng), random_quat(rng), random_quat(rng)
        assert angle_error(a, c) <= angle_error(a, b) + angle_error(b, c) + 1e-9


@pytest.mark.parametrize("n", [100, 101])
def test_median_and_mean_ignore_order_and_stay_in_range(rng, n):
    """Test permutation invariance of the median and the [min, max] bounds of both statistics."""
    values = rng.exponential(2.0, n)
    shuffled = rng.permutation(values)
    assert median(shuffled.tolist()) == median(values.tolist())
    lo, hi = float(values.min()), float(values.max())
    assert lo <= median(values.tolist()) <= hi
    assert lo <= mean(values.tolist()) <= hi
