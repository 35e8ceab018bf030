"""
Self-check module for EulerPose.

This module runs the numerical invariant suites (rotation round-trips, the
angle metric, the loss gradient, weight semantics, median/mean) on seeded
random inputs and reports one pass/fail result per suite.
"""

import logging
import math
from typing import Callable, List

import numpy as np
from pydantic import BaseModel, Field

from .datasets import sample_uniform_quaternions
from .loss import LossConfig, Pose, euler_loss, euler_loss_grad
from .metrics import angle_error, mean, median
from .rotations import (
    EulerAngles,
    Quaternion,
    euler_to_quat,
    matrix_to_quat,
    quat_from_axis_angle,
    quat_multiply,
    quat_to_euler,
    quat_to_matrix,
    wrap_angle,
)

logger = logging.getLogger(__name__)

ROUND_TRIP_TOL = 1e-9
GRADIENT_STEP = 1e-6
GRADIENT_RTOL = 1e-5
PITCH_MARGIN = 0.01


class CheckResult(BaseModel):
    """Outcome of one invariant suite."""
    name: str = Field(..., description="Suite name")
    passed: bool = Field(..., description="Whether every case held")
    detail: str = Field("", description="Worst deviation or first failure")


def central_difference(func: Callable[[np.ndarray], float], x0: np.ndarray, eps: float = GRADIENT_STEP) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a vector."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for j in range(x0.size):
        x = x0.copy()
        x[j] = x0[j] + eps
        f_plus = func(x)
        x[j] = x0[j] - eps
        f_minus = func(x)
        grad[j] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale


def same_rotation_distance(a: Quaternion, b: Quaternion) -> float:
    """Largest componentwise difference between a and ±b."""
    pa, pb = a.as_array(), b.as_array()
    return float(min(np.max(np.abs(pa - pb)), np.max(np.abs(pa + pb))))


def random_unit_quaternions(rng: np.random.Generator, n: int, max_abs_pitch: float = math.pi) -> List[Quaternion]:
    """Uniform random orientations, optionally restricted to |pitch| < max_abs_pitch."""
    out: List[Quaternion] = []
    while len(out) < n:
        for row in sample_uniform_quaternions(rng, n):
            q = Quaternion.from_array(row)
            if abs(quat_to_euler(q).pitch) < max_abs_pitch:
                out.append(q)
                if len(out) == n:
                    break
    return out


def random_pose(rng: np.random.Generator, scale: float = 5.0) -> Pose:
    return Pose.from_arrays(rng.uniform(-scale, scale, 3), rng.uniform(-math.pi, math.pi, 3))


def check_rotation_round_trip(rng: np.random.Generator, n: int = 1000) -> CheckResult:
    worst = 0.0
    for q in random_unit_quaternions(rng, n, math.pi / 2 - PITCH_MARGIN):
        worst = max(worst, same_rotation_distance(euler_to_quat(quat_to_euler(q)), q))
        worst = max(worst, same_rotation_distance(matrix_to_quat(quat_to_matrix(q)), q))
    return CheckResult(name="rotation round-trips", passed=worst <= ROUND_TRIP_TOL,
                       detail=f"max deviation {worst:.3e} over {n} quaternions")


def check_wrap(rng: np.random.Generator, n: int = 200) -> CheckResult:
    worst = 0.0
    for a in rng.uniform(-3 * math.pi, 3 * math.pi, n):
        w = wrap_angle(a)
        if not (-math.pi < w <= math.pi) or wrap_angle(w) != w:
            return CheckResult(name="angle wrapping", passed=False, detail=f"wrap({a!r}) = {w!r}")
        for k in range(-3, 4):
            d = abs(wrap_angle(a + 2 * math.pi * k) - w)
            worst = max(worst, min(d, 2 * math.pi - d))
    passed = worst <= 1e-12 and wrap_angle(-math.pi) == math.pi
    return CheckResult(name="angle wrapping", passed=passed, detail=f"max periodicity deviation {worst:.3e}")


def check_angle_metric(rng: np.random.Generator, n: int = 100) -> CheckResult:
    worst = 0.0
    qs = random_unit_quaternions(rng, n)
    rs = random_unit_quaternions(rng, n)
    for q, r in zip(qs, rs):
        worst = max(worst, angle_error(q, q), angle_error(q, -q))
        axis = rng.standard_normal(3)
        q_hat = quat_multiply(q, quat_from_axis_angle(axis, math.radians(10.0)))
        worst = max(worst, abs(angle_error(q, q_hat) - 10.0))
        left = angle_error(quat_multiply(r, q), quat_multiply(r, q_hat))
        worst = max(worst, abs(left - angle_error(q, q_hat)))
    return CheckResult(name="angle metric", passed=worst <= ROUND_TRIP_TOL,
                       detail=f"max deviation {worst:.3e} degrees")


def check_loss_gradient(rng: np.random.Generator, n: int = 100) -> CheckResult:
    worst = 0.0
    for i in range(n):
        cfg = LossConfig(angle_unit="deg" if i % 2 == 0 else "rad")
        label = random_pose(rng)
        pred = random_pose(rng)
        g = euler_loss_grad(pred, label, cfg)
        analytic = np.concatenate([g.d_translation, g.orientation_radians()])
        x0 = np.concatenate([pred.translation_array(), pred.orientation.as_array()])
        numeric = central_difference(lambda x: euler_loss(Pose.from_arrays(x[:3], x[3:]), label, cfg), x0)
        worst = max(worst, relative_error(analytic, numeric))
    return CheckResult(name="loss gradient", passed=worst <= GRADIENT_RTOL,
                       detail=f"max relative error {worst:.3e} over {n} pose pairs")


def check_weight_semantics() -> CheckResult:
    cfg = LossConfig(w1=1.0, w2=1.0, angle_unit="deg")
    origin = Pose.identity()
    one_meter = euler_loss(Pose(translation=(1.0, 0.0, 0.0), orientation=EulerAngles.zero()), origin, cfg)
    one_degree = euler_loss(Pose(translation=(0.0, 0.0, 0.0), orientation=EulerAngles.from_degrees(1.0, 0.0, 0.0)),
                            origin, cfg)
    worst = max(abs(one_meter - 1.0), abs(one_degree - 1.0))
    return CheckResult(name="unit weights", passed=worst <= 1e-12,
                       detail=f"1 m -> {one_meter!r}, 1 deg -> {one_degree!r}")


def check_median_mean(rng: np.random.Generator, n: int = 1000) -> CheckResult:
    for _ in range(n):
        values = rng.uniform(0.0, 10.0, int(rng.integers(1, 50))).tolist()
        ordered = sorted(values)
        k = len(ordered)
        oracle = ordered[k // 2] if k % 2 else (ordered[k // 2 - 1] + ordered[k // 2]) / 2
        if median(values) != oracle:
            return CheckResult(name="median/mean", passed=False, detail=f"median mismatch on {values!r}")
        if not min(values) <= mean(values) <= max(values):
            return CheckResult(name="median/mean", passed=False, detail=f"mean out of range on {values!r}")
    skewed = [1.0] * 9 + [50.0]
    passed = mean(skewed) > median(skewed)
    return CheckResult(name="median/mean", passed=passed,
                       detail=f"skewed list: median {median(skewed)}, mean {mean(skewed)}")


def run_checks(seed: int = 0) -> List[CheckResult]:
    """Run every suite with one seeded generator, in a fixed order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    results = [
        check_wrap(rng),
        check_rotation_round_trip(rng),
        check_angle_metric(rng),
        check_loss_gradient(rng),
        check_weight_semantics(),
        check_median_mean(rng),
    ]
    for r in results:
        logger.info("%s: %s (%s)", r.name, "pass" if r.passed else "FAIL", r.detail)
    return results
