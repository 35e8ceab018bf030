"""
Regressor module for EulerPose.

This module provides a small pose regressor trained from scratch with plain
minibatch SGD: a translation head and an orientation head on top of the input
features, optionally behind one tanh hidden layer.

The orientation head outputs Euler angles (wrapped before the loss) when the
objective is "euler", or an unnormalized quaternion when the objective is the
"quaternion" baseline.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from tqdm import tqdm

from .datasets import PoseDataset
from .errors import ConfigError
from .loss import LossConfig, Pose, euler_loss_batch, quat_baseline_loss_batch
from .metrics import ErrorRecord, evaluate_pose
from .rotations import EulerAngles, Quaternion, euler_to_quat, quat_to_euler, wrap_angles

logger = logging.getLogger(__name__)

Objective = Literal["euler", "quaternion"]

PARAMETER_ORDER = ("W_h", "b_h", "W_t", "b_t", "W_o", "b_o")


class RegressorModel(BaseModel):
    """Parameters of the pose regressor."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    W_t: np.ndarray = Field(..., description="Translation head weights, 3 × k")
    b_t: np.ndarray = Field(..., description="Translation head bias, meters")
    W_o: np.ndarray = Field(..., description="Orientation head weights, m × k")
    b_o: np.ndarray = Field(..., description="Orientation head bias (radians pre-wrap, or quaternion)")
    W_h: Optional[np.ndarray] = Field(None, description="Hidden layer weights, h × d")
    b_h: Optional[np.ndarray] = Field(None, description="Hidden layer bias")
    objective: Objective = Field("euler", description="Orientation head type")
    seed: int = Field(0, description="Seed the parameters were initialized from")

    @model_validator(mode="after")
    def _check_shapes(self) -> "RegressorModel":
        k = self.W_t.shape[1]
        m = 3 if self.objective == "euler" else 4
        if self.W_t.shape != (3, k) or self.b_t.shape != (3,):
            raise ValueError("translation head must be 3 × k with a 3-vector bias")
        if self.W_o.shape != (m, k) or self.b_o.shape != (m,):
            raise ValueError(f"orientation head must be {m} × k with a {m}-vector bias")
        if (self.W_h is None) != (self.b_h is None):
            raise ValueError("hidden layer needs both weights and bias")
        if self.W_h is not None and (self.W_h.shape[0] != k or self.b_h.shape != (k,)):
            raise ValueError("hidden layer width must match the head input width")
        for name, value in self.parameters().items():
            if not np.all(np.isfinite(value)):
                raise ValueError(f"parameter {name} has non-finite entries")
        return self

    @property
    def feature_dim(self) -> int:
        return self.W_t.shape[1] if self.W_h is None else self.W_h.shape[1]

    @property
    def hidden_units(self) -> int:
        return 0 if self.W_h is None else self.W_h.shape[0]

    @property
    def orientation_dim(self) -> int:
        return self.W_o.shape[0]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Parameter arrays by name, hidden layer first when present."""
        return {name: getattr(self, name) for name in PARAMETER_ORDER if getattr(self, name) is not None}

    def copy_with(self, params: Dict[str, np.ndarray]) -> "RegressorModel":
        return self.model_copy(update={k: np.array(v, dtype=float) for k, v in params.items()})


class TrainConfig(BaseModel):
    """SGD settings."""
    learning_rate: float = Field(1e-3, gt=0, description="SGD step size")
    batch_size: int = Field(64, ge=1, description="Frames per minibatch")
    max_iterations: int = Field(50_000, ge=1, description="Hard stop on the number of SGD steps")
    seed: int = Field(0, description="Seed for initialization and batch shuffling")
    loss: LossConfig = Field(default_factory=LossConfig, description="Euler loss weights and unit")
    convergence_window: int = Field(100, ge=1, description="Moving-average window, iterations")
    convergence_tol: float = Field(1e-3, ge=0, description="Relative change of the windowed loss that counts as converged")
    convergence_patience: int = Field(5, ge=1, description="Consecutive windows that must all change by less than the tolerance")
    hidden_units: int = Field(0, ge=0, description="Width of the optional tanh hidden layer, 0 for linear")
    objective: Objective = Field("euler", description="euler loss or the quaternion baseline")
    beta: float = Field(500.0, gt=0, description="Orientation weight of the quaternion baseline")
    show_progress: bool = Field(False, description="Show a progress bar")


class TrainTrace(BaseModel):
    """Per-iteration batch losses and the final model."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    iterations: List[int] = Field(..., description="1-based iteration numbers")
    losses: List[float] = Field(..., description="Mean batch loss before the update of that iteration")
    model: RegressorModel = Field(..., description="Parameters after the last update")
    converged: bool = Field(..., description="Whether the convergence test stopped training")
    iterations_run: int = Field(..., ge=0, description="Number of SGD steps taken")

    @model_validator(mode="after")
    def _check_length(self) -> "TrainTrace":
        if len(self.iterations) != self.iterations_run or len(self.losses) != self.iterations_run:
            raise ValueError("trace length must equal iterations_run")
        return self

    def moving_average(self, window: int) -> np.ndarray:
        """Trailing moving average; entry i averages losses[i - window + 1 : i + 1]."""
        losses = np.asarray(self.losses, dtype=float)
        if len(losses) < window:
            return np.array([])
        c = np.cumsum(np.concatenate([[0.0], losses]))
        return (c[window:] - c[:-window]) / window

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iteration": self.iterations, "loss": self.losses})


def init_model(feature_dim: int, seed: int, hidden_units: int = 0, objective: Objective = "euler") -> RegressorModel:
    """
    Initialize parameters: weights uniform(-1/√fan_in, 1/√fan_in), biases zero.

    The quaternion head's bias starts at the identity quaternion so its output
    can be normalized from the first step.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    params: Dict[str, np.ndarray] = {}
    k = feature_dim
    if hidden_units:
        limit = 1.0 / math.sqrt(feature_dim)
        params["W_h"] = rng.uniform(-limit, limit, (hidden_units, feature_dim))
        params["b_h"] = np.zeros(hidden_units)
        k = hidden_units
    limit = 1.0 / math.sqrt(k)
    m = 3 if objective == "euler" else 4
    params["W_t"] = rng.uniform(-limit, limit, (3, k))
    params["b_t"] = np.zeros(3)
    params["W_o"] = rng.uniform(-limit, limit, (m, k))
    params["b_o"] = np.zeros(m) if objective == "euler" else np.array([1.0, 0.0, 0.0, 0.0])
    return RegressorModel(objective=objective, seed=seed, **params)


def _raw_outputs(model: RegressorModel, F: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    H = F if model.W_h is None else np.tanh(F @ model.W_h.T + model.b_h)
    return H, H @ model.W_t.T + model.b_t, H @ model.W_o.T + model.b_o


def _quat_rows_to_euler(Q: np.ndarray) -> np.ndarray:
    out = np.zeros((len(Q), 3))
    for i, q in enumerate(Q):
        if np.linalg.norm(q) > 0.0:
            out[i] = quat_to_euler(Quaternion.from_array(q)).as_array()
    return out


def predict_batch(model: RegressorModel, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predict translations and wrapped Euler orientations for a (B, d) feature matrix.

    Returns:
        Tuple of (B, 3) translations in meters and (B, 3) Euler angles in radians.
    """
    _, T, R = _raw_outputs(model, np.atleast_2d(np.asarray(features, dtype=float)))
    if model.objective == "euler":
        return T, wrap_angles(R)
    return T, _quat_rows_to_euler(R)


def forward(model: RegressorModel, features) -> Pose:
    """
    Predict the pose for one feature vector.

    Translation is W_t·f + b_t; the orientation is W_o·f + b_o wrapped
    componentwise (or, for the quaternion head, the normalized output).
    """
    _, T, R = _raw_outputs(model, np.asarray(features, dtype=float)[None, :])
    if model.objective == "euler":
        return Pose(translation=tuple(T[0]), orientation=EulerAngles.from_array(R[0]))
    if np.linalg.norm(R[0]) == 0.0:
        return Pose(translation=tuple(T[0]), orientation=EulerAngles.zero())
    return Pose.from_quaternion(T[0], Quaternion.from_array(R[0]))


def orientation_targets(ds: PoseDataset, objective: Objective) -> np.ndarray:
    """Label orientations in the form the objective compares against."""
    if objective == "euler":
        return ds.eulers()
    return np.array([euler_to_quat(f.pose.orientation).as_array() for f in ds.frames])


def batch_loss_and_gradients(model: RegressorModel, features: np.ndarray, translations: np.ndarray,
                             orientations: np.ndarray, cfg: TrainConfig) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Mean loss of a minibatch and its gradient with respect to every parameter.

    Args:
        model (RegressorModel): Current parameters.
        features (np.ndarray): (B, d) inputs.
        translations (np.ndarray): (B, 3) labeled translations.
        orientations (np.ndarray): (B, 3) labeled Euler angles, or (B, 4)
            labeled quaternions for the quaternion objective.
        cfg (TrainConfig): Objective, loss weights and beta.

    Returns:
        Tuple of the mean batch loss and a dict of gradients keyed like
        RegressorModel.parameters().
    """
    B = len(features)
    H, T, R = _raw_outputs(model, features)
    if cfg.objective == "euler":
        # wrapping has unit derivative almost everywhere
        losses, g_t, g_o = euler_loss_batch(T, wrap_angles(R), translations, orientations, cfg.loss)
    else:
        losses, g_t, g_o = quat_baseline_loss_batch(T, R, translations, orientations, cfg.beta)
    g_t = g_t / B
    g_o = g_o / B
    grads = {
        "W_t": g_t.T @ H,
        "b_t": g_t.sum(axis=0),
        "W_o": g_o.T @ H,
        "b_o": g_o.sum(axis=0),
    }
    if model.W_h is not None:
        g_pre = (g_t @ model.W_t + g_o @ model.W_o) * (1.0 - H * H)
        grads["W_h"] = g_pre.T @ features
        grads["b_h"] = g_pre.sum(axis=0)
    return float(losses.mean()), grads


def _has_converged(losses: List[float], window: int, tol: float, patience: int = 1) -> bool:
    """
    Test the windowed loss for convergence at the end of each window.

    The history is cut into consecutive non-overlapping windows. Training has
    converged when each of the last ``patience`` window means differs from the
    one before it by less than ``tol`` relative to that earlier mean. A window
    whose mean is exactly zero counts as converged immediately.
    """
    k = len(losses)
    if k < window or k % window:
        return False
    if float(np.mean(losses[k - window:])) == 0.0:
        return True
    if k < (patience + 1) * window:
        return False
    tail = np.asarray(losses[k - (patience + 1) * window:], dtype=float)
    means = tail.reshape(patience + 1, window).mean(axis=1)
    return bool(np.all(np.abs(np.diff(means)) < tol * means[:-1]))


def train(ds: PoseDataset, cfg: TrainConfig, initial_model: Optional[RegressorModel] = None) -> TrainTrace:
    """
    Train the regressor with minibatch SGD.

    Each epoch draws a fresh seeded permutation and walks it in full batches of
    ``cfg.batch_size`` (a trailing partial batch is dropped). The loss reported
    for an iteration is computed with the parameters before that iteration's
    update. Training stops when the windowed loss stops changing (see
    _has_converged) or after ``cfg.max_iterations`` steps.

    Args:
        ds (PoseDataset): Training frames with feature vectors.
        cfg (TrainConfig): SGD settings.
        initial_model (RegressorModel, optional): Starting parameters; by
            default init_model(ds.feature_dim, cfg.seed, ...).

    Returns:
        TrainTrace: Loss history and final parameters.

    Raises:
        ConfigError: If the dataset has no features, the batch is larger than
            the dataset, or the initial model does not fit the data.
    """
    if not ds.has_features:
        raise ConfigError(f"scene {ds.scene_name!r} has no feature vectors to train on")
    n = len(ds)
    if cfg.batch_size > n:
        raise ConfigError(f"batch size {cfg.batch_size} is larger than the dataset ({n} frames)")

    model = initial_model or init_model(ds.feature_dim, cfg.seed, cfg.hidden_units, cfg.objective)
    if model.feature_dim != ds.feature_dim or model.objective != cfg.objective:
        raise ConfigError("initial model does not match the dataset features or the objective")

    F = ds.feature_matrix()
    T = ds.translations()
    O = orientation_targets(ds, cfg.objective)
    params = {k: v.copy() for k, v in model.parameters().items()}
    shuffle_rng = np.random.Generator(np.random.PCG64([cfg.seed, 1]))

    logger.info("training on %d frames of %r: lr=%g batch=%d max_iter=%d objective=%s",
                n, ds.scene_name, cfg.learning_rate, cfg.batch_size, cfg.max_iterations, cfg.objective)
    iterations: List[int] = []
    losses: List[float] = []
    converged = False
    progress = tqdm(total=cfg.max_iterations, desc="train", unit="it", disable=not cfg.show_progress)
    try:
        while not converged and len(losses) < cfg.max_iterations:
            order = shuffle_rng.permutation(n)
            for start in range(0, n - cfg.batch_size + 1, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                current = model.model_copy(update=params)
                loss, grads = batch_loss_and_gradients(current, F[idx], T[idx], O[idx], cfg)
                for name, g in grads.items():
                    params[name] -= cfg.learning_rate * g
                losses.append(loss)
                iterations.append(len(losses))
                progress.update(1)
                if len(losses) % 100 == 0:
                    progress.set_postfix(loss=f"{loss:.4f}")
                if _has_converged(losses, cfg.convergence_window, cfg.convergence_tol, cfg.convergence_patience):
                    converged = True
                    break
                if len(losses) >= cfg.max_iterations:
                    break
    finally:
        progress.close()

    final = model.copy_with(params)
    logger.info("stopped after %d iterations (converged=%s, last loss %.6g)", len(losses), converged, losses[-1])
    return TrainTrace(iterations=iterations, losses=losses, model=final,
                      converged=converged, iterations_run=len(losses))


def evaluate(model: RegressorModel, ds: PoseDataset) -> List[ErrorRecord]:
    """
    Per-frame translation and angle errors of the model on a dataset.

    Both orientations are converted to quaternions before the angle error is
    taken. Records come back in dataset order.
    """
    if not ds.has_features:
        raise ConfigError(f"scene {ds.scene_name!r} has no feature vectors to evaluate on")
    if ds.feature_dim != model.feature_dim:
        raise ConfigError(f"model expects {model.feature_dim} features, dataset has {ds.feature_dim}")
    return [evaluate_pose(forward(model, f.features), f.pose, f.frame_id) for f in ds.frames]
