"""
Datasets module for EulerPose.

This module provides parsers for the two ground-truth pose formats in common
use for camera relocalization, a seeded synthetic dataset generator, and the
package's own interchange format.

Formats:
    - 7-Scenes: ``seq-XX/frame-XXXXXX.pose.txt``, a 4×4 homogeneous
      camera-to-world matrix, 4 rows of 4 whitespace-separated ASCII floats.
    - Cambridge Landmarks: ``dataset_train.txt`` / ``dataset_test.txt`` with 3
      header lines, then ``path x y z q_w q_x q_y q_z`` per frame.
    - Interchange: UTF-8 TSV, one JSON comment line with scene and split, a
      header ``frame_id x y z yaw pitch roll [f0 … f{d-1}]`` and one row per
      frame. Angles in radians, floats written with 17 significant digits.
"""

import json
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ConfigError, DatasetError, InvalidRotationError, PoseParseError
from .loss import Pose
from .rotations import Quaternion, matrix_to_quat, quat_normalize, quat_to_euler

logger = logging.getLogger(__name__)

Split = Literal["train", "test"]
DatasetFormat = Literal["sevenscenes", "cambridge", "interchange"]

POSE_COLUMNS = ["x", "y", "z", "yaw", "pitch", "roll"]
CAMBRIDGE_HEADER_LINES = 3
# Published Cambridge quaternions are printed with limited precision.
CAMBRIDGE_QUAT_NORM_TOL = 1e-3
BOTTOM_ROW_TOL = 1e-6
# Synthetic features: A and b entries ~ N(0, (FEATURE_SCALE / sqrt(feature_dim))²).
FEATURE_SCALE = 0.2
TRANSLATION_RANGE = 10.0


class FrameRecord(BaseModel):
    """One frame: identifier, ground-truth pose and optional feature vector."""
    model_config = ConfigDict(frozen=True)

    frame_id: str = Field(..., description="Relative image path of the frame")
    pose: Pose = Field(..., description="Ground-truth pose")
    features: Optional[Tuple[float, ...]] = Field(None, description="Fixed-length feature vector")


class PoseDataset(BaseModel):
    """Ordered frames of one scene split."""
    scene_name: str = Field(..., description="Scene the frames belong to")
    split: Split = Field(..., description="train or test")
    frames: List[FrameRecord] = Field(..., description="Frames in file order")
    feature_dim: Optional[int] = Field(None, description="Length of every feature vector, or None")

    @model_validator(mode="after")
    def _check_frames(self) -> "PoseDataset":
        _check_consistency(self.frames, self.feature_dim)
        return self

    @classmethod
    def build(cls, scene_name: str, split: Split, frames: List[FrameRecord]) -> "PoseDataset":
        """Create a dataset, inferring feature_dim and raising DatasetError on inconsistency."""
        dims = {None if f.features is None else len(f.features) for f in frames}
        if len(dims) > 1:
            raise DatasetError(f"mixed feature dimensions in scene {scene_name!r}: {sorted(dims, key=str)}")
        feature_dim = dims.pop() if dims else None
        _check_consistency(frames, feature_dim)
        return cls(scene_name=scene_name, split=split, frames=frames, feature_dim=feature_dim)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def has_features(self) -> bool:
        return self.feature_dim is not None

    def frame_ids(self) -> List[str]:
        return [f.frame_id for f in self.frames]

    def translations(self) -> np.ndarray:
        return np.array([f.pose.translation for f in self.frames], dtype=float)

    def eulers(self) -> np.ndarray:
        return np.array([f.pose.orientation.as_array() for f in self.frames], dtype=float)

    def feature_matrix(self) -> np.ndarray:
        if not self.has_features:
            raise DatasetError(f"scene {self.scene_name!r} has no feature vectors")
        return np.array([f.features for f in self.frames], dtype=float)


def _check_consistency(frames: List[FrameRecord], feature_dim: Optional[int]) -> None:
    if not frames:
        raise DatasetError("a dataset needs at least one frame")
    seen = set()
    for frame in frames:
        if frame.frame_id in seen:
            raise DatasetError(f"duplicate frame id {frame.frame_id!r}")
        seen.add(frame.frame_id)
        n = None if frame.features is None else len(frame.features)
        if n != feature_dim:
            raise DatasetError(f"frame {frame.frame_id!r} has feature length {n}, expected {feature_dim}")


def _parse_float(token: str, line_number: int, source: Optional[str]) -> float:
    try:
        value = float(token)
    except ValueError:
        raise PoseParseError(f"not a number: {token!r}", line_number, source) from None
    if not math.isfinite(value):
        raise PoseParseError(f"non-finite number: {token!r}", line_number, source)
    return value


def parse_sevenscenes_pose(text: str, source: Optional[str] = None) -> Pose:
    """
    Parse a 7-Scenes ``frame-XXXXXX.pose.txt`` file.

    Args:
        text (str): File content, a 4×4 homogeneous matrix in row-major order.
        source (str, optional): File name used in error messages.

    Returns:
        Pose: Translation from the last column, orientation from the 3×3 block.

    Raises:
        PoseParseError: On a wrong token count, non-finite value, malformed
            bottom row or a rotation block that is not orthonormal within 1e-6.
    """
    rows = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 4:
            raise PoseParseError(f"expected 4 numbers, found {len(tokens)}", line_number, source)
        rows.append((line_number, [_parse_float(t, line_number, source) for t in tokens]))
    if len(rows) != 4:
        last = rows[-1][0] if rows else 1
        raise PoseParseError(f"expected 4 rows of numbers, found {len(rows)}", last, source)

    M = np.array([values for _, values in rows])
    bottom_line = rows[3][0]
    if np.max(np.abs(M[3] - np.array([0.0, 0.0, 0.0, 1.0]))) > BOTTOM_ROW_TOL:
        raise PoseParseError(f"bottom row must be 0 0 0 1, found {' '.join(repr(v) for v in M[3])}",
                             bottom_line, source)
    try:
        q = matrix_to_quat(M[:3, :3])
    except InvalidRotationError as e:
        raise PoseParseError(f"rotation block rejected: {e}", rows[0][0], source) from None
    return Pose(translation=(M[0, 3], M[1, 3], M[2, 3]), orientation=quat_to_euler(q))


def parse_cambridge_line(line: str, line_number: Optional[int] = None, source: Optional[str] = None) -> FrameRecord:
    """
    Parse one Cambridge Landmarks frame line ``path x y z q_w q_x q_y q_z``.

    Quaternions within 1e-3 of unit norm are renormalized; anything further
    off is rejected.
    """
    tokens = line.split()
    if len(tokens) != 8:
        raise PoseParseError(f"expected 8 fields (path x y z qw qx qy qz), found {len(tokens)}",
                             line_number, source)
    path = tokens[0]
    x, y, z, qw, qx, qy, qz = (_parse_float(t, line_number, source) for t in tokens[1:])
    q = Quaternion(w=qw, x=qx, y=qy, z=qz)
    if abs(q.norm() - 1.0) > CAMBRIDGE_QUAT_NORM_TOL:
        raise PoseParseError(f"quaternion norm {q.norm():.6f} is not within {CAMBRIDGE_QUAT_NORM_TOL} of 1",
                             line_number, source)
    return FrameRecord(frame_id=path, pose=Pose.from_quaternion((x, y, z), quat_normalize(q)))


def parse_cambridge_file(text: str, source: Optional[str] = None) -> List[FrameRecord]:
    """Parse a Cambridge dataset file, skipping its 3 header lines and blank lines."""
    frames = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if line_number <= CAMBRIDGE_HEADER_LINES or not line.strip():
            continue
        frames.append(parse_cambridge_line(line, line_number, source))
    return frames


def sample_uniform_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Draw ``n`` orientations uniformly on SO(3).

    Normalized 4-dimensional Gaussian samples are uniform on the unit sphere;
    the canonical sign w >= 0 is applied afterwards.

    Returns:
        np.ndarray: (n, 4) array of scalar-first unit quaternions.
    """
    g = rng.standard_normal((n, 4))
    q = g / np.linalg.norm(g, axis=1, keepdims=True)
    return np.where(q[:, :1] < 0.0, -q, q)


def generate_synthetic(seed: int, n: int, feature_dim: int, noise_sigma: float,
                       scene_name: str = "synthetic", split: Split = "train") -> PoseDataset:
    """
    Generate a seeded synthetic dataset whose features are a linear image of the pose.

    Draw order from ``numpy.random.Generator(PCG64(seed))``: A (feature_dim×6),
    b (feature_dim), translations (n×3, uniform in [-10, 10] m), orientation
    4-vectors (n×4, standard normal), noise (n×feature_dim, standard normal).
    Features are A·[X; Φ] + b + noise_sigma·noise with Φ in radians.

    Args:
        seed (int): Seed; equal arguments always give bitwise-identical datasets.
        n (int): Number of frames, at least 1.
        feature_dim (int): Feature length, at least 6.
        noise_sigma (float): Standard deviation of the feature noise.
        scene_name (str): Scene name recorded in the dataset.
        split (str): Split recorded in the dataset.

    Returns:
        PoseDataset: The generated frames.
    """
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    if feature_dim < 6:
        raise ConfigError(f"feature_dim must be at least 6, got {feature_dim}")
    if not noise_sigma >= 0:
        raise ConfigError(f"noise_sigma must be non-negative, got {noise_sigma}")

    rng = np.random.Generator(np.random.PCG64(seed))
    scale = FEATURE_SCALE / math.sqrt(feature_dim)
    A = scale * rng.standard_normal((feature_dim, 6))
    b = scale * rng.standard_normal(feature_dim)
    translations = rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE, (n, 3))
    quats = sample_uniform_quaternions(rng, n)
    noise = rng.standard_normal((n, feature_dim))

    poses = [Pose.from_quaternion(t, Quaternion.from_array(q)) for t, q in zip(translations, quats)]
    Z = np.array([p.translation + tuple(p.orientation.as_array()) for p in poses])
    features = Z @ A.T + b + noise_sigma * noise

    frames = [
        FrameRecord(frame_id=f"{scene_name}/frame-{i:06d}", pose=pose, features=tuple(float(v) for v in f))
        for i, (pose, f) in enumerate(zip(poses, features))
    ]
    logger.info("generated %d synthetic frames (seed=%d, dim=%d, sigma=%g)", n, seed, feature_dim, noise_sigma)
    return PoseDataset(scene_name=scene_name, split=split, frames=frames, feature_dim=feature_dim)


def _read_text(path: Path, source: Optional[str] = None) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise PoseParseError(f"not UTF-8 text (byte {e.start})", source=source or str(path)) from None


def _sevenscenes_sequences(root: Path, split: Split) -> List[Path]:
    split_file = root / ("TrainSplit.txt" if split == "train" else "TestSplit.txt")
    if split_file.exists():
        sequences = []
        for line in _read_text(split_file).splitlines():
            match = re.search(r"(\d+)", line)
            if match:
                sequences.append(root / f"seq-{int(match.group(1)):02d}")
        missing = [s.name for s in sequences if not s.is_dir()]
        if missing:
            raise DatasetError(f"{split_file} lists missing sequences: {', '.join(missing)}")
        return sorted(sequences)
    return sorted(p for p in root.glob("seq-*") if p.is_dir())


def _read_sevenscenes(root: Path, split: Split, scene_name: str) -> PoseDataset:
    files = sorted(
        (f for seq in _sevenscenes_sequences(root, split) for f in seq.glob("frame-*.pose.txt")),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    if not files:
        raise DatasetError(f"no 7-Scenes pose files (seq-*/frame-*.pose.txt) under {root}")

    def load(path: Path) -> FrameRecord:
        rel = path.relative_to(root).as_posix()
        pose = parse_sevenscenes_pose(_read_text(path, rel), source=rel)
        return FrameRecord(frame_id=rel.replace(".pose.txt", ".color.png"), pose=pose)

    # map() yields in submission order, so the frame order is the sorted file order
    with ThreadPoolExecutor() as pool:
        frames = list(pool.map(load, files))
    return PoseDataset.build(scene_name, split, frames)


def _read_cambridge(root: Path, split: Split, scene_name: str) -> PoseDataset:
    path = root if root.is_file() else root / f"dataset_{split}.txt"
    if not path.exists():
        raise DatasetError(f"Cambridge dataset file not found: {path}")
    frames = parse_cambridge_file(_read_text(path, path.name), source=path.name)
    if not frames:
        raise DatasetError(f"no frames in {path}")
    return PoseDataset.build(scene_name, split, frames)


def write_interchange(ds: PoseDataset, path) -> None:
    """
    Write a dataset as interchange TSV.

    Args:
        ds (PoseDataset): Dataset to write.
        path: Destination file; parent directories are created.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(np.hstack([ds.translations(), ds.eulers()]), columns=POSE_COLUMNS)
    table.insert(0, "frame_id", ds.frame_ids())
    if ds.has_features:
        features = pd.DataFrame(ds.feature_matrix(), columns=[f"f{i}" for i in range(ds.feature_dim)])
        table = pd.concat([table, features], axis=1)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("# " + json.dumps({"scene": ds.scene_name, "split": ds.split}) + "\n")
        table.to_csv(f, sep="\t", index=False, float_format="%.17g", lineterminator="\n")


def _read_interchange(root: Path, split: Split, scene_name: Optional[str]) -> PoseDataset:
    path = root if root.is_file() else root / f"{split}.tsv"
    if not path.exists():
        raise DatasetError(f"interchange file not found: {path}")
    metadata = {}
    skip = 0
    try:
        with open(path, "r", encoding="utf-8") as f:
            first = f.readline()
        if first.startswith("#"):
            skip = 1
            try:
                metadata = json.loads(first[1:])
            except json.JSONDecodeError:
                logger.warning("ignoring unreadable metadata line in %s", path)
        table = pd.read_csv(path, sep="\t", skiprows=skip, dtype={"frame_id": str},
                            keep_default_na=False, na_values=[""], float_precision="round_trip")
    except UnicodeDecodeError as e:
        raise DatasetError(f"{path}: not UTF-8 text (byte {e.start})") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetError(f"{path}: {e}") from None
    stored_split = metadata.get("split", split)
    if stored_split != split:
        logger.warning("%s holds the %s split, %s was requested; keeping %s",
                       path, stored_split, split, stored_split)

    expected = ["frame_id"] + POSE_COLUMNS
    if list(table.columns[:7]) != expected:
        raise DatasetError(f"{path}: header must start with {' '.join(expected)}")
    feature_cols = list(table.columns[7:])
    if feature_cols != [f"f{i}" for i in range(len(feature_cols))]:
        raise DatasetError(f"{path}: feature columns must be f0 … f{len(feature_cols) - 1}")
    if table[POSE_COLUMNS].isna().any().any():
        raise DatasetError(f"{path}: missing pose values")
    if feature_cols and table[feature_cols].isna().any().any():
        raise DatasetError(f"{path}: mixed feature dimensions (rows with missing feature values)")

    poses = table[POSE_COLUMNS].to_numpy(dtype=float)
    features = table[feature_cols].to_numpy(dtype=float) if feature_cols else None
    frames = [
        FrameRecord(
            frame_id=frame_id,
            pose=Pose.from_arrays(poses[i, :3], poses[i, 3:]),
            features=None if features is None else tuple(float(v) for v in features[i]),
        )
        for i, frame_id in enumerate(table["frame_id"])
    ]
    return PoseDataset.build(
        scene_name or metadata.get("scene") or path.stem,
        stored_split,
        frames,
    )


def read_dataset(root, format: DatasetFormat = "interchange", split: Split = "train",
                 scene_name: Optional[str] = None) -> PoseDataset:
    """
    Read a dataset split from disk.

    Args:
        root: Scene directory (7-Scenes, Cambridge) or interchange file/directory.
        format (str): One of sevenscenes, cambridge, interchange.
        split (str): train or test.
        scene_name (str, optional): Overrides the scene name; by default the
            directory name (or the name stored in an interchange file).

    Returns:
        PoseDataset: Frames in deterministic file order.

    Raises:
        DatasetError: If files are missing, empty or inconsistent.
        PoseParseError: If a pose file is malformed.
    """
    root = Path(root)
    if not root.exists():
        raise DatasetError(f"dataset path does not exist: {root}")
    logger.info("reading %s dataset from %s (split=%s)", format, root, split)
    if format == "sevenscenes":
        return _read_sevenscenes(root, split, scene_name or root.name)
    if format == "cambridge":
        return _read_cambridge(root, split, scene_name or (root.parent.name if root.is_file() else root.name))
    if format == "interchange":
        return _read_interchange(root, split, scene_name)
    raise ConfigError(f"unknown dataset format {format!r}")
