"""
Checkpoint module for EulerPose.

A checkpoint is an interchange-style TSV: one comment line holding a JSON
"metadata" block (dimensions, seed, objective, training provenance), then a
header ``tensor index value`` and one row per flattened parameter, written with
17 significant digits so parameters reload bit-exactly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DatasetError
from .regressor import PARAMETER_ORDER, RegressorModel

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "eulerpose-checkpoint/1"


def _shapes(metadata: Dict[str, Any]) -> Dict[str, Tuple[int, ...]]:
    d = metadata["feature_dim"]
    h = metadata.get("hidden_units", 0)
    m = metadata.get("orientation_dim", 3)
    k = h or d
    shapes = {"W_t": (3, k), "b_t": (3,), "W_o": (m, k), "b_o": (m,)}
    if h:
        shapes.update({"W_h": (h, d), "b_h": (h,)})
    return shapes


def save_checkpoint(model: RegressorModel, path, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Write model parameters and metadata.

    Args:
        model (RegressorModel): Parameters to save.
        path: Destination file; parent directories are created.
        extra (Dict[str, Any], optional): Additional metadata (scene,
            train_frames, angle_unit, ...). Must be JSON-serializable.

    Returns:
        Dict[str, Any]: The metadata block that was written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {
        "format": CHECKPOINT_FORMAT,
        "feature_dim": model.feature_dim,
        "hidden_units": model.hidden_units,
        "orientation_dim": model.orientation_dim,
        "objective": model.objective,
        "seed": model.seed,
    }
    metadata.update(extra or {})

    rows = []
    for name, value in model.parameters().items():
        flat = np.asarray(value, dtype=float).ravel()
        rows.append(pd.DataFrame({"tensor": name, "index": np.arange(flat.size), "value": flat}))
    table = pd.concat(rows, ignore_index=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("# " + json.dumps({"metadata": metadata}, sort_keys=True) + "\n")
        table.to_csv(f, sep="\t", index=False, float_format="%.17g", lineterminator="\n")
    logger.info("saved checkpoint %s (%d parameters)", path, len(table))
    return metadata


def load_checkpoint(path) -> Tuple[RegressorModel, Dict[str, Any]]:
    """
    Read a checkpoint written by save_checkpoint.

    Returns:
        Tuple of the model and its metadata block.

    Raises:
        DatasetError: If the file is missing, has no metadata line, or its
            parameter table does not match the recorded dimensions.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"checkpoint not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            first = f.readline()
        metadata = json.loads(first[1:])["metadata"] if first.startswith("#") else None
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError):
        metadata = None
    if not isinstance(metadata, dict) or metadata.get("format") != CHECKPOINT_FORMAT:
        raise DatasetError(f"{path} is not an EulerPose checkpoint")

    try:
        return _read_parameters(path, metadata), metadata
    except DatasetError:
        raise
    except KeyError as e:
        raise DatasetError(f"{path}: missing {e}") from None
    except (ValueError, TypeError) as e:
        # pandas parser errors, bad shapes and model validation all land here
        message = str(e).splitlines()[0] if str(e) else type(e).__name__
        raise DatasetError(f"{path}: {message}") from None


def _read_parameters(path: Path, metadata: Dict[str, Any]) -> RegressorModel:
    table = pd.read_csv(path, sep="\t", skiprows=1, float_precision="round_trip")
    params = {}
    for name, shape in _shapes(metadata).items():
        values = table.loc[table["tensor"] == name].sort_values("index")["value"].to_numpy(dtype=float)
        if values.size != int(np.prod(shape)):
            raise DatasetError(f"{path}: tensor {name} has {values.size} values, expected shape {shape}")
        params[name] = values.reshape(shape)
    unknown = set(table["tensor"]) - set(PARAMETER_ORDER)
    if unknown:
        raise DatasetError(f"{path}: unknown tensors {sorted(unknown)}")
    return RegressorModel(objective=metadata["objective"], seed=metadata.get("seed", 0), **params)
