"""
Command-line interface for EulerPose.

Subcommands: convert (rotation representations), gen (synthetic data), train,
eval (per-frame CSV plus a median/mean report), check (numerical invariants)
and table (published reference results).
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import generate_synthetic, read_dataset, write_interchange
from .errors import DatasetError, EulerPoseError, PoseParseError
from .loss import LossConfig
from .metrics import EvalSummary, format_cell, summarize
from .reference import METHODS, REFERENCE_TABLE, find_reference
from .regressor import TrainConfig, evaluate, train
from .rotations import (
    EulerAngles,
    Quaternion,
    euler_to_quat,
    matrix_to_quat,
    quat_normalize,
    quat_to_euler,
    quat_to_matrix,
)
from .selfcheck import run_checks
from .settings import Settings, load_settings

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("euler", "quat", "matrix")
METHOD_LABELS = {"posenet": "PoseNet", "euler": "Euler loss"}


class ReportRow(BaseModel):
    """One scene row of a median/mean report."""
    scene: str = Field(..., description="Scene name")
    train_frames: Optional[int] = Field(None, description="Frames the model was trained on")
    test_frames: int = Field(..., description="Frames evaluated")
    median_t: float = Field(..., description="Median translation error, meters")
    median_angle: float = Field(..., description="Median angle error, degrees")
    mean_t: float = Field(..., description="Mean translation error, meters")
    mean_angle: float = Field(..., description="Mean angle error, degrees")

    @classmethod
    def from_summary(cls, summary: EvalSummary, train_frames: Optional[int] = None) -> "ReportRow":
        return cls(scene=summary.scene, train_frames=train_frames, test_frames=summary.n_frames,
                   median_t=summary.median_t, median_angle=summary.median_angle,
                   mean_t=summary.mean_t, mean_angle=summary.mean_angle)

    def cells(self, unit: str = "deg") -> List[str]:
        return [
            self.scene,
            "-" if self.train_frames is None else str(self.train_frames),
            str(self.test_frames),
            _render_cell(self.median_t, self.median_angle, unit),
            _render_cell(self.mean_t, self.mean_angle, unit),
        ]


def _render_cell(meters: float, degrees: float, unit: str) -> str:
    if unit == "rad":
        return f"{meters:.4f}m, {math.radians(degrees):.4f}rad"
    return format_cell(meters, degrees, 4)


def render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned plain-text table."""
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *rows]]
    return "\n".join(lines)


REPORT_HEADER = ("Scene", "Train", "Test", "Median", "Mean")


def format_number(value: float) -> str:
    """17 significant digits, without negative zeros."""
    return f"{float(value) + 0.0:.17g}"


def _parse_numbers(line: str, count: int, line_number: int, source: str) -> List[float]:
    tokens = line.replace(",", " ").split()
    if len(tokens) != count:
        raise PoseParseError(f"expected {count} numbers, found {len(tokens)}", line_number, source)
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise PoseParseError(f"not a number in {line.strip()!r}", line_number, source) from None
    if not all(math.isfinite(v) for v in values):
        raise PoseParseError("non-finite number", line_number, source)
    return values


def convert_line(line: str, src: str, dst: str, unit: str = "rad", line_number: int = 1,
                 source: str = "<stdin>") -> str:
    """Convert one whitespace-separated rotation between representations."""
    count = {"euler": 3, "quat": 4, "matrix": 9}[src]
    values = _parse_numbers(line, count, line_number, source)
    try:
        if src == "euler":
            if unit == "deg":
                values = [math.radians(v) for v in values]
            q = euler_to_quat(EulerAngles.from_array(values))
        elif src == "quat":
            q = quat_normalize(Quaternion.from_array(values))
        else:
            q = matrix_to_quat(np.array(values).reshape(3, 3))
    except (EulerPoseError, ValidationError) as e:
        raise PoseParseError(str(e).splitlines()[0], line_number, source) from None

    if dst == "euler":
        out = quat_to_euler(q).as_array()
        if unit == "deg":
            out = np.degrees(out)
    elif dst == "quat":
        out = q.as_array()
    else:
        out = quat_to_matrix(q).ravel()
    return " ".join(format_number(v) for v in out)


def cmd_convert(args: argparse.Namespace, settings: Settings) -> int:
    source = args.input or "<stdin>"
    stream = open(args.input, "r", encoding="utf-8") if args.input else sys.stdin
    try:
        for line_number, line in enumerate(stream, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            print(convert_line(line, args.src, args.dst, args.unit, line_number, source))
    except UnicodeDecodeError as e:
        raise PoseParseError(f"not UTF-8 text (byte {e.start})", source=source) from None
    finally:
        if args.input:
            stream.close()
    return 0


def cmd_gen(args: argparse.Namespace, settings: Settings) -> int:
    ds = generate_synthetic(args.seed, args.n, args.dim, args.sigma, scene_name=args.scene, split=args.split)
    write_interchange(ds, args.out)
    print(f"Wrote {len(ds)} frames ({ds.feature_dim} features) to {args.out}")
    return 0


def _curve_path(out: str, curve: Optional[str]) -> Path:
    if curve:
        return Path(curve)
    out = Path(out)
    return out.with_name(out.stem + ".loss.csv")


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    ds = read_dataset(args.data, args.format, args.split, args.scene)
    cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        max_iterations=args.max_iter,
        seed=args.seed,
        loss=LossConfig(w1=args.w1, w2=args.w2, angle_unit=args.angle_unit, wrap_residual=args.wrap_residual),
        convergence_window=args.window,
        convergence_tol=args.tol,
        convergence_patience=args.patience,
        hidden_units=args.hidden,
        objective=args.objective,
        beta=args.beta,
        show_progress=settings.progress and sys.stderr.isatty(),
    )
    trace = train(ds, cfg)
    save_checkpoint(trace.model, args.out, extra={
        "scene": ds.scene_name,
        "train_frames": len(ds),
        "angle_unit": cfg.loss.angle_unit,
        "w1": cfg.loss.w1,
        "w2": cfg.loss.w2,
        "wrap_residual": cfg.loss.wrap_residual,
        "beta": cfg.beta,
        "learning_rate": cfg.learning_rate,
        "batch_size": cfg.batch_size,
        "convergence_window": cfg.convergence_window,
        "convergence_tol": cfg.convergence_tol,
        "convergence_patience": cfg.convergence_patience,
        "iterations_run": trace.iterations_run,
        "converged": trace.converged,
    })
    curve = _curve_path(args.out, args.curve)
    curve.parent.mkdir(parents=True, exist_ok=True)
    trace.to_frame().to_csv(curve, index=False, float_format="%.17g", lineterminator="\n")
    print(f"Trained {trace.iterations_run} iterations (converged: {'yes' if trace.converged else 'no'}), "
          f"final batch loss {trace.losses[-1]:.6f} [{cfg.loss.angle_unit}]")
    print(f"Checkpoint: {args.out}")
    print(f"Loss curve: {curve}")
    return 0


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    unit = args.report_unit or settings.report_unit
    model, metadata = load_checkpoint(args.model)
    ds = read_dataset(args.data, args.format, args.split)
    scene = args.scene or ds.scene_name
    records = evaluate(model, ds)
    out_csv = Path(args.out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([r.model_dump() for r in records]).to_csv(
        out_csv, index=False, float_format="%.17g", lineterminator="\n")

    summary = summarize(records, scene)
    rows = [ReportRow.from_summary(summary, metadata.get("train_frames")).cells(unit)]
    if args.compare:
        reference = find_reference(scene)
        if reference is None:
            print(f"warning: no published results for scene {scene!r}", file=sys.stderr)
        else:
            rows.append([
                f"{reference.scene} ({METHOD_LABELS[args.compare]}, published)",
                str(reference.train_frames),
                str(reference.test_frames),
                reference.median[args.compare].render(),
                reference.mean[args.compare].render(),
            ])
    print(render_table(REPORT_HEADER, rows))
    print(f"Per-frame errors: {out_csv}")
    return 0


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    results = run_checks(args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def cmd_table(args: argparse.Namespace, settings: Settings) -> int:
    if args.scenes:
        selected = []
        for name in args.scenes:
            ref = find_reference(name)
            if ref is None:
                raise DatasetError(f"no published results for scene {name!r}")
            selected.append(ref)
    else:
        selected = REFERENCE_TABLE
    rows = []
    for ref in selected:
        for method in METHODS:
            rows.append([f"{ref.scene} ({METHOD_LABELS[method]})", str(ref.train_frames), str(ref.test_frames),
                         ref.median[method].render(), ref.mean[method].render()])
    print(render_table(REPORT_HEADER, rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eulerpose",
                                     description="EulerPose - Euler-angle pose regression loss, metrics and toy regressor")
    parser.add_argument("--log-level", type=str, default=None, help="Log level (default from EULERPOSE_LOG_LEVEL)")
    parser.add_argument("--report-unit", choices=("deg", "rad"), default=None,
                        help="Angle unit in reports (default from EULERPOSE_REPORT_UNIT, else deg)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="Convert rotations between Euler angles, quaternions and matrices")
    p.add_argument("--from", dest="src", choices=REPRESENTATIONS, required=True, help="Input representation")
    p.add_argument("--to", dest="dst", choices=REPRESENTATIONS, required=True, help="Output representation")
    p.add_argument("--unit", choices=("deg", "rad"), default="rad", help="Euler angle unit for input and output")
    p.add_argument("--input", type=str, default=None, help="File with one rotation per line (default stdin)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gen", help="Generate a seeded synthetic dataset")
    p.add_argument("--seed", type=int, required=True, help="Random seed")
    p.add_argument("--n", type=int, required=True, help="Number of frames")
    p.add_argument("--dim", type=int, required=True, help="Feature dimension (at least 6)")
    p.add_argument("--sigma", type=float, default=0.0, help="Feature noise standard deviation")
    p.add_argument("--scene", type=str, default="synthetic", help="Scene name")
    p.add_argument("--split", choices=("train", "test"), default="train", help="Split name")
    p.add_argument("--out", type=str, required=True, help="Interchange TSV to write")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="Train the regressor with SGD")
    p.add_argument("--data", type=str, required=True, help="Dataset path")
    p.add_argument("--format", choices=("interchange", "sevenscenes", "cambridge"), default="interchange",
                   help="Dataset format")
    p.add_argument("--split", choices=("train", "test"), default="train", help="Split to read")
    p.add_argument("--scene", type=str, default=None, help="Override the scene name")
    p.add_argument("--lr", type=float, default=1e-3, help="Learning rate")
    p.add_argument("--batch", type=int, default=64, help="Batch size")
    p.add_argument("--max-iter", type=int, default=50_000, help="Maximum number of iterations")
    p.add_argument("--seed", type=int, default=0, help="Seed for initialization and shuffling")
    p.add_argument("--angle-unit", choices=("deg", "rad"), default="deg", help="Angle unit inside the loss")
    p.add_argument("--w1", type=float, default=1.0, help="Translation weight")
    p.add_argument("--w2", type=float, default=1.0, help="Orientation weight")
    p.add_argument("--wrap-residual", action="store_true", help="Wrap the angle residual to (-pi, pi]")
    p.add_argument("--window", type=int, default=100, help="Convergence moving-average window")
    p.add_argument("--tol", type=float, default=1e-3, help="Convergence relative-change tolerance")
    p.add_argument("--patience", type=int, default=5, help="Consecutive windows within the tolerance before stopping")
    p.add_argument("--hidden", type=int, default=0, help="Hidden layer width (0 for a linear model)")
    p.add_argument("--objective", choices=("euler", "quaternion"), default="euler", help="Training loss")
    p.add_argument("--beta", type=float, default=500.0, help="Orientation weight of the quaternion baseline")
    p.add_argument("--out", type=str, required=True, help="Checkpoint to write")
    p.add_argument("--curve", type=str, default=None, help="Loss-curve CSV (default <out>.loss.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a checkpoint and print a median/mean report")
    p.add_argument("--model", type=str, required=True, help="Checkpoint to load")
    p.add_argument("--data", type=str, required=True, help="Dataset path")
    p.add_argument("--format", choices=("interchange", "sevenscenes", "cambridge"), default="interchange",
                   help="Dataset format")
    p.add_argument("--split", choices=("train", "test"), default="test", help="Split to read")
    p.add_argument("--scene", type=str, default=None, help="Scene name for the report")
    p.add_argument("--out-csv", type=str, required=True, help="Per-frame error CSV to write")
    p.add_argument("--compare", choices=METHODS, default=None, help="Append the published row for the scene")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="Run the numerical invariant suites")
    p.add_argument("--seed", type=int, default=0, help="Seed for the random cases")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table", help="Print the published median/mean reference table")
    p.add_argument("--scenes", nargs="*", default=None, help="Restrict to these scenes")
    p.set_defaults(func=cmd_table)
    return parser


def main_cli(argv: Optional[List[str]] = None) -> int:
    """Entry point for the command-line application."""
    settings = load_settings()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or settings.log_level).upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    logger.debug("running %s", args.command)
    try:
        return args.func(args, settings)
    except (EulerPoseError, ValidationError, OSError) as e:
        message = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main_cli())
