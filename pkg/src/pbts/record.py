"""Per-step trajectory log and its CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pose import Pose

# column prefixes in file order; each expands to six pose components
BLOCKS = ("base", "frame", "true", "predicted", "error", "control", "integral")
_PREFIX = {"base": "b", "frame": "f", "true": "t", "predicted": "p", "error": "e",
           "control": "u", "integral": "i"}
_SUFFIX = ("x", "y", "z", "alpha", "beta", "gamma")

CSV_COLUMNS = ("step",) + tuple(_PREFIX[b] + s for b in BLOCKS for s in _SUFFIX)


def format_float(v: float) -> str:
    return format(float(v), ".9g")


@dataclass
class TrajectoryRecord:
    """Everything observed along one servo run.

    Each block is an ``(n_steps, 6)`` array of pose components; row ``t``
    holds the state at step ``t`` before the control was applied. The header
    carries the resolved configuration, seed and stop reason.
    """

    step: np.ndarray
    base: np.ndarray
    frame: np.ndarray
    true: np.ndarray
    predicted: np.ndarray
    error: np.ndarray
    control: np.ndarray
    integral: np.ndarray
    stop_reason: str = ""
    detail: str = ""
    header: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.step)

    @property
    def succeeded(self) -> bool:
        return self.stop_reason in ("closure", "max_steps")

    def base_pose(self, i: int) -> Pose:
        return Pose(*self.base[i])

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        blocks = [getattr(self, b) for b in BLOCKS]
        for i, s in enumerate(self.step):
            row = [str(int(s))]
            for blk in blocks:
                row.extend(format_float(v) for v in blk[i])
            w.writerow(row)
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv_text())
        return path

    @classmethod
    def read_csv(cls, path, **kw) -> "TrajectoryRecord":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if tuple(rows[0]) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected trajectory columns")
        data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(CSV_COLUMNS))
        blocks = {b: data[:, 1 + 6 * k : 7 + 6 * k] for k, b in enumerate(BLOCKS)}
        return cls(step=data[:, 0].astype(int), **blocks, **kw)


class RecordBuilder:
    """Accumulates rows during a run."""

    def __init__(self):
        self.rows = {b: [] for b in BLOCKS}
        self.steps = []

    def add(self, step: int, **poses: Pose) -> None:
        self.steps.append(step)
        for b in BLOCKS:
            p = poses[b]
            self.rows[b].append(p.as_tuple() if isinstance(p, Pose) else tuple(p))

    def build(self, **kw) -> TrajectoryRecord:
        arrays = {b: np.array(self.rows[b], dtype=float).reshape(-1, 6) for b in BLOCKS}
        return TrajectoryRecord(step=np.array(self.steps, dtype=int), **arrays, **kw)
