"""Trajectory data, noise bounds, regressor windows and on-disk persistence.

A dataset on disk is a directory holding ``manifest.json`` plus one CSV file
per trajectory with header ``k,y_1,...,y_m``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

NORMS = {"1": 1.0, "2": 2.0, "inf": math.inf}


class DatasetFormatError(ValueError):
    """Raised when a dataset directory or trajectory file cannot be parsed."""


def parse_norm(p) -> float:
    """Normalise a norm index given as ``1``, ``2``, ``inf`` or their strings."""
    key = str(p).strip().lower()
    if key in ("1", "1.0"):
        return 1.0
    if key in ("2", "2.0"):
        return 2.0
    if key in ("inf", "infinity", "math.inf"):
        return math.inf
    raise ValueError(f"norm index must be 1, 2 or inf, got {p!r}")


def norm_name(p: float) -> str:
    return "inf" if p == math.inf else str(int(p))


def _frozen(values, ndim=1) -> np.ndarray:
    arr = np.array(values, dtype=float, ndmin=ndim)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NoiseBounds:
    eps_w: np.ndarray
    eps_v: np.ndarray

    def __post_init__(self):
        eps_w = _frozen(self.eps_w)
        eps_v = _frozen(self.eps_v)
        if eps_w.shape != eps_v.shape or eps_w.ndim != 1:
            raise ValueError("eps_w and eps_v must be vectors of equal length")
        if np.any(eps_w < 0) or np.any(eps_v < 0) or not np.all(np.isfinite(eps_w + eps_v)):
            raise ValueError("noise bounds must be finite and nonnegative")
        object.__setattr__(self, "eps_w", eps_w)
        object.__setattr__(self, "eps_v", eps_v)

    @property
    def m(self) -> int:
        return self.eps_w.shape[0]


@dataclass(frozen=True)
class OutputDomain:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _frozen(self.lower)
        upper = _frozen(self.upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("domain bounds must be vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("domain lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def m(self) -> int:
        return self.lower.shape[0]

    def regressor_box(self, n_y: int) -> tuple[np.ndarray, np.ndarray]:
        """Bounds of the regressor space, the ``n_y``-fold product of the domain."""
        return np.tile(self.lower, n_y), np.tile(self.upper, n_y)


@dataclass(frozen=True)
class Trajectory:
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1 and samples.size == 0:
            samples = samples.reshape(0, 0)
        if samples.ndim != 2:
            raise ValueError("trajectory samples must form a (T, m) array")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def m(self) -> int:
        return self.samples.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.samples.shape == other.samples.shape and bool(np.array_equal(self.samples, other.samples))

    __hash__ = None


@dataclass(frozen=True)
class TrajectoryDataset:
    trajectories: tuple
    m: int
    n_y: int
    noise: NoiseBounds
    domain: OutputDomain
    p: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        trajs = tuple(t if isinstance(t, Trajectory) else Trajectory(t) for t in self.trajectories)
        object.__setattr__(self, "trajectories", trajs)
        object.__setattr__(self, "p", parse_norm(self.p))
        if self.m < 1 or self.n_y < 1:
            raise ValueError("m and n_y must be positive")
        if self.noise.m != self.m or self.domain.m != self.m:
            raise ValueError("noise bounds and domain must have dimension m")
        for idx, t in enumerate(trajs):
            if len(t) and t.m != self.m:
                raise ValueError(f"trajectory {idx} has dimension {t.m}, expected m={self.m}")

    @property
    def n(self) -> int:
        return self.m * self.n_y

    @property
    def N(self) -> int:
        return len(self.trajectories)

    def __eq__(self, other):
        if not isinstance(other, TrajectoryDataset):
            return NotImplemented
        return (
            self.m == other.m
            and self.n_y == other.n_y
            and self.p == other.p
            and np.array_equal(self.noise.eps_w, other.noise.eps_w)
            and np.array_equal(self.noise.eps_v, other.noise.eps_v)
            and np.array_equal(self.domain.lower, other.domain.lower)
            and np.array_equal(self.domain.upper, other.domain.upper)
            and self.trajectories == other.trajectories
        )

    __hash__ = None


@dataclass(frozen=True)
class RegressorDataset:
    """Stacked regressor/successor pairs built from a trajectory dataset.

    ``S[r]`` is the regressor of pair ``r`` (newest sample first), ``Y[r]``
    the successor output and ``sources[r] = (trajectory, time)`` the index of
    the newest sample in ``S[r]``.
    """

    S: np.ndarray
    Y: np.ndarray
    sources: np.ndarray
    m: int
    n_y: int
    p: float
    noise: NoiseBounds
    domain: OutputDomain

    def __post_init__(self):
        for name in ("S", "Y"):
            arr = np.array(getattr(self, name), dtype=float, ndmin=2)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        src = np.array(self.sources, dtype=np.int64).reshape(-1, 2)
        src.setflags(write=False)
        object.__setattr__(self, "sources", src)
        if self.S.shape[0] != self.Y.shape[0] or self.S.shape[0] != src.shape[0]:
            raise ValueError("S, Y and sources must have the same number of rows")
        if self.S.shape[1] != self.n or self.Y.shape[1] != self.m:
            raise ValueError("pair dimensions do not match m and n_y")

    @property
    def n(self) -> int:
        return self.m * self.n_y

    def __len__(self) -> int:
        return self.S.shape[0]

    @property
    def eps_s(self) -> float:
        return epsilon_s(self.noise, self.n_y, self.p)

    def subset(self, indices) -> "RegressorDataset":
        """Pairs at ``indices`` (order preserved), sharing all other fields."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        return RegressorDataset(
            self.S[idx].reshape(-1, self.n), self.Y[idx].reshape(-1, self.m), self.sources[idx],
            self.m, self.n_y, self.p, self.noise, self.domain,
        )


def stack_regressor(samples: np.ndarray, k: int, n_y: int) -> np.ndarray:
    """Regressor at time ``k``: ``[y_k, y_{k-1}, ..., y_{k-n_y+1}]`` flattened."""
    return np.asarray(samples[k - n_y + 1:k + 1][::-1], dtype=float).reshape(-1)


def build_regressor_dataset(d: TrajectoryDataset) -> RegressorDataset:
    """Collect every full regressor window with its successor sample.

    Pairs are ordered by trajectory, then time.  A trajectory of length ``T``
    contributes ``max(0, T - n_y)`` pairs, for windows ending at
    ``j = n_y - 1, ..., T - 2``.
    """
    S, Y, src = [], [], []
    for ell, traj in enumerate(d.trajectories):
        y = traj.samples
        if len(traj) and y.shape[1] != d.m:
            raise ValueError(f"trajectory {ell} has dimension {y.shape[1]}, expected {d.m}")
        for j in range(d.n_y - 1, len(traj) - 1):
            S.append(stack_regressor(y, j, d.n_y))
            Y.append(y[j + 1])
            src.append((ell, j))
    S_arr = np.array(S, dtype=float).reshape(-1, d.n)
    Y_arr = np.array(Y, dtype=float).reshape(-1, d.m)
    return RegressorDataset(S_arr, Y_arr, np.array(src, dtype=np.int64).reshape(-1, 2),
                            d.m, d.n_y, d.p, d.noise, d.domain)


def epsilon_s(noise: NoiseBounds, n_y: int, p) -> float:
    """Bound on the p-norm of the regressor measurement error."""
    p = parse_norm(p)
    ev = noise.eps_v
    if ev.size == 0:
        return 0.0
    if p == math.inf:
        return float(ev.max())
    return float((n_y * np.sum(ev ** p)) ** (1.0 / p))


# --------------------------------------------------------------------------
# persistence

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path, samples: np.ndarray) -> None:
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[1] if samples.ndim == 2 else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"y_{i + 1}" for i in range(m)])
        for k, row in enumerate(samples):
            w.writerow([k] + [_fmt(v) for v in row])


def read_trajectory_csv(path, m: int | None = None) -> Trajectory:
    """Parse a trajectory CSV; ``m`` (if given) is the required width."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DatasetFormatError(f"{path}: cannot open ({exc})") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "k":
            raise DatasetFormatError(f"{path}: line 1: header must start with 'k'")
        width = len(header) - 1
        expected = [f"y_{i + 1}" for i in range(width)]
        if [h.strip() for h in header[1:]] != expected:
            raise DatasetFormatError(f"{path}: line 1: header must be k,y_1,...,y_m")
        if m is not None and width != m:
            raise DatasetFormatError(f"{path}: line 1: header declares {width} outputs, manifest has m={m}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width + 1:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {width} values after k, got {len(row) - 1}")
            try:
                k = int(row[0])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: field 'k' is not an integer") from exc
            if k != len(rows):
                raise DatasetFormatError(f"{path}: line {lineno}: expected k={len(rows)}, got {k}")
            vals = []
            for col, cell in enumerate(row[1:], start=1):
                try:
                    vals.append(float(cell))
                except ValueError as exc:
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: field 'y_{col}' is not a number: {cell!r}") from exc
            rows.append(vals)
    return Trajectory(np.array(rows, dtype=float).reshape(len(rows), width))


def save_dataset(d: TrajectoryDataset, path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = []
    for idx, traj in enumerate(d.trajectories):
        name = f"traj_{idx:04d}.csv"
        write_trajectory_csv(path / name, traj.samples.reshape(len(traj), d.m))
        files.append(name)
    manifest: dict[str, Any] = {
        "m": d.m,
        "n_y": d.n_y,
        "p": norm_name(d.p),
        "eps_w": [float(x) for x in d.noise.eps_w],
        "eps_v": [float(x) for x in d.noise.eps_v],
        "domain": {"lower": [float(x) for x in d.domain.lower],
                   "upper": [float(x) for x in d.domain.upper]},
        "trajectories": files,
    }
    if "seed" in d.meta:
        manifest["seed"] = d.meta["seed"]
    extra = {k: v for k, v in d.meta.items() if k != "seed"}
    if extra:
        manifest["generator"] = extra
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2))


def _field(manifest, key, kind, where):
    if key not in manifest:
        raise DatasetFormatError(f"{where}: missing field '{key}'")
    val = manifest[key]
    if kind == "int" and not (isinstance(val, int) and not isinstance(val, bool)):
        raise DatasetFormatError(f"{where}: field '{key}' must be an integer")
    if kind == "vec":
        if not isinstance(val, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                for x in val):
            raise DatasetFormatError(f"{where}: field '{key}' must be a list of numbers")
    return val


def load_dataset(path) -> TrajectoryDataset:
    path = Path(path)
    mpath = path / "manifest.json"
    try:
        manifest = json.loads(mpath.read_text())
    except OSError as exc:
        raise DatasetFormatError(f"{mpath}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{mpath}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    where = str(mpath)
    m = _field(manifest, "m", "int", where)
    n_y = _field(manifest, "n_y", "int", where)
    try:
        p = parse_norm(_field(manifest, "p", None, where))
    except ValueError as exc:
        raise DatasetFormatError(f"{where}: field 'p': {exc}") from exc
    eps_w = _field(manifest, "eps_w", "vec", where)
    eps_v = _field(manifest, "eps_v", "vec", where)
    dom = _field(manifest, "domain", None, where)
    if not isinstance(dom, dict):
        raise DatasetFormatError(f"{where}: field 'domain' must be an object")
    lower = _field(dom, "lower", "vec", where + ": domain")
    upper = _field(dom, "upper", "vec", where + ": domain")
    for key, vec in (("eps_w", eps_w), ("eps_v", eps_v), ("domain.lower", lower), ("domain.upper", upper)):
        if len(vec) != m:
            raise DatasetFormatError(f"{where}: field '{key}' has length {len(vec)}, expected m={m}")
    files = _field(manifest, "trajectories", None, where)
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise DatasetFormatError(f"{where}: field 'trajectories' must be a list of file names")
    trajs = [read_trajectory_csv(path / f, m=m) for f in files]
    meta = dict(manifest.get("generator", {}))
    if "seed" in manifest:
        meta["seed"] = manifest["seed"]
    try:
        return TrajectoryDataset(tuple(trajs), m, n_y, NoiseBounds(eps_w, eps_v),
                                 OutputDomain(lower, upper), p, meta)
    except ValueError as exc:
        raise DatasetFormatError(f"{where}: {exc}") from exc


def make_dataset(trajectories: Sequence, *, n_y: int = 1, eps_w, eps_v, lower, upper,
                 p=math.inf, meta: dict | None = None) -> TrajectoryDataset:
    """Convenience constructor from plain arrays."""
    eps_w = np.atleast_1d(np.asarray(eps_w, dtype=float))
    m = eps_w.shape[0]
    trajs = []
    for t in trajectories:
        arr = np.asarray(getattr(t, "samples", t), dtype=float)
        # flat input is read as a scalar series; 2-D arrays keep their shape
        trajs.append(Trajectory(arr.reshape(-1, m) if arr.ndim < 2 else arr))
    return TrajectoryDataset(tuple(trajs), m, n_y, NoiseBounds(eps_w, eps_v), OutputDomain(lower, upper), p,
                             dict(meta or {}))
