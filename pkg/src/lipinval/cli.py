"""Command-line interface: ``lipinval <command> ...``."""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from pathlib import Path

import numpy as np

from . import swarmsim
from .abstraction import build_abstraction, envelope
from .dataset import DatasetFormatError, build_regressor_dataset, load_dataset, read_trajectory_csv
from .downsampling import from_options
from .invalidation import InconclusiveError, InvalidationProblem, invalidate
from .lipschitz import InconsistentDataError, PacParams, estimate_lipschitz, pac_sample_size

EXIT_NOT_INVALIDATED = 0
EXIT_INVALIDATED = 3
EXIT_INCONCLUSIVE = 4


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _lipschitz(args, reg) -> np.ndarray:
    if args.lip is not None:
        lip = np.array(_floats(args.lip))
        if lip.size == 1:
            lip = np.full(reg.m, lip[0])
    else:
        lip = estimate_lipschitz(reg)
    return lip * args.lip_scale


def _add_lip_options(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lip", help="Lipschitz constants, one per output (or one for all)")
    group.add_argument("--estimate-lip", action="store_true", help="estimate from the dataset (default)")
    p.add_argument("--lip-scale", type=float, default=1.0, help="multiply the constants by this factor")


# --------------------------------------------------------------------------
# commands

def cmd_gen(args) -> int:
    overrides = {"horizon": args.T, "init_spread": args.randomize_init}
    if args.centroid != "dynamic":
        overrides["centroid_mode"] = tuple(_floats(args.centroid))
    if args.meas_noise:
        overrides["meas_noise"] = tuple(_floats(args.meas_noise))
    data = swarmsim.generate_benchmark(args.kp, args.traj, args.out, seed=args.seed, **overrides)
    print(f"wrote {data.N} trajectories (m={data.m}, T={args.T}) to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    reg = build_regressor_dataset(load_dataset(args.dataset))
    lip = estimate_lipschitz(reg, max_pairs=args.max_pairs)
    print("L_hat", " ".join(repr(float(v)) for v in lip))
    if args.pac_eps is not None:
        need = pac_sample_size(PacParams(args.pac_eps, args.pac_delta))
        pairs = len(reg) * (len(reg) - 1) // 2
        print(f"pac_sample_size {need} (available pairs of samples: {pairs})")
    return 0


def _grid_points(lo, hi, count: int) -> np.ndarray:
    axes = [np.linspace(a, b, count) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(lo))


def cmd_abstract_eval(args) -> int:
    reg = build_regressor_dataset(load_dataset(args.dataset))
    abst = build_abstraction(reg, _lipschitz(args, reg))
    if args.points:
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2, comments="#")
    else:
        lo, hi = reg.domain.regressor_box(reg.n_y)
        pts = _grid_points(lo, hi, args.grid)
    upper, lower = envelope(abst, pts)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow([f"s_{d + 1}" for d in range(reg.n)] + [f"fbar_{i + 1}" for i in range(reg.m)]
                        + [f"flow_{i + 1}" for i in range(reg.m)])
        for s, u, l in zip(pts, upper, lower):
            writer.writerow([repr(float(v)) for v in (*s, *u, *l)])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_invalidate(args) -> int:
    data = load_dataset(args.dataset)
    reg = build_regressor_dataset(data)
    if args.pairs is not None:
        reg = reg.subset(np.arange(min(args.pairs, len(reg))))
    abst = build_abstraction(reg, _lipschitz(args, reg))
    obs = read_trajectory_csv(args.trajectory, m=data.m)
    param = {"grid": args.grid_size, "kmeans": args.clusters, "knn": args.knn}.get(args.downsample)
    ds = from_options(args.downsample, param, seed=args.seed)
    prob = InvalidationProblem(abst, obs.samples, downsampler=ds)
    try:
        verdict = invalidate(prob, audit=args.audit, dump_path=args.dump_lp)
    except InconclusiveError as exc:
        print(f"verdict: inconclusive ({exc})")
        return EXIT_INCONCLUSIVE
    st = verdict.stats
    label = verdict.outcome.value + (f" (by {verdict.by})" if verdict.by else "")
    print(f"verdict: {label}")
    if verdict.prescreen_hit is not None:
        k, j, i = verdict.prescreen_hit
        print(f"prescreen: step {k}, pair {j}, output {i + 1}")
    if verdict.audit_status is not None:
        print(f"audit: solver says {verdict.audit_status.value}")
    print(f"constraints: {st.constraints}  binaries: {st.binaries}  nodes: {st.nodes}  pivots: {st.pivots}")
    print(f"active pairs per step: {' '.join(map(str, st.active_pairs))}")
    print(f"wall_ms: {1000 * st.wall_time:.3f}")
    if args.witness and verdict.y is not None:
        np.savetxt(args.witness, verdict.y, delimiter=",")
    return EXIT_INVALIDATED if verdict.invalidated else EXIT_NOT_INVALIDATED


def _benchmark_data(args):
    """Load the training and test sets, generating them first if asked."""
    train_dir, test_dir = Path(args.train), Path(args.test)
    if args.generate:
        cfg = swarmsim.SwarmConfig(init_spread=args.randomize_init)
        if not (train_dir / "manifest.json").exists():
            swarmsim.generate_benchmark(0.5, args.train_traj, train_dir, cfg, seed=args.seed)
        if not (test_dir / "manifest.json").exists():
            swarmsim.generate_benchmark(args.test_kp, args.test_traj, test_dir, cfg, seed=args.seed + 1000)
    return load_dataset(train_dir), load_dataset(test_dir)


def cmd_sweep(args) -> int:
    from .sweep import SweepSpec, parse_downsampler, run_sweep

    train, test = _benchmark_data(args)
    spec = SweepSpec(
        sizes=_ints(args.sizes),
        downsamplers=[parse_downsampler(s) for s in args.downsamplers.split(",")],
        lip=None if args.lip is None else _floats(args.lip),
        lip_scale=args.lip_scale,
        timing_repeats=args.timing_repeats,
        audit=args.audit,
        jobs=args.jobs,
        seed=args.seed,
    )
    extra = {"train": str(args.train), "test": str(args.test)}
    rows = run_sweep(train, test.trajectories, spec, args.out, args.aggregate, extra)
    bad = sum(r.verdict == "inconclusive" for r in rows)
    print(f"wrote {len(rows)} rows to {args.out}" + (f" ({bad} inconclusive)" if bad else ""))
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(seed=args.seed, size=args.size) else 1


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipinval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="simulate the swarm benchmark")
    p.add_argument("--kp", type=float, required=True)
    p.add_argument("--traj", type=int, required=True)
    p.add_argument("--T", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--randomize-init", type=float, default=0.0, metavar="SPREAD",
                   help="perturb every initial state entry uniformly within +-SPREAD")
    p.add_argument("--centroid", default="dynamic", help="'dynamic' or a fixed 'cx,cy'")
    p.add_argument("--meas-noise", help="measurement noise bounds (3 or 3*agents values)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("estimate-lipschitz", help="estimate Lipschitz constants of a dataset")
    p.add_argument("dataset")
    p.add_argument("--max-pairs", type=int)
    p.add_argument("--pac-eps", type=float)
    p.add_argument("--pac-delta", type=float, default=0.05)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("abstract", help="envelope utilities")
    asub = p.add_subparsers(dest="action", required=True)
    e = asub.add_parser("eval", help="evaluate the envelopes on a grid or at given points")
    e.add_argument("dataset")
    e.add_argument("--grid", type=int, default=11, help="grid points per regressor coordinate")
    e.add_argument("--points", help="CSV of query points (one per row)")
    e.add_argument("--out")
    _add_lip_options(e)
    e.set_defaults(func=cmd_abstract_eval)

    p = sub.add_parser("invalidate", help="invalidate one observed trajectory")
    p.add_argument("dataset")
    p.add_argument("trajectory")
    p.add_argument("--downsample", choices=["none", "grid", "kmeans", "knn"], default="none")
    p.add_argument("--grid-size", type=int)
    p.add_argument("--clusters", type=int)
    p.add_argument("--knn", type=int)
    p.add_argument("--pairs", type=int, help="use only the first N data pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-lp", help="write the mixed-binary program in lpdump format")
    p.add_argument("--audit", action="store_true", help="solve even when the prescreen decides")
    p.add_argument("--witness", help="write the witness trajectory to this CSV")
    _add_lip_options(p)
    p.set_defaults(func=cmd_invalidate)

    p = sub.add_parser("sweep", help="run the data-size / downsampler experiment")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--sizes", default="16,48,112,208")
    p.add_argument("--downsamplers", default="none", help="comma list of none, grid:N, kmeans:K, knn:K")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--aggregate", default="aggregate.csv")
    p.add_argument("--lip")
    p.add_argument("--lip-scale", type=float, default=1.0)
    p.add_argument("--timing-repeats", type=int, default=1)
    p.add_argument("--audit", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generate", action="store_true", help="simulate missing train/test sets first")
    p.add_argument("--train-traj", type=int, default=14)
    p.add_argument("--test-traj", type=int, default=20)
    p.add_argument("--test-kp", type=float, default=-0.5)
    p.add_argument("--randomize-init", type=float, default=0.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run small oracle cross-checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=30)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetFormatError, InconsistentDataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
