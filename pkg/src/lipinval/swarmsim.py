"""Swarm of Dubins cars steering toward (or away from) their centroid.

Each agent has state ``(p_x, p_y, theta)`` and moves at constant speed.  A
proportional controller turns it toward the swarm centroid with gain ``kp``;
a negative gain turns it away.  Emitted outputs stack all agent states as
``[p_x1, p_y1, theta1, p_x2, ...]`` with uniform measurement noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .dataset import Trajectory, TrajectoryDataset, make_dataset, save_dataset

_S3 = math.sqrt(3.0)
DEFAULT_INIT = ((0.0, 0.0, 0.0), (12.0, 0.0, 2 * math.pi / 3), (6.0, 6 * _S3, -2 * math.pi / 3))
PROCESS_NOISE = (0.00025, 0.00025, 0.0001)
MEAS_NOISE = (0.001, 0.001, 0.0005)


@dataclass(frozen=True)
class SwarmConfig:
    num_agents: int = 3
    wheelbase: float = 1.5
    speed: float = 1.0
    dt: float = 0.1
    kp: float = 0.5
    steer_limit: float = math.pi / 8
    noise_bounds: tuple = PROCESS_NOISE
    meas_noise: tuple | None = None
    initial_states: tuple = DEFAULT_INIT
    horizon: int = 16
    centroid_mode: object = "dynamic"
    init_spread: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.steer_limit <= 0:
            raise ValueError("dt and steer_limit must be positive")
        if self.steer_limit >= math.pi / 2:
            raise ValueError("steer_limit must stay below pi/2")
        init = tuple(tuple(float(v) for v in s) for s in self.initial_states)
        if len(init) != self.num_agents or any(len(s) != 3 for s in init):
            raise ValueError("need one (p_x, p_y, theta) triple per agent")
        object.__setattr__(self, "initial_states", init)
        object.__setattr__(self, "noise_bounds", tuple(float(v) for v in self.noise_bounds))
        meas = MEAS_NOISE * self.num_agents if self.meas_noise is None else self.meas_noise
        meas = tuple(float(v) for v in meas)
        if len(meas) == 3 and self.num_agents > 1:
            meas = meas * self.num_agents
        if len(meas) != 3 * self.num_agents:
            raise ValueError("meas_noise needs 3 or 3*num_agents entries")
        object.__setattr__(self, "meas_noise", meas)
        if self.centroid_mode != "dynamic":
            cx, cy = self.centroid_mode
            object.__setattr__(self, "centroid_mode", (float(cx), float(cy)))
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    @property
    def m(self) -> int:
        return 3 * self.num_agents

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, tuple):
                out[key] = [list(v) if isinstance(v, tuple) else v for v in val]
        return out


def splitmix64(x: int) -> int:
    """One step of the splitmix64 generator, used to derive child seeds."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def trajectory_seeds(master: int, count: int) -> list[int]:
    """Seed for trajectory ``i`` is ``splitmix64(master * 2**32 + i)``."""
    return [splitmix64((int(master) << 32) + i) for i in range(count)]


def desired_heading(cfg: SwarmConfig, state: np.ndarray) -> np.ndarray:
    if cfg.centroid_mode == "dynamic":
        cx, cy = state[:, 0].mean(), state[:, 1].mean()
    else:
        cx, cy = cfg.centroid_mode
    return np.arctan2(cy - state[:, 1], cx - state[:, 0])


def steering(cfg: SwarmConfig, state: np.ndarray) -> np.ndarray:
    err = desired_heading(cfg, state) - state[:, 2]
    return np.clip(cfg.kp * err, -cfg.steer_limit, cfg.steer_limit)


def step(cfg: SwarmConfig, state, rng=None) -> np.ndarray:
    """Advance all agents one Euler step; ``rng=None`` gives the noise-free map."""
    state = np.asarray(state, dtype=float).reshape(cfg.num_agents, 3)
    u = steering(cfg, state)
    delta = np.stack([
        cfg.speed * np.cos(state[:, 2]) * cfg.dt,
        cfg.speed * np.sin(state[:, 2]) * cfg.dt,
        cfg.speed * np.tan(u) / cfg.wheelbase * cfg.dt,
    ], axis=1)
    nxt = state + delta
    if rng is not None:
        bound = np.array(cfg.noise_bounds)
        w = rng.uniform(-bound, bound, size=(cfg.num_agents, 3))
        nxt = nxt + w
    return nxt


def initial_state(cfg: SwarmConfig, rng=None) -> np.ndarray:
    init = np.array(cfg.initial_states, dtype=float)
    if cfg.init_spread > 0:
        if rng is None:
            raise ValueError("randomized initial states need an rng")
        init = init + rng.uniform(-cfg.init_spread, cfg.init_spread, size=init.shape)
    return init


def simulate(cfg: SwarmConfig, seed: int | None = None, noise: bool = True,
             return_states: bool = False):
    """One output trajectory of ``cfg.horizon`` samples.

    ``seed`` defaults to ``cfg.seed``.  With ``noise=False`` the run is the
    deterministic map from the (unperturbed) initial states.
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed) if noise else None
    state = initial_state(cfg, rng)
    meas = np.array(cfg.meas_noise)
    states, outputs = [], []
    for _ in range(cfg.horizon):
        y = state.reshape(-1).copy()
        states.append(y.copy())
        if rng is not None:
            y = y + rng.uniform(-meas, meas)
        outputs.append(y)
        state = step(cfg, state, rng)
    traj = Trajectory(np.array(outputs).reshape(cfg.horizon, cfg.m))
    if return_states:
        return traj, np.array(states)
    return traj


def domain_box(cfg: SwarmConfig) -> tuple[np.ndarray, np.ndarray]:
    """Fixed output box covering the benchmark's reachable positions and headings."""
    lower = np.tile([-6.0, -6.0, -math.pi], cfg.num_agents)
    upper = np.tile([18.0, 18.0, math.pi], cfg.num_agents)
    return lower, upper


def build_dataset(cfg: SwarmConfig, num_traj: int, seed: int = 0) -> TrajectoryDataset:
    seeds = trajectory_seeds(seed, num_traj)
    trajs = [simulate(cfg, s) for s in seeds]
    lower, upper = domain_box(cfg)
    meta = {"seed": int(seed), "name": "swarmsim", "kp": cfg.kp, "trajectory_seeds": [str(s) for s in seeds],
            "config": cfg.to_dict()}
    return make_dataset(trajs, n_y=1, eps_w=np.tile(cfg.noise_bounds, cfg.num_agents), eps_v=cfg.meas_noise,
                        lower=lower, upper=upper, p="inf", meta=meta)


def generate_benchmark(kp: float, num_traj: int, out_dir, cfg: SwarmConfig | None = None,
                       seed: int = 0, **overrides) -> TrajectoryDataset:
    """Simulate ``num_traj`` trajectories with gain ``kp`` and save them to ``out_dir``."""
    cfg = replace(cfg or SwarmConfig(), kp=kp, **overrides)
    if num_traj < 0:
        raise ValueError("num_traj must be nonnegative")
    data = build_dataset(cfg, num_traj, seed)
    save_dataset(data, Path(out_dir))
    return data
