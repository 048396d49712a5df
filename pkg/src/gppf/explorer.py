"""
Single exploration trial: a seeded random initialization walk followed by
the train / predict / select / traverse / measure loop.

Randomness comes from three kinds of stream, all derived from integer keys
so that no result depends on execution order:

* the walk stream ``(seed, WALK)`` picks the start point and the
  initialization walk;
* the noise for initialization sample ``k`` uses ``(seed, NOISE, k)``;
* the noise for policy sample ``k`` uses ``(policy_seed, NOISE, k)`` with
  ``policy_seed = hash64(seed, stream)``.

Every policy run with the same ``seed`` therefore shares its first
``init_count`` samples exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gp import AdamConfig, KernelHyperparams, TrainingSet, fit, predict, train_hyperparameters
from .policies import HORIZON_EPS, Policy, SelectionContext, select_next
from .surfaces import SurfaceGrid, measure, traversal_distance

__all__ = [
    "PAPER_STOPPING",
    "TrialConfig",
    "TrialRecord",
    "TrialState",
    "hash64",
    "initialize",
    "rmse",
    "run_trial",
    "step",
    "stopping_count",
]

# stopping counts per surface family used for the published campaigns
PAPER_STOPPING = {"parabola": 109, "townsend": 109, "lunar": 155}

_WALK = 0x57A1
_NOISE = 0x401E
_U64 = (1 << 64) - 1


def hash64(*keys: int) -> int:
    """Mix integer keys into one 64-bit seed."""
    seq = np.random.SeedSequence([int(k) & _U64 for k in keys])
    return int(seq.generate_state(1, np.uint64)[0])


def _stream(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) & _U64 for k in keys]))


def stopping_count(surface: SurfaceGrid, mode: str = "paper") -> int:
    """Sample budget: the published count for the family, or a quarter of the grid."""
    if mode == "paper":
        return PAPER_STOPPING[surface.family]
    if mode == "computed":
        return surface.n_points // 4
    raise ValueError(f"unknown stopping mode {mode!r}")


def rmse(mean: np.ndarray, truth: np.ndarray) -> float:
    return float(np.sqrt(np.mean((mean - truth) ** 2)))


@dataclass(frozen=True)
class TrialConfig:
    surface: SurfaceGrid
    policy: Policy
    n_samples: int
    seed: int
    stream: int = 0
    optimizer: AdamConfig = AdamConfig()
    init_hyperparams: KernelHyperparams = KernelHyperparams()
    init_count: int = 10
    init_horizon: int = 3
    warm_start: bool = True
    walk_from_start: bool = False

    def __post_init__(self):
        if not 1 <= self.init_count <= self.n_samples:
            raise ValueError(
                f"need 1 <= init_count ({self.init_count}) <= n_samples ({self.n_samples})")
        if self.n_samples > self.surface.n_points:
            raise ValueError(
                f"n_samples {self.n_samples} exceeds the {self.surface.n_points} grid points")
        if self.init_horizon < 1:
            raise ValueError("init_horizon must be a positive integer")

    @property
    def policy_seed(self) -> int:
        return hash64(self.seed, self.stream)


@dataclass
class TrialRecord:
    """
    Everything observed in one trial. All traces have one entry per sample;
    the first ``init_count`` RMSE, variance and hyperparameter entries repeat
    the single fit made after the initialization walk.
    """
    policy: str
    seed: int
    start: int
    waypoints: np.ndarray
    observations: np.ndarray
    rmse_trace: np.ndarray
    cum_distance_trace: np.ndarray
    variance_trace: np.ndarray
    fallback: np.ndarray
    hyperparam_trace: list = field(default_factory=list)

    def __len__(self):
        return len(self.waypoints)


@dataclass
class TrialState:
    config: TrialConfig
    start: int
    current: int
    unsampled: np.ndarray
    waypoints: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    rmse_trace: list = field(default_factory=list)
    cum_distance_trace: list = field(default_factory=list)
    variance_trace: list = field(default_factory=list)
    fallback: list = field(default_factory=list)
    hyperparam_trace: list = field(default_factory=list)
    hyperparams: KernelHyperparams | None = None
    distance: float = 0.0

    @property
    def n_taken(self) -> int:
        return len(self.waypoints)

    def training_set(self) -> TrainingSet:
        pos = self.config.surface.positions
        return TrainingSet(pos[self.waypoints], np.array(self.observations))

    def _move(self, nxt: int, fallback: bool, noise_rng) -> None:
        surface = self.config.surface
        self.distance += traversal_distance(surface, self.current, nxt)
        self.current = nxt
        self.unsampled[nxt] = False
        self.waypoints.append(nxt)
        self.observations.append(measure(surface, nxt, noise_rng))
        self.cum_distance_trace.append(self.distance)
        self.fallback.append(fallback)

    def _record_fit(self, hp: KernelHyperparams, repeat: int = 1) -> None:
        surface = self.config.surface
        post = predict(fit(self.training_set(), hp), surface.positions)
        err = rmse(post.mean, surface.target)
        var = float(post.variance.mean())
        self.rmse_trace.extend([err] * repeat)
        self.variance_trace.extend([var] * repeat)
        self.hyperparam_trace.extend([hp] * repeat)

    def record(self) -> TrialRecord:
        return TrialRecord(
            policy=self.config.policy.label,
            seed=self.config.seed,
            start=self.start,
            waypoints=np.array(self.waypoints, dtype=np.int64),
            observations=np.array(self.observations),
            rmse_trace=np.array(self.rmse_trace),
            cum_distance_trace=np.array(self.cum_distance_trace),
            variance_trace=np.array(self.variance_trace),
            fallback=np.array(self.fallback, dtype=bool),
            hyperparam_trace=list(self.hyperparam_trace),
        )


def initialize(config: TrialConfig) -> TrialState:
    """
    Random start, then ``init_count`` samples each drawn uniformly from the
    unsampled points within ``init_horizon`` grid steps of the previous
    sample (of the start point when ``walk_from_start``), and a first fit.
    """
    surface = config.surface
    walk = _stream(config.seed, _WALK)
    start = int(walk.integers(surface.n_points))
    state = TrialState(config, start, start, np.ones(surface.n_points, dtype=bool))
    radius = config.init_horizon * surface.step * (1 + HORIZON_EPS)
    pos = surface.positions
    for k in range(config.init_count):
        anchor = start if config.walk_from_start else state.current
        open_idx = np.flatnonzero(state.unsampled)
        dist = np.linalg.norm(pos[open_idx] - pos[anchor], axis=1)
        near = open_idx[dist <= radius]
        if near.size:
            nxt, fb = int(near[walk.integers(near.size)]), False
        else:
            nxt, fb = int(open_idx[np.argmin(dist)]), True
        state._move(nxt, fb, _stream(config.seed, _NOISE, k))

    hp = train_hyperparameters(state.training_set(), config.init_hyperparams, config.optimizer)
    state.hyperparams = hp
    state._record_fit(hp, repeat=config.init_count)
    return state


def step(state: TrialState) -> TrialState:
    """One policy-driven sample. Mutates and returns ``state``."""
    config = state.config
    surface = config.surface
    if state.n_taken >= config.n_samples:
        raise RuntimeError("sample budget already spent")
    hp0 = state.hyperparams if config.warm_start else config.init_hyperparams
    hp = train_hyperparameters(state.training_set(), hp0, config.optimizer)
    post = predict(fit(state.training_set(), hp), surface.positions)
    ctx = SelectionContext(post.variance, surface.positions, state.current,
                           state.unsampled, surface.step)
    nxt, fb = select_next(config.policy, ctx, return_fallback=True)
    state._move(nxt, fb, _stream(config.policy_seed, _NOISE, state.n_taken))
    state.hyperparams = hp
    state._record_fit(hp)
    return state


def run_trial(config: TrialConfig) -> TrialRecord:
    state = initialize(config)
    while state.n_taken < config.n_samples:
        step(state)
    return state.record()
