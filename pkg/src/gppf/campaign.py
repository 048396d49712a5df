"""
Campaigns: every policy explored on one surface over several seeded trials,
aggregated into per-policy summaries and written to disk.

Output layout under the run directory::

    manifest.json                 resolved configuration, seeds, failures
    summary.csv                   one row per policy, mean and std of each metric
    traces/<policy>/trial_NN.csv  one row per sample
    curves/<policy>.csv           mean/std of NRMSE and distance per sample
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .explorer import TrialConfig, TrialRecord, hash64, run_trial, stopping_count
from .gp import AdamConfig, KernelHyperparams
from .metrics import (METRICS, ConvergenceReport, NormalizationConstants, full_report,
                      normalization_for)
from .policies import Policy, default_policies
from .surfaces import SurfaceGrid, SurfaceKind, build_surface

__all__ = [
    "CampaignConfig",
    "PolicySummary",
    "Trace",
    "best_worst",
    "export_curves",
    "persist",
    "read_trace",
    "reports_from_dir",
    "run_campaign",
    "write_trace",
]

TRACE_HEADER = ["step", "x1", "x2", "elevation", "measured_y", "rmse",
                "cum_distance", "fallback_move"]
SUMMARY_HEADER = ["policy", "e_c_mean", "e_c_std", "i_c_mean", "i_c_std", "d_c_mean",
                  "d_c_std", "e_dc_mean", "e_dc_std", "e_ic_mean", "e_ic_std",
                  "n_trials_ok"]
CURVE_HEADER = ["step", "cum_distance_mean", "cum_distance_std", "nrmse_mean",
                "nrmse_std"]


@dataclass(frozen=True)
class CampaignConfig:
    surface: SurfaceKind
    policies: tuple = field(default_factory=lambda: tuple(default_policies()))
    n_trials: int = 10
    base_seed: int = 0
    shared_start: bool = True
    normalization: str = "computed"
    stopping: str = "paper"
    noise_std: float | None = None
    townsend_classic: bool = False
    warm_start: bool = True
    optimizer: AdamConfig = AdamConfig()
    init_hyperparams: KernelHyperparams = KernelHyperparams()
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(self.policies))
        if not self.policies:
            raise ValueError("campaign needs at least one policy")
        if len({p.label for p in self.policies}) != len(self.policies):
            raise ValueError("duplicate policies in campaign")
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.normalization not in ("computed", "paper"):
            raise ValueError(f"unknown normalization mode {self.normalization!r}")
        if self.stopping not in ("computed", "paper"):
            raise ValueError(f"unknown stopping mode {self.stopping!r}")

    def build_surface(self) -> SurfaceGrid:
        return build_surface(self.surface, self.noise_std, self.townsend_classic)

    def trial_seed(self, trial: int) -> int:
        return hash64(self.base_seed, trial)

    def trial_config(self, surface: SurfaceGrid, trial: int, p: int) -> TrialConfig:
        seed = self.trial_seed(trial)
        if not self.shared_start:
            seed = hash64(seed, p, 1)
        return TrialConfig(
            surface=surface, policy=self.policies[p],
            n_samples=stopping_count(surface, self.stopping), seed=seed, stream=p,
            optimizer=self.optimizer, init_hyperparams=self.init_hyperparams,
            warm_start=self.warm_start)


@dataclass
class PolicySummary:
    policy: str
    reports: list
    records: list = field(default_factory=list, repr=False)
    errors: list = field(default_factory=list)

    @property
    def ok_reports(self) -> list[ConvergenceReport]:
        return [r for r in self.reports if r is not None]

    @property
    def n_ok(self) -> int:
        return len(self.ok_reports)

    def values(self, metric: str) -> np.ndarray:
        if metric not in METRICS:
            raise KeyError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
        return np.array([getattr(r, metric) for r in self.ok_reports])

    def mean(self, metric: str) -> float:
        v = self.values(metric)
        return float(np.mean(v)) if v.size else float("nan")

    def std(self, metric: str) -> float:
        v = self.values(metric)
        if v.size == 0:
            return float("nan")
        return float(np.std(v, ddof=1)) if v.size > 1 else 0.0

    @property
    def failed_trials(self) -> list[int]:
        return [t for t, r in enumerate(self.reports) if r is None]


def _run_task(task):
    config, norms = task
    try:
        with threadpool_limits(1):
            record = run_trial(config)
        return record, full_report(record, norms), None
    except Exception as err:  # one bad trial must not sink the campaign
        return None, None, f"{type(err).__name__}: {err}"


def run_campaign(config: CampaignConfig,
                 surface: SurfaceGrid | None = None) -> list[PolicySummary]:
    """
    Run ``n_trials`` trials of every policy and summarize them per policy.

    Trial ``t`` uses seed ``hash64(base_seed, t)``; with ``shared_start`` all
    policies in a trial share their start point and initialization walk.
    Failed trials are kept as ``None`` reports with their error message.
    """
    surface = surface if surface is not None else config.build_surface()
    i_max = stopping_count(surface, config.stopping)
    norms = normalization_for(surface, i_max, config.normalization)
    tasks = [(config.trial_config(surface, t, p), norms)
             for t in range(config.n_trials) for p in range(len(config.policies))]
    if config.jobs == 1:
        results = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_task, tasks))

    summaries = [PolicySummary(p.label, []) for p in config.policies]
    for (task, _), (record, report, error) in zip(tasks, results):
        s = summaries[task.stream]
        s.records.append(record)
        s.reports.append(report)
        s.errors.append(error)
    return summaries


def best_worst(summaries, metric: str) -> tuple[str, str]:
    """Labels of the policies with the lowest and highest mean ``metric``."""
    if not summaries:
        raise ValueError("no summaries")
    means = np.array([s.mean(metric) for s in summaries])
    if np.all(np.isnan(means)):
        raise ValueError("no policy has a successful trial")
    return summaries[int(np.nanargmin(means))].policy, summaries[int(np.nanargmax(means))].policy


# --- files -----------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_trace(record: TrialRecord, surface: SurfaceGrid, path) -> None:
    pos = surface.positions
    rows = [
        [k + 1, _fmt(pos[w, 0]), _fmt(pos[w, 1]), _fmt(surface.elevation[w]),
         _fmt(record.observations[k]), _fmt(record.rmse_trace[k]),
         _fmt(record.cum_distance_trace[k]), int(record.fallback[k])]
        for k, w in enumerate(record.waypoints)
    ]
    _atomic_write(path, _csv_text(TRACE_HEADER, rows))


@dataclass
class Trace:
    """A trial as read back from its trace file."""
    x1: np.ndarray
    x2: np.ndarray
    elevation: np.ndarray
    observations: np.ndarray
    rmse_trace: np.ndarray
    cum_distance_trace: np.ndarray
    fallback: np.ndarray


def read_trace(path) -> Trace:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_HEADER:
        raise ValueError(f"{path}: not a trace file (bad header)")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from None
    data = data.reshape(-1, len(TRACE_HEADER))
    return Trace(data[:, 1], data[:, 2], data[:, 3], data[:, 4], data[:, 5], data[:, 6],
                 data[:, 7].astype(bool))


def curve_rows(traces, target_range: float) -> list:
    """Per-sample mean and std (ddof 1) of cumulative distance and NRMSE."""
    n = min(len(t.rmse_trace) for t in traces)
    dist = np.array([t.cum_distance_trace[:n] for t in traces])
    nrmse = np.array([t.rmse_trace[:n] for t in traces]) / target_range
    ddof = 1 if len(traces) > 1 else 0
    stats = [dist.mean(0), dist.std(0, ddof=ddof), nrmse.mean(0), nrmse.std(0, ddof=ddof)]
    return [[k + 1] + [_fmt(s[k]) for s in stats] for k in range(n)]


def _trace_path(root: Path, slug: str, trial: int) -> Path:
    return root / "traces" / slug / f"trial_{trial:02d}.csv"


def _run_trace_files(root: Path, manifest: dict, label: str) -> list[Path]:
    """Trace files of the trials in ``manifest`` that succeeded, in trial order."""
    failed = {f["trial"] for f in manifest["failures"] if f["policy"] == label}
    slug = Policy.parse(label).slug
    return [_trace_path(root, slug, t) for t in range(manifest["n_trials"])
            if t not in failed]


def _summary_rows(summaries):
    rows = []
    for s in summaries:
        row = [s.policy]
        for m in ("e_c", "i_c", "d_c", "e_dc", "e_ic"):
            row += [_fmt(s.mean(m)), _fmt(s.std(m))]
        rows.append(row + [s.n_ok])
    return rows


def _manifest(config: CampaignConfig, surface: SurfaceGrid, summaries) -> dict:
    i_max = stopping_count(surface, config.stopping)
    norms = normalization_for(surface, i_max, config.normalization)
    kind = config.surface
    return {
        "package": "gppf",
        "version": __version__,
        "surface": {
            "kind": kind.kind,
            "dem_path": None if kind.dem_path is None else str(kind.dem_path),
            "name": surface.name,
            "family": surface.family,
            "n_points": surface.n_points,
            "step": surface.step,
            "noise_std": surface.noise_std,
            "target_range": surface.target_range,
            "townsend_classic": config.townsend_classic,
        },
        "policies": [p.label for p in config.policies],
        "n_trials": config.n_trials,
        "base_seed": config.base_seed,
        "trial_seeds": [config.trial_seed(t) for t in range(config.n_trials)],
        "shared_start": config.shared_start,
        "stopping": config.stopping,
        "n_samples": i_max,
        "normalization": {"mode": config.normalization, **asdict(norms)},
        "warm_start": config.warm_start,
        "optimizer": asdict(config.optimizer),
        "init_hyperparams": asdict(config.init_hyperparams),
        "failures": [
            {"policy": s.policy, "trial": t, "error": s.errors[t]}
            for s in summaries for t in s.failed_trials
        ],
    }


def persist(summaries, config: CampaignConfig, output_dir,
            surface: SurfaceGrid | None = None) -> list[Path]:
    """
    Write traces, summary, manifest and curves for a finished campaign.
    Returns the written paths. Output is a pure function of the inputs.
    """
    root = Path(output_dir)
    surface = surface if surface is not None else config.build_surface()
    policies = {p.label: p for p in config.policies}
    written = []
    for s in summaries:
        slug = policies[s.policy].slug
        for t, record in enumerate(s.records):
            if record is not None:
                path = _trace_path(root, slug, t)
                write_trace(record, surface, path)
                written.append(path)

    path = root / "summary.csv"
    _atomic_write(path, _csv_text(SUMMARY_HEADER, _summary_rows(summaries)))
    written.append(path)

    manifest = _manifest(config, surface, summaries)
    path = root / "manifest.json"
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(path)

    written += export_curves(root)
    return written


def export_curves(run_dir, out_dir=None) -> list[Path]:
    """
    Rebuild the per-policy NRMSE-vs-distance curves from the trace files of a
    persisted run.
    """
    root = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else root / "curves"
    try:
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FileNotFoundError(f"{root}: no manifest.json; not a campaign directory") from None
    target_range = manifest["normalization"]["target_range"]
    written = []
    for label in manifest["policies"]:
        slug = Policy.parse(label).slug
        files = _run_trace_files(root, manifest, label)
        if not files:
            continue
        rows = curve_rows([read_trace(f) for f in files], target_range)
        path = out / f"{slug}.csv"
        _atomic_write(path, _csv_text(CURVE_HEADER, rows))
        written.append(path)
    return written


def reports_from_dir(run_dir) -> dict:
    """Recompute per-trial reports from persisted traces, keyed by policy label."""
    root = Path(run_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    norms = NormalizationConstants(**{k: manifest["normalization"][k]
                                      for k in ("target_range", "i_max", "domain_length")})
    out = {}
    for label in manifest["policies"]:
        out[label] = [full_report(read_trace(f), norms)
                      for f in _run_trace_files(root, manifest, label)]
    return out
