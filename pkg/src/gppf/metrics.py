"""
Convergence metrics for an RMSE trace, based on a 2% settling band.

With ``e0`` the first and ``ef`` the last RMSE of a trial, the convergence
error is ``e_c = ef + 0.02 (e0 - ef)``. The convergence sample is the first
one whose RMSE is closest to ``e_c``; samples and distance up to it are
scaled by the sample budget and the grid length, and both are multiplied by
the range-normalized error to give the two combined scores.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .surfaces import SurfaceGrid

__all__ = [
    "ConvergenceReport",
    "METRICS",
    "NormalizationConstants",
    "PAPER_TARGET_RANGE",
    "convergence_error",
    "distance_until_convergence",
    "full_report",
    "normalization_for",
    "samples_until_convergence",
    "settling_band",
]

SETTLING_FRACTION = 0.02

# target ranges used to normalize the published tables
PAPER_TARGET_RANGE = {"parabola": 2.00, "townsend": 5.59, "lunar": 0.50}

# aggregated per policy, lower is better for all
METRICS = ("e_c", "e_n", "i_c", "d_c", "e_dc", "e_ic")


@dataclass(frozen=True)
class NormalizationConstants:
    target_range: float
    i_max: int
    domain_length: float

    def __post_init__(self):
        if not (self.target_range > 0 and self.i_max > 0 and self.domain_length > 0):
            raise ValueError(f"normalization constants must be positive: {self}")


def normalization_for(surface: SurfaceGrid, i_max: int,
                      mode: str = "computed") -> NormalizationConstants:
    """
    Constants for ``surface``: measured from the grid (``computed``) or the
    published target range for its family (``paper``).
    """
    length = surface.domain_length
    if not np.isclose(length, float(surface.axis2[-1] - surface.axis2[0]), rtol=1e-12):
        raise ValueError("grid is not square; grid length is ambiguous")
    if mode == "computed":
        return NormalizationConstants(surface.target_range, i_max, length)
    if mode == "paper":
        return NormalizationConstants(PAPER_TARGET_RANGE[surface.family], i_max, length)
    raise ValueError(f"unknown normalization mode {mode!r}")


@dataclass(frozen=True)
class ConvergenceReport:
    e0: float
    ef: float
    settling_band: float
    e_c: float
    e_n: float
    i_c: float
    d_c: float
    e_dc: float
    e_ic: float
    convergence_index: int

    def as_dict(self) -> dict:
        return asdict(self)


def settling_band(e0: float, ef: float) -> float:
    return SETTLING_FRACTION * (e0 - ef)


def convergence_error(trace) -> float:
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise ValueError("empty RMSE trace")
    return float(trace[-1] + settling_band(trace[0], trace[-1]))


def samples_until_convergence(trace, e_c: float, i_max: int) -> tuple[int, float]:
    """
    1-based index of the first sample whose error is closest to ``e_c``,
    and that index divided by ``i_max``.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise ValueError("empty RMSE trace")
    if i_max <= 0:
        raise ValueError("i_max must be positive")
    index = int(np.argmin(np.abs(trace - e_c))) + 1
    return index, index / i_max


def distance_until_convergence(record, convergence_index: int,
                               domain_length: float) -> float:
    """Cumulative traveled distance through the convergence sample, over the grid length."""
    cum = record.cum_distance_trace
    if not 1 <= convergence_index <= len(cum):
        raise IndexError(f"convergence index {convergence_index} outside the record")
    return float(cum[convergence_index - 1]) / domain_length


def full_report(record, norms: NormalizationConstants) -> ConvergenceReport:
    """
    All convergence metrics for a record exposing ``rmse_trace`` and
    ``cum_distance_trace``.
    """
    trace = np.asarray(record.rmse_trace, dtype=float)
    e0, ef = float(trace[0]), float(trace[-1])
    e_c = convergence_error(trace)
    index, i_c = samples_until_convergence(trace, e_c, norms.i_max)
    d_c = distance_until_convergence(record, index, norms.domain_length)
    e_n = e_c / norms.target_range
    return ConvergenceReport(
        e0=e0, ef=ef, settling_band=settling_band(e0, ef), e_c=e_c, e_n=e_n,
        i_c=i_c, d_c=d_c, e_dc=e_n * d_c, e_ic=e_n * i_c, convergence_index=index)
