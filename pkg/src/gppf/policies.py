"""
Variance-driven query policies with and without movement cost.

All three rules rank the unsampled grid points by predictive variance:

* ``conventional``: highest variance anywhere.
* ``normalized``: highest variance divided by planar distance from the
  current position.
* ``constrained:<m>``: highest variance within a planar radius of ``m`` grid
  steps; when that disc holds no unsampled point the agent moves to the
  nearest unsampled point instead.

Ties go to the smallest flattened grid index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CONSTRAINED",
    "CONVENTIONAL",
    "DEFAULT_HORIZONS",
    "NORMALIZED",
    "Policy",
    "SelectionContext",
    "candidate_set",
    "default_policies",
    "select_next",
]

CONVENTIONAL = "conventional"
NORMALIZED = "normalized"
CONSTRAINED = "constrained"

DEFAULT_HORIZONS = (1, 2, 3, 5, 7, 10)

# keeps points lying exactly on the horizon circle inside it
HORIZON_EPS = 1e-9


@dataclass(frozen=True)
class Policy:
    kind: str
    horizon: int | None = None

    def __post_init__(self):
        if self.kind == CONSTRAINED:
            if (isinstance(self.horizon, bool) or not isinstance(self.horizon, (int, np.integer))
                    or self.horizon < 1):
                raise ValueError(
                    f"horizon multiplier must be a positive integer, got {self.horizon!r}")
        elif self.kind in (CONVENTIONAL, NORMALIZED):
            if self.horizon is not None:
                raise ValueError(f"{self.kind} policy takes no horizon")
        else:
            raise ValueError(f"unknown policy kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Policy":
        """Parse ``conventional``, ``normalized`` or ``constrained:<m>``."""
        text = text.strip().lower()
        if text in (CONVENTIONAL, NORMALIZED):
            return cls(text)
        kind, sep, m = text.partition(":")
        if kind != CONSTRAINED or not sep:
            raise ValueError(
                f"bad policy {text!r}; expected conventional, normalized or constrained:<m>")
        try:
            horizon = int(m)
        except ValueError:
            raise ValueError(f"bad horizon multiplier {m!r}") from None
        return cls(CONSTRAINED, horizon)

    @property
    def label(self) -> str:
        return f"{CONSTRAINED}:{self.horizon}" if self.kind == CONSTRAINED else self.kind

    @property
    def slug(self) -> str:
        """Filename-safe form of the label."""
        return self.label.replace(":", "-")

    def __str__(self):
        return self.label


def default_policies() -> list[Policy]:
    """The eight strategies of the standard campaign, horizons first."""
    return ([Policy(CONSTRAINED, m) for m in DEFAULT_HORIZONS]
            + [Policy(NORMALIZED), Policy(CONVENTIONAL)])


@dataclass
class SelectionContext:
    """
    Model state seen by a policy at one decision.

    ``variances`` and ``unsampled`` are per grid point; ``positions`` holds the
    planar coordinates and ``step`` the grid spacing.
    """
    variances: np.ndarray
    positions: np.ndarray
    current: int
    unsampled: np.ndarray
    step: float

    def __post_init__(self):
        self.variances = np.asarray(self.variances, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        self.unsampled = np.asarray(self.unsampled, dtype=bool)
        n = self.variances.shape[0]
        if self.positions.shape != (n, 2) or self.unsampled.shape != (n,):
            raise ValueError("variances, positions and unsampled mask disagree in length")
        if not 0 <= self.current < n:
            raise IndexError(f"current index {self.current} out of range")

    def planar_distances(self) -> np.ndarray:
        d = self.positions - self.positions[self.current]
        return np.sqrt(np.einsum("ij,ij->i", d, d))


def _open_indices(ctx: SelectionContext) -> np.ndarray:
    idx = np.flatnonzero(ctx.unsampled)
    if idx.size == 0:
        raise ValueError("no unsampled points left to choose from")
    return idx


def _constrained_candidates(policy, ctx, dist, idx):
    radius = policy.horizon * ctx.step * (1 + HORIZON_EPS)
    inside = idx[dist[idx] <= radius]
    if inside.size:
        return inside, False
    nearest = idx[np.argmin(dist[idx])]
    return np.array([nearest]), True


def candidate_set(policy: Policy, ctx: SelectionContext) -> np.ndarray:
    """Grid indices the policy maximizes over, after any horizon fallback."""
    idx = _open_indices(ctx)
    if policy.kind != CONSTRAINED:
        return idx
    return _constrained_candidates(policy, ctx, ctx.planar_distances(), idx)[0]


def select_next(policy: Policy, ctx: SelectionContext,
                return_fallback: bool = False):
    """
    Index of the next sampling location.

    With ``return_fallback=True`` returns ``(index, fallback)`` where
    ``fallback`` flags a constrained move to the nearest unsampled point
    because the horizon held no candidate.
    """
    idx = _open_indices(ctx)
    fallback = False
    if policy.kind == CONVENTIONAL:
        score = ctx.variances[idx]
    elif policy.kind == NORMALIZED:
        dist = ctx.planar_distances()[idx]
        assert np.all(dist > 0), "current position must not be in the unsampled set"
        score = ctx.variances[idx] / dist
    else:
        idx, fallback = _constrained_candidates(policy, ctx, ctx.planar_distances(), idx)
        score = ctx.variances[idx]
    choice = int(idx[np.argmax(score)])
    return (choice, fallback) if return_fallback else choice
