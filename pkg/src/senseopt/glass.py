"""Aging diagnostics for optimization trajectories.

A control protocol is mapped to an effective spin vector sigma (inter-pulse
gaps, interleaved per-step phases, or pump switch timings); the growth law
of the two-time autocorrelation

    Delta(n_w, n_w + n) = (1/N) sum_i (sigma_i(n_w) - sigma_i(n_w + n))^2

over optimizer iterations n distinguishes power-law (Ising-like) from
logarithmic (planar, Heisenberg-like) landscape relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLATEAU_WINDOW = 5
PLATEAU_REL_CHANGE = 0.01
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class SpinVector:
    """Effective spin configuration of one protocol snapshot."""

    components: np.ndarray
    kind: str  # pi_gaps | continuous_phases | pump_timings

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.components, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    def __len__(self):
        return self.components.size


def to_spin_vector(protocol) -> SpinVector:
    """Map a protocol to its spin representation (duck-typed by family)."""
    if hasattr(protocol, "phi_x"):
        inter = np.empty(2 * protocol.n_steps)
        inter[0::2] = protocol.phi_x
        inter[1::2] = protocol.phi_y
        return SpinVector(inter, "continuous_phases")
    if hasattr(protocol, "pulse_times"):
        return SpinVector(protocol.gaps, "pi_gaps")
    if hasattr(protocol, "switch_times"):
        return SpinVector(np.asarray(protocol.switch_times, dtype=float), "pump_timings")
    raise TypeError(f"no spin mapping for {type(protocol).__name__}")


@dataclass(frozen=True)
class ProtocolTrajectory:
    """Spin-vector snapshots indexed by optimizer iteration."""

    snapshots: np.ndarray  # (n_recorded, N)
    kind: str = "pi_gaps"
    n_w: int = 5

    def __post_init__(self):
        s = np.asarray(self.snapshots, dtype=float)
        if s.ndim != 2:
            raise ValueError("snapshots must be a 2-d (iterations, N) array")
        object.__setattr__(self, "snapshots", s)

    @classmethod
    def from_record(cls, record, kind: str, n_w: int = 5):
        """Build from a RunRecord, truncating at the first dimension change."""
        return cls(record.snapshot_matrix(), kind, n_w)

    @property
    def max_lag(self) -> int:
        return self.snapshots.shape[0] - 1 - self.n_w


def two_time_autocorr(traj: ProtocolTrajectory, n_w: int, n: int) -> float:
    """Delta(n_w, n_w + n); units are the square of the sigma units."""
    total = traj.snapshots.shape[0]
    if n_w < 0 or n < 0 or n_w + n >= total:
        raise ValueError(
            f"snapshots at n_w={n_w} and n_w+n={n_w + n} not available (have {total})"
        )
    diff = traj.snapshots[n_w] - traj.snapshots[n_w + n]
    return float(np.mean(diff * diff))


def delta_series(traj: ProtocolTrajectory, n_w=None):
    """(n, Delta(n_w, n_w+n)) for n = 1 .. max available lag.

    Empty when the (possibly truncated) trajectory has no snapshots past
    the wait time.
    """
    n_w = traj.n_w if n_w is None else n_w
    total = traj.snapshots.shape[0]
    if total <= n_w + 1:
        return np.zeros(0, dtype=int), np.zeros(0)
    lags = np.arange(1, total - n_w)
    ref = traj.snapshots[n_w]
    diffs = traj.snapshots[n_w + 1 :] - ref
    return lags, np.mean(diffs * diffs, axis=1)


def ensemble_delta(trajs, n_w=None):
    """Run-averaged Delta(n) with standard error across an ensemble.

    Trajectories truncate at different lengths (pulse annihilation), so the
    average at lag n runs over the members that reach n.  Returns
    (lags, mean, stderr).
    """
    series = [delta_series(t, n_w) for t in trajs]
    longest = max((len(n) for n, _ in series), default=0)
    if longest == 0:
        raise ValueError("no trajectory extends past the wait time")
    lags = np.arange(1, longest + 1)
    mean = np.empty(longest)
    stderr = np.empty(longest)
    for i in range(longest):
        vals = np.array([d[i] for _, d in series if len(d) > i])
        mean[i] = vals.mean()
        stderr[i] = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
    return lags, mean, stderr


def _plateau_cut(delta: np.ndarray) -> int:
    """Index of the last point kept by the pre-plateau rule."""
    if delta.size < 2:
        return delta.size - 1
    prev = np.abs(delta[:-1])
    rel = np.abs(np.diff(delta)) / np.where(prev > 0, prev, np.finfo(float).tiny)
    for i in range(PLATEAU_WINDOW - 1, rel.size):
        if rel[i - PLATEAU_WINDOW + 1 : i + 1].mean() < PLATEAU_REL_CHANGE:
            return i  # rel[i] links delta[i] and delta[i+1]; keep up to delta[i]
    return delta.size - 1


def _linfit(x: np.ndarray, y: np.ndarray):
    """Least-squares slope/intercept plus R^2 (0 for degenerate data)."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def fit_growth(n: np.ndarray, delta: np.ndarray) -> dict:
    """Power-law vs logarithmic growth fits over the pre-plateau points.

    Power law: least squares of log(Delta) on log(n) (positive Delta only);
    logarithmic: least squares of Delta on log(n).  ``preferred`` is the
    higher-R^2 model, or "plateau" when too few growing points remain.
    """
    n = np.asarray(n, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if n.size != delta.size:
        raise ValueError("n and delta must have equal length")
    if n.size < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} points, got {n.size}")
    if np.any(n < 1):
        raise ValueError("lags must satisfy n >= 1")
    cut = _plateau_cut(delta)
    n_kept, d_kept = n[: cut + 1], delta[: cut + 1]
    positive = d_kept > 0
    excluded_nonpositive = int(np.sum(~positive))
    out = {
        "power_law": {"prefactor": np.nan, "exponent": np.nan, "r2": -np.inf},
        "logarithmic": {"slope": np.nan, "intercept": np.nan, "r2": -np.inf},
        "plateau_cut": int(cut) if cut < delta.size - 1 else None,
        "excluded_nonpositive": excluded_nonpositive,
        "n_points": int(n_kept.size),
    }
    if n_kept.size < MIN_FIT_POINTS:
        out["preferred"] = "plateau"
        if np.sum(positive) >= 2:
            a, la, r2p = _linfit(np.log(n_kept[positive]), np.log(d_kept[positive]))
            out["power_law"] = {"prefactor": float(np.exp(la)), "exponent": a, "r2": r2p}
        if n_kept.size >= 2:
            s, i0, r2l = _linfit(np.log(n_kept), d_kept)
            out["logarithmic"] = {"slope": s, "intercept": i0, "r2": r2l}
        return out
    if np.sum(positive) >= 2:
        alpha, log_pref, r2p = _linfit(np.log(n_kept[positive]), np.log(d_kept[positive]))
        out["power_law"] = {"prefactor": float(np.exp(log_pref)), "exponent": alpha, "r2": r2p}
    slope, intercept, r2l = _linfit(np.log(n_kept), d_kept)
    out["logarithmic"] = {"slope": slope, "intercept": intercept, "r2": r2l}
    out["preferred"] = (
        "power_law" if out["power_law"]["r2"] >= out["logarithmic"]["r2"] else "logarithmic"
    )
    return out
