"""Adadelta stochastic gradient descent with trajectory recording.

Per-parameter update rule, all elementwise:

    E[g^2]_t     = gm E[g^2]_{t-1} + (1 - gm) g_t^2
    RMS[g]_t     = sqrt(E[g^2]_t + eps)
    dtheta_t     = -(RMS[dtheta]_{t-1} / RMS[g]_t) g_t
    E[dtheta^2]_t = gm E[dtheta^2]_{t-1} + (1 - gm) dtheta_t^2

with E[.]_0 = 0, so the first step has magnitude ~sqrt(eps) per unit
normalized gradient.  gm is the decay ("momentum") constant in (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MOMENTUM = 0.95
DEFAULT_EPSILON = 1e-6


class CallbackFailure(RuntimeError):
    """Loss callback raised during a run; ``record`` holds the partial trajectory."""

    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


@dataclass
class AdadeltaState:
    """Decaying averages of squared gradients and squared updates."""

    eg2: np.ndarray
    edx2: np.ndarray
    momentum: float = DEFAULT_MOMENTUM
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        self.eg2 = np.asarray(self.eg2, dtype=float)
        self.edx2 = np.asarray(self.edx2, dtype=float)
        if self.eg2.shape != self.edx2.shape:
            raise ValueError("eg2 and edx2 must have the same shape")
        if not 0.0 < self.momentum < 1.0:
            raise ValueError(f"momentum must be in (0, 1), got {self.momentum}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def fresh(cls, dim: int, momentum: float = DEFAULT_MOMENTUM, epsilon: float = DEFAULT_EPSILON):
        return cls(np.zeros(dim), np.zeros(dim), momentum, epsilon)

    def select(self, indices: np.ndarray):
        """Keep only the state rows of surviving parameters (after projection)."""
        self.eg2 = self.eg2[indices]
        self.edx2 = self.edx2[indices]


def adadelta_update(state: AdadeltaState, g) -> np.ndarray:
    """One update; mutates ``state`` and returns dtheta."""
    g = np.asarray(g, dtype=float)
    if g.shape != state.eg2.shape:
        raise ValueError(f"gradient shape {g.shape} != state shape {state.eg2.shape}")
    gm = state.momentum
    state.eg2 = gm * state.eg2 + (1.0 - gm) * g * g
    rms_prev = np.sqrt(state.edx2 + state.epsilon)
    rms_g = np.sqrt(state.eg2 + state.epsilon)
    dx = -(rms_prev / rms_g) * g
    state.edx2 = gm * state.edx2 + (1.0 - gm) * dx * dx
    return dx


@dataclass
class RunRecord:
    """Per-iteration trajectory of one optimization run.

    ``losses[n]`` and ``snapshots[n]`` describe the protocol after n
    optimizer steps (index 0 is the initialization); snapshots are the
    protocol's effective-spin vectors.  ``projection_events`` lists
    (iteration, kept_count) whenever the feasibility projection changed the
    parameter dimension.
    """

    losses: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    minibatch_indices: list = field(default_factory=list)
    projection_events: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    seed: int = 0
    record_stride: int = 1

    @property
    def inverse_losses(self) -> np.ndarray:
        return 1.0 / np.asarray(self.losses)

    def snapshot_matrix(self) -> np.ndarray:
        """Snapshots stacked (n, dim), truncated at the first dimension change."""
        if not self.snapshots:
            return np.zeros((0, 0))
        dim = len(self.snapshots[0])
        rows = []
        for s in self.snapshots:
            if len(s) != dim:
                break
            rows.append(s)
        return np.asarray(rows)


def run_sgd(
    loss_and_grad,
    theta0,
    iterations: int,
    *,
    momentum: float = DEFAULT_MOMENTUM,
    epsilon: float = DEFAULT_EPSILON,
    project=None,
    to_sigma=None,
    seed: int = 0,
    record_stride: int = 1,
    record_deltas: bool = False,
):
    """Iterate theta <- theta + dtheta with per-family feasibility projection.

    ``loss_and_grad(theta, rng)`` returns (loss, gradient) or
    (loss, gradient, info) where info may carry 'minibatch_indices'.
    ``project(theta)`` returns (theta', kept_indices or None); a shrinking
    projection also drops the matching optimizer-state rows.
    ``to_sigma(theta)`` maps parameters to the recorded spin vector
    (identity when omitted).  Fully reproducible given (theta0, seed).

    Returns (record, theta_final).
    """
    theta = np.array(theta0, dtype=float)
    rng = np.random.default_rng(seed)
    state = AdadeltaState.fresh(theta.size, momentum, epsilon)
    sigma = (lambda th: th) if to_sigma is None else to_sigma
    record = RunRecord(seed=seed, record_stride=record_stride)

    def _eval(th):
        out = loss_and_grad(th, rng)
        if len(out) == 2:
            loss, grad = out
            info = {}
        else:
            loss, grad, info = out
        return float(loss), np.asarray(grad, dtype=float), info

    def _snap(n, loss, info):
        if n % record_stride == 0 or n == iterations:
            record.losses.append(loss)
            record.snapshots.append(np.array(sigma(theta)))
            record.minibatch_indices.append(info.get("minibatch_indices"))

    try:
        for n in range(iterations):
            loss, grad, info = _eval(theta)
            _snap(n, loss, info)
            dx = adadelta_update(state, grad)
            if record_deltas:
                record.deltas.append(dx.copy())
            theta = theta + dx
            if project is not None:
                theta, kept = project(theta)
                if kept is not None and kept.size != dx.size:
                    state.select(kept)
                    record.projection_events.append((n + 1, int(kept.size)))
        loss, _, info = _eval(theta)
        _snap(iterations, loss, info)
    except Exception as exc:
        raise CallbackFailure(f"loss callback failed at iteration {len(record.losses)}: {exc}", record) from exc
    return record, theta
