"""Deterministic target signals whose amplitude the sensor estimates.

Two families: a weighted multi-tone cosine field (dimensionless envelope
f(t), amplitude b in microtesla), and a pump-driven photocurrent field that
relaxes exponentially toward its drive level at each pump switch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Electron-spin gyromagnetic ratio of the sensing qubit, rad/s per uT.
GYRO_RAD_PER_S_UT = 2.0 * np.pi * 2.81e4

# 1 milligauss = 0.1 microtesla.
MILLIGAUSS_TO_UT = 0.1

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MultiToneField:
    """f(t) = sum_i w_i cos(2 pi nu_i t + alpha_i), with sum w_i = 1."""

    weights: tuple
    freqs_hz: tuple
    phases: tuple
    amplitude_ut: float = 1.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        nu = tuple(float(x) for x in self.freqs_hz)
        al = tuple(float(x) for x in self.phases)
        if not (len(w) == len(nu) == len(al)):
            raise ValueError("weights, freqs_hz and phases must have equal length")
        if abs(sum(w) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"tone weights must sum to 1 (got {sum(w)!r})")
        if any(x < 0.0 for x in w):
            raise ValueError("tone weights must be non-negative")
        if any(f <= 0.0 for f in nu):
            raise ValueError("tone frequencies must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "freqs_hz", nu)
        object.__setattr__(self, "phases", al)
        object.__setattr__(self, "amplitude_ut", float(self.amplitude_ut))

    def evaluate(self, t):
        """Dimensionless envelope f(t); scalar or array t."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for w, nu, al in zip(self.weights, self.freqs_hz, self.phases):
            out = out + w * np.cos(2.0 * np.pi * nu * t + al)
        return float(out) if out.ndim == 0 else out

    def integral(self, a: float, b: float) -> float:
        """Exact integral of f over [a, b] from the cosine antiderivative."""
        total = 0.0
        for w, nu, al in zip(self.weights, self.freqs_hz, self.phases):
            k = 2.0 * np.pi * nu
            total += w * (np.sin(k * b + al) - np.sin(k * a + al)) / k
        return total


def eval_multitone(field_: MultiToneField, t):
    return field_.evaluate(t)


@dataclass(frozen=True)
class PhotocurrentField:
    """Pump-driven field that relaxes exponentially toward B_max (pump on)
    or 0 (pump off) with time constant tau_rise.

    ``switch_times`` alternate on/off starting with "on"; the field starts
    from B(0) = 0 and is continuous across every switch by construction.
    """

    b_max_mg: float
    tau_rise: float
    switch_times: tuple

    # value of B/B_max at each switch instant, precomputed
    _levels: tuple = field(init=False, repr=False, default=())

    def __post_init__(self):
        taus = tuple(float(x) for x in self.switch_times)
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("switch times must be strictly increasing")
        if taus and taus[0] < 0.0:
            raise ValueError("switch times must be non-negative")
        if self.tau_rise <= 0.0:
            raise ValueError("tau_rise must be positive")
        levels = []
        level = 0.0
        for j, tau in enumerate(taus):
            if j > 0:
                target = 1.0 if (j - 1) % 2 == 0 else 0.0
                level = target - (target - levels[j - 1]) * np.exp(
                    -(tau - taus[j - 1]) / self.tau_rise
                )
            levels.append(level)
        object.__setattr__(self, "switch_times", taus)
        object.__setattr__(self, "_levels", tuple(levels))
        object.__setattr__(self, "b_max_mg", float(self.b_max_mg))
        object.__setattr__(self, "tau_rise", float(self.tau_rise))

    @property
    def b_max_ut(self) -> float:
        return self.b_max_mg * MILLIGAUSS_TO_UT

    def _segment(self, t: float):
        """(segment start, level there, drive target) for time t >= 0."""
        j = int(np.searchsorted(self.switch_times, t, side="right")) - 1
        if j < 0:
            return 0.0, 0.0, 0.0
        target = 1.0 if j % 2 == 0 else 0.0
        return self.switch_times[j], self._levels[j], target

    def evaluate_normalized(self, t):
        """B(t)/B_max in [0, 1]; scalar or array t >= 0."""
        if np.ndim(t) == 0:
            tau, level, target = self._segment(float(t))
            return target - (target - level) * np.exp(-(float(t) - tau) / self.tau_rise)
        return np.array([self.evaluate_normalized(float(x)) for x in np.asarray(t).ravel()]).reshape(
            np.shape(t)
        )

    def evaluate(self, t):
        """B(t) in milligauss."""
        return self.b_max_mg * self.evaluate_normalized(t)

    def normalized_integral(self, a: float, b: float) -> float:
        """Exact signed integral of B(t)/B_max over [a, b] (piecewise exponentials)."""
        if b < a:
            return -self.normalized_integral(b, a)
        edges = [a] + [x for x in self.switch_times if a < x < b] + [b]
        total = 0.0
        for lo, hi in zip(edges, edges[1:]):
            tau, level, target = self._segment(lo)
            # integral of target - (target - B(tau)) e^{-(t-tau)/tr} over [lo, hi]
            amp = target - level
            tr = self.tau_rise
            total += target * (hi - lo) + amp * tr * (
                np.exp(-(hi - tau) / tr) - np.exp(-(lo - tau) / tr)
            )
        return total


def eval_photocurrent(field_: PhotocurrentField, t):
    return field_.evaluate(t)
