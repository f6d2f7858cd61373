"""Pump-probe sensing: optimize the drive schedule that creates the signal.

The pump laser switches on/off at times tau_j, driving an exponentially
relaxing field (see ``fields.PhotocurrentField``); readout probe flips act
on the qubit only within the sensing window [t0, T].  The estimated
parameter is the field ceiling B_max, so the phase integral uses the
normalized waveform and the pulse-engine machinery applies unchanged on
the shifted window.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .adadelta import DEFAULT_MOMENTUM, run_sgd
from .fields import GYRO_RAD_PER_S_UT, MILLIGAUSS_TO_UT, PhotocurrentField
from .pipulse import (
    MIN_PULSE_GAP,
    PiPulseProtocol,
    _eta_from_parts,
    accumulated_phase,
    decoherence_chi,
)

DEFAULT_T0 = 0.897e-6
DEFAULT_SENSING_TIME = 121.6e-6
DEFAULT_TAU = 7.6e-6
DEFAULT_BMAX_MG = 0.5016
DEFAULT_TAU_RISE = 1.3e-6


@dataclass(frozen=True)
class PumpSchedule:
    """Pump on/off switch times inside [0, T], alternating and starting "on"."""

    switch_times: np.ndarray
    total_time: float = DEFAULT_SENSING_TIME

    def __post_init__(self):
        t = np.atleast_1d(np.array(self.switch_times, dtype=float))
        if t.size and (np.any(np.diff(t) <= 0.0) or t[0] < 0.0 or t[-1] > self.total_time):
            raise ValueError("switch times must be strictly increasing within [0, T]")
        t.setflags(write=False)
        object.__setattr__(self, "switch_times", t)
        object.__setattr__(self, "total_time", float(self.total_time))

    @property
    def n_switches(self) -> int:
        return self.switch_times.size


def default_pump_schedule(
    total_time: float = DEFAULT_SENSING_TIME, tau: float = DEFAULT_TAU
) -> PumpSchedule:
    """Pulses of duration tau spaced tau apart, starting at t = 0."""
    times = np.arange(0.0, total_time - 0.5 * tau, tau)
    return PumpSchedule(times, total_time)


def front_loaded_probe(total_time: float, t0: float = DEFAULT_T0) -> PiPulseProtocol:
    """All probe flips coincident at the window start: pairs annihilate, so
    the switching function is +1 throughout (equivalently, no flips)."""
    return PiPulseProtocol(np.array([]), total_time - t0)


def cp_probe(
    total_time: float, t0: float = DEFAULT_T0, tau: float = DEFAULT_TAU
) -> PiPulseProtocol:
    """Evenly spaced flips every tau after t0, the lock-in-style layout.

    Times are relative to the window start t0, as used by the window-shifted
    phase and decoherence integrals.
    """
    window = total_time - t0
    n = int(np.floor(window / tau - 1e-9))
    return PiPulseProtocol(tau * np.arange(1, n + 1), window)


@dataclass(frozen=True)
class PumpProbeConfig:
    """Pump schedule plus probe protocol on the window [t0, T]."""

    pump: PumpSchedule
    probe: PiPulseProtocol
    t0: float = DEFAULT_T0
    total_time: float = DEFAULT_SENSING_TIME
    b_max_mg: float = DEFAULT_BMAX_MG
    tau_rise: float = DEFAULT_TAU_RISE

    def __post_init__(self):
        if not 0.0 <= self.t0 < self.total_time:
            raise ValueError("t0 must lie in [0, T)")
        if self.pump.total_time > self.total_time + 1e-15:
            raise ValueError("pump schedule exceeds the sensing time")
        window = self.total_time - self.t0
        if abs(self.probe.sensing_time - window) > 1e-12:
            raise ValueError(
                f"probe window {self.probe.sensing_time} != T - t0 = {window}"
            )

    def pump_field(self) -> PhotocurrentField:
        return PhotocurrentField(self.b_max_mg, self.tau_rise, tuple(self.pump.switch_times))


@dataclass(frozen=True)
class _WindowedEnvelope:
    """Normalized pump waveform reparametrized to window time t' = t - t0."""

    pump_field: PhotocurrentField
    offset: float

    def integral(self, a: float, b: float) -> float:
        return self.pump_field.normalized_integral(a + self.offset, b + self.offset)

    def evaluate(self, t):
        return self.pump_field.evaluate_normalized(np.asarray(t) + self.offset)


def pump_phase(config: PumpProbeConfig, pump_times=None) -> float:
    """Window phase integral per unit B_max (in uT)."""
    times = config.pump.switch_times if pump_times is None else pump_times
    env = _WindowedEnvelope(
        PhotocurrentField(config.b_max_mg, config.tau_rise, tuple(times)), config.t0
    )
    return accumulated_phase(config.probe, env)


def pump_sensitivity(config: PumpProbeConfig, psd) -> float:
    """eta for estimating B_max, in uT sqrt(s) (multiply by 10 for mG)."""
    phi = pump_phase(config)
    chi = decoherence_chi(config.probe, psd)
    return _eta_from_parts(phi, chi, config.total_time)


def pump_gradient(config: PumpProbeConfig, psd, h: float = 1e-9) -> np.ndarray:
    """d eta / d tau_j by central differences on the pump switch times.

    The probe is fixed, so chi is evaluated once; only the phase integral
    responds to the pump.  Switch collisions under perturbation annihilate
    in on/off pairs, mirroring the optimizer projection.
    """
    chi = decoherence_chi(config.probe, psd)
    T = config.total_time
    times = config.pump.switch_times

    def eta_of(ts) -> float:
        ts_proj, _ = project_switch_times(ts, T)
        return _eta_from_parts(pump_phase(config, ts_proj), chi, T)

    grad = np.empty(times.size)
    for j in range(times.size):
        up = times.copy()
        up[j] += h
        dn = times.copy()
        dn[j] -= h
        grad[j] = (eta_of(up) - eta_of(dn)) / (2.0 * h)
    return grad


def project_switch_times(times: np.ndarray, total_time: float, min_gap: float = MIN_PULSE_GAP):
    """Clamp into [0, T], sort, and drop coincident on/off pairs."""
    t = np.clip(np.asarray(times, dtype=float), 0.0, total_time)
    order = np.argsort(t, kind="stable")
    sorted_t = t[order]
    keep = []
    i = 0
    while i < sorted_t.size:
        if i + 1 < sorted_t.size and sorted_t[i + 1] - sorted_t[i] < min_gap:
            i += 2
        else:
            keep.append(i)
            i += 1
    kept = np.array(keep, dtype=int)
    return sorted_t[kept], order[kept]


def reference_cp_inverse_sensitivity(config: PumpProbeConfig, psd) -> float:
    """1/eta of the lock-in-style layout (CP probe + the config's pump).

    This is the conventional evenly spaced arrangement that optimized runs
    are compared against when quoting an improvement factor.
    """
    ref = replace(config, probe=cp_probe(config.total_time, config.t0, DEFAULT_TAU))
    return 1.0 / pump_sensitivity(ref, psd)


def optimize_pump(
    config: PumpProbeConfig,
    psd,
    iterations: int,
    *,
    momentum: float = DEFAULT_MOMENTUM,
    epsilon: float = 1e-16,
    seed: int = 0,
    init_jitter: float = 0.0,
    record_stride: int = 1,
):
    """Adadelta descent on the pump switch times with the probe held fixed.

    ``init_jitter`` perturbs the starting switch times uniformly in
    [-jitter, +jitter] seconds (seeded), decorrelating ensemble members of
    this otherwise deterministic loss.  Returns (record, final config).
    """
    chi = decoherence_chi(config.probe, psd)
    T = config.total_time

    def loss_and_grad(theta, rng):
        cfg = replace(config, pump=PumpSchedule(theta, T))
        eta = _eta_from_parts(pump_phase(cfg), chi, T)
        return eta, pump_gradient(cfg, psd)

    theta0 = config.pump.switch_times.copy()
    if init_jitter > 0.0:
        jit = np.random.default_rng(seed).uniform(-init_jitter, init_jitter, theta0.size)
        theta0, _ = project_switch_times(theta0 + jit, T)

    record, theta = run_sgd(
        loss_and_grad,
        theta0,
        iterations,
        momentum=momentum,
        epsilon=epsilon,
        project=lambda th: project_switch_times(th, T),
        to_sigma=lambda th: th.copy(),
        seed=seed,
        record_stride=record_stride,
    )
    return record, replace(config, pump=PumpSchedule(theta, T))
