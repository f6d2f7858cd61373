"""Instantaneous pulse-flip protocols: phase, filter function, sensitivity.

A protocol is a sorted list of flip times inside (0, T).  The modulation
y(t) starts at +1 and flips sign at every pulse; the target-field phase is
the exact per-segment integral of gamma*f(t)*y(t), and dephasing is

    chi = (1/4pi) Integral_{-inf}^{inf} S(omega) |y(omega)|^2 domega.

chi is evaluated by splitting the spectrum into its constant floor, which
integrates exactly to floor*T/2 (Parseval, y^2 = 1), plus the Gaussian
excess, which is band-limited and integrated on a dense trapezoid grid.
Truncating the floor part on a finite grid instead would bias chi by
~ floor*(n+1)/(pi*omega_max), which is why the split is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GYRO_RAD_PER_S_UT
from .noise import PowerSpectralDensity

# Two pulses closer than this annihilate; updates clamp this far inside (0, T).
MIN_PULSE_GAP = 1e-9


class BlindProtocolError(ValueError):
    """The protocol accumulates no signal phase; sensitivity diverges."""


@dataclass(frozen=True)
class PiPulseProtocol:
    """Flip times t_1 < ... < t_n strictly inside (0, sensing_time)."""

    pulse_times: np.ndarray
    sensing_time: float

    def __post_init__(self):
        t = np.atleast_1d(np.array(self.pulse_times, dtype=float))
        if t.ndim != 1:
            raise ValueError("pulse_times must be one-dimensional")
        if self.sensing_time <= 0.0:
            raise ValueError("sensing_time must be positive")
        if t.size:
            if np.any(np.diff(t) <= 0.0):
                raise ValueError("pulse times must be strictly increasing")
            if t[0] <= 0.0 or t[-1] >= self.sensing_time:
                raise ValueError("pulse times must lie strictly inside (0, T)")
        t.setflags(write=False)
        object.__setattr__(self, "pulse_times", t)
        object.__setattr__(self, "sensing_time", float(self.sensing_time))

    @property
    def n_pulses(self) -> int:
        return self.pulse_times.size

    @property
    def gaps(self) -> np.ndarray:
        """Inter-pulse gaps (t_1 - 0, t_2 - t_1, ...)."""
        return np.diff(self.pulse_times, prepend=0.0)

    def segments(self):
        """(start, end, sign) triples covering [0, T]."""
        edges = np.concatenate(([0.0], self.pulse_times, [self.sensing_time]))
        signs = (-1.0) ** np.arange(self.n_pulses + 1)
        return edges[:-1], edges[1:], signs


def cp_protocol(n_pulses: int, sensing_time: float) -> PiPulseProtocol:
    """Evenly spaced flips at (j - 1/2) * T / n, the Carr-Purcell layout."""
    j = np.arange(1, n_pulses + 1)
    return PiPulseProtocol((j - 0.5) * sensing_time / n_pulses, sensing_time)


def switching_function(protocol: PiPulseProtocol, t):
    """y(t) = (-1)^(number of pulses at or before t); +1 at t = 0."""
    count = np.searchsorted(protocol.pulse_times, np.asarray(t, dtype=float), side="right")
    out = (-1.0) ** count
    return float(out) if np.ndim(t) == 0 else out


def accumulated_phase(protocol: PiPulseProtocol, field) -> float:
    """phi = Integral gamma * f(t) * y(t) dt, per unit field amplitude.

    Exact sum of per-segment antiderivatives; ``field`` needs an
    ``integral(a, b)`` method (multi-tone and pump envelopes both do).
    """
    starts, ends, signs = protocol.segments()
    return GYRO_RAD_PER_S_UT * sum(
        s * field.integral(a, b) for a, b, s in zip(starts, ends, signs)
    )


def _spectral_sum(protocol: PiPulseProtocol, omega: np.ndarray) -> np.ndarray:
    """i*omega*y(omega): (-1)^n e^{i w T} - 1 + 2 sum_j (-1)^{j+1} e^{i w t_j}."""
    t = protocol.pulse_times
    n = t.size
    coeff = 2.0 * (-1.0) ** np.arange(2, n + 2)  # +2, -2, +2, ...
    out = ((-1.0) ** n) * np.exp(1j * omega * protocol.sensing_time) - 1.0
    if n:
        out = out + np.exp(1j * np.outer(omega, t)) @ coeff
    return out


def _dc_area(protocol: PiPulseProtocol) -> float:
    """Integral of y over [0, T]."""
    starts, ends, signs = protocol.segments()
    return float(np.sum(signs * (ends - starts)))


def filter_function(protocol: PiPulseProtocol, omega):
    """|y(omega)|^2 in s^2; |y(0)|^2 = (Integral y dt)^2."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty_like(w)
    small = np.abs(w) * protocol.sensing_time < 1e-8
    if np.any(~small):
        ws = w[~small]
        num = _spectral_sum(protocol, ws)
        out[~small] = (num.real**2 + num.imag**2) / ws**2
    if np.any(small):
        out[small] = _dc_area(protocol) ** 2
    return float(out[0]) if np.ndim(omega) == 0 else out


def _chi_grid(psd: PowerSpectralDensity, T: float):
    """Trapezoid grid resolving both the Gaussian lines and the 2pi/T lobes."""
    if not psd.components:
        return None, None
    reach = max(c + 10.0 * s for _, c, s in psd.components)
    domega = min(2.0 * np.pi / (16.0 * T), min(s for _, _, s in psd.components) / 4.0)
    n = int(np.ceil(reach / domega))
    omegas = np.linspace(0.0, reach, n + 1)
    weights = np.full(n + 1, omegas[1] - omegas[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return omegas, weights


def decoherence_chi(protocol: PiPulseProtocol, psd: PowerSpectralDensity) -> float:
    """chi(T) >= 0; exact floor term plus quadrature of the Gaussian excess."""
    T = protocol.sensing_time
    chi = 0.5 * psd.floor * T
    omegas, weights = _chi_grid(psd, T)
    if omegas is not None:
        excess = psd.evaluate(omegas) - psd.floor
        chi += float(weights @ (excess * filter_function(protocol, omegas))) / (2.0 * np.pi)
    return chi


def filter_parseval_integral(protocol: PiPulseProtocol, rtol: float = 0.01) -> float:
    """(1/2pi) Integral |y(omega)|^2 domega by brute trapezoid; tends to T.

    The grid reaches far enough that the truncated tail, ~2(n+1)/omega_max,
    stays well below ``rtol`` of the identity value.
    """
    T = protocol.sensing_time
    n = protocol.n_pulses
    omega_max = 2.0 * (n + 1) / (np.pi * (rtol / 10.0) * T)
    domega = 2.0 * np.pi / (16.0 * T)
    m = int(np.ceil(omega_max / domega))
    omegas = np.linspace(0.0, m * domega, m + 1)
    vals = filter_function(protocol, omegas)
    return float(np.trapz(vals, omegas)) / np.pi


def pi_sensitivity(protocol: PiPulseProtocol, field, psd: PowerSpectralDensity) -> float:
    """eta = exp(chi) * sqrt(T) / |phi|, in uT * sqrt(s) per unit amplitude."""
    phi = accumulated_phase(protocol, field)
    if abs(phi) <= 1e-12 * GYRO_RAD_PER_S_UT * protocol.sensing_time:
        raise BlindProtocolError(
            f"protocol is blind to the target field (|phi| = {abs(phi):.3e})"
        )
    chi = decoherence_chi(protocol, psd)
    return np.exp(chi) * np.sqrt(protocol.sensing_time) / abs(phi)


def _eta_from_parts(phi: float, chi: float, T: float) -> float:
    if abs(phi) <= 1e-12 * GYRO_RAD_PER_S_UT * T:
        raise BlindProtocolError(
            f"protocol is blind to the target field (|phi| = {abs(phi):.3e})"
        )
    return np.exp(chi) * np.sqrt(T) / abs(phi)


def pi_sensitivity_gradient(
    protocol: PiPulseProtocol, field, psd: PowerSpectralDensity, h: float = 1e-9
) -> np.ndarray:
    """d eta / d t_j by central differences with step ``h`` per pulse time.

    Perturbed evaluations reuse the unperturbed spectral sum: shifting one
    pulse changes a single term of y(omega), so the 2n decoherence
    integrals cost about as much as one dense evaluation.  If a step makes
    the times cross, that component falls back to a full re-sorted pass.
    """
    t = protocol.pulse_times
    n = t.size
    T = protocol.sensing_time
    if n == 0:
        return np.zeros(0)

    omegas, weights = _chi_grid(psd, T)
    starts, ends, signs = protocol.segments()
    base_phi = GYRO_RAD_PER_S_UT * sum(
        s * field.integral(a, b) for a, b, s in zip(starts, ends, signs)
    )
    if omegas is not None:
        nz = omegas > 0.0
        wnz = omegas[nz]
        base_sum = _spectral_sum(protocol, wnz)
        kernel = weights * (psd.evaluate(omegas) - psd.floor) / (2.0 * np.pi)
        pulse_exp = np.exp(1j * np.outer(wnz, t))
        coeff = 2.0 * (-1.0) ** np.arange(2, n + 2)
        shift = {+1: np.exp(1j * wnz * h), -1: np.exp(-1j * wnz * h)}
    base_area = _dc_area(protocol)
    floor_term = 0.5 * psd.floor * T

    def eta_shifted(j: int, sgn: int) -> float:
        tj = t[j] + sgn * h
        lo = t[j - 1] if j > 0 else 0.0
        hi = t[j + 1] if j < n - 1 else T
        crossed = not (lo < tj < hi)
        if crossed:
            times, _ = project_pulse_times(
                np.concatenate((np.delete(t, j), [tj])), T
            )
            pert = PiPulseProtocol(times, T)
            return _eta_from_parts(
                accumulated_phase(pert, field), decoherence_chi(pert, psd), T
            )
        # phase: only the two segments adjacent to t_j change
        sign_before = (-1.0) ** j
        phi = base_phi + GYRO_RAD_PER_S_UT * 2.0 * sign_before * field.integral(t[j], tj)
        chi = floor_term
        if omegas is not None:
            num = base_sum + coeff[j] * pulse_exp[:, j] * (shift[sgn] - 1.0)
            ff = np.empty(omegas.shape[0])
            ff[nz] = (num.real**2 + num.imag**2) / wnz**2
            ff[~nz] = (base_area + coeff[j] * sgn * h) ** 2
            chi += float(kernel @ ff)
        return _eta_from_parts(phi, chi, T)

    grad = np.empty(n)
    for j in range(n):
        grad[j] = (eta_shifted(j, +1) - eta_shifted(j, -1)) / (2.0 * h)
    return grad


def project_pulse_times(times: np.ndarray, sensing_time: float, min_gap: float = MIN_PULSE_GAP):
    """Feasibility projection used after every optimizer step.

    Clamps times ``min_gap`` inside (0, T), sorts, and annihilates pairs
    closer than ``min_gap`` (two coincident flips are the identity).
    Returns (projected times, indices into the input that survived).
    """
    t = np.asarray(times, dtype=float)
    clamped = np.clip(t, min_gap, sensing_time - min_gap)
    order = np.argsort(clamped, kind="stable")
    sorted_t = clamped[order]
    keep = []
    i = 0
    while i < sorted_t.size:
        if i + 1 < sorted_t.size and sorted_t[i + 1] - sorted_t[i] < min_gap:
            i += 2  # annihilate the pair
        else:
            keep.append(i)
            i += 1
    kept_sorted = np.array(keep, dtype=int)
    return sorted_t[kept_sorted], order[kept_sorted]
