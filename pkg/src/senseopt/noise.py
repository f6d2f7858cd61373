"""Bath spectrum model and stochastic noise-trace synthesis.

The dephasing bath is described by a one-sided power spectral density
S(omega) built from a constant background plus a set of Gaussian lines,
extended evenly to negative frequencies, S(-omega) = S(omega).

Normative synthesis convention
------------------------------
Time-domain traces are built as a sum of cosines with deterministic
amplitudes and i.i.d. random phases,

    xi(t) = sum_j sqrt(2 * S(omega_j) * domega / pi) * cos(omega_j t + phi_j)

on the uniform grid omega_j = j * domega, j = 1..J.  This normalization
makes the ensemble autocovariance converge to

    R(tau) = (1/2pi) * Integral S(omega) e^{i omega tau} domega

over the synthesis band, so that for a constant spectrum S0 the coherence
of a freely evolving qubit decays as exp(-S0*T/2).  That decay law is the
anchor tying the sampled noise to the decoherence integral used by the
pulse engines; see tests for the Monte-Carlo check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_POOL_SIZE = 20_000
DEFAULT_MINIBATCH = 100

# Band limit (rad/s) used when the spectrum itself does not force a wider
# one; covers the default bath lines with >8 sigma to spare.
_BASE_OMEGA_MAX = 8.0e6


@dataclass(frozen=True)
class PowerSpectralDensity:
    """Gaussian-mixture-over-floor bath spectrum, in units of 1/s.

    ``components`` is a sequence of (height, center, sigma) triples with
    center/sigma in angular frequency (1/s).  The spectrum is evaluated as
    an even function of omega.
    """

    floor: float
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        # floor = 0 is allowed only so degenerate test spectra (S identically
        # zero) can exist; physical configs keep floor > 0.
        if not self.floor >= 0.0:
            raise ValueError(f"spectral floor must be non-negative, got {self.floor}")
        comps = tuple((float(h), float(c), float(s)) for h, c, s in self.components)
        for h, c, s in comps:
            if h <= 0.0 or s <= 0.0 or c < 0.0:
                raise ValueError(f"invalid Gaussian component (h={h}, c={c}, s={s})")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "floor", float(self.floor))

    def evaluate(self, omega):
        """S(omega) for scalar or array omega (even in omega, >= floor)."""
        w = np.abs(np.asarray(omega, dtype=float))
        out = np.full_like(w, self.floor)
        for h, c, s in self.components:
            out += h * np.exp(-((w - c) ** 2) / (2.0 * s * s))
        if np.isscalar(omega):
            return float(out)
        return out

    def band_limit(self, dt: float) -> float:
        """Upper synthesis frequency: capped at Nyquist, covering all lines."""
        reach = _BASE_OMEGA_MAX
        for _, c, s in self.components:
            reach = max(reach, c + 8.0 * s)
        return min(np.pi / dt, reach)


def default_bath_psd() -> PowerSpectralDensity:
    """Bundled carbon-13 bath spectrum: five Gaussian lines on a 12170/s floor."""
    return PowerSpectralDensity(
        floor=12_170.0,
        components=(
            (8.0e4, 4.407e5, 1.0e4),
            (2.1377e5, 6.98e5, 1.0e4),
            (2.6971e6, 2.6595e6, 1.2376e5),
            (5.6288e5, 2.9353e6, 8.7174e4),
            (1.8577e5, 4.4818e6, 4.3784e5),
        ),
    )


def evaluate_psd(psd: PowerSpectralDensity, omega):
    """Functional alias for ``psd.evaluate``."""
    return psd.evaluate(omega)


def synthesis_grid(psd: PowerSpectralDensity, T: float, dt: float):
    """Frequency grid (omega_j, domega) for trace synthesis.

    domega = 2*pi/(4*T) (4x padding of the sensing window, so the trace
    period is well beyond T) and omega_max from the spectrum's band limit.
    """
    domega = 2.0 * np.pi / (4.0 * T)
    n = int(np.floor(psd.band_limit(dt) / domega))
    omegas = domega * np.arange(1, n + 1)
    return omegas, domega


def _component_amplitudes(psd, omegas, domega):
    return np.sqrt(2.0 * psd.evaluate(omegas) * domega / np.pi)


@dataclass(frozen=True)
class NoiseTrace:
    """One time-domain realization xi(t_k), sampled at step midpoints."""

    samples: np.ndarray
    dt: float
    seed: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("noise trace contains non-finite samples")

    def __len__(self):
        return self.samples.shape[0]


def _n_steps(T: float, dt: float) -> int:
    if T <= 0.0 or dt <= 0.0:
        raise ValueError(f"need T > 0 and dt > 0, got T={T}, dt={dt}")
    n = int(np.ceil(T / dt - 1e-9))
    if n < 2:
        raise ValueError(f"need at least 2 steps, got T/dt = {T / dt}")
    return n


def sample_noise_trace(psd: PowerSpectralDensity, T: float, dt: float, seed) -> NoiseTrace:
    """Draw one noise trace of length ceil(T/dt) with the stated convention.

    ``seed`` may be an int or a tuple of ints; traces are reproducible and
    independent of how many other traces were drawn before.
    """
    n = _n_steps(T, dt)
    omegas, domega = synthesis_grid(psd, T, dt)
    amps = _component_amplitudes(psd, omegas, domega)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=omegas.shape[0])
    t = (np.arange(n) + 0.5) * dt
    samples = (amps * np.cos(np.outer(t, omegas) + phases)).sum(axis=1)
    seed_repr = seed if isinstance(seed, int) else hash(tuple(seed))
    return NoiseTrace(samples=samples, dt=dt, seed=seed_repr)


@dataclass(frozen=True)
class NoisePool:
    """Immutable bank of pre-drawn traces shared across an optimization run."""

    traces: np.ndarray  # (size, n_steps)
    dt: float
    master_seed: int
    minibatch_size: int = DEFAULT_MINIBATCH

    def __post_init__(self):
        if self.traces.ndim != 2 or self.traces.shape[0] == 0:
            raise ValueError("noise pool must hold at least one trace")
        if self.size < self.minibatch_size:
            raise ValueError(
                f"pool size {self.size} smaller than minibatch {self.minibatch_size}"
            )
        self.traces.setflags(write=False)

    @property
    def size(self) -> int:
        return self.traces.shape[0]

    @property
    def n_steps(self) -> int:
        return self.traces.shape[1]


def build_pool(
    psd: PowerSpectralDensity,
    T: float,
    dt: float,
    size: int = DEFAULT_POOL_SIZE,
    master_seed: int = 0,
    minibatch_size: int = DEFAULT_MINIBATCH,
) -> NoisePool:
    """Synthesize ``size`` traces with per-trace seeds hash(master_seed, i).

    Trace i is seeded by SeedSequence((master_seed, i)), so the pool content
    does not depend on construction order or worker scheduling.
    """
    if size < 1:
        raise ValueError("pool size must be >= 1")
    n = _n_steps(T, dt)
    omegas, domega = synthesis_grid(psd, T, dt)
    amps = _component_amplitudes(psd, omegas, domega)
    nfreq = omegas.shape[0]
    # xi_i(t_k) = Re[(amps * e^{i phi_i}) . e^{i omega t_k}]; one batched
    # product instead of `size` per-trace cosine sums.
    z = np.empty((size, nfreq), dtype=np.complex128)
    for i in range(size):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, i))))
        z[i] = amps * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=nfreq))
    t = (np.arange(n) + 0.5) * dt
    basis = np.exp(1j * np.outer(omegas, t))
    traces = np.ascontiguousarray((z @ basis).real)
    return NoisePool(traces=traces, dt=dt, master_seed=master_seed, minibatch_size=minibatch_size)


def draw_minibatch(pool: NoisePool, rng: np.random.Generator) -> np.ndarray:
    """Indices of a minibatch drawn uniformly *with replacement* from the pool."""
    return rng.integers(0, pool.size, size=pool.minibatch_size)
