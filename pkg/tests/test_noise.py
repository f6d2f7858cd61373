import numpy as np
import pytest

from senseopt.noise import (
    NoisePool,
    PowerSpectralDensity,
    build_pool,
    default_bath_psd,
    draw_minibatch,
    evaluate_psd,
    sample_noise_trace,
    synthesis_grid,
)

# Bath line table: (height, center, sigma), all 1/s.
TABLE = (
    (8.0e4, 4.407e5, 1.0e4),
    (2.1377e5, 6.98e5, 1.0e4),
    (2.6971e6, 2.6595e6, 1.2376e5),
    (5.6288e5, 2.9353e6, 8.7174e4),
    (1.8577e5, 4.4818e6, 4.3784e5),
)


def hand_sum(omega):
    """Independent evaluation of floor + Gaussian lines at omega."""
    total = 12170.0
    for h, c, s in TABLE:
        total += h * np.exp(-((abs(omega) - c) ** 2) / (2 * s * s))
    return total


class TestPsdEvaluation:
    def test_default_matches_table(self):
        psd = default_bath_psd()
        assert psd.floor == 12170.0
        assert psd.components == TABLE

    def test_far_from_lines_is_floor(self):
        psd = default_bath_psd()
        assert evaluate_psd(psd, 1e8) == pytest.approx(12170.0, rel=1e-9)

    def test_on_peak_value(self):
        # floor + full third line + tails of its neighbours
        psd = default_bath_psd()
        assert evaluate_psd(psd, 2.6595e6) == pytest.approx(2713076.7583352067, rel=1e-12)
        assert evaluate_psd(psd, 2.6595e6) == pytest.approx(hand_sum(2.6595e6), rel=1e-12)

    def test_even_in_omega(self):
        psd = default_bath_psd()
        w = np.array([0.0, 1.23e5, 7.7e5, 2.6595e6, 9e6])
        assert np.array_equal(psd.evaluate(-w), psd.evaluate(w))

    def test_floor_lower_bound(self):
        psd = default_bath_psd()
        w = np.linspace(0, 1e7, 10001)
        assert np.all(psd.evaluate(w) >= psd.floor)

    def test_invalid_components_rejected(self):
        with pytest.raises(ValueError):
            PowerSpectralDensity(floor=-1.0)
        with pytest.raises(ValueError):
            PowerSpectralDensity(floor=1.0, components=((0.0, 1.0, 1.0),))
        with pytest.raises(ValueError):
            PowerSpectralDensity(floor=1.0, components=((1.0, 1.0, -2.0),))


class TestTraceSynthesis:
    def test_zero_spectrum_gives_zero_trace(self):
        psd = PowerSpectralDensity(floor=0.0)
        trace = sample_noise_trace(psd, 50e-6, 50e-9, seed=3)
        assert np.all(trace.samples == 0.0)

    def test_trace_length_and_validation(self):
        trace = sample_noise_trace(default_bath_psd(), 50e-6, 50e-9, seed=0)
        assert len(trace) == 1000
        with pytest.raises(ValueError):
            sample_noise_trace(default_bath_psd(), 50e-9, 50e-9, seed=0)
        with pytest.raises(ValueError):
            sample_noise_trace(default_bath_psd(), -1e-6, 50e-9, seed=0)

    def test_trace_determinism(self):
        a = sample_noise_trace(default_bath_psd(), 50e-6, 50e-9, seed=11)
        b = sample_noise_trace(default_bath_psd(), 50e-6, 50e-9, seed=11)
        c = sample_noise_trace(default_bath_psd(), 50e-6, 50e-9, seed=12)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_white_variance_matches_quadrature(self):
        # band-limited constant spectrum: Var[xi] -> (1/2pi) * (2 S0 omega_max)
        s0 = 4.0e4
        psd = PowerSpectralDensity(floor=s0)
        T, dt = 50e-6, 50e-9
        pool = build_pool(psd, T, dt, size=3000, master_seed=5, minibatch_size=10)
        omegas, domega = synthesis_grid(psd, T, dt)
        expected = s0 * omegas[-1] / np.pi
        measured = float(np.mean(pool.traces**2))
        assert measured == pytest.approx(expected, rel=0.05)

    def test_wiener_khinchin_lag0(self):
        # empirical lag-0 autocovariance vs (1/2pi) Int S over the band,
        # within 3 combined standard errors
        psd = default_bath_psd()
        T, dt = 50e-6, 50e-9
        pool = build_pool(psd, T, dt, size=20000, master_seed=7)
        grid = np.linspace(0.0, psd.band_limit(dt), 200001)
        target = np.trapz(psd.evaluate(grid), grid) / np.pi
        per_trace = np.mean(pool.traces**2, axis=1)
        mean = per_trace.mean()
        se = per_trace.std(ddof=1) / np.sqrt(pool.size)
        assert abs(mean - target) < 3.0 * se + 0.002 * target

    def test_white_noise_decoherence_oracle(self):
        # <cos Int xi dt> ~ exp(-S0 T / 2) within 2% for S0*T <= 1
        T, dt = 50e-6, 50e-9
        for s0t in (0.5, 1.0):
            s0 = s0t / T
            pool = build_pool(
                PowerSpectralDensity(floor=s0), T, dt, size=4000, master_seed=21, minibatch_size=10
            )
            phases = pool.traces.sum(axis=1) * dt
            coherence = float(np.mean(np.cos(phases)))
            assert coherence == pytest.approx(np.exp(-s0t / 2.0), abs=0.02 * np.exp(-s0t / 2.0))


class TestPool:
    def test_pool_reproducible(self):
        a = build_pool(default_bath_psd(), 20e-6, 50e-9, size=64, master_seed=9, minibatch_size=8)
        b = build_pool(default_bath_psd(), 20e-6, 50e-9, size=64, master_seed=9, minibatch_size=8)
        assert np.array_equal(a.traces, b.traces)

    def test_pool_traces_match_trace_seeding(self):
        # trace i is seeded from (master, i), independent of pool size
        small = build_pool(default_bath_psd(), 20e-6, 50e-9, size=4, master_seed=3, minibatch_size=2)
        large = build_pool(default_bath_psd(), 20e-6, 50e-9, size=8, master_seed=3, minibatch_size=2)
        assert np.allclose(small.traces, large.traces[:4], rtol=0, atol=1e-18)

    def test_pool_validation(self):
        with pytest.raises(ValueError):
            build_pool(default_bath_psd(), 20e-6, 50e-9, size=0, master_seed=0)
        with pytest.raises(ValueError):
            NoisePool(np.zeros((5, 10)), 50e-9, 0, minibatch_size=6)

    def test_minibatch_with_replacement(self):
        pool = build_pool(default_bath_psd(), 20e-6, 50e-9, size=3, master_seed=0, minibatch_size=100)
        idx = draw_minibatch(pool, np.random.default_rng(0))
        assert idx.shape == (100,)
        assert set(np.unique(idx)) <= {0, 1, 2}
        assert len(np.unique(idx)) < 100  # duplicates guaranteed

    def test_single_element_pool(self):
        pool = build_pool(default_bath_psd(), 20e-6, 50e-9, size=1, master_seed=0, minibatch_size=1)
        idx = draw_minibatch(pool, np.random.default_rng(4))
        assert np.array_equal(idx, [0])

    def test_pool_immutable(self):
        pool = build_pool(default_bath_psd(), 20e-6, 50e-9, size=2, master_seed=0, minibatch_size=1)
        with pytest.raises(ValueError):
            pool.traces[0, 0] = 1.0
