import numpy as np
import pytest

from senseopt.fields import (
    GYRO_RAD_PER_S_UT,
    MultiToneField,
    PhotocurrentField,
    eval_multitone,
    eval_photocurrent,
)

TRI = dict(weights=(0.45, 0.43, 0.12), freqs_hz=(77e3, 96e3, 144e3), phases=(0.3, 0.3, 0.3))


class TestMultiTone:
    def test_value_at_zero(self):
        f = MultiToneField(**TRI)
        # all three cosines start at cos(0.3), weights sum to 1
        assert eval_multitone(f, 0.0) == pytest.approx(0.955336489125606, rel=1e-14)
        assert f.evaluate(0.0) == pytest.approx(np.cos(0.3), rel=1e-14)

    def test_single_tone_half_period(self):
        nu = 83e3
        f = MultiToneField((1.0,), (nu,), (0.0,))
        assert f.evaluate(1.0 / (2 * nu)) == pytest.approx(-1.0, rel=1e-12)

    def test_weight_sum_enforced(self):
        with pytest.raises(ValueError):
            MultiToneField((0.5, 0.6), (1e3, 2e3), (0.0, 0.0))
        with pytest.raises(ValueError):
            MultiToneField((1.5, -0.5), (1e3, 2e3), (0.0, 0.0))

    def test_positive_frequencies_required(self):
        with pytest.raises(ValueError):
            MultiToneField((1.0,), (0.0,), (0.0,))

    def test_periodicity_commensurate(self):
        # 20 kHz and 60 kHz share a 50 us period
        f = MultiToneField((0.7, 0.3), (20e3, 60e3), (0.4, 1.1))
        t = np.linspace(0, 49e-6, 77)
        assert np.allclose(f.evaluate(t + 50e-6), f.evaluate(t), rtol=0, atol=1e-12)

    def test_integral_matches_quadrature(self):
        from scipy.integrate import quad

        f = MultiToneField(**TRI)
        val, _ = quad(f.evaluate, 3e-6, 31e-6, limit=200)
        assert f.integral(3e-6, 31e-6) == pytest.approx(val, rel=1e-10)

    def test_sensed_field_linear_in_amplitude(self):
        f1 = MultiToneField(**TRI, amplitude_ut=1.0)
        f3 = MultiToneField(**TRI, amplitude_ut=3.0)
        t = np.linspace(0, 5e-5, 11)
        # envelope is amplitude-independent; the sensed field b*f(t) is linear in b
        assert np.array_equal(f1.evaluate(t), f3.evaluate(t))
        assert np.allclose(
            f3.amplitude_ut * f3.evaluate(t), 3.0 * f1.amplitude_ut * f1.evaluate(t)
        )

    def test_gyromagnetic_ratio_value(self):
        assert GYRO_RAD_PER_S_UT == pytest.approx(2 * np.pi * 2.81e4, rel=1e-15)


class TestPhotocurrent:
    def field(self, switches=(0.0, 7.6e-6, 15.2e-6, 22.8e-6)):
        return PhotocurrentField(b_max_mg=0.5016, tau_rise=1.3e-6, switch_times=switches)

    def test_rise_one_time_constant(self):
        f = self.field(switches=(0.0,))
        assert f.evaluate_normalized(1.3e-6) == pytest.approx(1.0 - np.exp(-1.0), rel=1e-12)
        assert eval_photocurrent(f, 1.3e-6) == pytest.approx(
            0.5016 * (1 - np.exp(-1.0)), rel=1e-12
        )

    def test_monotone_approach_to_ceiling(self):
        f = self.field(switches=(0.0,))
        t = np.linspace(0, 30e-6, 300)
        vals = f.evaluate_normalized(t)
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] < 1.0
        assert f.evaluate_normalized(1e-3) == pytest.approx(1.0, abs=1e-12)

    def test_before_first_switch_is_zero(self):
        f = self.field(switches=(5e-6, 9e-6))
        assert f.evaluate_normalized(0.0) == 0.0
        assert f.evaluate_normalized(4.99e-6) == 0.0

    def test_continuity_at_switches(self):
        f = self.field()
        eps = 1e-13
        for tau in f.switch_times[1:]:
            below = f.evaluate_normalized(tau - eps)
            above = f.evaluate_normalized(tau + eps)
            assert above == pytest.approx(below, abs=1e-6)
        # exact level continuity by construction
        for j, tau in enumerate(f.switch_times):
            assert f.evaluate_normalized(tau) == pytest.approx(f._levels[j], abs=0)

    def test_bounds(self):
        f = self.field()
        t = np.linspace(0, 40e-6, 4001)
        vals = f.evaluate_normalized(t)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    def test_unsorted_switches_rejected(self):
        with pytest.raises(ValueError):
            self.field(switches=(1e-6, 1e-6))
        with pytest.raises(ValueError):
            self.field(switches=(2e-6, 1e-6))

    def test_integral_matches_quadrature(self):
        from scipy.integrate import quad

        f = self.field()
        total = 0.0
        for a, b in [(0, 7.6e-6), (7.6e-6, 15.2e-6), (15.2e-6, 29e-6)]:
            v, _ = quad(lambda t: f.evaluate_normalized(t), a, b, limit=400)
            total += v
        assert f.normalized_integral(0.0, 29e-6) == pytest.approx(total, rel=1e-9)
        # signed for reversed bounds
        assert f.normalized_integral(29e-6, 0.0) == pytest.approx(-total, rel=1e-9)

    def test_milligauss_conversion(self):
        assert self.field().b_max_ut == pytest.approx(0.05016, rel=1e-15)
