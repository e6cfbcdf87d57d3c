"""Channel model: static gain, surface fluctuation, propagation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from w2a_owc import channel as ch
from w2a_owc.modem import WaveformBuffer


def buffers(samples_list, rate=100e6):
    return [WaveformBuffer(np.asarray(s, dtype=np.float64), rate) for s in samples_list]


class TestStaticGain:
    def test_water_loss_no_depth(self):
        assert ch.water_loss(0.5, 0.0) == 1.0

    def test_water_loss_at_tank_depth(self):
        assert ch.water_loss(0.16, 0.47) == pytest.approx(np.exp(-0.0752))
        assert ch.water_loss(0.16, 0.47) == pytest.approx(0.92756, abs=1e-5)

    def test_water_loss_one_meter(self):
        assert ch.water_loss(0.16, 1.0) == pytest.approx(0.85214, abs=1e-5)

    def test_default_spreading_is_unity(self):
        geom = ch.ChannelGeometry()
        params = ch.ChannelParams(gain_scale=1.0)
        assert ch.static_gain(geom, params) == pytest.approx(ch.water_loss(0.16, 0.47))

    def test_spreading_reference(self):
        geom = ch.ChannelGeometry(d_w=0.5, d_a=1.5)  # path 2 m
        params = ch.ChannelParams(attenuation_c=0.0, gain_scale=1.0, ref_distance_m=1.0)
        assert ch.static_gain(geom, params) == pytest.approx(0.25)

    def test_geometry_validated(self):
        with pytest.raises(ValueError):
            ch.ChannelGeometry(d_w=-1.0)
        with pytest.raises(ValueError):
            ch.ChannelGeometry(n_channels=0)


class TestFluctuation:
    def test_calm_is_exactly_one(self):
        state = ch.calm_surface()
        assert ch.fluctuation_gain(state, 0.123) == 1.0
        assert (ch.fluctuation_gain(state, np.linspace(0, 5, 100)) == 1.0).all()

    def test_single_component_quarter_period(self):
        state = ch.WaveSurfaceState(mode="wavy", components=((1.0, 2.0, 0.0),),
                                    modulation_depth=0.5)
        assert ch.fluctuation_gain(state, 0.125) == pytest.approx(1.5)

    def test_depth_bound_rejected(self):
        with pytest.raises(ValueError):
            ch.WaveSurfaceState(mode="wavy", components=((1.0, 2.0, 0.0),),
                                modulation_depth=1.0)

    def test_amplitude_normalization_enforced(self):
        with pytest.raises(ValueError):
            ch.WaveSurfaceState(mode="wavy", components=((0.7, 2.0, 0.0),),
                                modulation_depth=0.5)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=0.0, max_value=0.99),
           st.floats(min_value=0.0, max_value=1e4))
    def test_gain_bounded(self, depth, t):
        state = ch.wavy_surface(modulation_depth=depth)
        g = float(ch.fluctuation_gain(state, t))
        assert 1.0 - depth <= g <= 1.0 + depth
        assert g > 0.0

    def test_interpolated_grid_matches_exact(self):
        state = ch.wavy_surface()
        t0 = np.array([0.0, 12.345])
        offsets = np.arange(2432) * 2e-7 + 1e-7
        fast = ch.fluctuation_gain_at(state, t0, offsets)
        exact = ch.fluctuation_gain(state, t0[:, None] + offsets[None, :])
        assert np.abs(fast - exact).max() < 1e-9


class TestApplyChannel:
    GEOM = ch.ChannelGeometry(n_channels=2)

    def test_noise_statistics(self):
        params = ch.ChannelParams(noise_std=0.25)
        waves = buffers([np.zeros(100_000), np.zeros(100_000)])
        out = ch.apply_channel(waves, self.GEOM, params, ch.calm_surface(), rng_seed=5)
        for w in out:
            assert abs(w.samples.mean()) < 3 * 0.25 / np.sqrt(100_000)
            assert abs(w.samples.std() - 0.25) < 3 * 0.25 / np.sqrt(2 * 100_000)

    def test_noiseless_calm_identity_crosstalk(self):
        params = ch.ChannelParams(noise_std=0.0, gain_scale=0.5)
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 5000))
        out = ch.apply_channel(buffers(x), self.GEOM, params, ch.calm_surface(), 0)
        g = ch.static_gain(self.GEOM, params)
        for i in range(2):
            assert np.allclose(out[i].samples, g * x[i])

    def test_determinism(self):
        params = ch.ChannelParams(noise_std=0.1)
        rng = np.random.default_rng(1)
        x = rng.normal(size=(2, 4000))
        a = ch.apply_channel(buffers(x), self.GEOM, params, ch.wavy_surface(0.3), 42)
        b = ch.apply_channel(buffers(x), self.GEOM, params, ch.wavy_surface(0.3), 42)
        for wa, wb in zip(a, b):
            assert np.array_equal(wa.samples, wb.samples)

    def test_channel_independence_without_crosstalk(self):
        params = ch.ChannelParams(noise_std=0.0)
        rng = np.random.default_rng(2)
        x = rng.normal(size=(2, 3000))
        full = ch.apply_channel(buffers(x), self.GEOM, params, ch.calm_surface(), 0)
        zeroed = x.copy()
        zeroed[1] = 0.0
        part = ch.apply_channel(buffers(zeroed), self.GEOM, params, ch.calm_surface(), 0)
        assert np.array_equal(full[0].samples, part[0].samples)
        assert not part[1].samples.any()

    def test_crosstalk_mixing(self):
        mix = np.array([[0.9, 0.1], [0.2, 0.8]])
        params = ch.ChannelParams(noise_std=0.0, crosstalk=mix)
        x = np.stack([np.ones(100), np.full(100, 2.0)])
        out = ch.apply_channel(buffers(x), self.GEOM, params, ch.calm_surface(), 0)
        g = ch.static_gain(self.GEOM, params)
        assert np.allclose(out[0].samples, g * (0.9 * 1 + 0.1 * 2))
        assert np.allclose(out[1].samples, g * (0.2 * 1 + 0.8 * 2))

    def test_power_scales_quadratically_noiseless(self):
        params = ch.ChannelParams(noise_std=0.0)
        rng = np.random.default_rng(3)
        base = rng.normal(size=(2, 2000))
        p = []
        for scale in (1.0, 3.0):
            out = ch.apply_channel(buffers(scale * base), self.GEOM, params,
                                   ch.calm_surface(), 0)
            p.append(sum((w.samples ** 2).mean() for w in out))
        assert p[1] / p[0] == pytest.approx(9.0)

    def test_wavy_gain_applied_at_sample_times(self):
        state = ch.WaveSurfaceState(mode="wavy", components=((1.0, 1000.0, 0.0),),
                                    modulation_depth=0.5)
        params = ch.ChannelParams(noise_std=0.0)
        x = np.ones((2, 1000))
        out = ch.apply_channel(buffers(x), self.GEOM, params, state, 0)
        t = np.arange(1000) / 100e6
        expected = ch.static_gain(self.GEOM, params) * (1 + 0.5 * np.sin(2e3 * np.pi * t))
        assert np.allclose(out[0].samples, expected)

    def test_mismatched_buffers_rejected(self):
        params = ch.ChannelParams(noise_std=0.0)
        waves = buffers([np.zeros(100), np.zeros(99)])
        with pytest.raises(ValueError):
            ch.apply_channel(waves, self.GEOM, params, ch.calm_surface(), 0)

    def test_crosstalk_validated(self):
        with pytest.raises(ValueError):
            ch.ChannelParams(crosstalk=np.array([[0.5, -0.1], [0.0, 0.5]]))
        with pytest.raises(ValueError):
            ch.ChannelParams(crosstalk=np.array([[1.5, 0.0], [0.0, 0.5]]))
