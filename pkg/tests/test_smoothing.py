import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kld.errors import ConfigError, SeriesError
from kld.utils.smoothing import (
    LOWESS,
    MOVING_AVERAGE,
    SmootherConfig,
    first_derivative,
    lowess,
    min_max_normalize,
    moving_average,
    running_normalize,
    smooth,
)


class TestMovingAverage:
    def test_trailing_window(self):
        result = moving_average([1, 2, 3, 4, 5, 6], window=5)
        np.testing.assert_allclose(result, [1, 1.5, 2, 2.5, 3, 4])

    def test_is_causal(self, rng):
        series = rng.normal(size=50)
        changed = series.copy()
        changed[30:] += 100.0
        np.testing.assert_array_equal(moving_average(series, 7)[:30], moving_average(changed, 7)[:30])

    @given(
        st.lists(st.floats(-100.0, 100.0), min_size=1, max_size=40),
        st.integers(1, 8),
        st.floats(-50.0, 50.0),
        st.floats(0.1, 10.0),
    )
    @settings(max_examples=100)
    def test_shift_and_scale_equivariant(self, series, window, shift, scale):
        values = np.asarray(series)
        smoothed = moving_average(values, window)
        np.testing.assert_allclose(moving_average(values + shift, window), smoothed + shift, atol=1e-9)
        np.testing.assert_allclose(moving_average(scale * values, window), scale * smoothed, atol=1e-9)

    def test_derivative_peaks_at_the_step(self):
        step = np.zeros(100)
        step[50:] = 1.0
        gradient = first_derivative(moving_average(step, 5))
        # gradient[k] compares k and k + 1, so the rise spans gradient[49..53]
        assert 49 <= int(np.argmax(gradient)) <= 53
        np.testing.assert_allclose(gradient[49:54], 0.2, atol=1e-12)
        np.testing.assert_allclose(np.delete(gradient, range(49, 54)), 0.0, atol=1e-12)

    def test_window_one_is_identity(self):
        np.testing.assert_allclose(moving_average([3.0, 1.0, 2.0], 1), [3.0, 1.0, 2.0])

    def test_errors(self):
        with pytest.raises(ConfigError):
            moving_average([1.0, 2.0], 0)
        with pytest.raises(SeriesError):
            moving_average([], 3)


class TestLowess:
    def test_reproduces_a_line(self):
        series = 2.0 * np.arange(40) + 1.0
        np.testing.assert_allclose(lowess(series, frac=0.3, iters=0), series, atol=1e-8)

    def test_scale_equivariant(self, rng):
        series = np.cumsum(rng.normal(size=60))
        np.testing.assert_allclose(lowess(3.0 * series, 0.2, 1), 3.0 * lowess(series, 0.2, 1), atol=1e-8)

    @pytest.mark.parametrize("iters", [0, 1])
    def test_shift_equivariant(self, rng, iters):
        series = np.cumsum(rng.normal(size=60))
        np.testing.assert_allclose(lowess(series + 25.0, 0.2, iters), lowess(series, 0.2, iters) + 25.0, atol=1e-7)

    def test_noisy_step_loses_variance_within_segments(self, rng):
        series = np.where(np.arange(100) < 50, 0.0, 5.0) + rng.normal(size=100)
        smoothed = lowess(series, frac=0.2, iters=1)
        for flat in (slice(15, 35), slice(65, 85)):
            assert np.var(smoothed[flat]) < np.var(series[flat])

    def test_length_preserved(self, rng):
        assert len(lowess(rng.normal(size=25), 0.05, 1)) == 25

    def test_errors(self):
        with pytest.raises(ConfigError):
            lowess([1.0, 2.0, 3.0], frac=0.0)
        with pytest.raises(ConfigError):
            lowess([1.0, 2.0, 3.0], iters=-1)
        with pytest.raises(SeriesError):
            lowess([1.0])


class TestSeriesHelpers:
    def test_first_derivative(self):
        np.testing.assert_allclose(first_derivative([1.0, 4.0, 2.0]), [3.0, -2.0])
        with pytest.raises(SeriesError):
            first_derivative([1.0])

    def test_min_max_normalize(self):
        np.testing.assert_allclose(min_max_normalize([2.0, 4.0, 3.0]), [0.0, 1.0, 0.5])
        np.testing.assert_array_equal(min_max_normalize([5.0, 5.0]), [0.0, 0.0])

    def test_running_normalize(self):
        assert running_normalize(3.0, 2.0, 4.0) == 0.5
        assert running_normalize(9.0, 2.0, 4.0) == 1.0
        assert running_normalize(1.0, 1.0, 1.0) == 0.0


class TestSmootherConfig:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("ma", SmootherConfig(MOVING_AVERAGE, window=5)),
            ("ma:9", SmootherConfig(MOVING_AVERAGE, window=9)),
            ("lowess", SmootherConfig(LOWESS)),
            ("lowess:0.1:2", SmootherConfig(LOWESS, frac=0.1, iters=2)),
        ],
    )
    def test_parse(self, text, expected):
        assert SmootherConfig.parse(text) == expected

    def test_string_form_round_trips(self):
        for text in ("ma:7", "lowess:0.05:1"):
            assert str(SmootherConfig.parse(text)) == text

    @pytest.mark.parametrize("text", ["median:3", "ma:x", "ma:3:4", "lowess:2.0", "ma:0"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigError):
            SmootherConfig.parse(text)

    def test_only_moving_average_is_causal(self):
        assert SmootherConfig.parse("ma:3").causal
        assert not SmootherConfig.parse("lowess").causal

    def test_smooth_dispatch(self):
        series = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        np.testing.assert_allclose(smooth(series, SmootherConfig(window=5)), moving_average(series, 5))
