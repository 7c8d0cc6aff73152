import numpy as np
import pytest

from kld.errors import ConfigError, SeriesError
from kld.utils.baselines import BaselineConfig, cusum, ewma, run_baseline, standardize
from kld.utils.detector import DetectorConfig, detect_batch
from kld.utils.evaluation import match


def step_signal(height, n=100, at=50):
    signal = np.zeros(n)
    signal[at:] = height
    return signal


def alternating(n=50):
    return np.array([1.0 if i % 2 == 0 else -1.0 for i in range(n)])


def staircase():
    """Levels 0, 3 and 6 (50, 100 and 100 samples) with +/-1 alternating noise"""
    levels = np.concatenate([np.zeros(50), np.full(100, 3.0), np.full(100, 6.0)])
    return levels + alternating(250)


class TestCusum:
    def test_zero_signal(self):
        assert cusum(np.zeros(100), kappa=0.0, h=1.0) == []

    def test_step_alarm_and_reset(self):
        alarms = cusum(step_signal(1.0, n=60), kappa=0.1, h=2.0)
        assert alarms == [52, 55, 58]

    def test_larger_threshold_alarms_later(self):
        signal = step_signal(0.7)
        firsts = [cusum(signal, 0.1, h)[0] for h in (0.5, 1.0, 2.0, 4.0, 8.0)]
        assert firsts == sorted(firsts)

    def test_is_causal(self, rng):
        signal = rng.normal(size=200)
        changed = signal.copy()
        changed[120:] += 10.0
        prefix = [k for k in cusum(changed, 0.5, 3.0) if k < 120]
        assert prefix == [k for k in cusum(signal, 0.5, 3.0) if k < 120]

    def test_errors(self):
        with pytest.raises(ConfigError):
            cusum(np.zeros(60), kappa=0.1, h=0.0)
        with pytest.raises(ConfigError):
            cusum(np.zeros(60), kappa=-0.1, h=1.0)
        with pytest.raises(SeriesError):
            cusum(np.zeros(10), kappa=0.1, h=1.0)


class TestEwma:
    def test_constant_signal(self):
        assert ewma(np.full(80, 2.0), lam=0.2, c=3.0) == []

    def test_raw_chart_rearms(self):
        signal = np.concatenate([alternating(), [5.0, 5.0, 0.0, 5.0]])
        assert ewma(signal, lam=1.0, c=3.0) == [50, 53]

    @pytest.mark.parametrize("lam, expected", [(0.1, 52), (0.3, 51)])
    def test_step_detection_delay(self, lam, expected):
        signal = np.concatenate([alternating(), np.full(10, 3.0)])
        assert ewma(signal, lam=lam, c=3.0)[0] == expected

    def test_errors(self):
        with pytest.raises(ConfigError):
            ewma(np.zeros(60), lam=0.0, c=3.0)
        with pytest.raises(ConfigError):
            ewma(np.zeros(60), lam=0.2, c=0.0)
        with pytest.raises(SeriesError):
            ewma(np.zeros(3), lam=0.2, c=3.0, warmup=5)


class TestBaselineConfig:
    def test_parse(self):
        config = BaselineConfig.parse("cusum:0.1,2.0", warmup=5)
        assert (config.kind, config.kappa, config.h, config.warmup) == ("cusum", 0.1, 2.0, 5)
        assert config.label == "cusum:0.1,2.0"

    def test_parse_keeps_defaults(self):
        config = BaselineConfig.parse("ewma:0.3")
        assert (config.lam, config.c) == (0.3, 3.0)
        assert config.to_dict() == {"kind": "ewma", "lam": 0.3, "c": 3.0, "warmup": 50, "restart": True}

    @pytest.mark.parametrize("text", ["page:1,2", "cusum:a", "cusum:1,2,3", "ewma:0,3"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigError):
            BaselineConfig.parse(text)


class TestRunBaseline:
    def test_standardize(self):
        signal = np.concatenate([10.0 + 2.0 * alternating(), [16.0]])
        np.testing.assert_allclose(standardize(signal, 50)[-3:], [1.0, -1.0, 3.0])

    def test_constant_prefix_is_only_shifted(self):
        np.testing.assert_allclose(standardize([4.0, 4.0, 7.0], 2), [0.0, 0.0, 3.0])

    def test_thresholds_in_sigma_units(self):
        signal = np.concatenate([10.0 + 2.0 * alternating(), np.full(10, 16.0)])
        assert run_baseline(signal, BaselineConfig(restart=False)) == [52, 55, 58]
        assert run_baseline(signal, BaselineConfig()) == [52]
        assert run_baseline(signal, BaselineConfig(kind="ewma", lam=0.3)) == [51]

    def test_restart_follows_a_staircase(self):
        signal = staircase()
        assert run_baseline(signal, BaselineConfig()) == [52, 152]
        assert run_baseline(signal, BaselineConfig(kind="ewma")) == [51, 152]

    def test_fixed_reference_keeps_alarming_or_goes_silent(self):
        signal = staircase()
        fixed = run_baseline(signal, BaselineConfig(restart=False))
        assert fixed[:3] == [52, 55, 58]
        assert len(fixed) > 10
        assert run_baseline(signal, BaselineConfig(kind="ewma", restart=False)) == [51]

    def test_restart_needs_a_full_warmup(self):
        signal = np.concatenate([alternating(), np.full(30, 9.0)])
        assert run_baseline(signal, BaselineConfig()) == [50]

    def test_short_signal(self):
        with pytest.raises(SeriesError):
            run_baseline(np.zeros(10), BaselineConfig())

    @pytest.mark.parametrize("kind", ["cusum", "ewma"])
    def test_defaults_find_generated_drifts(self, sudden_drift_stream, kind):
        report = detect_batch(sudden_drift_stream, DetectorConfig())
        alarms = [report.rows[k]["chunk"] for k in run_baseline(report.raw_series, BaselineConfig(kind=kind))]
        assert match(sudden_drift_stream.meta.ground_truth, alarms, tolerance=50).tp >= 3
