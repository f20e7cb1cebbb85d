import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wvcl.errors import DegenerateInputError, InvalidInputError
from wvcl.features import (ALL_STATS, StatKind, frequency_domain_features, stat,
                           time_domain_features)


def percentile_oracle(values, q):
    """Sort, then interpolate linearly between ranks floor(q(n-1)) and ceil(q(n-1))."""
    s = sorted(values)
    r = q * (len(s) - 1)
    lo, hi = math.floor(r), math.ceil(r)
    return s[lo] + (s[hi] - s[lo]) * (r - lo)


def dft_oracle(x):
    n = len(x)
    return [sum(x[t] * np.exp(-2j * np.pi * k * t / n) for t in range(n)) / math.sqrt(n) for k in range(n)]


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
positive = st.floats(0.1, 1e3, allow_nan=False, allow_infinity=False)


class TestStat:
    def test_constant_vector(self):
        v = [3, 3, 3, 3]
        assert stat(v, StatKind.VARIANCE) == 0
        assert stat(v, StatKind.IQR) == 0
        assert stat(v, StatKind.MAXMIN_RATIO) == 1
        assert stat(v, StatKind.SKEWNESS) == 0

    def test_symmetric_vector(self):
        v = [-2, -1, 1, 2]
        assert stat(v, StatKind.SKEWNESS) == pytest.approx(0, abs=1e-15)
        assert stat(v, StatKind.MEAN) == 0

    def test_iqr_one_to_eight(self):
        v = list(range(1, 9))
        golden = percentile_oracle(v, 0.75) - percentile_oracle(v, 0.25)
        assert golden == 3.5
        assert stat(v, StatKind.IQR) == pytest.approx(3.5, abs=1e-15)

    def test_population_variance_and_g1(self):
        v = np.array([1.0, 2.0, 2.0, 7.0])
        d = v - v.mean()
        assert stat(v, "variance") == pytest.approx(np.sum(d**2) / 4)
        assert stat(v, "skewness") == pytest.approx(np.mean(d**3) / np.mean(d**2) ** 1.5)

    def test_maxmin_zero_min(self):
        with pytest.raises(DegenerateInputError):
            stat([0.0, 1.0], StatKind.MAXMIN_RATIO)

    @pytest.mark.parametrize("kind", [StatKind.VARIANCE, StatKind.SKEWNESS, StatKind.IQR])
    def test_needs_two_values(self, kind):
        with pytest.raises(InvalidInputError):
            stat([1.0], kind)

    def test_parse_names(self):
        assert StatKind.parse("MaxMinRatio") is StatKind.MAXMIN_RATIO
        assert StatKind.parse("Iqr") is StatKind.IQR
        with pytest.raises(InvalidInputError):
            StatKind.parse("kurtosis")

    @given(st.lists(finite, min_size=2, max_size=60), st.floats(0.25, 0.75))
    def test_iqr_matches_oracle(self, values, _):
        expected = percentile_oracle(values, 0.75) - percentile_oracle(values, 0.25)
        assert stat(values, StatKind.IQR) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    @given(st.lists(positive, min_size=2, max_size=50), st.floats(0.01, 100))
    def test_scale_laws(self, values, c):
        v = np.array(values)
        assert stat(c * v, "variance") == pytest.approx(c**2 * stat(v, "variance"), rel=1e-9, abs=1e-9)
        assert stat(c * v, "mean") == pytest.approx(c * stat(v, "mean"), rel=1e-9)
        assert stat(c * v, "iqr") == pytest.approx(c * stat(v, "iqr"), rel=1e-9, abs=1e-9)
        assert stat(c * v, "maxmin") == pytest.approx(stat(v, "maxmin"), rel=1e-9)
        if stat(v, "variance") > 1e-6 * np.mean(v) ** 2:
            assert stat(c * v, "skewness") == pytest.approx(stat(v, "skewness"), rel=1e-6, abs=1e-6)

    @given(arrays(np.float64, st.integers(2, 40), elements=positive), st.randoms())
    def test_permutation_invariance(self, v, rnd):
        p = v.copy()
        rnd.shuffle(p)
        for kind in ALL_STATS:
            assert stat(p, kind) == pytest.approx(stat(v, kind), rel=1e-9, abs=1e-12)


class TestDomainFeatures:
    def test_variance_of_constant_magnitude(self):
        x = np.exp(1j * np.linspace(0, 7, 100))
        assert time_domain_features(x, [StatKind.VARIANCE])[0] == pytest.approx(0, abs=1e-15)

    def test_all_kinds_length_and_order(self, rng):
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        f = time_domain_features(x, reversed(ALL_STATS))
        assert f.shape == (5,)
        assert f[0] == pytest.approx(np.mean(np.abs(x)))
        assert f[4] == pytest.approx(stat(np.abs(x), "iqr"))

    def test_global_phase_invariance(self, rng):
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        assert np.allclose(time_domain_features(x), time_domain_features(x * np.exp(0.7j)))

    def test_tone_against_naive_dft(self):
        n = 64
        tone = np.exp(2j * np.pi * 10.5 * np.arange(n) / n)
        mags = np.abs(dft_oracle(list(tone)))
        expected = [np.mean(mags), np.var(mags),
                    np.mean((mags - mags.mean()) ** 3) / np.var(mags) ** 1.5,
                    mags.max() / mags.min(),
                    percentile_oracle(mags, 0.75) - percentile_oracle(mags, 0.25)]
        assert np.allclose(frequency_domain_features(tone), expected, rtol=1e-9)
        assert frequency_domain_features(tone, ["maxmin"])[0] == pytest.approx(40.735484, abs=1e-6)

    def test_integer_bin_tone_has_huge_ratio(self):
        n = 64
        tone = np.exp(2j * np.pi * 10 * np.arange(n) / n)
        try:
            ratio = frequency_domain_features(tone, ["maxmin"])[0]
        except DegenerateInputError:
            return
        assert ratio > 1e10

    def test_white_frame_mean_is_stable(self):
        r = np.random.default_rng(0)
        means = []
        for _ in range(10_000):
            x = (r.standard_normal(128) + 1j * r.standard_normal(128)) / np.sqrt(2)
            means.append(frequency_domain_features(x, ["mean"])[0])
        # |DFT| of unit-power white noise is Rayleigh with mean sqrt(pi)/2
        assert abs(np.mean(means) / (np.sqrt(np.pi) / 2) - 1) < 0.05

    @given(st.integers(0, 63), st.integers(0, 2**31))
    def test_circular_shift_invariance(self, shift, seed):
        r = np.random.default_rng(seed)
        x = r.standard_normal(64) + 1j * r.standard_normal(64)
        assert np.allclose(frequency_domain_features(np.roll(x, shift)), frequency_domain_features(x),
                           rtol=1e-9, atol=1e-9)

    def test_empty_frame(self):
        with pytest.raises(InvalidInputError):
            time_domain_features(np.array([]))
