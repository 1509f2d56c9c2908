import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import rice

from risopt.channel import CascadedChannel, ChannelRealization, cascade, load_realization, sample, save_realization
from risopt.exceptions import ValidationError


@pytest.fixture
def big_params(reference_params):
    return reference_params.with_(N_hw=1_000_000)


def test_rician_power_with_los_ratio_four(big_params):
    ch = sample(big_params, 1)
    # LOS power 4 plus unit scattered power
    assert np.mean(np.abs(ch.h) ** 2) == pytest.approx(5.0, rel=0.01)
    assert np.mean(np.abs(ch.g) ** 2) == pytest.approx(5.0, rel=0.01)


def test_rayleigh_when_no_los(big_params):
    ch = sample(big_params.with_(rice_los_ratio=0.0), 2)
    assert np.mean(np.abs(ch.h) ** 2) == pytest.approx(1.0, rel=0.01)
    assert abs(np.mean(ch.h)) < 0.01


def test_mean_cascaded_gain_matches_rice_law(big_params):
    # E|h g| = (E|h|)**2 for independent Rice(nu=2, sigma^2=1/2) magnitudes
    sigma = math.sqrt(0.5)
    expected = rice(b=2.0 / sigma, scale=sigma).mean() ** 2
    alpha = cascade(sample(big_params.with_(N_hw=200_000), 3)).alpha
    assert alpha.mean() == pytest.approx(expected, rel=0.01)


def test_same_seed_same_realization(reference_params):
    a, b = sample(reference_params, 42), sample(reference_params, 42)
    assert a == b
    assert np.array_equal(a.h, b.h) and np.array_equal(a.g, b.g) and a.h_F == b.h_F
    assert sample(reference_params, 43) != a


def test_cascade_two_element_example():
    cc = cascade(ChannelRealization([1, 2j], [3, 1], 1.0))
    np.testing.assert_array_equal(cc.alpha, [3.0, 2.0])
    np.testing.assert_array_equal(cc.perm, [0, 1])
    np.testing.assert_array_equal(cc.prefix, [3.0, 5.0])


def test_cascade_reorders_and_breaks_ties_by_index():
    cc = cascade(ChannelRealization([1, 2, 1, 3], [1, 1, 1, 1], 1.0))
    np.testing.assert_array_equal(cc.alpha, [3, 2, 1, 1])
    np.testing.assert_array_equal(cc.perm, [3, 1, 0, 2])


def test_alpha_max_is_first(reference_params):
    ch = sample(reference_params, 5)
    cc = cascade(ch)
    assert cc.alpha_max == cc.alpha[0] == np.max(np.abs(ch.h * ch.g))


def test_prefix_total_is_permutation_invariant(reference_params):
    ch = sample(reference_params.with_(N_hw=50), 11)
    cc = cascade(ch)
    unsorted_total = math.fsum(abs(complex(h) * complex(g)) for h, g in zip(ch.h, ch.g))
    assert cc.prefix[-1] == pytest.approx(unsorted_total, rel=1e-12)


@given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 300), los=st.floats(0.0, 10.0))
@settings(max_examples=60, deadline=None)
def test_cascade_invariants(reference_params, seed, n, los):
    ch = sample(reference_params.with_(N_hw=n, rice_los_ratio=los), seed)
    cc = cascade(ch)
    raw = np.abs(ch.h * ch.g)
    assert np.all(np.diff(cc.alpha) <= 0)
    assert np.all(np.diff(cc.prefix) > 0)
    np.testing.assert_allclose(cc.prefix, np.cumsum(cc.alpha), rtol=0, atol=0)
    assert sorted(cc.perm.tolist()) == list(range(n))
    np.testing.assert_array_equal(np.sort(raw)[::-1], cc.alpha)
    np.testing.assert_array_equal(raw[cc.perm], cc.alpha)


def test_realization_validation():
    with pytest.raises(ValidationError):
        ChannelRealization([1, 2], [1], 1.0)
    with pytest.raises(ValidationError):
        ChannelRealization([np.nan], [1], 1.0)
    with pytest.raises(ValidationError):
        ChannelRealization([], [], 1.0)


def test_realization_arrays_are_read_only(reference_params):
    ch = sample(reference_params, 0)
    with pytest.raises(ValueError):
        ch.h[0] = 0


def test_from_alpha_builds_sorted_cascade():
    cc = CascadedChannel.from_alpha([1.0, 3.0, 2.0])
    np.testing.assert_array_equal(cc.alpha, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(cc.perm, [1, 2, 0])


def test_text_record_round_trip(reference_params, tmp_path):
    ch = sample(reference_params.with_(N_hw=17), 9)
    path = tmp_path / "ch.txt"
    save_realization(ch, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# risopt-channel v1")
    assert lines[1].startswith("h_F ")
    assert len(lines) == 2 + 17
    assert load_realization(path) == ch


def test_text_record_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("hello\n")
    with pytest.raises(ValidationError):
        load_realization(path)
