"""MOS discretization: boundaries, monotonicity, bin counts."""
import pytest
from hypothesis import given, strategies as st

from videoqoe.errors import ConfigError, DomainError
from videoqoe.mos import DiscretizationSpec, discretize_mos, occupied_bins


def test_three_bin_split_for_width_one_third_of_range():
    spec = DiscretizationSpec(interval_size=1.33)
    assert spec.num_bins == 3
    got = [discretize_mos(m, spec) for m in (1.0, 2.0, 3.0, 4.0, 5.0)]
    assert got == [0, 0, 1, 2, 2]


def test_three_bin_boundaries():
    spec = DiscretizationSpec(interval_size=1.33)
    edges = spec.boundaries()
    assert len(edges) == 4
    assert edges[0] == 1.0 and edges[-1] == 5.0
    assert abs(edges[1] - 7 / 3) < 1e-12
    assert abs(edges[2] - 11 / 3) < 1e-12
    # 3.0 sits inside the middle bin [2.33.., 3.66..).
    assert discretize_mos(3.0, spec) == 1
    assert discretize_mos(edges[1] + 1e-9, spec) == 1
    assert discretize_mos(edges[1] - 1e-9, spec) == 0


def test_nominal_bin_counts_for_standard_widths():
    assert DiscretizationSpec(1.33).num_bins == 3
    assert DiscretizationSpec(0.5).num_bins == 8
    assert DiscretizationSpec(0.25).num_bins == 16
    assert DiscretizationSpec(0.125).num_bins == 32


def test_last_bin_absorbs_remainder():
    # Width 0.75 gives ceil(4 / 0.75) = 6 bins; 5.0 lands in bin 5.
    spec = DiscretizationSpec(interval_size=0.75)
    assert spec.num_bins == 6
    assert discretize_mos(5.0, spec) == 5
    assert discretize_mos(4.75, spec) == 5
    assert discretize_mos(4.74, spec) == 4


def test_extremes_always_map_to_first_and_last_bin():
    for width in (1.33, 0.5, 0.25, 0.125, 0.75, 2.0, 4.0):
        spec = DiscretizationSpec(interval_size=width)
        assert discretize_mos(1.0, spec) == 0
        assert discretize_mos(5.0, spec) == spec.num_bins - 1


def test_monotonic_over_a_fine_sweep():
    for width in (1.33, 0.5, 0.25, 0.125, 0.7):
        spec = DiscretizationSpec(interval_size=width)
        prev = -1
        m = 1.0
        while m <= 5.0 + 1e-12:
            label = discretize_mos(min(m, 5.0), spec)
            assert label >= prev
            assert 0 <= label < spec.num_bins
            prev = label
            m += 0.01


@given(
    mos=st.floats(1.0, 5.0),
    width=st.floats(0.05, 4.0),
)
def test_labels_always_in_range(mos, width):
    spec = DiscretizationSpec(interval_size=width)
    label = discretize_mos(mos, spec)
    assert 0 <= label < spec.num_bins


def test_occupied_bins_of_a_plain_score_set():
    spec = DiscretizationSpec(interval_size=1.33)
    assert occupied_bins([1.0, 2.0, 3.0, 4.0, 5.0], spec) == 3
    assert occupied_bins([1.0, 1.5], spec) == 1


def test_out_of_range_inputs_raise():
    spec = DiscretizationSpec()
    with pytest.raises(DomainError):
        discretize_mos(0.5, spec)
    with pytest.raises(DomainError):
        discretize_mos(5.1, spec)
    with pytest.raises(ConfigError):
        DiscretizationSpec(interval_size=0.0)
    with pytest.raises(ConfigError):
        DiscretizationSpec(interval_size=4.5)
