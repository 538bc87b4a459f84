"""Relay-selection math against hand-computed values and ranges."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanetsim.forwarding import (
    composite_metric,
    contention_delay,
    geographic_distance_metric,
    in_forwarding_zone,
    relative_speed_metric,
)


class TestZonePredicate:
    def test_toward_destination_high_energy(self):
        assert in_forwarding_zone(0.0, 50.0, 10.0, 90.0)

    def test_boundary_angle_inclusive(self):
        assert in_forwarding_zone(90.0, 50.0, 10.0, 90.0)

    def test_low_energy_excluded_despite_good_angle(self):
        assert not in_forwarding_zone(45.0, 9.9, 10.0, 90.0)

    def test_threshold_energy_inclusive(self):
        assert in_forwarding_zone(45.0, 10.0, 10.0, 90.0)

    def test_rear_candidate_excluded(self):
        assert not in_forwarding_zone(150.0, 50.0, 10.0, 90.0)

    def test_angle_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            in_forwarding_zone(181.0, 50.0, 10.0, 90.0)


class TestGeographicDistance:
    def test_no_progress_is_one(self):
        assert geographic_distance_metric(300.0, 300.0, 250.0) == pytest.approx(1.0)

    def test_full_range_advance_is_zero(self):
        assert geographic_distance_metric(400.0, 150.0, 250.0) == pytest.approx(0.0)

    def test_worked_values(self):
        # |1 - (300-160)/250| = |1 - 0.56| = 0.44
        assert geographic_distance_metric(300.0, 160.0, 250.0) == pytest.approx(0.44, abs=1e-12)

    def test_regress_exceeds_one(self):
        assert geographic_distance_metric(100.0, 300.0, 250.0) == pytest.approx(1.8)

    def test_bad_range_rejected(self):
        with pytest.raises(ValueError):
            geographic_distance_metric(10.0, 10.0, 0.0)

    @given(
        st.floats(min_value=0, max_value=2000),
        st.floats(min_value=0, max_value=2000),
        st.floats(min_value=1, max_value=500),
    )
    def test_range_under_one_hop_constraint(self, dp, dn, r):
        if abs(dp - dn) > r:
            return  # outside the 1-hop triangle constraint
        assert 0.0 <= geographic_distance_metric(dp, dn, r) <= 2.0


class TestRelativeSpeed:
    def test_identical_speeds(self):
        assert relative_speed_metric(5.0, 5.0, 7.0) == 0.0

    def test_extreme(self):
        assert relative_speed_metric(6.944, 0.0, 6.944) == pytest.approx(1.0)

    def test_worked_value(self):
        v_max = 25 / 3.6
        assert relative_speed_metric(6.4, 5.84, v_max) == pytest.approx(abs(6.4 - 5.84) / v_max)
        assert relative_speed_metric(6.4, 5.84, v_max) == pytest.approx(0.0806, abs=5e-4)

    def test_bad_vmax_rejected(self):
        with pytest.raises(ValueError):
            relative_speed_metric(1.0, 2.0, 0.0)

    @given(
        st.floats(min_value=0, max_value=7.0),
        st.floats(min_value=0, max_value=7.0),
    )
    def test_range(self, a, b):
        assert 0.0 <= relative_speed_metric(a, b, 7.0) <= 1.0


class TestCompositeMetric:
    def test_quoted_pairs(self):
        assert composite_metric(0.44, 0.08, 0.5, 0.5) == pytest.approx(0.26, abs=1e-9)
        assert composite_metric(0.72, 0.16, 0.5, 0.5) == pytest.approx(0.44, abs=1e-9)

    def test_best_candidate(self):
        assert composite_metric(0.0, 0.0) == 0.0


class TestContentionDelay:
    def test_lower_metric_fires_first(self):
        a = contention_delay(0.26, 6, 0.01, 2e-7)
        b = contention_delay(0.44, 7, 0.01, 2e-7)
        assert a == pytest.approx(0.0026, abs=1e-5)
        assert b == pytest.approx(0.0044, abs=1e-5)
        assert a < b

    def test_zero_metric_still_positive(self):
        assert contention_delay(0.0, 0, 0.01, 2e-7) > 0.0

    def test_equal_metric_tie_breaks_by_id(self):
        assert contention_delay(0.3, 3, 0.01, 2e-7) < contention_delay(0.3, 9, 0.01, 2e-7)

    def test_negative_metric_rejected(self):
        with pytest.raises(ValueError):
            contention_delay(-0.1, 0, 0.01, 2e-7)

    @given(st.floats(min_value=0, max_value=3), st.floats(min_value=0, max_value=3))
    def test_strictly_increasing_in_metric_per_node(self, m1, m2):
        if abs(m1 - m2) < 1e-12:
            return  # below float resolution of the slot scaling
        lo, hi = sorted((m1, m2))
        assert contention_delay(lo, 5, 0.01, 2e-7) < contention_delay(hi, 5, 0.01, 2e-7)
