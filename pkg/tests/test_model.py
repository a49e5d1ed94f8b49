import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabisim.model import (DressedLevel, PhysicalParams, RateTable, boltzmann_factor,
                           build_dressed_ladder, detailed_balance_rates, frequency_gap,
                           thermal_weights)

rate_floats = st.floats(min_value=0.0, max_value=1e5, allow_nan=False)


class TestPhysicalParams:
    def test_defaults_are_valid(self):
        p = PhysicalParams()
        assert p.omega0 == pytest.approx(2 * math.pi * 51.099e9)
        assert p.g == pytest.approx(47e3 * math.pi)
        assert p.temperature == 0.8

    @pytest.mark.parametrize("kwargs", [
        {"omega0": 0.0}, {"omega0": -1.0}, {"g": 0.0}, {"temperature": -0.1},
        {"geometry_ratio": 0.0},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            PhysicalParams(**kwargs)

    def test_geometry_from_mode_profile(self):
        p = PhysicalParams.from_mode_geometry(5.97e-3, 27.57e-3)
        assert p.geometry_ratio == pytest.approx(math.sqrt(math.pi) * 5.97 / 27.57)


class TestDressedLadder:
    def test_level_count_and_order(self, params):
        ladder = build_dressed_ladder(params, 2)
        assert ladder.dimension == 5
        kinds = [(lv.doublet, lv.branch) for lv in ladder.levels]
        assert kinds == [(2, "plus"), (2, "minus"), (1, "plus"), (1, "minus"), (0, "ground")]

    def test_zero_doublets_rejected(self, params):
        with pytest.raises(ValueError):
            build_dressed_ladder(params, 0)

    def test_first_doublet_splitting(self, params):
        ladder = build_dressed_ladder(params, 1)
        gap = frequency_gap(ladder.level(1, "plus"), ladder.level(1, "minus"))
        assert gap == pytest.approx(2 * params.g, rel=1e-15)

    def test_second_doublet_splitting(self, params):
        ladder = build_dressed_ladder(params, 2)
        gap = frequency_gap(ladder.level(2, "plus"), ladder.level(2, "minus"))
        assert gap == pytest.approx(2 * math.sqrt(2) * params.g, rel=1e-15)

    def test_plus_to_ground_gap(self, params):
        # the energy entering the gamma_a Boltzmann factor
        ladder = build_dressed_ladder(params, 1)
        gap = frequency_gap(ladder.level(1, "plus"), ladder.level(0))
        assert gap == pytest.approx(params.omega0 + params.g, rel=1e-15)

    def test_ground_frequency(self, params):
        ladder = build_dressed_ladder(params, 3)
        assert ladder.level(0).frequency == pytest.approx(-0.5 * params.omega0)

    def test_doublet_center(self, params):
        ladder = build_dressed_ladder(params, 3)
        for n in range(1, 4):
            center = 0.5 * (ladder.level(n, "plus").frequency
                            + ladder.level(n, "minus").frequency)
            assert center == pytest.approx((n - 0.5) * params.omega0)

    @given(n=st.integers(min_value=1, max_value=6),
           g=st.floats(min_value=1e-3, max_value=1e7),
           omega0=st.floats(min_value=1e-2, max_value=1e12))
    def test_splitting_invariant(self, n, g, omega0):
        params = PhysicalParams(omega0=omega0, g=g, temperature=0.8)
        ladder = build_dressed_ladder(params, n)
        gap = frequency_gap(ladder.level(n, "plus"), ladder.level(n, "minus"))
        assert gap == pytest.approx(2 * math.sqrt(n) * g, rel=1e-12)

    def test_index_round_trip(self, params):
        ladder = build_dressed_ladder(params, 3)
        for i, lv in enumerate(ladder.levels):
            assert ladder.index_of(lv) == i

    def test_bad_branch_combinations(self):
        with pytest.raises(ValueError):
            DressedLevel(0, "plus", 1.0, 0.0)
        with pytest.raises(ValueError):
            DressedLevel(1, "ground", 1.0, 0.0)


class TestThermalWeights:
    def test_published_values(self):
        occ = thermal_weights(0.05, 2)
        assert occ.weights == pytest.approx([0.952381, 0.0453515, 0.00215959], abs=1e-6)

    def test_zero_temperature_limit(self):
        occ = thermal_weights(0.0, 2)
        assert occ.weights == pytest.approx([1.0, 0.0, 0.0])
        assert occ.deficit == 0.0

    def test_geometric_series_saturates(self):
        occ = thermal_weights(0.05, 200)
        assert occ.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert occ.deficit == pytest.approx(0.0, abs=1e-15)

    def test_negative_nbar_rejected(self):
        with pytest.raises(ValueError):
            thermal_weights(-0.01, 2)

    def test_renormalized_sums_to_one(self):
        occ = thermal_weights(0.05, 1).renormalized()
        assert occ.weights.sum() == pytest.approx(1.0)
        assert occ.deficit == 0.0
        # ratio p0/p1 = (1+nbar)/nbar is preserved
        assert occ.weights[0] / occ.weights[1] == pytest.approx(1.05 / 0.05)

    @given(nbar=st.floats(min_value=1e-6, max_value=0.99),
           n_max=st.integers(min_value=1, max_value=20))
    def test_valid_subprobability_decreasing(self, nbar, n_max):
        occ = thermal_weights(nbar, n_max)
        assert np.all(occ.weights >= 0)
        assert occ.weights.sum() <= 1 + 1e-12
        assert np.all(np.diff(occ.weights) < 0)


class TestDetailedBalance:
    def test_published_factor_gamma_a(self, params):
        rates = detailed_balance_rates(params, gamma1=1.0, gamma2=0.0, gamma3=0.0)
        assert rates.gamma_a == pytest.approx(0.0466327, abs=1e-6)

    def test_published_factor_gamma_c(self, params):
        rates = detailed_balance_rates(params, gamma1=0.0, gamma2=0.0, gamma3=1.0)
        assert rates.gamma_c == pytest.approx(0.999997, abs=1e-6)

    def test_high_temperature_limit(self, params):
        hot = PhysicalParams(omega0=params.omega0, g=params.g, temperature=1e12)
        rates = detailed_balance_rates(hot, gamma1=1.0, gamma2=0.0, gamma3=0.0)
        assert rates.gamma_a == pytest.approx(1.0, abs=1e-6)

    def test_zero_temperature_kills_upward(self, params):
        cold = PhysicalParams(omega0=params.omega0, g=params.g, temperature=0.0)
        rates = detailed_balance_rates(cold, 1.0, 1.0, 1.0, gamma5=1.0)
        assert rates.gamma_a == rates.gamma_b == rates.gamma_c == rates.gamma_e == 0.0

    def test_explicit_override_wins(self, params):
        rates = detailed_balance_rates(params, 1.0, 1.0, 1.0, gamma_c=0.25)
        assert rates.gamma_c == 0.25
        assert rates.gamma_a == pytest.approx(0.0466327, abs=1e-6)

    def test_second_doublet_partner_rule(self, params):
        rates = detailed_balance_rates(params, 0.0, 0.0, 0.0, gamma5=2.0)
        expected = 2.0 * boltzmann_factor(params, 2 * math.sqrt(2) * params.g)
        assert rates.gamma_e == pytest.approx(expected, rel=1e-12)

    def test_negative_rate_rejected(self, params):
        with pytest.raises(ValueError):
            detailed_balance_rates(params, -1.0, 0.0, 0.0)

    @given(omega0=st.floats(min_value=1.0, max_value=1e11),
           ratio=st.floats(min_value=1.001, max_value=1e6),
           temperature=st.floats(min_value=0.05, max_value=1e3))
    def test_factor_ordering(self, omega0, ratio, temperature):
        # gamma_a/gamma1 < gamma_c/gamma3 whenever omega0 > g; scales kept
        # inside the range where exp(-hbar*gap/kT) does not underflow
        g = omega0 / ratio
        p = PhysicalParams(omega0=omega0, g=g, temperature=temperature)
        fa = boltzmann_factor(p, omega0 + g)
        fc = boltzmann_factor(p, 2 * g)
        assert 0 < fa <= 1 and 0 < fc <= 1
        assert fa < fc

    def test_extension_beyond_two_doublets_needs_params(self):
        table = RateTable(1.0, 1.0, 1.0, gamma5=1.0)
        with pytest.raises(ValueError):
            table.intra_doublet_up(3)
