import numpy as np
import pytest

from rabisim.dynamics import default_time_grid, excited_thermal_state, rabi_curve
from rabisim.experiment import (DEFAULT_GAMMA_CAVITY, DataSet, FitConfig, chi2,
                                default_fit_grid, fit_parameters, load_dataset,
                                model_curve, q_factor, save_dataset, synthetic_dataset,
                                tied_rate_table)
from rabisim.model import PhysicalParams, build_dressed_ladder


class TestTiedRates:
    def test_tie_structure(self, params):
        rates = tied_rate_table(params, gamma_cavity=20.0, gamma_long=1000.0,
                                epsilon=0.05)
        table = rates.as_dict()
        for name in ("gamma1", "gamma2", "gamma4", "gamma6", "gamma7", "gamma8"):
            assert table[name] == 20.0
        for name in ("gamma3", "gamma5", "gamma_c", "gamma_e"):
            assert table[name] == 1000.0
        assert table["gamma_a"] == table["gamma_b"] == pytest.approx(1.0)

    def test_defaults(self, params):
        rates = tied_rate_table(params)
        assert rates.gamma1 == DEFAULT_GAMMA_CAVITY
        assert rates.gamma3 == pytest.approx(0.07 * params.g)
        # epsilon defaults to the detailed-balance factor
        assert rates.gamma_a / rates.gamma1 == pytest.approx(0.0466327, abs=1e-6)


class TestDataSet:
    def test_rescaling(self):
        ds = DataSet(np.array([30e-6, 60e-6]), np.array([0.2, 0.4]), None,
                     geometry_ratio=0.5)
        assert ds.t == pytest.approx([60e-6, 120e-6])

    def test_round_trip(self, tmp_path):
        ds = DataSet(np.array([1e-6, 2e-6, 3e-6]), np.array([0.1, 0.5, 0.9]),
                     np.array([0.01, 0.01, 0.02]), geometry_ratio=0.8)
        path = tmp_path / "data.csv"
        save_dataset(ds, path)
        loaded = load_dataset(path, geometry_ratio=0.8)
        assert np.array_equal(loaded.t_eff, ds.t_eff)
        assert np.array_equal(loaded.p_g, ds.p_g)
        assert np.array_equal(loaded.sigma, ds.sigma)

    def test_empty_file_reports_no_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="no data rows"):
            load_dataset(path)

    def test_header_only_reports_no_rows(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("t_eff_s,p_g\n")
        with pytest.raises(ValueError, match="no data rows"):
            load_dataset(path)

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t_eff_s,p_g\n1e-6,0.5\nbogus,0.7\n")
        with pytest.raises(ValueError, match=r"bad.csv:3"):
            load_dataset(path)

    def test_out_of_range_probability_reports_line(self, tmp_path):
        path = tmp_path / "range.csv"
        path.write_text("t_eff_s,p_g\n1e-6,1.5\n")
        with pytest.raises(ValueError, match=r"range.csv:2.*outside"):
            load_dataset(path)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "head.csv"
        path.write_text("time,prob\n1e-6,0.5\n")
        with pytest.raises(ValueError, match="expected header"):
            load_dataset(path)

    def test_decreasing_time_rejected(self, tmp_path):
        path = tmp_path / "order.csv"
        path.write_text("t_eff_s,p_g\n2e-6,0.5\n1e-6,0.6\n")
        with pytest.raises(ValueError, match="increasing"):
            load_dataset(path)


class TestChi2:
    def test_zero_for_exact_samples(self, params, tied_rates, ladder2):
        rho0 = excited_thermal_state(ladder2, [0.95, 0.05])
        times = default_time_grid(200e-6, 501)
        curve = rabi_curve(params, tied_rates, rho0, times)
        ds = DataSet(times[::25], curve.p_g[::25], None, geometry_ratio=1.0)
        assert chi2(ds, curve) == pytest.approx(0.0, abs=1e-20)

    def test_constant_offset(self, params, tied_rates, ladder2):
        rho0 = excited_thermal_state(ladder2, [0.95, 0.05])
        times = default_time_grid(200e-6, 501)
        curve = rabi_curve(params, tied_rates, rho0, times)
        take = slice(0, 250, 25)  # 10 points
        shifted = np.clip(curve.p_g[take] + 0.1, 0, 1)
        assert np.all(curve.p_g[take] + 0.1 <= 1.0), "offset clipped; pick other points"
        ds = DataSet(times[take], shifted, None, geometry_ratio=1.0)
        assert chi2(ds, curve) == pytest.approx(0.1, rel=1e-9)

    def test_extrapolation_rejected(self, params, tied_rates, ladder2):
        rho0 = excited_thermal_state(ladder2, [0.95, 0.05])
        times = default_time_grid(100e-6, 101)
        curve = rabi_curve(params, tied_rates, rho0, times)
        ds = DataSet(np.array([50e-6, 200e-6]), np.array([0.5, 0.5]), None, 1.0)
        with pytest.raises(ValueError, match="span"):
            chi2(ds, curve)

    def test_chi2_per_dof_near_one_for_true_params(self, params):
        ds = synthetic_dataset(params, noise_sigma=0.01, seed=11)
        curve = model_curve(params, {}, ds.t)
        value = chi2(ds, curve)
        assert 0.5 < value / len(ds) < 1.5


class TestQFactor:
    def test_reference_value(self, params):
        q_energy, q_field = q_factor(params, DEFAULT_GAMMA_CAVITY)
        assert q_energy == pytest.approx(params.omega0 / 17.73, rel=1e-12)
        assert q_energy == pytest.approx(1.811e10, rel=1e-3)
        assert q_field == pytest.approx(q_energy / 2)

    def test_limits(self, params):
        q_energy, _ = q_factor(params, 1e30)
        assert q_energy < 1e-15
        unit = PhysicalParams(omega0=5.0, g=0.7, temperature=1.0)
        assert q_factor(unit, 5.0)[0] == pytest.approx(1.0)

    def test_nonpositive_rejected(self, params):
        with pytest.raises(ValueError):
            q_factor(params, 0.0)


class TestSyntheticData:
    def test_deterministic_given_seed(self, params):
        a = synthetic_dataset(params, noise_sigma=0.01, seed=5)
        b = synthetic_dataset(params, noise_sigma=0.01, seed=5)
        assert np.array_equal(a.p_g, b.p_g)

    def test_noise_scale(self, params):
        clean = synthetic_dataset(params, noise_sigma=0.0)
        noisy = synthetic_dataset(params, noise_sigma=0.01, seed=2)
        residual = noisy.p_g - clean.p_g
        assert 0.005 < residual.std() < 0.015

    def test_geometry_ratio_propagates(self):
        params = PhysicalParams(geometry_ratio=0.4)
        ds = synthetic_dataset(params, noise_sigma=0.0)
        assert ds.geometry_ratio == 0.4
        assert ds.t == pytest.approx(default_fit_grid())


class TestFit:
    def test_noise_free_round_trip(self, params):
        ds = synthetic_dataset(params, noise_sigma=0.0)
        result = fit_parameters(ds, FitConfig(params=params, free=("gamma_cavity",)))
        assert result.parameters["gamma_cavity"] == pytest.approx(17.73, rel=0.01)
        assert result.chi2 < 1e-10
        assert result.converged

    def test_noisy_round_trip(self, params):
        ds = synthetic_dataset(params, noise_sigma=0.01, seed=42)
        result = fit_parameters(ds, FitConfig(params=params, free=("gamma_cavity",)))
        assert result.parameters["gamma_cavity"] == pytest.approx(17.73, rel=0.05)
        assert result.q_energy == pytest.approx(params.omega0 / 17.73, rel=0.05)

    def test_zero_free_parameters_is_plain_evaluation(self, params):
        ds = synthetic_dataset(params, noise_sigma=0.01, seed=9)
        result = fit_parameters(ds, FitConfig(params=params, free=()))
        direct = chi2(ds, model_curve(params, {}, ds.t))
        assert result.chi2 == pytest.approx(direct, rel=1e-9)
        assert result.converged

    def test_row_reordering_changes_nothing(self, params):
        # chi2 is a sum over rows; the optimizer sees the same objective
        ds = synthetic_dataset(params, noise_sigma=0.005, seed=3)
        result = fit_parameters(ds, FitConfig(params=params, free=("gamma_cavity",),
                                              grid_points=6, max_cycles=8))
        assert result.chi2 <= min(
            chi2(ds, model_curve(params, {"gamma_cavity": value}, ds.t))
            for value in np.geomspace(1.0, 200.0, 6))

    def test_two_parameter_fit(self, params):
        truth = {"gamma_cavity": 17.73, "gamma_long": 0.07 * params.g}
        ds = synthetic_dataset(params, values=truth, noise_sigma=0.005, seed=8)
        config = FitConfig(params=params, free=("gamma_cavity", "gamma_long"))
        result = fit_parameters(ds, config)
        assert result.parameters["gamma_cavity"] == pytest.approx(17.73, rel=0.05)
        assert result.parameters["gamma_long"] == pytest.approx(0.07 * params.g, rel=0.05)

    def test_needs_enough_points(self, params):
        ds = DataSet(np.array([1e-6]), np.array([0.5]), None, 1.0)
        with pytest.raises(ValueError, match="data points"):
            fit_parameters(ds, FitConfig(params=params,
                                         free=("gamma_cavity", "gamma_long")))

    def test_unknown_free_parameter_rejected(self, params):
        with pytest.raises(ValueError, match="unknown fit parameter"):
            FitConfig(params=params, free=("gamma_bogus",))

    def test_bad_bounds_rejected(self, params):
        with pytest.raises(ValueError, match="bounds"):
            FitConfig(params=params, free=("gamma_cavity",),
                      bounds={"gamma_cavity": (5.0, 1.0)})
