"""Measurement ingestion, synthetic data, chi-square fitting, Q factors.

Datasets carry the effective-time axis the experiment was plotted against;
fitting happens in true time t = t_eff / geometry_ratio. The optimizer is a
deterministic coarse grid scan followed by cyclic golden-section refinement.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import RabiCurve, excited_thermal_state, rabi_curve
from .model import PhysicalParams, RateTable, boltzmann_factor, build_dressed_ladder, \
    thermal_weights

# Tied-rate defaults of the reference analysis: the six cavity-limited decays
# share one value, the four long-wave intra-doublet rates another (0.07*g),
# and the thermal feed rates are epsilon times the cavity rate.
DEFAULT_GAMMA_CAVITY = 17.73
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

FIT_PARAMETER_NAMES = ("gamma_cavity", "gamma_long", "epsilon", "geometry_ratio")


def tied_rate_table(params: PhysicalParams,
                    gamma_cavity: float = DEFAULT_GAMMA_CAVITY,
                    gamma_long: float | None = None,
                    epsilon: float | None = None) -> RateTable:
    """Rate table with the standard ties.

    gamma1 = gamma2 = gamma4 = gamma6 = gamma7 = gamma8 = gamma_cavity,
    gamma3 = gamma5 = gamma_c = gamma_e = gamma_long (default 0.07*g),
    gamma_a = gamma_b = epsilon * gamma_cavity (default: the detailed-balance
    factor exp(-hbar(omega0+g)/kT), about 0.0466 at 0.8 K).
    """
    if gamma_long is None:
        gamma_long = 0.07 * params.g
    if epsilon is None:
        epsilon = boltzmann_factor(params, params.omega0 + params.g)
    if gamma_cavity < 0 or gamma_long < 0 or epsilon < 0:
        raise ValueError("tied rates must be nonnegative")
    return RateTable(
        gamma1=gamma_cavity, gamma2=gamma_cavity, gamma3=gamma_long,
        gamma4=gamma_cavity, gamma5=gamma_long, gamma6=gamma_cavity,
        gamma7=gamma_cavity, gamma8=gamma_cavity,
        gamma_a=epsilon * gamma_cavity, gamma_b=epsilon * gamma_cavity,
        gamma_c=gamma_long, gamma_e=gamma_long, params=params)


@dataclass(frozen=True)
class DataSet:
    """Rabi-oscillation measurements on the effective-time axis."""

    t_eff: np.ndarray
    p_g: np.ndarray
    sigma: np.ndarray | None
    geometry_ratio: float
    source: str = ""

    def __post_init__(self):
        if len(self.t_eff) == 0:
            raise ValueError("no data rows")
        if np.any(np.diff(self.t_eff) <= 0):
            raise ValueError("t_eff must be strictly increasing")
        if np.any((self.p_g < 0) | (self.p_g > 1)):
            raise ValueError("p_g outside [0, 1]")
        if self.sigma is not None and np.any(self.sigma <= 0):
            raise ValueError("sigma must be positive")
        if self.geometry_ratio <= 0:
            raise ValueError("geometry_ratio must be positive")

    @property
    def t(self) -> np.ndarray:
        """True-time axis t = t_eff / geometry_ratio."""
        return self.t_eff / self.geometry_ratio

    def __len__(self) -> int:
        return len(self.t_eff)


def load_dataset(path, geometry_ratio: float = 1.0) -> DataSet:
    """Read a CSV with header t_eff_s,p_g[,sigma]."""
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no data rows") from None
        header = [h.strip() for h in header]
        if header[:2] != ["t_eff_s", "p_g"] or len(header) > 3 or \
                (len(header) == 3 and header[2] != "sigma"):
            raise ValueError(f"{path}: expected header t_eff_s,p_g[,sigma], got {header}")
        has_sigma = len(header) == 3
        t_eff, p_g, sigma = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed number in {row}") from None
            if not 0.0 <= values[1] <= 1.0:
                raise ValueError(f"{path}:{lineno}: p_g={values[1]} outside [0, 1]")
            t_eff.append(values[0])
            p_g.append(values[1])
            if has_sigma:
                sigma.append(values[2])
    if not t_eff:
        raise ValueError(f"{path}: no data rows")
    return DataSet(np.array(t_eff), np.array(p_g),
                   np.array(sigma) if has_sigma else None, geometry_ratio, str(path))


def save_dataset(dataset: DataSet, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        if dataset.sigma is None:
            writer.writerow(["t_eff_s", "p_g"])
            for t, p in zip(dataset.t_eff, dataset.p_g):
                writer.writerow([f"{t:.12e}", f"{p:.12e}"])
        else:
            writer.writerow(["t_eff_s", "p_g", "sigma"])
            for t, p, s in zip(dataset.t_eff, dataset.p_g, dataset.sigma):
                writer.writerow([f"{t:.12e}", f"{p:.12e}", f"{s:.12e}"])


def chi2(dataset: DataSet, curve: RabiCurve) -> float:
    """Sum of squared weighted residuals, model interpolated onto the data."""
    t_data = dataset.t
    if t_data[0] < curve.t[0] - 1e-15 or t_data[-1] > curve.t[-1] + 1e-15:
        raise ValueError("curve does not cover the dataset time span")
    model = np.interp(t_data, curve.t, curve.p_g)
    sigma = dataset.sigma if dataset.sigma is not None else 1.0
    return float(np.sum(((model - dataset.p_g) / sigma) ** 2))


def default_fit_grid(t_max_oscillation: float = 600e-6, t_max_relaxation: float = 0.4,
                     n_oscillation: int = 300, n_relaxation: int = 400) -> np.ndarray:
    """Sampling grid for synthetic data and fits.

    A dense early window resolves the damped oscillation; a sparse long tail
    follows the population relaxation, without which the cavity decay rate
    leaves no usable imprint on the curve.
    """
    early = np.linspace(0.0, t_max_oscillation, n_oscillation, endpoint=False)
    late = np.linspace(t_max_oscillation, t_max_relaxation, n_relaxation)
    return np.concatenate([early, late])


def _thermal_state_for(params: PhysicalParams, n_doublets: int, nbar: float) -> np.ndarray:
    ladder = build_dressed_ladder(params, n_doublets)
    occ = thermal_weights(nbar, n_doublets - 1).renormalized()
    return excited_thermal_state(ladder, occ.weights)


def model_curve(params: PhysicalParams, values: dict[str, float], times: np.ndarray,
                n_doublets: int = 2, nbar: float = 0.05,
                mode: str = "effective") -> RabiCurve:
    """Tied-parameter model curve evaluated at true times.

    `values` may override gamma_cavity, gamma_long, epsilon, geometry_ratio.
    """
    unknown = set(values) - set(FIT_PARAMETER_NAMES)
    if unknown:
        raise ValueError(f"unknown fit parameters: {sorted(unknown)}")
    if "geometry_ratio" in values:
        params = params.with_geometry_ratio(values["geometry_ratio"])
    rates = tied_rate_table(params,
                            gamma_cavity=values.get("gamma_cavity", DEFAULT_GAMMA_CAVITY),
                            gamma_long=values.get("gamma_long"),
                            epsilon=values.get("epsilon"))
    rho0 = _thermal_state_for(params, n_doublets, nbar)
    return rabi_curve(params, rates, rho0, times, mode=mode, n_doublets=n_doublets)


def synthetic_dataset(params: PhysicalParams, values: dict[str, float] | None = None,
                      times: np.ndarray | None = None, noise_sigma: float = 0.01,
                      seed: int = 0, n_doublets: int = 2, nbar: float = 0.05) -> DataSet:
    """Model curve plus seeded Gaussian noise, packaged as a dataset."""
    values = dict(values or {})
    if times is None:
        times = default_fit_grid()
    curve = model_curve(params, values, times, n_doublets=n_doublets, nbar=nbar)
    rng = np.random.default_rng(seed)
    noisy = curve.p_g + (rng.normal(0.0, noise_sigma, size=len(times)) if noise_sigma > 0
                         else 0.0)
    noisy = np.clip(noisy, 0.0, 1.0)
    ratio = values.get("geometry_ratio", params.geometry_ratio)
    sigma = np.full(len(times), noise_sigma) if noise_sigma > 0 else None
    return DataSet(ratio * np.asarray(times), noisy, sigma, ratio, "synthetic")


@dataclass(frozen=True)
class FitConfig:
    """Free parameters, bounds, and optimizer knobs for fit_parameters."""

    params: PhysicalParams
    free: tuple[str, ...] = ("gamma_cavity",)
    bounds: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    n_doublets: int = 2
    nbar: float = 0.05
    grid_points: int = 12
    max_cycles: int = 60
    rel_tol: float = 1e-6

    def __post_init__(self):
        unknown = set(self.free) | set(self.bounds) | set(self.fixed)
        unknown -= set(FIT_PARAMETER_NAMES)
        if unknown:
            raise ValueError(f"unknown fit parameters: {sorted(unknown)}")
        for name, (low, high) in self.bounds.items():
            if not (0 < low < high):
                raise ValueError(f"bounds for {name} must satisfy 0 < low < high")


DEFAULT_BOUNDS = {
    "gamma_cavity": (1.0, 200.0),
    "gamma_long": (1e2, 1e5),
    "epsilon": (1e-3, 1.0),
    "geometry_ratio": (0.05, 2.0),
}


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters with chi2, residuals, and both Q conventions."""

    parameters: dict
    chi2: float
    residuals: np.ndarray
    q_energy: float
    q_field: float
    converged: bool
    n_evaluations: int


def q_factor(params: PhysicalParams, gamma_cavity: float) -> tuple[float, float]:
    """(Q_energy, Q_field) = (omega0/gamma, omega0/(2 gamma)).

    Both conventions are reported; which one the historical lifetime
    measurements used is left to the reader.
    """
    if gamma_cavity <= 0:
        raise ValueError("gamma_cavity must be positive")
    return params.omega0 / gamma_cavity, params.omega0 / (2.0 * gamma_cavity)


def fit_parameters(dataset: DataSet, config: FitConfig) -> FitResult:
    """Coarse grid scan plus cyclic golden-section refinement of chi2.

    Deterministic for a given config; converged=False flags hitting
    max_cycles before the relative chi2 improvement dropped below rel_tol.
    """
    evaluations = {"count": 0}

    def objective(values: dict[str, float]) -> float:
        evaluations["count"] += 1
        ratio = values.get("geometry_ratio", config.params.geometry_ratio)
        t_true = dataset.t_eff / ratio
        curve = model_curve(config.params, values, t_true,
                            n_doublets=config.n_doublets, nbar=config.nbar)
        sigma = dataset.sigma if dataset.sigma is not None else 1.0
        return float(np.sum(((curve.p_g - dataset.p_g) / sigma) ** 2))

    current = dict(config.fixed)
    if not config.free:
        value = objective(current)
        q_e, q_f = q_factor(config.params,
                            current.get("gamma_cavity", DEFAULT_GAMMA_CAVITY))
        return FitResult(current, value, _residuals(dataset, config, current),
                         q_e, q_f, True, evaluations["count"])

    if len(dataset) < len(config.free):
        raise ValueError("need at least as many data points as free parameters")

    bounds = {name: config.bounds.get(name, DEFAULT_BOUNDS[name]) for name in config.free}

    # Coarse scan: log-spaced grid per free parameter, evaluated coordinatewise
    # from the fixed starting point, then jointly refined.
    for name in config.free:
        low, high = bounds[name]
        grid = np.geomspace(low, high, config.grid_points)
        best_value, best_chi = None, math.inf
        for value in grid:
            trial = dict(current)
            trial[name] = float(value)
            chi = objective(trial)
            if chi < best_chi:
                best_value, best_chi = float(value), chi
        current[name] = best_value

    best_chi = objective(current)
    converged = False
    for _ in range(config.max_cycles):
        previous = best_chi
        for name in config.free:
            low, high = bounds[name]
            span = high / low
            local_low = max(low, current[name] / span ** (1.0 / config.grid_points))
            local_high = min(high, current[name] * span ** (1.0 / config.grid_points))
            current[name], best_chi = _golden_section(
                lambda v, _n=name: objective({**current, _n: v}),
                local_low, local_high, rel_tol=1e-8)
        if previous - best_chi <= config.rel_tol * max(previous, 1e-300):
            converged = True
            break

    q_e, q_f = q_factor(config.params, current.get("gamma_cavity", DEFAULT_GAMMA_CAVITY))
    return FitResult(dict(current), best_chi, _residuals(dataset, config, current),
                     q_e, q_f, converged, evaluations["count"])


def _residuals(dataset: DataSet, config: FitConfig, values: dict[str, float]) -> np.ndarray:
    ratio = values.get("geometry_ratio", config.params.geometry_ratio)
    curve = model_curve(config.params, values, dataset.t_eff / ratio,
                        n_doublets=config.n_doublets, nbar=config.nbar)
    return curve.p_g - dataset.p_g


def _golden_section(func, low: float, high: float, rel_tol: float = 1e-8,
                    max_iter: int = 200) -> tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [low, high]."""
    x1 = high - GOLDEN * (high - low)
    x2 = low + GOLDEN * (high - low)
    f1, f2 = func(x1), func(x2)
    for _ in range(max_iter):
        if high - low <= rel_tol * max(abs(low), abs(high)):
            break
        if f1 <= f2:
            high, x2, f2 = x2, x1, f1
            x1 = high - GOLDEN * (high - low)
            f1 = func(x1)
        else:
            low, x1, f1 = x1, x2, f2
            x2 = low + GOLDEN * (high - low)
            f2 = func(x2)
    x_best = x1 if f1 <= f2 else x2
    return float(x_best), float(min(f1, f2))
