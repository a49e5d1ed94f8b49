"""Time evolution and ground-state probability curves.

Spectral propagation of the density matrix, the atom-in-ground-state
probability p_g(t), and the Gaussian-mode effective-time correction that
rescales only the coherence oscillation frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .liouvillian import build_liouvillian
from .model import DressedLadder, PhysicalParams, RateTable, build_dressed_ladder
from .spectral import SpectralSolution, build_spectral_solution


def excited_thermal_state(ladder: DressedLadder, weights) -> np.ndarray:
    """Density matrix for an excited atom over a photon-number mixture.

    rho = sum_n weights[n] |e,n><e,n| with |e,n> = (|(n+1)+> - |(n+1)->)/sqrt(2),
    so each weight populates one doublet and seeds the intra-doublet
    coherence -w_n/2. Weights must sum to one and fit inside the ladder.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or len(weights) == 0:
        raise ValueError("weights must be a nonempty vector")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if len(weights) > ladder.max_doublet:
        raise ValueError(
            f"{len(weights)} photon-number weights need at least {len(weights)} doublets")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {weights.sum():.12g}")
    dim = ladder.dimension
    rho = np.zeros((dim, dim), dtype=complex)
    for n, w in enumerate(weights):
        plus = ladder.index(n + 1, "plus")
        minus = ladder.index(n + 1, "minus")
        rho[plus, plus] += 0.5 * w
        rho[minus, minus] += 0.5 * w
        rho[plus, minus] -= 0.5 * w
        rho[minus, plus] -= 0.5 * w
    return rho


def ground_state_weights(ladder: DressedLadder) -> tuple[np.ndarray, dict[tuple[int, int], float]]:
    """Mode weights of p_g = sum_n <g,n|rho|g,n>.

    |g,0> is the ground level; |g,n> = (|n+> + |n->)/sqrt(2). Populations
    enter with weight 1 (ground) or 1/2 (doublet members); the only
    coherences that contribute are the intra-doublet ones, with weight 1/2
    on each ordering.
    """
    dim = ladder.dimension
    pop = np.full(dim, 0.5)
    pop[ladder.index(0)] = 1.0
    coh = {}
    for n in range(1, ladder.max_doublet + 1):
        plus = ladder.index(n, "plus")
        minus = ladder.index(n, "minus")
        coh[(plus, minus)] = 0.5
        coh[(minus, plus)] = 0.5
    return pop, coh


def ground_state_probability(rho: np.ndarray, ladder: DressedLadder) -> float:
    """Probability of finding the atom in |g>, any photon number."""
    pop_w, coh_w = ground_state_weights(ladder)
    value = float(np.real(np.diag(rho)) @ pop_w)
    for (a, b), w in coh_w.items():
        value += w * rho[a, b].real
    return value


def propagate_spectral(solution: SpectralSolution, t: float) -> np.ndarray:
    """Density matrix at time t from the eigen-expansion."""
    if t < 0:
        raise ValueError("time must be >= 0")
    return solution.density_matrix(t)


def ground_probability_curve(solution: SpectralSolution, times: np.ndarray,
                             frequency_scale: float = 1.0) -> np.ndarray:
    """p_g on a time grid without materializing density matrices."""
    ladder = solution.liouv.ladder
    pop_w, coh_w = ground_state_weights(ladder)
    values = pop_w @ solution.populations(times)
    coh = solution.coherences(times, frequency_scale)
    for k, pair in enumerate(solution.coherence_pairs):
        w = coh_w.get(pair, 0.0)
        if w:
            values = values + w * coh[k].real
    return values


@dataclass(frozen=True)
class RabiCurve:
    """Sampled p_g(t) with both true and effective time axes."""

    t: np.ndarray
    t_eff: np.ndarray
    p_g: np.ndarray
    mode: str
    geometry_ratio: float
    n_doublets: int
    params: PhysicalParams | None = None

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        low, high = self.p_g.min(), self.p_g.max()
        if low < -1e-9 or high > 1.0 + 1e-9:
            raise ValueError(f"p_g out of [0,1]: range [{low:.3e}, {high:.3e}]")


def default_time_grid(t_max: float = 600e-6, n_points: int = 4096) -> np.ndarray:
    """Uniform grid resolving the vacuum Rabi oscillation comfortably."""
    return np.linspace(0.0, t_max, n_points)


def rabi_curve(params: PhysicalParams, rates: RateTable, rho0: np.ndarray,
               times: np.ndarray, mode: str = "raw",
               n_doublets: int | None = None) -> RabiCurve:
    """Ground-state probability curve for one parameter set.

    mode="raw" evolves in true time. mode="effective" multiplies every
    coherence oscillation frequency by geometry_ratio while decay constants
    stay in true time, mirroring an atom crossing the Gaussian mode; the
    returned t_eff axis is geometry_ratio * t in both modes.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("time grid is empty")
    if mode not in ("raw", "effective"):
        raise ValueError(f"mode must be 'raw' or 'effective', got {mode!r}")
    if n_doublets is None:
        n_doublets = (rho0.shape[0] - 1) // 2
    ladder = build_dressed_ladder(params, n_doublets)
    liouv = build_liouvillian(ladder, rates)
    solution = build_spectral_solution(liouv, rho0)
    scale = params.geometry_ratio if mode == "effective" else 1.0
    p_g = ground_probability_curve(solution, times, frequency_scale=scale)
    return RabiCurve(times, params.geometry_ratio * times, p_g, mode,
                     params.geometry_ratio, n_doublets, params)


def closed_cavity_reference(weights, g: float, t) -> np.ndarray | float:
    """Loss-free analytic reference: sum_n w_n sin^2(sqrt(n+1) g t)."""
    weights = np.asarray(weights, dtype=float)
    t = np.asarray(t, dtype=float)
    value = sum(w * np.sin(math.sqrt(n + 1.0) * g * t) ** 2
                for n, w in enumerate(weights))
    return value if value.ndim else float(value)
