"""Dressed-state model of a two-level atom in a lossy microwave cavity.

Physical parameters, the dressed-level ladder, thermal photon occupation,
and construction of the twelve decay coefficients with detailed-balance
thermal partners.

All frequencies and rates are angular (rad/s); temperatures in kelvin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import hbar, k as k_B

TWO_PI = 2.0 * math.pi

# Circular-Rydberg transition frequency of the reference microwave-cavity
# experiment; reproduces the published Boltzmann factor 0.0466327 at 0.8 K.
DEFAULT_OMEGA0 = TWO_PI * 51.099e9
# Atom-field coupling; the observed vacuum Rabi frequency is 2g.
DEFAULT_COUPLING = 47e3 * math.pi
DEFAULT_TEMPERATURE = 0.8
DEFAULT_NBAR = 0.05


@dataclass(frozen=True)
class PhysicalParams:
    """Atom-cavity constants.

    omega0          atomic transition = cavity mode frequency (rad/s)
    g               atom-field coupling (rad/s)
    temperature     reservoir temperature (K)
    geometry_ratio  sqrt(pi) * mode_waist / cavity_length, the factor
                    relating true time to the effective interaction time
                    of an atom crossing the Gaussian mode profile
    """

    omega0: float = DEFAULT_OMEGA0
    g: float = DEFAULT_COUPLING
    temperature: float = DEFAULT_TEMPERATURE
    geometry_ratio: float = 1.0

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.g <= 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.geometry_ratio <= 0:
            raise ValueError(f"geometry_ratio must be positive, got {self.geometry_ratio}")

    @classmethod
    def from_mode_geometry(cls, mode_width_w: float, cavity_length_d: float, **kwargs) -> "PhysicalParams":
        """Build params from the Gaussian mode waist w and cavity length d (m)."""
        if mode_width_w <= 0 or cavity_length_d <= 0:
            raise ValueError("mode width and cavity length must be positive")
        ratio = math.sqrt(math.pi) * mode_width_w / cavity_length_d
        return cls(geometry_ratio=ratio, **kwargs)

    def with_geometry_ratio(self, ratio: float) -> "PhysicalParams":
        return replace(self, geometry_ratio=ratio)


@dataclass(frozen=True)
class DressedLevel:
    """One joint atom-field energy eigenstate.

    doublet 0 is the absolute ground state |g,0>; doublet n >= 1 holds the
    pair (|g,n> +- |e,n-1>)/sqrt(2) split by 2*sqrt(n)*g.

    The frequency (doublet - 1/2)*omega0 + coupling_offset is stored in
    decomposed form so that level differences can be taken without
    cancellation: intra-doublet gaps are tiny compared to omega0 and would
    otherwise lose eight digits at microwave frequencies.
    """

    doublet: int
    branch: str  # "plus" | "minus" | "ground"
    omega0: float
    coupling_offset: float  # +-sqrt(n)*g, 0 for the ground level

    def __post_init__(self):
        if self.branch not in ("plus", "minus", "ground"):
            raise ValueError(f"unknown branch {self.branch!r}")
        if (self.branch == "ground") != (self.doublet == 0):
            raise ValueError("ground branch exists exactly at doublet 0")
        if self.doublet < 0:
            raise ValueError("doublet index must be >= 0")

    @property
    def frequency(self) -> float:
        """Level frequency in rad/s."""
        return (self.doublet - 0.5) * self.omega0 + self.coupling_offset


def frequency_gap(a: DressedLevel, b: DressedLevel) -> float:
    """Frequency difference a - b, exact across widely separated scales."""
    if a.omega0 != b.omega0:
        raise ValueError("levels belong to ladders with different omega0")
    return (a.doublet - b.doublet) * a.omega0 + (a.coupling_offset - b.coupling_offset)


@dataclass(frozen=True)
class DressedLadder:
    """The 2N+1 dressed levels of an N-doublet truncation.

    Levels are stored highest doublet first, plus branch before minus,
    ground state last; population vectors throughout the package follow
    this ordering.
    """

    max_doublet: int
    levels: tuple[DressedLevel, ...]

    @property
    def dimension(self) -> int:
        return 2 * self.max_doublet + 1

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([lv.frequency for lv in self.levels])

    def index(self, doublet: int, branch: str = "") -> int:
        """Position of a level in the canonical ordering."""
        if doublet == 0:
            return 2 * self.max_doublet
        if doublet < 1 or doublet > self.max_doublet:
            raise ValueError(f"doublet {doublet} outside ladder (N={self.max_doublet})")
        offset = 0 if branch == "plus" else 1
        if branch not in ("plus", "minus"):
            raise ValueError(f"doublet {doublet} needs branch 'plus' or 'minus'")
        return 2 * (self.max_doublet - doublet) + offset

    def level(self, doublet: int, branch: str = "") -> DressedLevel:
        return self.levels[self.index(doublet, branch if doublet else "")]

    def index_of(self, level: DressedLevel) -> int:
        return self.index(level.doublet, level.branch if level.doublet else "")


def build_dressed_ladder(params: PhysicalParams, n_doublets: int) -> DressedLadder:
    """Construct the dressed ladder for the first `n_doublets` doublets.

    Ground level sits at -omega0/2; doublet n at (n - 1/2)*omega0 +- sqrt(n)*g.
    """
    if n_doublets < 1:
        raise ValueError("need at least one doublet")
    levels = []
    for n in range(n_doublets, 0, -1):
        split = math.sqrt(n) * params.g
        levels.append(DressedLevel(n, "plus", params.omega0, split))
        levels.append(DressedLevel(n, "minus", params.omega0, -split))
    levels.append(DressedLevel(0, "ground", params.omega0, 0.0))
    return DressedLadder(n_doublets, tuple(levels))


@dataclass(frozen=True)
class ThermalOccupation:
    """Truncated geometric photon-number distribution.

    weights[n] = nbar^n / (1+nbar)^(n+1); `deficit` is the probability mass
    beyond the truncation. Weights are not renormalized unless asked.
    """

    nbar: float
    weights: np.ndarray
    deficit: float

    def renormalized(self) -> "ThermalOccupation":
        total = float(self.weights.sum())
        if total <= 0:
            raise ValueError("cannot renormalize zero occupation")
        return ThermalOccupation(self.nbar, self.weights / total, 0.0)


def thermal_weights(nbar: float, n_max: int) -> ThermalOccupation:
    """Thermal weights p_0 ... p_{n_max} and the truncation deficit."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    n = np.arange(n_max + 1)
    if nbar == 0:
        weights = np.zeros(n_max + 1)
        weights[0] = 1.0
    else:
        weights = nbar**n / (1.0 + nbar) ** (n + 1)
    return ThermalOccupation(nbar, weights, float(1.0 - weights.sum()))


def boltzmann_factor(params: PhysicalParams, gap: float) -> float:
    """exp(-hbar*gap / (k*T)) for an upward transition across `gap` (rad/s).

    T = 0 sends every upward rate to zero.
    """
    if gap < 0:
        raise ValueError("energy gap must be >= 0")
    if params.temperature == 0.0:
        return 0.0 if gap > 0 else 1.0
    return math.exp(-hbar * gap / (k_B * params.temperature))


@dataclass(frozen=True)
class RateTable:
    """The twelve decay coefficients of the two-doublet jump model.

    Downward channels: gamma1 (1+ -> ground), gamma2 (1- -> ground),
    gamma3 (1+ -> 1-), gamma4 (2+ -> 1+), gamma5 (2+ -> 2-),
    gamma6 (2+ -> 1-), gamma7 (2- -> 1+), gamma8 (2- -> 1-).
    Thermal partners: gamma_a (ground -> 1+), gamma_b (ground -> 1-),
    gamma_c (1- -> 1+), gamma_e (2- -> 2+).

    `params` is kept so ladders with more than two doublets can extend the
    pattern with the correct Boltzmann factors.
    """

    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float = 0.0
    gamma5: float = 0.0
    gamma6: float = 0.0
    gamma7: float = 0.0
    gamma8: float = 0.0
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    gamma_c: float = 0.0
    gamma_e: float = 0.0
    params: PhysicalParams | None = None

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5", "gamma6",
                     "gamma7", "gamma8", "gamma_a", "gamma_b", "gamma_c", "gamma_e"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in
                ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5", "gamma6",
                 "gamma7", "gamma8", "gamma_a", "gamma_b", "gamma_c", "gamma_e")}

    def intra_doublet_up(self, n: int) -> float:
        """Thermal upward rate inside doublet n (gap 2*sqrt(n)*g)."""
        if n == 1:
            return self.gamma_c
        if n == 2:
            return self.gamma_e
        if self.params is None:
            raise ValueError("extending beyond two doublets requires params")
        return self.gamma5 * boltzmann_factor(self.params, 2.0 * math.sqrt(n) * self.params.g)


def detailed_balance_rates(
    params: PhysicalParams,
    gamma1: float,
    gamma2: float,
    gamma3: float,
    gamma4: float = 0.0,
    gamma5: float = 0.0,
    gamma6: float = 0.0,
    gamma7: float = 0.0,
    gamma8: float = 0.0,
    gamma_a: float | None = None,
    gamma_b: float | None = None,
    gamma_c: float | None = None,
    gamma_e: float | None = None,
) -> RateTable:
    """Complete a rate table, deriving thermal upward rates when not given.

    gamma_a = exp(-hbar(omega0+g)/kT) * gamma1
    gamma_b = exp(-hbar(omega0-g)/kT) * gamma2
    gamma_c = exp(-2 hbar g/kT) * gamma3
    gamma_e = exp(-2 sqrt(2) hbar g/kT) * gamma5

    Explicit values override the Boltzmann rule (the reference parameter set
    pins gamma_c and gamma_e directly).
    """
    if gamma_a is None:
        gamma_a = boltzmann_factor(params, params.omega0 + params.g) * gamma1
    if gamma_b is None:
        gamma_b = boltzmann_factor(params, params.omega0 - params.g) * gamma2
    if gamma_c is None:
        gamma_c = boltzmann_factor(params, 2.0 * params.g) * gamma3
    if gamma_e is None:
        gamma_e = boltzmann_factor(params, 2.0 * math.sqrt(2.0) * params.g) * gamma5
    return RateTable(gamma1, gamma2, gamma3, gamma4, gamma5, gamma6, gamma7, gamma8,
                     gamma_a, gamma_b, gamma_c, gamma_e, params)
