"""Vacuum Rabi oscillation of a two-level atom in a lossy thermal cavity.

Dressed-state jump model with an exact spectral solution, brute-force
validation oracles, and least-squares fitting of decay parameters.
"""

__version__ = "0.1.0"

from .config import SimulationConfig, default_config, load_config
from .dynamics import (RabiCurve, closed_cavity_reference, excited_thermal_state,
                       ground_state_probability, propagate_spectral, rabi_curve)
from .experiment import (DataSet, FitConfig, FitResult, chi2, fit_parameters,
                         load_dataset, q_factor, synthetic_dataset, tied_rate_table)
from .liouvillian import (ChannelSet, JumpChannel, Liouvillian, build_jump_channels,
                          build_liouvillian, coherence_decay_rate, population_generator,
                          superoperator)
from .model import (DressedLadder, DressedLevel, PhysicalParams, RateTable,
                    ThermalOccupation, boltzmann_factor, build_dressed_ladder,
                    detailed_balance_rates, thermal_weights)
from .oracle import (IntegratorConfig, expm_propagate, numeric_spectrum, rk4_integrate,
                     three_way_deviation)
from .spectral import (DiagonalEigenpair, SpectralSolution, build_spectral_solution,
                       closed_form_eigenvalues, diagonal_block_eigensolve,
                       expansion_coefficients, offdiagonal_eigenpairs,
                       stationary_state_closed_form)

__all__ = [name for name in dir() if not name.startswith("_")]
