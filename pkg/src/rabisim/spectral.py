"""Spectral decomposition of the dissipative generator.

Closed-form eigenvalues of the two-doublet model, numerical eigensolve of
the population block, expansion of initial states in the eigenbasis, and
the Levi-Civita cofactor cross-check for the expansion coefficients.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .liouvillian import Liouvillian
from .model import RateTable

log = logging.getLogger(__name__)


class DefectiveGeneratorError(RuntimeError):
    """Raised when the population block cannot be diagonalized reliably."""


@dataclass(frozen=True)
class RateSums:
    """Aggregate rates entering the closed-form population eigenvalues.

    The two nonzero eigenvalues of the upper (second-doublet) 2x2 block are
    -0.25*(second_plus_out + second_minus_out +- sqrt(upper_discriminant));
    the lower (first-doublet + ground) 3x3 block contributes 0 and
    -0.25*(first_down + first_up +- sqrt(lower_discriminant)).
    """

    first_down: float        # gamma1 + gamma2 + gamma3
    first_up: float          # gamma_a + gamma_b + gamma_c
    second_plus_out: float   # gamma4 + gamma5 + gamma6
    second_minus_out: float  # gamma7 + gamma8 + gamma_e
    upper_discriminant: float
    lower_discriminant: float


def rate_sums(rates: RateTable) -> RateSums:
    r = rates
    first_down = r.gamma1 + r.gamma2 + r.gamma3
    first_up = r.gamma_a + r.gamma_b + r.gamma_c
    second_plus_out = r.gamma4 + r.gamma5 + r.gamma6
    second_minus_out = r.gamma7 + r.gamma8 + r.gamma_e
    upper = (second_plus_out - second_minus_out) ** 2 + 4.0 * r.gamma5 * r.gamma_e
    # Second elementary symmetric polynomial of the lower 3x3 block (times 4),
    # subtracted from the squared trace; evaluated directly so no division by
    # gamma6 is ever needed.
    pair_terms = (r.gamma2 * (r.gamma3 + r.gamma_a)
                  + (r.gamma_a + r.gamma_b) * (r.gamma3 + r.gamma_c)
                  + r.gamma1 * (r.gamma2 + r.gamma_b + r.gamma_c))
    lower = (first_down + first_up) ** 2 - 4.0 * pair_terms
    return RateSums(first_down, first_up, second_plus_out, second_minus_out, upper, lower)


def population_block_eigenvalues(rates: RateTable, n_doublets: int = 2) -> np.ndarray:
    """Closed-form eigenvalues of the population rate matrix (N <= 2).

    Always contains 0 (the stationary mode). The remaining values are the
    quadratic roots of the lower 3x3 block and, for N = 2, of the upper
    2x2 block. Complex roots (negative discriminant) appear as conjugate
    pairs with real part -0.25 * trace.
    """
    if n_doublets not in (1, 2):
        raise ValueError("closed forms cover one or two doublets only")
    s = rate_sums(rates)
    lower_root = cmath.sqrt(s.lower_discriminant)
    values = [0.0 + 0.0j,
              -0.25 * (s.first_down + s.first_up + lower_root),
              -0.25 * (s.first_down + s.first_up - lower_root)]
    if n_doublets == 2:
        upper_root = cmath.sqrt(s.upper_discriminant)
        values += [-0.25 * (s.second_plus_out + s.second_minus_out + upper_root),
                   -0.25 * (s.second_plus_out + s.second_minus_out - upper_root)]
    return np.array(values)


def offdiagonal_eigenpairs(liouv: Liouvillian) -> list[tuple[tuple[int, int], complex]]:
    """All ordered level pairs with their coherence eigenvalues."""
    levels = liouv.ladder.levels
    return [((a, b), liouv.coherence_rate(levels[a], levels[b]))
            for a, b in liouv.coherence_pairs()]


def closed_form_eigenvalues(liouv: Liouvillian, rates: RateTable) -> np.ndarray:
    """The full (2N+1)^2 spectrum of the generator, closed form (N <= 2).

    Population block eigenvalues from the quadratic formulas, coherence
    eigenvalues from the single rule -i*dW - (out(a)+out(b))/4.
    """
    pop = population_block_eigenvalues(rates, liouv.ladder.max_doublet)
    coh = np.array([lam for _, lam in offdiagonal_eigenpairs(liouv)])
    return np.concatenate([pop, coh])


def stationary_state_closed_form(rates: RateTable, n_doublets: int = 2) -> np.ndarray:
    """Stationary population vector from the cofactor polynomials.

    Components on (1+, 1-, ground):
        gamma2*gamma_a + gamma_c*gamma_a + gamma_b*gamma_c
        gamma3*gamma_a + gamma1*gamma_b + gamma3*gamma_b
        gamma1*gamma2 + gamma2*gamma3 + gamma1*gamma_c
    Second-doublet components vanish. Normalized to unit sum.
    """
    if n_doublets not in (1, 2):
        raise ValueError("closed form covers one or two doublets only")
    r = rates
    z = r.gamma2 * r.gamma_a + r.gamma_c * r.gamma_a + r.gamma_b * r.gamma_c
    v = r.gamma3 * r.gamma_a + r.gamma1 * r.gamma_b + r.gamma3 * r.gamma_b
    w = r.gamma1 * r.gamma2 + r.gamma2 * r.gamma3 + r.gamma1 * r.gamma_c
    head = [0.0, 0.0] if n_doublets == 2 else []
    vec = np.array(head + [z, v, w])
    total = vec.sum()
    if total <= 0:
        raise ValueError("stationary polynomials vanish; rate graph is degenerate")
    return vec / total


@dataclass(frozen=True)
class DiagonalEigenpair:
    """Eigenvalue and components of one population-block mode.

    Components follow the ladder ordering (highest doublet first, ground
    last). The stationary mode is scaled to unit sum, decaying modes to
    unit max-magnitude component.
    """

    eigenvalue: complex
    components: np.ndarray

    @property
    def is_stationary(self) -> bool:
        return self.eigenvalue == 0.0


def diagonal_block_eigensolve(g_matrix: np.ndarray,
                              residual_tol: float = 1e-10) -> list[DiagonalEigenpair]:
    """Numerically diagonalize the population rate matrix.

    Pairs are sorted by descending real part (stationary mode first).
    Raises DefectiveGeneratorError when an eigenpair residual exceeds
    residual_tol * ||G||.
    """
    g_matrix = np.asarray(g_matrix, dtype=float)
    scale = np.linalg.norm(g_matrix, np.inf)
    values, vectors = np.linalg.eig(g_matrix)
    if scale > 0:
        residual = np.linalg.norm(g_matrix @ vectors - vectors * values, np.inf)
        if residual > residual_tol * scale:
            raise DefectiveGeneratorError(
                f"eigenpair residual {residual:.3e} exceeds {residual_tol:.1e} * ||G||")
    order = np.argsort(-values.real)
    pairs = []
    zero_tol = 1e-9 * max(scale, 1.0)
    for idx in order:
        lam = values[idx]
        comp = vectors[:, idx]
        if abs(comp.imag).max() < 1e-12 * max(1.0, abs(comp.real).max()):
            comp = comp.real.astype(float)
        if abs(lam.imag) < zero_tol:
            lam = complex(lam.real, 0.0)
        if abs(lam) < zero_tol:
            total = comp.sum()
            if abs(total) > 1e-12:
                comp = comp / total
            pairs.append(DiagonalEigenpair(0.0 + 0.0j, comp))
        else:
            comp = comp / comp[np.argmax(np.abs(comp))]
            pairs.append(DiagonalEigenpair(complex(lam), comp))
    return pairs


def expansion_coefficients(vectors: np.ndarray, populations: np.ndarray) -> np.ndarray:
    """Solve V c = p(0) for the population-mode coefficients.

    Falls back to least squares (with a logged residual) when the
    eigenvector matrix is numerically singular.
    """
    vectors = np.asarray(vectors)
    populations = np.asarray(populations)
    dtype = np.promote_types(vectors.dtype, populations.dtype)
    vectors = vectors.astype(dtype, copy=False)
    populations = populations.astype(dtype, copy=False)
    try:
        cond = np.linalg.cond(vectors)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"condition number {cond:.3e}")
        return np.linalg.solve(vectors, populations)
    except np.linalg.LinAlgError as exc:
        coeffs, *_ = np.linalg.lstsq(vectors, populations, rcond=None)
        residual = np.linalg.norm(vectors @ coeffs - populations)
        log.warning("eigenvector matrix singular (%s); least-squares fallback, residual %.3e",
                    exc, residual)
        return coeffs


def cofactor_population_coefficients(vectors: np.ndarray, populations: np.ndarray) -> np.ndarray:
    """Cramer's-rule coefficients via explicit Levi-Civita cofactor sums.

    c_n = sum_k p_k A_kn / chi, where A_kn sums sign(perm) times products of
    eigenvector components over permutations fixing row k to column n, and
    chi is the full signed sum (the determinant). Exponential in the block
    size; intended as an independent cross-check for the 5x5 problem.
    """
    vectors = np.asarray(vectors)
    dim = vectors.shape[0]
    if dim > 6:
        raise ValueError("cofactor path is meant for small population blocks")
    dtype = np.promote_types(vectors.dtype, np.asarray(populations).dtype)
    vectors = vectors.astype(dtype, copy=False)
    populations = np.asarray(populations, dtype=dtype)

    def signed_sum(fixed_row: int | None, fixed_col: int | None):
        total = 0.0
        rows = [r for r in range(dim) if r != fixed_row]
        cols = [c for c in range(dim) if c != fixed_col]
        for perm in permutations(cols):
            assignment = dict(zip(rows, perm))
            if fixed_row is not None:
                assignment[fixed_row] = fixed_col
            full = tuple(assignment[r] for r in range(dim))
            total += _parity(full) * np.prod([vectors[r, full[r]] for r in range(dim)
                                              if r != fixed_row])
        return total

    chi = 0.0
    for perm in permutations(range(dim)):
        chi += _parity(perm) * np.prod([vectors[r, perm[r]] for r in range(dim)])
    if chi == 0:
        raise ValueError("vanishing eigenvector determinant; cofactor path undefined")
    coeffs = np.zeros(dim, dtype=vectors.dtype)
    for n in range(dim):
        coeffs[n] = sum(populations[k] * signed_sum(k, n) for k in range(dim)) / chi
    return coeffs


def _parity(perm: tuple[int, ...]) -> int:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
                     if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class SpectralSolution:
    """Eigen-expansion of an initial state under one generator.

    rho(t) = sum_j c_j exp(lambda_j t) rho_j with population modes from the
    rate-matrix eigenvectors and one scalar mode per coherence.
    """

    liouv: Liouvillian
    rho0: np.ndarray
    pop_eigenvalues: np.ndarray   # (D,)
    pop_vectors: np.ndarray       # (D, D), columns are modes
    pop_coefficients: np.ndarray  # (D,)
    coherence_pairs: tuple[tuple[int, int], ...]
    coherence_eigenvalues: np.ndarray
    coherence_coefficients: np.ndarray

    @property
    def dimension(self) -> int:
        return self.liouv.dimension

    def populations(self, times: np.ndarray) -> np.ndarray:
        """Population vector at each time, shape (D, T)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        decay = np.exp(np.outer(self.pop_eigenvalues, times))
        return (self.pop_vectors @ (self.pop_coefficients[:, None] * decay)).real

    def coherences(self, times: np.ndarray, frequency_scale: float = 1.0) -> np.ndarray:
        """Coherence amplitudes at each time, shape (n_pairs, T).

        frequency_scale multiplies only the oscillation frequencies
        (imaginary parts); the decay constants stay in true time.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        lam = (self.coherence_eigenvalues.real
               + 1j * frequency_scale * self.coherence_eigenvalues.imag)
        return self.coherence_coefficients[:, None] * np.exp(np.outer(lam, times))

    def density_matrix(self, t: float, frequency_scale: float = 1.0) -> np.ndarray:
        dim = self.dimension
        rho = np.zeros((dim, dim), dtype=complex)
        np.fill_diagonal(rho, self.populations(np.array([t]))[:, 0])
        coh = self.coherences(np.array([t]), frequency_scale)[:, 0]
        for (a, b), value in zip(self.coherence_pairs, coh):
            rho[a, b] = value
        return rho


def build_spectral_solution(liouv: Liouvillian, rho0: np.ndarray,
                            crosscheck: bool = False,
                            crosscheck_tol: float = 1e-8) -> SpectralSolution:
    """Expand rho0 in the eigenbasis of the generator.

    rho0 must be Hermitian with unit trace. With crosscheck=True the
    population coefficients are recomputed through the Levi-Civita cofactor
    path and any disagreement is logged (never silently accepted).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    dim = liouv.dimension
    if rho0.shape != (dim, dim):
        raise ValueError(f"initial state must be {dim}x{dim}")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-12:
        raise ValueError("initial state must be Hermitian")
    if abs(rho0.trace() - 1.0) > 1e-9:
        raise ValueError(f"initial state must have unit trace, got {rho0.trace():.12g}")

    values, vectors = np.linalg.eig(liouv.population_block)
    scale = max(np.linalg.norm(liouv.population_block, np.inf), 1.0)
    residual = np.linalg.norm(liouv.population_block @ vectors - vectors * values, np.inf)
    if residual > 1e-10 * scale:
        raise DefectiveGeneratorError(
            f"population block residual {residual:.3e} too large")
    coeffs = expansion_coefficients(vectors, np.diag(rho0))
    if crosscheck:
        alt = cofactor_population_coefficients(vectors, np.diag(rho0))
        gap = np.abs(alt - coeffs).max()
        if gap > crosscheck_tol * max(1.0, np.abs(coeffs).max()):
            log.warning("cofactor cross-check disagrees with linear solve by %.3e", gap)

    pairs = tuple(liouv.coherence_pairs())
    coh_values = liouv.coherence_rates()
    coh_coeffs = np.array([rho0[a, b] for a, b in pairs])
    return SpectralSolution(liouv, rho0, values.astype(complex), vectors.astype(complex),
                            coeffs.astype(complex), pairs, coh_values, coh_coeffs)
