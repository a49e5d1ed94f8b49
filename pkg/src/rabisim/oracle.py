"""Brute-force validation paths independent of the closed-form solver.

Fixed-step RK4 integration of the vectorized master equation, matrix
exponential propagation, and a dense numeric eigensolve. The three paths
arbitrate every closed-form expression in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph

from .liouvillian import Liouvillian, unvectorize, vectorize
from .model import frequency_gap


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for the RK4 oracle.

    dt=None picks safety_divisor steps per fastest relevant timescale,
    well below the stability bound of one twentieth of that timescale.
    """

    dt: float | None = None
    method: str = "rk4"
    trace_tol: float = 1e-10
    safety_divisor: float = 800.0

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.method not in ("rk4", "expm"):
            raise ValueError(f"unknown method {self.method!r}")


def stability_timescale(liouv: Liouvillian, rho0: np.ndarray | None = None) -> float:
    """Shortest timescale the integrator must resolve.

    min(2*pi / max |Im lambda| over coherences active in rho0, 1 / max total
    out-rate). With rho0=None every coherence counts as active.
    """
    vec0 = None if rho0 is None else vectorize(rho0)
    dim = liouv.dimension
    levels = liouv.ladder.levels
    w_max = 0.0
    for a in range(dim):
        for b in range(dim):
            if a == b:
                continue
            if vec0 is not None and vec0[a * dim + b] == 0:
                continue
            w_max = max(w_max, abs(frequency_gap(levels[a], levels[b])))
    scales = []
    if w_max > 0:
        scales.append(2.0 * math.pi / w_max)
    rate = liouv.max_total_rate()
    if rate > 0:
        scales.append(1.0 / rate)
    return min(scales) if scales else math.inf


def rk4_integrate(liouv: Liouvillian, rho0: np.ndarray, times: np.ndarray,
                  config: IntegratorConfig | None = None) -> np.ndarray:
    """Classic fixed-step RK4 trajectory of the vectorized master equation.

    Returns density matrices of shape (len(times), D, D); rho0 belongs to
    times[0]. A user-supplied dt violating the stability bound (one
    twentieth of the fastest active timescale) is rejected.
    """
    config = config or IntegratorConfig()
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a nonempty strictly increasing vector")
    if times[0] < 0:
        raise ValueError("times must be >= 0")
    scale = stability_timescale(liouv, rho0)
    bound = scale / 20.0
    if config.dt is not None:
        if math.isfinite(bound) and config.dt > bound:
            raise ValueError(
                f"dt={config.dt:.3e} violates the stability bound {bound:.3e}")
        dt_target = config.dt
    else:
        dt_target = scale / config.safety_divisor if math.isfinite(scale) else \
            max(times[-1], 1.0) / (100.0 * len(times))

    sup = liouv.superop
    state = vectorize(rho0)
    trace0 = unvectorize(state).trace().real
    out = np.empty((len(times), liouv.dimension, liouv.dimension), dtype=complex)
    prev_t = 0.0
    for k, t_k in enumerate(times):
        span = t_k - prev_t
        if span > 0:
            steps = max(1, math.ceil(span / dt_target))
            h = span / steps
            for _ in range(steps):
                k1 = sup @ state
                k2 = sup @ (state + 0.5 * h * k1)
                k3 = sup @ (state + 0.5 * h * k2)
                k4 = sup @ (state + h * k3)
                state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k] = unvectorize(state)
        prev_t = t_k
    drift = max(abs(out[k].trace().real - trace0) for k in range(len(times)))
    if drift > config.trace_tol:
        raise RuntimeError(f"trace drift {drift:.3e} exceeds {config.trace_tol:.1e}")
    return out


def _independent_sectors(matrix: np.ndarray) -> list[np.ndarray]:
    """Index sets of the decoupled blocks of a (possibly permuted) matrix."""
    mask = scipy.sparse.csr_matrix((np.abs(matrix) > 0).astype(np.int8))
    n_comp, labels = scipy.sparse.csgraph.connected_components(mask, directed=False)
    return [np.flatnonzero(labels == c) for c in range(n_comp)]


def expm_propagate(superoperator: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """Scaling-and-squaring propagation: unvec(expm(L t) vec(rho0)).

    The generator splits into independent sectors (populations plus one
    scalar per coherence); exponentiating per sector keeps the slow sectors
    at their own norm instead of the cavity-frequency scale.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    vec0 = vectorize(rho0)
    result = np.zeros_like(vec0)
    for idx in _independent_sectors(superoperator):
        block = superoperator[np.ix_(idx, idx)] * t
        result[idx] = scipy.linalg.expm(block) @ vec0[idx]
    return unvectorize(result)


def numeric_spectrum(matrix: np.ndarray, residual_tol: float = 1e-10,
                     return_vectors: bool = False):
    """Dense eigensolve with a per-pair residual check ||Av - lv|| <= tol ||A||."""
    matrix = np.asarray(matrix)
    values, vectors = np.linalg.eig(matrix)
    scale = np.linalg.norm(matrix, 2)
    if scale > 0:
        residuals = np.linalg.norm(matrix @ vectors - vectors * values, axis=0)
        worst = residuals.max()
        if worst > residual_tol * scale:
            raise RuntimeError(
                f"eigensolve residual {worst:.3e} exceeds {residual_tol:.1e} * ||A||")
    return (values, vectors) if return_vectors else values


def three_way_deviation(liouv: Liouvillian, rho0: np.ndarray, times: np.ndarray,
                        config: IntegratorConfig | None = None) -> dict[str, float]:
    """Pairwise sup-norm deviations between spectral, RK4 and expm paths."""
    from .spectral import build_spectral_solution  # local import, no cycle at module load

    times = np.asarray(times, dtype=float)
    solution = build_spectral_solution(liouv, rho0)
    spectral_rho = np.array([solution.density_matrix(t) for t in times])
    rk4_rho = rk4_integrate(liouv, rho0, times, config)
    expm_rho = np.array([expm_propagate(liouv.superop, rho0, t) for t in times])
    return {
        "spectral_vs_rk4": float(np.abs(spectral_rho - rk4_rho).max()),
        "spectral_vs_expm": float(np.abs(spectral_rho - expm_rho).max()),
        "rk4_vs_expm": float(np.abs(rk4_rho - expm_rho).max()),
    }
