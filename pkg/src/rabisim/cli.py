"""Command-line interface: simulate / spectrum / compare / fit / thermal.

All numeric output uses %.12e so identical invocations produce
byte-identical files. Exit codes: 0 success, 1 validation error,
2 tolerance failure in `compare`.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import SimulationConfig, default_config, load_config
from .dynamics import default_time_grid, excited_thermal_state, rabi_curve
from .experiment import (DEFAULT_BOUNDS, FIT_PARAMETER_NAMES, FitConfig, fit_parameters,
                         load_dataset, q_factor, save_dataset, synthetic_dataset)
from .liouvillian import build_liouvillian
from .model import boltzmann_factor, build_dressed_ladder, thermal_weights
from .oracle import three_way_deviation
from .spectral import build_spectral_solution, diagonal_block_eigensolve, offdiagonal_eigenpairs


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _load(args) -> SimulationConfig:
    return load_config(args.config) if args.config else default_config()


def _initial_state(cfg: SimulationConfig, n_doublets: int):
    ladder = build_dressed_ladder(cfg.params, n_doublets)
    occupation = thermal_weights(cfg.nbar, n_doublets - 1).renormalized()
    return ladder, excited_thermal_state(ladder, occupation.weights)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    times = default_time_grid(args.tmax, args.points)
    _, rho0 = _initial_state(cfg, args.doublets)
    curve = rabi_curve(cfg.params, cfg.rates, rho0, times, mode=args.mode,
                       n_doublets=args.doublets)
    with open(args.out, "w") as handle:
        handle.write("t_s,t_eff_s,p_g\n")
        for t, t_eff, p in zip(curve.t, curve.t_eff, curve.p_g):
            handle.write(f"{_fmt(t)},{_fmt(t_eff)},{_fmt(p)}\n")
    print(f"wrote {len(times)} samples to {args.out}")
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    ladder = build_dressed_ladder(cfg.params, args.doublets)
    liouv = build_liouvillian(ladder, cfg.rates)
    if args.dump_generator:
        with open(args.dump_generator, "w") as handle:
            handle.write("row,col,re,im\n")
            sup = liouv.superop
            for row, col in zip(*np.nonzero(sup)):
                handle.write(f"{row},{col},{_fmt(sup[row, col].real)},"
                             f"{_fmt(sup[row, col].imag)}\n")
    pairs = diagonal_block_eigensolve(liouv.population_block)
    lines = ["mode_id,type,re_lambda,im_lambda,components"]
    mode_id = 1
    for pair in pairs:
        comps = ";".join(_fmt(float(c.real if np.iscomplexobj(pair.components) else c))
                         for c in pair.components)
        lines.append(f"{mode_id},population,{_fmt(pair.eigenvalue.real)},"
                     f"{_fmt(pair.eigenvalue.imag)},{comps}")
        mode_id += 1
    for (a, b), lam in offdiagonal_eigenpairs(liouv):
        lines.append(f"{mode_id},coherence,{_fmt(lam.real)},{_fmt(lam.imag)},")
        mode_id += 1
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
        print(f"wrote {mode_id - 1} modes to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    times = np.linspace(0.0, args.tmax, args.points)
    ladder, rho0 = _initial_state(cfg, args.doublets)
    liouv = build_liouvillian(ladder, cfg.rates)
    deviations = three_way_deviation(liouv, rho0, times)
    worst = max(deviations.values())
    for key, value in deviations.items():
        print(f"{key}: {_fmt(value)}")
    print(f"max deviation: {_fmt(worst)} (tolerance {_fmt(args.tol)})")
    return 0 if worst < args.tol else 2


def cmd_fit(args) -> int:
    cfg = _load(args)
    free = tuple(name.strip() for name in args.free.split(",") if name.strip())
    for name in free:
        if name not in FIT_PARAMETER_NAMES:
            raise ValueError(f"unknown fit parameter {name!r}; choose from "
                             f"{', '.join(FIT_PARAMETER_NAMES)}")
    if args.synthetic:
        noise, tmax, npts = args.synthetic
        times = np.linspace(0.0, tmax, int(npts))
        dataset = synthetic_dataset(cfg.params, times=times, noise_sigma=noise,
                                    seed=args.seed)
        if args.data:
            save_dataset(dataset, args.data)
            print(f"wrote synthetic dataset to {args.data}")
    else:
        if not args.data:
            raise ValueError("fit needs --data PATH (or --synthetic)")
        dataset = load_dataset(args.data, cfg.params.geometry_ratio)
    fit_config = FitConfig(params=cfg.params, free=free)
    result = fit_parameters(dataset, fit_config)
    lines = ["parameter,value,unit"]
    for name, value in sorted(result.parameters.items()):
        unit = "" if name in ("epsilon", "geometry_ratio") else "rad/s"
        lines.append(f"{name},{_fmt(value)},{unit}")
    lines.append(f"chi2,{_fmt(result.chi2)},")
    lines.append(f"q_energy,{_fmt(result.q_energy)},")
    lines.append(f"q_field,{_fmt(result.q_field)},")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
        print(f"wrote fit report to {args.out}")
    else:
        sys.stdout.write(text)
    if not result.converged:
        print("warning: refinement stopped at max_cycles before convergence",
              file=sys.stderr)
    return 0


def cmd_thermal(args) -> int:
    cfg = _load(args)
    occupation = thermal_weights(cfg.nbar, args.levels)
    if cfg.renormalize_thermal:
        occupation = occupation.renormalized()
    print(f"nbar = {_fmt(cfg.nbar)}")
    for n, p in enumerate(occupation.weights):
        print(f"p_{n} = {_fmt(p)}")
    print(f"truncation deficit = {_fmt(occupation.deficit)}")
    params = cfg.params
    print(f"gamma_a/gamma1 = {_fmt(boltzmann_factor(params, params.omega0 + params.g))}")
    print(f"gamma_b/gamma2 = {_fmt(boltzmann_factor(params, params.omega0 - params.g))}")
    print(f"gamma_c/gamma3 = {_fmt(boltzmann_factor(params, 2.0 * params.g))}")
    print(f"gamma_e/gamma5 = {_fmt(boltzmann_factor(params, 2.0 * np.sqrt(2.0) * params.g))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabisim",
        description="Vacuum Rabi oscillation in a lossy thermal cavity: "
                    "simulation, spectrum, oracle comparison, and fitting.")
    parser.add_argument("--version", action="version", version=f"rabisim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic data")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="emit a p_g(t) curve as CSV")
    p_sim.add_argument("--doublets", type=int, default=2)
    p_sim.add_argument("--tmax", type=float, default=600e-6, help="end time (s)")
    p_sim.add_argument("--points", type=int, default=4096)
    p_sim.add_argument("--mode", choices=("raw", "effective"), default="raw")
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_spec = sub.add_parser("spectrum", parents=[common],
                            help="emit generator eigenvalues as CSV")
    p_spec.add_argument("--doublets", type=int, default=2)
    p_spec.add_argument("--out")
    p_spec.add_argument("--dump-generator", metavar="PATH",
                        help="also dump the superoperator entries (row,col,re,im)")
    p_spec.set_defaults(func=cmd_spectrum)

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="spectral vs RK4 vs matrix exponential")
    p_cmp.add_argument("--doublets", type=int, default=2)
    p_cmp.add_argument("--tmax", type=float, default=600e-6)
    p_cmp.add_argument("--points", type=int, default=241)
    p_cmp.add_argument("--tol", type=float, default=1e-8)
    p_cmp.set_defaults(func=cmd_compare)

    p_fit = sub.add_parser("fit", parents=[common], help="fit decay parameters to data")
    p_fit.add_argument("--data", help="CSV with header t_eff_s,p_g[,sigma]")
    p_fit.add_argument("--free", default="gamma_cavity",
                       help="comma list from: " + ",".join(FIT_PARAMETER_NAMES))
    p_fit.add_argument("--synthetic", nargs=3, type=float, metavar=("NOISE", "TMAX", "POINTS"),
                       help="generate seeded synthetic data instead of reading --data")
    p_fit.add_argument("--out", help="report CSV (default: stdout)")
    p_fit.set_defaults(func=cmd_fit)

    p_th = sub.add_parser("thermal", parents=[common],
                          help="print thermal weights and Boltzmann factors")
    p_th.add_argument("--levels", type=int, default=2, help="highest photon number")
    p_th.set_defaults(func=cmd_thermal)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
