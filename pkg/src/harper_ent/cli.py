"""Command-line experiments: oracle verification and the three Harper-chain runs.

Exit codes: 0 success, 1 a check failed (or the solver did), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import state_core as sc
from ._workers import worker_count
from .dynamics import EvolutionConfig, ExponentFit, TimeSeries, diffusion_exponent, evolve
from .harper import (
    HarperParams,
    SweepRow,
    fibonacci_sigma,
    ground_state,
    lambda_grid,
    lambda_sweep,
    parse_sigma,
)
from .oracle import VerificationReport
from .output import gnuplot_script, lambda_tag, write_csv, atomic_write_text
from .verification import IdentityCheck, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _sigma(text: str):
    try:
        return parse_sigma(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"sigma must be P/Q or a decimal, got {text!r}")


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _non_negative(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _window(text: str):
    lo, _, hi = text.partition(",")
    try:
        lo = float(lo)
        hi = None if hi.strip() in ("", "edge", "auto") else float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be LO,HI (HI may be 'edge'), got {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="seed for randomized checks")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--threads", type=_positive(int), default=None,
                        help="worker threads (default: $HARPER_ENT_THREADS or min(4, cpus))")

    parser = argparse.ArgumentParser(
        prog="harper-ent",
        description="Entanglement and localization of one-particle states on the Harper chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common],
                       help="oracle partial trace vs closed forms on random states")
    v.add_argument("--max-n", type=int, default=12)
    v.add_argument("--states", type=_positive(int), default=100, help="random states per size")
    v.add_argument("--tolerance", type=_non_negative, default=1e-10,
                   help="oracle agreement tolerance")

    def harper_flags(p, multi_n=False):
        if multi_n:
            p.add_argument("--n-sites", type=_int_list, default=[34, 55, 89, 144],
                           help="comma list of N (default 34,55,89,144)")
        else:
            p.add_argument("--n-sites", type=int, required=True)
        p.add_argument("--sigma", type=_sigma, default=None,
                       help="potential frequency P/Q (default F(n-1)/F(n) for Fibonacci N)")
        p.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
        p.add_argument("--phase", type=float, default=0.0, help="potential phase offset")
        p.add_argument("--block-size", type=int, default=1, help="block size L")
        p.add_argument("--plot", action="store_true", help="also emit a gnuplot script")

    g = sub.add_parser("ground-sweep", parents=[common], help="ground-state entropy vs lambda")
    harper_flags(g, multi_n=True)
    g.add_argument("--lambda-min", type=_non_negative, default=0.0)
    g.add_argument("--lambda-max", type=_non_negative, default=2.0)
    g.add_argument("--lambda-step", type=_positive(float), default=0.02)

    d = sub.add_parser("distribution", parents=[common], help="site-entropy profile of the ground state")
    harper_flags(d)
    d.add_argument("--lambda", dest="lam", type=_non_negative, required=True)

    def dynamics_flags(p, window_required=False):
        harper_flags(p)
        p.add_argument("--lambda", dest="lam", type=_float_list, required=True,
                       help="comma list of lambda values")
        p.add_argument("--t-max", type=_positive(float), default=60.0)
        p.add_argument("--dt", type=_positive(float), default=0.1)
        p.add_argument("--propagator", choices=("spectral", "rk4"), default="spectral")
        p.add_argument("--rk4-substep", type=_positive(float), default=1e-3)
        p.add_argument("--initial-site", type=int, default=None, help="default floor(N/2)")
        p.add_argument("--boundary-threshold", type=_positive(float), default=1e-6)
        p.add_argument("--exponent-window", type=_window, required=window_required,
                       default=None, help="fit window LO,HI for the variance exponent")

    dyn = sub.add_parser("dynamics", parents=[common], help="wave-packet spreading and entropy vs t")
    dynamics_flags(dyn)
    ex = sub.add_parser("exponent", parents=[common], help="variance exponent report only")
    dynamics_flags(ex, window_required=True)
    return parser


def _comments(command: str, **fields) -> list:
    return [f"command={command}"] + [f"{k}={v}" for k, v in fields.items()]


def _resolve_sigma(args, n_sites: int):
    return args.sigma if args.sigma is not None else fibonacci_sigma(n_sites)


def run_verify(args) -> int:
    if args.max_n < 2 or args.max_n > 12:
        raise UsageError(f"--max-n must be in 2..12, got {args.max_n}")
    result = run_suite(seed=args.seed, max_n=args.max_n, states_per_size=args.states, tol=args.tolerance)
    meta = _comments("verify", seed=args.seed, max_n=args.max_n, states=args.states,
                     tolerance=repr(args.tolerance))
    write_csv(args.out / "verify.csv", VerificationReport.CSV_HEADER,
              (r.csv_row() for r in result.oracle), meta)
    write_csv(args.out / "identities.csv", IdentityCheck.CSV_HEADER,
              (r.csv_row() for r in result.identities), meta)
    failed = sum(not r.passed for r in result.oracle) + sum(not r.passed for r in result.identities)
    print(f"verify: {len(result.oracle)} oracle checks, {len(result.identities)} identity checks, "
          f"max oracle diff {result.max_oracle_diff:.3e}, max identity diff "
          f"{result.max_identity_diff:.3e}, {failed} failed")
    return EXIT_OK if result.passed else EXIT_FAIL


def run_ground_sweep(args) -> int:
    grid = lambda_grid(args.lambda_min, args.lambda_max, args.lambda_step)
    sigmas = {n: _resolve_sigma(args, n) for n in args.n_sites}
    series = []
    for n in args.n_sites:
        rows = lambda_sweep(n, grid, args.block_size, sigmas[n], args.boundary,
                            workers=args.threads, phase=args.phase)
        name = f"sweep_N{n}.csv"
        write_csv(args.out / name, SweepRow.CSV_HEADER, (r.csv_row() for r in rows),
                  _comments("ground-sweep", n_sites=n, sigma=sigmas[n], boundary=args.boundary,
                            phase=repr(args.phase), block_size=args.block_size, hopping=0.5,
                            lambda_min=repr(args.lambda_min), lambda_max=repr(args.lambda_max),
                            lambda_step=repr(args.lambda_step)))
        series.append((name, "lambda", "e_avg", f"N={n}"))
        print(f"ground-sweep: wrote {name} ({len(rows)} rows)")
    if args.plot:
        atomic_write_text(args.out / "sweep.gp", gnuplot_script(
            "Ground-state average linear entropy", "lambda",
            f"E_{{{args.block_size},N-{args.block_size}}}", series, "sweep.png"))
    return EXIT_OK


def run_distribution(args) -> int:
    params = HarperParams(args.n_sites, args.lam, _resolve_sigma(args, args.n_sites),
                          args.boundary, args.phase)
    gs = ground_state(params)
    ent = sc.entropy_distribution(gs.state)
    probs = gs.state.probabilities
    name = f"distribution_N{params.n_sites}_lambda{lambda_tag(args.lam)}.csv"
    rows = ((n + 1, repr(float(ent[n])), repr(float(probs[n]))) for n in range(params.n_sites))
    write_csv(args.out / name, ("site", "site_entropy", "abs_psi_sq"), rows,
              _comments("distribution", params=params.describe(),
                        ground_energy=repr(gs.energy), degenerate=int(gs.degenerate),
                        e_s=repr(sc.state_linear_entropy(gs.state)),
                        participation=repr(sc.participation_ratio(gs.state))))
    if args.plot:
        atomic_write_text(args.out / name.replace(".csv", ".gp"), gnuplot_script(
            f"Site entropy, lambda={lambda_tag(args.lam)}", "site", "E^{(n)}_{1,N-1}",
            [(name, "site", "site_entropy", "site entropy")], name.replace(".csv", ".png")))
    print(f"distribution: wrote {name}")
    return EXIT_OK


def _config(args) -> EvolutionConfig:
    return EvolutionConfig(
        t_max=args.t_max, dt=args.dt, propagator=args.propagator,
        rk4_substep=min(args.rk4_substep, args.dt), initial_site=args.initial_site,
        boundary_hit_threshold=args.boundary_threshold, block_size=args.block_size,
    )


def _evolve_all(args):
    sigma = _resolve_sigma(args, args.n_sites)
    config = _config(args)
    params = [HarperParams(args.n_sites, lam, sigma, args.boundary, args.phase) for lam in args.lam]
    with ThreadPoolExecutor(max_workers=worker_count(args.threads)) as pool:
        runs = list(pool.map(lambda p: evolve(p, config), params))
    return config, params, runs


def _exponent_rows(args, params, runs):
    lo, hi = args.exponent_window
    rows = []
    for p, run in zip(params, runs):
        fit = diffusion_exponent(run, lo, hi)
        rows.append((repr(p.lam), repr(fit.t_lo), repr(fit.t_hi), repr(fit.alpha),
                     repr(fit.r_squared), int(fit.confident)))
    return rows


def _write_exponents(args, config, params, runs):
    rows = _exponent_rows(args, params, runs)
    meta = {f"params_{k}": p.describe() for k, p in enumerate(params)}
    write_csv(args.out / "exponents.csv", ExponentFit.CSV_HEADER, rows,
              _comments(args.command, config=config.describe(),
                        exponent_window=args.exponent_window, **meta))
    for row in rows:
        print(f"exponent: lambda={row[0]} alpha={float(row[3]):.4f} r2={float(row[4]):.4f}"
              f" confident={row[5]}")


def run_dynamics(args) -> int:
    config, params, runs = _evolve_all(args)
    series = []
    for p, run in zip(params, runs):
        name = f"dynamics_N{p.n_sites}_lambda{lambda_tag(p.lam)}.csv"
        write_csv(args.out / name, TimeSeries.CSV_HEADER, run.csv_rows(),
                  _comments("dynamics", params=p.describe(), config=config.describe(),
                            initial_site=run.initial_site,
                            boundary_hit_time=run.boundary_hit_time))
        drift = float(np.max(np.abs(run.norms - 1.0)))
        series.append((name, "t", "e_avg", f"lambda={lambda_tag(p.lam)}"))
        print(f"dynamics: wrote {name} ({run.times.size} samples, norm drift {drift:.2e}, "
              f"boundary hit {run.boundary_hit_time})")
    if args.exponent_window is not None:
        _write_exponents(args, config, params, runs)
    if args.plot:
        atomic_write_text(args.out / "dynamics.gp", gnuplot_script(
            "Average linear entropy vs time", "t", f"E_{{{args.block_size},N-{args.block_size}}}",
            series, "dynamics.png"))
    return EXIT_OK


def run_exponent(args) -> int:
    config, params, runs = _evolve_all(args)
    _write_exponents(args, config, params, runs)
    return EXIT_OK


COMMANDS = {
    "verify": run_verify,
    "ground-sweep": run_ground_sweep,
    "distribution": run_distribution,
    "dynamics": run_dynamics,
    "exponent": run_exponent,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"harper-ent {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"harper-ent {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
