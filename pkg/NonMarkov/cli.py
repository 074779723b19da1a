"""
    Command line front end.

        nonmarkov analyze --wtd "erlang(2,1)"
        nonmarkov erlang-sweep --n-max 20 --out-csv erlang.csv --out-svg erlang.svg
        nonmarkov mixture-sweep --mu 0.1,0.2,0.5 --lambda1 1 --ratio 5
        nonmarkov counterexample --t-end 12.566
        nonmarkov mc-check --wtd "erlang(2,1)" --n-traj 1000000 --seed 7

    Every command takes --config PATH, a YAML file whose keys (the flag
    destinations) act as defaults for the flags given on the command line.
    Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import yaml

from NonMarkov.counterexample.rate_functions import parse_rate
from NonMarkov.counterexample.two_rate_model import TwoRateModel, demonstrate
from NonMarkov.errors import NumericalError, ValidationError
from NonMarkov.measure.nonmarkov_measure import n_c_twosite
from NonMarkov.measure.sweeps import erlang_sweep, linear_fit, mixture_q_curves, mixture_sweep
from NonMarkov.montecarlo.simulation import compare, simulate_q
from NonMarkov.output_util import dump_run_arguments, to_json, write_csv, write_json
from NonMarkov.semimarkov.two_site import gamma_on_grid, q_time_domain
from NonMarkov.settings import (COMMAND_NAMES, DEFAULT_GAMMA1, DEFAULT_GAMMA2, DEFAULT_TAIL_TOL, EXIT_NUMERICAL,
                                EXIT_OK, EXIT_VALIDATION, FLOAT_FORMAT, JSON_SCHEMA_VERSION, Command)
from NonMarkov.waiting_time.waiting_time import WaitingTimeSpec, check_valid, spec_from_dict, spec_to_dict
from NonMarkov.waiting_time.wtd_parser import format_wtd, parse_wtd

__all__ = ["parse_wtd", "format_wtd", "build_parser", "parse_arguments", "run", "main"]

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
MIN_FIT_POINTS = 2


def __add_common(p: argparse.ArgumentParser):
    p.add_argument('--config', type=Path, help='YAML file with defaults for the flags of this command')
    p.add_argument('--run-dir', dest='run_dir', type=Path,
                   help='Directory for outputs without an explicit path and for run_arguments.yaml')
    p.add_argument('--log-level', dest='log_level', default='INFO',
                   choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])


def __add_wtd(p: argparse.ArgumentParser):
    p.add_argument('--wtd', help='Waiting time distribution, e.g. "conv(exp(1),exp(2))"')
    p.add_argument('--wtd-file', dest='wtd_file', type=Path,
                   help='JSON or YAML document describing the waiting time distribution')


def build_parser():
    '''
    Returns:
        The top-level parser and a dict of the sub-command parsers by name.
    '''
    p = argparse.ArgumentParser(prog='nonmarkov',
                                description='Memory effects of classical processes at the level of '
                                            'single-time distributions.')
    sub = p.add_subparsers(dest='command', required=True)
    commands = {}

    analyze = sub.add_parser('analyze', help='q(t), gamma(t) and N_C of a two-site semi-Markov process')
    __add_wtd(analyze)
    analyze.add_argument('--tail-tol', dest='tail_tol', type=float, default=DEFAULT_TAIL_TOL,
                         help='Tolerance on |q| beyond the truncation horizon')
    analyze.add_argument('--grid-points', dest='grid_points', type=int, default=2000,
                         help='Number of points of the q trajectory CSV')
    analyze.add_argument('--out-csv', dest='out_csv', type=Path)
    analyze.add_argument('--out-json', dest='out_json', type=Path)
    commands['analyze'] = analyze

    erlang = sub.add_parser('erlang-sweep', help='N_C against the order of special Erlang waiting times')
    erlang.add_argument('--n-max', dest='n_max', type=int)
    erlang.add_argument('--lambda', dest='lam', type=float, default=1.0)
    erlang.add_argument('--tail-tol', dest='tail_tol', type=float, default=DEFAULT_TAIL_TOL)
    erlang.add_argument('--workers', type=int, help='Worker processes (default: NMK_THREADS or all cores)')
    erlang.add_argument('--out-csv', dest='out_csv', type=Path)
    erlang.add_argument('--out-svg', dest='out_svg', type=Path)
    commands['erlang-sweep'] = erlang

    mixture = sub.add_parser('mixture-sweep', help='N_C against the weight of a convolution of two mixtures')
    mixture.add_argument('--mu', help='Comma separated mixture weights')
    mixture.add_argument('--lambda1', type=float)
    mixture.add_argument('--ratio', type=float, help='lambda2 / lambda1')
    mixture.add_argument('--tail-tol', dest='tail_tol', type=float, default=DEFAULT_TAIL_TOL)
    mixture.add_argument('--t-max', dest='t_max', type=float, help='End of the |q(t)| curves')
    mixture.add_argument('--grid-points', dest='grid_points', type=int, default=500)
    mixture.add_argument('--workers', type=int)
    mixture.add_argument('--out-csv', dest='out_csv', type=Path)
    mixture.add_argument('--out-svg', dest='out_svg', type=Path)
    commands['mixture-sweep'] = mixture

    counter = sub.add_parser('counterexample',
                             help='Monotone Kolmogorov distance without P-divisibility')
    counter.add_argument('--gamma1', default=DEFAULT_GAMMA1,
                         help='const:a | cos:b,a[,w] | sin:b,a[,w] | table:PATH')
    counter.add_argument('--gamma2', default=DEFAULT_GAMMA2)
    counter.add_argument('--t-end', dest='t_end', type=float)
    counter.add_argument('--out-json', dest='out_json', type=Path)
    commands['counterexample'] = counter

    mc = sub.add_parser('mc-check', help='Compare q(t) with a Monte Carlo estimate')
    __add_wtd(mc)
    mc.add_argument('--n-traj', dest='n_traj', type=int)
    mc.add_argument('--seed', type=int)
    mc.add_argument('--grid-points', dest='grid_points', type=int, default=50)
    mc.add_argument('--t-max', dest='t_max', type=float, help='End of the grid (default: 5 time constants)')
    mc.add_argument('--workers', type=int, default=1)
    mc.add_argument('--out-json', dest='out_json', type=Path)
    commands['mc-check'] = mc

    for command in commands.values():
        __add_common(command)
    return p, commands


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    p, commands = build_parser()
    args = p.parse_args(argv)

    if args.config:
        try:
            with open(args.config) as file:
                data = yaml.load(file, Loader=yaml.FullLoader) or {}
        except OSError as e:
            raise ValidationError(f"cannot read config {args.config}: {e}")
        if not isinstance(data, dict):
            raise ValidationError(f"config {args.config} must be a mapping")
        known = {action.dest for action in commands[args.command]._actions}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        if isinstance(data.get('mu'), list):
            data['mu'] = ",".join(str(mu) for mu in data['mu'])
        commands[args.command].set_defaults(**data)
        # explicit flags win over the config
        args = p.parse_args(argv)

    __check_arguments(args)
    return args


def __check_arguments(args: argparse.Namespace):
    required = {'erlang-sweep': ['n_max'],
                'mixture-sweep': ['mu', 'lambda1', 'ratio'],
                'counterexample': ['t_end'],
                'mc-check': ['n_traj', 'seed']}
    missing = [name for name in required.get(args.command, []) if getattr(args, name) is None]
    if missing:
        raise ValidationError("missing required arguments: " + ", ".join('--' + m.replace('_', '-') for m in missing))
    if args.command in ('analyze', 'mc-check'):
        if (args.wtd is None) == (args.wtd_file is None):
            raise ValidationError("exactly one of --wtd and --wtd-file is required")
    if getattr(args, 'tail_tol', None) is not None and not args.tail_tol > 0:
        raise ValidationError("--tail-tol must be positive")
    if getattr(args, 'grid_points', 2) < 2:
        raise ValidationError("--grid-points must be at least 2")


def __load_spec(args: argparse.Namespace) -> WaitingTimeSpec:
    if args.wtd is not None:
        spec = parse_wtd(args.wtd)
    else:
        try:
            with open(args.wtd_file) as file:
                spec = spec_from_dict(yaml.safe_load(file))
        except OSError as e:
            raise ValidationError(f"cannot read {args.wtd_file}: {e}")
        except yaml.YAMLError as e:
            raise ValidationError(f"{args.wtd_file} is neither JSON nor YAML: {e}")
    check_valid(spec)
    return spec


def __output_path(explicit: Optional[Path], args: argparse.Namespace, name: str) -> Optional[Path]:
    if explicit is not None:
        return explicit
    if args.run_dir is not None:
        return args.run_dir / name
    return None


def __emit_json(document: dict, path: Optional[Path]):
    if path is None:
        sys.stdout.write(to_json(document))
    else:
        write_json(document, path)


def __emit_csv(table: pd.DataFrame, path: Optional[Path]):
    if path is None:
        table.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, na_rep="NaN", lineterminator="\n")
    else:
        write_csv(table, path)


def __analyze(args: argparse.Namespace):
    spec = __load_spec(args)
    qf = q_time_domain(spec)
    report = n_c_twosite(spec, args.tail_tol, qf)
    logger.info("%s: N_C = %.10g (%d increase intervals, horizon %.6g)",
                format_wtd(spec), report.n_c, len(report.contributions), report.horizon)

    t_end = report.horizon if report.horizon > 0 else 20.0 * qf.time_constant
    times = np.linspace(0.0, t_end, args.grid_points)
    q = qf.q(times)
    trajectory = pd.DataFrame({"t": times, "q": q, "abs_q": np.abs(q),
                               "gamma": gamma_on_grid(qf, times), "dk": np.abs(q)})
    csv_path = __output_path(args.out_csv, args, "q_trajectory.csv")
    if csv_path is not None:
        write_csv(trajectory, csv_path)

    document = report.to_dict()
    document["wtd"] = format_wtd(spec)
    document["spec"] = spec_to_dict(spec)
    __emit_json(document, __output_path(args.out_json, args, "report.json"))


def __erlang_sweep(args: argparse.Namespace):
    table = erlang_sweep(args.n_max, args.lam, args.tail_tol, args.workers)
    fit = None
    if int((table["param"] >= 4).sum()) >= MIN_FIT_POINTS:
        fit = linear_fit(table)
        logger.info("linear fit over n >= %d: slope %.6g, intercept %.6g, R^2 %.6f",
                    fit.n_min, fit.slope, fit.intercept, fit.r_squared)
    __emit_csv(table, __output_path(args.out_csv, args, "erlang_sweep.csv"))

    svg_path = __output_path(args.out_svg, args, "erlang_sweep.svg")
    if svg_path is not None:
        from NonMarkov.plotting import plot_erlang_sweep
        plot_erlang_sweep(table, svg_path, args.lam, fit)


def __parse_mu(text: str) -> List[float]:
    try:
        mus = [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"--mu must be a comma separated list of numbers, got '{text}'")
    if not mus or any(not 0.0 <= mu <= 1.0 for mu in mus):
        raise ValidationError("mixture weights must lie in [0, 1]")
    return mus


def __mixture_sweep(args: argparse.Namespace):
    mus = __parse_mu(args.mu)
    table = mixture_sweep(mus, args.lambda1, args.ratio, args.tail_tol, args.workers)
    csv_path = __output_path(args.out_csv, args, "mixture_sweep.csv")
    __emit_csv(table, csv_path)

    t_max = args.t_max if args.t_max is not None else 15.0 / args.lambda1
    curves = mixture_q_curves(mus, args.lambda1, args.ratio, np.linspace(0.0, t_max, args.grid_points))
    if csv_path is not None:
        write_csv(curves, csv_path.with_name(csv_path.stem + "_abs_q.csv"))

    svg_path = __output_path(args.out_svg, args, "mixture_sweep.svg")
    if svg_path is not None:
        from NonMarkov.plotting import plot_mixture_sweep
        plot_mixture_sweep(table, curves, svg_path, args.lambda1, args.ratio)


def __counterexample(args: argparse.Namespace):
    model = TwoRateModel(parse_rate(args.gamma1), parse_rate(args.gamma2))
    report = demonstrate(model, args.t_end)
    logger.info(report.verdict)
    __emit_json(report.to_dict(), __output_path(args.out_json, args, "counterexample.json"))


def __mc_check(args: argparse.Namespace):
    spec = __load_spec(args)
    qf = q_time_domain(spec)
    t_max = args.t_max if args.t_max is not None else 5.0 * qf.time_constant
    grid = np.linspace(0.0, t_max, args.grid_points)
    emp = simulate_q(spec, grid, args.n_traj, args.seed, args.workers)
    comparison = compare(emp, qf)
    if not comparison.passed:
        logger.warning("Monte Carlo deviation %.3g exceeds %.3g at t = %.6g",
                       comparison.max_deviation, comparison.threshold, comparison.t_at_max)
    table = emp.to_frame()
    table["q"] = qf.q(grid)
    document = {"schema": JSON_SCHEMA_VERSION,
                "wtd": format_wtd(spec),
                "n_traj": args.n_traj,
                "seed": args.seed,
                "comparison": comparison.to_dict(),
                "grid": table.to_dict(orient="list")}
    __emit_json(document, __output_path(args.out_json, args, "mc_check.json"))


def run(args: argparse.Namespace) -> int:
    '''
    Runs a parsed command.

    Returns:
        EXIT_OK, or EXIT_VALIDATION / EXIT_NUMERICAL with the diagnostic on
        stderr.
    '''
    handlers = {Command.ANALYZE: __analyze,
                Command.ERLANG_SWEEP: __erlang_sweep,
                Command.MIXTURE_SWEEP: __mixture_sweep,
                Command.COUNTEREXAMPLE: __counterexample,
                Command.MC_CHECK: __mc_check}
    try:
        if args.run_dir is not None:
            dump_run_arguments(args, args.run_dir)
        handlers[COMMAND_NAMES[args.command]](args)
    except ValidationError as e:
        logger.error("invalid input: %s", e)
        return EXIT_VALIDATION
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, stream=sys.stderr)
    try:
        args = parse_arguments(argv)
    except ValidationError as e:
        logger.error("invalid input: %s", e)
        return EXIT_VALIDATION
    logging.getLogger().setLevel(args.log_level)
    return run(args)


if __name__ == '__main__':
    sys.exit(main())
