"""Command-line entry point: ``pairlind <subcommand> ...``.

Exit codes: 0 success, 2 configuration/argument error, 3 solver failure on
a single-point run (``steady``, ``simulate``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings

import numpy as np

from .config import ConfigError, load_config, parse_j
from .dynamics import (
    DensityMatrix,
    build_full_generator,
    build_reduced_generator,
    evolve_series,
    moments,
    thermal_pair_state,
)
from .errors import InvalidArgument, PairlindError
from .model import TWO_PI, BathParams, bath_rates
from .output import emit_csv, emit_svg, write_csv
from .sweep import cross_validate, resolve_point, run_sweep

EXIT_CONFIG = 2
EXIT_SOLVER = 3

_HZ_FIELDS = {"omega", "omega_r", "g2", "g0", "gamma_plus", "gamma_minus", "gamma_0deph",
              "Gamma_par", "Gamma_perp", "Gamma_up", "Gamma_down", "pump", "decay"}


def _single_j(text):
    js = parse_j(text)
    if len(js) != 1:
        raise ConfigError("this command needs a single j (0.25 or 0.75)")
    return js[0]


def _point(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(omega_r_hz=getattr(args, "omega_r_hz", None))
    dw = args.delta_omega_hz if args.delta_omega_hz is not None else cfg.delta_omega_hz
    if dw is None:
        raise ConfigError("delta_omega_hz not given (flag or [model] key)")
    n_bar = args.n_bar if args.n_bar is not None else cfg.n_bar
    j = _single_j(args.j) if args.j is not None else cfg.js[0]
    return cfg, cfg.params(n_bar, dw), j


def cmd_derive(args):
    cfg, p, j = _point(args)
    p, r = resolve_point(p, j, cfg.tolerances.resonance_rel)
    print(f"# rates in Hz (cyclic); theta in rad; j={j:g} used for the resonance solve")
    for name, value in r.__dict__.items():
        if name in _HZ_FIELDS:
            print(f"{name}_hz = {value / TWO_PI!r}")
        else:
            print(f"{name} = {value!r}")
    return 0


def cmd_bath_rates(args):
    b = BathParams.from_hz(args.nu_hz, args.chi_tilde_hz, args.chi_hz)
    kappa, chi_bar = bath_rates(b, TWO_PI * args.omega_c_hz)
    print(f"kappa_hz = {kappa / TWO_PI!r}")
    print(f"chi_bar_hz = {chi_bar / TWO_PI!r}")
    return 0


def cmd_sweep(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        mode=args.mode,
        js=parse_j(args.j) if args.j is not None else None,
        csv_path=args.csv,
        svg_path=args.svg,
        svg_y=args.svg_y,
    )
    rows = run_sweep(cfg, jobs=args.jobs)
    failed = [r for r in rows if r.status not in ("ok", "outside cooling regime")]
    if failed:
        logging.warning("%d of %d points failed; first: %s", len(failed), len(rows), failed[0].status)
    if cfg.csv_path:
        emit_csv(rows, cfg.csv_path)
    else:
        write_csv(rows, sys.stdout)
    if cfg.svg_path:
        emit_svg(rows, cfg.svg_path, y=cfg.svg_y)
    return 0


def _fmt(v):
    if v is None:
        return "-"
    return f"{v:.12g}"


def cmd_steady(args):
    cfg, p, j = _point(args)
    report = cross_validate(p, j, include_full=args.full, tail=cfg.tolerances.tail)
    print(f"eta = {report.eta!r}   j = {j:g}")
    fields = ("n_mean", "b2", "b4", "g2", "g4")
    print("path".ljust(10) + "".join(f.rjust(20) for f in fields))
    for name, s in report.stats.items():
        print(name.ljust(10) + "".join(_fmt(getattr(s, f)).rjust(20) for f in fields))
    print("relative deviations:")
    for key, dev in report.deviations.items():
        label = f"{key[0]} vs {key[1]}" + (f" ({key[2]})" if len(key) > 2 else "")
        print(f"  {label}: {dev:.3e}")
    return 0


def cmd_simulate(args):
    cfg, p, j = _point(args)
    p, r = resolve_point(p, j, cfg.tolerances.resonance_rel)
    pops = thermal_pair_state(p.n_bar, j, args.m_cutoff)
    if args.model == "reduced":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            G = build_reduced_generator(r, p, j, args.m_cutoff)
        rho0 = DensityMatrix.from_populations(pops, G.basis)
    else:
        G = build_full_generator(p, r, args.m_cutoff, j=j, rotating_frame=True)
        ground = np.array([0.0, 1.0])
        rho0 = DensityMatrix(np.kron(np.diag(ground), np.diag(pops)), G.basis)
    times = np.linspace(0.0, args.t_final_s, args.points)
    states = evolve_series(G, rho0, times, tol=args.tol, max_steps=args.max_steps)

    out = open(args.csv, "w", encoding="utf-8", newline="") if args.csv else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t_s", "n_mean", "g2", "parity_even", "parity_odd", "sz", "trace_deviation"])
        for t, rho in zip(times, states):
            m = moments(rho)
            writer.writerow([repr(float(t)), repr(m.n_mean), "" if m.g2 is None else repr(m.g2),
                             repr(m.parity_even), repr(m.parity_odd),
                             "" if m.sz is None else repr(m.sz),
                             repr(rho.info.get("trace_deviation", 0.0))])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairlind", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def point_args(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--delta-omega-hz", type=float)
        sp.add_argument("--n-bar", type=float)
        sp.add_argument("--j", help="0.25 or 0.75")
        sp.add_argument("--omega-r-hz", type=float, help="skip the resonance solve")

    sp = sub.add_parser("derive", help="print derived rates for one point")
    point_args(sp)
    sp.set_defaults(func=cmd_derive, solver_exit=False)

    sp = sub.add_parser("bath-rates", help="kappa and chi_bar from reservoir parameters")
    sp.add_argument("--nu-hz", type=float, required=True)
    sp.add_argument("--chi-hz", type=float, required=True)
    sp.add_argument("--chi-tilde-hz", type=float, required=True)
    sp.add_argument("--omega-c-hz", type=float, required=True)
    sp.set_defaults(func=cmd_bath_rates, solver_exit=False)

    sp = sub.add_parser("sweep", help="detuning sweep to CSV (and SVG)")
    sp.add_argument("--config", required=True)
    sp.add_argument("--mode", choices=("analytic", "reduced-numeric", "full-numeric"))
    sp.add_argument("--j", help="0.25, 0.75 or both")
    sp.add_argument("--csv")
    sp.add_argument("--svg")
    sp.add_argument("--svg-y", help="column plotted in the SVG (default n_mean)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep, solver_exit=False)

    sp = sub.add_parser("steady", help="one-point cross-validation report")
    point_args(sp)
    sp.add_argument("--full", action="store_true", help="include the full qubit-oscillator model")
    sp.set_defaults(func=cmd_steady, solver_exit=True)

    sp = sub.add_parser("simulate", help="transient evolution, time series CSV")
    point_args(sp)
    sp.add_argument("--t-final-s", type=float, required=True)
    sp.add_argument("--points", type=int, default=101)
    sp.add_argument("--model", choices=("reduced", "full"), default="reduced")
    sp.add_argument("--m-cutoff", type=int, default=16)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-steps", type=int, default=200_000)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_simulate, solver_exit=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PairlindError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.solver_exit and not isinstance(exc, InvalidArgument):
            return EXIT_SOLVER
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
