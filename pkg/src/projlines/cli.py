"""Command-line interface: ``projlines <command> ...``.

Stochastic commands take a mandatory ``--seed`` and print it back.  Results
go to stdout as ``key: value`` lines; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .energy import Kernel, potential_energy
from .geometry import min_pairwise_distance_sq
from .io import LineSetFormatError, format_lineset, load_lineset_file
from .optimize import OptimOptions, multistart_minimize, packing_optimize
from .symmetry import canonical_config

log = logging.getLogger("projlines")

DEFAULT_KERNELS = (Kernel.distance(), Kernel.riesz(1.0), Kernel.log())


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _kernel(text):
    try:
        return Kernel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(pairs, out=None):
    out = out or sys.stdout
    for key, value in pairs:
        out.write(f"{key}: {value!r}\n" if isinstance(value, float) else f"{key}: {value}\n")


def _write_lineset(L, args, provenance):
    energies = {k.name: potential_energy(L, k) for k in DEFAULT_KERNELS}
    text = format_lineset(L, provenance, energies)
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _mc_params(args):
    from .stat import MCParams

    base = MCParams.full() if getattr(args, "paper_sizes", False) else MCParams()
    sizes = {name: getattr(args, name.lower()) for name in ("I", "N1", "N2", "I1", "I2", "I3")
             if getattr(args, name.lower(), None) is not None}
    if sizes:
        base = MCParams(**{**base.__dict__, **sizes})
    return base


def _load(path):
    return load_lineset_file(path).lines


# ------------------------------------------------------------------ commands

def cmd_config(args):
    cfg = canonical_config(args.d, refine=args.refine)
    _write_lineset(cfg.lines, args, f"canonical_config({args.d}): {cfg.provenance}")


def cmd_optimize(args):
    opts = OptimOptions(rng_seed=args.seed, grad_tol=args.grad_tol, max_iters=args.max_iters)
    res = multistart_minimize(args.d, args.n, args.kernel, args.starts, opts)
    log.info("seed %d: energy %.15g, |grad| %.3e, converged %s", args.seed, res.energy,
             res.gradient_norm, res.converged)
    if args.out:
        _write_lineset(res.lines, args, f"optimize d={args.d} n={args.n} kernel={args.kernel} "
                                        f"starts={args.starts} seed={args.seed}")
    _emit([("seed", args.seed), ("kernel", args.kernel.name), ("energy", res.energy),
           ("gradient_norm", res.gradient_norm), ("min_distance_sq", min_pairwise_distance_sq(res.lines)),
           ("converged", res.converged)])


def cmd_packing(args):
    opts = OptimOptions(rng_seed=args.seed)
    res = packing_optimize(args.d, args.n, opts, n_starts=args.starts)
    if args.out:
        _write_lineset(res.lines, args, f"packing d={args.d} n={args.n} seed={args.seed}")
    _emit([("seed", args.seed), ("min_distance_sq", min_pairwise_distance_sq(res.lines))])


def cmd_energy(args):
    L = _load(args.infile)
    kernels = args.kernel or list(DEFAULT_KERNELS)
    pairs = [("count", len(L)), ("d", L.d), ("min_distance_sq", min_pairwise_distance_sq(L))]
    from .energy import gradient_norm
    for k in kernels:
        pairs.append((f"energy.{k.name}", potential_energy(L, k)))
        pairs.append((f"gradient_norm.{k.name}", gradient_norm(L, k)))
    _emit(pairs)


def _stat_params(d, args, N=None):
    from .stat import StatParams

    return StatParams(d, args.r, args.alpha, N)


def cmd_eval_k(args):
    from .stat import evaluate_statistical_potential

    L = _load(args.infile)
    if len(L) > 2 ** L.d - 1:
        raise UsageError(f"{len(L)} lines exceed N = 2^d - 1 = {2 ** L.d - 1} for d = {L.d}")
    res = evaluate_statistical_potential(L, _stat_params(L.d, args), args.samples, args.seed)
    _emit([("seed", args.seed), ("d", L.d), ("r", args.r), ("alpha", args.alpha),
           ("samples", args.samples), ("K", res.K), ("stderr", res.stderr_estimate)])


def cmd_kbar(args):
    from .stat import upper_bound_kbar

    params = _stat_params(args.d, args, args.n)
    res = upper_bound_kbar(params)
    _emit([("d", args.d), ("r", args.r), ("alpha", args.alpha), ("N", params.N), ("Kbar", res.K)])


def cmd_mc_max(args):
    from .stat import naive_monte_carlo, upper_bound_kbar

    params = _stat_params(args.d, args)
    mc = _mc_params(args)
    res = naive_monte_carlo(params, mc, args.seed)
    kbar = upper_bound_kbar(params).K
    _emit([("seed", args.seed), ("d", args.d), ("r", args.r), ("alpha", args.alpha),
           ("K", res.K), ("stderr", res.stderr_estimate), ("Kbar", kbar), ("ratio", res.K / kbar)])


def cmd_local(args):
    from .stat import local_search, upper_bound_kbar

    L = _load(args.infile)
    if len(L) != 2 ** L.d - 1:
        raise UsageError(f"local search needs N = 2^d - 1 = {2 ** L.d - 1} lines, file has {len(L)}")
    params = _stat_params(L.d, args)
    res = local_search(L, args.sigma, params, _mc_params(args), args.seed)
    kbar = upper_bound_kbar(params).K
    _emit([("seed", args.seed), ("sigma", args.sigma), ("K", res.K), ("stderr", res.stderr_estimate),
           ("Kbar", kbar), ("ratio", res.K / kbar)])


def cmd_ratios(args):
    from .stat import ratio_report, rows_to_csv, rows_to_svg

    rows = ratio_report(args.d, args.r, args.alpha, _mc_params(args), args.seed, methods=args.methods)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(rows_to_svg(rows))
    log.info("seed %d: %d rows", args.seed, len(rows))


# ------------------------------------------------------------------ parser

def _add_mc_sizes(p):
    p.add_argument("--paper-sizes", action="store_true",
                   help="use the full-size run (I = I3 = 2e7, N1 = 2e5, ...); slow")
    for name in ("I", "N1", "N2", "I1", "I2", "I3"):
        p.add_argument(f"--{name.lower()}", type=int, default=None, metavar=name,
                       help=f"override Monte Carlo size {name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projlines", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="write a canonical configuration of 2^d - 1 lines")
    p.add_argument("--d", type=int, required=True, choices=range(2, 7))
    p.add_argument("--refine", action="store_true", help="polish the seven-decimal d = 5 constants")
    p.add_argument("--out")
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("optimize", help="multistart energy minimization")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="number of lines")
    p.add_argument("--kernel", type=_kernel, default=Kernel.riesz(1.0),
                   help="distance, log, riesz or riesz:<s> (default riesz:1)")
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grad-tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("packing", help="best packing by Riesz-s continuation")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--starts", type=int, default=30)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_packing)

    p = sub.add_parser("energy", help="energies of a line-set file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--kernel", type=_kernel, action="append")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("eval-k", help="Monte Carlo estimate of f_{d,r,alpha} for a line-set file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=2_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_eval_k)

    p = sub.add_parser("kbar", help="union-bound constant Kbar(d, r, alpha)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, default=None, help="number of lines (default 2^d - 1)")
    p.set_defaults(func=cmd_kbar)

    p = sub.add_parser("mc-max", help="naive Monte Carlo maximization of f_{d,r,alpha}")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    _add_mc_sizes(p)
    p.set_defaults(func=cmd_mc_max)

    p = sub.add_parser("local", help="local Monte Carlo search around a line-set file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    _add_mc_sizes(p)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("ratios", help="K / Kbar for methods (i), (ii), (a), (b)")
    p.add_argument("--d", type=_int_list, default=[3, 4, 5, 6])
    p.add_argument("--r", type=_int_list, default=[20, 60])
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--methods", type=lambda s: s.split(","), default=["i", "ii", "a", "b"])
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--svg", help="write a bar chart here")
    _add_mc_sizes(p)
    p.set_defaults(func=cmd_ratios)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (UsageError, LineSetFormatError, ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"projlines {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
