"""Command-line interface.

Subcommands::

    phasetype fit DATA.csv (--structure S --dimension P | --init MODEL.json) [--gfun NAME ...] --out MODEL.json
    phasetype eval MODEL.json --fn dens|cdf|quantile|hazard|moment --at X [X ...]
    phasetype sim MODEL.json --n N --seed SEED [--out FILE.csv]
    phasetype discretize --density NAME --params ... --step H [--start A] [--stop B] [--out FILE.csv]

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 invalid model
or unsupported combination, 4 numeric failure.
"""

import argparse
import sys

import numpy as np
from scipy import stats

from .em import EmOptions, fit_iph, fit_ph, tail_index
from .errors import DomainError, NumericError, ParseError, UnsupportedError, ValidationError
from .iph import FAMILIES, InhomPhaseType, Pareto, make_transform
from .io import load_model, read_dataset, save_model, write_dataset
from .ph import STRUCTURES, ph_random
from .sampling import sim_iph, sim_ph

EXIT_PARSE, EXIT_MODEL, EXIT_NUMERIC = 2, 3, 4


def _fmt(v):
    return f"{v:.17g}"


def cmd_fit(args):
    sample = read_dataset(args.data)
    if (args.init is None) == (args.structure is None):
        raise ParseError("give exactly one of --structure/--dimension or --init")
    if args.init is not None:
        model = load_model(args.init)
        if args.gfun is not None:
            base = model.base if isinstance(model, InhomPhaseType) else model
            model = InhomPhaseType(base, make_transform(args.gfun, args.gfun_params))
    else:
        if args.dimension is None:
            raise ParseError("--structure requires --dimension")
        model = ph_random(args.structure, args.dimension, args.seed)
        if args.gfun is not None:
            model = InhomPhaseType(model, make_transform(args.gfun, args.gfun_params))

    opts = EmOptions(
        steps=args.steps,
        rk_step=args.rk_step,
        beta_depth=args.beta_depth,
        print_every=args.print_every,
    )

    def report(it, ll, _model):
        print(f"iter={it} loglik={_fmt(ll)}", flush=True)

    fit = fit_iph if isinstance(model, InhomPhaseType) else fit_ph
    result = fit(model, sample, opts, callback=report)
    fitted = result.model
    meta = {"loglik": result.loglik, "steps": result.iterations_run}
    if args.seed is not None:
        meta["seed"] = args.seed
    if isinstance(fitted, InhomPhaseType) and isinstance(fitted.transform, Pareto):
        meta["tail_index"] = tail_index(fitted)
        print(f"tail_index={_fmt(meta['tail_index'])}")
    if args.out:
        save_model(args.out, fitted, meta)
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    at = np.asarray(args.at, dtype=float)
    if args.fn == "moment":
        values = [model.moment(t) for t in at]
    else:
        method = {"dens": model.dens, "cdf": model.cdf, "quantile": model.quantile, "hazard": model.haz}[args.fn]
        values = np.atleast_1d(method(at))
    for x, v in zip(at, values):
        print(f"{_fmt(x)}\t{_fmt(v)}")
    return 0


def cmd_sim(args):
    model = load_model(args.model)
    if isinstance(model, InhomPhaseType):
        draws = sim_iph(model, args.n, args.seed)
    else:
        draws = sim_ph(model, args.n, args.seed)
    write_dataset(args.out if args.out else sys.stdout, draws)
    return 0


def _density(name, params):
    """Frozen scipy distribution for a density name and positional parameters."""
    params = list(params)
    if name == "truncnorm":
        if not 2 <= len(params) <= 4:
            raise ParseError("truncnorm takes: mu sigma [lower [upper]]")
        mu, sigma = params[:2]
        lower = params[2] if len(params) > 2 else -np.inf
        upper = params[3] if len(params) > 3 else np.inf
        if not sigma > 0 or not lower < upper:
            raise ParseError("truncnorm needs sigma > 0 and lower < upper")
        return stats.truncnorm((lower - mu) / sigma, (upper - mu) / sigma, loc=mu, scale=sigma)
    if name == "uniform":
        if len(params) != 2 or not params[0] < params[1]:
            raise ParseError("uniform takes: lower upper with lower < upper")
        return stats.uniform(loc=params[0], scale=params[1] - params[0])
    dist = getattr(stats, name, None)
    if not isinstance(dist, stats.rv_continuous):
        raise ParseError(f"unknown continuous density {name!r}")
    try:
        return dist(*params)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad parameters for {name}: {exc}") from exc


def discretize(dist, step, start=None, stop=None):
    """Grid ``start, start + step, ...`` up to ``stop`` with weights ``step * density``.

    Without ``start`` the grid holds the midpoints of cells of width ``step``
    beginning at the lower end of the support.
    """
    if not step > 0:
        raise ParseError("step must be positive")
    lo, hi = dist.support()
    if start is None:
        if not np.isfinite(lo):
            raise ParseError("--start is required for densities unbounded below")
        start = lo + step / 2.0
    if stop is None:
        if not np.isfinite(hi):
            raise ParseError("--stop is required for densities unbounded above")
        stop = hi
    if stop < start:
        raise ParseError("stop must not precede start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(count)
    return grid, step * dist.pdf(grid)


def cmd_discretize(args):
    dist = _density(args.density, args.params)
    grid, weights = discretize(dist, args.step, args.start, args.stop)
    write_dataset(args.out if args.out else sys.stdout, grid, weights)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="phasetype", description="Phase-type distribution fitting and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a PH or IPH model by EM")
    p.add_argument("data", help="CSV with columns value[,weight][,censored]")
    p.add_argument("--structure", choices=STRUCTURES)
    p.add_argument("--dimension", type=int)
    p.add_argument("--gfun", choices=sorted(FAMILIES))
    p.add_argument("--gfun-params", type=float, nargs="+")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--rk-step", type=float)
    p.add_argument("--beta-depth", type=int, default=10)
    p.add_argument("--print-every", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", help="model JSON to start from")
    p.add_argument("--out", help="where to write the fitted model JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a functional of a model")
    p.add_argument("model")
    p.add_argument("--fn", required=True, choices=["dens", "cdf", "quantile", "hazard", "moment"])
    p.add_argument("--at", required=True, type=float, nargs="+")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sim", help="simulate variates from a model")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("discretize", help="weighted grid for an analytic density")
    p.add_argument("--density", required=True, help="truncnorm, uniform, or a scipy.stats continuous name")
    p.add_argument("--params", type=float, nargs="*", default=[])
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_discretize)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, UnsupportedError) as exc:
        print(f"error: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except NumericError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
