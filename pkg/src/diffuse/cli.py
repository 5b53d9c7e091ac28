"""Command-line entry point: ``diffuse {generate,simulate,explore,analytic,experiment}``.

Exit codes: 0 success, 1 usage error, 2 runtime or domain error, 3 acceptance
failure.  Runs need a seed, from ``--seed`` or (outside ``--check`` mode) the
``DIFFUSE_SEED`` environment variable.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import acceptance
from . import analytic as an
from .errors import DiffuseError
from .experiments import EnsembleConfig, run_ensemble
from .exploration import coupled_run
from .graphs import (
    DegreeSpec,
    complete_graph,
    cycle_graph,
    pair_configuration,
    read_edgelist,
    sample_simple_connected,
    write_edgelist,
)
from .model import Clock, ModelParams, Variant
from .simulate import simulate

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {value}")
        return value
    return parse


def _float(name, low=None, high=None, strict_low=False):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"{name} must be finite, got {text!r}")
        if low is not None and (value <= low if strict_low else value < low):
            raise argparse.ArgumentTypeError(
                f"{name} must be {'>' if strict_low else '>='} {low}, got {value}")
        if high is not None and value > high:
            raise argparse.ArgumentTypeError(f"{name} must be <= {high}, got {value}")
        return value
    return parse


def _grid(text):
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid must be start:stop:step, got {text!r}")
    if not step > 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"--grid needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _add_seed(p):
    p.add_argument("--seed", type=int, help="base seed (integer); falls back to $DIFFUSE_SEED")


def _add_params(p, *, variants=True):
    p.add_argument("--beta", type=_float("--beta", 0, strict_low=True), default=1.0,
                   help="contact rate per node (contacts per unit time, > 0; default 1)")
    p.add_argument("--p", type=_float("--p", 0, 1), default=1.0,
                   help="adoption probability per contact (dimensionless, [0, 1]; default 1)")
    p.add_argument("--beta-prime", type=_float("--beta-prime", 0), default=0.0,
                   help="innovator rate per non-adopter or removal rate per adopter "
                        "(events per unit time, >= 0; default 0)")
    if variants:
        p.add_argument("--variant", choices=[v.value for v in Variant], default="si",
                       help="process variant (default si)")
    p.add_argument("--clock", choices=[c.value for c in Clock], default="node",
                   help="contact convention: node = each node rings at beta; edge = each "
                        "clone rings at --edge-rate (default node)")
    p.add_argument("--edge-rate", type=_float("--edge-rate", 0, strict_low=True),
                   help="per-clone contact rate for --clock edge (contacts per unit time; "
                        "default beta / mean degree)")


def _add_degrees(p):
    p.add_argument("--k", type=_positive_int("--k"), help="regular degree (integer >= 1)")
    p.add_argument("--degrees",
                   help="degree law, e.g. '5' or '4:0.5,6:0.5' (degree:probability pairs)")


def build_parser():
    parser = _Parser(prog="diffuse", description="Adoption dynamics on random graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a graph and write it as an edge list")
    g.add_argument("--family", choices=["random", "configuration", "complete", "cycle"],
                   default="random", help="random = simple connected sample; configuration "
                   "= raw multigraph pairing (default random)")
    g.add_argument("--n", type=_positive_int("--n"), required=True, help="node count")
    _add_degrees(g)
    g.add_argument("--max-tries", type=_positive_int("--max-tries"), default=10_000,
                   help="rejection sampling budget (pairings; default 10000)")
    _add_seed(g)
    g.add_argument("--out", required=True, help="edge-list output path")

    s = sub.add_parser("simulate", help="run the adoption process once on a graph")
    s.add_argument("--graph", choices=["random", "complete", "cycle", "file"], required=True,
                   help="graph family; 'file' reads --graph-file")
    s.add_argument("--graph-file", help="edge list written by 'generate'")
    s.add_argument("--n", type=_positive_int("--n"), help="node count")
    _add_degrees(s)
    _add_params(s)
    s.add_argument("--count", type=_positive_int("--count"),
                   help="stop at this many adoptions (default: run to the end)")
    s.add_argument("--t-max", type=_float("--t-max", 0), help="stop time (time units)")
    s.add_argument("--initial", type=int,
                   help="first adopter node id (default uniform; e.g. 0 for debugging)")
    s.add_argument("--engine", choices=["auto", "boundary", "contact"], default="auto",
                   help="event engine (default auto)")
    s.add_argument("--alpha", type=_float("--alpha", 0, 1, strict_low=True), default=0.25,
                   help="lower adoption fraction for the reported delta (default 0.25)")
    s.add_argument("--gamma", type=_float("--gamma", 0, 1, strict_low=True), default=0.75,
                   help="upper adoption fraction for the reported delta (default 0.75)")
    _add_seed(s)
    s.add_argument("--out", help="trace CSV path (time,node,kind)")
    s.add_argument("--curve-out", help="adoption curve CSV path (t,s)")
    s.add_argument("--curve-step", type=_float("--curve-step", 0, strict_low=True),
                   default=0.05, help="time step of --curve-out (time units; default 0.05)")

    e = sub.add_parser("explore", help="graph-free coupled exploration run")
    e.add_argument("--n", type=_positive_int("--n"), required=True, help="node count")
    _add_degrees(e)
    _add_params(e, variants=False)
    e.add_argument("--count", type=_positive_int("--count"), help="stop after this many adoptions")
    e.add_argument("--t-max", type=_float("--t-max", 0), help="stop time (time units)")
    e.add_argument("--allow-low-degree", action="store_true",
                   help="permit degrees 1 and 2 (raw exploration only)")
    e.add_argument("--alpha", type=_float("--alpha", 0, 1, strict_low=True), default=0.25,
                   help="lower adoption fraction for the reported delta (default 0.25)")
    e.add_argument("--gamma", type=_float("--gamma", 0, 1, strict_low=True), default=0.75,
                   help="upper adoption fraction for the reported delta (default 0.75)")
    _add_seed(e)
    e.add_argument("--out", help="trace CSV path (time,node,kind)")
    e.add_argument("--dump", help="per-event CSV path (j,N,A,t)")

    a = sub.add_parser("analytic", help="evaluate a limit curve on a grid")
    a.add_argument("--model", choices=["bass", "genbass", "meanfield", "ode"], required=True,
                   help="bass = complete graph, genbass = random k-regular, meanfield = "
                        "mean-field rate, ode = general degree law")
    a.add_argument("--k", type=_positive_int("--k"), help="degree (integer >= 3)")
    a.add_argument("--degrees", help="degree law for --model ode, e.g. '3:0.5,7:0.5'")
    a.add_argument("--beta", type=_float("--beta", 0, strict_low=True), default=1.0,
                   help="contact rate per node (contacts per unit time; default 1)")
    a.add_argument("--clock", choices=[c.value for c in Clock], default="node",
                   help="contact convention for --model ode (default node)")
    a.add_argument("--axis", choices=["s", "t"], default="s",
                   help="s: grid of adoption fractions, output s,t; t: grid of times, "
                        "output t,s (default s)")
    a.add_argument("--grid", type=_grid, required=True,
                   help="start:stop:step (fractions for --axis s, time units for --axis t)")
    a.add_argument("--anchor", type=_float("--anchor", 0, 1, strict_low=True),
                   help="normalization: t(anchor) = 0 (default 0.5 for --axis s, "
                        "0.01 for --axis t)")
    a.add_argument("--out", required=True, help="curve CSV path")

    x = sub.add_parser("experiment", help="run an ensemble or an acceptance check")
    x.add_argument("--config", help="ensemble JSON config (see README)")
    x.add_argument("--check", metavar="NAME",
                   help="run an acceptance check: " + ", ".join(acceptance.CHECKS) + " or all")
    x.add_argument("--replicas", type=_positive_int("--replicas"),
                   help="override the config replica count")
    x.add_argument("--threads", type=_positive_int("--threads"),
                   help="replica parallelism (default: available cores)")
    _add_seed(x)
    x.add_argument("--out", help="summary JSON path")
    x.add_argument("--curve-out", help="mean curve CSV path (t,s_mean,s_lo,s_hi)")
    return parser


def _seed(args, *, check=False):
    if args.seed is not None:
        return args.seed
    if not check:
        env = os.environ.get("DIFFUSE_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise UsageError(f"DIFFUSE_SEED must be an integer, got {env!r}")
    raise UsageError("a seed is required: pass --seed"
                     + ("" if check else " or set DIFFUSE_SEED"))


def _spec(args, *, required=True):
    if args.k is not None and args.degrees is not None:
        raise UsageError("give either --k or --degrees, not both")
    if args.k is not None:
        return DegreeSpec.regular(args.k)
    if args.degrees is not None:
        return DegreeSpec.parse(args.degrees)
    if required:
        raise UsageError("--k or --degrees is required")
    return None


def _params(args):
    variant = getattr(args, "variant", None)
    if variant is None:
        variant = "si-innovators" if args.beta_prime > 0 else "si"
    return ModelParams(beta=args.beta, p=args.p, beta_prime=args.beta_prime,
                       variant=Variant(variant), clock=Clock(args.clock),
                       edge_rate=args.edge_rate)


def _header(args):
    skip = {"out", "curve_out", "dump", "func", "graph_file"}
    return " ".join(f"{k}={v}" for k, v in sorted(vars(args).items())
                    if k not in skip and v is not None)


def _report_delta(trace, args):
    if not args.alpha <= args.gamma or args.gamma >= 1:
        raise UsageError("need --alpha <= --gamma < 1")
    try:
        d = trace.delta(args.alpha, args.gamma)
    except DiffuseError:
        return
    print(f"delta({args.alpha:g}n, {args.gamma:g}n) = {d:.17g}")
    print(f"delta / n = {d / trace.n:.17g}")


def cmd_generate(args):
    seed = _seed(args)
    if args.family == "complete":
        graph = complete_graph(args.n)
    elif args.family == "cycle":
        graph = cycle_graph(args.n)
    elif args.family == "configuration":
        graph = pair_configuration(_spec(args), args.n, seed)
    else:
        graph = sample_simple_connected(_spec(args), args.n, seed, args.max_tries)
    write_edgelist(graph, args.out)
    print(f"wrote {graph.n_edges} edges on {graph.n} nodes to {args.out}")
    for key, value in graph.info.items():
        print(f"{key} = {value}")
    return EXIT_OK


def _graph_for(args, rng):
    if args.graph == "file":
        if not args.graph_file:
            raise UsageError("--graph file needs --graph-file")
        return read_edgelist(args.graph_file)
    if args.n is None:
        raise UsageError("--n is required")
    if args.graph == "complete":
        return complete_graph(args.n)
    if args.graph == "cycle":
        return cycle_graph(args.n)
    return sample_simple_connected(_spec(args), args.n, rng)


def cmd_simulate(args):
    rng = np.random.default_rng(_seed(args))
    params = _params(args)
    graph = _graph_for(args, rng)
    trace = simulate(graph, params, rng, count=args.count, t_max=args.t_max,
                     initial=args.initial, method=args.engine)
    print(f"adoptions = {trace.n_adopted} of {trace.n}")
    _report_delta(trace, args)
    if args.out:
        trace.to_csv(args.out, [_header(args)])
    if args.curve_out:
        from .trace import adoption_curve
        end = float(trace.times[-1]) if len(trace.times) else 0.0
        grid = args.curve_step * np.arange(int(end / args.curve_step) + 2)
        curve = adoption_curve(trace, grid)
        curve.meta = {"n": trace.n, **trace.meta}
        curve.to_csv(args.curve_out)
    return EXIT_OK


def cmd_explore(args):
    seed = _seed(args)
    trace = coupled_run(args.n, _spec(args), _params(args), seed, count=args.count,
                        t_max=args.t_max, record=bool(args.dump),
                        allow_low_degree=args.allow_low_degree)
    print(f"adoptions = {trace.n_adopted} of {trace.n} after {trace.iterations} pairings")
    _report_delta(trace, args)
    if args.out:
        trace.to_csv(args.out, [_header(args)])
    if args.dump:
        trace.history.to_csv(args.dump)
    return EXIT_OK


def cmd_analytic(args):
    if args.model in ("genbass", "meanfield") and args.k is None:
        raise UsageError(f"--model {args.model} needs --k")
    if args.model == "ode" and args.degrees is None and args.k is None:
        raise UsageError("--model ode needs --degrees or --k")
    if args.k is not None and args.model != "bass" and args.k < 3:
        raise ValueError(f"--k must be >= 3 for --model {args.model}, got {args.k}")
    if args.axis == "s":
        if args.model == "ode":
            raise UsageError("--model ode is tabulated on a time grid: use --axis t")
        anchor = 0.5 if args.anchor is None else args.anchor
        curve = an.timing_curve(args.model, args.grid, args.k, args.beta, anchor)
    else:
        anchor = 0.01 if args.anchor is None else args.anchor
        spec = None
        if args.model == "ode":
            spec = DegreeSpec.parse(args.degrees) if args.degrees else DegreeSpec.regular(args.k)
        curve = an.limit_curve(args.model, args.grid, args.k, args.beta, anchor, spec,
                               Clock(args.clock))
    meta = {"model": args.model, "k": args.k, "beta": args.beta, "anchor": anchor}
    if args.model == "ode":
        meta.update(degrees=curve.meta.get("spec", args.degrees), clock=args.clock)
    curve.meta = {k: v for k, v in meta.items() if v is not None}
    curve.to_csv(args.out)
    print(f"wrote {len(curve)} rows to {args.out}")
    return EXIT_OK


def cmd_experiment(args):
    if bool(args.config) == bool(args.check):
        raise UsageError("give exactly one of --config or --check")
    if args.check:
        seed = _seed(args, check=True)
        names = list(acceptance.CHECKS) if args.check == "all" else [args.check]
        unknown = [n for n in names if n not in acceptance.CHECKS]
        if unknown:
            raise UsageError(f"unknown check {unknown[0]!r}; choose from "
                             + ", ".join(acceptance.CHECKS) + " or all")
        failed = 0
        for name in names:
            result = acceptance.run_check(name, args.threads, seed)
            print(result.line(), flush=True)
            failed += not result.passed
        return EXIT_CHECK if failed else EXIT_OK
    config = EnsembleConfig.from_json(args.config)
    if args.seed is not None or "seed" not in _raw_keys(args.config):
        config.seed = _seed(args)
    if args.replicas is not None:
        config.replicas = args.replicas
    summary = run_ensemble(config, args.threads)
    for name in summary.scalars:
        st = summary.stat(name)
        print(f"{name}: mean={st['mean']:.6g} std={st['std']:.6g} ci95={st['ci']:.6g} "
              f"replicas={st['replicas']}")
    if summary.failures:
        print(f"failed replicas: {len(summary.failures)}")
    if args.out:
        summary.to_json(args.out)
    if args.curve_out:
        if summary.curve_t is None:
            raise UsageError("--curve-out needs \"curve\": true in the config")
        summary.curve_to_csv(args.curve_out)
    return EXIT_OK


def _raw_keys(path):
    import json
    with open(path) as fh:
        return set(json.load(fh))


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "explore": cmd_explore,
    "analytic": cmd_analytic,
    "experiment": cmd_experiment,
}


def run(argv=None):
    """Parse ``argv`` and run the subcommand; return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"diffuse {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DiffuseError, ValueError, OSError) as exc:
        print(f"diffuse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
