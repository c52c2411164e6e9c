"""
Command-line front end.

Subcommands: exact, simulate, construct, asymptotic, optimize, sweep and serve.
Results go to CSV (stdout with `--out -`); diagnostics go to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ValidationError, model_validator

from backend.data.figure_grids import FIGURES
from backend.reports import (
    alpha_frame,
    bound_frame,
    expectation_frame,
    simulation_frame,
    sweep_figure,
    write_csv,
)
from engines.asym import objective_for, optimize_alpha, optimize_pP, ratio_bound, tk_bound
from engines.codes import format_matrix, profile_k2, read_matrix
from engines.construct import build_gk, construction_for, verify_recovery_complete
from engines.exact import (
    ExpectationReport,
    alpha_bruteforce,
    closed_form_expectation,
    exact_expectation,
    k2_report,
)
from engines.sim import GraphModelParams, mc_matrix_report, mc_tau_graph, mc_tau_matrix
from utils.errors import ConstructionError, InputError, RandomAccessError
from utils.settings import configure_logging, get_settings

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 10_000


class RunConfig(BaseModel):
    """A parsed job: the command, its single input source, seed and output target."""

    command: str
    matrix: Optional[str] = None
    construction: Optional[Tuple[int, ...]] = None
    graph: Optional[Tuple[float, ...]] = None
    seed: int
    out: str = "-"

    @model_validator(mode="after")
    def _one_source(self):
        sources = [s for s in (self.matrix, self.construction, self.graph) if s is not None]
        if self.command in ("exact", "simulate", "construct") and len(sources) != 1:
            raise ValueError(f"{self.command} needs exactly one of --matrix, --construction, --graph")
        if self.command != "simulate" and self.graph is not None:
            raise ValueError("--graph is only valid for simulate")
        if self.command == "construct" and self.construction is None:
            raise ValueError("construct needs --construction k,x,y[,q]")
        return self


def _int_tuple(text):
    try:
        values = tuple(int(v, 0) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if len(values) not in (3, 4):
        raise argparse.ArgumentTypeError("expected k,x,y or k,x,y,q")
    return values


def _graph_tuple(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected k,p,P")
    try:
        return (int(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed graph parameters {text!r}")


def _k_range(text):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a:b")
    if lo > hi:
        raise argparse.ArgumentTypeError("empty k range")
    return lo, hi


def _matrix_from(config):
    if config.matrix is not None:
        return read_matrix(config.matrix)
    k, x, y, *rest = config.construction
    params = construction_for(k, x, y, rest[0] if rest else None)
    return build_gk(params)


def cmd_exact(args, config):
    if args.alpha:
        G = _matrix_from(config)
        write_csv(alpha_frame(alpha_bruteforce(G, args.strand or 1)), config.out)
        return
    if args.closed_form:
        report = _closed_form_report(config)
    else:
        G = _matrix_from(config)
        report = exact_expectation(G)
    frame = expectation_frame(report)
    if args.strand:
        frame = frame[frame["i"] == args.strand]
    write_csv(frame, config.out)


def _closed_form_report(config):
    if config.construction is not None:
        k, x, y = config.construction[:3]
        if k not in (3, 4):
            raise InputError("closed forms cover G_3(x, y) and G_4(x, y)")
        value = closed_form_expectation(k, x, y)
        return ExpectationReport.build([value] * k, f"closed_form_k{k}")
    G = read_matrix(config.matrix)
    return k2_report(profile_k2(G))


def cmd_simulate(args, config):
    if config.graph is not None:
        k, p, P = config.graph
        try:
            params = GraphModelParams(k=int(k), p=p, P=P)
        except ValidationError as e:
            raise InputError(e.errors()[0]["msg"]) from e
        report = mc_tau_graph(params, args.trials, config.seed)
        strands = [1]
    else:
        G = _matrix_from(config)
        if args.strand:
            report = mc_tau_matrix(G, args.strand, args.trials, config.seed)
            strands = [args.strand]
        else:
            report = mc_matrix_report(G, args.trials, config.seed)
            strands = list(range(1, G.k + 1))
    write_csv(simulation_frame(report, strands, config.seed), config.out)


def cmd_construct(args, config):
    k, x, y, *rest = config.construction
    params = construction_for(k, x, y, rest[0] if rest else None)
    G = build_gk(params)
    certificate = verify_recovery_complete(G)
    if not certificate.complete:
        raise ConstructionError(f"constructed matrix failed verification: {certificate.reason}")
    sidecar = params.sidecar()
    text = format_matrix(G, comment=f"G_{k}({x},{y}) over GF({params.field.q})")
    if config.out == "-":
        sys.stdout.write(text)
        return
    Path(config.out).write_text(text, encoding="utf-8")
    Path(f"{config.out}.json").write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s and its sidecar (n=%d)", config.out, G.n)


def cmd_asymptotic(args, config):
    if args.ubfin:
        if args.k_range is None:
            raise InputError("--ubfin needs --k-range a:b")
        lo, hi = args.k_range
        bounds = []
        for k in range(max(lo, 2), hi + 1):
            p = 2 / (k * k + k)
            bounds.append(tk_bound(k, p, p))
    elif args.k is None:
        raise InputError("asymptotic needs --k with --p/--P or --alpha, or --ubfin")
    elif args.alpha is not None:
        bounds = [ratio_bound(args.k, args.alpha)]
    elif args.p is not None and args.P is not None:
        bounds = [tk_bound(args.k, args.p, args.P)]
    else:
        raise InputError("give --p and --P, or --alpha")
    write_csv(bound_frame(bounds), config.out)


def cmd_optimize(args, config):
    if args.objective == "pP":
        p, P, value = optimize_pP(args.k)
        row = {"k": args.k, "objective": "pP", "alpha": P / p if p else float("inf"), "p": p, "P": P, "value": value}
    else:
        alpha, value = optimize_alpha(args.k, objective_for(args.k, args.objective))
        row = {"k": args.k, "objective": args.objective, "alpha": alpha, "p": None, "P": None, "value": value}
    write_csv(pd.DataFrame([row]), config.out)


def cmd_sweep(args, config):
    write_csv(sweep_figure(args.figure), config.out)


def cmd_serve(args, config):
    import uvicorn

    uvicorn.run("backend.main:app", host=args.host, port=args.port)


COMMANDS = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "construct": cmd_construct,
    "asymptotic": cmd_asymptotic,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="random-access",
        description="Random access expectations of linearly coded DNA storage pools",
    )
    parser.add_argument("--log-level", default=None, help="overrides RA_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_sources(p, graph=False):
        p.add_argument("--matrix", help="matrix file: header `q k n`, then k rows")
        p.add_argument("--construction", type=_int_tuple, metavar="k,x,y[,q]")
        if graph:
            p.add_argument("--graph", type=_graph_tuple, metavar="k,p,P")
        p.add_argument("--strand", type=int, default=None)
        p.add_argument("--out", default="-")

    exact = sub.add_parser("exact", help="exact expectations")
    with_sources(exact)
    exact.add_argument("--alpha", action="store_true", help="emit the subset counts instead")
    exact.add_argument("--closed-form", action="store_true", help="k=2 matrices, or G_3/G_4 constructions")

    simulate = sub.add_parser("simulate", help="Monte Carlo estimates")
    with_sources(simulate, graph=True)
    simulate.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    simulate.add_argument("--seed", type=lambda v: int(v, 0), default=None)

    construct = sub.add_parser("construct", help="build a recovery-complete G_k(x, y)")
    construct.add_argument("--construction", type=_int_tuple, required=True, metavar="k,x,y[,q]")
    construct.add_argument("--out", default="-")

    asymptotic = sub.add_parser("asymptotic", help="graph-model upper bounds")
    asymptotic.add_argument("--k", type=int)
    asymptotic.add_argument("--p", type=float)
    asymptotic.add_argument("--P", type=float)
    asymptotic.add_argument("--alpha", type=float)
    asymptotic.add_argument("--ubfin", action="store_true")
    asymptotic.add_argument("--k-range", type=_k_range)
    asymptotic.add_argument("--out", default="-")

    optimize = sub.add_parser("optimize", help="minimize a bound over the ratio or over (p, P)")
    optimize.add_argument("--k", type=int, required=True)
    optimize.add_argument("--objective", choices=["exact3", "appendix3", "graph", "pP"], default="graph")
    optimize.add_argument("--out", default="-")

    sweep = sub.add_parser("sweep", help="regenerate a figure's data series")
    sweep.add_argument("--figure", choices=FIGURES, required=True)
    sweep.add_argument("--out", default="-")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _config_from(args):
    seed = getattr(args, "seed", None)
    try:
        return RunConfig(
            command=args.command,
            matrix=getattr(args, "matrix", None),
            construction=getattr(args, "construction", None),
            graph=getattr(args, "graph", None),
            seed=get_settings().seed if seed is None else seed,
            out=getattr(args, "out", "-"),
        )
    except ValidationError as e:
        raise InputError(e.errors()[0]["msg"]) from e


def main(argv=None):
    """Parse arguments, run one subcommand and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
        config = _config_from(args)
        COMMANDS[args.command](args, config)
    except RandomAccessError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
