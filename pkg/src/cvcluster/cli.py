"""Command line entry point (``cvcluster``).

Exit codes: 0 success, 1 a verification failed, 2 bad configuration or
I/O, 3 ``route`` finished with ``NOT_FOUND_WITHIN_BUDGET``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments as ex
from ._backend import BACKEND
from .errors import CVClusterError
from .routing import NOT_FOUND, RoutingConfig, load_routing_config, save_solution, solve_routing, verify_appendix

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NOT_FOUND = 3

DEFAULT_GRIDS = {
    "BA": "1,5,10,20,47",
    "ER": "0.2,0.4,0.6,0.8,1.0",
    "WS": "0,0.1,0.4,0.7,1.0",
}


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _param_grid(model, text):
    text = text or DEFAULT_GRIDS.get(model)
    if text is None:
        raise argparse.ArgumentTypeError("--param is required for this model")
    if model == "catalog":
        return tuple(x.strip() for x in text.split(";") if x.strip())
    if model == "BA":
        return _ints(text)
    return _floats(text)


def _write(text, out):
    if out is None:
        sys.stdout.write(text)


def _sweep_spec(args, objective):
    if args.config:
        spec = ex.load_sweep_spec(args.config)
        if objective != "uniform" and spec.objective == "uniform":
            spec = ex.SweepSpec.from_dict({**spec.to_dict(), "objective": objective})
        return spec
    return ex.SweepSpec(
        model=args.model,
        param_grid=_param_grid(args.model, args.param),
        nodes=args.nodes,
        trials=args.trials,
        spectrum=args.spectrum,
        objective=objective,
        seed=args.seed,
        ws_k=args.ws_k,
    )


def cmd_sweep(args):
    spec = _sweep_spec(args, "uniform")
    rows = ex.run_quality_sweep(spec, workers=args.workers)
    _write(ex.emit(rows, args.out, args.format, spec=spec, columns=ex.SUMMARY_COLUMNS), args.out)
    return EXIT_OK


def cmd_concentrate(args):
    spec = _sweep_spec(args, "concentrate:{},{}".format(*_ints(args.pair)))
    rows = ex.run_concentration(spec, workers=args.workers)
    _write(ex.emit(rows, args.out, args.format, spec=spec, columns=ex.CONCENTRATION_COLUMNS), args.out)
    return EXIT_OK


def cmd_degree_curve(args):
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    rows = ex.run_degree_sweep(
        n=args.nodes,
        models=models,
        k_grid=_floats(args.k),
        trials=args.trials,
        spectrum=args.spectrum,
        seed=args.seed,
        workers=args.workers,
    )
    meta = {"nodes": args.nodes, "spectrum": args.spectrum, "seed": args.seed}
    _write(ex.emit(rows, args.out, args.format, columns=ex.CURVE_COLUMNS, extra=meta), args.out)
    return EXIT_OK


def _route_config(args):
    if args.config:
        cfg = load_routing_config(args.config)
    else:
        if not args.graph:
            raise argparse.ArgumentTypeError("route needs --graph or --config")
        cfg = RoutingConfig(graph=args.graph, pair_type=args.pair_type)
        if args.pair:
            cfg.pair = _ints(args.pair)
        if args.alice or args.bob:
            cfg.alice, cfg.bob = _ints(args.alice or ""), _ints(args.bob or "")
    # explicit flags override the file
    if args.squeezing_db is not None:
        cfg.squeezing_db = args.squeezing_db
    if args.restarts is not None:
        cfg.restarts = args.restarts
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_route(args):
    cfg = _route_config(args)
    problem, es_cfg = cfg.build()
    sol = solve_routing(problem, restarts=cfg.restarts, cfg=es_cfg, seed=cfg.seed)
    if args.out:
        save_solution(sol, args.out, problem)
    print(
        json.dumps(
            {
                "graph": problem.label,
                "verdict": sol.verdict,
                "f_opt": float(format(sol.f_opt, ".6g")),
                "residual_max": float(format(sol.residual_max, ".6g")),
                "evaluations": sol.evaluations,
                "restarts_used": sol.restarts_used,
                "backend": BACKEND,
            }
        )
    )
    return EXIT_NOT_FOUND if sol.verdict == NOT_FOUND else EXIT_OK


def cmd_route_suite(args):
    configs = ex.default_routing_suite(args.squeezing_db, args.restarts, args.seed)
    rows = ex.run_routing_suite(configs)
    meta = {"squeezing_db": args.squeezing_db, "restarts": args.restarts, "seed": args.seed}
    _write(ex.emit(rows, args.out, args.format, columns=ex.ROUTING_COLUMNS, extra=meta), args.out)
    return EXIT_OK


def cmd_verify_appendix(args):
    ok = True
    for name, db, check in verify_appendix(_floats(args.squeezing_db), tol=args.tol):
        ok &= check.ok
        status = "PASS" if check.ok else "FAIL"
        print(
            f"{status} {name} {db:g} dB: residual_max={check.residual_max:.3e} "
            f"block_error={check.block_error:.3e} unitarity_error={check.unitarity_error:.3e}"
        )
    return EXIT_OK if ok else EXIT_FAILED


def _add_ensemble_flags(p, default_trials=100):
    p.add_argument("--config", help="JSON or YAML sweep spec; replaces the flags below")
    p.add_argument("--model", choices=ex.MODELS, default="BA")
    p.add_argument("--nodes", type=int, default=48)
    p.add_argument(
        "--param",
        help="comma separated grid (m for BA, p for ER, rewiring p for WS); "
        "semicolon separated graph specs for catalog",
    )
    p.add_argument("--ws-k", type=int, default=4, help="ring degree for WS")
    p.add_argument("--trials", type=int, default=default_trials)


def _add_common(p, spectrum=True):
    if spectrum:
        p.add_argument("--spectrum", default="uniform:-14,-3", help="FILE, uniform:LO,HI or standin")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1, help="threads per grid point")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvcluster", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="optimised ensemble quality over a parameter grid")
    _add_ensemble_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("concentrate", help="concentrate squeezing on two nodes")
    _add_ensemble_flags(p)
    p.add_argument("--pair", default="11,12", help="the two targeted nodes, 0-based")
    _add_common(p)
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("degree-curve", help="quality against average degree")
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--models", default="BA,ER,WS:0,WS:0.25,WS:0.5")
    p.add_argument("--k", default="4,8,16,32,64", help="average degree grid")
    p.add_argument("--trials", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_degree_curve)

    p = sub.add_parser("route", help="search local unitaries for an EPR channel")
    p.add_argument("--config", help="JSON or YAML routing config")
    p.add_argument("--graph", help="grid:RxC, complete:N, dual_rail:N or custom:PATH")
    p.add_argument("--pair", help="channel nodes N1,N2 (0-based)")
    p.add_argument("--pair-type", choices=("cross", "same"), default="cross")
    p.add_argument("--alice", help="Alice's nodes; default first half")
    p.add_argument("--bob", help="Bob's nodes; default second half")
    p.add_argument("--squeezing-db", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for the unitaries and summary.json")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("route-suite", help="feasibility table over the catalog graphs")
    p.add_argument("--squeezing-db", type=float, default=5.0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, spectrum=False)
    p.set_defaults(func=cmd_route_suite)

    p = sub.add_parser("verify-appendix", help="check the published local unitaries")
    p.add_argument("--squeezing-db", default="3,5,7")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_verify_appendix)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (CVClusterError, argparse.ArgumentTypeError, OSError, ValueError) as exc:
        print(f"cvcluster: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
