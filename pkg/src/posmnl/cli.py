"""Command line entry point: ``posmnl <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import selftest
from .expedia import ExtractedParams, build_instance, extract_parameters, load_impressions
from .harness import SimConfig, run_replications
from .instances import example_instance, hard_instance, random_instance
from .model import GENERAL, MULTIPLICATIVE, dump_instance, load_instance
from .optimize import dinkelbach_optimize
from .policies import POLICY_IDS


def _optimize(args) -> int:
    inst = load_instance(args.instance)
    res = dinkelbach_optimize(inst.revenues, inst.V, args.epsilon)
    doc = {
        "placement": res.placement.to_one_based(),
        "revenue": res.revenue,
        "iterations": res.iterations,
    }
    print(json.dumps(doc))
    return 0


def _gen_instance(args) -> int:
    if args.example is not None:
        inst = example_instance(args.example)
    elif args.random is not None:
        N, K = args.random
        inst = random_instance(N, K, args.kind, args.seed or 0)
    elif args.hard is not None:
        if args.horizon is None:
            raise ValueError("--hard needs --horizon")
        N, K = args.hard
        inst = hard_instance(N, K, args.horizon, seed=args.seed)
    else:
        if args.N is None or args.K is None:
            raise ValueError("--from-params needs --N and --K")
        params = ExtractedParams.load(args.from_params)
        inst = build_instance(params, args.N, args.K, args.min_v, args.seed or 0)
    if args.out:
        dump_instance(inst, args.out)
    else:
        json.dump(inst.to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


_SIM_FIELDS = ("instance", "policy", "horizon", "reps", "seed", "out", "epsilon", "stride",
               "explore_c", "workers", "same_stream")


def _simulate(args) -> int:
    base = {}
    if args.config:
        base = SimConfig.from_json(args.config).to_dict()
    for name in _SIM_FIELDS:
        value = getattr(args, name)
        if value is not None:
            base[name] = value
    missing = [n for n in ("instance", "policy", "horizon") if n not in base]
    if missing:
        raise ValueError(f"missing simulation settings: {', '.join(missing)}")
    config = SimConfig(**base)
    table = run_replications(config)
    if not config.out:
        sys.stdout.write(table.to_csv())
    return 0


def _extract_params(args) -> int:
    columns = {
        "prop_id": args.col_prop_id,
        "position": args.col_position,
        "click": args.col_click,
        "randomized": args.col_random,
        "price": args.col_price,
    }
    impressions = load_impressions(args.input, columns)
    print(impressions.summary(), file=sys.stderr)
    params = extract_parameters(
        impressions,
        min_position_obs=args.min_position_obs,
        min_item_obs=args.min_item_obs,
        price_quantile=args.price_quantile,
        v_floor=args.v_floor,
        K=args.K,
    )
    params.save(args.out)
    return 0


def _selftest(args) -> int:
    return 0 if selftest.run() else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="posmnl", description="Position-aware MNL bandits.")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("optimize", help="static optimum of an instance file")
    o.add_argument("instance")
    o.add_argument("--epsilon", type=float, default=0.0)
    o.set_defaults(func=_optimize)

    g = sub.add_parser("gen-instance", help="write an instance file")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", type=int, choices=range(1, 7))
    src.add_argument("--random", type=int, nargs=2, metavar=("N", "K"))
    src.add_argument("--hard", type=int, nargs=2, metavar=("N", "K"))
    src.add_argument("--from-params", metavar="PARAMS_JSON")
    g.add_argument("--kind", choices=(MULTIPLICATIVE, GENERAL), default=GENERAL)
    g.add_argument("--horizon", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--min-v", type=float, default=0.1)
    g.add_argument("--out")
    g.set_defaults(func=_gen_instance)

    s = sub.add_parser("simulate", help="run replications and write a regret CSV")
    s.add_argument("--config")
    s.add_argument("--instance", help="ex1..ex6, hard:N:K[:seed] or an instance file")
    s.add_argument("--policy", choices=POLICY_IDS)
    s.add_argument("--horizon", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--stride", type=int)
    s.add_argument("--explore-c", dest="explore_c", type=float)
    s.add_argument("--workers", type=int)
    s.add_argument("--same-stream", dest="same_stream", action="store_const", const=True,
                   help="debug: every replication reuses stream 0")
    s.set_defaults(func=_simulate)

    e = sub.add_parser("extract-params", help="calibrate parameters from a click log")
    e.add_argument("--input", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--min-position-obs", type=int, default=1000)
    e.add_argument("--min-item-obs", type=int, default=1)
    e.add_argument("--price-quantile", type=float, default=0.95)
    e.add_argument("--v-floor", type=float, default=0.01)
    e.add_argument("--K", type=int)
    e.add_argument("--col-prop-id", default="prop_id")
    e.add_argument("--col-position", default="position")
    e.add_argument("--col-click", default="click_bool")
    e.add_argument("--col-random", default="random_bool")
    e.add_argument("--col-price", default="price_usd")
    e.set_defaults(func=_extract_params)

    t = sub.add_parser("selftest", help="oracle-equivalence and invariant checks")
    t.set_defaults(func=_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError) as e:
        print(f"posmnl {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
