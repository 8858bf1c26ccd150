"""``coremarket`` command line.

Exit codes are uniform: 0 for success or a positive verdict, 1 for a
negative verdict (blocked, no stable matching, arc not in any core
allocation, ...), 2 for bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import bench, counterexamples, oracle, reductions
from .errors import CoreMarketError
from .fileio import (parse_allocation, parse_market, parse_matching, serialize_allocation,
                     serialize_market, serialize_matching)
from .generate import MODELS, RandomModel, gen_random
from .improve import hm_improve
from .market import HousingMarket, check_core, check_strict_core
from .roommates import (RoommatesInstance, check_stable, check_strongly_stable, find_stable,
                        sr_improve, validate_matching)
from .ttc import ttc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _market(path: str) -> HousingMarket:
    return parse_market(_read(path))


def _instance(path: str) -> RoommatesInstance:
    return RoommatesInstance(parse_market(_read(path)))


def _digraph(path: str) -> reductions.SimpleDigraph:
    return reductions.SimpleDigraph.parse(_read(path))


def _alloc_obj(H: HousingMarket, X: Sequence[int]) -> dict[str, str]:
    return {H.names[a]: H.names[b] for a, b in enumerate(X)}


def _emit_allocation(args, H: HousingMarket, X: Sequence[int]) -> None:
    if args.json:
        print(json.dumps(_alloc_obj(H, X)))
    else:
        sys.stdout.write(serialize_allocation(H, X))


def _emit_matching(args, names: Sequence[str], mate) -> None:
    if args.json:
        print(json.dumps({names[a]: None if b is None else names[b] for a, b in enumerate(mate)}))
    else:
        sys.stdout.write(serialize_matching(names, mate))


def _verdict(args, ok: bool, label_ok: str, label_bad: str, witness=None, names=()) -> int:
    wit = None if witness is None else [names[a] for a in witness]
    if args.json:
        print(json.dumps({"ok": ok, "verdict": label_ok if ok else label_bad, "witness": wit}))
    elif ok:
        print(label_ok)
    else:
        print(f"{label_bad}: {' '.join(wit)}" if wit else label_bad)
    return 0 if ok else 1


def _answer(args, value: bool, **extra) -> int:
    if args.json:
        print(json.dumps({"answer": value, **extra}))
    else:
        print("yes" if value else "no")
    return 0 if value else 1


# --- market commands -------------------------------------------------------------

def cmd_validate(args) -> int:
    H = _market(args.market)
    if args.json:
        print(json.dumps({"agents": H.n, "size": H.size, "strict": H.is_strict(), "weak": H.is_weak()}))
    else:
        kind = "strict" if H.is_strict() else "weak" if H.is_weak() else "partial order"
        print(f"ok: {H.n} agents, |H| = {H.size}, {kind} preferences")
    return 0


def cmd_check_core(args) -> int:
    H = _market(args.market)
    X = parse_allocation(_read(args.allocation), H)
    v = check_strict_core(H, X) if args.strict else check_core(H, X)
    if args.strict:
        return _verdict(args, v.ok, "InStrictCore", "WeaklyBlocked", v.witness, H.names)
    return _verdict(args, v.ok, "InCore", "Blocked", v.witness, H.names)


def cmd_ttc(args) -> int:
    H = _market(args.market)
    X = ttc(H)
    if args.certify and not check_core(H, X):
        print("certification failed: ttc output is blocked", file=sys.stderr)
        return 1
    _emit_allocation(args, H, X)
    return 0


def cmd_hm_improve(args) -> int:
    H, H2 = _market(args.market), _market(args.improved)
    X = parse_allocation(_read(args.allocation), H)
    _emit_allocation(args, H2, hm_improve(H, H2, H.agent(args.p), X))
    return 0


# --- roommates -------------------------------------------------------------------

def cmd_sr_solve(args) -> int:
    I = _instance(args.instance)
    M = find_stable(I)
    if M is None:
        return _verdict(args, False, "", "NoStableMatching")
    _emit_matching(args, I.names, M)
    return 0


def cmd_sr_check(args) -> int:
    I = _instance(args.instance)
    M = validate_matching(I, parse_matching(_read(args.matching), I.names))
    if args.strong:
        v = check_strongly_stable(I, M)
        return _verdict(args, v.ok, "StronglyStable", "WeaklyBlocked", v.witness, I.names)
    v = check_stable(I, M)
    return _verdict(args, v.ok, "Stable", "Blocked", v.witness, I.names)


def cmd_sr_improve(args) -> int:
    I, I2 = _instance(args.instance), _instance(args.improved)
    M = validate_matching(I, parse_matching(_read(args.matching), I.names))
    p, q = I.market.agent(args.p), I.market.agent(args.q)
    out = sr_improve(I, I2, p, q, M)
    if out is None:
        return _verdict(args, False, "", "NoStableMatching")
    _emit_matching(args, I.names, out)
    return 0


# --- oracle ----------------------------------------------------------------------

def cmd_oracle_enumerate(args) -> int:
    H = _market(args.market)
    summary = oracle.enumerate_core(H, args.cap, strict=args.strict, workers=args.threads)
    for X in summary.allocations:
        if args.json:
            print(json.dumps(_alloc_obj(H, X)))
        else:
            print(" ".join(f"{H.names[a]}->{H.names[b]}" for a, b in enumerate(X)))
    if not args.json:
        print(f"# {len(summary.allocations)} allocations", file=sys.stderr)
    return 0


def cmd_oracle_arc(args) -> int:
    H = _market(args.market)
    a, b = H.agent(args.arc[0]), H.agent(args.arc[1])
    f = oracle.arc_in_core if args.cmd == "arc-in-core" else oracle.forbidden_arc_in_core
    return _answer(args, f(H, a, b, args.cap))


def cmd_oracle_agent(args) -> int:
    H = _market(args.market)
    return _answer(args, oracle.agent_trading(H, H.agent(args.agent), args.cap))


def cmd_oracle_max_core(args) -> int:
    H = _market(args.market)
    opt, X = oracle.max_core(H, args.cap)
    if args.json:
        print(json.dumps({"opt": opt, "witness": _alloc_obj(H, X)}))
    else:
        print(f"OPT = {opt}")
        sys.stdout.write(serialize_allocation(H, X))
    return 0


def cmd_oracle_decide(args) -> int:
    H, H2 = _market(args.market), _market(args.improved)
    return _answer(args, oracle.strict_improvement_decide(args.kind, H, H2, H.agent(args.p), args.cap),
                   kind=args.kind.upper())


# --- generators ------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.cmd == "random":
        H = gen_random(RandomModel(args.n, args.seed, args.model, args.density))
        sys.stdout.write(serialize_market(H))
        return 0
    D = _digraph(args.digraph)
    if args.cmd == "arc-in-core":
        H, _ = reductions.gadget_arc_in_core(D)
    elif args.cmd == "forbidden-arc":
        H, _ = reductions.gadget_forbidden_arc(D)
    elif args.cmd == "maxcore":
        H = reductions.gadget_maxcore(D, Fraction(args.epsilon), force_k=args.force_k, k_cap=args.k_cap)
    else:
        before, after, p = reductions.gadget_strict_improvement(args.cmd, D)
        if args.improved:
            sys.stdout.write(serialize_market(after))
        else:
            sys.stdout.write(serialize_market(before))
        print(f"# p = {after.names[p]}", file=sys.stderr)
        return 0
    sys.stdout.write(serialize_market(H))
    return 0


# --- experiments -----------------------------------------------------------------

def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(tuple(args.sizes), args.degree, args.tie, args.seed, args.repeat, args.instances)
    rows = bench.run(cfg)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    return 0


def cmd_search(args) -> int:
    found = counterexamples.SEARCHES[args.kind](args.seed, args.max_tries)
    if found is None:
        print("not found", file=sys.stderr)
        return 1
    names = found.before.names
    def show(v):
        if isinstance(v, tuple):
            return [None if x is None else names[x] for x in v]
        return None if v is None else names[v]

    detail = {k: show(v) for k, v in found.detail.items()}
    if args.json:
        print(json.dumps({"tries": found.tries, "p": names[found.p], "q": names[found.q],
                          "before": serialize_market(found.before),
                          "after": serialize_market(found.after), "detail": detail}))
    else:
        print(f"# found after {found.tries} tries; p = {names[found.p]}, q = {names[found.q]}")
        print(f"# {detail}")
        print("# before")
        sys.stdout.write(serialize_market(found.before))
        print("# after")
        sys.stdout.write(serialize_market(found.after))
    return 0


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")

    ap = argparse.ArgumentParser(prog="coremarket", description="Housing-market cores, TTC and roommates tools.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, func, help: str, parents=(common,)) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help, parents=list(parents))
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "parse and validate a market file")
    p.add_argument("market")

    for name, strict in (("check-core", False), ("check-strict-core", True)):
        p = add(name, cmd_check_core, f"check that an allocation is in the {'strict ' if strict else ''}core")
        p.add_argument("market")
        p.add_argument("allocation")
        p.set_defaults(strict=strict)

    p = add("ttc", cmd_ttc, "compute a core allocation with Top Trading Cycles")
    p.add_argument("market")
    p.add_argument("--certify", action="store_true", help="re-check the output with check-core")

    p = add("hm-improve", cmd_hm_improve, "repair a core allocation after an improvement for p")
    p.add_argument("market")
    p.add_argument("improved")
    p.add_argument("--p", required=True, help="the agent whose house was improved")
    p.add_argument("--allocation", required=True, help="core allocation of the first market")

    p = add("sr-solve", cmd_sr_solve, "find a stable roommates matching (Irving)")
    p.add_argument("instance")

    p = add("sr-check", cmd_sr_check, "check a roommates matching for stability")
    p.add_argument("instance")
    p.add_argument("matching")
    p.add_argument("--strong", action="store_true", help="check strong stability (ties allowed)")

    p = add("sr-improve", cmd_sr_improve, "repair a stable matching after a (p,q)-improvement")
    p.add_argument("instance")
    p.add_argument("improved")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--matching", required=True, help="stable matching of the first instance")

    po = sub.add_parser("oracle", help="brute-force deciders for small markets",
                        description="Brute-force deciders for small markets.")
    osub = po.add_subparsers(dest="cmd", required=True, metavar="SUBCOMMAND")
    ocommon = argparse.ArgumentParser(add_help=False, parents=[common])
    ocommon.add_argument("--cap", type=int, help="agent cap (overrides the default size rule)")

    def oadd(name: str, func, help: str) -> argparse.ArgumentParser:
        p = osub.add_parser(name, help=help, description=help, parents=[ocommon])
        p.set_defaults(func=func)
        return p

    p = oadd("enumerate", cmd_oracle_enumerate, "list every core allocation in lexicographic order")
    p.add_argument("market")
    p.add_argument("--strict", action="store_true", help="strict core only")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    for name, help in (("arc-in-core", "is the arc used by some core allocation?"),
                       ("forbidden-arc", "does some core allocation avoid the arc?")):
        p = oadd(name, cmd_oracle_arc, help)
        p.add_argument("market")
        p.add_argument("--arc", nargs=2, required=True, metavar=("A", "B"))
    p = oadd("agent-trading", cmd_oracle_agent, "is the agent trading in some core allocation?")
    p.add_argument("market")
    p.add_argument("--agent", required=True)
    p = oadd("max-core", cmd_oracle_max_core, "maximum number of trading agents over the core")
    p.add_argument("market")
    p = oadd("decide", cmd_oracle_decide, "decide PSIB, NSIB, PSIW or NSIW for an improvement")
    p.add_argument("kind", choices=[k.lower() for k in oracle.KINDS] + list(oracle.KINDS))
    p.add_argument("market")
    p.add_argument("improved")
    p.add_argument("--p", required=True)

    pg = sub.add_parser("gen", help="generate gadgets and random markets",
                        description="Generate gadgets and random markets.")
    gsub = pg.add_subparsers(dest="cmd", required=True, metavar="SUBCOMMAND")

    def gadd(name: str, help: str) -> argparse.ArgumentParser:
        p = gsub.add_parser(name, help=help, description=help)
        p.set_defaults(func=cmd_gen)
        return p

    gadd("arc-in-core", "arc-in-core gadget for a digraph").add_argument("digraph")
    gadd("forbidden-arc", "forbidden-arc gadget for a digraph").add_argument("digraph")
    p = gadd("maxcore", "max-core gadget with the (a*, b*) arc subdivided K times")
    p.add_argument("digraph")
    p.add_argument("--epsilon", default="1", help="rational in (0, 1], e.g. 1/2")
    p.add_argument("--force-k", type=int, help="use this K instead of the formula")
    p.add_argument("--k-cap", type=int, default=reductions.DEFAULT_K_CAP, help="largest K built without --force-k")
    for name in ("psib", "psiw"):
        p = gadd(name, f"{name.upper()} gadget pair; prints the market before the improvement")
        p.add_argument("digraph")
        p.add_argument("--improved", action="store_true", help="print the improved market instead")
    p = gadd("random", "seeded random market")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=MODELS, default="strict")
    p.add_argument("--density", type=float, default=0.5)

    p = add("bench", cmd_bench, "time ttc and hm-improve on growing weak-order markets (CSV)", parents=())
    p.add_argument("--sizes", type=int, nargs="+", default=list(bench.BenchConfig.sizes))
    p.add_argument("--degree", type=int, default=bench.BenchConfig.degree)
    p.add_argument("--tie", type=float, default=bench.BenchConfig.tie)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=bench.BenchConfig.repeat)
    p.add_argument("--instances", type=int, default=bench.BenchConfig.instances)

    p = add("search", cmd_search, "search for a small market where an improvement hurts")
    p.add_argument("kind", choices=sorted(counterexamples.SEARCHES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-tries", type=int, default=100_000)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "json"):
        args.json = False
    try:
        return args.func(args)
    except (CoreMarketError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
