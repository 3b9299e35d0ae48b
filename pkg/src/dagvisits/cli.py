"""Command-line front end: ``dagvisits <command> ...``.

Graphs come from ``--graph FILE`` (``-`` for stdin), ``--family SPEC``
or, when neither is given, JSON on stdin. Results go to stdout or
``--out`` as JSON (the canonical form), CSV or DOT.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 invalid
input, 4 oracle size limit, 5 oracle time budget.
"""

import argparse
import csv
import io
import json
import sys

from . import bounds, builders, flows, machine, oracles
from .dag import GraphError, reverse
from .experiments import CSV_FIELDS, SUITES
from .families import Random, generate, parse_family
from .formats import (
    computation_from_jsonl, dag_from_json, dag_to_dot, dag_to_json, dumps,
    steps_from_jsonl, steps_to_jsonl, visit_from_json,
)
from .rules import RuleError, explicit_rule, is_r_sequence, make_rule

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INPUT, EXIT_LIMIT, EXIT_TIMEOUT = range(6)


class UsageError(Exception):
    pass


# input helpers


def _read_text(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from None


def family(text, seed):
    """Parse a family spec; random graphs without an explicit seed use ``seed``."""
    spec = parse_family(text)
    if isinstance(spec, Random) and "seed=" not in text.replace(" ", ""):
        spec = Random(spec.n, seed, spec.din, spec.dout, spec.width)
    return generate(spec)


def load_graph(args):
    if getattr(args, "family", None):
        return family(args.family, args.seed)
    return dag_from_json(_load_json(getattr(args, "graph", None)))


def _ints(text):
    if text is None:
        return None
    return [int(x) for x in text.split(",") if x.strip()]


def load_rule(d, name, M=None, side=None):
    """Rule by name (top, singleton, blocked) or from a JSON file."""
    if name.endswith(".json"):
        return explicit_rule(d, _load_json(name))
    if name.replace("-", "_") in ("blocked", "diamond_blocked"):
        if side is None:
            if M is None:
                raise UsageError("the blocked rule needs --m")
            side = builders.blocked_side(d.meta.get("q", 2), M)
        return make_rule(d, name, side)
    return make_rule(d, name)


def _limits(args):
    return oracles.OracleLimits.parse(args.limits, oracles.OracleLimits.from_env())


# output helpers


def _write(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(args, obj, rows=None):
    """JSON by default; ``--format csv`` writes ``rows`` (list of dicts) instead."""
    if args.format == "csv":
        rows = rows if rows is not None else [obj]
        buf = io.StringIO()
        fields = list(rows[0]) if rows else []
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in row.items()})
        _write(args, buf.getvalue())
    elif args.format == "dot":
        raise UsageError("--format dot applies to graphs only")
    else:
        _write(args, dumps(obj) + "\n")


# commands


def cmd_gen(args):
    d = family(args.spec, args.seed)
    if args.dot or args.format == "dot":
        _write(args, dag_to_dot(d))
    else:
        _write(args, dumps(dag_to_json(d)) + "\n")
    return EXIT_OK


BUILDERS = {
    "depth": lambda d, a: builders.build_depth_visit(d, load_rule(d, a.rule, a.m) if a.rule else None),
    "singleton": lambda d, a: builders.build_singleton_visit(d),
    "topo": lambda d, a: builders.build_topological_visit(d),
    "chain-first": lambda d, a: builders.build_chain_first_visit(d),
    "diamond-blocked": lambda d, a: builders.build_diamond_blocked_visit(d, a.m),
}


def cmd_visit(args):
    d = load_graph(args)
    if args.action == "build":
        if args.algo == "diamond-blocked" and args.m is None:
            raise UsageError("--algo diamond-blocked needs --m")
        built = BUILDERS[args.algo](d, args)
        _emit(args, built.to_json())
        return EXIT_OK
    if not args.visit:
        raise UsageError("visit check needs --visit FILE")
    r = load_rule(d, args.rule or "singleton", args.m)
    seq = visit_from_json(_load_json(args.visit))
    check = is_r_sequence(d, r, seq)
    complete = bool(check) and len(seq) == d.n
    _emit(args, {"valid": bool(check), "complete": complete, "position": check.position,
                 "reason": check.reason})
    return EXIT_OK if check and (complete or args.prefix) else EXIT_FAILED


def cmd_oracle(args):
    d = load_graph(args)
    limits = _limits(args)
    what = args.what
    if what == "boundary":
        res = oracles.exact_boundary_complexity(d, load_rule(d, args.rule or "singleton", args.m), limits)
        out = {"value": res.value, "visit": list(res.visit)}
    elif what == "pebbling":
        res = oracles.exact_pebbling_number(d, limits)
        out = {"value": res.value, "schedule": [{"op": s.op, "v": s.v} for s in res.schedule.steps]}
    elif what in ("dominator", "postdominator"):
        xs = _ints(args.set)
        if xs is None:
            raise UsageError(f"oracle {what} needs --set")
        fn = flows.min_dominator if what == "dominator" else flows.min_post_dominator
        cut = fn(d, xs)
        out = {"value": cut.size, "cut": sorted(cut.vertices)}
    elif what == "spartition":
        if args.s is None:
            raise UsageError("oracle spartition needs --s")
        res = oracles.min_s_partition_k(d, args.s, limits)
        out = {"k": res.k, "sets": [sorted(s) for s in res.sets]}
    elif what == "flows":
        sources = _ints(args.sources) or list(d.inputs)
        sinks = _ints(args.sinks) or list(d.outputs)
        res = flows.max_disjoint_paths(d, sources, sinks, _ints(args.shared) or ())
        out = {"value": res.count, "paths": [list(p) for p in res.paths]}
    else:
        if args.m is None:
            raise UsageError("oracle viopt needs --m")
        d_r = reverse(d)
        r = load_rule(d_r, args.rule or "singleton", args.m)
        res = oracles.exact_visit_partition_bound(d, r, args.m, args.metric, limits)
        out = {"value": res.value, "visit": list(res.visit), "write": res.write, "read": res.read,
               "metric": args.metric, "M": args.m}
    _emit(args, out)
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing --{', --'.join(missing)}")


def cmd_bounds(args):
    what = args.what
    if what == "diamond":
        _need(args, "q", "b", "m")
        value = bounds.diamond_lower_bound(args.q, args.b, args.m, args.l)
        report = bounds.BoundReport("io", value, args.m, args.l, "standard",
                                    {"q": args.q, "b": args.b,
                                     "block_side": builders.blocked_side(args.q, args.m)})
        _emit(args, report.to_json())
    elif what == "catalog":
        if not args.family_name:
            raise UsageError("bounds catalog needs a family name")
        params = {k: getattr(args, k) for k in ("q", "b", "i", "h", "n", "dout", "depth")
                  if getattr(args, k, None) is not None}
        if args.m is not None:
            params["M"] = args.m
        params["L"] = args.l
        try:
            table = bounds.closed_form_catalog(args.family_name, **params)
        except KeyError as exc:
            raise UsageError(f"catalog entry needs parameter {exc}") from None
        _emit(args, table, [{"bound": k, "value": v} for k, v in table.items()])
    elif what == "io-count":
        steps = steps_from_jsonl(_read_text(args.trace))
        counts = machine.io_counts(machine.IoComputation(steps, 0))
        _emit(args, counts._asdict())
    elif what == "hongkung":
        _need(args, "m")
        hk = bounds.hong_kung_bound(load_graph(args), args.m)
        _emit(args, {"k": hk.k, "bound": hk.bound, "sets": [sorted(s) for s in hk.sets],
                     "properties": hk.properties})
    else:
        _need(args, "m")
        d = load_graph(args)
        d_r = reverse(d)
        r = load_rule(d_r, args.rule or "singleton", args.m)
        if args.visit:
            visit = visit_from_json(_load_json(args.visit))
        else:
            visit = builders.build_singleton_visit(d_r).sequence if r.kind == "singleton" \
                else builders.build_topological_visit(d_r).sequence
        cuts = _ints(args.cuts)
        if cuts:
            w, wt = bounds.write_bound_for_partition(d_r, r, visit, cuts, args.m)
            rd, rt = bounds.read_bound_for_partition(d_r, visit, cuts, args.m)
            details = {"write": w, "read": rd, "write_terms": wt, "read_terms": rt}
        else:
            part, _, details = bounds.best_partition(d_r, r, visit, args.m, "total")
            cuts = list(part.cuts) if part else []
            w, rd = details.get("write", 0), details.get("read", 0)
        var = bounds.variant_bound(w, rd, len(d.inputs), len(d.outputs), args.variant, args.m, args.l)
        _emit(args, {"visit": list(visit), "cuts": list(cuts), "details": details,
                     "write": var.write.value, "read": var.read.value, "total": var.total.value,
                     "variant": args.variant, "M": args.m, "L": args.l})
    return EXIT_OK


def cmd_simulate(args):
    what = args.what
    if what == "astar":
        _need(args, "q", "b", "m")
        run = machine.run_diamond_astar(args.q, args.b, args.m)
        _write(args, steps_to_jsonl(run.computation.steps))
        return EXIT_OK
    d = load_graph(args)
    if what == "greedy":
        _need(args, "m")
        comp = machine.greedy_computation(d, M=args.m, policy=args.policy)
        _write(args, steps_to_jsonl(comp.steps))
        return EXIT_OK
    _need(args, "m")
    if not args.trace:
        raise UsageError("simulate validate needs --trace FILE")
    comp = computation_from_jsonl(_read_text(args.trace), args.m)
    report = machine.validate_computation(d, comp)
    counts = machine.io_counts(comp)
    _emit(args, {"ok": report.ok, "violations": [v._asdict() for v in report.violations],
                 **counts._asdict()})
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_verify(args):
    kwargs = {"jobs": args.jobs}
    if args.suite == "universal-bounds":
        kwargs.update(n=args.n or 200, seeds=args.seeds or 20)
    elif args.suite == "converters":
        kwargs.update(seeds=args.seeds or 200, n=args.n or 10)
    rows = SUITES[args.suite](**kwargs)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow(row.row())
    _write(args, buf.getvalue())
    failed = sum(not r.passed for r in rows)
    print(f"{args.suite}: {len(rows) - failed}/{len(rows)} checks passed", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


# parser


def _graph_args(p):
    p.add_argument("--graph", help="graph JSON file, '-' for stdin (default: stdin)")
    p.add_argument("--family", help="generate the graph instead, e.g. diamond:q=2,b=8")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--limits", default="",
                        help=f"oracle limits, e.g. subset_dp=24,time=30 (default from ${oracles.LIMITS_ENV})")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "dot"), default="json")

    parser = argparse.ArgumentParser(prog="dagvisits",
                                     description="DAG visits, pebbling and I/O lower bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a family instance")
    p.add_argument("spec", help="family spec such as diamond:q=2,b=9 or tree:q=2,i=2")
    p.add_argument("--dot", action="store_true", help="emit DOT instead of JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("visit", parents=[common], help="build or check a visit")
    p.add_argument("action", choices=("build", "check"))
    _graph_args(p)
    p.add_argument("--algo", choices=sorted(BUILDERS), default="singleton")
    p.add_argument("--rule", help="top, singleton, blocked or a rule JSON file")
    p.add_argument("--m", type=int, help="cache size (blocked rule and visit)")
    p.add_argument("--visit", help="visit JSON file (check)")
    p.add_argument("--prefix", action="store_true", help="accept incomplete sequences (check)")
    p.set_defaults(func=cmd_visit)

    p = sub.add_parser("oracle", parents=[common], help="exact solvers for small graphs")
    p.add_argument("what", choices=("boundary", "pebbling", "dominator", "postdominator",
                                    "spartition", "flows", "viopt"))
    _graph_args(p)
    p.add_argument("--rule", help="top, singleton, blocked or a rule JSON file")
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=int, help="set bound for spartition")
    p.add_argument("--set", help="comma-separated vertex set")
    p.add_argument("--sources")
    p.add_argument("--sinks")
    p.add_argument("--shared")
    p.add_argument("--metric", choices=("write", "read", "total"), default="write")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bounds", parents=[common], help="I/O lower bounds and closed forms")
    p.add_argument("what", choices=("partition", "diamond", "hongkung", "catalog", "io-count"))
    p.add_argument("family_name", nargs="?", help="family for catalog")
    _graph_args(p)
    for name in ("q", "b", "m", "i", "h", "n", "dout", "depth"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--l", type=int, default=1, help="block size")
    p.add_argument("--rule", help="rule on the reversed graph (partition)")
    p.add_argument("--visit", help="visit JSON file (partition); default: a built visit")
    p.add_argument("--cuts", help="comma-separated cut positions (partition); default: best")
    p.add_argument("--variant", choices=("standard", "free-input", "no-recompute"), default="standard")
    p.add_argument("--trace", help="JSON-lines trace (io-count), default stdin")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", parents=[common], help="produce or validate I/O traces")
    p.add_argument("what", choices=("astar", "greedy", "validate"))
    _graph_args(p)
    p.add_argument("--q", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--policy", choices=("furthest", "lru"), default="furthest")
    p.add_argument("--trace", help="JSON-lines trace to validate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run a check suite, CSV out")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--n", type=int, help="vertex count (cap for universal-bounds)")
    p.add_argument("--seeds", type=int, help="number of seeded instances")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dagvisits: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except oracles.SizeLimitError as exc:
        print(f"dagvisits: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except oracles.OracleTimeout as exc:
        print(f"dagvisits: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (GraphError, RuleError, machine.ComputationError, ValueError, OSError) as exc:
        print(f"dagvisits: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
