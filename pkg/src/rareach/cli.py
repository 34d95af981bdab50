"""The ``ra-reach`` command line tool.

One binary with verb-style subcommands wiring the library end to end:

* ``check``           consistency-check an execution graph JSON file
* ``trace-validate``  validate a trace JSON file (graph + run partition)
* ``reduce``          collapse a trace once or to a fixpoint
* ``reach``           decide reachability under a context budget
* ``enumerate``       list all consistent graphs up to an event count
* ``pcp``             compile / witness / audit correspondence-problem gadgets
* ``bound``           print the small-model length bound

Exit codes follow sysexits where nothing more specific applies: 64 for usage
errors, 65 for malformed inputs, 70 for internal assertion failures.  Verbs
with a semantic answer encode it in the exit code (``check`` and
``trace-validate``: 0 yes / 1 no; ``reach``: 0 reachable / 1 unreachable
within the bound / 2 inconclusive).  All JSON output is emitted with sorted
keys and a fixed indent so identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .consistency import check_ra
from .decider import ReachStatus, SearchConfig, bounded_reach, enumerate_graphs, naive_reach
from .errors import InternalValueMismatch, ParseError, RaReachError
from .graph import graph_to_json, load_graph_json, to_dot
from .model import parse_program, program_to_json, serialize_program
from .pcp import (
    check_monotonicity,
    check_no_skipping,
    compile_pcp,
    parse_pcp,
    pcp_witness,
)
from .reduction import find_collapsible, reduce, small_model_bound
from .trace import ContextBudget, Trace, load_trace_json, trace_to_json

EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70

_REACH_EXIT = {
    ReachStatus.REACHABLE: 0,
    ReachStatus.UNREACHABLE_WITHIN_BOUND: 1,
    ReachStatus.INCONCLUSIVE: 2,
}

_CONFIG_KEYS = ("contexts", "rmws", "event-cap", "seed", "jobs")


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit 64 instead of 2."""

    def error(self, message: str):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_config(path: str) -> dict[str, int]:
    """key=value presets for the budget flags; '#' starts a comment."""
    out: dict[str, int] = {}
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or key not in _CONFIG_KEYS:
            raise ParseError(f"{path}:{lineno}: expected '<key>=<int>' with key in {_CONFIG_KEYS}")
        try:
            out[key] = int(val)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: {key} needs an integer, got {val!r}") from None
    return out


def _setting(flag: int | None, cfg: dict[str, int], key: str) -> int | None:
    return flag if flag is not None else cfg.get(key)


# --- verb handlers ---------------------------------------------------------------


def _cmd_check(args) -> int:
    graph = load_graph_json(_read(args.graph))
    if args.dot:
        _emit(to_dot(graph), args.dot)
    verdict = check_ra(graph)
    if args.json or not verdict.consistent:
        _emit(_json_text(verdict.to_json()), None)
    else:
        print("consistent")
    return 0 if verdict.consistent else 1


def _cmd_trace_validate(args) -> int:
    try:
        trace = load_trace_json(_read(args.trace))
    except RaReachError as exc:
        if args.json:
            _emit(_json_text({"status": "invalid", "error": type(exc).__name__, "message": str(exc)}), None)
        else:
            print(f"invalid: {exc}")
        return 1
    n_runs = len(trace.runs)
    if args.json:
        _emit(_json_text({"status": "valid", "runs": n_runs, "events": len(trace.pi)}), None)
    else:
        print(f"valid: {len(trace.pi)} events in {n_runs} runs")
    return 0


def _step_log(before: Trace, after: Trace, pair) -> dict:
    """What one reduction step did: removals, rf rewires, mo transpositions."""
    gone = sorted(set(before.position) - set(after.position), key=str)
    rewires = sorted(
        ([r, before.graph.rf[r], w] for r, w in after.graph.rf.items() if before.graph.rf[r] != w),
        key=lambda row: str(row[0]),
    )
    swaps = []
    for loc, row in sorted(after.graph.mo.items()):
        old = [e for e in before.graph.mo[loc] if e in after.graph.events]
        if list(row) != old:
            swaps.append(loc)
    return {
        "first": pair.first,
        "second": pair.second,
        "removed": gone,
        "rfRewires": rewires,
        "moSwaps": swaps,
    }


def _cmd_reduce(args) -> int:
    program = parse_program(_read(args.program))
    trace = load_trace_json(_read(args.trace))
    steps: list[dict] = []
    while True:
        pair = find_collapsible(trace, program, rmw_mode=args.rmw)
        if pair is None:
            break
        after = reduce(trace, program, pair.first, pair.second, rmw_mode=args.rmw)
        steps.append(_step_log(trace, after, pair))
        trace = after
        if not args.fixpoint:
            break
    if args.dot:
        _emit(to_dot(trace.graph), args.dot)
    if args.json:
        _emit(_json_text({"trace": trace_to_json(trace), "steps": steps, "irreducible": not steps or args.fixpoint}), args.output)
    else:
        for s in steps:
            print(
                f"collapsed ({s['first']}, {s['second']}]: removed {len(s['removed'])} events,"
                f" rewired {len(s['rfRewires'])} reads, transposed mo on {s['moSwaps'] or 'nothing'}"
            )
        if not steps:
            print("irreducible: no collapsible pair")
        _emit(_json_text(trace_to_json(trace)), args.output)
    return 0


def _cmd_reach(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    contexts = _setting(args.contexts, cfg, "contexts")
    if contexts is None:
        print("reach: --contexts is required (flag or config)", file=sys.stderr)
        return EX_USAGE
    rmws = _setting(args.rmws, cfg, "rmws") or 0
    event_cap = _setting(args.event_cap, cfg, "event-cap")
    seed = _setting(args.seed, cfg, "seed") or 0
    program = parse_program(_read(args.program))

    if args.naive:
        cap = event_cap if event_cap is not None else small_model_bound(program, contexts, rmws)
        verdict = naive_reach(program, cap)
    else:
        budget = ContextBudget(contexts=contexts, rmws=rmws)
        verdict = bounded_reach(program, SearchConfig(budget, event_cap, seed))

    witness = verdict.witness
    if args.emit_witness and witness is not None:
        _emit(_json_text(trace_to_json(witness)), args.emit_witness)
    if args.dot and witness is not None:
        _emit(to_dot(witness.graph), args.dot)
    if args.json:
        out = {
            "status": verdict.status.value,
            "stats": verdict.explored.to_json(),
            "witness": None if witness is None else trace_to_json(witness),
        }
        _emit(_json_text(out), None)
    else:
        s = verdict.explored
        print(f"{verdict.status.value} (visited {s.visited}, pruned {s.prunes}, max events {s.max_events})")
    return _REACH_EXIT[verdict.status]


def _cmd_enumerate(args) -> int:
    program = parse_program(_read(args.program))
    graphs = []
    for graph in enumerate_graphs(program, args.max_events):
        graphs.append(graph)
        if args.limit is not None and len(graphs) >= args.limit:
            break
    if args.json:
        _emit(_json_text({"count": len(graphs), "graphs": [graph_to_json(g) for g in graphs]}), args.output)
    else:
        for i, g in enumerate(graphs):
            words = {t: len(g.po[t]) for t in g.tids() if g.po[t]}
            print(f"graph {i}: {len(g.non_init_events())} events {words}")
        print(f"{len(graphs)} consistent graphs")
    return 0


def _cmd_bound(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    contexts = _setting(args.contexts, cfg, "contexts")
    if contexts is None:
        print("bound: --contexts is required (flag or config)", file=sys.stderr)
        return EX_USAGE
    rmws = _setting(args.rmws, cfg, "rmws") or 0
    program = parse_program(_read(args.program))
    value = small_model_bound(program, contexts, rmws)
    if args.json:
        _emit(_json_text({"bound": value, "contexts": contexts, "rmws": rmws}), None)
    else:
        print(value)
    return 0


def _cmd_pcp_compile(args) -> int:
    gadget = compile_pcp(parse_pcp(_read(args.instance)))
    if args.json:
        out = {
            "program": program_to_json(gadget.program),
            "roles": gadget.role_map,
            "locRoles": gadget.loc_map,
            "bridgeLocs": sorted(gadget.bridge_locs),
        }
        _emit(_json_text(out), args.output)
    else:
        _emit(serialize_program(gadget.program), args.output)
    return 0


def _parse_solution(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ParseError(f"--solution wants comma-separated indices, got {text!r}") from None


def _cmd_pcp_witness(args) -> int:
    inst = parse_pcp(_read(args.instance))
    trace = pcp_witness(inst, _parse_solution(args.solution))
    if args.check:
        verdict = check_ra(trace.graph)
        assert verdict.consistent, f"witness fails {verdict.axiom}"
        skip = check_no_skipping(trace.graph)
        assert skip.ok, f"witness skips: {skip.violations[0]}"
        mono = check_monotonicity(trace.graph)
        assert mono.ok, f"witness not monotone: {mono.violations[0]}"
    if args.dot:
        _emit(to_dot(trace.graph), args.dot)
    _emit(_json_text(trace_to_json(trace)), args.output)
    return 0


def _cmd_pcp_audit(args) -> int:
    graph = load_graph_json(_read(args.graph))
    skip = check_no_skipping(graph)
    mono = check_monotonicity(graph)
    if args.json:
        _emit(_json_text({"noSkipping": skip.to_json(), "monotonicity": mono.to_json()}), None)
    else:
        for name, report in (("no-skipping", skip), ("monotonicity", mono)):
            if report.ok:
                print(f"{name}: ok")
            else:
                print(f"{name}: {len(report.violations)} violations")
                for v in report.violations:
                    print(f"  {v}")
    return 0 if skip.ok and mono.ok else 1


# --- parser -----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="ra-reach", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("check", help="consistency-check an execution graph")
    p.add_argument("graph", help="execution graph JSON file")
    p.add_argument("--json", action="store_true", help="always emit the JSON verdict")
    p.add_argument("--dot", metavar="FILE", help="also render the graph to DOT")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("trace-validate", help="validate a trace file")
    p.add_argument("trace", help="trace JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_trace_validate)

    p = sub.add_parser("reduce", help="collapse a trace")
    p.add_argument("trace", help="trace JSON file")
    p.add_argument("--program", required=True, metavar="FILE", help="program the trace executes")
    p.add_argument("--rmw", action="store_true", help="treat update events as latest writes")
    p.add_argument("--fixpoint", action="store_true", help="reduce until irreducible")
    p.add_argument("--json", action="store_true", help="bundle trace and step log as JSON")
    p.add_argument("--dot", metavar="FILE", help="render the reduced graph to DOT")
    p.add_argument("-o", "--output", metavar="FILE", help="write the result here instead of stdout")
    p.set_defaults(fn=_cmd_reduce)

    p = sub.add_parser("reach", help="decide reachability under a context budget")
    p.add_argument("program", help="program text file")
    p.add_argument("--contexts", type=int, help="maximum number of runs")
    p.add_argument("--rmws", type=int, help="maximum number of update events (default 0)")
    p.add_argument("--event-cap", type=int, help="cap on placed events (default: small-model bound)")
    p.add_argument("--naive", action="store_true",
                   help="exhaustive graph enumeration up to the event cap (ignores the budget)")
    p.add_argument("--emit-witness", metavar="FILE", help="write the witness trace JSON here")
    p.add_argument("--jobs", type=int, default=1,
                   help="accepted for script compatibility; the search is sequential")
    p.add_argument("--seed", type=int, help="branch-order shuffle seed (0 = canonical order)")
    p.add_argument("--config", metavar="FILE", help="key=value presets for budget flags")
    p.add_argument("--json", action="store_true")
    p.add_argument("--dot", metavar="FILE", help="render the witness graph to DOT")
    p.set_defaults(fn=_cmd_reach)

    p = sub.add_parser("enumerate", help="list all consistent graphs up to an event count")
    p.add_argument("program", help="program text file")
    p.add_argument("--max-events", type=int, required=True)
    p.add_argument("--limit", type=int, help="stop after this many graphs")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(fn=_cmd_enumerate)

    pcp = sub.add_parser("pcp", help="correspondence-problem gadget tooling")
    pcp_sub = pcp.add_subparsers(dest="pcp_verb", required=True, metavar="verb")

    p = pcp_sub.add_parser("compile", help="compile an instance to a 12-thread program")
    p.add_argument("instance", help="instance file: 'pair <word> : <word>' per line")
    p.add_argument("--json", action="store_true", help="emit program plus role metadata")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(fn=_cmd_pcp_compile)

    p = pcp_sub.add_parser("witness", help="build the witness trace for a solution")
    p.add_argument("instance")
    p.add_argument("--solution", required=True, metavar="I,J,...", help="comma-separated pair indices")
    p.add_argument("--check", action="store_true",
                   help="assert consistency and both audits before emitting")
    p.add_argument("--dot", metavar="FILE")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(fn=_cmd_pcp_witness)

    p = pcp_sub.add_parser("audit", help="run the no-skipping and monotonicity audits")
    p.add_argument("graph", help="execution graph JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_pcp_audit)

    p = sub.add_parser("bound", help="print the small-model length bound")
    p.add_argument("--program", required=True, metavar="FILE")
    p.add_argument("--contexts", type=int)
    p.add_argument("--rmws", type=int)
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_bound)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (RaReachError, OSError, ValueError) as exc:
        print(f"ra-reach: error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except (AssertionError, InternalValueMismatch) as exc:
        print(f"ra-reach: internal error: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
