"""Reachability deciders.

Two engines answer "can this program reach its final state vector":

* :func:`naive_reach` enumerates every consistent execution graph up to an
  event count and checks each one — exponential but obviously correct, used
  as the ground truth in differential tests.
* :func:`bounded_reach` searches over traces directly: events are placed one
  at a time at the end of the active run (or of a freshly opened run while
  the context budget allows), reads branch over already-placed writers,
  writes over modification-order insertion points.  Placements that already
  violate an axiom are pruned; since the axioms only ever forbid patterns
  that persist in extensions, pruning loses no witnesses.  Leaving the event
  cap at ``None`` uses the small-model bound, making exhaustion a proof of
  unreachability within the budget.

Branches are explored in a fixed sorted order, so verdicts, witnesses and
statistics are deterministic; ``explore_order`` seeds an optional
reproducible shuffle (0 keeps the canonical order).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterator, NamedTuple

from .consistency import check_ra
from .graph import Event, EventId, ExecutionGraph, build_graph, reaches
from .model import (
    INIT_TID,
    Label,
    Lts,
    Op,
    Program,
    final_vector,
    label_key,
    step_states,
    write,
)
from .reduction import small_model_bound
from .trace import ContextBudget, Run, Trace, canonical_trace, make_trace


class ReachStatus(enum.Enum):
    REACHABLE = "reachable"
    UNREACHABLE_WITHIN_BOUND = "unreachable-within-bound"
    INCONCLUSIVE = "inconclusive"


@dataclass
class SearchStats:
    visited: int = 0
    prunes: int = 0
    max_events: int = 0

    def to_json(self) -> dict:
        return {
            "visited": self.visited,
            "prunes": self.prunes,
            "maxEvents": self.max_events,
        }


@dataclass(frozen=True)
class ReachVerdict:
    status: ReachStatus
    witness: Trace | None
    explored: SearchStats

    @property
    def reachable(self) -> bool:
        return self.status is ReachStatus.REACHABLE


@dataclass(frozen=True)
class SearchConfig:
    """Budget plus an optional event cap and branch-order seed."""

    budget: ContextBudget
    event_cap: int | None = None
    explore_order: int = 0


# --- exhaustive enumeration ----------------------------------------------------


def _words_upto(lts: Lts, max_len: int) -> list[tuple[Label, ...]]:
    """Every label word of length <= max_len executable from the initial state."""
    out: list[tuple[Label, ...]] = [()]
    layer: list[tuple[tuple[Label, ...], frozenset[str]]] = [((), frozenset({lts.init}))]
    for _ in range(max_len):
        nxt: list[tuple[tuple[Label, ...], frozenset[str]]] = []
        for word, states in layer:
            enabled = sorted(
                {lab for (src, lab, _) in lts.transitions if src in states},
                key=label_key,
            )
            for lab in enabled:
                img = step_states(lts, states, lab)
                if img:
                    nxt.append((word + (lab,), img))
        layer = nxt
        out.extend(word for word, _ in layer)
    return out


def enumerate_graphs(program: Program, max_events: int) -> Iterator[ExecutionGraph]:
    """All consistent execution graphs with at most ``max_events`` events.

    Graphs are yielded in a fixed order and each at most once (per-thread
    words, reads-from choices and modification orders all differ between
    yields, and any of them distinguishes two graphs structurally).
    """
    tids = sorted(program.threads)
    locs = sorted(program.locs)
    words_per = [_words_upto(program.threads[t], max_events) for t in tids]
    for combo in product(*words_per):
        if sum(len(w) for w in combo) > max_events:
            continue
        yield from _graphs_for_words(program, tids, locs, combo)


def _graphs_for_words(
    program: Program,
    tids: list[str],
    locs: list[str],
    combo: tuple[tuple[Label, ...], ...],
) -> Iterator[ExecutionGraph]:
    events: list[Event] = [
        Event(i, write(INIT_TID, x, program.init_vals[x])) for i, x in enumerate(locs)
    ]
    po: dict[str, list[EventId]] = {}
    nid = len(locs)
    for t, word in zip(tids, combo):
        po[t] = []
        for lab in word:
            events.append(Event(nid, lab))
            po[t].append(nid)
            nid += 1
    reads = [ev.eid for ev in events if ev.op.reads]
    writes_by_loc: dict[str, list[Event]] = {x: [] for x in locs}
    for ev in events:
        if ev.op.writes:
            writes_by_loc[ev.loc].append(ev)

    cands = []
    for r in reads:
        rd = events[r]
        opts = [
            w.eid
            for w in writes_by_loc[rd.loc]
            if w.val_w == rd.val_r and w.eid != r
        ]
        if not opts:
            return
        cands.append(opts)

    mo_opts = []
    for x in locs:
        rest = [w.eid for w in writes_by_loc[x] if not w.is_init]
        mo_opts.append([tuple(p) for p in permutations(rest)])

    for rf_choice in product(*cands):
        rf = dict(zip(reads, rf_choice))
        for mo_choice in product(*mo_opts):
            mo = {locs[i]: [i, *row] for i, row in enumerate(mo_choice)}
            graph = build_graph(events, po, rf, mo)
            if check_ra(graph).consistent:
                yield graph


def naive_reach(program: Program, max_events: int) -> ReachVerdict:
    """Ground-truth decision by exhaustive graph enumeration."""
    stats = SearchStats()
    target = final_vector(program)
    for graph in enumerate_graphs(program, max_events):
        stats.visited += 1
        stats.max_events = max(stats.max_events, len(graph.non_init_events()))
        if reaches(graph, program, target):
            return ReachVerdict(ReachStatus.REACHABLE, canonical_trace(graph), stats)
    return ReachVerdict(ReachStatus.UNREACHABLE_WITHIN_BOUND, None, stats)


# --- budgeted incremental search -------------------------------------------------


class _Branch(NamedTuple):
    tid: str
    label: Label
    rf_src: EventId | None
    mo_pos: int | None


def bounded_reach(program: Program, config: SearchConfig, prune: bool = True) -> ReachVerdict:
    """Search traces within the context budget; see module docstring.

    ``prune`` disables the incremental axiom checks when False (complete
    graphs are then vetted only on target hits); it exists for differential
    testing of pruning soundness.
    """
    budget = config.budget
    bound = small_model_bound(program, budget.contexts, budget.rmws)
    cap = bound if config.event_cap is None else config.event_cap
    tids = sorted(program.threads)
    locs = sorted(program.locs)
    target = final_vector(program)
    rng = random.Random(config.explore_order) if config.explore_order else None

    init_events = [Event(i, write(INIT_TID, x, program.init_vals[x])) for i, x in enumerate(locs)]
    n_init = len(init_events)
    init_mask = (1 << n_init) - 1

    events: list[Event] = list(init_events)
    preds: list[int] = [0] * n_init
    subsets = {t: frozenset({program.threads[t].init}) for t in tids}
    po_rows: dict[str, list[int]] = {t: [] for t in tids}
    mo_rows: dict[str, list[int]] = {x: [i] for i, x in enumerate(locs)}
    rf: dict[int, int] = {}
    runs: list[tuple[str, list[int]]] = []
    stats = SearchStats()
    flags = {"rmws": 0, "truncated": False}

    def at_target() -> bool:
        return all(program.threads[t].final in subsets[t] for t in tids)

    def hit_trace() -> Trace | None:
        graph = build_graph(
            list(events),
            {t: list(r) for t, r in po_rows.items()},
            dict(rf),
            {x: list(r) for x, r in mo_rows.items()},
        )
        trace = make_trace(graph, tuple(Run(t, tuple(es)) for t, es in runs))
        if prune:
            assert check_ra(graph).consistent, "pruned search reached an inconsistent graph"
            assert reaches(graph, program, target), "hit does not replay to the target"
            assert budget.admits(trace), "hit exceeds its own budget"
            return trace
        if check_ra(graph).consistent and budget.admits(trace):
            return trace
        return None

    def branches() -> list[_Branch]:
        active = runs[-1][0] if runs else None
        out: list[_Branch] = []
        for t in tids:
            if t != active and len(runs) >= budget.contexts:
                continue
            lts = program.threads[t]
            enabled = sorted(
                {lab for (src, lab, _) in lts.transitions if src in subsets[t]},
                key=label_key,
            )
            for lab in enabled:
                if lab.op is Op.RMW and flags["rmws"] >= budget.rmws:
                    continue
                row = mo_rows[lab.loc]
                if lab.op is Op.READ:
                    for w in sorted(w for w in row if events[w].val_w == lab.val_r):
                        out.append(_Branch(t, lab, w, None))
                elif lab.op is Op.WRITE:
                    for pos in range(1, len(row) + 1):
                        out.append(_Branch(t, lab, None, pos))
                else:
                    for w in sorted(w for w in row if events[w].val_w == lab.val_r):
                        for pos in range(1, len(row) + 1):
                            out.append(_Branch(t, lab, w, pos))
        return out

    def violates(br: _Branch, eid: int, p: int) -> bool:
        lab = br.label
        row = mo_rows[lab.loc]
        if lab.op.reads:
            src = br.rf_src
            assert src is not None
            for w2 in row[row.index(src) + 1 :]:
                if p & (1 << w2):
                    return True  # read coherence: mo-later write happens before us
        if lab.op.writes:
            pos = br.mo_pos
            assert pos is not None
            for w2 in row[pos:]:
                if p & (1 << w2):
                    return True  # write coherence: we would be mo-before w2
            for u, usrc in rf.items():
                if events[u].op is Op.RMW and events[u].loc == lab.loc:
                    iu, isrc = row.index(u), row.index(usrc)
                    if isrc < pos <= iu:
                        return True  # would wedge between an update and its source
        if lab.op is Op.RMW:
            pos = br.mo_pos
            assert pos is not None
            if row[pos - 1] != br.rf_src:
                return True  # our own source must be our immediate mo-predecessor
        return False

    def apply(br: _Branch) -> tuple | None:
        t, lab = br.tid, br.label
        eid = len(events)
        p = init_mask
        if po_rows[t]:
            last = po_rows[t][-1]
            p |= preds[last] | (1 << last)
        if br.rf_src is not None:
            p |= preds[br.rf_src] | (1 << br.rf_src)
        if prune and violates(br, eid, p):
            return None
        events.append(Event(eid, lab))
        preds.append(p)
        old_subset = subsets[t]
        subsets[t] = step_states(program.threads[t], old_subset, lab)
        po_rows[t].append(eid)
        if lab.op.reads:
            assert br.rf_src is not None
            rf[eid] = br.rf_src
        if lab.op.writes:
            assert br.mo_pos is not None
            mo_rows[lab.loc].insert(br.mo_pos, eid)
        if lab.op is Op.RMW:
            flags["rmws"] += 1
        if runs and runs[-1][0] == t:
            runs[-1][1].append(eid)
        else:
            runs.append((t, [eid]))
        return (t, lab, old_subset)

    def unapply(rec: tuple) -> None:
        t, lab, old_subset = rec
        eid = len(events) - 1
        events.pop()
        preds.pop()
        subsets[t] = old_subset
        po_rows[t].pop()
        if lab.op.reads:
            del rf[eid]
        if lab.op.writes:
            mo_rows[lab.loc].remove(eid)
        if lab.op is Op.RMW:
            flags["rmws"] -= 1
        runs[-1][1].pop()
        if not runs[-1][1]:
            runs.pop()

    def dfs() -> Trace | None:
        stats.visited += 1
        n = len(events) - n_init
        stats.max_events = max(stats.max_events, n)
        if at_target():
            found = hit_trace()
            if found is not None:
                return found
        out = branches()
        if not out:
            return None
        if n >= cap:
            flags["truncated"] = True
            return None
        if rng is not None:
            rng.shuffle(out)
        for br in out:
            rec = apply(br)
            if rec is None:
                stats.prunes += 1
                continue
            found = dfs()
            unapply(rec)
            if found is not None:
                return found
        return None

    witness = dfs()
    if witness is not None:
        return ReachVerdict(ReachStatus.REACHABLE, witness, stats)
    if not flags["truncated"] or cap >= bound:
        return ReachVerdict(ReachStatus.UNREACHABLE_WITHIN_BOUND, None, stats)
    return ReachVerdict(ReachStatus.INCONCLUSIVE, None, stats)
