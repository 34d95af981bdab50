"""Reachability: exhaustive enumeration vs the budgeted incremental search."""

import pytest

from rareach.consistency import check_ra
from rareach.decider import (
    ReachStatus,
    SearchConfig,
    SearchStats,
    bounded_reach,
    enumerate_graphs,
    naive_reach,
)
from rareach.graph import graph_to_json, reaches
from rareach.model import final_vector
from rareach.trace import ContextBudget

from tests import corpus
from tests.oracle import consistent_oracle


def cfg(contexts, rmws=0, cap=None, seed=0):
    return SearchConfig(ContextBudget(contexts, rmws), event_cap=cap, explore_order=seed)


class TestEnumerate:
    def test_mp_count_frozen(self, mp_program):
        graphs = list(enumerate_graphs(mp_program, 4))
        assert len(graphs) == 5

    def test_all_consistent_and_distinct(self, mp_program):
        graphs = list(enumerate_graphs(mp_program, 4))
        assert all(consistent_oracle(g) for g in graphs)
        blobs = [graph_to_json(g) for g in graphs]
        assert len({str(b) for b in blobs}) == len(blobs)

    def test_event_budget_respected(self, mp_program):
        for g in enumerate_graphs(mp_program, 3):
            assert len(g.non_init_events()) <= 3

    def test_zero_budget_leaves_init_only(self, mp_program):
        graphs = list(enumerate_graphs(mp_program, 0))
        assert len(graphs) == 1
        assert graphs[0].non_init_events() == []

    def test_deterministic_order(self, mp_program):
        a = [graph_to_json(g) for g in enumerate_graphs(mp_program, 4)]
        b = [graph_to_json(g) for g in enumerate_graphs(mp_program, 4)]
        assert a == b


class TestNaive:
    def test_mp_reachable(self, mp_program):
        v = naive_reach(mp_program, 4)
        assert v.reachable and v.status is ReachStatus.REACHABLE
        assert v.explored.visited == 5
        g = v.witness.graph
        assert check_ra(g).consistent
        assert reaches(g, mp_program, final_vector(mp_program))

    def test_mp_forbidden_outcome(self):
        v = naive_reach(corpus.mp_forbidden(), 4)
        assert v.status is ReachStatus.UNREACHABLE_WITHIN_BOUND
        assert v.witness is None

    def test_store_buffering_allowed(self):
        assert naive_reach(corpus.sb(), 4).reachable

    def test_opposite_read_orders_forbidden(self):
        assert not naive_reach(corpus.corr(), 6).reachable

    def test_stats_json_shape(self, mp_program):
        v = naive_reach(mp_program, 4)
        assert set(v.explored.to_json()) == {"visited", "prunes", "maxEvents"}


class TestBounded:
    def test_mp_two_contexts(self, mp_program):
        v = bounded_reach(mp_program, cfg(2))
        assert v.reachable
        assert (v.explored.visited, v.explored.prunes) == (5, 0)
        assert ContextBudget(2, 0).admits(v.witness)
        assert check_ra(v.witness.graph).consistent
        assert reaches(v.witness.graph, mp_program, final_vector(mp_program))

    def test_mp_one_context_unreachable(self, mp_program):
        v = bounded_reach(mp_program, cfg(1))
        assert v.status is ReachStatus.UNREACHABLE_WITHIN_BOUND

    def test_event_cap_inconclusive(self, mp_program):
        v = bounded_reach(mp_program, cfg(2, cap=1))
        assert v.status is ReachStatus.INCONCLUSIVE

    def test_cap_at_bound_is_conclusive(self):
        # a tight cap that still covers the small-model bound must not
        # downgrade the verdict
        prog = corpus.mp_forbidden()
        v = bounded_reach(prog, cfg(1, cap=10**9))
        assert v.status is ReachStatus.UNREACHABLE_WITHIN_BOUND

    def test_store_buffering_allowed(self):
        assert bounded_reach(corpus.sb(), cfg(2)).reachable

    def test_opposite_read_orders_forbidden(self):
        v = bounded_reach(corpus.corr(), cfg(4, cap=6))
        assert not v.reachable

    def test_deterministic_same_seed(self, mp_program):
        a = bounded_reach(mp_program, cfg(2))
        b = bounded_reach(mp_program, cfg(2))
        assert a.status is b.status
        assert a.witness.runs == b.witness.runs
        assert a.explored.to_json() == b.explored.to_json()

    def test_seed_keeps_verdict(self, mp_program):
        for seed in (1, 7, 42):
            assert bounded_reach(mp_program, cfg(2, seed=seed)).reachable
            assert not bounded_reach(corpus.corr(), cfg(3, cap=6, seed=seed)).reachable

    def test_prune_toggle_agrees(self):
        for text in (corpus.MP, corpus.MP_FORBIDDEN, corpus.SB):
            prog = corpus.parse_program(text)
            fast = bounded_reach(prog, cfg(2, cap=4))
            slow = bounded_reach(prog, cfg(2, cap=4), prune=False)
            assert fast.status is slow.status
            if fast.witness is not None:
                assert fast.witness.runs == slow.witness.runs
            assert slow.explored.prunes == 0

    def test_prunes_counted(self):
        v = bounded_reach(corpus.corr(), cfg(4, cap=6))
        assert v.explored.prunes > 0


class TestAgreement:
    @pytest.mark.parametrize("seed", range(10))
    def test_naive_vs_bounded_random(self, seed):
        prog = corpus.random_program(seed)
        truth = naive_reach(prog, 4)
        search = bounded_reach(prog, cfg(4, rmws=4, cap=4))
        assert truth.reachable == search.reachable

    @pytest.mark.parametrize("seed", range(10, 16))
    def test_naive_vs_bounded_with_updates(self, seed):
        prog = corpus.random_program(seed, rmw_prob=0.4)
        truth = naive_reach(prog, 4)
        search = bounded_reach(prog, cfg(4, rmws=4, cap=4))
        assert truth.reachable == search.reachable

    def test_stats_default(self):
        assert SearchStats().to_json() == {"visited": 0, "prunes": 0, "maxEvents": 0}
