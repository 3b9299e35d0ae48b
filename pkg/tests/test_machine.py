import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brute import dags
from dagvisits import Dag, Diamond, Pyramid, generate, reverse, singleton_rule, top_rule
from dagvisits.families import random_dag
from dagvisits.formats import computation_from_jsonl, steps_from_jsonl, steps_to_jsonl
from dagvisits.machine import (
    Compute, ComputationError, IoComputation, PebbleSchedule, Place, Read, Remove, Write,
    astar_side, astar_upper_bound, computation_to_visit, greedy_computation, io_counts,
    pebble_peak, pebbling_to_visit, random_computation, run_diamond_astar, step_from_json,
    validate_computation, validate_pebbling, visit_to_pebbling,
)
from dagvisits.oracles import exact_pebbling_number
from dagvisits.rules import boundary_complexity_of_sequence, diamond_blocks, is_r_visit
from dagvisits.bounds import diamond_lower_bound

EDGE = Dag(2, [(0, 1)])


def chain(n):
    return Dag(n, [(i, i + 1) for i in range(n - 1)])


def comp(steps, M):
    return IoComputation(tuple(steps), M)


class TestValidate:
    def test_minimal_trace(self):
        c = comp([Read(0), Compute(1), Write(1)], 2)
        assert validate_computation(EDGE, c).ok
        assert io_counts(c) == (1, 1, 2)

    def test_missing_output(self):
        report = validate_computation(EDGE, comp([Read(0), Compute(1)], 2))
        assert report.kinds() == {"missing_output"}

    def test_cold_read(self):
        report = validate_computation(EDGE, comp([Read(1), Read(0), Compute(1), Write(1)], 2))
        assert "cold_read" in report.kinds()

    def test_missing_operand(self):
        report = validate_computation(EDGE, comp([Compute(1), Write(1)], 2))
        assert {"missing_operand", "never_evaluated"} <= report.kinds()

    def test_compute_input(self):
        report = validate_computation(EDGE, comp([Compute(0), Compute(1), Write(1)], 2))
        assert "compute_input" in report.kinds()

    def test_write_not_resident(self):
        report = validate_computation(EDGE, comp([Write(0), Read(0), Compute(1), Write(1)], 2))
        assert "write_not_resident" in report.kinds()

    def test_result_overwrites_dying_operand(self):
        assert validate_computation(EDGE, comp([Read(0), Compute(1), Write(1)], 1)).ok

    def test_capacity(self):
        d = Dag(3, [(0, 2), (1, 2)])
        trace = [Read(0), Read(1), Compute(2), Write(2)]
        assert validate_computation(d, comp(trace, 2)).ok
        assert validate_computation(d, comp(trace, 1)).kinds() == {"capacity"}

    def test_late_read_saves_space(self):
        d = Dag(5, [(0, 4), (1, 3), (2, 3), (3, 4)])
        early = [Read(0), Read(1), Read(2), Compute(3), Compute(4), Write(4)]
        late = [Read(1), Read(2), Compute(3), Read(0), Compute(4), Write(4)]
        assert validate_computation(d, comp(early, 2)).kinds() == {"capacity"}
        assert validate_computation(d, comp(late, 2)).ok

    def test_empty(self):
        assert io_counts(comp([], 1)) == (0, 0, 0)
        assert validate_computation(Dag(0), comp([], 1)).ok

    def test_bad_steps(self):
        assert "bad_step" in validate_computation(EDGE, comp([Read(7)], 2)).kinds()
        assert "bad_step" in validate_computation(EDGE, comp([Place(0)], 2)).kinds()

    def test_step_json(self):
        assert step_from_json({"op": "write", "v": "3"}) == Write(3)
        with pytest.raises(ComputationError):
            step_from_json({"op": "fly", "v": 1})


class TestPebbling:
    def test_valid_and_peak(self):
        d = chain(3)
        s = PebbleSchedule((Place(0), Place(1), Remove(0), Place(2)), 2)
        assert validate_pebbling(d, s).ok
        assert pebble_peak(s) == 2

    def test_violations(self):
        d = chain(3)
        assert "capacity" in validate_pebbling(d, PebbleSchedule((Place(0), Place(1), Place(2)), 2)).kinds()
        assert "missing_operand" in validate_pebbling(d, PebbleSchedule((Place(1),), 3)).kinds()
        assert "not_pebbled" in validate_pebbling(d, PebbleSchedule((Remove(0),), 3)).kinds()
        assert "missing_output" in validate_pebbling(d, PebbleSchedule((Place(0),), 3)).kinds()


class TestGreedy:
    def test_chain(self):
        c = greedy_computation(chain(6), M=2)
        assert io_counts(c)[:2] == (1, 1)

    @pytest.mark.parametrize("policy", ["furthest", "lru"])
    def test_diamond(self, policy):
        d = generate(Diamond(2, 8))
        c = greedy_computation(d, M=2, policy=policy)
        assert validate_computation(d, c).ok
        assert io_counts(c).total >= 8

    def test_rejects_small_cache_and_bad_orders(self):
        d = generate(Pyramid(3, 4))
        with pytest.raises(ComputationError):
            greedy_computation(d, M=2)
        with pytest.raises(ComputationError):
            greedy_computation(chain(3), order=[1, 0, 2])
        with pytest.raises(ValueError):
            greedy_computation(chain(3), policy="mru")

    def test_more_cache_never_hurts_much(self):
        d = generate(Diamond(2, 10))
        totals = [io_counts(greedy_computation(d, M=M)).total for M in (2, 4, 8, 16)]
        assert totals[-1] <= totals[0]
        assert totals[-1] == 2    # one read, one write once the cache holds a whole layer

    @settings(max_examples=60, deadline=None)
    @given(dags(min_n=1, max_n=14, max_out=4), st.integers(0, 3))
    def test_always_valid(self, d, extra):
        M = max(1, d.max_in_degree) + extra
        c = greedy_computation(d, M=M)
        assert validate_computation(d, c).ok
        for seed in range(2):
            assert validate_computation(d, random_computation(d, M, seed=seed)).ok


class TestRandomComputation:
    def test_recompute_happens(self):
        d = random_dag(40, seed=3, din=2)
        seen = 0
        for seed in range(10):
            c = random_computation(d, 5, seed=seed)
            assert validate_computation(d, c).ok
            computes = sum(isinstance(s, Compute) for s in c.steps)
            seen += computes > d.n - len(d.inputs)
        assert seen > 0

    def test_seeded(self):
        d = random_dag(30, seed=1)
        assert random_computation(d, 4, seed=9) == random_computation(d, 4, seed=9)


class TestAstar:
    def test_side(self):
        assert astar_side(2, 4) == 4
        assert astar_side(3, 3) == 2
        assert astar_side(4, 4) == 2
        assert astar_upper_bound(2, 32, 4) == 16 * 64

    def test_small_diamond(self):
        run = run_diamond_astar(2, 8, 2)
        assert validate_computation(run.dag, run.computation).ok
        computes = [s.v for s in run.computation.steps if isinstance(s, Compute)]
        assert len(computes) == len(set(computes)) == run.dag.n - 1

    def test_four_blocks(self):
        run = run_diamond_astar(2, 8, 4)
        assert run.blocks == 4
        assert io_counts(run.computation).total <= astar_upper_bound(2, 8, 4) == 64

    @pytest.mark.parametrize("M", [2, 3, 4])
    def test_cross_block_neighbours(self, M):
        # interior blocks read one row and one column: 2M predecessors, 2M - 1 writers
        run = run_diamond_astar(2, 4 * M, M)
        d, blocks = run.dag, diamond_blocks(run.dag, run.side)
        worst_in = worst_out = 0
        for k in set(blocks):
            inside = [v for v in range(d.n) if blocks[v] == k]
            entering = {u for v in inside for u in d.preds[v] if blocks[u] != k}
            leaving = {v for v in inside if any(blocks[w] != k for w in d.succs[v])}
            worst_in = max(worst_in, len(entering))
            worst_out = max(worst_out, len(leaving))
        assert (worst_in, worst_out) == (2 * M, 2 * M - 1)

    def test_reads_and_writes_per_block(self):
        M = 3
        run = run_diamond_astar(2, 12, M)
        reads = sum(isinstance(s, Read) for s in run.computation.steps)
        writes = sum(isinstance(s, Write) for s in run.computation.steps)
        assert reads <= 2 * M * run.blocks and writes <= (2 * M - 1) * run.blocks + 1

    def test_known_total(self):
        c = run_diamond_astar(2, 32, 4).computation
        assert tuple(io_counts(c)) == (505, 408, 913)

    @pytest.mark.parametrize("b,M", [(8, 2), (12, 3), (16, 4), (24, 2), (32, 5)])
    def test_q2_bound(self, b, M):
        run = run_diamond_astar(2, b, M)
        total = io_counts(run.computation).total
        assert validate_computation(run.dag, run.computation).ok
        assert diamond_lower_bound(2, b, M) <= total <= astar_upper_bound(2, b, M)

    @pytest.mark.parametrize("q,b,M", [(3, 9, 3), (3, 12, 5), (4, 8, 4)])
    def test_higher_q_valid(self, q, b, M):
        run = run_diamond_astar(q, b, M)
        assert validate_computation(run.dag, run.computation).ok
        assert diamond_lower_bound(q, b, M) <= io_counts(run.computation).total

    def test_preconditions(self):
        with pytest.raises(ValueError):
            run_diamond_astar(3, 8, 2)
        with pytest.raises(ValueError):
            run_diamond_astar(2, 1, 4)


class TestComputationToVisit:
    def test_single_vertex(self):
        d = Dag(1)
        c = comp([Read(0), Write(0)], 1)
        r = singleton_rule(reverse(d))
        assert computation_to_visit(d, r, c).sequence == (0,)

    def test_wrong_rule_target(self):
        d = chain(3)
        with pytest.raises(Exception):
            computation_to_visit(d, singleton_rule(d), greedy_computation(d, M=1))

    def test_rejects_invalid_trace(self):
        with pytest.raises(ComputationError):
            computation_to_visit(EDGE, singleton_rule(reverse(EDGE)), comp([Compute(1)], 2))

    @pytest.mark.parametrize("make_rule", [singleton_rule, top_rule])
    def test_random_traces_on_diamond(self, make_rule):
        d = generate(Diamond(2, 4))
        d_r = reverse(d)
        r = make_rule(d_r)
        for seed in range(20):
            c = random_computation(d, 3, seed=seed)
            out = computation_to_visit(d, r, c)
            assert is_r_visit(d_r, r, out.sequence)
            assert list(out.tau) == sorted(out.tau, reverse=True)


class TestPebblingConverters:
    def test_chain(self):
        d = chain(3)
        s = PebbleSchedule((Place(0), Place(1), Remove(0), Place(2)), 2)
        r = singleton_rule(reverse(d))
        out = pebbling_to_visit(d, r, s)
        assert out.sequence == (2, 1, 0)
        assert boundary_complexity_of_sequence(r.dag, r, out.sequence) <= 2

    def test_oracle_witnesses(self):
        for seed in range(12):
            d = random_dag(8, seed=seed, din=2, dout=3)
            p, schedule = exact_pebbling_number(d)
            assert validate_pebbling(d, schedule).ok
            for make_rule in (singleton_rule, top_rule):
                r = make_rule(reverse(d))
                seq = pebbling_to_visit(d, r, schedule).sequence
                assert boundary_complexity_of_sequence(r.dag, r, seq) <= p

    def test_single_vertex(self):
        d = Dag(1)
        s = visit_to_pebbling(d, singleton_rule(reverse(d)), [0])
        assert s.steps == (Place(0),)

    @settings(max_examples=60, deadline=None)
    @given(dags(min_n=1, max_n=9, max_out=3), st.booleans())
    def test_round_trip(self, d, use_top):
        d_r = reverse(d)
        r = (top_rule if use_top else singleton_rule)(d_r)
        visit = np.random.default_rng(d.n).permutation(d.n).tolist()
        # build a valid visit: repeatedly take the first enabled vertex of a shuffled list
        seq, done = [], set()
        while len(seq) < d.n:
            v = next(v for v in visit if v not in done
                     and any(done.issuperset(q) for q in r.families[v]))
            seq.append(v)
            done.add(v)
        s = visit_to_pebbling(d, r, seq)
        assert validate_pebbling(d, s).ok
        assert pebble_peak(s) <= s.budget
        assert pebbling_to_visit(d, r, s).sequence == tuple(seq)


class TestTraceFormat:
    def test_round_trip(self):
        c = run_diamond_astar(2, 8, 2).computation
        text = steps_to_jsonl(c.steps)
        assert steps_from_jsonl(text) == c.steps
        assert computation_from_jsonl(text, 2) == c

    def test_bad_line_reports_number(self):
        with pytest.raises(ValueError, match="2"):
            steps_from_jsonl('{"op": "read", "v": 0}\n{"op": 1}\n')
