"""Folding dynamics: fixtures, oracle equivalence, lookahead and projection
semantics, exploration."""

import random

import pytest

from oritatami.core import (
    Configuration,
    OritatamiSystem,
    Routing,
    RuleSet,
    Transcript,
    validate,
)
from oritatami.dynamics import (
    detect_spatial_period,
    enumerate_elongations,
    favorable,
    fold,
    terminal_shape,
    trace_jsonl,
)

import fixtures
import oracles


def advance(sys, steps):
    trace = fold(sys, steps)
    assert trace.status == "max-steps", trace.status
    return trace


def test_glider_folds_periodically():
    trace = advance(fixtures.glider(), 100)
    want = {(6 * k, 6 * k + 5) for k in range(20)}
    want |= {(6 * k + 3, 6 * k + 8) for k in range(20)}
    assert set(trace.final.bonds) == {b for b in want
                                      if b[1] < len(trace.final)}
    assert detect_spatial_period(trace) == (0, 6, (2, 0))
    sys = fixtures.glider()
    assert validate(trace.final, sys.rules, sys.arity) is None


def test_reinforced_glider_folds_periodically():
    sys = fixtures.reinforced_glider()
    trace = advance(sys, 100)
    n = len(trace.final)
    want = set()
    for k in range(20):
        want |= {(6 * k, 6 * k + 5), (6 * k + 1, 6 * k + 3),
                 (6 * k + 3, 6 * k + 8), (6 * k + 4, 6 * k + 6)}
    assert set(trace.final.bonds) == {b for b in want if b[1] < n}
    assert detect_spatial_period(trace) == (0, 6, (2, 0))
    assert validate(trace.final, sys.rules, sys.arity) is None


def test_zigzag_folds_periodically():
    sys = fixtures.zigzag()
    trace = advance(sys, 100)
    n = len(trace.final)
    assert set(trace.final.bonds) == {(i, i + 2) for i in range(n - 2)}
    assert detect_spatial_period(trace) == (0, 4, (2, 0))
    assert validate(trace.final, sys.rules, sys.arity) is None


def test_fixture_steps_each_have_one_candidate():
    for make in (fixtures.glider, fixtures.reinforced_glider, fixtures.zigzag):
        trace = advance(make(), 60)
        assert all(r.candidates == 1 for r in trace.steps)


def test_tunnel_forces_bond_free_step():
    sys = fixtures.tunnel_system()
    result = favorable(sys.seed, sys)
    assert result.next_positions == ((-1, -1),)
    assert result.max_bonds == 0
    trace = fold(sys, 10)
    assert trace.status == "transcript-exhausted"
    assert len(trace.final) == len(sys.seed.routing) + 1


def test_transcript_exhaustion():
    sys = fixtures.zigzag()
    finite = OritatamiSystem(
        alphabet=sys.alphabet,
        transcript=Transcript(tuple(sys.transcript.symbols(0, 5)), ()),
        rules=sys.rules, delta=sys.delta, arity=sys.arity, seed=sys.seed)
    trace = fold(finite, 100)
    assert trace.status == "transcript-exhausted"
    assert len(trace.final) == len(sys.seed.routing) + 5
    assert trace.deterministic


def test_terminal_shape_and_trace_export():
    sys = fixtures.tunnel_system()
    trace = fold(sys, 10)
    shape = terminal_shape(trace)
    assert len(shape) == len(trace.final)
    text = trace_jsonl(trace)
    assert text.count("\n") == len(trace.steps)
    assert '"step": 0' in text


def test_positional_nondeterminism_reported():
    sys = OritatamiSystem(
        alphabet=("s", "c"),
        transcript=Transcript(("c",), ()),
        rules=RuleSet([]),
        delta=1, arity=1,
        seed=Configuration(Routing((((0, 0), "s"), ((1, 0), "s"))), []))
    result = favorable(sys.seed, sys)
    assert len(result.next_positions) == 5
    trace = fold(sys, 5)
    assert trace.status == "nondeterministic"
    assert trace.nondet_kind == "position"
    assert trace.nondet_step == 0
    assert len(trace.nondet_positions) == 5


def bond_choice_system():
    """Tunnel whose exit touches two attracting walls but arity is 1: the
    position is forced yet the kept bond is not."""
    walls = (((0, -1), "x"), ((1, 0), "w"), ((1, 1), "w"),
             ((0, 1), "w"), ((-1, 0), "x"), ((0, 0), "a"))
    return OritatamiSystem(
        alphabet=("a", "w", "x", "c"),
        transcript=Transcript(("c",), ()),
        rules=RuleSet([("c", "x")]),
        delta=1, arity=1,
        seed=Configuration(Routing(walls), []))


def test_bond_ambiguity_exact_projection():
    sys = bond_choice_system()
    result = favorable(sys.seed, sys)
    assert result.next_positions == ((-1, -1),)
    assert result.max_bonds == 1
    assert result.bond_ambiguous
    trace = fold(sys, 5, projection="exact")
    assert trace.status == "nondeterministic"
    assert trace.nondet_kind == "bond"


def test_bond_ambiguity_canonical_projection():
    sys = bond_choice_system()
    trace = fold(sys, 5, projection="canonical")
    assert trace.status == "transcript-exhausted"
    # lowest partner index wins: wall (0,-1) has index 0
    assert trace.final.bonds == frozenset({(0, 6)})


def pocket_system(sealed):
    """Delay-2 system with a one-cell pocket worth two bonds next to the
    head.  With sealed=True the pocket is the only opening."""
    path = [((-1, 0), "w"), ((-2, -1), "x"), ((-2, -2), "w"),
            ((-1, -2), "w"), ((0, -1), "x")]
    if sealed:
        path += [((1, 0), "w"), ((1, 1), "w"), ((0, 1), "w")]
    path.append(((0, 0), "a"))
    return OritatamiSystem(
        alphabet=("a", "w", "x", "c1", "c2"),
        transcript=Transcript(("c1", "c2"), ()),
        rules=RuleSet([("c1", "x")]),
        delta=2, arity=2,
        seed=Configuration(Routing(tuple(path)), []))


def test_full_lookahead_skips_dead_end_pocket():
    sys = pocket_system(sealed=False)
    result = favorable(sys.seed, sys, lookahead="full")
    # the pocket at (-1,-1) cannot host a 2-bead extension; the open route
    # through (1,0) catches one bond with wall (0,-1)
    assert result.next_positions == ((1, 0),)
    assert result.max_bonds == 1


def test_prefix_lookahead_scores_dead_end_pocket():
    sys = pocket_system(sealed=False)
    result = favorable(sys.seed, sys, lookahead="prefix")
    assert result.next_positions == ((-1, -1),)
    assert result.max_bonds == 2


def test_sealed_pocket_terminates_full_lookahead():
    sys = pocket_system(sealed=True)
    trace = fold(sys, 5, lookahead="full")
    assert trace.status == "terminal"
    assert trace.terminal_reason == "no-full-lookahead"
    assert len(trace.final) == len(sys.seed.routing)


def test_sealed_pocket_prefix_lookahead_enters():
    sys = pocket_system(sealed=True)
    trace = fold(sys, 5, lookahead="prefix")
    assert trace.status == "terminal"
    assert trace.terminal_reason == "trapped"
    assert len(trace.final) == len(sys.seed.routing) + 1
    assert trace.final[len(sys.seed.routing)][0] == (-1, -1)
    assert trace.final.bonds == frozenset({(1, 9), (4, 9)})


def test_enumerate_elongations_matches_naive():
    rng = random.Random(42)
    for _ in range(60):
        sys = fixtures.random_system(rng, max_beads=9)
        k = sys.delta
        remaining = sys.transcript.remaining(0)
        if remaining is not None:
            k = min(k, remaining)
        if k == 0:
            continue
        got = list(enumerate_elongations(sys.seed, sys, k))
        full, _ = oracles.naive_extensions(sys.seed, sys, k)
        assert {e.extension for e in got} == {tuple(f) for f in full}
        n0 = len(sys.seed.routing)
        base_types = [t for _, t in sys.seed.routing.beads]
        base_points = list(sys.seed.points)
        base_degree = {}
        for i, j in sys.seed.bonds:
            base_degree[i] = base_degree.get(i, 0) + 1
            base_degree[j] = base_degree.get(j, 0) + 1
        by_ext = {}
        for e in got:
            by_ext.setdefault(e.extension, []).append(e)
        for ext, elongs in by_ext.items():
            points = base_points + [p for p, _ in ext]
            types = base_types + [t for _, t in ext]
            pairs = oracles.new_pairs_of(points, types, sys.rules, n0)
            best = oracles.naive_max_bonds(pairs, base_degree, sys.arity)
            sets = oracles.naive_max_bond_sets(pairs, base_degree, sys.arity)
            assert {e.total_bonds for e in elongs} == {len(sys.seed.bonds) + best}
            assert {e.new_bonds for e in elongs} == sets


def equivalence_trial(rng, lookahead):
    sys = fixtures.random_system(rng)
    config = sys.seed
    for _ in range(rng.randint(0, 2)):
        result = favorable(config, sys, lookahead=lookahead)
        if len(result.next_positions) != 1:
            break
        trace = fold(sys, len(config) - len(sys.seed.routing) + 1,
                     lookahead=lookahead, projection="canonical")
        if trace.status != "max-steps":
            break
        config = trace.final
    got = favorable(config, sys, lookahead=lookahead)
    want_positions, want_bonds, want_reason = oracles.naive_favorable(
        config, sys, lookahead)
    assert got.next_positions == want_positions, (sys, config)
    if want_positions:
        assert got.max_bonds == want_bonds, (sys, config)
    assert got.reason == want_reason, (sys, config)


def test_engine_matches_naive_oracle_sample():
    rng = random.Random(2024)
    for k in range(150):
        equivalence_trial(rng, "full" if k % 2 == 0 else "prefix")


def test_fold_keeps_configurations_valid():
    rng = random.Random(77)
    checked = 0
    for _ in range(80):
        sys = fixtures.random_system(rng)
        trace = fold(sys, 12)
        if trace.final is None:
            continue
        assert validate(trace.final, sys.rules, sys.arity) is None
        totals = [r.max_bonds for r in trace.steps]
        assert totals == sorted(totals)
        assert trace.final.bonds >= sys.seed.bonds
        checked += 1
    assert checked > 40


def test_explore_all_agrees_with_deterministic_fold():
    sys = fixtures.glider()
    det = fold(sys, 12)
    report = fold(sys, 12, mode="explore-all")
    assert report.status == "complete"
    assert report.first_branch_step is None
    assert not report.terminals
    assert len(report.frontier) == 1
    assert report.frontier[0].routing == det.final.routing
    assert report.frontier[0].bonds == det.final.bonds


def test_explore_all_branches_on_nondeterminism():
    sys = OritatamiSystem(
        alphabet=("s", "c"),
        transcript=Transcript(("c",), ()),
        rules=RuleSet([]),
        delta=1, arity=1,
        seed=Configuration(Routing((((0, 0), "s"), ((1, 0), "s"))), []))
    report = fold(sys, 3, mode="explore-all")
    assert report.status == "complete"
    assert report.first_branch_step == 0
    assert len(report.terminals) == 5
    assert all(len(t) == 3 for t in report.terminals)


def test_explore_all_budget():
    sys = OritatamiSystem(
        alphabet=("s", "c"),
        transcript=Transcript((), ("c",)),
        rules=RuleSet([]),
        delta=1, arity=1,
        seed=Configuration(Routing((((0, 0), "s"), ((1, 0), "s"))), []))
    report = fold(sys, 8, mode="explore-all", branch_budget=50)
    assert report.status == "budget-exceeded"
    assert report.branches_explored > 50


def test_no_period_for_short_or_aperiodic_traces():
    sys = fixtures.tunnel_system()
    trace = fold(sys, 10)
    assert detect_spatial_period(trace) is None


def test_enumerate_elongations_rejects_bad_k():
    sys = fixtures.glider()
    with pytest.raises(ValueError):
        list(enumerate_elongations(sys.seed, sys, sys.delta + 1))
