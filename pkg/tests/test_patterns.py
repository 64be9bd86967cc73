"""Tests for the cell-fill synthesizer."""

import pytest

from oritatami.cells import designated_edge, side_direction, side_vertices
from oritatami.lattice import E, NE, NW, SE, SW, W, cw, opposite, step
from oritatami.patterns import (Exposure, FillProblem, SynthesisError,
                                rotate_pattern, synthesize, translate_pattern,
                                validate)
from oritatami.scaling import mold_points, scheme
from oritatami.universal import TightRouting, verify_tight_replay

# A hand-routed fill of the 19-vertex hexagonal cell: three seed beads, a
# ring around them, then a counterclockwise boundary tour.  Every boundary
# side except the top one (side 1) ends up with a consecutive designated
# edge; side 1 absorbs the unavoidable wrap of the traversal order.
HAND_SEED = [
    ((0, -1), None), ((0, 0), None), ((1, 0), None),
    ((1, 1), NW), ((0, 1), NE), ((-1, 0), E), ((-1, -1), E),
    ((-2, -2), SE), ((-2, -1), E), ((-2, 0), E),
    ((-1, 1), NE), ((0, 2), NE), ((1, 2), NE),
    ((2, 2), NW), ((2, 1), NW), ((2, 0), W),
    ((1, -1), SW), ((0, -2), SW), ((-1, -2), SW),
]


def exposure_from_edge(e, exit_edge=False):
    return Exposure(e.origin, e.target, e.support, e.bouncer, exit_edge)


def seed_problem(sch, skip_side=1, start_hints=()):
    cover = frozenset(mold_points(sch))
    exposures = tuple(exposure_from_edge(designated_edge(sch, (0, 0), c))
                      for c in range(6) if c != skip_side)
    return FillProblem(cover=cover, entry=None, exposures=exposures,
                       seed=True, start_hints=start_hints)


def routing_from_pattern(pattern):
    tr = TightRouting()
    for p, d in pattern:
        tr.append(p, d)
    assert tr.check() is None
    return tr


def test_validator_accepts_hand_seed():
    problem = seed_problem(scheme("A3"))
    assert validate(problem, HAND_SEED) is None


def test_validator_rejects_wrong_cover():
    problem = seed_problem(scheme("A3"))
    assert "cover" in validate(problem, HAND_SEED[:-1])


def test_validator_rejects_noncontiguous_path():
    problem = seed_problem(scheme("A3"))
    swapped = HAND_SEED[:]
    swapped[7], swapped[9] = swapped[9], swapped[7]
    assert validate(problem, swapped) is not None


def test_validator_rejects_predecessor_bond():
    problem = seed_problem(scheme("A3"))
    bad = HAND_SEED[:]
    bad[4] = ((0, 1), E)  # bonds (1, 1), its predecessor
    assert "predecessor" in validate(problem, bad)


def test_validator_flags_broken_side_edge():
    # the designated edge of side 1 is split by the traversal wrap
    sch = scheme("A3")
    problem = seed_problem(sch, skip_side=None)
    issue = validate(problem, HAND_SEED)
    assert "not consecutive" in issue


def test_hand_seed_replays():
    tr = routing_from_pattern(HAND_SEED)
    verify_tight_replay(tr)


def test_rotated_hand_seed_replays():
    for k in range(1, 6):
        tr = routing_from_pattern(rotate_pattern(HAND_SEED, k))
        verify_tight_replay(tr)


def test_translate_pattern_shifts_points():
    moved = translate_pattern(HAND_SEED, (5, -2))
    assert moved[0] == ((5, -3), None)
    assert [d for _, d in moved] == [d for _, d in HAND_SEED]


@pytest.mark.parametrize("name", ["A3", "A4", "A5", "B3", "B4", "C3", "C4"])
def test_synthesized_seed_replays(name):
    sch = scheme(name)
    problem = seed_problem(sch)
    pattern = synthesize(problem)
    tr = routing_from_pattern(pattern)
    _, trace = verify_tight_replay(tr)
    assert len(trace.steps) == len(pattern) - 3


def test_synthesis_is_deterministic():
    problem = seed_problem(scheme("B3"))
    assert synthesize(problem) == synthesize(problem)


def plug_problem_below_seed():
    """Fill the cell across side 4 of the seed cell, entering through the
    seed's designated edge on that side."""
    sch = scheme("A3")
    center = (2, 4)
    shared = {(0, 2), (1, 2), (2, 2)}
    cover = frozenset((center[0] + i, center[1] + j)
                      for i, j in mold_points(sch)) - shared
    entry = ((1, 2), (2, 2))  # the seed's side-4 designated edge
    seed_pts = [p for p, _ in HAND_SEED]
    u_rank = seed_pts.index(entry[0])
    earlier = frozenset(seed_pts[:u_rank + 1])
    degree = {}
    for p, d in HAND_SEED:
        if d is None:
            continue
        t = step(p, d)
        degree[t] = degree.get(t, 0) + 1
        degree[p] = degree.get(p, 0) + 1
    exposures = []
    for c in range(6):
        if c == 1:  # faces the seed cell
            continue
        verts = [(center[0] + i, center[1] + j)
                 for i, j in side_vertices(sch, c)]
        origin, target = verts[1], verts[2]
        bouncer = step(origin, cw(opposite(side_direction(c))))
        exposures.append(Exposure(origin, target, verts[0], bouncer,
                                  exit_edge=(target == entry[1])))
    return FillProblem(cover=cover, entry=entry, earlier=earlier,
                       degree=degree, exposures=tuple(exposures))


def test_plug_splices_into_seed_and_replays():
    problem = plug_problem_below_seed()
    pattern = synthesize(problem)
    assert len(pattern) == 16
    tr = routing_from_pattern(HAND_SEED)
    tr.splice_after(problem.entry[0], pattern)
    assert tr.check() is None
    verify_tight_replay(tr)
    # the exit side's designated edge is the splice-back edge
    exit_origin = next(e.origin for e in problem.exposures if e.exit_edge)
    assert tr.index.rank(exit_origin) + 1 == tr.index.rank(problem.entry[1])
    # all interior designated edges stayed consecutive
    for e in problem.exposures:
        if not e.exit_edge:
            assert tr.index.rank(e.origin) + 1 == tr.index.rank(e.target)
            assert tr.index.rank(e.support) < tr.index.rank(e.origin)


def test_unreachable_cover_raises():
    problem = FillProblem(cover=frozenset({(0, 0), (5, 5)}),
                          entry=None, seed=True)
    with pytest.raises(SynthesisError):
        synthesize(problem)


def test_exit_edge_requires_adjacency():
    # a one-vertex fill whose designated final bead cannot touch the
    # splice-back target
    problem = FillProblem(
        cover=frozenset({(0, 1)}),
        entry=((0, 0), (4, 4)),
        earlier=frozenset({(0, 0)}),
        exposures=(Exposure((0, 1), (4, 4), (0, 0), (1, 1), exit_edge=True),))
    with pytest.raises(SynthesisError):
        synthesize(problem)
