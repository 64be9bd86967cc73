"""Tests for the scale-2 Hamiltonian cycle builder."""

import random

import pytest

from oritatami.core import ParseError, Shape, dumps, loads
from oritatami.lattice import E, NE, NW, STEPS, adjacent, step
from oritatami.scaling import hexagon, mold_points, scale_shape, scheme
import oritatami.hc as hc
from oritatami.hc import (
    HcError,
    boundary_violations,
    build_hc,
    cycle_from_doc,
    cycle_to_doc,
    order_points,
    verify_hc,
)

from oracles import brute_force_cycle

SCHEMES = ("A2", "B2", "C2")

# 25-point shape whose insertion order includes a four-neighbor splice
FOUR_NEIGHBOR_SHAPE = frozenset({
    (-2, -2), (-1, -2), (-1, -1), (-1, 0), (-1, 2), (-1, 3), (0, -3),
    (0, -2), (0, 0), (0, 1), (0, 2), (1, -1), (1, 0), (1, 1), (1, 2),
    (2, -1), (2, 0), (2, 1), (2, 2), (2, 3), (3, 0), (3, 1), (3, 2),
    (4, 3), (4, 4),
})


def random_shape(rng, n):
    pts = {(0, 0)}
    while len(pts) < n:
        p = rng.choice(sorted(pts))
        q = (p[0] + rng.choice((-1, 0, 1)), p[1] + rng.choice((-1, 0, 1)))
        if (q[0] - p[0], q[1] - p[1]) in STEPS:
            pts.add(q)
    return Shape(frozenset(pts))


def check_build(s, name):
    sch = scheme(name)
    scaled, state, cycle = build_hc(s, name)
    assert verify_hc(scaled, cycle) is None
    assert boundary_violations(state.edges, s.points, sch) == []
    # the rooted start always gives three consecutive points in one cell
    _, cells = scale_shape(s, sch)
    head = set(cycle[:3])
    assert any(head <= cell.points for cell in cells.values())
    return scaled, state, cycle


def test_order_points_single():
    assert order_points(Shape(frozenset({(4, -2)}))) == ((4, -2),)


def test_order_points_pair():
    assert order_points(Shape(frozenset({(0, 0), (1, 0)}))) == ((0, 0), (1, 0))


def test_order_points_l_shape():
    s = Shape(frozenset({(0, 0), (1, 0), (0, 1)}))
    assert order_points(s) == ((0, 0), (1, 0), (0, 1))


def test_order_points_starts_top_left():
    rng = random.Random(3)
    for _ in range(20):
        s = random_shape(rng, rng.randrange(2, 20))
        first = order_points(s)[0]
        assert first == min(s.points, key=lambda p: (p[1], p[0]))


def test_order_points_connected_prefixes():
    rng = random.Random(4)
    for _ in range(20):
        s = random_shape(rng, rng.randrange(2, 20))
        order = order_points(s)
        assert frozenset(order) == s.points
        for k, p in enumerate(order):
            if k:
                assert any(adjacent(p, q) for q in order[:k])


@pytest.mark.parametrize("name", SCHEMES)
def test_single_cell(name):
    s = Shape(frozenset({(0, 0)}))
    scaled, state, cycle = check_build(s, name)
    assert len(cycle) == len(mold_points(scheme(name)))
    center = scheme(name).apply((0, 0))
    assert cycle[:3] == (step(center, NW), step(center, NE), step(center, E))


def test_c2_single_cell_all_sides_straight():
    s = Shape(frozenset({(0, 0)}))
    _, state, _ = build_hc(s, "C2")
    pats = hc._side_patterns(scheme("C2"))
    for d in range(6):
        assert any(hc._edge(p.a, p.b) in state.edges for p in pats[d])


@pytest.mark.parametrize("name", SCHEMES)
def test_pair_shapes_every_direction(name):
    for st in STEPS:
        check_build(Shape(frozenset({(0, 0), st})), name)


@pytest.mark.parametrize("name", SCHEMES)
def test_hexagon_shape(name):
    check_build(Shape(hexagon(2)), name)


@pytest.mark.parametrize("name", SCHEMES)
def test_four_neighbor_insertion(name):
    s = Shape(FOUR_NEIGHBOR_SHAPE)
    order = order_points(s)
    assert max(sum(1 for q in order[:k] if adjacent(q, p))
               for k, p in enumerate(order) if k) == 4
    check_build(s, name)


def test_verify_hc_rejects_bad_cycles():
    s = Shape(frozenset({(0, 0)}))
    scaled, _, cycle = build_hc(s, "A2")
    assert "misses" in verify_hc(scaled, cycle[:-1])
    assert "repeats" in verify_hc(scaled, cycle + cycle[:1])
    rev = cycle[:3] + cycle[:1] + cycle[3:]
    assert verify_hc(scaled, rev) is not None
    off = tuple(p for p in cycle[:-1]) + ((9, 9),)
    assert verify_hc(scaled, off) is not None


def test_verify_hc_needs_closing_step():
    s = Shape(frozenset({(0, 0)}))
    scaled, _, cycle = build_hc(s, "C2")
    broken = cycle[6:] + cycle[:6][::-1]
    assert verify_hc(scaled, broken) is not None


def test_boundary_violation_reported_when_edge_removed():
    s = Shape(frozenset({(0, 0)}))
    sch = scheme("A2")
    _, state, _ = build_hc(s, "A2")
    pats = hc._side_patterns(sch)
    for d in range(6):
        pat = pats[d][0]
        e = hc._edge(pat.a, pat.b)
        if e in state.edges:
            assert step((0, 0), d) in boundary_violations(
                state.edges - {e}, s.points, sch)
            break
    else:
        pytest.fail("no straight side found on a lone cell")


def test_build_requires_scale_two():
    with pytest.raises(ValueError):
        build_hc(Shape(frozenset({(0, 0)})), "A3")


def test_splice_failure_is_loud(monkeypatch):
    monkeypatch.setattr(hc, "_fast_rewrite", lambda *a, **k: None)
    monkeypatch.setattr(hc, "_search_rewrite", lambda *a, **k: None)
    with pytest.raises(HcError):
        build_hc(Shape(frozenset({(0, 0), (1, 0)})), "A2")


@pytest.mark.parametrize("name", SCHEMES)
def test_random_corpus(name):
    rng = random.Random(20250823)
    for trial in range(25):
        s = random_shape(rng, 2 + trial % 29)
        scaled, state, cycle = check_build(s, name)
        if len(scaled.points) <= 14:
            adj = {p: [q for q in scaled.points if adjacent(p, q)]
                   for p in scaled.points}
            assert brute_force_cycle(sorted(scaled.points), adj) is not None


@pytest.mark.parametrize("name", SCHEMES)
def test_generic_search_alone(name, monkeypatch):
    monkeypatch.setattr(hc, "_fast_rewrite", lambda *a, **k: None)
    rng = random.Random(11)
    for _ in range(8):
        s = random_shape(rng, rng.randrange(2, 25))
        check_build(s, name)
    check_build(Shape(FOUR_NEIGHBOR_SHAPE), name)


def test_build_is_deterministic():
    rng = random.Random(31)
    s = random_shape(rng, 18)
    for name in SCHEMES:
        a = build_hc(s, name)
        b = build_hc(s, name)
        assert a[2] == b[2]
        assert a[1].edges == b[1].edges


def test_gadgets_follow_insertion_order():
    s = Shape(frozenset({(0, 0), (1, 0), (0, 1)}))
    sch = scheme("B2")
    _, state, _ = build_hc(s, "B2")
    assert [g.order_index for g in state.gadgets] == [0, 1, 2]
    assert [g.center for g in state.gadgets] == \
        [sch.apply(p) for p in order_points(s)]


def test_cycle_doc_roundtrip():
    s = Shape(frozenset({(0, 0), (1, 0), (1, 1)}))
    scaled, _, cycle = build_hc(s, "B2")
    doc = cycle_to_doc(scaled, cycle)
    text = dumps(doc)
    s2, c2 = cycle_from_doc(loads(text))
    assert s2 == scaled and c2 == cycle
    assert dumps(cycle_to_doc(s2, c2)) == text


def test_cycle_from_doc_rejects_garbage():
    with pytest.raises(ParseError):
        cycle_from_doc({"points": []})
    with pytest.raises(ParseError):
        cycle_from_doc({"points": [[0, 0]], "cycle": "loop"})
    with pytest.raises(ParseError):
        cycle_from_doc({"points": [[0, 0]], "cycle": [[0, 0.5]]})
