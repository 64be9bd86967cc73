"""Hamiltonian cycles through scale-2 shapes.

Every source point becomes a pixel cell (scheme A2, B2 or C2) and the cycle
is grown cell by cell in breadth-first source order.  Each insertion splices
the new cell's points into the cycle by rewriting a few edges near the cell.
A rewrite is accepted only if previously covered points stay covered, the
result is one single cycle, and every empty neighboring location still sees
a straight edge or a V on some shared boundary.  That last condition is the
invariant that keeps the next insertion possible: a future cell can always
hook onto a straight edge or a V.

The common case (some neighbor presents a straight edge) is handled by a
direct construction; the remaining cases fall to a small exact search over
local edge rewrites, checked against the same acceptance conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .core import ParseError, Shape, shape_from_doc, shape_to_doc
from .lattice import (
    E,
    NE,
    NW,
    STEPS,
    Point,
    adjacent,
    direction_between,
    neighbors,
    opposite,
    rotate60,
    step,
)
from .scaling import ScalingScheme, mold_points, scale_shape, scheme

Edge = tuple[Point, Point]


class HcError(RuntimeError):
    """A cycle extension could not be completed; reported, never papered
    over."""


def _edge(p: Point, q: Point) -> Edge:
    return (p, q) if p <= q else (q, p)


def _shift(p: Point, off: Point) -> Point:
    return (p[0] + off[0], p[1] + off[1])


def order_points(s: Shape) -> tuple[Point, ...]:
    """Breadth-first insertion order starting from the top-left point.

    The start is the leftmost point of the topmost row; each dequeued point
    appends its unvisited neighbors pairwise top, right, bottom, left.
    """
    start = min(s.points, key=lambda p: (p[1], p[0]))
    order = [start]
    seen = {start}
    appends = (0, 1, 2, 4, 3, 5)  # NW NE | E | SW SE | W
    i = 0
    while i < len(order):
        p = order[i]
        for d in appends:
            q = step(p, d)
            if q in s.points and q not in seen:
                seen.add(q)
                order.append(q)
        i += 1
    return tuple(order)


@dataclass(frozen=True)
class PixelGadget:
    """One inserted cell: its center, the center's six neighbors, and its
    rank in insertion order."""

    center: Point
    perimeter: tuple[Point, ...]
    order_index: int


@dataclass
class CycleState:
    """The growing cycle: undirected lattice edges plus the covered points."""

    edges: set = field(default_factory=set)
    covered: set = field(default_factory=set)
    gadgets: list = field(default_factory=list)


class SidePattern(NamedTuple):
    """One connectable boundary pair of a cell toward a neighbor direction.

    a and b are cell-relative points, pivot their common in-cell neighbor
    (the tip of a V), and bridge_dirs the lattice directions along which a
    and b reach the neighboring cell (empty when the cells share points).
    """

    a: Point
    b: Point
    pivot: Point
    bridge_dirs: tuple[int, ...]


def _pattern(mold: frozenset, a: Point, b: Point, dirs=()) -> SidePattern:
    pivots = [v for v in neighbors(a) if v in mold and v != b and adjacent(v, b)]
    if len(pivots) != 1:
        raise HcError(f"side {a}-{b} has {len(pivots)} pivots")
    return SidePattern(a, b, pivots[0], tuple(dirs))


@lru_cache(maxsize=None)
def _side_patterns(sch: ScalingScheme) -> dict:
    """For each source direction: the boundary pairs usable to connect (or
    face) the neighboring cell in that direction."""
    mold = mold_points(sch)
    out = {}
    for d in range(6):
        off = sch.apply(STEPS[d])
        nbr = frozenset(_shift(p, off) for p in mold)
        shared = mold & nbr
        pats = []
        if shared:
            a, b = sorted(shared)
            if len(shared) != 2 or not adjacent(a, b):
                raise HcError(f"unexpected shared boundary toward {d}")
            pats.append(_pattern(mold, a, b))
        else:
            reach = {}
            for x in sorted(mold):
                dirs = tuple(t for t in range(6) if step(x, t) in nbr)
                if dirs:
                    reach[x] = dirs
            for a in sorted(reach):
                for b in sorted(reach):
                    if b <= a or not adjacent(a, b):
                        continue
                    both = tuple(t for t in reach[a] if t in reach[b])
                    if both:
                        pats.append(_pattern(mold, a, b, both))
        if not pats:
            raise HcError(f"no boundary pattern toward {d}")
        out[d] = tuple(pats)
    return out


def _initial_cycle(sch: ScalingScheme) -> tuple[Point, ...]:
    """Cell-relative cycle through a lone cell, rooted NW -> NE -> E.

    The 7-point cell runs around its ring with one detour through the
    center, leaving a V toward one side and straight edges on the others.
    The 12-point C cell admits a cycle with a straight edge on all six
    sides.
    """
    if sch.family == "C":
        return ((-1, 0), (-1, -1), (0, -1), (1, 0), (2, 1), (2, 2),
                (1, 2), (1, 1), (0, 0), (0, 1), (0, 2), (-1, 1))
    return ((-1, -1), (0, -1), (1, 0), (1, 1), (0, 0), (0, 1), (-1, 0))


def _cycle_edges(pts) -> set:
    out = set()
    for x, y in zip(pts, pts[1:] + pts[:1]):
        if not adjacent(x, y):
            raise HcError(f"cycle pattern breaks between {x} and {y}")
        out.add(_edge(x, y))
    return out


def _location_ok(edges, sources, sch, loc, pats) -> bool:
    for d in range(6):
        s2 = step(loc, d)
        if s2 not in sources:
            continue
        c = sch.apply(s2)
        for a, b, v, _dirs in pats[opposite(d)]:
            pa, pb, pv = _shift(a, c), _shift(b, c), _shift(v, c)
            if _edge(pa, pb) in edges:
                return True
            if _edge(pa, pv) in edges and _edge(pv, pb) in edges:
                return True
    return False


def boundary_violations(edges, sources, sch: ScalingScheme,
                        near=None) -> list:
    """Empty locations adjacent to occupied sources (optionally only those
    next to `near`) that see neither a straight edge nor a V."""
    pats = _side_patterns(sch)
    sources = frozenset(sources)
    scan = sorted(sources if near is None else near)
    bad = []
    seen = set()
    for s in scan:
        for d in range(6):
            loc = step(s, d)
            if loc in sources or loc in seen:
                continue
            seen.add(loc)
            if not _location_ok(edges, sources, sch, loc, pats):
                bad.append(loc)
    return sorted(bad)


def _adjacency(edges) -> dict:
    adjm: dict = {}
    for a, b in edges:
        adjm.setdefault(a, []).append(b)
        adjm.setdefault(b, []).append(a)
    return adjm


def _single_cycle(edges, count: int) -> bool:
    adjm = _adjacency(edges)
    if len(adjm) != count or any(len(v) != 2 for v in adjm.values()):
        return False
    start = next(iter(adjm))
    prev, cur = start, adjm[start][0]
    length = 1
    while cur != start:
        a, b = adjm[cur]
        prev, cur = cur, (b if a == prev else a)
        length += 1
    return length == count


def _walk(edges, first: Point, second: Point) -> tuple[Point, ...]:
    adjm = _adjacency(edges)
    seq = [first, second]
    while True:
        a, b = adjm[seq[-1]]
        nxt = b if a == seq[-2] else a
        if nxt == first:
            return tuple(seq)
        seq.append(nxt)


def _allowed(p: Point, q: Point, owners: dict) -> bool:
    op = owners.get(p)
    oq = owners.get(q)
    if not op or not oq:
        return False
    if op & oq:
        return True
    return any(adjacent(sp, sq) for sp in op for sq in oq)


def _accept(state, new_edges, total, sources_after, sources_zone, sch) -> bool:
    if not _single_cycle(new_edges, total):
        return False
    return not boundary_violations(new_edges, sources_after, sch,
                                   near=sources_zone)


def _fast_rewrite(state, p, cell, nbr_srcs, sch, sources_after):
    """Hook onto the first neighbor that presents a straight edge.

    Shared-boundary cells reroute the straight edge through the fresh ring;
    disjoint cells drop in the standard cell pattern and connect it with two
    parallel bridge edges.  Returns the new edge set or None.
    """
    pats = _side_patterns(sch)
    c_new = cell.center
    for q in sorted(nbr_srcs):
        d_out = direction_between(q, p)
        d_in = direction_between(p, q)
        c_old = sch.apply(q)
        for a, b, _v, dirs in pats[d_out]:
            pa, pb = _shift(a, c_old), _shift(b, c_old)
            flat = _edge(pa, pb)
            if flat not in state.edges:
                continue
            new_edges = set(state.edges)
            new_edges.discard(flat)
            if not dirs:
                if len(nbr_srcs) != 1:
                    return None  # rerouting formula needs a lone neighbor
                ring = [step(c_new, (d_in + k) % 6) for k in range(6)]
                path = ring[:4] + [c_new] + ring[4:]
                for x, y in zip(path, path[1:]):
                    new_edges.add(_edge(x, y))
            else:
                t = dirs[0]
                ra, rb = step(pa, t), step(pb, t)
                recv = _edge(ra, rb)
                k = 0
                if sch.family == "B" and (4 - d_in) % 6 == 0:
                    k = 1  # keep the pattern's V off the receiving side
                rel = [rotate60(x, k) for x in _initial_cycle(sch)]
                pattern = _cycle_edges([_shift(x, c_new) for x in rel])
                if recv not in pattern:
                    continue
                new_edges |= pattern - {recv}
                new_edges.add(_edge(pa, ra))
                new_edges.add(_edge(pb, rb))
            total = len(state.covered | cell.points)
            if _accept(state, new_edges, total, sources_after, (p, q), sch):
                return new_edges
    return None


def _search_rewrite(state, p, cell, nbr_srcs, owners, sch, sources_after,
                    rmax, node_cap):
    """Exact search for a local edge rewrite splicing the cell in.

    Interface edges around the new cell may be dropped (at most rmax of
    them) and absent edges near it added, subject to every touched point
    ending at degree 2, chosen edges never closing a loop early, and every
    nearby empty location keeping a straight-edge or V witness.
    """
    zone = set(cell.points)
    for q in nbr_srcs:
        c = sch.apply(q)
        zone |= {_shift(x, c) for x in mold_points(sch)}
    zone_pts = sorted(zone)
    in_zone = frozenset(zone)

    mutable = sorted(e for e in state.edges
                     if e[0] in in_zone and e[1] in in_zone)
    mut_set = frozenset(mutable)
    fixed_deg: dict = {}
    for e in state.edges:
        if e in mut_set:
            continue
        for x in e:
            if x in in_zone:
                fixed_deg[x] = fixed_deg.get(x, 0) + 1
    cand = []
    for x in zone_pts:
        for y in neighbors(x):
            if y <= x or y not in in_zone:
                continue
            e = (x, y)
            if e in state.edges or not _allowed(x, y, owners):
                continue
            cand.append(e)
    edges_all = mutable + cand
    nmut = len(mutable)
    eid = {e: i for i, e in enumerate(edges_all)}

    need = {}
    inc: dict = {x: [] for x in zone_pts}
    for idx, (x, y) in enumerate(edges_all):
        inc[x].append(idx)
        inc[y].append(idx)
    for x in zone_pts:
        t = 2 - fixed_deg.get(x, 0)
        if t < 0 or t > len(inc[x]):
            return None
        need[x] = t
    if sum(need.values()) % 2:
        return None
    t_in = sum(need.values()) // 2

    # union-find over the fixed part of the cycle; chosen edges join
    # components and may only close a loop with the final chosen edge
    parent: dict = {}

    def find(x):
        while x != parent.get(x, x):
            x = parent.get(x, x)
        return x

    for e in state.edges:
        if e not in mut_set:
            ra, rb = find(e[0]), find(e[1])
            if ra == rb:
                return None  # fixed edges already close a loop
            parent[max(ra, rb)] = min(ra, rb)

    total = len(state.covered | cell.points)
    sources_zone = [p] + sorted(nbr_srcs)

    # each nearby empty location needs one live witness: a straight edge or
    # both arms of a V; witnesses over undecided edges are watched so a dead
    # last-but-one forces the survivor in
    pats = _side_patterns(sch)
    src_set = frozenset(sources_after)
    wit_edges: list = []
    wit_loc: list = []
    loc_wits: list = []
    edge_wits: dict = {}
    seen_locs = set()
    for s2 in sources_zone:
        for d in range(6):
            loc = step(s2, d)
            if loc in src_set or loc in seen_locs:
                continue
            seen_locs.add(loc)
            wlist = []
            sat = False
            for dnbr in range(6):
                nb = step(loc, dnbr)
                if nb not in src_set:
                    continue
                c = sch.apply(nb)
                for a, b, v, _dirs in pats[opposite(dnbr)]:
                    pa, pb, pv = _shift(a, c), _shift(b, c), _shift(v, c)
                    for combo in ((_edge(pa, pb),),
                                  (_edge(pa, pv), _edge(pv, pb))):
                        ids = []
                        dead = False
                        for e in combo:
                            if e in eid:
                                ids.append(eid[e])
                            elif e not in state.edges or e in mut_set:
                                dead = True
                                break
                        if dead:
                            continue
                        if not ids:
                            sat = True
                            break
                        wlist.append(tuple(sorted(set(ids))))
                    if sat:
                        break
                if sat:
                    break
            if sat:
                continue
            if not wlist:
                return None  # location can never see a witness
            li = len(loc_wits)
            ws = []
            for ids in sorted(set(wlist)):
                wi = len(wit_edges)
                wit_edges.append(ids)
                wit_loc.append(li)
                ws.append(wi)
                for i in ids:
                    edge_wits.setdefault(i, []).append(wi)
            loc_wits.append(ws)

    UNDEC, OUT, IN = -1, 0, 1
    stat = [UNDEC] * len(edges_all)
    chosen = {x: 0 for x in zone_pts}
    open_cnt = {x: len(inc[x]) for x in zone_pts}
    wit_undec = [len(ids) for ids in wit_edges]
    wit_dead = [False] * len(wit_edges)
    loc_live = [len(ws) for ws in loc_wits]
    loc_sat = [False] * len(loc_wits)
    removed = 0
    in_count = 0
    nodes = 0

    def assign(idx, val, trail) -> bool:
        nonlocal removed, in_count
        pending = [(idx, val)]
        while pending:
            i, v = pending.pop()
            if stat[i] != UNDEC:
                if stat[i] != v:
                    return False
                continue
            stat[i] = v
            trail.append(("e", i))
            for x in edges_all[i]:
                open_cnt[x] -= 1
                if v == IN:
                    chosen[x] += 1
            if v == OUT and i < nmut:
                removed += 1
                if removed > rmax:
                    return False
            if v == IN:
                in_count += 1
                if in_count > t_in:
                    return False
                ra, rb = find(edges_all[i][0]), find(edges_all[i][1])
                if ra == rb:
                    if in_count != t_in:
                        return False  # premature loop
                else:
                    parent[max(ra, rb)] = min(ra, rb)
                    trail.append(("u", max(ra, rb)))
            for x in edges_all[i]:
                if chosen[x] > need[x] or chosen[x] + open_cnt[x] < need[x]:
                    return False
                if open_cnt[x]:
                    if chosen[x] == need[x]:
                        pending.extend((k, OUT) for k in inc[x]
                                       if stat[k] == UNDEC)
                    elif chosen[x] + open_cnt[x] == need[x]:
                        pending.extend((k, IN) for k in inc[x]
                                       if stat[k] == UNDEC)
            for w in edge_wits.get(i, ()):
                if wit_dead[w]:
                    continue
                li = wit_loc[w]
                wit_undec[w] -= 1
                trail.append(("d", w))
                if v == OUT:
                    wit_dead[w] = True
                    trail.append(("w", w))
                    if loc_sat[li]:
                        continue
                    loc_live[li] -= 1
                    if loc_live[li] == 0:
                        return False
                    if loc_live[li] == 1:
                        survivor = next(k for k in loc_wits[li]
                                        if not wit_dead[k])
                        pending.extend((k, IN) for k in wit_edges[survivor]
                                       if stat[k] == UNDEC)
                elif wit_undec[w] == 0 and not loc_sat[li]:
                    loc_sat[li] = True
                    trail.append(("s", li))
        return True

    def undo(trail, mark):
        nonlocal removed, in_count
        while len(trail) > mark:
            kind, i = trail.pop()
            if kind == "u":
                del parent[i]
            elif kind == "d":
                wit_undec[i] += 1
            elif kind == "w":
                wit_dead[i] = False
                if not loc_sat[wit_loc[i]]:
                    loc_live[wit_loc[i]] += 1
            elif kind == "s":
                loc_sat[i] = False
            else:
                v = stat[i]
                stat[i] = UNDEC
                for x in edges_all[i]:
                    open_cnt[x] += 1
                    if v == IN:
                        chosen[x] -= 1
                if v == OUT and i < nmut:
                    removed -= 1
                if v == IN:
                    in_count -= 1

    root: list = []
    for x in zone_pts:
        if need[x] == 0:
            forced = [(k, OUT) for k in inc[x]]
        elif need[x] == len(inc[x]):
            forced = [(k, IN) for k in inc[x]]
        else:
            continue
        for k, v in forced:
            if stat[k] == UNDEC and not assign(k, v, root):
                return None
    for li, ws in enumerate(loc_wits):
        if loc_sat[li] or loc_live[li] != 1:
            continue
        survivor = next(k for k in ws if not wit_dead[k])
        for k in wit_edges[survivor]:
            if stat[k] == UNDEC and not assign(k, IN, root):
                return None

    def complete():
        new_edges = set(state.edges)
        for i, e in enumerate(edges_all):
            if i < nmut and stat[i] == OUT:
                new_edges.discard(e)
            elif i >= nmut and stat[i] == IN:
                new_edges.add(e)
        if _accept(state, new_edges, total, sources_after, sources_zone, sch):
            return new_edges
        return None

    def dfs(lo):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            return None
        while lo < len(edges_all) and stat[lo] != UNDEC:
            lo += 1
        if lo == len(edges_all):
            return complete()
        vals = (IN, OUT) if lo < nmut else (OUT, IN)
        trail: list = []
        for v in vals:
            mark = len(trail)
            if assign(lo, v, trail):
                got = dfs(lo + 1)
                if got is not None:
                    return got
            undo(trail, mark)
        return None

    return dfs(0)


def _splice(state, p, cell, nbr_srcs, owners, sch, sources_after):
    got = _fast_rewrite(state, p, cell, nbr_srcs, sch, sources_after)
    if got is None:
        for rmax in (4, 8, 16, 1 << 30):
            got = _search_rewrite(state, p, cell, nbr_srcs, owners, sch,
                                  sources_after, rmax, node_cap=400_000)
            if got is not None:
                break
    if got is None:
        raise HcError(f"no valid cycle extension for cell at {p} "
                      f"({sch.name}, {len(nbr_srcs)} neighbors)")
    state.edges = got
    state.covered |= cell.points


def build_hc(s: Shape, sch) -> tuple[Shape, CycleState, tuple]:
    """Scale the shape and thread one cycle through every scaled point.

    Returns the scaled shape, the cycle state, and the cycle as a point
    sequence rooted at the first cell (NW, NE, E when those survive as
    consecutive cycle points, else any in-cell run of three).
    """
    if isinstance(sch, str):
        sch = scheme(sch)
    if sch.n != 2:
        raise ValueError("cycle construction works at scale 2 only")
    order = order_points(s)
    scaled, cells = scale_shape(s, sch)
    state = CycleState()
    owners: dict = {}
    occupied: list = []
    for k, p in enumerate(order):
        cell = cells[p]
        for x in cell.points:
            owners.setdefault(x, set()).add(p)
        if k == 0:
            pts = [_shift(x, cell.center) for x in _initial_cycle(sch)]
            state.edges = _cycle_edges(pts)
            state.covered = set(cell.points)
        else:
            nbr_srcs = [q for q in occupied if adjacent(q, p)]
            if not nbr_srcs:
                raise HcError(f"insertion order leaves {p} detached")
            _splice(state, p, cell, nbr_srcs, owners, sch,
                    frozenset(occupied) | {p})
        occupied.append(p)
        state.gadgets.append(PixelGadget(cell.center,
                                         tuple(neighbors(cell.center)), k))
    bad = boundary_violations(state.edges, occupied, sch)
    if bad:
        raise HcError(f"boundary invariant broken at {bad[0]}")
    cycle = _rooted_cycle(state, cells, order)
    msg = verify_hc(scaled, cycle)
    if msg:
        raise HcError(msg)
    return scaled, state, cycle


def _rooted_cycle(state, cells, order) -> tuple[Point, ...]:
    first = cells[order[0]].center
    nw, ne, e = step(first, NW), step(first, NE), step(first, E)
    if _edge(nw, ne) in state.edges and _edge(ne, e) in state.edges:
        return _walk(state.edges, nw, ne)
    adjm = _adjacency(state.edges)
    for p in order:
        pts = cells[p].points
        for v in sorted(pts):
            a, b = sorted(adjm[v])
            if a in pts and b in pts:
                return _walk(state.edges, a, v)
    raise HcError("no run of three consecutive cycle points in one cell")


def verify_hc(s: Shape, cycle) -> str | None:
    """Check the cycle closes, stays on lattice edges, and covers the shape
    exactly.  Returns None when valid, else a message."""
    pts = list(cycle)
    if len(pts) < 3:
        return "cycle has fewer than three points"
    if len(set(pts)) != len(pts):
        return "cycle repeats a point"
    if set(pts) != s.points:
        missing = sorted(s.points - set(pts))
        if missing:
            return f"cycle misses {missing[0]}"
        extra = sorted(set(pts) - s.points)
        return f"cycle leaves the shape at {extra[0]}"
    for x, y in zip(pts, pts[1:] + pts[:1]):
        if not adjacent(x, y):
            return f"cycle breaks between {x} and {y}"
    return None


def cycle_to_doc(s: Shape, cycle) -> dict:
    """Shape document with the cycle as an ordered point list."""
    doc = shape_to_doc(s)
    doc["cycle"] = [list(p) for p in cycle]
    return doc


def cycle_from_doc(doc: dict) -> tuple[Shape, tuple]:
    if not isinstance(doc, dict) or "cycle" not in doc:
        raise ParseError("expected an object with points and cycle")
    s = shape_from_doc({"points": doc.get("points", [])})
    raw = doc["cycle"]
    if not isinstance(raw, list):
        raise ParseError("cycle must be a list of points")
    cycle = []
    for entry in raw:
        if (not isinstance(entry, list) or len(entry) != 2
                or any(isinstance(v, bool) or not isinstance(v, int)
                       for v in entry)):
            raise ParseError(f"bad cycle point: {entry!r}")
        cycle.append((entry[0], entry[1]))
    return s, tuple(cycle)
