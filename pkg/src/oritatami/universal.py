"""Universal delay-1 machinery: a fixed 114-type rule set that folds any
tight routing deterministically.

Vertices get colors (2i+3j) mod 19; equal colors are at least five steps
apart, so every radius-2 ball shows distinct colors.  A bead type is a
(color, direction) pair; the rule attracts (k,d) to (k',d') when k' is the
color of the d-neighbor of a color-k vertex, or symmetrically.  A bead
placed at its designed vertex then bonds exactly its designed target and
nothing else: any other bond partner would need a matching color within
four steps.

The one remaining threat to determinism is the target itself, because the
rule sees types, not positions: if some other free neighbor of the previous
bead also touches the target, the bead could bond it from there too.  A
routing is deterministic exactly when every such rival site is already
occupied, and TightRouting enforces that along with the other structural
conditions (each bead past the seed points at an earlier, non-consecutive,
adjacent vertex; at most ARITY bonds per vertex).

TightRouting holds such a routing under construction: an order-statistics
treap over the beads (mid-sequence splices shift every later rank), the
designed bond direction per bead, and per-vertex bond-degree accounting
against the arity cap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import (
    Configuration,
    OritatamiSystem,
    Routing,
    RuleSet,
    Transcript,
)
from .lattice import (
    DIR_NAMES,
    Point,
    adjacent,
    direction_between,
    neighbors,
    step,
)

ARITY = 4
COLORS = 19

# Color change per lattice direction, aligned with the direction order.
DIRECTION_DELTA = tuple((2 * di + 3 * dj) % COLORS for di, dj in
                        (step((0, 0), d) for d in range(6)))

_DIR_ABBR = tuple(name.lower() for name in DIR_NAMES)
_ABBR_DIR = {a: i for i, a in enumerate(_DIR_ABBR)}


def color(p: Point) -> int:
    """Vertex color in [0, 19): (2i + 3j) mod 19."""
    return (2 * p[0] + 3 * p[1]) % COLORS


def bead_type(k: int, d: int) -> str:
    """Type name for color k in [0,19) and lattice direction index d."""
    return f"{k}{_DIR_ABBR[d]}"


def type_color(t: str) -> int:
    i = 1 + (t[1].isdigit() if len(t) > 1 else False)
    return int(t[:i])


def type_direction(t: str) -> int:
    i = 1 + (t[1].isdigit() if len(t) > 1 else False)
    return _ABBR_DIR[t[i:]]


def universal_alphabet() -> tuple:
    """All 114 = 19 x 6 bead types in a fixed order."""
    return tuple(bead_type(k, d) for k in range(COLORS) for d in range(6))


def rival_sites(tip: Point, target: Point, p: Point) -> list:
    """Vertices other than p adjacent to both the previous bead and the bond
    target.  Any of them left unoccupied would let the bead reach its target
    from a second position, breaking determinism."""
    return [w for w in neighbors(target) if w != p and adjacent(w, tip)]


def universal_rule(a: tuple, b: tuple) -> bool:
    """Whether types (k,d) and (k',d') attract: one's direction delta leads
    to the other's color."""
    (k1, d1), (k2, d2) = a, b
    return (k2 == (k1 + DIRECTION_DELTA[d1]) % COLORS
            or k1 == (k2 + DIRECTION_DELTA[d2]) % COLORS)


def universal_rules() -> RuleSet:
    """The full symmetric rule set over the 114-type alphabet."""
    pairs = []
    for k in range(COLORS):
        for d in range(6):
            k2 = (k + DIRECTION_DELTA[d]) % COLORS
            for d2 in range(6):
                pairs.append((bead_type(k, d), bead_type(k2, d2)))
    return RuleSet(pairs)


class TightError(ValueError):
    """Raised when a routing operation would break tightness invariants."""


# ---------------------------------------------------------------------------
# Order-statistics index over routing positions


class _Node:
    __slots__ = ("point", "direction", "pri", "size",
                 "left", "right", "parent", "prv", "nxt")

    def __init__(self, point: Point, direction: int | None, pri: int):
        self.point = point
        self.direction = direction
        self.pri = pri
        self.size = 1
        self.left = self.right = self.parent = None
        self.prv = self.nxt = None


def _size(n) -> int:
    return n.size if n is not None else 0


class RoutingTimeIndex:
    """Treap keyed by routing order: O(log n) rank queries and mid-sequence
    insertions, plus a doubly-linked list for O(1) neighbor access."""

    def __init__(self):
        self._root = None
        self._nodes: dict[Point, _Node] = {}
        self._rng = random.Random(0x7EA9)
        self.head = None
        self.tail = None

    def __len__(self) -> int:
        return _size(self._root)

    def __contains__(self, p: Point) -> bool:
        return p in self._nodes

    def node(self, p: Point) -> _Node:
        return self._nodes[p]

    def get(self, p: Point):
        return self._nodes.get(p)

    def rank(self, p: Point) -> int:
        """Current position of p in the routing order."""
        n = self._nodes[p]
        r = _size(n.left)
        while n.parent is not None:
            if n is n.parent.right:
                r += _size(n.parent.left) + 1
            n = n.parent
        return r

    def before(self, a: Point, b: Point) -> bool:
        return self.rank(a) < self.rank(b)

    def insert_after(self, after: Point | None, p: Point,
                     direction: int | None) -> _Node:
        """Insert p right after `after` (None prepends at the head)."""
        if p in self._nodes:
            raise TightError(f"routing already visits {p}")
        node = _Node(p, direction, self._rng.getrandbits(60))
        self._nodes[p] = node
        anchor = self._nodes[after] if after is not None else None
        self._link(anchor, node)
        self._attach(anchor, node)
        return node

    def append(self, p: Point, direction: int | None) -> _Node:
        return self.insert_after(self.tail.point if self.tail else None,
                                 p, direction)

    def order(self) -> list:
        out = []
        n = self.head
        while n is not None:
            out.append(n)
            n = n.nxt
        return out

    def _link(self, anchor, node) -> None:
        if anchor is None:
            node.nxt = self.head
            if self.head is not None:
                self.head.prv = node
            self.head = node
            if self.tail is None:
                self.tail = node
        else:
            node.prv = anchor
            node.nxt = anchor.nxt
            if anchor.nxt is not None:
                anchor.nxt.prv = node
            anchor.nxt = node
            if self.tail is anchor:
                self.tail = node

    def _attach(self, anchor, node) -> None:
        if anchor is None:
            if self._root is None:
                self._root = node
                return
            cur = self._root
            while cur.left is not None:
                cur = cur.left
            cur.left = node
            node.parent = cur
        elif anchor.right is None:
            anchor.right = node
            node.parent = anchor
        else:
            cur = anchor.right
            while cur.left is not None:
                cur = cur.left
            cur.left = node
            node.parent = cur
        p = node.parent
        while p is not None:
            p.size += 1
            p = p.parent
        while node.parent is not None and node.pri < node.parent.pri:
            self._rotate_up(node)

    def _rotate_up(self, n) -> None:
        p = n.parent
        g = p.parent
        if p.left is n:
            p.left = n.right
            if n.right is not None:
                n.right.parent = p
            n.right = p
        else:
            p.right = n.left
            if n.left is not None:
                n.left.parent = p
            n.left = p
        p.parent = n
        n.parent = g
        if g is None:
            self._root = n
        elif g.left is p:
            g.left = n
        else:
            g.right = n
        p.size = 1 + _size(p.left) + _size(p.right)
        n.size = 1 + _size(n.left) + _size(n.right)


# ---------------------------------------------------------------------------
# Tight routings


class TightRouting:
    """A growing routing where every bead past the first three carries the
    direction of the single bond it makes when placed."""

    def __init__(self):
        self.index = RoutingTimeIndex()
        self.bond_degree: dict[Point, int] = {}

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, p: Point) -> bool:
        return p in self.index

    def points(self) -> list:
        return [n.point for n in self.index.order()]

    def append(self, p: Point, direction: int | None) -> None:
        self._insert(self.index.tail.point if self.index.tail else None,
                     p, direction)

    def splice_after(self, anchor: Point, path: list) -> None:
        """Insert (point, direction) entries between anchor and its current
        successor; every later bead's rank shifts up."""
        at = anchor
        for k, (p, d) in enumerate(path):
            self._insert(at, p, d, check_next=(k == len(path) - 1))
            at = p

    def _insert(self, after: Point | None, p: Point,
                direction: int | None, check_next: bool = True) -> None:
        if p in self.index:
            raise TightError(f"routing already visits {p}")
        prev = self.index.get(after) if after is not None else None
        if after is not None and prev is None:
            raise TightError(f"no routing bead at anchor {after}")
        nxt = prev.nxt if prev is not None else self.index.head
        if prev is not None and not adjacent(prev.point, p):
            raise TightError(f"routing step {prev.point} -> {p} "
                             "is not a lattice edge")
        if check_next and nxt is not None and not adjacent(p, nxt.point):
            raise TightError(f"routing step {p} -> {nxt.point} "
                             "is not a lattice edge")
        if direction is None:
            if len(self.index) >= 3:
                raise TightError("only the three seed beads may be bond-free")
        else:
            target = step(p, direction)
            tnode = self.index.get(target)
            if tnode is None:
                raise TightError(f"bead at {p} points at empty {target}")
            if prev is not None and tnode is prev:
                raise TightError(f"bead at {p} points at its predecessor")
            if self.bond_degree.get(target, 0) + 1 > ARITY:
                raise TightError(f"bond degree at {target} would exceed {ARITY}")
            if prev is not None:
                for w in rival_sites(prev.point, target, p):
                    if w not in self.index or self.index.before(prev.point, w):
                        raise TightError(
                            f"bead at {p}: rival site {w} for target {target} "
                            "is not occupied earlier")
            self.bond_degree[target] = self.bond_degree.get(target, 0) + 1
            self.bond_degree[p] = self.bond_degree.get(p, 0) + 1
        if check_next and nxt is not None and nxt.direction is not None:
            nt = step(nxt.point, nxt.direction)
            for w in rival_sites(p, nt, nxt.point):
                if w not in self.index or self.index.before(nxt.point, w):
                    raise TightError(
                        f"splice before {nxt.point}: rival site {w} for its "
                        f"target {nt} is not occupied earlier")
        self.index.insert_after(after, p, direction)

    def check(self) -> str | None:
        """First violated tightness invariant, or None."""
        order = self.index.order()
        if len(order) < 3:
            return "routing needs at least the three seed beads"
        rank = {n.point: i for i, n in enumerate(order)}
        for i, n in enumerate(order):
            if i < 3:
                continue
            if n.direction is None:
                return f"bead {i} at {n.point} has no bond direction"
            target = step(n.point, n.direction)
            j = rank.get(target)
            if j is None:
                return f"bead {i} at {n.point} points at empty {target}"
            if j >= i:
                return f"bead {i} at {n.point} points at later bead {j}"
            if j == i - 1:
                return f"bead {i} at {n.point} points at its predecessor"
            for w in rival_sites(order[i - 1].point, target, n.point):
                r = rank.get(w)
                if r is None or r >= i:
                    return (f"bead {i} at {n.point}: rival site {w} for "
                            f"target {target} is not occupied earlier")
        degree: dict[Point, int] = {}
        for i, n in enumerate(order):
            if i >= 3 and n.direction is not None:
                target = step(n.point, n.direction)
                degree[n.point] = degree.get(n.point, 0) + 1
                degree[target] = degree.get(target, 0) + 1
        for p, c in degree.items():
            if c > ARITY:
                return f"vertex {p} carries {c} designed bonds, cap is {ARITY}"
        return None


def transcript_from_tight_routing(tr: TightRouting) -> OritatamiSystem:
    """Emit the delay-1 system whose fold reproduces the routing.

    The first three beads become the seed (typed along the seed chain); every
    later bead's type pairs its vertex color with its bond direction.
    """
    problem = tr.check()
    if problem is not None:
        raise TightError(problem)
    order = tr.index.order()
    pts = [n.point for n in order]
    dirs = [direction_between(pts[0], pts[1]),
            direction_between(pts[1], pts[0]),
            direction_between(pts[2], pts[1])]
    dirs += [n.direction for n in order[3:]]
    types = [bead_type(color(p), d) for p, d in zip(pts, dirs)]
    seed = Configuration(Routing(tuple(zip(pts[:3], types[:3]))), frozenset())
    return OritatamiSystem(
        alphabet=universal_alphabet(),
        transcript=Transcript(tuple(types[3:]), ()),
        rules=universal_rules(),
        delta=1,
        arity=ARITY,
        seed=seed,
    )


def designed_tight_configuration(tr: TightRouting) -> Configuration:
    """The target configuration: the routing with each bead's single bond."""
    sys = transcript_from_tight_routing(tr)
    order = tr.index.order()
    pts = [n.point for n in order]
    rank = {p: i for i, p in enumerate(pts)}
    types = [t for _, t in sys.seed.routing.beads] + list(sys.transcript.prefix)
    bonds = set()
    for i, n in enumerate(order):
        if i >= 3:
            bonds.add((rank[step(n.point, n.direction)], i))
    return Configuration(Routing(tuple(zip(pts, types))), frozenset(bonds))


def verify_tight_replay(tr: TightRouting):
    """Fold the emitted system and require the designed configuration back,
    with exactly one candidate and one bond at every step.  Returns the
    (system, trace) pair; raises TightError on any mismatch."""
    from .dynamics import fold

    sys = transcript_from_tight_routing(tr)
    want = designed_tight_configuration(tr)
    trace = fold(sys, len(want) + 8, mode="require-deterministic")
    if trace.status != "transcript-exhausted":
        raise TightError(f"replay ended with status {trace.status!r} "
                         f"({trace.terminal_reason or trace.nondet_kind})")
    for rec in trace.steps:
        if rec.candidates != 1 or len(rec.new_bonds) != 1:
            raise TightError(
                f"step {rec.step}: {rec.candidates} candidates, "
                f"{len(rec.new_bonds)} new bonds; tight folding needs 1 and 1")
    got = trace.final
    if got.routing.beads != want.routing.beads or got.bonds != want.bonds:
        raise TightError("replayed configuration differs from the design")
    return sys, trace
