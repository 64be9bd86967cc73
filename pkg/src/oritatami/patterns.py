"""Search-based synthesis of cell-fill routings.

A fill problem asks for a self-avoiding path through a prescribed vertex
set (one new cell of a scaled shape, minus whatever is already covered),
spliced into an existing routing edge, such that every bead can bond an
earlier bead, every bond is shielded (all rival sites adjacent to both the
previous bead and the bond target are occupied first, so replay cannot
place the bead anywhere else), and chosen boundary edges come out clean
for later insertions.  The solver is a depth-first search with forced
moves for required edges, Warnsdorff-style move ordering, and connectivity
pruning; orderings are fixed, so the first solution found is reproducible.

Patterns are lists of (point, bond direction) pairs.  A bond direction
names the single designed bond of that bead; seed-mode patterns leave the
first three beads bond-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import Point, adjacent, neighbors, rotate60, step
from .universal import rival_sites

ARITY = 4


class SynthesisError(RuntimeError):
    """No pattern satisfies the fill problem within the search budget."""


@dataclass(frozen=True)
class Exposure:
    """A boundary edge that must come out clean: origin immediately before
    target in the final routing, support and bouncer placed before origin."""

    origin: Point
    target: Point
    support: Point
    bouncer: Point
    exit_edge: bool = False  # target is the splice-back successor


@dataclass
class FillProblem:
    """One cell insertion for the synthesizer."""

    cover: frozenset
    entry: tuple | None          # (u, v): existing routing edge to splice into
    earlier: frozenset = frozenset()   # placed vertices ranked before u
    degree: dict = field(default_factory=dict)  # designed-bond degree of those
    exposures: tuple = ()
    seed: bool = False
    exit_target: Point | None = None   # bond target of the splice-back bead
    start_hints: tuple = ()      # preferred first vertices, tried in order
    budget: int = 400_000


def rotate_pattern(pattern, k: int):
    """Rotate a mold-relative pattern k times 60 degrees counterclockwise."""
    out = []
    for p, d in pattern:
        out.append((rotate60(p, k), None if d is None else (d - k) % 6))
    return out


def translate_pattern(pattern, offset: Point):
    oi, oj = offset
    return [((p[0] + oi, p[1] + oj), d) for p, d in pattern]


def synthesize(problem: FillProblem):
    """First pattern satisfying the problem, or raise SynthesisError."""
    search = _Search(problem)
    pattern = search.run()
    if pattern is None:
        raise SynthesisError(
            f"no fill found for {len(problem.cover)} vertices "
            f"(visited {search.visited} nodes)")
    issue = validate(problem, pattern)
    if issue is not None:
        raise AssertionError(f"synthesized pattern failed validation: {issue}")
    return pattern


class _Search:
    def __init__(self, problem: FillProblem):
        self.pr = problem
        self.cover = problem.cover
        self.visited = 0
        self.required_next = {}
        self.required_prev = {}
        self.final_origin = None
        for e in problem.exposures:
            if e.exit_edge:
                if self.final_origin is not None and self.final_origin != e.origin:
                    raise SynthesisError("two exposures claim the final bead")
                self.final_origin = e.origin
                continue
            if e.origin in self.cover and e.target in self.cover:
                self.required_next[e.origin] = e.target
                self.required_prev[e.target] = e.origin
        # support/bouncer of an exposure must precede its origin
        self.order_before = {}
        for e in problem.exposures:
            for pre in (e.support, e.bouncer):
                if pre in self.cover:
                    self.order_before.setdefault(e.origin, set()).add(pre)

    def run(self):
        pr = self.pr
        self.path = []
        self.dirs = []
        self.pos = {}
        self.indeg = {}
        self.extdeg = {}
        starts = self._start_candidates()
        for s in starts:
            if self._place_and_go(s):
                return list(zip(self.path, self.dirs))
        return None

    def _start_candidates(self):
        pr = self.pr
        if pr.entry is not None:
            u = pr.entry[0]
            cands = [q for q in neighbors(u) if q in self.cover]
        else:
            cands = sorted(self.cover)
        hints = [h for h in pr.start_hints if h in cands]
        rest = [q for q in cands if q not in hints]
        return hints + rest

    def _place_and_go(self, q) -> bool:
        """Try to place q as the next bead with every allowed bond choice."""
        if self.visited > self.pr.budget:
            return False
        self.visited += 1
        tip = self.path[-1] if self.path else \
            (self.pr.entry[0] if self.pr.entry else None)
        if q in self.required_prev and tip != self.required_prev[q]:
            return False
        if q == self.final_origin and len(self.path) != len(self.cover) - 1:
            return False
        need = self.order_before.get(q)
        if need and any(x not in self.pos and x not in self.pr.earlier
                        for x in need):
            return False
        if tip is not None and tip in self.required_next \
                and self.required_next[tip] != q:
            return False
        seed_free = self.pr.seed and len(self.path) < 3
        choices = [None] if seed_free else self._bond_choices(q, tip)
        if not choices:
            return False
        for d in choices:
            self._push(q, d)
            if self._advance():
                return True
            self._pop(q, d)
        return False

    def _advance(self) -> bool:
        if len(self.path) == len(self.cover):
            return self._finish()
        if not self._feasible():
            return False
        tip = self.path[-1]
        forced = self.required_next.get(tip)
        if forced is not None:
            if forced in self.pos or forced not in self.cover:
                return False
            return self._place_and_go(forced)
        moves = [q for q in neighbors(tip)
                 if q in self.cover and q not in self.pos]
        moves.sort(key=lambda q: (sum(1 for w in neighbors(q)
                                      if w in self.cover and w not in self.pos
                                      and w != q),
                                  neighbors(tip).index(q)))
        for q in moves:
            if self._place_and_go(q):
                return True
        return False

    def _finish(self) -> bool:
        if self.pr.entry is not None:
            if not adjacent(self.path[-1], self.pr.entry[1]):
                return False
            if self.pr.exit_target is not None:
                # the displaced successor must replay unambiguously too
                for w in rival_sites(self.path[-1], self.pr.exit_target,
                                     self.pr.entry[1]):
                    if w not in self.pos and w not in self.pr.earlier:
                        return False
        if self.final_origin is not None and self.path[-1] != self.final_origin:
            return False
        return True

    def _bond_choices(self, q, tip):
        out = []
        ext = []
        for d in range(6):
            t = step(q, d)
            if t == tip:
                continue
            if t in self.pos:
                if self.indeg.get(t, 0) >= ARITY:
                    continue
                bucket = out
            elif t in self.pr.earlier:
                if self.pr.degree.get(t, 0) + self.extdeg.get(t, 0) >= ARITY:
                    continue
                bucket = ext
            else:
                continue
            if tip is not None and any(w not in self.pos
                                       and w not in self.pr.earlier
                                       for w in rival_sites(tip, t, q)):
                continue
            bucket.append(d)
        return out + ext

    def _push(self, q, d) -> None:
        self.pos[q] = len(self.path)
        self.path.append(q)
        self.dirs.append(d)
        if d is not None:
            t = step(q, d)
            if t in self.pos:
                self.indeg[t] = self.indeg.get(t, 0) + 1
            else:
                self.extdeg[t] = self.extdeg.get(t, 0) + 1
            self.indeg[q] = self.indeg.get(q, 0) + 1

    def _pop(self, q, d) -> None:
        self.path.pop()
        self.dirs.pop()
        del self.pos[q]
        if d is not None:
            t = step(q, d)
            if t in self.pos:
                self.indeg[t] -= 1
            else:
                self.extdeg[t] -= 1
            self.indeg[q] -= 1

    def _feasible(self) -> bool:
        """Uncovered vertices must stay reachable from the tip, and the exit
        must stay attainable."""
        tip = self.path[-1]
        uncovered = self.cover - self.pos.keys()
        frontier = [q for q in neighbors(tip) if q in uncovered]
        if not frontier:
            return False
        seen = set(frontier)
        stack = list(frontier)
        while stack:
            p = stack.pop()
            for w in neighbors(p):
                if w in uncovered and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(uncovered):
            return False
        if self.pr.entry is not None:
            v = self.pr.entry[1]
            if self.final_origin is not None:
                last = self.final_origin
                if last in self.pos or not adjacent(last, v):
                    return False
            elif not any(adjacent(q, v) for q in uncovered):
                return False
        return True


def validate(problem: FillProblem, pattern) -> str | None:
    """Re-check every constraint on a finished pattern."""
    pts = [p for p, _ in pattern]
    dirs = [d for _, d in pattern]
    if set(pts) != set(problem.cover):
        return "pattern does not cover the prescribed vertex set"
    if len(set(pts)) != len(pts):
        return "pattern revisits a vertex"
    for a, b in zip(pts, pts[1:]):
        if not adjacent(a, b):
            return f"gap between {a} and {b}"
    if problem.entry is not None:
        u, v = problem.entry
        if not adjacent(u, pts[0]):
            return "first bead is not adjacent to the entry origin"
        if not adjacent(pts[-1], v):
            return "last bead is not adjacent to the splice-back target"
    pos = {p: i for i, p in enumerate(pts)}
    degree = dict(problem.degree)
    for i, (p, d) in enumerate(pattern):
        if problem.seed and i < 3:
            if d is not None:
                return f"seed bead {i} carries a bond"
            continue
        if d is None:
            return f"bead {i} at {p} has no bond"
        t = step(p, d)
        if t in pos:
            if pos[t] >= i:
                return f"bead {i} at {p} bonds a later bead"
            if pos[t] == i - 1:
                return f"bead {i} at {p} bonds its predecessor"
        elif t not in problem.earlier:
            return f"bead {i} at {p} bonds {t}, which is not placed earlier"
        degree[t] = degree.get(t, 0) + 1
        degree[p] = degree.get(p, 0) + 1
    for p, c in degree.items():
        if c > ARITY:
            return f"vertex {p} would carry {c} bonds"
    for e in problem.exposures:
        issue = _check_exposure(problem, e, pts, pos)
        if issue is not None:
            return issue
    return None


def _check_exposure(problem, e: Exposure, pts, pos) -> str | None:
    where = f"exposure at {e.origin}"
    if e.origin not in pos:
        return f"{where}: origin not covered by the pattern"
    if e.exit_edge:
        if pos[e.origin] != len(pts) - 1:
            return f"{where}: origin must be the final bead"
    else:
        if e.target not in pos:
            return f"{where}: target not covered by the pattern"
        if pos[e.target] != pos[e.origin] + 1:
            return f"{where}: edge is not consecutive"
    for name, w in (("support", e.support), ("bouncer", e.bouncer)):
        if w in pos:
            if pos[w] >= pos[e.origin]:
                return f"{where}: {name} comes after the origin"
        elif w not in problem.earlier:
            return f"{where}: {name} is neither covered nor placed earlier"
    return None
