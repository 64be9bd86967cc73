"""Exact oblivious folding dynamics.

One step works on a configuration whose routing already carries the seed and
all previously stabilized beads.  Let L = min(delta, remaining transcript).
Every placement of the next transcript bead (a 1-elongation) is scored by the
best total bond count reachable by elongating it with the following L - 1
transcript beads; the bead stabilizes at the positions achieving the overall
maximum.  No tie-breaking ever happens: several winning positions mean the
step is nondeterministic and the caller decides what to do with that.

Two lookahead readings are supported:

* "full" (default): a 1-elongation only competes if it extends to the full
  L beads; positions whose every continuation jams early are dropped.  If no
  candidate reaches full length the fold stops with reason
  "no-full-lookahead" rather than guessing.
* "prefix": a 1-elongation is scored over all its partial extensions, so
  candidates jammed in a pocket shorter than the lookahead still compete.

Bond sets: bonds inherited from the configuration are frozen; an elongation's
new bonds (each touching a nascent bead) form a maximum-cardinality set
subject to per-bead arity.  When a step stabilizes its bead, the kept bonds
are those of a favorable elongation restricted to the stabilized prefix.  Two
projection modes exist because maximum bond sets need not be unique:

* "exact": enumerate every favorable elongation's projection; more than one
  distinct projected configuration counts as nondeterminism (kind "bond").
* "canonical": keep the lexicographically least maximum bond set between the
  stabilized bead and earlier beads; only the position set decides
  determinism.  This is the cheap mode used when replaying compiled systems
  whose determinism notion is positional.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Configuration, OritatamiSystem, Routing, Shape
from .lattice import Point, STEPS

_MIDDLE_CAP = 4  # non-consecutive neighbors of a mid-path bead
_HEAD_CAP = 5    # non-consecutive neighbors of a path end
_GEOMETRIC_BOUNDS = True  # reachability pruning for unique-type transcripts


@dataclass(frozen=True)
class Elongation:
    """A routing extension together with one maximum new-bond set."""

    extension: tuple[tuple[Point, str], ...]
    new_bonds: frozenset
    total_bonds: int


@dataclass(frozen=True)
class StepResult:
    """Outcome of scoring one stabilization step."""

    next_positions: tuple[Point, ...]
    max_bonds: int
    witnesses: dict
    reason: str | None = None  # set when next_positions is empty
    bond_ambiguous: bool = False

    @property
    def terminal(self) -> bool:
        return not self.next_positions


@dataclass(frozen=True)
class StepRecord:
    step: int
    point: Point
    bead_type: str
    max_bonds: int
    candidates: int
    new_bonds: tuple


@dataclass
class FoldTrace:
    system: OritatamiSystem
    status: str = "running"
    steps: list = field(default_factory=list)
    final: Configuration | None = None
    terminal_reason: str | None = None
    nondet_positions: tuple = ()
    nondet_step: int | None = None
    nondet_kind: str | None = None

    @property
    def deterministic(self) -> bool:
        return self.status in ("terminal", "transcript-exhausted", "max-steps")


@dataclass
class ExploreReport:
    status: str
    terminals: list          # configurations with no possible continuation
    frontier: list           # configurations still alive at the step cap
    first_branch_step: int | None
    branches_explored: int


class _State:
    """Mutable fold state: routing, occupancy and per-bead bond degrees."""

    __slots__ = ("positions", "types", "occ", "bonds", "degree")

    def __init__(self, c: Configuration):
        self.positions = [p for p, _ in c.routing.beads]
        self.types = [t for _, t in c.routing.beads]
        self.occ = {p: i for i, (p, _) in enumerate(c.routing.beads)}
        self.bonds = set(c.bonds)
        self.degree = [0] * len(self.positions)
        for i, j in c.bonds:
            self.degree[i] += 1
            self.degree[j] += 1

    def push(self, p: Point, t: str) -> None:
        self.occ[p] = len(self.positions)
        self.positions.append(p)
        self.types.append(t)
        self.degree.append(0)

    def pop(self) -> None:
        p = self.positions.pop()
        self.types.pop()
        self.degree.pop()
        del self.occ[p]

    def add_bond(self, i: int, j: int) -> None:
        self.bonds.add((i, j))
        self.degree[i] += 1
        self.degree[j] += 1

    def configuration(self) -> Configuration:
        beads = tuple(zip(self.positions, self.types))
        return Configuration(Routing(beads), frozenset(self.bonds))


# ---------------------------------------------------------------------------
# Maximum bond sets under arity


def max_bond_set(edges: list, capacity: dict) -> tuple[int, tuple]:
    """Maximum-cardinality subset of `edges` with every vertex v used at most
    capacity[v] times.  Returns (size, one witness in canonical order)."""
    degree: dict = {}
    for a, b in edges:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    if all(degree[v] <= capacity[v] for v in degree):
        return len(edges), tuple(sorted(edges))
    best_size = 0
    best: tuple = ()
    chosen: list = []
    cap = dict(capacity)
    order = sorted(edges)

    def rec(k: int) -> None:
        nonlocal best_size, best
        if len(chosen) + (len(order) - k) <= best_size:
            return
        if k == len(order):
            if len(chosen) > best_size:
                best_size = len(chosen)
                best = tuple(chosen)
            return
        a, b = order[k]
        if cap[a] > 0 and cap[b] > 0:
            cap[a] -= 1
            cap[b] -= 1
            chosen.append(order[k])
            rec(k + 1)
            chosen.pop()
            cap[a] += 1
            cap[b] += 1
        rec(k + 1)

    rec(0)
    return best_size, best


def enumerate_max_bond_sets(edges: list, capacity: dict, limit: int = 64) -> list:
    """All maximum-cardinality bond subsets (canonically ordered), capped."""
    target, _ = max_bond_set(edges, capacity)
    results: list = []
    chosen: list = []
    cap = dict(capacity)
    order = sorted(edges)

    def rec(k: int) -> None:
        if len(results) >= limit:
            return
        if len(chosen) + (len(order) - k) < target:
            return
        if k == len(order):
            if len(chosen) == target:
                results.append(tuple(chosen))
            return
        a, b = order[k]
        if cap[a] > 0 and cap[b] > 0:
            cap[a] -= 1
            cap[b] -= 1
            chosen.append(order[k])
            rec(k + 1)
            chosen.pop()
            cap[a] += 1
            cap[b] += 1
        rec(k + 1)

    rec(0)
    return results


# ---------------------------------------------------------------------------
# Elongation enumeration (exhaustive, used by the API and small searches)


def enumerate_elongations(c: Configuration, sys: OritatamiSystem, k: int):
    """Yield every valid k-elongation of c, one Elongation per maximum bond
    set of each routing extension.  Exhaustive and unpruned; meant for small k.
    """
    if k < 0 or k > sys.delta:
        raise ValueError("k must be in [0, delta]")
    state = _State(c)
    n0 = len(state.positions)
    t_idx = n0 - len(sys.seed.routing)
    remaining = sys.transcript.remaining(t_idx)
    if remaining is not None and k > remaining:
        raise ValueError("not enough transcript symbols for a k-elongation")
    if k == 0:
        yield Elongation((), frozenset(), len(c.bonds))
        return
    symbols = sys.transcript.symbols(t_idx, k)
    base_bonds = len(c.bonds)
    ext: list = []
    new_edges: list = []

    def rec(depth: int):
        if depth == k:
            capacity = {i: sys.arity - state.degree[i]
                        for e in new_edges for i in e}
            for bond_set in enumerate_max_bond_sets(new_edges, capacity):
                yield Elongation(tuple(ext), frozenset(bond_set),
                                 base_bonds + len(bond_set))
            return
        head = state.positions[-1]
        t = symbols[depth]
        idx = n0 + depth
        for s in STEPS:
            p = (head[0] + s[0], head[1] + s[1])
            if p in state.occ:
                continue
            edges = _potential_edges(state, sys, p, t, idx)
            state.push(p, t)
            ext.append((p, t))
            new_edges.extend(edges)
            yield from rec(depth + 1)
            del new_edges[len(new_edges) - len(edges):]
            ext.pop()
            state.pop()

    yield from rec(0)


def _potential_edges(state: _State, sys: OritatamiSystem, p: Point, t: str,
                     idx: int) -> list:
    """New potential bonds of a bead of type t placed at p as index idx.
    Beads already saturated by frozen bonds are skipped."""
    edges = []
    partners = sys.rules.partners(t)
    if not partners:
        return edges
    occ = state.occ
    types = state.types
    degree = state.degree
    for s in STEPS:
        q = (p[0] + s[0], p[1] + s[1])
        j = occ.get(q)
        if j is None or j >= idx - 1:
            continue
        if types[j] not in partners or degree[j] >= sys.arity:
            continue
        edges.append((j, idx))
    return edges


# ---------------------------------------------------------------------------
# Favorable step search (pruned, exact)


def favorable(c: Configuration, sys: OritatamiSystem, *,
              lookahead: str = "full") -> StepResult:
    """Score the next stabilization step of configuration c under sys."""
    state = _State(c)
    return _favorable(state, sys, lookahead=lookahead)


def _favorable(state: _State, sys: OritatamiSystem, *, lookahead: str) -> StepResult:
    n0 = len(state.positions)
    t_idx = n0 - len(sys.seed.routing)
    remaining = sys.transcript.remaining(t_idx)
    if remaining == 0:
        return StepResult((), len(state.bonds), {}, reason="transcript-exhausted")
    L = sys.delta if remaining is None else min(sys.delta, remaining)
    symbols = sys.transcript.symbols(t_idx, L)
    if L == 1:
        return _favorable_delay1(state, sys, symbols[0], n0)
    if not n0:
        return StepResult((), len(state.bonds), {}, reason="trapped")

    arity = sys.arity
    prefix_mode = lookahead == "prefix"
    partner_sets = [sys.rules.partners(t) for t in symbols]
    unique_types = len(set(state.types + symbols)) == len(state.types) + len(symbols)
    use_geo = unique_types and _GEOMETRIC_BOUNDS
    caps = []
    placed = set(state.types)
    for d, t in enumerate(symbols):
        cap = min(arity, _MIDDLE_CAP if d < L - 1 else _HEAD_CAP)
        if unique_types:
            # a bead only bonds backward, so count partners that can
            # already be in place when it stabilizes
            cap = min(cap, sum(1 for u in partner_sets[d] if u in placed))
            placed.add(t)
        caps.append(cap)
    suffix_cap = [0] * (L + 1)
    for d in range(L - 1, -1, -1):
        suffix_cap[d] = suffix_cap[d + 1] + caps[d]

    # the search itself runs on integer-packed coordinates, (i, j) becoming
    # (i << shift) + j + off with the column range centered so packing is
    # injective over every reachable cell and decode is a shift and a mask
    cols = [p[1] for p in state.positions]
    lo, hi = min(cols), max(cols)
    shift = (hi - lo + 2 * L + 7).bit_length() + 1
    half = 1 << (shift - 1)
    mask = half + half - 1
    off = half - (lo + hi) // 2
    isteps = tuple((si << shift) + sj for si, sj in STEPS)
    ipos = [(p[0] << shift) + p[1] + off for p in state.positions]
    iocc = {v: k for k, v in enumerate(ipos)}
    iocc_get = iocc.get

    def unpack(v: int) -> Point:
        jv = v & mask
        return ((v - jv) >> shift, jv - off)

    # bond eligibility by bead index is static during the search: degrees
    # only change when a step commits, and window beads start at degree 0
    deg = list(state.degree) + [0] * L
    all_types = state.types + list(symbols)
    okt = []
    for d in range(L):
        ps = partner_sets[d]
        row = bytearray(n0 + L)
        for j, t in enumerate(all_types):
            if deg[j] < arity and t in ps:
                row[j] = 1
        okt.append(row)

    if use_geo:
        # geometry-aware suffix bounds: partners not yet placed always count,
        # placed partners count only while a later bead can still walk to
        # them in time, around the structure for frozen beads and by lattice
        # distance for beads of the current partial path
        symbol_at = {t: f for f, t in enumerate(symbols)}
        placed_at = {t: ipos[k] for k, t in enumerate(state.types)}
        window_parts = []
        fixed_parts = []
        qid: dict = {}
        qpos: list = []
        for d in range(L):
            ws = []
            fids = []
            for u in partner_sets[d]:
                f = symbol_at.get(u)
                if f is not None:
                    if f < d:
                        ws.append(f)
                elif u in placed_at:
                    q = placed_at[u]
                    i = qid.setdefault(q, len(qpos))
                    if i == len(qpos):
                        qpos.append(q)
                    fids.append(i)
            window_parts.append(tuple(sorted(ws)))
            fixed_parts.append(tuple(fids))
        def free_dist(src: int) -> dict:
            # breadth-first through unoccupied cells, capped at window reach
            dist = {src: 0}
            frontier = [src]
            for r in range(1, L + 3):
                nxt = []
                for v in frontier:
                    for dlt in isteps:
                        q = v + dlt
                        if q not in dist and q not in iocc:
                            dist[q] = r
                            nxt.append(q)
                if not nxt:
                    break
                frontier = nxt
            return dist

        fd_maps = [free_dist(q) for q in qpos]
        mk = L + 1
        tail_memo: dict = {}
        adjset = frozenset(isteps)

        def cand_cells(pts: list, head: int, limx: int, need: int):
            # free cells next to the claimed positions scored by how many
            # claims they touch, using occupancy as of the step root so
            # results only depend on the claim layout and the head
            out = []
            top = 0
            seen = set(pts)
            for p0 in pts:
                for dlt in isteps:
                    x = p0 + dlt
                    if x in seen:
                        continue
                    seen.add(x)
                    j = iocc_get(x)
                    if j is not None and j < n0:
                        continue
                    if x == head:
                        continue
                    d = x - head
                    dj = ((d + half) & mask) - half
                    di = (d - dj) >> shift
                    if di >= 0:
                        hd = (di if di > dj else dj) if dj >= 0 else di - dj
                    else:
                        hd = dj - di if dj >= 0 else -(di if di < dj else dj)
                    if hd > limx:
                        continue
                    m = 0
                    for p in pts:
                        if p - x in adjset:
                            m += 1
                    if m > need:
                        m = need
                    if m > top:
                        top = m
                    out.append((x, m))
            return out, top

        def tail_at(head: int, first: int, hope: int | None = None) -> int:
            """Bond bound over beads first..L-1 when head holds bead first-1."""
            key = head * mk + first
            ent = tail_memo.get(key)
            if ent is None:
                fdv = [m.get(head) for m in fd_maps]
                s0 = 0
                rt = []
                refs: set = set()
                for e in range(first, L):
                    c = caps[e]
                    if not c:
                        continue
                    lim = e - first + 1
                    froz = [qpos[i] for i in fixed_parts[e]
                            if fdv[i] is not None and fdv[i] <= lim + 1]
                    fut = 0
                    win = []
                    for f in window_parts[e]:
                        if f >= first:
                            fut += 1
                        elif f == first - 1:
                            froz.append(head)
                        else:
                            win.append(f)
                    if fut >= c:
                        s0 += c
                    else:
                        s0 += fut
                        if win or froz:
                            rt.append((e, c - fut, tuple(win), tuple(froz)))
                            refs.update(win)
                ent = [s0, tuple(rt), sorted(refs), None, 0, None, ()]
                tail_memo[key] = ent
            s0, rt, refs = ent[0], ent[1], ent[2]
            if not rt:
                return s0
            sig = tuple(ipos[n0 + f] for f in refs)
            if sig != ent[3]:
                at = dict(zip(refs, sig))
                vi = s0
                layers = []
                for e, need, win, froz in rt:
                    pts = [at[f] for f in win]
                    pts += froz
                    cands, top = cand_cells(pts, head, e - first + 1, need)
                    vi += top
                    if cands:
                        layers.append((e, cands))
                ent[3] = sig
                ent[4] = vi
                ent[5] = None
                ent[6] = layers
            if hope is not None and ent[5] is None and ent[4] >= hope:
                # refine: witness cells of successive bonding beads must stay
                # within walking range of each other and never collide
                hist = {head: (first - 1, 0)}
                for e, cands in ent[6]:
                    upd = {}
                    for x, g in cands:
                        bestp = -1
                        for y, (ey, acc) in hist.items():
                            if acc <= bestp or x == y:
                                continue
                            d = x - y
                            dj = ((d + half) & mask) - half
                            di = (d - dj) >> shift
                            if di >= 0:
                                hd = ((di if di > dj else dj) if dj >= 0
                                      else di - dj)
                            else:
                                hd = (dj - di if dj >= 0
                                      else -(di if di < dj else dj))
                            if hd <= e - ey:
                                bestp = acc
                        if bestp >= 0:
                            a = bestp + g
                            if a > upd.get(x, -1):
                                upd[x] = a
                    for x, a in upd.items():
                        cur = hist.get(x)
                        if cur is None:
                            hist[x] = (e, a)
                        elif a > cur[1] or e < cur[0]:
                            hist[x] = (min(e, cur[0]), max(a, cur[1]))
                ent[5] = s0 + max(acc for _, acc in hist.values())
            return ent[4] if ent[5] is None else ent[5]

    base_bonds = len(state.bonds)
    best = -1
    achievers: dict = {}
    had_candidate = False
    new_edges: list = []
    first_holder: list = [None]

    def evaluate() -> None:
        nonlocal best
        capacity = {i: arity - deg[i] for e in new_edges for i in e}
        size, witness = max_bond_set(new_edges, capacity)
        value = base_bonds + size
        f = first_holder[0]
        if value > best:
            best = value
            achievers.clear()
        elif value < best or f in achievers:
            return
        ext = tuple((unpack(v), t) for v, t in zip(ipos[n0:], symbols))
        achievers[f] = Elongation(ext, frozenset(witness), value)

    def rec(depth: int) -> None:
        if depth == L:
            evaluate()
            return
        head = ipos[-1]
        ne = len(new_edges)
        if use_geo and depth:
            if base_bonds + ne + tail_at(head, depth,
                                         best - base_bonds - ne) < best:
                return
        idx = n0 + depth
        jcap = idx - 1
        row = okt[depth]
        cap_here = caps[depth]
        extended = False
        children = []
        for rank, dlt in enumerate(isteps):
            p = head + dlt
            if p in iocc:
                continue
            if depth == 0:
                first_holder[0] = p
                _note_candidate()
            if use_geo:
                tail = tail_at(p, depth + 1)
                if base_bonds + ne + cap_here + tail < best:
                    continue
            else:
                tail = suffix_cap[depth + 1]
            ejs = []
            for dlt2 in isteps:
                j = iocc_get(p + dlt2)
                if j is not None and j < jcap and row[j]:
                    ejs.append(j)
            children.append((-(len(ejs) + tail), rank, p, ejs))
        if len(children) > 1:
            # most promising child first so the incumbent tightens early
            children.sort()
        for key, _rank, p, ejs in children:
            if depth == 0:
                first_holder[0] = p
            optimistic = ne - key
            f = first_holder[0]
            if base_bonds + optimistic < best or (
                    base_bonds + optimistic == best and f in achievers):
                continue
            extended = True
            ipos.append(p)
            iocc[p] = idx
            for j in ejs:
                new_edges.append((j, idx))
            rec(depth + 1)
            if ejs:
                del new_edges[len(new_edges) - len(ejs):]
            del iocc[p]
            ipos.pop()
        if not extended and prefix_mode and depth > 0:
            evaluate()

    def _note_candidate() -> None:
        nonlocal had_candidate
        had_candidate = True

    if use_geo:
        # the suffix bound is tight in practice, so search by iterative
        # tightening: admit only nodes that can still reach the floor and
        # lower the floor only when nothing achieves it
        floor = base_bonds
        row0 = okt[0]
        for dlt in isteps:
            p = ipos[-1] + dlt
            if p in iocc:
                continue
            e0 = sum(1 for dlt2 in isteps
                     if (j := iocc_get(p + dlt2)) is not None
                     and j < n0 - 1 and row0[j])
            b = base_bonds + e0 + tail_at(p, 1, floor - base_bonds - e0)
            if b > floor:
                floor = b
        while True:
            best = floor
            rec(0)
            if achievers or floor <= base_bonds:
                break
            floor -= 1
    else:
        rec(0)
    if not achievers:
        reason = "trapped" if not had_candidate else "no-full-lookahead"
        return StepResult((), base_bonds, {}, reason=reason)
    out = {unpack(k): v for k, v in sorted(achievers.items())}
    return StepResult(tuple(out), best, out)


def _favorable_delay1(state: _State, sys: OritatamiSystem, t: str,
                      n0: int) -> StepResult:
    """Delay-1 fast path: score each free neighbor of the head directly."""
    if not state.positions:
        return StepResult((), 0, {}, reason="trapped")
    head = state.positions[-1]
    arity = sys.arity
    base = len(state.bonds)
    best = -1
    achievers: dict = {}
    ambiguous_best = False
    for s in STEPS:
        p = (head[0] + s[0], head[1] + s[1])
        if p in state.occ:
            continue
        edges = sorted(_potential_edges(state, sys, p, t, n0))
        size = min(len(edges), arity)
        value = base + size
        if value > best:
            best = value
            achievers = {p: Elongation(((p, t),), frozenset(edges[:size]), value)}
            ambiguous_best = len(edges) > arity
        elif value == best:
            achievers[p] = Elongation(((p, t),), frozenset(edges[:size]), value)
            ambiguous_best = ambiguous_best or len(edges) > arity
    if not achievers:
        return StepResult((), base, {}, reason="trapped")
    return StepResult(tuple(sorted(achievers)), best, achievers,
                      bond_ambiguous=ambiguous_best)


# ---------------------------------------------------------------------------
# Projections of favorable elongations


def _project_exact(state: _State, sys: OritatamiSystem, result: StepResult,
                   lookahead: str, beta: int) -> list:
    """All distinct (points, bonds) projections of favorable elongations."""
    projections: set = set()
    n0 = len(state.positions)
    t_idx = n0 - len(sys.seed.routing)
    remaining = sys.transcript.remaining(t_idx)
    L = sys.delta if remaining is None else min(sys.delta, remaining)
    keep = min(beta, L)
    symbols = sys.transcript.symbols(t_idx, L)
    target = result.max_bonds
    prefix_mode = lookahead == "prefix"
    new_edges: list = []

    def evaluate() -> None:
        capacity = {i: (sys.arity - state.degree[i]) if i < n0 else sys.arity
                    for e in new_edges for i in e}
        size, _ = max_bond_set(new_edges, capacity)
        if len(state.bonds) + size != target:
            return
        for bond_set in enumerate_max_bond_sets(new_edges, capacity):
            kept = frozenset(b for b in bond_set if b[1] < n0 + keep)
            pts = tuple(state.positions[n0:n0 + keep])
            projections.add((pts, kept))

    def rec(depth: int) -> None:
        if depth == L:
            evaluate()
            return
        head = state.positions[-1]
        t = symbols[depth]
        idx = n0 + depth
        extended = False
        for s in STEPS:
            p = (head[0] + s[0], head[1] + s[1])
            if p in state.occ:
                continue
            edges = _potential_edges(state, sys, p, t, idx)
            state.push(p, t)
            new_edges.extend(edges)
            extended = True
            rec(depth + 1)
            del new_edges[len(new_edges) - len(edges):]
            state.pop()
        if not extended and prefix_mode and depth > 0:
            evaluate()

    rec(0)
    return sorted(projections)


def _project_canonical(state: _State, sys: OritatamiSystem, pos: Point,
                       bead_type: str) -> tuple:
    """Canonical kept-bond set for a bead stabilized at pos: all potential
    bonds to earlier beads, lowest partner indices first when arity forces a
    choice."""
    n0 = len(state.positions)
    edges = sorted(_potential_edges(state, sys, pos, bead_type, n0))
    return tuple(edges[:sys.arity]), len(edges) > sys.arity


# ---------------------------------------------------------------------------
# Folding


def fold(sys: OritatamiSystem, max_steps: int, *,
         mode: str = "require-deterministic", lookahead: str = "full",
         projection: str = "exact", branch_budget: int = 10_000):
    """Run the dynamics from the seed.

    require-deterministic mode returns a FoldTrace that advances while every
    step has exactly one outcome and stops with a nondeterminism report
    otherwise.  explore-all mode breadth-explores every branch up to
    branch_budget and returns an ExploreReport.
    """
    if mode == "require-deterministic":
        return _fold_deterministic(sys, max_steps, lookahead, projection)
    if mode == "explore-all":
        return _fold_explore(sys, max_steps, lookahead, branch_budget)
    raise ValueError(f"unknown mode: {mode}")


def _fold_deterministic(sys: OritatamiSystem, max_steps: int, lookahead: str,
                        projection: str) -> FoldTrace:
    trace = FoldTrace(sys)
    state = _State(sys.seed)
    beta = sys.beta
    for step in range(max_steps):
        result = _favorable(state, sys, lookahead=lookahead)
        if result.terminal:
            if result.reason == "transcript-exhausted":
                trace.status = "transcript-exhausted"
            else:
                trace.status = "terminal"
                trace.terminal_reason = result.reason
            break
        if len(result.next_positions) > 1:
            trace.status = "nondeterministic"
            trace.nondet_positions = result.next_positions
            trace.nondet_step = step
            trace.nondet_kind = "position"
            break
        pos = result.next_positions[0]
        n0 = len(state.positions)
        t_idx = n0 - len(sys.seed.routing)
        if projection == "exact":
            projections = _project_exact(state, sys, result, lookahead, beta)
            if len(projections) > 1:
                trace.status = "nondeterministic"
                trace.nondet_positions = result.next_positions
                trace.nondet_step = step
                trace.nondet_kind = "bond"
                break
            pts, kept = projections[0]
        else:
            bead_type = sys.transcript.symbol(t_idx)
            kept_list, ambiguous = _project_canonical(state, sys, pos, bead_type)
            pts, kept = (pos,), frozenset(kept_list)
            if beta > 1:
                witness = result.witnesses[pos]
                keep = min(beta, len(witness.extension))
                pts = tuple(p for p, _ in witness.extension[:keep])
                kept = frozenset(b for b in witness.new_bonds
                                 if b[1] < n0 + keep)
        for offset, p in enumerate(pts):
            state.push(p, sys.transcript.symbol(t_idx + offset))
        new_bonds = tuple(sorted(kept))
        for i, j in new_bonds:
            state.add_bond(i, j)
        trace.steps.append(StepRecord(
            step=step, point=pts[0],
            bead_type=state.types[n0],
            max_bonds=result.max_bonds,
            candidates=len(result.next_positions),
            new_bonds=new_bonds))
    else:
        trace.status = "max-steps"
    trace.final = state.configuration()
    return trace


def _fold_explore(sys: OritatamiSystem, max_steps: int, lookahead: str,
                  branch_budget: int) -> ExploreReport:
    frontier: list[Configuration] = [sys.seed]
    first_branch: int | None = None
    branches = 0
    terminals: list[Configuration] = []
    truncated = False
    for step in range(max_steps):
        next_frontier: list[Configuration] = []
        seen: set = set()
        for conf in frontier:
            state = _State(conf)
            result = _favorable(state, sys, lookahead=lookahead)
            if result.terminal:
                terminals.append(conf)
                continue
            outcomes = _project_exact(state, sys, result, lookahead, sys.beta)
            if len(outcomes) > 1 and first_branch is None:
                first_branch = step
            n0 = len(state.positions)
            t_idx = n0 - len(sys.seed.routing)
            for pts, kept in outcomes:
                branches += 1
                if branches > branch_budget:
                    truncated = True
                    break
                beads = list(conf.routing.beads)
                for offset, p in enumerate(pts):
                    beads.append((p, sys.transcript.symbol(t_idx + offset)))
                child = Configuration(Routing(tuple(beads)),
                                      conf.bonds | frozenset(kept))
                key = (tuple(child.routing.beads), child.bonds)
                if key not in seen:
                    seen.add(key)
                    next_frontier.append(child)
            if truncated:
                break
        frontier = next_frontier
        if truncated or not frontier:
            break
    status = "budget-exceeded" if truncated else "complete"
    return ExploreReport(status, terminals, frontier, first_branch, branches)


def terminal_shape(trace: FoldTrace) -> Shape:
    """Point set of the final configuration of a finished fold."""
    if trace.final is None or trace.status == "running":
        raise ValueError("fold is not finished")
    return Shape(trace.final.domain())


# ---------------------------------------------------------------------------
# Trace export and period detection


def trace_jsonl(trace: FoldTrace) -> str:
    """One line per step: step, stabilized bead, bond score, candidate count."""
    import json

    lines = []
    for r in trace.steps:
        lines.append(json.dumps({
            "step": r.step,
            "bead": [r.point[0], r.point[1], r.bead_type],
            "max_bonds": r.max_bonds,
            "candidates": r.candidates,
        }))
    return "\n".join(lines) + ("\n" if lines else "")


def detect_spatial_period(trace: FoldTrace, max_period: int = 60):
    """Find (offset, period, shift) such that from `offset` on, stabilized
    bead k + period repeats bead k's type displaced by the constant nonzero
    `shift`.  Returns None when no period fits."""
    beads = [(r.point, r.bead_type) for r in trace.steps]
    n = len(beads)
    for period in range(1, min(max_period, n // 2) + 1):
        for offset in range(0, n - 2 * period):
            p0, t0 = beads[offset]
            p1, t1 = beads[offset + period]
            shift = (p1[0] - p0[0], p1[1] - p0[1])
            if shift == (0, 0):
                continue
            ok = True
            for k in range(offset, n - period):
                (pa, ta), (pb, tb) = beads[k], beads[k + period]
                if ta != tb or (pb[0] - pa[0], pb[1] - pa[1]) != shift:
                    ok = False
                    break
            if ok:
                return offset, period, shift
    return None
