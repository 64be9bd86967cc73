"""Scale-2 compiler with one bead type per cycle position and full delay.

The shape is scaled, a Hamiltonian cycle is threaded through it, and every
cycle position gets its own bead type.  The rule set records exactly the
adjacencies the cycle does not already realize as path steps, so the one
conformation tracing the cycle collects every bond the rules allow.  With
the delay spanning the whole remaining transcript, the dynamics commit to
that conformation bead by bead from a three-bead seed.
"""

from __future__ import annotations

from .core import (
    Configuration,
    OritatamiSystem,
    Routing,
    RuleSet,
    Shape,
    Transcript,
)
from .hc import HcError, build_hc
from .lattice import adjacent, neighbors


def compile_hardcoded(s: Shape, sch) -> OritatamiSystem:
    """System with |S'| bead types whose unique fold traces the cycle.

    Delay is |S'| - 3: every step scores the entire remaining transcript.
    """
    _, _, cycle = build_hc(s, sch)
    n = len(cycle)
    types = tuple(f"b{i}" for i in range(n))
    pairs = []
    for i in range(n):
        for j in range(i + 2, n):
            if adjacent(cycle[i], cycle[j]):
                pairs.append((types[i], types[j]))
    rules = RuleSet(pairs)
    degree = _designed_degrees(cycle)
    if max(degree) > 4:
        raise HcError("cycle rooting needs more than four bonds on a bead")
    seed_bonds = [(0, 2)] if adjacent(cycle[0], cycle[2]) else []
    seed = Configuration(
        Routing(tuple((cycle[i], types[i]) for i in range(3))), seed_bonds)
    return OritatamiSystem(
        alphabet=types,
        transcript=Transcript(types[3:], ()),
        rules=rules, delta=n - 3, arity=4, seed=seed,
    )


def _designed_degrees(cycle) -> list:
    pts = {p: i for i, p in enumerate(cycle)}
    degree = [0] * len(cycle)
    for i, p in enumerate(cycle):
        for q in neighbors(p):
            j = pts.get(q)
            if j is not None and abs(j - i) > 1:
                degree[i] += 1
    return degree


def designed_configuration(sys: OritatamiSystem) -> Configuration:
    """Rebuild the target conformation from the system alone.

    Every bead must sit so its earlier neighbors are exactly its rule
    partners; backtracking over placements must leave a single conformation
    satisfying that for the whole transcript.  All non-consecutive adjacent
    pairs are bonded.
    """
    seed = sys.seed.routing.beads
    points = [p for p, _ in seed]
    types = [t for _, t in seed]
    k = 0
    while sys.transcript.remaining(k):
        types.append(sys.transcript.symbol(k))
        k += 1
    if len(set(types)) != len(types):
        raise ValueError("bead types are not unique to positions")
    index = {t: i for i, t in enumerate(types)}
    n = len(types)
    want = [None] * n
    for i in range(3, n):
        want[i] = frozenset(
            {index[t] for t in sys.rules.partners(types[i])
             if index[t] < i - 1} | {i - 1})
    occupied = {p: i for i, p in enumerate(points)}
    sols: list = []

    def rec(i):
        if len(sols) > 1:
            return
        if i == n:
            sols.append(list(points))
            return
        for q in sorted(neighbors(points[i - 1])):
            if q in occupied:
                continue
            seen = {occupied[r] for r in neighbors(q) if r in occupied}
            if seen != want[i]:
                continue
            points.append(q)
            occupied[q] = i
            rec(i + 1)
            del occupied[q]
            points.pop()

    rec(3)
    if len(sols) != 1:
        raise ValueError(
            f"{len(sols)} conformations realize the rules, expected one")
    final = sols[0]
    occupied = {p: i for i, p in enumerate(final)}
    bonds = []
    for i, p in enumerate(final):
        for q in neighbors(p):
            j = occupied.get(q)
            if j is not None and j > i + 1:
                bonds.append((i, j))
    return Configuration(Routing(tuple(zip(final, types))), bonds)
