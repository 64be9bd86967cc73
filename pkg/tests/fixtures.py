"""Shared fixture systems and random generators for the test suite."""

import random

from oritatami.core import (
    Configuration,
    OritatamiSystem,
    Routing,
    RuleSet,
    Transcript,
)
from oritatami.lattice import STEPS, neighbors


def glider():
    """Delay-3 arity-1 glider: advances by (2, 0) every 6 beads."""
    rules = RuleSet([("a", "A"), ("b", "B")])
    seed = Configuration(
        Routing((((0, 0), "a"), ((1, 1), "x"), ((1, 2), "B"),
                 ((2, 2), "b"), ((2, 1), "y"), ((1, 0), "A"))),
        [(0, 5)],
    )
    return OritatamiSystem(
        alphabet=("a", "A", "b", "B", "x", "y"),
        transcript=Transcript((), ("a", "x", "B", "b", "y", "A")),
        rules=rules, delta=3, arity=1, seed=seed,
    )


def reinforced_glider():
    """Delay-2 arity-2 glider over the same routing, no inert beads."""
    rules = RuleSet([("a", "A"), ("b", "B")])
    seed = Configuration(
        Routing((((0, 0), "a"), ((1, 1), "B"), ((1, 2), "B"),
                 ((2, 2), "b"), ((2, 1), "A"), ((1, 0), "A"))),
        [(0, 5), (1, 3)],
    )
    return OritatamiSystem(
        alphabet=("a", "A", "b", "B"),
        transcript=Transcript((), ("a", "B", "B", "b", "A", "A")),
        rules=rules, delta=2, arity=2, seed=seed,
    )


def zigzag():
    """Delay-1 arity-2 zigzag: every bead bonds its second predecessor."""
    rules = RuleSet([("a", "A"), ("b", "B")])
    seed = Configuration(
        Routing((((0, 0), "a"), ((0, -1), "b"), ((1, 0), "A"))),
        [(0, 2)],
    )
    return OritatamiSystem(
        alphabet=("a", "A", "b", "B"),
        transcript=Transcript((), ("B", "a", "b", "A")),
        rules=rules, delta=1, arity=2, seed=seed,
    )


def tunnel_system():
    """Delay-1 seed whose head sits in a tunnel: walls block all but one
    neighbor, so the next bead stabilizes there bond-free."""
    walls = [((0, -1), "w"), ((1, 0), "w"), ((1, 1), "w"),
             ((0, 1), "w"), ((-1, 0), "w"), ((0, 0), "a")]
    seed = Configuration(Routing(tuple(walls)), [])
    return OritatamiSystem(
        alphabet=("a", "w"),
        transcript=Transcript(("a",), ()),
        rules=RuleSet([]), delta=1, arity=1, seed=seed,
    )


def random_walk(rng, n, start=(0, 0)):
    """Random self-avoiding walk of n points, restarting on jams."""
    while True:
        pts = [start]
        occ = {start}
        while len(pts) < n:
            options = [q for q in neighbors(pts[-1]) if q not in occ]
            if not options:
                break
            q = rng.choice(options)
            pts.append(q)
            occ.add(q)
        if len(pts) == n:
            return pts


def random_system(rng, *, max_beads=12, max_delta=3):
    """Random small system with a bonded seed, for oracle cross-checks."""
    n_types = rng.randint(2, 6)
    alphabet = tuple(f"t{i}" for i in range(n_types))
    n_pairs = rng.randint(1, n_types + 1)
    pairs = [(rng.choice(alphabet), rng.choice(alphabet)) for _ in range(n_pairs)]
    rules = RuleSet(pairs)
    arity = rng.randint(1, 3)
    delta = rng.randint(1, max_delta)

    n_seed = rng.randint(2, max_beads)
    pts = random_walk(rng, n_seed)
    beads = tuple((p, rng.choice(alphabet)) for p in pts)
    routing = Routing(beads)

    # fill the seed with a random valid subset of its potential bonds
    occ = {p: i for i, (p, _) in enumerate(beads)}
    degree = [0] * n_seed
    bonds = []
    candidates = []
    for i, (p, t) in enumerate(beads):
        for q in neighbors(p):
            j = occ.get(q)
            if j is not None and j >= i + 2 and rules.attracts(t, beads[j][1]):
                candidates.append((i, j))
    rng.shuffle(candidates)
    for i, j in candidates:
        if degree[i] < arity and degree[j] < arity and rng.random() < 0.7:
            bonds.append((i, j))
            degree[i] += 1
            degree[j] += 1
    seed = Configuration(routing, bonds)

    if rng.random() < 0.5:
        transcript = Transcript(
            tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 8))), ())
    else:
        transcript = Transcript(
            tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 3))),
            tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 4))))
    return OritatamiSystem(
        alphabet=alphabet, transcript=transcript, rules=rules,
        delta=delta, arity=arity, seed=seed,
    )


def random_connected_shape(rng, n, start=(0, 0)):
    """Random connected n-point shape grown by boundary accretion."""
    pts = {start}
    frontier = set(neighbors(start))
    while len(pts) < n:
        q = rng.choice(sorted(frontier))
        pts.add(q)
        frontier.discard(q)
        frontier.update(p for p in neighbors(q) if p not in pts)
    return frozenset(pts)
