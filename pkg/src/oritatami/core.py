"""Core data model: bead types, rule sets, routings, configurations, systems.

A routing is a directed self-avoiding path of typed beads on the lattice.  A
configuration adds a bond set: index pairs (i, j) with j >= i + 2 whose beads
sit on adjacent points.  A system bundles alphabet, transcript, rule set,
delay, extension length, arity and a seed configuration.

Serialization uses canonical JSON documents with deterministic field order so
equal values always produce identical bytes.  See FORMATS.md for the schemas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .lattice import Point, adjacent, neighbors

BeadType = str


class ParseError(ValueError):
    """Raised on malformed documents; message carries location context."""


# ---------------------------------------------------------------------------
# Rule sets


class RuleSet:
    """A symmetric attraction relation over bead types."""

    __slots__ = ("_partners", "_pairs")

    def __init__(self, pairs: Iterable[tuple[BeadType, BeadType]] = ()):
        partners: dict[BeadType, set[BeadType]] = {}
        canon = set()
        for a, b in pairs:
            partners.setdefault(a, set()).add(b)
            partners.setdefault(b, set()).add(a)
            canon.add((a, b) if a <= b else (b, a))
        self._partners = {t: frozenset(s) for t, s in partners.items()}
        self._pairs = frozenset(canon)

    def attracts(self, a: BeadType, b: BeadType) -> bool:
        return b in self._partners.get(a, ())

    def partners(self, a: BeadType) -> frozenset:
        return self._partners.get(a, frozenset())

    @property
    def pairs(self) -> frozenset:
        """Canonical unordered pairs, each as a sorted tuple."""
        return self._pairs

    def __eq__(self, other) -> bool:
        return isinstance(other, RuleSet) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __repr__(self) -> str:
        return f"RuleSet({sorted(self._pairs)!r})"


# ---------------------------------------------------------------------------
# Transcripts


@dataclass(frozen=True)
class Transcript:
    """A finite or eventually periodic bead-type sequence.

    Finite transcripts have an empty period.  Symbols are materialized lazily;
    an infinite transcript never gets expanded wholesale.
    """

    prefix: tuple[BeadType, ...] = ()
    period: tuple[BeadType, ...] = ()

    @property
    def finite(self) -> bool:
        return not self.period

    @property
    def length(self) -> int | None:
        """Symbol count for finite transcripts, None for infinite ones."""
        return len(self.prefix) if self.finite else None

    def symbol(self, k: int) -> BeadType:
        if k < len(self.prefix):
            return self.prefix[k]
        if not self.period:
            raise IndexError(f"transcript index {k} out of range")
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def remaining(self, k: int) -> int | None:
        """Number of symbols at index >= k, None if infinite."""
        if not self.finite:
            return None
        return max(0, len(self.prefix) - k)

    def symbols(self, start: int, count: int) -> list[BeadType]:
        return [self.symbol(start + i) for i in range(count)]

    def types_used(self) -> frozenset:
        return frozenset(self.prefix) | frozenset(self.period)


# ---------------------------------------------------------------------------
# Routings and configurations


@dataclass(frozen=True)
class Routing:
    """A directed self-avoiding typed bead path."""

    beads: tuple[tuple[Point, BeadType], ...]

    def __post_init__(self):
        pts = [p for p, _ in self.beads]
        if len(set(pts)) != len(pts):
            raise ValueError("routing revisits a point")
        for a, b in zip(pts, pts[1:]):
            if not adjacent(a, b):
                raise ValueError(f"routing step {a} -> {b} is not a lattice edge")

    @property
    def points(self) -> list[Point]:
        return [p for p, _ in self.beads]

    @property
    def types(self) -> list[BeadType]:
        return [t for _, t in self.beads]

    def __len__(self) -> int:
        return len(self.beads)

    def __getitem__(self, i: int) -> tuple[Point, BeadType]:
        return self.beads[i]

    def __iter__(self) -> Iterator[tuple[Point, BeadType]]:
        return iter(self.beads)


@dataclass(frozen=True)
class Configuration:
    """A routing plus a set of bonds (index pairs i < j, j >= i + 2)."""

    routing: Routing
    bonds: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "bonds", frozenset((min(i, j), max(i, j)) for i, j in self.bonds)
        )

    def __len__(self) -> int:
        return len(self.routing)

    def __getitem__(self, i: int) -> tuple[Point, BeadType]:
        return self.routing.beads[i]

    @property
    def points(self) -> list[Point]:
        return self.routing.points

    def domain(self) -> frozenset:
        return frozenset(self.routing.points)


def bond_count(c: Configuration) -> int:
    return len(c.bonds)


def arity_of(c: Configuration) -> int:
    """Largest number of bonds incident to any single bead (0 if bond-free)."""
    if not c.bonds:
        return 0
    counts: dict[int, int] = {}
    for i, j in c.bonds:
        counts[i] = counts.get(i, 0) + 1
        counts[j] = counts.get(j, 0) + 1
    return max(counts.values())


def potential_bonds(c: Configuration, rules: RuleSet) -> frozenset:
    """All index pairs that could bond: non-consecutive, adjacent, attracting."""
    beads = c.routing.beads
    index_at = {p: i for i, (p, _) in enumerate(beads)}
    found = set()
    for i, (p, t) in enumerate(beads):
        for q in neighbors(p):
            j = index_at.get(q)
            if j is not None and j >= i + 2 and rules.attracts(t, beads[j][1]):
                found.add((i, j))
    return frozenset(found)


def validate(c: Configuration, rules: RuleSet, arity: int) -> str | None:
    """First violated invariant as a message, or None when the configuration
    is valid: self-avoiding routing, adjacent non-consecutive bonds respecting
    the rule set, and at most `arity` bonds per bead."""
    beads = c.routing.beads
    seen: dict[Point, int] = {}
    for i, (p, _) in enumerate(beads):
        if p in seen:
            return f"self-intersection: beads {seen[p]} and {i} share {p}"
        seen[p] = i
    for a, b in zip(beads, beads[1:]):
        if not adjacent(a[0], b[0]):
            return f"routing break: {a[0]} -> {b[0]} is not a lattice edge"
    incident: dict[int, int] = {}
    for i, j in sorted(c.bonds):
        if not (0 <= i < len(beads) and 0 <= j < len(beads)):
            return f"bond ({i},{j}) indexes outside the routing"
        if j < i + 2:
            return f"bond ({i},{j}) joins consecutive or identical beads"
        if not adjacent(beads[i][0], beads[j][0]):
            return f"bond ({i},{j}) joins non-adjacent points"
        if not rules.attracts(beads[i][1], beads[j][1]):
            return f"bond ({i},{j}) joins non-attracting types " \
                   f"{beads[i][1]}, {beads[j][1]}"
        incident[i] = incident.get(i, 0) + 1
        incident[j] = incident.get(j, 0) + 1
    for i, n in sorted(incident.items()):
        if n > arity:
            return f"bead {i} carries {n} bonds, arity is {arity}"
    return None


# ---------------------------------------------------------------------------
# Shapes


class Shape:
    """A finite connected set of lattice points."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable[Point]):
        pts = frozenset((int(i), int(j)) for i, j in points)
        if not pts:
            raise ValueError("shape is empty")
        if not _connected(pts):
            raise ValueError("shape is not connected")
        object.__setattr__(self, "points", pts)

    def __setattr__(self, *a):
        raise AttributeError("Shape is immutable")

    def __contains__(self, p: Point) -> bool:
        return p in self.points

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(sorted(self.points))

    def __eq__(self, other) -> bool:
        return isinstance(other, Shape) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"Shape({sorted(self.points)!r})"


def _connected(pts: frozenset) -> bool:
    start = next(iter(pts))
    seen = {start}
    stack = [start]
    while stack:
        p = stack.pop()
        for q in neighbors(p):
            if q in pts and q not in seen:
                seen.add(q)
                stack.append(q)
    return len(seen) == len(pts)


# ---------------------------------------------------------------------------
# Systems


@dataclass(frozen=True)
class OritatamiSystem:
    """The full system description: (alphabet, transcript, rules, delta, beta,
    arity, seed)."""

    alphabet: frozenset
    transcript: Transcript
    rules: RuleSet
    delta: int
    arity: int
    seed: Configuration
    beta: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if not 1 <= self.arity <= 6:
            raise ValueError("arity must be in [1, 6]")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        missing = self.transcript.types_used() - self.alphabet
        if missing:
            raise ValueError(f"transcript uses types outside alphabet: {sorted(missing)}")
        bad_seed = {t for _, t in self.seed.routing.beads} - self.alphabet
        if bad_seed:
            raise ValueError(f"seed uses types outside alphabet: {sorted(bad_seed)}")
        problem = validate(self.seed, self.rules, self.arity)
        if problem is not None:
            raise ValueError(f"invalid seed: {problem}")


# ---------------------------------------------------------------------------
# Congruence (equality up to lattice symmetry), used mainly by tests


def shapes_congruent(a: Shape, b: Shape) -> bool:
    from .lattice import canonical_translate, point_group

    if len(a) != len(b):
        return False
    target, _ = canonical_translate(a.points)
    for t in point_group():
        moved, _ = canonical_translate(t.apply_all(b.points))
        if moved == target:
            return True
    return False


def configurations_congruent(a: Configuration, b: Configuration) -> bool:
    from .lattice import point_group

    if len(a) != len(b) or a.bonds != b.bonds:
        return False
    if a.routing.types != b.routing.types:
        return False
    pa, pb = a.points, b.points
    for t in point_group():
        moved = t.apply_all(pb)
        di = pa[0][0] - moved[0][0]
        dj = pa[0][1] - moved[0][1]
        if all((p[0] + di, p[1] + dj) == q for p, q in zip(moved, pa)):
            return True
    return False


# ---------------------------------------------------------------------------
# Canonical documents


def shape_to_doc(s: Shape) -> dict:
    return {"points": [list(p) for p in sorted(s.points)]}


def shape_from_doc(doc: dict) -> Shape:
    _expect(doc, "shape", "points", list)
    pts = [_point(entry, f"points[{k}]") for k, entry in enumerate(doc["points"])]
    try:
        return Shape(pts)
    except ValueError as exc:
        raise ParseError(f"shape: {exc}") from exc


def configuration_to_doc(c: Configuration) -> dict:
    return {
        "beads": [[p[0], p[1], t] for p, t in c.routing.beads],
        "bonds": [list(b) for b in sorted(c.bonds)],
    }


def configuration_from_doc(doc: dict) -> Configuration:
    _expect(doc, "configuration", "beads", list)
    _expect(doc, "configuration", "bonds", list)
    beads = []
    for k, entry in enumerate(doc["beads"]):
        where = f"beads[{k}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ParseError(f"{where}: expected [i, j, type]")
        i, j, t = entry
        if not (isinstance(i, int) and not isinstance(i, bool)
                and isinstance(j, int) and not isinstance(j, bool)
                and isinstance(t, str)):
            raise ParseError(f"{where}: expected [int, int, str]")
        beads.append(((i, j), t))
    bonds = set()
    for k, entry in enumerate(doc["bonds"]):
        where = f"bonds[{k}]"
        if not (isinstance(entry, list) and len(entry) == 2
                and all(isinstance(x, int) for x in entry)):
            raise ParseError(f"{where}: expected [i, j] with integers")
        bonds.add((entry[0], entry[1]))
    try:
        return Configuration(Routing(tuple(beads)), frozenset(bonds))
    except ValueError as exc:
        raise ParseError(f"configuration: {exc}") from exc


def system_to_doc(sys: OritatamiSystem) -> dict:
    return {
        "alphabet": sorted(sys.alphabet),
        "transcript": {
            "prefix": list(sys.transcript.prefix),
            "period": list(sys.transcript.period),
        },
        "rules": [list(p) for p in sorted(sys.rules.pairs)],
        "delta": sys.delta,
        "beta": sys.beta,
        "arity": sys.arity,
        "seed": configuration_to_doc(sys.seed),
    }


def system_from_doc(doc: dict) -> OritatamiSystem:
    for key, kind in (("alphabet", list), ("transcript", dict), ("rules", list),
                      ("delta", int), ("beta", int), ("arity", int), ("seed", dict)):
        _expect(doc, "system", key, kind)
    for k, t in enumerate(doc["alphabet"]):
        if not isinstance(t, str):
            raise ParseError(f"alphabet[{k}]: expected a string")
    tdoc = doc["transcript"]
    _expect(tdoc, "transcript", "prefix", list)
    _expect(tdoc, "transcript", "period", list)
    for name in ("prefix", "period"):
        for k, t in enumerate(tdoc[name]):
            if not isinstance(t, str):
                raise ParseError(f"transcript.{name}[{k}]: expected a string")
    rules = []
    for k, entry in enumerate(doc["rules"]):
        if not (isinstance(entry, list) and len(entry) == 2
                and all(isinstance(x, str) for x in entry)):
            raise ParseError(f"rules[{k}]: expected [type, type]")
        rules.append((entry[0], entry[1]))
    try:
        return OritatamiSystem(
            alphabet=frozenset(doc["alphabet"]),
            transcript=Transcript(tuple(tdoc["prefix"]), tuple(tdoc["period"])),
            rules=RuleSet(rules),
            delta=doc["delta"],
            beta=doc["beta"],
            arity=doc["arity"],
            seed=configuration_from_doc(doc["seed"]),
        )
    except ValueError as exc:
        raise ParseError(f"system: {exc}") from exc


def dumps(doc: dict) -> str:
    """Canonical JSON text: fixed key order as built, 2-space indent."""
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed document at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object")
    return doc


def serialize_shape(s: Shape) -> str:
    return dumps(shape_to_doc(s))


def deserialize_shape(text: str) -> Shape:
    return shape_from_doc(loads(text))


def serialize_system(sys: OritatamiSystem) -> str:
    return dumps(system_to_doc(sys))


def deserialize_system(text: str) -> OritatamiSystem:
    return system_from_doc(loads(text))


def _expect(doc: dict, ctx: str, key: str, kind: type) -> None:
    if key not in doc:
        raise ParseError(f"{ctx}: missing key '{key}'")
    value = doc[key]
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"{ctx}.{key}: expected an integer")
    elif not isinstance(value, kind):
        raise ParseError(f"{ctx}.{key}: expected {kind.__name__}")


def _point(entry, where: str) -> Point:
    if not (isinstance(entry, list) and len(entry) == 2
            and all(isinstance(x, int) and not isinstance(x, bool) for x in entry)):
        raise ParseError(f"{where}: expected [i, j] with integers")
    return (entry[0], entry[1])
