"""Triangular-lattice geometry: points, directions, neighborhoods, symmetries.

Points are axial integer pairs (i, j) embedded in the plane as i*X + j*Y with
X = (1, 0) and Y = (-1/2, -sqrt(3)/2), so j grows toward the south-west.  Two
points are adjacent iff their difference is one of the six unit steps.  All
geometry is integer arithmetic; the Euclidean embedding exists only for
rendering.

Lattice directions are small ints in the fixed clockwise order
NW, NE, E, SE, SW, W (indices 0..5).  This order is canonical: every
enumeration that needs a tie-break uses it.  Cell directions (the six 30
degree offset directions used to name hexagon sides and cell neighbors) use
the same clockwise indexing cNW, cN, cNE, cSE, cS, cSW.
"""

from __future__ import annotations

from dataclasses import dataclass

Point = tuple[int, int]

# Lattice directions, clockwise.
NW, NE, E, SE, SW, W = range(6)
DIRECTIONS = (NW, NE, E, SE, SW, W)
DIR_NAMES = ("NW", "NE", "E", "SE", "SW", "W")
DIR_BY_NAME = {name: d for d, name in enumerate(DIR_NAMES)}

# Unit step of each direction in axial coordinates.
STEPS: tuple[Point, ...] = ((-1, -1), (0, -1), (1, 0), (1, 1), (0, 1), (-1, 0))
STEP_TO_DIR = {v: d for d, v in enumerate(STEPS)}

# Cell directions, clockwise, offset 30 degrees counterclockwise from the
# same-index lattice direction (cNW sits between W and NW, cN between NW and
# NE, and so on).
cNW, cN, cNE, cSE, cS, cSW = range(6)
CELL_DIRECTIONS = (cNW, cN, cNE, cSE, cS, cSW)
CELL_DIR_NAMES = ("cNW", "cN", "cNE", "cSE", "cS", "cSW")
CELL_DIR_BY_NAME = {name: c for c, name in enumerate(CELL_DIR_NAMES)}

SQRT3 = 3.0 ** 0.5


def step(p: Point, d: int) -> Point:
    """The neighbor of p in direction d."""
    s = STEPS[d]
    return (p[0] + s[0], p[1] + s[1])


def neighbors(p: Point) -> list[Point]:
    """The six neighbors of p, in canonical direction order."""
    i, j = p
    return [(i + di, j + dj) for di, dj in STEPS]


def adjacent(p: Point, q: Point) -> bool:
    return (q[0] - p[0], q[1] - p[1]) in STEP_TO_DIR


def direction_between(p: Point, q: Point) -> int | None:
    """Direction d with step(p, d) == q, or None if p, q are not adjacent."""
    return STEP_TO_DIR.get((q[0] - p[0], q[1] - p[1]))


def distance(p: Point, q: Point) -> int:
    """Length of a shortest lattice path from p to q."""
    di = q[0] - p[0]
    dj = q[1] - p[1]
    if (di >= 0) == (dj >= 0):
        return max(abs(di), abs(dj))
    return abs(di) + abs(dj)


def opposite(d: int) -> int:
    return (d + 3) % 6


def cw(d: int, k: int = 1) -> int:
    """Direction (or cell direction) rotated k times 60 degrees clockwise."""
    return (d + k) % 6


def ccw(d: int, k: int = 1) -> int:
    return (d - k) % 6


def cell_dir_of_lattice_ccw(d: int) -> int:
    """The cell direction 30 degrees counterclockwise of lattice direction d."""
    return d


def lattice_dir_of_cell_ccw(c: int) -> int:
    """The lattice direction 30 degrees counterclockwise of cell direction c."""
    return (c - 1) % 6


def euclid(p: Point) -> tuple[float, float]:
    """Euclidean embedding of an axial point."""
    i, j = p
    return (i - 0.5 * j, -0.5 * SQRT3 * j)


def rotate60(p: Point, k: int = 1) -> Point:
    """Rotate p by k*60 degrees counterclockwise about the origin."""
    i, j = p
    for _ in range(k % 6):
        i, j = j, j - i
    return (i, j)


def reflect_e(p: Point) -> Point:
    """Reflect p across the E axis through the origin."""
    i, j = p
    return (i - j, -j)


@dataclass(frozen=True)
class Isometry:
    """A lattice symmetry: optional reflection, then rotation, then shift.

    The twelve (rot, reflect) combinations form the dihedral group of the
    hexagon; together with translations these are exactly the maps that
    preserve lattice adjacency.
    """

    rot: int = 0
    reflect: bool = False
    shift: Point = (0, 0)

    def apply(self, p: Point) -> Point:
        if self.reflect:
            p = reflect_e(p)
        p = rotate60(p, self.rot)
        return (p[0] + self.shift[0], p[1] + self.shift[1])

    def apply_all(self, points) -> list[Point]:
        return [self.apply(p) for p in points]

    def direction(self, d: int) -> int:
        """The image of lattice direction d (translation plays no part)."""
        v = STEPS[d]
        if self.reflect:
            v = reflect_e(v)
        return STEP_TO_DIR[rotate60(v, self.rot)]

    def compose(self, inner: "Isometry") -> "Isometry":
        """The isometry mapping p to self.apply(inner.apply(p))."""
        a = self.apply(inner.apply((0, 0)))
        b = self.apply(inner.apply((1, 0)))
        c = self.apply(inner.apply((0, 1)))
        return _from_images(a, b, c)

    def inverse(self) -> "Isometry":
        if self.reflect:
            rot, reflect = self.rot, True
        else:
            rot, reflect = (-self.rot) % 6, False
        inv = Isometry(rot, reflect, (0, 0))
        s = inv.apply(self.shift)
        return Isometry(rot, reflect, (-s[0], -s[1]))


def _from_images(o: Point, e1: Point, e2: Point) -> Isometry:
    """Reconstruct the isometry sending (0,0), (1,0), (0,1) to o, e1, e2."""
    u = (e1[0] - o[0], e1[1] - o[1])
    for reflect in (False, True):
        for rot in range(6):
            t = Isometry(rot, reflect, (0, 0))
            if t.apply((1, 0)) == u and (
                t.apply((0, 1)) == (e2[0] - o[0], e2[1] - o[1])
            ):
                return Isometry(rot, reflect, o)
    raise ValueError("images do not define a lattice isometry")


IDENTITY = Isometry()


def point_group() -> list[Isometry]:
    """The 12 origin-fixing symmetries, rotations first."""
    return [Isometry(rot, reflect) for reflect in (False, True) for rot in range(6)]


def canonical_translate(points) -> tuple[frozenset, Point]:
    """Translate a point set so its lexicographically least point is (0,0).

    Returns (translated set, applied shift).
    """
    base = min(points)
    shift = (-base[0], -base[1])
    moved = frozenset((p[0] + shift[0], p[1] + shift[1]) for p in points)
    return moved, shift
