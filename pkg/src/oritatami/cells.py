"""Cell-side geometry for the delay-1 compilers.

Each scaled cell is a hexagon whose six sides are indexed by cell direction.
A clean edge on the side of an occupied cell is always oriented the same
way: counterclockwise around the occupied cell, which is clockwise around
the empty neighbor the side faces.  Side vertices are therefore listed in
that orientation, and each side kind fixes one designated edge where a
later insertion plugs in.

The cell-direction index of a side equals the lattice-direction index of
the shape neighbor it faces: side c of the cell of p faces the cell of
p + STEPS[c].
"""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import Point, STEPS, cw, opposite, step
from .scaling import ScalingScheme, mold_points

# Orientation of any clean edge on side c of an occupied cell.
def side_direction(c: int) -> int:
    return (c - 2) % 6


def facing_side(host: Point, neighbor: Point) -> int:
    """Side index of the host cell that faces the neighbor cell."""
    d = (neighbor[0] - host[0], neighbor[1] - host[1])
    try:
        return STEPS.index(d)
    except ValueError:
        raise ValueError(f"{host} and {neighbor} are not shape neighbors")


C_LARGER_SIDES = frozenset({0, 2, 4})  # cNW, cNE, cS


def _c_side_start(n: int, c: int) -> Point:
    return {
        0: (-n + 1, -n + 1),  # NW corner, heading SW
        1: (0, -n + 1),       # NE corner, heading W
        2: (n, 1),            # E corner, heading NW
        3: (n, n),            # SE corner, heading NE
        4: (0, n),            # SW corner, heading E
        5: (-n + 1, 1),       # W corner, heading SE
    }[c]


def side_vertices(sch: ScalingScheme, c: int) -> tuple:
    """Mold-relative vertices of side c, in clean-edge orientation."""
    n = sch.n
    d = side_direction(c)
    if sch.family in ("A", "B"):
        si, sj = STEPS[c]
        start = (si * (n - 1), sj * (n - 1))
        count = n
    else:
        start = _c_side_start(n, c)
        count = n + 1 if c in C_LARGER_SIDES else n
    out = [start]
    for _ in range(count - 1):
        out.append(step(out[-1], d))
    return tuple(out)


def side_is_larger(sch: ScalingScheme, c: int) -> bool:
    return sch.family == "C" and c in C_LARGER_SIDES


def designated_origin_index(sch: ScalingScheme, c: int) -> int:
    """Index into side_vertices of the designated edge's origin."""
    if sch.n < 3:
        raise ValueError("designated edges need sides of at least two edges")
    count = len(side_vertices(sch, c))
    if sch.family == "B":
        return count - 2
    if sch.family == "C":
        return count - 3 if c in C_LARGER_SIDES else count - 2
    return count - 2 if sch.n == 3 else count - 3


@dataclass(frozen=True)
class CleanEdge:
    """A pluggable routing edge on the boundary of the occupied region."""

    origin: Point
    target: Point
    side: tuple  # (shape point, side index) of the occupied cell
    support: Point
    bouncer: Point

    @property
    def direction(self) -> int:
        from .lattice import direction_between
        return direction_between(self.origin, self.target)


def absolute_side(sch: ScalingScheme, p: Point, c: int) -> tuple:
    """Absolute vertices of side c of the cell of shape point p."""
    ci, cj = sch.apply(p)
    return tuple((ci + i, cj + j) for i, j in side_vertices(sch, c))


def designated_edge(sch: ScalingScheme, p: Point, c: int) -> CleanEdge:
    """The designated entry edge on side c of the cell of p."""
    verts = absolute_side(sch, p, c)
    k = designated_origin_index(sch, c)
    origin, target = verts[k], verts[k + 1]
    d = side_direction(c)
    support = step(origin, opposite(d))
    bouncer = step(origin, cw(opposite(d)))
    return CleanEdge(origin, target, (p, c), support, bouncer)


def side_middle(sch: ScalingScheme, p: Point, c: int) -> Point:
    """Middle vertex of a 3-vertex side (the A3 bookkeeping anchor)."""
    verts = absolute_side(sch, p, c)
    return verts[len(verts) // 2]


def cell_points(sch: ScalingScheme, p: Point) -> frozenset:
    ci, cj = sch.apply(p)
    return frozenset((ci + i, cj + j) for i, j in mold_points(sch))


def cell_interior(sch: ScalingScheme, p: Point) -> frozenset:
    """Cell points on no side."""
    boundary = set()
    for c in range(6):
        boundary.update(absolute_side(sch, p, c))
    return cell_points(sch, p) - boundary
