"""Upscaling schemes A_n, B_n, C_n.

Each scheme pairs a linear map over the lattice with a hexagonal cell mold:
scaling a shape replaces every point p by the cell mold translated to the
image of p.  A and B use the radius-(n-1) hexagon H_n; C uses the irregular
hexagon H'_n with alternating side lengths.  B and C cells never touch; A
cells of adjacent points share boundary points, which is what the delay-1
compilers exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Shape
from .lattice import Point, neighbors

FAMILIES = ("A", "B", "C")


@dataclass(frozen=True)
class ScalingScheme:
    """A scaling family (A, B or C) at magnification n."""

    family: str
    n: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown scaling family: {self.family!r}")
        if self.n < 2:
            raise ValueError("scaling requires n >= 2")

    @property
    def name(self) -> str:
        return f"{self.family}{self.n}"

    @property
    def basis(self) -> tuple[Point, Point]:
        """Images of (1,0) and (0,1) under the linear map."""
        n = self.n
        if self.family == "A":
            return (n - 1, 1 - n), (n - 1, 2 * n - 2)
        if self.family == "B":
            return (n - 1, -n), (n, 2 * n - 1)
        return (n, -n), (n, 2 * n)

    def apply(self, p: Point) -> Point:
        (xi, xj), (yi, yj) = self.basis
        return (p[0] * xi + p[1] * yi, p[0] * xj + p[1] * yj)


def scheme(name: str) -> ScalingScheme:
    """Parse a scheme name like "B3"."""
    if len(name) < 2 or name[0] not in FAMILIES:
        raise ValueError(f"bad scheme name: {name!r}")
    try:
        n = int(name[1:])
    except ValueError as exc:
        raise ValueError(f"bad scheme name: {name!r}") from exc
    return ScalingScheme(name[0], n)


def hexagon(n: int) -> frozenset:
    """H_n: the filled hexagon of radius n-1 centered on the origin."""
    return frozenset(
        (i, j)
        for i in range(-n + 1, n)
        for j in range(-n + 1, n)
        if abs(i - j) < n
    )


def irregular_hexagon(n: int) -> frozenset:
    """H'_n: sides alternate between n-1 and n+1; 3n^2 points."""
    return frozenset(
        (i, j)
        for i in range(-n + 1, n + 1)
        for j in range(-n + 1, n + 1)
        if -n <= i - j < n
    )


@lru_cache(maxsize=None)
def mold_points(sch: ScalingScheme) -> frozenset:
    """The cell mold of the scheme, centered on the origin."""
    if sch.family == "C":
        return irregular_hexagon(sch.n)
    return hexagon(sch.n)


@dataclass(frozen=True)
class Cell:
    """The scaled image of one shape point."""

    source: Point
    center: Point
    points: frozenset


def cell_of(sch: ScalingScheme, p: Point) -> Cell:
    center = sch.apply(p)
    mold = mold_points(sch)
    pts = frozenset((center[0] + i, center[1] + j) for i, j in mold)
    return Cell(p, center, pts)


def scale_shape(s: Shape, sch: ScalingScheme) -> tuple[Shape, dict]:
    """The scaled shape plus the cell index (source point -> Cell)."""
    cells = {p: cell_of(sch, p) for p in s.points}
    pts: set = set()
    for cell in cells.values():
        pts |= cell.points
    return Shape(pts), cells


@lru_cache(maxsize=None)
def _adjacent_diff(sch: ScalingScheme, diff: Point) -> bool:
    a = cell_of(sch, (0, 0)).points
    b = cell_of(sch, diff).points
    if a & b:
        return True
    return any(q in b for p in a for q in neighbors(p))


def cell_adjacency(sch: ScalingScheme, p: Point, q: Point) -> bool:
    """Whether the cells of p and q intersect or contain adjacent points."""
    return _adjacent_diff(sch, (q[0] - p[0], q[1] - p[1]))


def check_topology(s: Shape, sch: ScalingScheme) -> str | None:
    """Verify cells are adjacent exactly when their source points are.

    Returns None when the scaling preserves the adjacency structure of s, or
    a message naming the first offending pair.
    """
    pts = sorted(s.points)
    for k, p in enumerate(pts):
        adj = set(neighbors(p))
        for q in pts[k + 1:]:
            want = q in adj
            got = cell_adjacency(sch, p, q)
            if want != got:
                kind = "lost" if want else "gained"
                return f"{sch.name} {kind} adjacency between {p} and {q}"
    return None


@dataclass(frozen=True)
class CutReport:
    """Flood-fill summary of a windowed shape minus a candidate cut."""

    components: int
    boundary_components: int

    @property
    def cut_evidence(self) -> bool:
        """At least two components escape the window: consistent with the
        cut splitting an infinite continuation into several parts."""
        return self.boundary_components >= 2


def finite_cut_window_check(shape_window: Shape, cut, window=None) -> CutReport:
    """Count components of shape_window minus cut inside a bounding window.

    window defaults to the tight bounding ranges ((imin, imax), (jmin, jmax))
    of the shape.  A component "touches the boundary" when one of its points
    sits on an extreme row or column of the window; such components are the
    ones that could continue into an infinite shape outside the window.
    """
    cut = frozenset(cut)
    if not cut <= shape_window.points:
        raise ValueError("cut must be a subset of the shape window")
    rest = shape_window.points - cut
    if window is None:
        (imin, imax) = (min(i for i, _ in shape_window.points),
                        max(i for i, _ in shape_window.points))
        (jmin, jmax) = (min(j for _, j in shape_window.points),
                        max(j for _, j in shape_window.points))
    else:
        (imin, imax), (jmin, jmax) = window

    def on_boundary(p: Point) -> bool:
        return p[0] in (imin, imax) or p[1] in (jmin, jmax)

    seen: set = set()
    components = 0
    boundary_components = 0
    for start in sorted(rest):
        if start in seen:
            continue
        components += 1
        touches = False
        stack = [start]
        seen.add(start)
        while stack:
            p = stack.pop()
            if on_boundary(p):
                touches = True
            for q in neighbors(p):
                if q in rest and q not in seen:
                    seen.add(q)
                    stack.append(q)
        if touches:
            boundary_components += 1
    return CutReport(components, boundary_components)


def scaled_shape_to_doc(s: Shape, cells: dict) -> dict:
    """Shape document with the auxiliary cell index."""
    return {
        "points": [list(p) for p in sorted(s.points)],
        "cells": [
            {"source": list(p), "center": list(cells[p].center)}
            for p in sorted(cells)
        ],
    }
