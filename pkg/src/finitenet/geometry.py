"""Disk/unit-square intersection areas.

Sides and vertices are numbered anticlockwise starting at the origin::

    V4 (0,1) ---- S4 ---- V3 (1,1)
      |                     |
      S1                    S3
      |                     |
    V1 (0,0) ---- S2 ---- V2 (1,0)

``B_l`` is the circular-segment area of the disk lying beyond side ``S_l``;
``C_l`` is the overlap of the two segments meeting at vertex ``V_l``. The
clipped disk area is ``pi r0^2 - sum(B) + sum(C)``. Since two opposite
half-planes never intersect, this inclusion-exclusion is exact for every
``r0``, including ``r0 > 1`` where segments from opposite sides coexist.

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = float(np.sqrt(2.0))

SIDES = (1, 2, 3, 4)
VERTICES = (1, 2, 3, 4)

# vertex -> (adjacent side along x, adjacent side along y)
_VERTEX_SIDES = {1: (1, 2), 2: (3, 2), 3: (3, 4), 4: (1, 4)}


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"point ({self.x}, {self.y}) lies outside the unit square")


@dataclass(frozen=True)
class BoundaryEffects:
    """Active border/corner terms at a point; areas indexed by side/vertex - 1."""

    segments: tuple[float, float, float, float]
    corners: tuple[float, float, float, float]
    active_sides: frozenset[int]
    active_vertices: frozenset[int]


def _sqrt0(v):
    # sqrt with tiny negative drift mapped to zero
    return np.sqrt(np.maximum(v, 0.0))


def side_distance(x, y, side: int):
    """Distance from ``(x, y)`` to side ``S_side``."""
    if side == 1:
        return np.asarray(x, dtype=float)
    if side == 2:
        return np.asarray(y, dtype=float)
    if side == 3:
        return 1.0 - np.asarray(x, dtype=float)
    if side == 4:
        return 1.0 - np.asarray(y, dtype=float)
    raise ValueError(f"side must be in 1..4, got {side}")


def _local_corner_coords(x, y, vertex: int):
    """Distances to the two sides meeting at ``vertex`` (along x, along y)."""
    if vertex not in _VERTEX_SIDES:
        raise ValueError(f"vertex must be in 1..4, got {vertex}")
    sx, sy = _VERTEX_SIDES[vertex]
    return side_distance(x, y, sx), side_distance(x, y, sy)


def vertex_distance(x, y, vertex: int):
    a, b = _local_corner_coords(x, y, vertex)
    return np.hypot(a, b)


def _segment_from_chord(r0, alpha):
    # circular segment with central angle alpha; stable as alpha -> 0
    return 0.5 * r0 * r0 * (alpha - np.sin(alpha))


def segment_area_at_distance(d, r0):
    """Area of the disk of radius ``r0`` beyond a line at distance ``d``.

    Equal to ``r0^2 acos(d / r0) - d sqrt(r0^2 - d^2)``, evaluated through
    the half-angle so that it stays accurate as the line becomes tangent.
    Zero once ``d >= r0``.
    """
    d = np.asarray(d, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    half = _sqrt0((r0 - d) * (r0 + d))
    alpha = 2.0 * np.arctan2(half, d)
    area = _segment_from_chord(r0, alpha)
    return np.where(d < r0, np.maximum(area, 0.0), 0.0)


def corner_area_local(a, b, r0):
    """Overlap of the two segments at a vertex, in local coordinates.

    ``a`` and ``b`` are the distances from the disk centre to the two sides
    meeting at the vertex. The circle leaves the square through the two
    sides at distances ``p`` and ``q`` from the vertex; the overlap is the
    right triangle with those legs plus the circular segment cut off by its
    hypotenuse. Only non-zero when ``hypot(a, b) < r0``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    dist = np.hypot(a, b)
    slack = np.maximum((r0 - dist) * (r0 + dist), 0.0)  # r0^2 - a^2 - b^2
    ha = _sqrt0((r0 - b) * (r0 + b))  # half-chord on the side at distance b
    hb = _sqrt0((r0 - a) * (r0 + a))
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(ha + a > 0.0, slack / (ha + a), 0.0)
        q = np.where(hb + b > 0.0, slack / (hb + b), 0.0)
        s = np.where(r0 > 0.0, np.hypot(p, q) / (2.0 * np.where(r0 > 0.0, r0, 1.0)), 0.0)
    alpha = 2.0 * np.arcsin(np.clip(s, 0.0, 1.0))
    area = 0.5 * p * q + _segment_from_chord(r0, alpha)
    inside = dist < r0
    return np.where(inside, np.maximum(area, 0.0), 0.0)


def segment_area(u, r0, side: int):
    """Border-effect area ``B_side`` for a node at ``u = (x, y)``."""
    x, y = u
    return segment_area_at_distance(side_distance(x, y, side), r0)


def corner_area(u, r0, vertex: int):
    """Corner-effect area ``C_vertex`` for a node at ``u = (x, y)``."""
    x, y = u
    a, b = _local_corner_coords(x, y, vertex)
    return corner_area_local(a, b, r0)


def clipped_area(x, y, r0, sides=SIDES, vertices=VERTICES):
    """``pi r0^2 - sum(B over sides) + sum(C over vertices)``, unclamped.

    With the default term sets this is the exact clipped area. Subregion
    integrands pass the fixed term set of their cell instead.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r0 = float(r0)
    total = np.full(np.broadcast(x, y).shape, np.pi * r0 * r0)
    for s in sides:
        total = total - segment_area_at_distance(side_distance(x, y, s), r0)
    for v in vertices:
        a, b = _local_corner_coords(x, y, v)
        total = total + corner_area_local(a, b, r0)
    return total


def coverage_cdf(u, r0):
    """Probability that a uniform node falls within ``r0`` of ``u``.

    Equal to the area of the disk of radius ``r0`` about ``u`` clipped to the
    unit square. Exactly 1 when ``r0 >= sqrt(2)`` and 0 when ``r0 == 0``.
    """
    x, y = u
    r0 = float(r0)
    if r0 < 0.0:
        raise ValueError("r0 must be non-negative")
    shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
    if r0 >= SQRT2:
        out = np.ones(shape)
    elif r0 == 0.0:
        out = np.zeros(shape)
    else:
        out = np.clip(clipped_area(x, y, r0), 0.0, 1.0)
        # a disk holding all four vertices holds the whole (convex) square
        covered = np.ones(shape, dtype=bool)
        for v in VERTICES:
            covered &= np.asarray(vertex_distance(x, y, v)) <= r0
        out = np.where(covered, 1.0, out)
    return float(out) if out.ndim == 0 else out


def classify(u, r0) -> BoundaryEffects:
    """Which border and corner terms are active for a node at ``u``."""
    x, y = float(u[0]), float(u[1])
    r0 = float(r0)
    sides = frozenset(s for s in SIDES if side_distance(x, y, s) < r0)
    verts = frozenset(v for v in VERTICES if vertex_distance(x, y, v) < r0)
    segs = tuple(float(segment_area((x, y), r0, s)) for s in SIDES)
    corners = tuple(float(corner_area((x, y), r0, v)) for v in VERTICES)
    return BoundaryEffects(segs, corners, sides, verts)
