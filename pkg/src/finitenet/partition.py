"""Subregion decomposition of the unit square for a given transmission range.

For each of the seven range cases the square splits into cells on which the
set of active border/corner terms is fixed. Only one canonical copy of each
cell type is described (it touches ``S1``, ``S2`` or ``V1``); ``multiplicity``
counts its images under the symmetries of the square.

Cells are unions of x-slabs. Within a slab ``y`` runs between two boundary
curves, each either a constant or one of the four quarter-circle arcs of
radius ``r0`` centred on a vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SQRT2, clipped_area

#: Case boundaries; case ``i`` covers ``(CASE_BOUNDS[i-1], CASE_BOUNDS[i]]``.
CASE_BOUNDS = (
    0.0,
    0.5,
    2.0 - SQRT2,
    5.0 / 8.0,
    1.0 / SQRT2,
    1.0,
    math.sqrt(5.0) / 2.0,
    SQRT2,
)

FULL_COVERAGE_CASE = 8


@dataclass(frozen=True)
class RangeCase:
    case_id: int
    lo: float
    hi: float

    @property
    def full_coverage(self) -> bool:
        return self.case_id == FULL_COVERAGE_CASE


def range_case(r0: float) -> RangeCase:
    """Case whose interval contains ``r0``; boundaries go to the lower case.

    ``r0 > sqrt(2)`` yields the full-coverage sentinel (case 8).
    """
    r0 = float(r0)
    if not r0 >= 0.0:
        raise ValueError(f"r0 must be non-negative, got {r0}")
    if r0 > SQRT2:
        return RangeCase(FULL_COVERAGE_CASE, SQRT2, math.inf)
    for i in range(1, 8):
        if r0 <= CASE_BOUNDS[i]:
            return RangeCase(i, CASE_BOUNDS[i - 1], CASE_BOUNDS[i])
    raise AssertionError("unreachable")


def _arc(v):
    return np.sqrt(np.maximum(v, 0.0))


def _circle_antideriv(t, r0):
    # antiderivative of sqrt(r0^2 - t^2), valid on |t| <= r0
    t = np.clip(t, -r0, r0)
    return 0.5 * (t * np.sqrt(np.maximum(r0 * r0 - t * t, 0.0)) + r0 * r0 * np.arcsin(t / r0))


@dataclass(frozen=True)
class Curve:
    """A y-boundary as a function of x.

    kind ``const`` is the horizontal line ``y = value``. The arcs are the
    circles of radius ``r0`` about each vertex, lower/upper branch as seen
    from inside the bottom-left quadrant:

    ``v1``: ``sqrt(r0^2 - x^2)``        ``v2``: ``sqrt(r0^2 - (x-1)^2)``
    ``v3``: ``1 - sqrt(r0^2 - (x-1)^2)`` ``v4``: ``1 - sqrt(r0^2 - x^2)``
    """

    kind: str
    value: float = 0.0

    def __call__(self, x, r0):
        x = np.asarray(x, dtype=float)
        if self.kind == "const":
            return np.full_like(x, self.value)
        if self.kind == "v1":
            return _arc(r0 * r0 - x * x)
        if self.kind == "v2":
            return _arc(r0 * r0 - (x - 1.0) ** 2)
        if self.kind == "v3":
            return 1.0 - _arc(r0 * r0 - (x - 1.0) ** 2)
        if self.kind == "v4":
            return 1.0 - _arc(r0 * r0 - x * x)
        raise ValueError(f"unknown curve kind {self.kind!r}")

    def integral(self, a: float, b: float, r0: float) -> float:
        """Exact integral of the curve over ``[a, b]``."""
        if self.kind == "const":
            return self.value * (b - a)
        if self.kind in ("v1", "v4"):
            arc = _circle_antideriv(b, r0) - _circle_antideriv(a, r0)
        elif self.kind in ("v2", "v3"):
            arc = _circle_antideriv(b - 1.0, r0) - _circle_antideriv(a - 1.0, r0)
        else:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind in ("v3", "v4"):
            return float((b - a) - arc)
        return float(arc)

    def __str__(self):
        return f"{self.value:.6g}" if self.kind == "const" else self.kind


def const(value: float) -> Curve:
    return Curve("const", float(value))


V1, V2, V3, V4 = Curve("v1"), Curve("v2"), Curve("v3"), Curve("v4")


@dataclass(frozen=True)
class Piece:
    x_lo: float
    x_hi: float
    y_lower: Curve
    y_upper: Curve


@dataclass(frozen=True)
class SubregionSpec:
    """One cell type ``R_i``: its canonical copy, multiplicity and active terms."""

    type_id: int
    multiplicity: int
    pieces: tuple[Piece, ...]
    sides: frozenset[int]
    vertices: frozenset[int]
    r0: float
    fully_covered: bool = False
    case_id: int = field(default=0, compare=False)

    @property
    def x_interval(self) -> tuple[float, float]:
        if not self.pieces:
            return (0.0, 0.0)
        return (min(p.x_lo for p in self.pieces), max(p.x_hi for p in self.pieces))

    def coverage(self, x, y):
        """The cell's closed-form coverage expression evaluated at ``(x, y)``."""
        if self.fully_covered:
            return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return clipped_area(x, y, self.r0, sorted(self.sides), sorted(self.vertices))

    def label(self) -> str:
        terms = [f"B{s}" for s in sorted(self.sides)] + [f"-C{v}" for v in sorted(self.vertices)]
        expr = "pi r^2" + (" - (" + " + ".join(terms).replace("+ -", "- ") + ")" if terms else "")
        return expr + (" = 1" if self.fully_covered else "")


def _slabs(x0, x1, lower, upper):
    """Split ``[x0, x1]`` into pieces given piecewise lower/upper curves.

    ``lower`` and ``upper`` list ``(x_start, curve)`` switch points; the curve
    in force at ``x`` is the last one whose start is ``<= x``. Switch points
    are sorted here, so limits whose order flips inside a range case are
    handled without special-casing.
    """
    cuts = sorted({x0, x1} | {s for s, _ in lower + upper if x0 < s < x1})
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0.0:
            continue
        mid = 0.5 * (a + b)
        lo = [c for s, c in sorted(lower, key=lambda t: t[0]) if s <= mid][-1]
        hi = [c for s, c in sorted(upper, key=lambda t: t[0]) if s <= mid][-1]
        pieces.append(Piece(a, b, lo, hi))
    return tuple(pieces)


def _slab(x0, x1, lo: Curve, hi: Curve):
    return _slabs(x0, x1, [(-math.inf, lo)], [(-math.inf, hi)])


_ALL4 = frozenset({1, 2, 3, 4})


def _case_cells(case_id: int, r: float):
    """(multiplicity, pieces, sides, vertices, fully_covered) per cell type."""
    ninf = -math.inf
    m = 1.0 - r
    s, v = frozenset, frozenset
    if case_id == 1:
        return [
            (1, _slab(r, m, const(r), const(m)), s(), v(), False),
            (4, _slab(0.0, r, const(r), const(m)), s({1}), v(), False),
            (4, _slab(0.0, r, V1, const(r)), s({1, 2}), v(), False),
            (4, _slab(0.0, r, const(0.0), V1), s({1, 2}), v({1}), False),
        ]
    if case_id == 2:
        c = math.sqrt(max(2.0 * r - 1.0, 0.0))
        return [
            (4, _slabs(0.0, m, [(ninf, const(0.0))], [(ninf, const(m)), (c, V1)]),
             s({1, 2}), v({1}), False),
            (8, _slab(m, 0.5, const(0.0), V2), s({1, 2, 3}), v({1, 2}), False),
            (8, _slab(m, 0.5, V2, V1), s({1, 2, 3}), v({1}), False),
            (8, _slab(m, 0.5, V1, const(m)), s({1, 2, 3}), v(), False),
            (4, _slab(c, m, V1, const(m)), s({1, 2}), v(), False),
            (4, _slab(m, 0.5, const(m), const(0.5)), _ALL4, v(), False),
        ]
    if case_id == 3:
        c = math.sqrt(max(2.0 * r - 1.0, 0.0))
        return [
            (4, _slab(0.0, m, const(0.0), const(m)), s({1, 2}), v({1}), False),
            (8, _slab(m, 0.5, const(0.0), V2), s({1, 2, 3}), v({1, 2}), False),
            (8, _slabs(m, 0.5, [(ninf, V2)], [(ninf, const(m)), (c, V1)]),
             s({1, 2, 3}), v({1}), False),
            (8, _slab(c, 0.5, V1, const(m)), s({1, 2, 3}), v(), False),
            (4, _slab(m, c, const(m), V1), _ALL4, v({1}), False),
            (4, _slabs(m, 0.5, [(ninf, V1), (c, const(m))], [(ninf, const(0.5))]),
             _ALL4, v(), False),
        ]
    if case_id == 4:
        # R2/R3 are naturally bounded by x as a function of y; that boundary
        # x = 1 - sqrt(r^2 - y^2) is the V2 arc, meeting y = 1 - r at x = q
        q = 1.0 - math.sqrt(max(2.0 * r - 1.0, 0.0))
        h = math.sqrt(max(r * r - 0.25, 0.0))
        return [
            (4, _slab(0.0, m, const(0.0), const(m)), s({1, 2}), v({1}), False),
            (8, _slabs(m, 0.5, [(ninf, const(0.0))], [(ninf, V2), (q, const(m))]),
             s({1, 2, 3}), v({1, 2}), False),
            (8, _slab(m, q, V2, const(m)), s({1, 2, 3}), v({1}), False),
            (8, _slab(q, 0.5, const(m), V2), _ALL4, v({1, 2}), False),
            (4, _slabs(m, 0.5, [(ninf, const(m)), (q, V2)], [(ninf, V4), (h, V1)]),
             _ALL4, v({1}), False),
            (4, _slab(h, 0.5, V1, const(0.5)), _ALL4, v(), False),
        ]
    if case_id == 5:
        q = 1.0 - math.sqrt(max(2.0 * r - 1.0, 0.0))
        c = 0.5 * (1.0 - math.sqrt(max(2.0 * r * r - 1.0, 0.0)))
        a = 1.0 - math.sqrt(max(r * r - 0.25, 0.0))
        return [
            (4, _slab(0.0, m, const(0.0), const(m)), s({1, 2}), v({1}), False),
            (8, _slabs(m, 0.5, [(ninf, const(0.0))], [(ninf, V2), (q, const(m))]),
             s({1, 2, 3}), v({1, 2}), False),
            (8, _slab(m, q, V2, const(m)), s({1, 2, 3}), v({1}), False),
            (8, _slabs(q, 0.5, [(ninf, const(m))], [(ninf, V2), (c, V4)]),
             _ALL4, v({1, 2}), False),
            (4, _slabs(m, c, [(ninf, const(m)), (q, V2)], [(ninf, V4)]),
             _ALL4, v({1}), False),
            (4, _slabs(c, 0.5, [(ninf, V4)], [(ninf, V2), (a, V3)]),
             _ALL4, v({1, 2, 4}), False),
            (4, _slab(a, 0.5, V3, const(0.5)), _ALL4, v({1, 2, 3, 4}), True),
        ]
    if case_id == 6:
        a = 1.0 - math.sqrt(max(r * r - 0.25, 0.0))
        e = math.sqrt(max(r * r - 1.0, 0.0))
        return [
            (4, _slabs(0.0, 0.5, [(ninf, const(0.0)), (e, V4)], [(ninf, V2), (a, V3)]),
             _ALL4, v({1, 2, 4}), False),
            (8, _slab(e, 0.5, const(0.0), V4), _ALL4, v({1, 2}), False),
            (4, _slab(a, 0.5, V3, const(0.5)), _ALL4, v({1, 2, 3, 4}), True),
        ]
    if case_id == 7:
        t = 1.0 - math.sqrt(max(r * r - 1.0, 0.0))
        return [
            (4, _slab(0.0, t, const(0.0), V3), _ALL4, v({1, 2, 4}), False),
            (4, _slabs(0.0, 0.5, [(ninf, V3), (t, const(0.0))], [(ninf, const(0.5))]),
             _ALL4, v({1, 2, 3, 4}), True),
        ]
    raise ValueError(f"no subregion table for case {case_id}")


def subregions(r0: float) -> list[SubregionSpec]:
    """Cell types for range ``r0``, in table order.

    For ``r0 > sqrt(2)`` a single fully-covered cell (the whole square) is
    returned.
    """
    rc = range_case(r0)
    r0 = float(r0)
    if rc.full_coverage:
        return [SubregionSpec(1, 1, (Piece(0.0, 1.0, const(0.0), const(1.0)),),
                              _ALL4, _ALL4, r0, True, rc.case_id)]
    return [
        SubregionSpec(i, n, pieces, sides, verts, r0, full, rc.case_id)
        for i, (n, pieces, sides, verts, full) in enumerate(_case_cells(rc.case_id, r0), start=1)
    ]


def subregion_area(spec: SubregionSpec, r0: float | None = None) -> float:
    """Area of one canonical copy of ``spec``, from closed-form arc integrals."""
    r0 = spec.r0 if r0 is None else float(r0)
    total = 0.0
    for p in spec.pieces:
        total += p.y_upper.integral(p.x_lo, p.x_hi, r0) - p.y_lower.integral(p.x_lo, p.x_hi, r0)
    return total


def sample_points(spec: SubregionSpec, n: int, rng: np.random.Generator, margin: float = 1e-9):
    """Uniform-in-x, uniform-in-y points strictly inside the canonical copy.

    Pieces are chosen in proportion to their x-width; used for consistency
    checks, not for integration.
    """
    pieces = [p for p in spec.pieces if p.x_hi - p.x_lo > 2 * margin]
    widths = np.array([p.x_hi - p.x_lo for p in pieces])
    idx = rng.choice(len(pieces), size=n, p=widths / widths.sum())
    xs = np.empty(n)
    ys = np.empty(n)
    for k, p in enumerate(pieces):
        sel = idx == k
        m = int(sel.sum())
        x = rng.uniform(p.x_lo + margin, p.x_hi - margin, m)
        lo = p.y_lower(x, spec.r0)
        hi = p.y_upper(x, spec.r0)
        ys[sel] = lo + (hi - lo) * rng.uniform(margin, 1.0 - margin, m)
        xs[sel] = x
    return xs, ys
