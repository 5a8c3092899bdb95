"""Fractal family of point lattices and the finite models built from it.

The even-sum lattice is exhausted by a sequence of translation lattices
``u = 1, 2, ...`` (center plus period list).  The first cycle, ``u = 1..2222``,
runs through five stages with two phases each; every stage refines the period
list and widens the central window.  Equation family ``k`` lives on lattice
``u = 8 + k`` for ``k >= 1``, while ``k = 0`` bundles the first eight lattices.

Finite models pick a list of families and clip each family to the stage-(4,2)
central window, a 12-wide box that contains every covered residue class
exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from . import centers
from .lattice import Point, g3d, g4d, index_of, require_lattice_point, stencil_13

__all__ = [
    "PointLattice",
    "Region",
    "ModelSpec",
    "SeparationReport",
    "CENTRAL_WINDOW",
    "CYCLE2_START",
    "CYCLE2_END",
    "build_cycle1",
    "stage_of_u",
    "points_in_region",
    "f0_points",
    "verify_separation",
    "model_spec",
    "full_model_42",
    "stencil_13",
]

# Phase-0 centers: the eight lattices forming family 0 and the six single
# lattices of families 1..6.  All share the period list (4, 4, 4, 4).
_STAGE01_CENTERS: tuple[Point, ...] = (
    (0, 0, 0, 0), (-1, -1, -1, -1),
    (1, 1, -1, -1), (1, -1, 1, -1), (-1, 1, 1, -1),
    (0, 2, 2, 0), (2, 0, 2, 0), (2, 2, 0, 0),
)
_STAGE02_CENTERS: tuple[Point, ...] = (
    (0, 0, -1, -1), (0, -1, 0, -1), (-1, 0, 0, -1),
    (0, 1, 1, 0), (1, 0, 1, 0), (1, 1, 0, 0),
)

_PERIODS_BY_STAGE = {
    0: (4, 4, 4, 4),
    1: (4, 4, 4, 12),
    2: (12, 4, 4, 12),
    3: (12, 12, 4, 12),
    4: (12, 12, 12, 12),
}

# First-lattice number of each (stage, phase) block and lattices per phase.
_STAGE_LAYOUT = (
    ((0, 1), 1, 8),
    ((0, 2), 9, 6),
    ((1, 1), 15, 14),
    ((1, 2), 29, 14),
    ((2, 1), 43, 30),
    ((2, 2), 73, 30),
    ((3, 1), 103, 150),
    ((3, 2), 253, 150),
    ((4, 1), 403, 910),
    ((4, 2), 1313, 910),
)

# n4 tours of a five-lattice block sharing one 3d projection.
_N4_EVEN = (4, 0, -4, 2, -2)
_N4_ODD = (3, -1, -5, 1, -3)

# Phase-2 shifts of stages 2, 3, 4.
_PHASE2_SHIFT = {2: (4, 0, 0, 0), 3: (0, 4, 0, 0), 4: (0, 0, 4, 0)}

# Documented anchors of the second fractal cycle (not generated here; the
# rule producing its center lists is outside this construction).
CYCLE2_START = {"u": 2223, "center": (4, 4, 4, -6), "periods": (12, 12, 12, 36)}
CYCLE2_END = {"u": 108526, "center": (-15, -15, 5, -7), "periods": (36, 36, 36, 36)}


@dataclass(frozen=True)
class PointLattice:
    """Translation lattice number u: center plus one period per axis."""

    u: int
    center: Point
    periods: tuple[int, int, int, int]
    k: int  # equation family; u = 8 + k for k >= 1, families 0 share k = 0


@dataclass(frozen=True)
class Region:
    """Axis-aligned box of lattice points, bounds inclusive."""

    lower: tuple[int, int, int, int]
    upper: tuple[int, int, int, int]

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"empty region {self.lower}..{self.upper}")

    def __contains__(self, pt) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.lower, pt, self.upper))


CENTRAL_WINDOW = Region((-5, -5, -5, -5), (6, 6, 6, 6))


def stage_of_u(u: int) -> tuple[int, int]:
    """(stage, phase) block containing lattice u of the first cycle."""
    for (st, ph), start, count in reversed(_STAGE_LAYOUT):
        if u >= start:
            if u < start + count:
                return (st, ph)
            break
    raise ValueError(f"u={u} outside the first cycle (1..2222)")


def _expand_phase1(projections, start_u: int) -> list[Point]:
    """Apply the five-center n4 tour to a list of 3d projections."""
    out = []
    for proj in projections:
        tour = _N4_EVEN if (abs(proj[0]) + abs(proj[1]) + abs(proj[2])) % 2 == 0 else _N4_ODD
        out.extend((proj[0], proj[1], proj[2], n4) for n4 in tour)
    return out


@lru_cache(maxsize=1)
def build_cycle1() -> tuple[PointLattice, ...]:
    """All 2222 point lattices of the first cycle, validated on construction."""
    for name, data, want in (
        ("stage-2", centers.STAGE2_PHASE1_PROJ, 6),
        ("stage-3", centers.STAGE3_PHASE1_PROJ, 30),
        ("stage-4", centers.STAGE4_PHASE1_PROJ, 182),
    ):
        if len(data) != want:
            raise RuntimeError(f"{name} projection table has {len(data)} entries, expected {want}")

    c0: list[Point] = []
    c0 += _STAGE01_CENTERS
    c0 += _STAGE02_CENTERS
    # Stage 1 copies the first fourteen centers down/up the n4 axis.
    c0 += [(c[0], c[1], c[2], c[3] - 2) for c in c0[:14]]
    c0 += [(c[0], c[1], c[2], c[3] + 2) for c in c0[:14]]
    for st, table in ((2, centers.STAGE2_PHASE1_PROJ),
                      (3, centers.STAGE3_PHASE1_PROJ),
                      (4, centers.STAGE4_PHASE1_PROJ)):
        phase1 = _expand_phase1(table, len(c0) + 1)
        dx = _PHASE2_SHIFT[st]
        c0 += phase1
        c0 += [(c[0] + dx[0], c[1] + dx[1], c[2] + dx[2], c[3] + dx[3]) for c in phase1]
    if len(c0) != 2222:
        raise RuntimeError(f"cycle 1 produced {len(c0)} centers, expected 2222")

    lattices = []
    for idx, center in enumerate(c0):
        u = idx + 1
        require_lattice_point(center)
        st, _ = stage_of_u(u)
        lattices.append(PointLattice(u=u, center=center,
                                     periods=_PERIODS_BY_STAGE[st],
                                     k=u - 8 if u > 8 else 0))

    # Published sample centers; any transcription slip upstream trips these.
    samples = {43: (-1, 2, 1, 4), 44: (-1, 2, 1, 0), 47: (-1, 2, 1, -2), 48: (-1, 1, 2, 4)}
    for u, want in samples.items():
        got = lattices[u - 1].center
        if got != want:
            raise RuntimeError(f"c0({u}) = {got}, expected {want}")
    return tuple(lattices)


def points_in_region(lat: PointLattice, region: Region) -> list[Point]:
    """Points of one lattice inside a box, sorted by global index."""
    axes = []
    for lo, hi, c, per in zip(region.lower, region.upper, lat.center, lat.periods):
        first = lo + (c - lo) % per
        axes.append(range(first, hi + 1, per))
    pts = [p for p in product(*axes)]
    pts.sort(key=index_of)
    return pts


def f0_points(region: Region) -> list[Point]:
    """Points of family 0 (the union of lattices u = 1..8) inside a box."""
    pts: list[Point] = []
    for lat in build_cycle1()[:8]:
        pts.extend(points_in_region(lat, region))
    pts.sort(key=index_of)
    return pts


@dataclass(frozen=True)
class SeparationReport:
    """Outcome of the pairwise-distance audit of the phase-0/1 lattices."""

    pairs_checked: int
    violations: tuple[tuple[int, int, Point], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_separation(lattices=None, limit: Region | None = None) -> SeparationReport:
    """Audit that distinct points of the early lattices sit more than 2 apart.

    Checks (a) any two distinct points of family 0 (u <= 8) and (b) any two
    points of lattices u, u' <= 14 differing by a nonzero period combination.
    Point pairs are enumerated through center differences plus period shifts,
    which covers every pair inside ``limit`` exactly.
    """
    if lattices is None:
        lattices = build_cycle1()[:14]
    if limit is None:
        limit = Region((-9, -9, -9, -9), (10, 10, 10, 10))
    span = max(hi - lo for lo, hi in zip(limit.lower, limit.upper))
    violations = []
    pairs = 0
    for a in lattices:
        for b in lattices:
            if b.u < a.u:
                continue
            both_f0 = a.u <= 8 and b.u <= 8
            dc = tuple(cb - ca for ca, cb in zip(a.center, b.center))
            per = tuple(min(pa, pb) for pa, pb in zip(a.periods, b.periods))
            reach = [span // p + 1 for p in per]
            for ks in product(*(range(-m, m + 1) for m in reach)):
                if a.u == b.u and all(k == 0 for k in ks):
                    continue
                if not both_f0 and not any(ks):
                    continue  # same-cell pairs only constrained inside family 0
                d = tuple(dc[i] + ks[i] * per[i] for i in range(4))
                if all(c == 0 for c in d):
                    continue
                pairs += 1
                if g4d(d) <= 2:
                    violations.append((a.u, b.u, d))
    return SeparationReport(pairs_checked=pairs, violations=tuple(violations))


@dataclass(frozen=True)
class ModelSpec:
    """One finite truncation: ordered families and their clipped point lists."""

    name: str
    k_list: tuple[int, ...]
    points: dict[int, tuple[Point, ...]] = field(repr=False)
    region: Region = CENTRAL_WINDOW

    def __post_init__(self):
        if not self.k_list or self.k_list[0] != 0:
            raise ValueError("k_list must start at 0")
        if any(b <= a for a, b in zip(self.k_list, self.k_list[1:])):
            raise ValueError("k_list must be strictly increasing")

    @property
    def equation_count(self) -> int:
        return sum(len(v) for v in self.points.values())

    def equations(self):
        """Yield (k, point) pairs in processing order: k ascending, then index."""
        for k in self.k_list:
            for pt in self.points[k]:
                yield k, pt

    def point_set(self) -> set[Point]:
        out: set[Point] = set()
        for pts in self.points.values():
            out.update(pts)
        return out


def model_spec(p: int) -> ModelSpec:
    """Model keeping the families whose centers lie within g4d distance p.

    ``p = 0`` is the single-equation model at the origin, enough to recover
    the free-space solution in the vanishing-field limit.
    """
    if p not in (0, 1, 2, 3):
        raise ValueError("p must be 0, 1, 2 or 3")
    if p == 0:
        return ModelSpec(name="0-model", k_list=(0,), points={0: ((0, 0, 0, 0),)})
    lattices = build_cycle1()
    k_list = [0]
    points: dict[int, tuple[Point, ...]] = {0: tuple(f0_points(CENTRAL_WINDOW))}
    for lat in lattices[8:]:
        if g4d(lat.center) <= p:
            k_list.append(lat.k)
            points[lat.k] = tuple(points_in_region(lat, CENTRAL_WINDOW))
    return ModelSpec(name=f"{p}-model", k_list=tuple(k_list), points=points)


def full_model_42() -> ModelSpec:
    """The complete first-cycle model: all families clipped to the window."""
    lattices = build_cycle1()
    k_list = [0]
    points: dict[int, tuple[Point, ...]] = {0: tuple(f0_points(CENTRAL_WINDOW))}
    for lat in lattices[8:]:
        k_list.append(lat.k)
        points[lat.k] = tuple(points_in_region(lat, CENTRAL_WINDOW))
    return ModelSpec(name="full-42", k_list=tuple(k_list), points=points)


def custom_model(k_list, max_points: int | None = None, name: str = "custom") -> ModelSpec:
    """Model from an explicit family list, optionally truncating each family.

    Intended for reduced experiments; families must come from the first cycle.
    """
    ks = sorted(set(int(k) for k in k_list) | {0})
    lattices = build_cycle1()
    points: dict[int, tuple[Point, ...]] = {}
    for k in ks:
        if k < 0 or k > 2214:
            raise ValueError(f"family {k} outside the first cycle")
        pts = f0_points(CENTRAL_WINDOW) if k == 0 else points_in_region(lattices[8 + k - 1], CENTRAL_WINDOW)
        points[k] = tuple(pts[:max_points] if max_points else pts)
    return ModelSpec(name=name, k_list=tuple(ks), points=points)
