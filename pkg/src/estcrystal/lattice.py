"""Sequential numbering of the even-sum integer lattice in four dimensions.

Every Fourier harmonic of the field and of the wave function is indexed by a
point ``n = (n1, n2, n3, n4)`` with even component sum.  This module orders
those points into a single sequence ``i = 0, 1, 2, ...`` by nested shells:

* generation ``p = g4d(n)`` (outermost),
* spatial shell ``r = g3d(n)`` within a generation,
* the ``n4`` slice within a spatial shell,
* the ``n3`` slice within that,
* a fixed tour of the ``(n1, n2)`` ring (local number ``i4``).

Both directions of the map are exact integer arithmetic: the forward map sums
closed-form shell sizes, the inverse walks the same sizes back down.  Counts
grow quartically with ``p``; Python integers keep them exact at any size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

Point = tuple[int, int, int, int]

ORIGIN: Point = (0, 0, 0, 0)


class OddParityError(ValueError):
    """Raised for integer 4-tuples with odd component sum."""


def g3d(n: Point) -> int:
    """Spatial 1-norm |n1| + |n2| + |n3|."""
    return abs(n[0]) + abs(n[1]) + abs(n[2])


def g4d(n: Point) -> int:
    """Locality metric max(|n1| + |n2| + |n3|, |n4|).

    Equations whose harmonic indices differ by more than 2 in this metric
    have orthogonal projectors, which is what makes clustered elimination
    possible.
    """
    return max(abs(n[0]) + abs(n[1]) + abs(n[2]), abs(n[3]))


def is_lattice_point(n) -> bool:
    """True for integer 4-tuples with even component sum."""
    return len(n) == 4 and (n[0] + n[1] + n[2] + n[3]) % 2 == 0


def require_lattice_point(n) -> Point:
    """Validate and normalize a lattice point, rejecting odd-sum tuples."""
    t = tuple(int(c) for c in n)
    if len(t) != 4:
        raise ValueError(f"expected a 4-tuple, got {n!r}")
    if (t[0] + t[1] + t[2] + t[3]) % 2:
        raise OddParityError(f"{t} has odd component sum")
    return t


# ---------------------------------------------------------------------------
# Shell counting functions.  All are exact closed forms; negative primary
# arguments are rejected, scan helpers clamp out-of-range slice arguments.
# ---------------------------------------------------------------------------

def N4(R: int) -> int:
    """Number of (n1, n2) pairs with |n1| + |n2| = R."""
    if R < 0:
        raise ValueError("R must be non-negative")
    return 1 if R == 0 else 4 * R


def M4(r: int, n3: int) -> int:
    """Cumulative ring sizes of a spatial shell up to and including slice n3."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if n3 < -r:
        return 0
    if n3 <= 0:
        return 1 + 2 * (n3 + r) * (n3 + r + 1)
    if n3 < r:
        return 1 + 2 * r * (r + 1) - 2 * n3 * (n3 + 1 - 2 * r)
    return 1 if r == 0 else 2 + 4 * r * r


def N3(r: int) -> int:
    """Number of points on the spatial octahedron shell of radius r."""
    if r < 0:
        raise ValueError("r must be non-negative")
    return 1 if r == 0 else 2 + 4 * r * r


def j4max(p: int, r: int) -> int:
    """Number of n4 slices of the (p, r) subshell."""
    _check_pr(p, r)
    return 2 if r < p else 1 + p


def N2(p: int, r: int) -> int:
    """Number of points of the (p, r) subshell."""
    _check_pr(p, r)
    return 2 * N3(r) if r < p else (1 + p) * N3(p)


def kmax(p: int) -> int:
    """Number of admissible spatial radii r for generation p."""
    if p < 0:
        raise ValueError("p must be non-negative")
    return p // 2 + 1 if p % 2 == 0 else (p + 1) // 2


def M2(p: int, r: int) -> int:
    """Cumulative subshell sizes of generation p for radii up to r.

    Values of ``r`` below the minimal admissible radius yield 0 so the
    inverse scan can always subtract ``M2(p, r - 2)``.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    rmin = p % 2
    if r < rmin:
        return 0
    if (p - r) % 2:
        raise ValueError(f"r={r} and p={p} must have equal parity")
    if r > p:
        raise ValueError(f"r={r} exceeds p={p}")
    if r < p:
        return 2 * (r + 1) * (2 * r * r + 4 * r + 3) // 3
    if p == 0:
        return 1
    return 4 * p * (4 * p * p + 5) // 3


def N1(p: int) -> int:
    """Number of points of generation p."""
    return M2(p, p)


def M1(p: int) -> int:
    """Global index of the last point of generation p (origin has index 0)."""
    if p < 0:
        raise ValueError("p must be non-negative")
    return 2 * p * (p + 1) * (2 * p * p + 2 * p + 5) // 3


def _check_pr(p: int, r: int) -> None:
    if p < 0 or r < 0:
        raise ValueError("p and r must be non-negative")
    if r > p:
        raise ValueError(f"r={r} exceeds p={p}")
    if (p - r) % 2:
        raise ValueError(f"r={r} and p={p} must have equal parity")


# ---------------------------------------------------------------------------
# Forward map: point -> global index.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationCoords:
    """Shell coordinates (p, r) and local numbers (i1, i2, i3, i4) of a point."""

    p: int
    r: int
    i1: int
    i2: int
    i3: int
    i4: int


def _local_numbers(n: Point) -> tuple[int, int, int, int, int, int]:
    """Return (p, r, j4, n3, i4, i3) for a validated lattice point."""
    n1, n2, n3, n4 = n
    r = abs(n1) + abs(n2) + abs(n3)
    p = max(r, abs(n4))
    R = r - abs(n3)
    if n1 == 0:
        i4 = 1 if n2 <= 0 else 4 * n2
    elif n1 < 0:
        i4 = 2 * (R + n2)
    else:
        i4 = 2 * (R + n2) + 1
    if r < p:
        j4 = 1 if n4 < 0 else 2
    else:
        j4 = -n4 if n4 < 0 else 1 + n4
    i3 = M4(r, n3 - 1) + i4
    return p, r, j4, n3, i4, i3


def generation_coords(n) -> GenerationCoords:
    """Decompose a lattice point into its shell coordinates."""
    pt = require_lattice_point(n)
    if pt == ORIGIN:
        return GenerationCoords(0, 0, 1, 1, 1, 1)
    p, r, j4, _, i4, i3 = _local_numbers(pt)
    i2 = (j4 - 1) * N3(r) + i3
    i1 = M2(p, r - 2) + i2 if r >= 2 else i2
    return GenerationCoords(p, r, i1, i2, i3, i4)


def index_of(n) -> int:
    """Global index of a lattice point; a bijection onto 0, 1, 2, ...

    Odd-sum tuples are rejected: every structure in this package is defined
    on the even-sum lattice only.
    """
    pt = require_lattice_point(n)
    if pt == ORIGIN:
        return 0
    p, r, j4, _, _, i3 = _local_numbers(pt)
    i2 = (j4 - 1) * N3(r) + i3
    i1 = M2(p, r - 2) + i2 if r >= 2 else i2
    return M1(p - 1) + i1


# ---------------------------------------------------------------------------
# Inverse map: global index -> point.
# ---------------------------------------------------------------------------

def point_of(i: int) -> Point:
    """Lattice point with global index i (inverse of :func:`index_of`)."""
    if i < 0:
        raise ValueError("index must be non-negative")
    if i == 0:
        return ORIGIN
    # Generation: M1 grows like (4/3) p^4, so start from the real root and
    # correct by scanning.
    p = max(1, int((0.75 * i) ** 0.25))
    while M1(p) < i:
        p += 1
    while p > 1 and M1(p - 1) >= i:
        p -= 1
    i1 = i - M1(p - 1)
    # Spatial radius within the generation.
    r = p % 2
    while M2(p, r) < i1:
        r += 2
    i2 = i1 - (M2(p, r - 2) if r >= 2 else 0)
    n3r = N3(r)
    j4 = -(-i2 // n3r)
    if r < p:
        n4 = -p if j4 == 1 else p
    elif (p + j4) % 2 == 0:
        n4 = -j4
    else:
        n4 = j4 - 1
    i3 = i2 - (j4 - 1) * n3r
    # n3 slice inside the octahedron shell.
    n3 = -r
    while M4(r, n3) < i3:
        n3 += 1
    i4 = i3 - M4(r, n3 - 1)
    R = r - abs(n3)
    n2 = -R + i4 // 2
    n1 = (R - abs(n2)) if i4 % 2 else (abs(n2) - R)
    return (n1, n2, n3, n4)


def iter_points(limit: int | None = None) -> Iterator[Point]:
    """Yield lattice points in global-index order, optionally the first `limit`.

    Walks the shell structure directly, so bulk enumeration is much cheaper
    than repeated :func:`point_of` calls.
    """
    count = 0
    if limit is not None and count >= limit:
        return
    yield ORIGIN
    count = 1
    p = 0
    while limit is None or count < limit:
        p += 1
        for r in range(p % 2, p + 1, 2):
            for j4 in range(1, j4max(p, r) + 1):
                if r < p:
                    n4 = -p if j4 == 1 else p
                elif (p + j4) % 2 == 0:
                    n4 = -j4
                else:
                    n4 = j4 - 1
                for n3 in range(-r, r + 1):
                    R = r - abs(n3)
                    for i4 in range(1, N4(R) + 1):
                        n2 = -R + i4 // 2
                        n1 = (R - abs(n2)) if i4 % 2 else (abs(n2) - R)
                        yield (n1, n2, n3, n4)
                        count += 1
                        if limit is not None and count >= limit:
                            return


def s69() -> list[Point]:
    """The first 69 points in index order (generations 0, 1 and 2)."""
    return list(iter_points(69))


def stencil_13() -> list[Point]:
    """The 13 shifts with g4d <= 1: the coupling stencil of one equation.

    These are exactly the first 13 points of the global numbering, so the
    six "downward" shifts (n4 = -1) precede the six "upward" ones.
    """
    return list(iter_points(13))
