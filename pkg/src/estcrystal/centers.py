"""Embedded center tables for the first fractal cycle.

The three tuples below are the 3d projections of the phase-1 lattice centers
for stages 2, 3 and 4.  They are fixed input data of the construction; their
lengths (6, 30, 182) and four published sample centers are asserted when the
cycle is built, since a transcription slip here would silently corrupt every
downstream model.
"""

STAGE2_PHASE1_PROJ = (
    (-1, 2, 1), (-1, 1, 2), (-2, 1, 1), (-2, 0, 1),
    (-3, 0, 0), (-2, 1, 0),
)

STAGE3_PHASE1_PROJ = (
    (6, -1, 1), (3, -1, 0), (3, 0, 1), (5, -2, 1),
    (5, -1, 2), (4, -1, 1), (4, -2, 1), (4, -3, 0),
    (5, -2, 0), (3, -2, 0), (2, -1, 1), (-1, -1, 0),
    (-1, 0, 1), (1, -2, 1), (1, -1, 2), (0, -1, 1),
    (0, -2, 1), (0, -3, 0), (1, -2, 0), (2, -2, -1),
    (-1, -2, 0), (2, -1, 0), (-2, -1, 1), (-3, -2, 1),
    (-3, -1, 2), (-4, -2, 1), (-4, -3, 0), (-3, -2, 0),
    (-2, -2, -1), (-2, -1, 0),
)

STAGE4_PHASE1_PROJ = (
    (3, 5, 0), (5, 3, 0), (3, 4, -1), (5, 4, -1),
    (6, 5, -1), (4, 3, -1), (4, 5, -1), (5, 5, -2),
    (5, 6, -1), (4, 5, -2), (5, 4, -2), (4, 4, -3),
    (3, 3, -2), (3, 4, -2), (4, 3, -2), (4, 4, -2),
    (3, 3, -3), (-1, 5, 0), (1, 3, 0), (-1, 4, -1),
    (1, 4, -1), (2, 5, -1), (0, 3, -1), (0, 5, -1),
    (1, 5, -2), (1, 6, -1), (0, 5, -2), (1, 4, -2),
    (2, 3, -2), (0, 4, -3), (2, 3, -1), (-1, 3, -2),
    (-1, 4, -2), (2, 4, -1), (0, 3, -2), (2, 4, 0),
    (0, 4, -2), (-1, 3, -3), (1, 3, -1), (-3, 3, 0),
    (-3, 4, -1), (-2, 5, -1), (-4, 3, -1), (-3, 5, -2),
    (-3, 6, -1), (-4, 5, -2), (-3, 4, -2), (-2, 3, -2),
    (-4, 4, -3), (-2, 3, -1), (-2, 4, -1), (-4, 3, -2),
    (-2, 4, 0), (-3, 3, -1), (3, 1, 0), (5, -1, 0),
    (3, 0, -1), (5, 0, -1), (6, 1, -1), (4, -1, -1),
    (4, 1, -1), (5, 1, -2), (5, 2, -1), (3, 2, -2),
    (4, 1, -2), (5, 0, -2), (4, 0, -3), (3, 2, -1),
    (3, -1, -2), (3, 0, -2), (4, -1, -2), (4, 2, -1),
    (4, 2, 0), (4, 0, -2), (3, -1, -3), (3, 1, -1),
    (-1, 1, 0), (1, -1, 0), (-1, 0, -1), (1, 0, -1),
    (2, 1, -1), (0, -1, -1), (0, 1, -1), (1, 1, -2),
    (1, 2, -1), (-1, 2, -2), (0, 1, -2), (1, 0, -2),
    (2, -1, -2), (0, 0, -3), (2, -1, -1), (-1, 2, -1),
    (2, 2, -3), (-1, -1, -2), (-1, 0, -2), (2, 1, -2),
    (2, 0, -1), (0, -1, -2), (1, 2, -2), (0, 2, -1),
    (2, 2, -2), (2, 0, 0), (0, 2, 0), (0, 0, -2),
    (-1, -1, -3), (1, 1, -3), (-1, 1, -1), (1, -1, -1),
    (-3, -1, 0), (-3, 0, -1), (-2, 1, -1), (-4, -1, -1),
    (-3, 1, -2), (-3, 2, -1), (-5, 2, -2), (-4, 1, -2),
    (-3, 0, -2), (-2, -1, -2), (-4, 0, -3), (-2, -1, -1),
    (-2, 2, -3), (-2, 1, -2), (-2, 0, -1), (-4, -1, -2),
    (-3, 2, -2), (-4, 2, -1), (-2, 2, -2), (-2, 0, 0),
    (-3, 1, -3), (-3, -1, -1), (3, -3, 0), (3, -4, -1),
    (6, -3, -1), (4, -3, -1), (5, -3, -2), (5, -2, -1),
    (3, -2, -2), (4, -3, -2), (5, -4, -2), (4, -4, -3),
    (3, -2, -1), (3, -4, -2), (4, -2, -1), (4, -2, 0),
    (3, -3, -1), (-1, -3, 0), (-1, -4, -1), (2, -3, -1),
    (0, -3, -1), (1, -3, -2), (1, -2, -1), (-1, -2, -2),
    (0, -3, -2), (1, -4, -2), (2, -5, -2), (0, -4, -3),
    (-1, -2, -1), (2, -2, -3), (-1, -4, -2), (2, -3, -2),
    (2, -4, -1), (1, -2, -2), (0, -2, -1), (2, -2, -2),
    (0, -2, 0), (1, -3, -3), (-1, -3, -1), (-2, -3, -1),
    (-3, -3, -2), (-3, -2, -1), (-5, -2, -2), (-4, -3, -2),
    (-3, -4, -2), (-2, -5, -2), (-4, -4, -3), (-2, -2, -3),
    (-2, -3, -2), (-2, -4, -1), (-3, -2, -2), (-4, -2, -1),
    (-2, -2, -2), (-3, -3, -3),
)
