"""Fractal lattice family: published counts, centers, separation, models."""

from collections import Counter
from itertools import product

import pytest

from estcrystal import scheduler as sched
from estcrystal.lattice import g3d, g4d, index_of
from estcrystal.scheduler import (
    CENTRAL_WINDOW,
    ModelSpec,
    PointLattice,
    Region,
    build_cycle1,
    f0_points,
    full_model_42,
    model_spec,
    points_in_region,
    stage_of_u,
    verify_separation,
)

PUBLISHED_K_LIST_1 = (0, 1, 2, 3, 29, 30, 31, 86, 88, 331, 333, 1751, 1753)


@pytest.fixture(scope="module")
def lattices():
    return build_cycle1()


class TestCycleConstruction:
    def test_total_and_final_u(self, lattices):
        assert len(lattices) == 2222
        assert lattices[-1].u == 2222

    def test_stage_phase_counts(self, lattices):
        counts = Counter(stage_of_u(lat.u) for lat in lattices)
        assert [counts[k] for k in sorted(counts)] == [8, 6, 14, 14, 30, 30, 150, 150, 910, 910]

    def test_published_center_samples(self, lattices):
        assert lattices[42].center == (-1, 2, 1, 4)    # u = 43
        assert lattices[43].center == (-1, 2, 1, 0)    # u = 44
        assert lattices[46].center == (-1, 2, 1, -2)   # u = 47
        assert lattices[47].center == (-1, 1, 2, 4)    # u = 48

    def test_stage1_shift_rule(self, lattices):
        # u = 37 derives from u = 9 shifted up the frequency axis.
        assert lattices[36].center == (0, 0, -1, 1)
        for u in range(1, 15):
            c = lattices[u - 1].center
            assert lattices[u + 13].center == (c[0], c[1], c[2], c[3] - 2)
            assert lattices[u + 27].center == (c[0], c[1], c[2], c[3] + 2)

    def test_period_lists_switch_at_stage_boundaries(self, lattices):
        expected = {
            range(1, 15): (4, 4, 4, 4),
            range(15, 43): (4, 4, 4, 12),
            range(43, 103): (12, 4, 4, 12),
            range(103, 403): (12, 12, 4, 12),
            range(403, 2223): (12, 12, 12, 12),
        }
        for span, periods in expected.items():
            assert all(lattices[u - 1].periods == periods for u in span)

    def test_all_centers_even_sum(self, lattices):
        assert all(sum(lat.center) % 2 == 0 for lat in lattices)

    def test_five_block_n4_tour(self, lattices):
        # Phase-1 additions of stages 2..4 come in blocks of five sharing a
        # 3d projection, frequency components ordered by the parity rule.
        for start, count in ((43, 30), (103, 150), (403, 910)):
            for base in range(start, start + count, 5):
                block = [lattices[u - 1].center for u in range(base, base + 5)]
                proj = {c[:3] for c in block}
                assert len(proj) == 1
                tour = tuple(c[3] for c in block)
                if g3d(block[0]) % 2 == 0:
                    assert tour == (4, 0, -4, 2, -2)
                else:
                    assert tour == (3, -1, -5, 1, -3)

    def test_phase1_centers_inside_central_subsets(self, lattices):
        windows = {
            (2, 1): Region((-5, -1, -1, -5), (2, 2, 2, 6)),
            (3, 1): Region((-5, -5, -1, -5), (6, 2, 2, 6)),
            (4, 1): Region((-5, -5, -5, -5), (6, 6, 2, 6)),
        }
        for lat in lattices:
            key = stage_of_u(lat.u)
            if key in windows:
                assert lat.center in windows[key]

    def test_cycle2_anchor_constants(self):
        assert sched.CYCLE2_START == {"u": 2223, "center": (4, 4, 4, -6),
                                      "periods": (12, 12, 12, 36)}
        assert sched.CYCLE2_END == {"u": 108526, "center": (-15, -15, 5, -7),
                                    "periods": (36, 36, 36, 36)}


class TestRegions:
    def test_single_point(self, lattices):
        got = points_in_region(lattices[0], Region((-1, -1, -1, -1), (2, 2, 2, 2)))
        assert got == [(0, 0, 0, 0)]

    def test_f0_in_central_window(self):
        assert len(f0_points(CENTRAL_WINDOW)) == 648

    def test_residue_counts_per_axis(self, lattices):
        assert len(points_in_region(lattices[14], CENTRAL_WINDOW)) == 27   # periods 4,4,4,12
        assert len(points_in_region(lattices[50], CENTRAL_WINDOW)) == 9    # periods 12,4,4,12
        assert len(points_in_region(lattices[200], CENTRAL_WINDOW)) == 3   # periods 12,12,4,12
        assert len(points_in_region(lattices[500], CENTRAL_WINDOW)) == 1   # periods 12,12,12,12

    def test_region_enumeration_matches_filter(self, lattices):
        lat = lattices[8]
        box = Region((-4, -4, -4, -4), (5, 5, 5, 5))
        got = set(points_in_region(lat, box))
        want = set()
        for shift in product(range(-3, 4), repeat=4):
            p = tuple(c + 4 * s for c, s in zip(lat.center, shift))
            if p in box:
                want.add(p)
        assert got == want

    def test_points_sorted_by_index(self, lattices):
        pts = points_in_region(lattices[8], CENTRAL_WINDOW)
        idx = [index_of(p) for p in pts]
        assert idx == sorted(idx)

    def test_even_point_count_of_unit_cell(self):
        # Any period-4 subset window holds 128 lattice points.
        count = sum(1 for p in product(range(-1, 3), repeat=4) if sum(p) % 2 == 0)
        assert count == 128

    def test_empty_region_rejected(self):
        with pytest.raises(ValueError):
            Region((0, 0, 0, 0), (-1, 0, 0, 0))


class TestSeparation:
    def test_first_fourteen_lattices_clean(self):
        report = verify_separation()
        assert report.ok
        assert report.pairs_checked > 0

    def test_family0_translate_distance(self, lattices):
        # Two points of lattice 1 differing by one period along an axis.
        assert g4d((4, 0, 0, 0)) == 4 > 2

    def test_artificial_violation_detected(self):
        bad = [
            PointLattice(u=1, center=(0, 0, 0, 0), periods=(4, 4, 4, 4), k=0),
            PointLattice(u=2, center=(1, 1, 0, 0), periods=(4, 4, 4, 4), k=0),
        ]
        report = verify_separation(bad, Region((-9, -9, -9, -9), (10, 10, 10, 10)))
        assert not report.ok
        assert any(g4d(d) <= 2 for _, _, d in report.violations)


class TestModels:
    def test_zero_model(self):
        m = model_spec(0)
        assert m.k_list == (0,)
        assert m.equation_count == 1
        assert m.points[0] == ((0, 0, 0, 0),)

    def test_published_k_list_for_p1(self):
        assert model_spec(1).k_list == PUBLISHED_K_LIST_1

    def test_published_equation_counts(self):
        assert model_spec(1).equation_count == 998
        assert model_spec(2).equation_count == 1520
        assert model_spec(3).equation_count == 2199

    def test_published_family_counts(self):
        assert len(model_spec(2).k_list) == 69
        assert len(model_spec(3).k_list) == 210

    def test_family_selection_rule(self, lattices):
        m = model_spec(2)
        chosen = set(m.k_list) - {0}
        for lat in lattices[8:]:
            assert (lat.k in chosen) == (g4d(lat.center) <= 2)

    def test_full_model_counts(self):
        full = full_model_42()
        assert full.equation_count == 5150
        assert full.k_list == tuple(range(0, 2215))

    def test_full_model_contains_inner_block(self):
        full = full_model_42()
        pts = full.point_set()
        block = [p for p in product(range(-3, 5), repeat=4) if sum(p) % 2 == 0]
        assert len(block) == 2048
        assert all(p in pts for p in block)

    def test_full_model_families_disjoint(self):
        full = full_model_42()
        total = sum(len(v) for v in full.points.values())
        assert len(full.point_set()) == total

    def test_per_period_breakdown(self, lattices):
        sizes = Counter()
        for lat in lattices:
            sizes[lat.periods] += len(points_in_region(lat, CENTRAL_WINDOW))
        assert sizes[(4, 4, 4, 4)] == 648 + 486
        assert sizes[(4, 4, 4, 12)] == 756
        assert sizes[(12, 4, 4, 12)] == 540
        assert sizes[(12, 12, 4, 12)] == 900
        assert sizes[(12, 12, 12, 12)] == 1820

    def test_model_points_lie_on_their_lattice(self, lattices):
        m = model_spec(1)
        for k in m.k_list:
            if k == 0:
                continue
            lat = lattices[8 + k - 1]
            for p in m.points[k]:
                assert all((pc - cc) % per == 0
                           for pc, cc, per in zip(p, lat.center, lat.periods))
                assert p in CENTRAL_WINDOW

    def test_model_spec_validation(self):
        with pytest.raises(ValueError):
            ModelSpec(name="bad", k_list=(1, 2), points={1: (), 2: ()})
        with pytest.raises(ValueError):
            ModelSpec(name="bad", k_list=(0, 2, 2), points={0: (), 2: ()})
        with pytest.raises(ValueError):
            model_spec(5)

    def test_custom_model(self):
        m = sched.custom_model([3, 1], max_points=2, name="tiny")
        assert m.k_list == (0, 1, 3)
        assert all(len(v) <= 2 for v in m.points.values())
        with pytest.raises(ValueError):
            sched.custom_model([4000])

    def test_equations_iterate_in_fractal_order(self):
        m = model_spec(1)
        seen = list(m.equations())
        ks = [k for k, _ in seen]
        assert ks == sorted(ks)
        for k in m.k_list:
            idx = [index_of(p) for kk, p in seen if kk == k]
            assert idx == sorted(idx)
