"""Dirac matrices, diagonal blocks, stencil couplings and pair sums."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import estcrystal.coupling as cpl
from estcrystal.lattice import stencil_13

from conftest import make_sample_field, make_zero_field

U4 = np.eye(4)


class TestDiracMatrices:
    def test_clifford_relations_exact(self):
        mats = cpl.dirac_matrices()
        for i in range(4):
            for j in range(4):
                anti = mats[i] @ mats[j] + mats[j] @ mats[i]
                expected = 2 * U4 if i == j else np.zeros((4, 4))
                assert np.array_equal(anti, expected)

    def test_traceless_and_hermitian(self):
        for m in cpl.dirac_matrices():
            assert np.trace(m) == 0
            assert np.array_equal(m, m.conj().T)


class TestDiagonalBlock:
    def test_origin_rest_block(self):
        cfg = make_zero_field(q4=0.0)
        assert np.array_equal(cpl.d_n(cfg, (0, 0, 0, 0)), cpl.dirac_matrices()[3])

    def test_on_shell_block_is_singular(self):
        cfg = make_zero_field(q4=1.0)
        d = cpl.d_n(cfg, (0, 0, 0, 0))
        assert abs(np.linalg.det(d)) < 1e-14

    def test_formula_substitution(self):
        cfg = make_zero_field(q4=0.0, omega=0.5)
        a = cpl.dirac_matrices()
        want = 0.5 * a[2] - 0.5 * U4 + a[3]
        assert np.allclose(cpl.d_n(cfg, (0, 0, 1, 1)), want, atol=1e-15)

    @given(st.tuples(*(st.integers(min_value=-6, max_value=6) for _ in range(4))))
    @settings(max_examples=100)
    def test_hermitian_for_real_parameters(self, base):
        n = (*base[:3], base[3] + sum(base) % 2)
        cfg = make_sample_field()
        d = cpl.d_n(cfg, n)
        assert np.linalg.norm(d - d.conj().T) == 0.0


class TestCoupling:
    def test_zero_field_off_diagonal_vanishes(self):
        cfg = make_zero_field()
        blk = cpl.coupling(cfg, (0, 0, 0, 0), (1, 0, 0, 1))
        assert not np.any(blk)

    def test_single_amplitude_substitution(self):
        amps = np.zeros((6, 3), dtype=complex)
        a = 0.7 - 0.2j
        amps[0, 0] = a
        cfg = cpl.FieldConfig(amplitudes=amps, q=np.zeros(3), q4=0.0, omega=1.0)
        alpha1 = cpl.dirac_matrices()[0]
        got = cpl.coupling(cfg, (0, 0, 0, 0), (-1, 0, 0, -1))
        assert np.allclose(got, -a * alpha1, atol=1e-16)
        got_up = cpl.coupling(cfg, (0, 0, 0, 0), (1, 0, 0, 1))
        assert np.allclose(got_up, -np.conj(a) * alpha1, atol=1e-16)

    def test_conjugation_symmetry(self):
        cfg = make_sample_field()
        for sj in cpl.UPWARD_SHIFTS:
            down = tuple(-c for c in sj)
            up = cpl.coupling(cfg, (0, 0, 0, 0), sj)
            dn = cpl.coupling(cfg, (0, 0, 0, 0), down)
            assert np.allclose(up, dn.conj().T, atol=1e-15)

    def test_shift_outside_stencil_rejected(self):
        cfg = make_sample_field()
        with pytest.raises(ValueError):
            cpl.coupling(cfg, (0, 0, 0, 0), (2, 0, 0, 0))
        with pytest.raises(ValueError):
            cpl.coupling(cfg, (0, 0, 0, 0), (0, 0, 0, 2))

    def test_stencil_closure(self):
        cfg = make_sample_field()
        blocks = cpl.stencil_blocks(cfg)
        assert set(blocks) | {(0, 0, 0, 0)} == set(stencil_13())
        ups = {s for s in blocks if s[3] == 1}
        downs = {s for s in blocks if s[3] == -1}
        assert ups == set(cpl.UPWARD_SHIFTS)
        assert downs == {tuple(-c for c in s) for s in cpl.UPWARD_SHIFTS}

    def test_diagonal_depends_on_n_offdiagonal_does_not(self):
        cfg = make_sample_field()
        s = (0, 1, 0, 1)
        b1 = cpl.coupling(cfg, (0, 0, 0, 0), s)
        b2 = cpl.coupling(cfg, (2, -1, 1, 0), s)
        assert np.array_equal(b1, b2)
        d1 = cpl.coupling(cfg, (0, 0, 0, 0), (0, 0, 0, 0))
        d2 = cpl.coupling(cfg, (2, -1, 1, 0), (0, 0, 0, 0))
        assert not np.array_equal(d1, d2)


class TestPotentialTerms:
    def test_zero_field_everything_vanishes(self):
        cfg = make_zero_field()
        a_prime, a1, a2 = cpl.potential_terms(cfg)
        assert not np.any(a_prime([0.3, 0.4, 0.1, 0.9]))
        assert not np.any(a1((0, 0, 0, 0), (1, 0, 0, 1)))
        assert a2((0, 0, 0, 0), (1, 1, 0, 2)) == 0

    def test_double_shift_sums_both_orderings(self):
        amps = np.zeros((6, 3), dtype=complex)
        amps[0] = np.array([0.1 + 0.2j, 0.0, 0.05j])
        amps[1] = np.array([0.0, 0.3 - 0.1j, 0.02])
        cfg = cpl.FieldConfig(amplitudes=amps, q=np.zeros(3), q4=0.0, omega=1.0)
        _, _, a2 = cpl.potential_terms(cfg)
        m = (0, 0, 0, 0)
        n = (-1, -1, 0, -2)  # n - m = -(s_1 + s_2)
        want = 2 * complex(np.dot(amps[0], amps[1]))
        assert abs(a2(m, n) - want) < 1e-15

    def test_single_shift_block(self):
        cfg = make_sample_field()
        _, a1, _ = cpl.potential_terms(cfg)
        alphas = cpl.dirac_matrices()
        m = (0, 0, 0, 0)
        n = (-1, 0, 0, -1)  # n - m = -s_1
        want = sum(cfg.amplitudes[0][k] * alphas[k] for k in range(3))
        assert np.allclose(a1(m, n), want, atol=1e-15)

    def test_a2_conjugate_symmetry(self):
        cfg = make_sample_field()
        _, _, a2 = cpl.potential_terms(cfg)
        m = (0, 0, 0, 0)
        for n in [(1, 0, 0, 1), (1, 1, 0, 2), (2, 0, 0, 0), (0, 0, 0, 0),
                  (1, -1, 0, 0), (0, 0, -2, -2), (-1, 0, 1, 0)]:
            assert abs(a2(m, n) - np.conj(a2(n, m))) < 1e-15

    def test_potential_is_real(self):
        cfg = make_sample_field()
        a_prime, _, _ = cpl.potential_terms(cfg)
        for x in ([0, 0, 0, 0], [0.3, -0.2, 0.9, 1.7], [0.25, 0.5, 0.75, 0.125]):
            val = a_prime(x)
            assert val.dtype == float

    def test_potential_periodicity(self):
        cfg = make_sample_field()
        a_prime, _, _ = cpl.potential_terms(cfg)
        x = np.array([0.12, 0.34, 0.56, 0.78])
        for axis in range(4):
            shifted = x.copy()
            shifted[axis] += 1.0
            assert np.allclose(a_prime(shifted), a_prime(x), atol=1e-12)


class TestPresetsAndConfig:
    def test_standing_wave_pairs_forward_backward(self):
        amps = cpl.standing_wave_amplitudes([0.1, 0.2j, 0.3 - 0.1j])
        assert amps.shape == (6, 3)
        for axis in range(3):
            assert np.array_equal(amps[axis], amps[axis + 3])
            # transverse by default: no component along the propagation axis
            assert amps[axis][axis] == 0

    def test_standing_wave_custom_polarization(self):
        pol = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
        amps = cpl.standing_wave_amplitudes([1.0, 1.0, 1.0], pol)
        assert np.array_equal(amps[0], pol[0])

    def test_config_dict_round_trip(self):
        cfg = make_sample_field()
        back = cpl.field_config_from_dict(cpl.field_config_to_dict(cfg))
        assert np.array_equal(back.amplitudes, cfg.amplitudes)
        assert np.array_equal(back.q, cfg.q)
        assert back.q4 == cfg.q4 and back.omega == cfg.omega

    def test_file_loading(self, tmp_path):
        path = tmp_path / "field.json"
        payload = {"omega": 0.5, "q": [0, 0, 0.1], "q4": 0.2,
                   "standing_wave_preset": {"waves": [[0.05, 0.0], [0.0, 0.02], [0.01, 0.01]]}}
        path.write_text(json.dumps(payload))
        cfg = cpl.load_field_config(path)
        assert cfg.omega == 0.5
        assert np.any(cfg.amplitudes)

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            cpl.FieldConfig(amplitudes=np.zeros((5, 3)), q=np.zeros(3), q4=0.0, omega=1.0)
        with pytest.raises(ValueError):
            cpl.FieldConfig(amplitudes=np.zeros((6, 3)), q=np.zeros(2), q4=0.0, omega=1.0)
        with pytest.raises(ValueError):
            cpl.FieldConfig(amplitudes=np.zeros((6, 3)), q=np.zeros(3), q4=0.0, omega=0.0)
        with pytest.raises(ValueError):
            cpl.field_config_from_dict({"q": [0, 0, 0]})
        with pytest.raises(ValueError):
            cpl.field_config_from_dict({"omega": 1.0, "amplitudes": [[0, 0, 0]] * 5})
