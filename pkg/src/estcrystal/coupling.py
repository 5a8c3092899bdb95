"""Per-equation coupling blocks of the harmonic-space Dirac system.

With the wave function expanded over lattice harmonics, the dimensionless
Dirac operator turns into a block system: the diagonal block of equation n
collects the momentum and mass terms, and each of the six field amplitudes
couples n to the two neighbours n -/+ s_j.  The equation at n reads

    D_n c(n) - sum_j [ (alpha . A_j) c(n - s_j) + (alpha . A_j*) c(n + s_j) ] = 0

so the off-diagonal blocks carry a minus sign and are independent of n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import Point, stencil_13

__all__ = [
    "FieldConfig",
    "UPWARD_SHIFTS",
    "dirac_matrices",
    "d_n",
    "coupling",
    "stencil_blocks",
    "a1_shift_table",
    "a2_shift_table",
    "potential_terms",
    "standing_wave_amplitudes",
    "field_config_from_dict",
    "field_config_to_dict",
    "load_field_config",
]

# The six upward shifts; each has n4 = +1 and unit spatial norm.  The full
# 13-point stencil is these, their negatives, and the zero shift.
UPWARD_SHIFTS: tuple[Point, ...] = (
    (1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 1),
    (-1, 0, 0, 1), (0, -1, 0, 1), (0, 0, -1, 1),
)

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def dirac_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The four Dirac matrices in the standard representation.

    alpha_1..3 are off-diagonal Pauli blocks, alpha_4 = diag(1, 1, -1, -1).
    Any unitarily equivalent choice conjugates the solution blocks without
    changing the accuracy functional; this one is fixed for reproducibility.
    """
    zeros = np.zeros((2, 2), dtype=complex)
    alphas = tuple(np.block([[zeros, s], [s, zeros]]) for s in _SIGMA)
    alpha4 = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    return alphas[0], alphas[1], alphas[2], alpha4


_ALPHA = dirac_matrices()
_U4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class FieldConfig:
    """Dimensionless field and quasi-momentum parameters of one run.

    amplitudes: complex (6, 3) array, one 3-vector per upward shift.
    q, q4:      quasi-momentum 3-vector and frequency of the solution family.
    omega:      field frequency; strictly positive.
    """

    amplitudes: np.ndarray
    q: np.ndarray
    q4: float
    omega: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (6, 3):
            raise ValueError(f"amplitudes must be (6, 3), got {amps.shape}")
        qv = np.asarray(self.q, dtype=float)
        if qv.shape != (3,):
            raise ValueError(f"q must be a 3-vector, got {qv.shape}")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "q", qv)
        object.__setattr__(self, "q4", float(self.q4))
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def is_zero_field(self) -> bool:
        return not np.any(self.amplitudes)


def d_n(cfg: FieldConfig, n: Point) -> np.ndarray:
    """Diagonal block of equation n: momentum, frequency and mass terms."""
    out = _ALPHA[3].copy()
    for k in range(3):
        out += _ALPHA[k] * (cfg.q[k] + n[k] * cfg.omega)
    out -= _U4 * (cfg.q4 + n[3] * cfg.omega)
    return out


def _alpha_dot(vec: np.ndarray) -> np.ndarray:
    return vec[0] * _ALPHA[0] + vec[1] * _ALPHA[1] + vec[2] * _ALPHA[2]


def coupling(cfg: FieldConfig, n: Point, s: Point) -> np.ndarray:
    """Block multiplying c(n + s) in the equation at n.

    Only the 13 stencil shifts are admissible; all off-diagonal blocks are
    independent of n.
    """
    if s == (0, 0, 0, 0):
        return d_n(cfg, n)
    s = tuple(s)
    for j, sj in enumerate(UPWARD_SHIFTS):
        if s == sj:
            return -_alpha_dot(np.conj(cfg.amplitudes[j]))
        if s == tuple(-c for c in sj):
            return -_alpha_dot(cfg.amplitudes[j])
    raise ValueError(f"shift {s} outside the coupling stencil")


def stencil_blocks(cfg: FieldConfig) -> dict[Point, np.ndarray]:
    """The twelve n-independent off-diagonal blocks keyed by shift."""
    out: dict[Point, np.ndarray] = {}
    for j, sj in enumerate(UPWARD_SHIFTS):
        down = tuple(-c for c in sj)
        out[down] = -_alpha_dot(cfg.amplitudes[j])
        out[sj] = -_alpha_dot(np.conj(cfg.amplitudes[j]))
    return out


def a1_shift_table(cfg: FieldConfig) -> dict[Point, np.ndarray]:
    """Single-amplitude blocks keyed by the difference n - m they couple."""
    amps = cfg.amplitudes
    table: dict[Point, np.ndarray] = {}
    for j, sj in enumerate(UPWARD_SHIFTS):
        down = tuple(-c for c in sj)
        table[down] = _alpha_dot(amps[j])
        table[sj] = _alpha_dot(np.conj(amps[j]))
    return table


def a2_shift_table(cfg: FieldConfig) -> dict[Point, complex]:
    """Scalar double-amplitude sums keyed by the difference n - m."""
    amps = cfg.amplitudes
    table: dict[Point, complex] = {}

    def _acc(shift: Point, value: complex):
        table[shift] = table.get(shift, 0.0) + value

    for j in range(6):
        for l in range(6):
            sj = np.array(UPWARD_SHIFTS[j])
            sl = np.array(UPWARD_SHIFTS[l])
            aj, al = amps[j], amps[l]
            _acc(tuple(-(sj + sl)), complex(np.dot(aj, al)))
            _acc(tuple(sl - sj), complex(np.dot(aj, np.conj(al))))
            _acc(tuple(sj - sl), complex(np.dot(np.conj(aj), al)))
            _acc(tuple(sj + sl), complex(np.dot(np.conj(aj), np.conj(al))))
    return table


def potential_terms(cfg: FieldConfig):
    """Vector potential as a function of x plus its closed-form pair sums.

    Returns ``(a_prime, a1, a2)``:

    * ``a_prime(x)`` evaluates the real 3-vector potential at a space-time
      point (its components are sums of conjugate harmonic pairs).
    * ``a1(m, n)`` is the 4x4 single-amplitude block, nonzero only when
      ``n - m`` is a stencil shift with ``n4`` component +-1.
    * ``a2(m, n)`` is the complex scalar double sum, nonzero only when
      ``n - m`` is a sum or difference of two upward shifts.
    """
    amps = cfg.amplitudes
    a1_table = a1_shift_table(cfg)
    a2_table = a2_shift_table(cfg)

    def a_prime(x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(3)
        for j, sj in enumerate(UPWARD_SHIFTS):
            phase = 2.0 * np.pi * (sj[0] * x[0] + sj[1] * x[1] + sj[2] * x[2] - sj[3] * x[3])
            out += 2.0 * np.real(amps[j] * np.exp(1j * phase))
        return out

    def a1(m: Point, n: Point) -> np.ndarray:
        d = tuple(b - a for a, b in zip(m, n))
        blk = a1_table.get(d)
        return blk.copy() if blk is not None else np.zeros((4, 4), dtype=complex)

    def a2(m: Point, n: Point) -> complex:
        d = tuple(b - a for a, b in zip(m, n))
        return a2_table.get(d, 0.0)

    return a_prime, a1, a2


def standing_wave_amplitudes(waves, polarizations=None) -> np.ndarray:
    """Amplitude table for three standing waves with orthogonal phase planes.

    ``waves`` gives one complex scalar per axis; each standing wave pairs the
    forward and backward shift along that axis with equal amplitude.  The
    default polarizations are the cyclic transverse unit vectors (the wave
    along axis k is polarized along axis k+1).
    """
    waves = np.asarray(waves, dtype=complex)
    if waves.shape != (3,):
        raise ValueError("waves must be three complex scalars")
    if polarizations is None:
        pol = np.roll(np.eye(3), -1, axis=0)  # x->e2, y->e3, z->e1
    else:
        pol = np.asarray(polarizations, dtype=complex)
        if pol.shape != (3, 3):
            raise ValueError("polarizations must be three 3-vectors")
    amps = np.zeros((6, 3), dtype=complex)
    for axis in range(3):
        amps[axis] = waves[axis] * pol[axis]      # forward shift s_{axis+1}
        amps[axis + 3] = waves[axis] * pol[axis]  # backward shift s_{axis+4}
    return amps


# ---------------------------------------------------------------------------
# JSON-style configuration.
# ---------------------------------------------------------------------------

def _complex_from_pair(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(re, im)


def field_config_from_dict(data: dict) -> FieldConfig:
    """Build a FieldConfig from a parsed configuration mapping."""
    try:
        omega = float(data["omega"])
        q = [float(v) for v in data.get("q", (0.0, 0.0, 0.0))]
        q4 = float(data.get("q4", 0.0))
        if "amplitudes" in data:
            rows = data["amplitudes"]
            if len(rows) != 6:
                raise ValueError("amplitudes must have 6 entries")
            amps = np.array([[_complex_from_pair(v) for v in row] for row in rows])
        elif "standing_wave_preset" in data:
            preset = data["standing_wave_preset"]
            waves = [_complex_from_pair(v) for v in preset["waves"]]
            pol = preset.get("polarizations")
            amps = standing_wave_amplitudes(waves, pol)
        else:
            amps = np.zeros((6, 3), dtype=complex)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"invalid field configuration: {exc}") from exc
    return FieldConfig(amplitudes=amps, q=np.array(q), q4=q4, omega=omega)


def field_config_to_dict(cfg: FieldConfig) -> dict:
    """Round-trippable plain representation (complex values as [re, im])."""
    return {
        "omega": cfg.omega,
        "q": [float(v) for v in cfg.q],
        "q4": cfg.q4,
        "amplitudes": [[[float(v.real), float(v.imag)] for v in row] for row in cfg.amplitudes],
    }


def load_field_config(path) -> FieldConfig:
    """Read a FieldConfig from a JSON file."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        return field_config_from_dict(json.load(fh))
