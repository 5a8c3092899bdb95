"""Wave function, unit-cell quadrature matrices and the accuracy functional.

A solution table maps an amplitude bispinor to the Fourier coefficients of a
wave function.  Because the harmonics are orthonormal over the dimensionless
unit 4-cube, every quadratic observable reduces to a lattice sum over the
solution blocks; the brute-force grid quadratures here exist to cross-check
those closed forms, not to compute them.

The accuracy functional R is the square-root Rayleigh quotient of the
residual Gram matrix against the solution Gram matrix: R = 0 exactly for a
solution of the untruncated system, and small R flags a good approximation.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .coupling import FieldConfig, a1_shift_table, a2_shift_table, d_n
from .engine import SolutionTable, residual_map
from .lattice import Point

__all__ = [
    "phase",
    "evolution",
    "wavefunction",
    "u_e",
    "a_e",
    "u_d",
    "u_d_from_residuals",
    "a_mean",
    "accuracy",
    "rayleigh_minimizer",
    "best_amplitude",
    "quadrature_u_e",
    "quadrature_a_e",
    "default_grid",
]


def phase(cfg: FieldConfig, n: Point, x) -> float:
    """Phase of harmonic n at dimensionless space-time point x."""
    x = np.asarray(x, dtype=float)
    spatial = sum((n[k] + cfg.q[k] / cfg.omega) * x[k] for k in range(3))
    return 2.0 * np.pi * (spatial - (n[3] + cfg.q4 / cfg.omega) * x[3])


def evolution(table: SolutionTable, cfg: FieldConfig, x) -> np.ndarray:
    """Evolution operator at x: the phase-weighted sum of solution blocks."""
    out = np.zeros((4, 4), dtype=complex)
    for n, blk in table.blocks.items():
        out += np.exp(1j * phase(cfg, n, x)) * blk
    return out


def wavefunction(table: SolutionTable, cfg: FieldConfig, x, a0) -> np.ndarray:
    """Wave function value at x for amplitude a0."""
    return evolution(table, cfg, x) @ np.asarray(a0, dtype=complex)


def u_e(table: SolutionTable) -> np.ndarray:
    """Unit-cell Gram matrix of the evolution operator: sum of S^dag S."""
    out = np.zeros((4, 4), dtype=complex)
    for blk in table.blocks.values():
        out += blk.conj().T @ blk
    return out


def a_e(table: SolutionTable, operator) -> np.ndarray:
    """Quadrature matrix of a harmonic-diagonal operator: sum S^dag A(n) S."""
    op = operator if callable(operator) else (lambda n: operator[n])
    out = np.zeros((4, 4), dtype=complex)
    for n, blk in table.blocks.items():
        out += blk.conj().T @ np.asarray(op(n), dtype=complex) @ blk
    return out


def u_d(table: SolutionTable, cfg: FieldConfig) -> np.ndarray:
    """Residual Gram matrix assembled from the closed-form pair sums.

    Combines the diagonal momentum blocks with the single- and double-
    amplitude shift tables.  An independent assembly from the stencil
    residual map is provided by :func:`u_d_from_residuals`; the two must
    agree, which pins down the sign convention of the coupling blocks.
    """
    blocks = table.blocks
    dmat = {n: d_n(cfg, n) for n in blocks}
    out = np.zeros((4, 4), dtype=complex)
    for n, blk in blocks.items():
        dn = dmat[n]
        out += blk.conj().T @ (dn @ dn) @ blk
    a1t = a1_shift_table(cfg)
    a2t = a2_shift_table(cfg)
    for m, sm in blocks.items():
        smh = sm.conj().T
        for d, a1 in a1t.items():
            n = (m[0] + d[0], m[1] + d[1], m[2] + d[2], m[3] + d[3])
            sn = blocks.get(n)
            if sn is not None:
                out -= smh @ (a1 @ dmat[n] + dmat[m] @ a1) @ sn
        for d, a2 in a2t.items():
            n = (m[0] + d[0], m[1] + d[1], m[2] + d[2], m[3] + d[3])
            sn = blocks.get(n)
            if sn is not None:
                out += a2 * (smh @ sn)
    return out


def u_d_from_residuals(table: SolutionTable, cfg: FieldConfig) -> np.ndarray:
    """Residual Gram matrix as the harmonic sum of squared stencil residuals.

    Mathematically identical to :func:`u_d`; numerically it is positive
    semidefinite by construction and preserves the cancellation inside each
    stencil residual before squaring, so it is the assembly used by the
    accuracy functional.  Near-exact solutions then score R at round-off
    level instead of the square root of the pair-sum noise floor.
    """
    out = np.zeros((4, 4), dtype=complex)
    for mat in residual_map(cfg, table).values():
        out += mat.conj().T @ mat
    return out


def a_mean(table: SolutionTable, cfg: FieldConfig, operator, a0) -> complex:
    """Mean value of a harmonic-diagonal operator over the wave function."""
    a0 = np.asarray(a0, dtype=complex)
    if not np.any(a0):
        raise ValueError("amplitude a0 must be nonzero")
    den = complex(a0.conj() @ u_e(table) @ a0)
    if den.real <= 0.0:
        raise ValueError("amplitude lies outside the range of the solution")
    num = complex(a0.conj() @ a_e(table, operator) @ a0)
    return num / den.real


def accuracy(table: SolutionTable, cfg: FieldConfig, a0, *, gram=None) -> float:
    """Accuracy functional R: relative unit-cell residual of the solution.

    ``gram`` may carry a precomputed residual Gram matrix to amortize scans
    over many amplitudes.
    """
    a0 = np.asarray(a0, dtype=complex)
    den = float((a0.conj() @ u_e(table) @ a0).real)
    if den <= 0.0:
        raise ValueError("degenerate denominator: a0 outside the solution range")
    ud = u_d_from_residuals(table, cfg) if gram is None else gram
    num = float((a0.conj() @ ud @ a0).real)
    return float(np.sqrt(max(num, 0.0) / den))


def rayleigh_minimizer(ue: np.ndarray, ud: np.ndarray, *,
                       rank_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Minimizer and minimum of sqrt(a^dag ud a / a^dag ue a) over amplitudes.

    Whitens by the positive square root of ``ue``; a rank-deficient ``ue``
    restricts the search to its range (with a diagnostic).
    """
    w, vecs = np.linalg.eigh(0.5 * (ue + ue.conj().T))
    cut = rank_tol * max(float(np.trace(ue).real), rank_tol)
    keep = w > cut
    if not np.any(keep):
        raise ValueError("solution Gram matrix vanishes; no admissible amplitude")
    if not np.all(keep):
        warnings.warn(
            f"solution Gram matrix has rank {int(keep.sum())} < 4; "
            "restricting the amplitude search to its range",
            stacklevel=2,
        )
    basis = vecs[:, keep] / np.sqrt(w[keep])
    m = basis.conj().T @ ud @ basis
    mw, mv = np.linalg.eigh(0.5 * (m + m.conj().T))
    a0 = basis @ mv[:, 0]
    a0 = a0 / np.linalg.norm(a0)
    # Fix the arbitrary phase so repeated runs agree bit for bit.
    lead = int(np.argmax(np.abs(a0)))
    a0 = a0 / (a0[lead] / abs(a0[lead]))
    return a0, float(np.sqrt(max(float(mw[0]), 0.0)))


def best_amplitude(table: SolutionTable, cfg: FieldConfig, *,
                   rank_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Amplitude minimizing the accuracy functional, with the minimum value.

    The on-shell free-space model lands here with a rank-2 solution Gram
    matrix; the range restriction of :func:`rayleigh_minimizer` then returns
    a kernel amplitude with R at round-off level.
    """
    return rayleigh_minimizer(u_e(table), u_d_from_residuals(table, cfg),
                              rank_tol=rank_tol)


# ---------------------------------------------------------------------------
# Brute-force grid quadrature (cross-check of the closed forms).
# ---------------------------------------------------------------------------

def default_grid(table: SolutionTable) -> int:
    """Grid size per axis that resolves every harmonic difference exactly."""
    span = max((max(abs(c) for c in n) for n in table.blocks), default=0)
    return 2 * span + 3


def _tree_sum(parts: list[np.ndarray]) -> np.ndarray:
    """Pairwise reduction in a fixed order, independent of how parts arrive."""
    while len(parts) > 1:
        parts = [parts[i] + parts[i + 1] if i + 1 < len(parts) else parts[i]
                 for i in range(0, len(parts), 2)]
    return parts[0]


def _grid_gram(table: SolutionTable, cfg: FieldConfig, operator, grid: int,
               threads: int = 1) -> np.ndarray:
    """Trapezoid quadrature of E^dag A E over the periodic unit 4-cube.

    The trapezoid rule on a periodic integrand is spectrally exact once the
    grid resolves all harmonic differences, so this matches the closed-form
    sums to round-off for an adequate grid.
    """
    if not table.blocks:
        return np.zeros((4, 4), dtype=complex)
    pts = np.array(list(table.blocks), dtype=float)
    blks = np.stack([table.blocks[tuple(int(c) for c in p)] for p in pts])
    if operator is not None:
        op = operator if callable(operator) else (lambda nn: operator[nn])
        ablks = np.stack([np.asarray(op(tuple(int(c) for c in p)), dtype=complex) @ b
                          for p, b in zip(pts, blks)])
    else:
        ablks = blks
    xs = np.arange(grid) / grid
    freq = pts + np.concatenate([cfg.q, [cfg.q4]]) / cfg.omega
    freq[:, 3] = -freq[:, 3]
    fac = [np.exp(2j * np.pi * np.outer(freq[:, a], xs)) for a in range(4)]

    def partial(idx: np.ndarray, use) -> np.ndarray:
        e = np.einsum("mi,mj,mk,ml,mab->ijklab", fac[0][idx], fac[1][idx],
                      fac[2][idx], fac[3][idx], use[idx], optimize=True)
        return e

    chunk = 48
    order = np.arange(len(pts))
    slices = [order[i:i + chunk] for i in range(0, len(order), chunk)]
    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            e_parts = list(pool.map(lambda s: partial(s, ablks), slices))
            if operator is not None:
                b_parts = list(pool.map(lambda s: partial(s, blks), slices))
    else:
        e_parts = [partial(s, ablks) for s in slices]
        if operator is not None:
            b_parts = [partial(s, blks) for s in slices]
    f_grid = _tree_sum(e_parts)
    e_grid = _tree_sum(b_parts) if operator is not None else f_grid
    return np.einsum("ijklab,ijklac->bc", e_grid.conj(), f_grid) / grid**4


def quadrature_u_e(table: SolutionTable, cfg: FieldConfig, grid: int | None = None,
                   threads: int = 1) -> np.ndarray:
    """Grid quadrature of the evolution-operator Gram matrix."""
    return _grid_gram(table, cfg, None, grid or default_grid(table), threads)


def quadrature_a_e(table: SolutionTable, cfg: FieldConfig, operator,
                   grid: int | None = None, threads: int = 1) -> np.ndarray:
    """Grid quadrature of the mean-value matrix of a harmonic-diagonal operator."""
    return _grid_gram(table, cfg, operator, grid or default_grid(table), threads)
