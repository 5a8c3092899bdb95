"""Locality-aware orthogonalization engine producing fundamental solutions.

Each lattice equation contributes four row vectors over its 13-point stencil.
Processing equations family by family in fractal order, the engine keeps the
running orthonormal basis of the row space grouped into clusters of connected
supports.  A new equation first merges every cluster its stencil touches,
then its rows are orthogonalized against that cluster's stored vectors
(modified Gram-Schmidt with one reorthogonalization pass) and the normalized
remainders become the equation's rank-4 projector contribution.

The fundamental solution of the truncated system is the complement of the
accumulated projector; its 4x4 blocks against the origin harmonic are read
off the stored vectors of the cluster containing the origin.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .coupling import FieldConfig, d_n, field_config_from_dict, field_config_to_dict, stencil_blocks
from .lattice import Point, index_of, point_of, stencil_13
from .scheduler import ModelSpec

__all__ = [
    "EngineTolerances",
    "RankDeficiencyError",
    "ProjectorRecord",
    "ClusterStats",
    "SolutionTable",
    "equation_rows",
    "run_model",
    "verify_projectors",
    "ProjectorReport",
    "residual_map",
    "residual_report",
    "save_solution",
    "load_solution",
    "file_digest",
]

_U4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class EngineTolerances:
    """Numerical policy of the orthogonalization.

    rank: relative remainder norm below which an equation row is dependent.
    orth: verification threshold for orthonormality residuals.
    drop: relative magnitude below which stored entries are discarded;
          keeps supports from densifying with round-off dust.
    """

    rank: float = 1e-8
    orth: float = 1e-9
    drop: float = 1e-14

    def __post_init__(self):
        if min(self.rank, self.orth, self.drop) <= 0:
            raise ValueError("tolerances must be positive")


class RankDeficiencyError(RuntimeError):
    """An equation yielded fewer than four independent rows."""

    def __init__(self, k: int, point: Point, rank: int):
        super().__init__(
            f"equation (k={k}, n={point}) has rank {rank} < 4; "
            "pass allow_rank_deficient=True to accept reduced rank"
        )
        self.k = k
        self.point = point
        self.rank = rank


@dataclass
class ProjectorRecord:
    """Orthonormal vectors spanning what one equation adds to the row space.

    ``pts`` are sorted global point indices (the support, operationally the
    F-domain of this contribution), ``vecs`` has shape (len(pts), 4, rank).
    """

    k: int
    point: Point
    pts: np.ndarray
    vecs: np.ndarray

    @property
    def rank(self) -> int:
        return self.vecs.shape[2]

    def gram(self) -> np.ndarray:
        v = self.vecs.reshape(-1, self.rank)
        return v.conj().T @ v


@dataclass
class ClusterStats:
    """Connectivity bookkeeping of one run."""

    cluster_count: int = 0
    cluster_sizes: tuple[int, ...] = ()
    merge_history: tuple[tuple[int, int, int], ...] = ()  # (k, clusters merged, new size)

    def to_dict(self) -> dict:
        return {
            "cluster_count": self.cluster_count,
            "cluster_sizes": list(self.cluster_sizes),
            "merges": len([m for m in self.merge_history if m[1] >= 2]),
        }


@dataclass
class SolutionTable:
    """Blocks of the fundamental solution against the origin harmonic."""

    origin: Point
    blocks: dict[Point, np.ndarray]
    model_name: str
    config: FieldConfig
    cluster_stats: ClusterStats | None = None
    records: list[ProjectorRecord] | None = field(default=None, repr=False)

    @property
    def domain(self) -> set[Point]:
        return set(self.blocks)

    def block(self, n: Point) -> np.ndarray:
        blk = self.blocks.get(tuple(n))
        return blk if blk is not None else np.zeros((4, 4), dtype=complex)


def equation_rows(cfg: FieldConfig, n: Point) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the equation at n as one sparse bundle.

    Returns (pts, vals): sorted global indices of the stencil points and a
    (len(pts), 4, 4) array whose slice [i] is the adjoint of the coupling
    block at that point, so column a holds row a of the equation.  Points
    whose block vanishes (always the case off-diagonal at zero field) are
    omitted.
    """
    blocks = stencil_blocks(cfg)
    entries = [(index_of(n), d_n(cfg, n).conj().T)]
    for s, blk in blocks.items():
        if np.any(blk):
            m = (n[0] + s[0], n[1] + s[1], n[2] + s[2], n[3] + s[3])
            entries.append((index_of(m), blk.conj().T))
    entries.sort(key=lambda e: e[0])
    pts = np.array([e[0] for e in entries], dtype=np.int64)
    vals = np.stack([e[1] for e in entries], axis=0).astype(np.complex128)
    return pts, vals


class _Cluster:
    __slots__ = ("points", "point_recs", "rec_ids", "eq_count")

    def __init__(self):
        self.points: set[int] = set()
        self.point_recs: dict[int, list[int]] = {}
        self.rec_ids: list[int] = []
        self.eq_count = 0


class _ClusterForest:
    """Union-find over clusters plus point-ownership index."""

    def __init__(self):
        self.parent: list[int] = []
        self.clusters: dict[int, _Cluster] = {}
        self.owner: dict[int, int] = {}  # global point index -> cluster id

    def find(self, cid: int) -> int:
        root = cid
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[cid] != root:
            self.parent[cid], cid = root, self.parent[cid]
        return root

    def new_cluster(self) -> int:
        cid = len(self.parent)
        self.parent.append(cid)
        self.clusters[cid] = _Cluster()
        return cid

    def cluster_for(self, pts) -> tuple[int, int]:
        """Merge every cluster touching ``pts``; return (root, merged count)."""
        roots = {self.find(self.owner[p]) for p in pts if p in self.owner}
        if not roots:
            return self.new_cluster(), 0
        ordered = sorted(roots, key=lambda r: len(self.clusters[r].points), reverse=True)
        base = ordered[0]
        target = self.clusters[base]
        for other in ordered[1:]:
            src = self.clusters.pop(other)
            self.parent[other] = base
            target.points |= src.points
            target.rec_ids += src.rec_ids
            target.eq_count += src.eq_count
            for p, rids in src.point_recs.items():
                bucket = target.point_recs.get(p)
                if bucket is None:
                    target.point_recs[p] = rids
                else:
                    bucket += rids
        return base, len(roots)


def _reduce_against_cluster(pts, vals, cluster: _Cluster, records) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the projections of the rows onto a cluster's stored vectors.

    Two sweeps; the second re-derives candidates from the grown support, the
    standard cure for the coefficient drift of a single sweep.
    """
    for _sweep in range(2):
        cand = np.unique(np.concatenate([
            np.asarray(cluster.point_recs.get(p, []), dtype=np.int64) for p in pts.tolist()
        ] + [np.empty(0, dtype=np.int64)]))
        if cand.size == 0:
            break
        union = np.unique(np.concatenate([pts] + [records[r].pts for r in cand.tolist()]))
        buf = np.zeros((union.size, 4, vals.shape[2]), dtype=np.complex128)
        buf[np.searchsorted(union, pts)] = vals
        for rid in cand.tolist():
            rec = records[rid]
            pos = np.searchsorted(union, rec.pts)
            coef = np.tensordot(rec.vecs.conj(), buf[pos], axes=([0, 1], [0, 1]))
            if coef.any():
                buf[pos] -= np.tensordot(rec.vecs, coef, axes=([2], [0]))
        pts, vals = union, buf
    return pts, vals


def _orthonormalize_remainders(vals, orig_norms, tau_rank):
    """Mutually orthonormalize the reduced rows; returns (matrix, kept rows)."""
    kept: list[np.ndarray] = []
    kept_rows: list[int] = []
    for a in range(vals.shape[2]):
        v = vals[:, :, a].copy()
        for _sweep in range(2):
            for w in kept:
                c = np.vdot(w, v)
                if c != 0.0:
                    v -= c * w
        nrm = float(np.linalg.norm(v))
        if orig_norms[a] <= 0.0 or nrm <= tau_rank * orig_norms[a]:
            continue
        kept.append(v / nrm)
        kept_rows.append(a)
    if not kept:
        return np.zeros((vals.shape[0], 4, 0), dtype=np.complex128), kept_rows
    return np.stack(kept, axis=2), kept_rows


def run_model(
    cfg: FieldConfig,
    model: ModelSpec,
    *,
    allow_rank_deficient: bool = False,
    tol: EngineTolerances | None = None,
    sequence=None,
    keep_records: bool = True,
) -> tuple[SolutionTable, list[ProjectorRecord]]:
    """Process every model equation and assemble the fundamental solution.

    Equations are taken in fractal order (family ascending, global index
    within a family) unless an explicit ``sequence`` of (k, point) pairs is
    given; the aggregate solution blocks do not depend on the order, only
    the individual projector records do.

    Raises :class:`RankDeficiencyError` unless ``allow_rank_deficient`` when
    an equation adds fewer than four independent directions.
    """
    tol = tol or EngineTolerances()
    forest = _ClusterForest()
    records: list[ProjectorRecord] = []
    merge_history: list[tuple[int, int, int]] = []

    for k, n in (sequence if sequence is not None else model.equations()):
        pts, vals = equation_rows(cfg, n)
        orig_norms = np.sqrt(np.sum(np.abs(vals) ** 2, axis=(0, 1)))
        root, merged = forest.cluster_for(pts.tolist())
        cluster = forest.clusters[root]
        rpts, rvals = _reduce_against_cluster(pts, vals, cluster, records)
        vecs, kept_rows = _orthonormalize_remainders(rvals, orig_norms, tol.rank)
        if len(kept_rows) < 4 and not allow_rank_deficient:
            raise RankDeficiencyError(k, n, len(kept_rows))
        # Trim round-off dust so supports track genuine couplings only.
        if vecs.shape[2]:
            mask = np.max(np.abs(vecs), axis=(1, 2)) > tol.drop
            rpts, vecs = rpts[mask], vecs[mask]
        else:
            rpts = rpts[:0]
        rid = len(records)
        records.append(ProjectorRecord(k=k, point=n, pts=rpts, vecs=vecs))
        cluster.eq_count += 1
        for p in rpts.tolist():
            forest.owner[p] = root
            cluster.points.add(p)
            cluster.point_recs.setdefault(p, []).append(rid)
        cluster.rec_ids.append(rid)
        if merged >= 2:
            merge_history.append((k, merged, cluster.eq_count))

    roots = {forest.find(cid) for cid in range(len(forest.parent))}
    live = [forest.clusters[r] for r in roots if r in forest.clusters]
    stats = ClusterStats(
        cluster_count=len(live),
        cluster_sizes=tuple(sorted((c.eq_count for c in live), reverse=True)),
        merge_history=tuple(merge_history),
    )

    table = _assemble_solution(cfg, model, forest, records, stats, tol)
    if keep_records:
        table.records = records
    return table, records


def _assemble_solution(cfg, model, forest, records, stats, tol) -> SolutionTable:
    origin: Point = (0, 0, 0, 0)
    io = index_of(origin)
    acc: dict[int, np.ndarray] = {}
    if io in forest.owner:
        cluster = forest.clusters[forest.find(forest.owner[io])]
        for rid in cluster.rec_ids:
            rec = records[rid]
            pos = int(np.searchsorted(rec.pts, io))
            if pos >= rec.pts.size or rec.pts[pos] != io or rec.rank == 0:
                continue
            w = rec.vecs[pos]  # (4, rank) values at the origin
            contrib = np.einsum("mav,bv->mab", rec.vecs, w.conj())
            for i, p in enumerate(rec.pts.tolist()):
                slot = acc.get(p)
                if slot is None:
                    acc[p] = contrib[i].copy()
                else:
                    slot += contrib[i]
    blocks: dict[Point, np.ndarray] = {}
    base = acc.pop(io, np.zeros((4, 4), dtype=complex))
    blocks[origin] = _U4 - base
    if acc:
        scale = max(float(np.linalg.norm(blocks[origin])), 1.0)
        for p, mat in acc.items():
            if np.linalg.norm(mat) > tol.drop * scale:
                blocks[point_of(p)] = -mat
    return SolutionTable(
        origin=origin,
        blocks=blocks,
        model_name=model.name,
        config=cfg,
        cluster_stats=stats,
    )


# ---------------------------------------------------------------------------
# Verification.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectorReport:
    """Maxima of the projector-algebra residuals over one run."""

    record_count: int
    rank_histogram: dict[int, int]
    max_trace_residual: float       # |tr(rho) - 4|
    max_orthonormality: float       # |tr(rho) - rank| (reduced-rank aware)
    max_idempotency: float          # ||rho^2 - rho||_F
    max_hermiticity: float          # ||rho - rho^dagger||_F (exact 0 by assembly)
    max_pair_overlap: float         # ||rho_k(m) rho_l(n)||_F over overlapping pairs
    pairs_checked: int

    def ok(self, tolerance: float) -> bool:
        return max(self.max_trace_residual, self.max_idempotency,
                   self.max_hermiticity, self.max_pair_overlap) <= tolerance

    def to_dict(self) -> dict:
        return {
            "records": self.record_count,
            "rank_histogram": {str(k): v for k, v in sorted(self.rank_histogram.items())},
            "max_trace_residual": self.max_trace_residual,
            "max_orthonormality": self.max_orthonormality,
            "max_idempotency": self.max_idempotency,
            "max_hermiticity": self.max_hermiticity,
            "max_pair_overlap": self.max_pair_overlap,
            "pairs_checked": self.pairs_checked,
        }


def verify_projectors(records: list[ProjectorRecord], *, include_pairs: bool = True) -> ProjectorReport:
    """Measure the projector identities on the stored vectors.

    Per record the trace and idempotency residuals reduce to functions of the
    small Gram matrix G = V^dag V (for rho = V V^dag, ||rho^2 - rho||_F^2 =
    tr[(G - I) G (G - I) G]), so the check is exact but cheap.  Hermiticity
    holds identically because each block of rho is assembled as a conjugate
    -symmetric sum; it is still measured on a dense assembly for records of
    small support.  Pair overlaps are evaluated for every pair of records
    with intersecting supports; disjoint pairs vanish exactly.
    """
    ranks: dict[int, int] = {}
    max_tr = 0.0
    max_orth = 0.0
    max_idem = 0.0
    max_herm = 0.0
    point_map: dict[int, list[int]] = {}
    for rid, rec in enumerate(records):
        ranks[rec.rank] = ranks.get(rec.rank, 0) + 1
        if rec.rank:
            g = rec.gram()
            max_tr = max(max_tr, abs(float(np.trace(g).real) - 4.0))
            max_orth = max(max_orth, abs(float(np.trace(g).real) - rec.rank))
            a = g - np.eye(rec.rank)
            max_idem = max(max_idem, float(np.sqrt(abs(np.trace(a @ g @ a @ g).real))))
            if rec.pts.size <= 64:
                v = rec.vecs.reshape(-1, rec.rank)
                rho = v @ v.conj().T
                max_herm = max(max_herm, float(np.linalg.norm(rho - rho.conj().T)))
        for p in rec.pts.tolist():
            point_map.setdefault(p, []).append(rid)

    pairs = set()
    if include_pairs:
        for rids in point_map.values():
            if len(rids) > 1:
                for i in range(len(rids)):
                    for j in range(i + 1, len(rids)):
                        pairs.add((rids[i], rids[j]))
    max_pair = 0.0
    for ra, rb in pairs:
        a, b = records[ra], records[rb]
        if not a.rank or not b.rank:
            continue
        ia = np.searchsorted(a.pts, b.pts)
        ia = np.clip(ia, 0, a.pts.size - 1)
        hit = a.pts[ia] == b.pts
        if not np.any(hit):
            continue
        va = a.vecs[ia[hit]].reshape(-1, a.rank)
        vb = b.vecs[np.nonzero(hit)[0]].reshape(-1, b.rank)
        x = va.conj().T @ vb
        ga, gb = a.gram(), b.gram()
        max_pair = max(max_pair, float(np.sqrt(abs(np.trace(x.conj().T @ ga @ x @ gb).real))))

    return ProjectorReport(
        record_count=len(records),
        rank_histogram=ranks,
        max_trace_residual=max_tr,
        max_orthonormality=max_orth,
        max_idempotency=max_idem,
        max_hermiticity=max_herm,
        max_pair_overlap=max_pair,
        pairs_checked=len(pairs),
    )


# ---------------------------------------------------------------------------
# Residual of the full (untruncated) system on the solution blocks.
# ---------------------------------------------------------------------------

def residual_map(cfg: FieldConfig, table: SolutionTable) -> dict[Point, np.ndarray]:
    """Stencil residual at every point whose stencil touches the solution.

    On the model's own equation points the residual vanishes identically;
    elsewhere it witnesses the truncation error.
    """
    shifts = stencil_13()
    blocks = table.blocks
    out: dict[Point, np.ndarray] = {}
    candidates: set[Point] = set()
    for m in blocks:
        for s in shifts:
            candidates.add((m[0] - s[0], m[1] - s[1], m[2] - s[2], m[3] - s[3]))
    off = stencil_blocks(cfg)
    for n in candidates:
        total = np.zeros((4, 4), dtype=complex)
        touched = False
        blk = blocks.get(n)
        if blk is not None:
            total += d_n(cfg, n) @ blk
            touched = True
        for s, v in off.items():
            m = (n[0] + s[0], n[1] + s[1], n[2] + s[2], n[3] + s[3])
            blk = blocks.get(m)
            if blk is not None:
                total += v @ blk
                touched = True
        if touched:
            out[n] = total
    return out


def equation_scale(cfg: FieldConfig, n: Point) -> float:
    """Frobenius magnitude of the full coupling stencil of equation n."""
    total = float(np.sum(np.abs(d_n(cfg, n)) ** 2))
    for blk in stencil_blocks(cfg).values():
        total += float(np.sum(np.abs(blk) ** 2))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class ResidualReport:
    max_on_model: float          # relative to equation scale, over model points
    max_off_model: float         # absolute, over boundary points
    points_checked: int

    def to_dict(self) -> dict:
        return {
            "max_on_model": self.max_on_model,
            "max_off_model": self.max_off_model,
            "points_checked": self.points_checked,
        }


def residual_report(cfg: FieldConfig, table: SolutionTable, model: ModelSpec) -> ResidualReport:
    """Split the residual map into exactness (on-model) and truncation parts."""
    vmap = residual_map(cfg, table)
    model_points = model.point_set()
    max_on = 0.0
    max_off = 0.0
    for n, mat in vmap.items():
        nrm = float(np.linalg.norm(mat))
        if n in model_points:
            max_on = max(max_on, nrm / equation_scale(cfg, n))
        else:
            max_off = max(max_off, nrm)
    return ResidualReport(max_on_model=max_on, max_off_model=max_off, points_checked=len(vmap))


# ---------------------------------------------------------------------------
# Persistence: header + fixed-width little-endian block table.
# ---------------------------------------------------------------------------

_MAGIC = b"ESTC1"
_VERSION = 1


def save_solution(table: SolutionTable, path) -> str:
    """Write a solution table; returns the hex digest of the file bytes."""
    items = sorted((index_of(p), blk) for p, blk in table.blocks.items())
    header = {
        "model": table.model_name,
        "field": field_config_to_dict(table.config),
        "origin": list(table.origin),
        "count": len(items),
    }
    if table.cluster_stats is not None:
        header["clusters"] = table.cluster_stats.to_dict()
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BI", _VERSION, len(payload)))
        fh.write(payload)
        for idx, blk in items:
            fh.write(struct.pack("<q", idx))
            flat = np.ascontiguousarray(blk, dtype=np.complex128).reshape(16)
            fh.write(struct.pack("<32d", *(v for z in flat for v in (z.real, z.imag))))
    return file_digest(path)


def load_solution(path) -> SolutionTable:
    """Read a solution table written by :func:`save_solution`."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != _MAGIC:
            raise ValueError(f"not a solution file (magic {magic!r})")
        version, hlen = struct.unpack("<BI", fh.read(5))
        if version != _VERSION:
            raise ValueError(f"unsupported solution version {version}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        blocks: dict[Point, np.ndarray] = {}
        row = struct.Struct("<q32d")
        for _ in range(header["count"]):
            raw = fh.read(row.size)
            vals = row.unpack(raw)
            reals = np.array(vals[1:], dtype=float)
            blk = (reals[0::2] + 1j * reals[1::2]).reshape(4, 4)
            blocks[point_of(vals[0])] = blk
    return SolutionTable(
        origin=tuple(header["origin"]),
        blocks=blocks,
        model_name=header["model"],
        config=field_config_from_dict(header["field"]),
    )


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
