"""End-to-end runs: schedule, solve, verify, observe, with manifest and resume.

A run writes four artifacts into its output directory: the binary solution
table, two JSON reports (verification and observables) and a manifest tying
them together with SHA-256 digests.  Reports round every float to 12
significant digits so byte-identical reruns are a testable contract; the
manifest additionally carries timings and is exempt from that guarantee.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import FieldConfig, field_config_from_dict, field_config_to_dict
from .engine import (
    EngineTolerances,
    ProjectorReport,
    SolutionTable,
    file_digest,
    load_solution,
    residual_report,
    run_model,
    save_solution,
    verify_projectors,
)
from .observables import (
    a_e,
    accuracy,
    best_amplitude,
    quadrature_u_e,
    u_d,
    u_d_from_residuals,
    u_e,
)
from .scheduler import ModelSpec, full_model_42, model_spec

__all__ = [
    "RunConfig",
    "RunManifest",
    "ConfigError",
    "DigestError",
    "pipeline",
    "resume",
    "scan_q4",
    "build_model",
    "round_sig",
]

RESIDUAL_TOLERANCE = 1e-8


class ConfigError(ValueError):
    """Invalid run configuration."""


class DigestError(RuntimeError):
    """An artifact does not match the digest recorded in the manifest."""


@dataclass
class RunConfig:
    """Everything one reproducible run depends on."""

    field: dict | FieldConfig
    model: int | str = 1
    out_dir: Path = Path("estc-run")
    tolerances: EngineTolerances = dc_field(default_factory=EngineTolerances)
    threads: int = 1
    seed: int = 0
    allow_rank_deficient: bool = False
    compact: bool = False
    grid: int | None = None
    a0: list | None = None  # eight reals (re, im pairs); None selects the minimizer
    probes: int = 100

    def field_config(self) -> FieldConfig:
        if isinstance(self.field, FieldConfig):
            return self.field
        try:
            return field_config_from_dict(self.field)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> None:
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.probes < 0:
            raise ConfigError("probes must be >= 0")
        self.field_config()
        build_model(self.model)


@dataclass
class RunManifest:
    """Run log: configuration echo, timings, statistics and file digests."""

    config: dict
    version: str
    timings: dict
    cluster_stats: dict
    verification: dict
    digests: dict
    out_dir: str
    ok: bool

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "timings": self.timings,
            "cluster_stats": self.cluster_stats,
            "verification": self.verification,
            "digests": self.digests,
            "out_dir": self.out_dir,
            "ok": self.ok,
        }


def build_model(selector) -> ModelSpec:
    """Resolve a model selector: 0..3, 'full', or a stored model name."""
    if isinstance(selector, str):
        name = selector.strip().lower()
        if name in ("full", "full-42"):
            return full_model_42()
        if name.endswith("-model") and name[0].isdigit():
            selector = int(name[0])
        else:
            try:
                selector = int(name)
            except ValueError:
                raise ConfigError(f"unknown model {selector!r}") from None
    if selector in (0, 1, 2, 3):
        return model_spec(selector)
    raise ConfigError(f"unknown model {selector!r}")


# ---------------------------------------------------------------------------
# Deterministic JSON encoding.
# ---------------------------------------------------------------------------

def round_sig(x: float, digits: int = 12) -> float:
    """Round to a fixed number of significant digits (report contract)."""
    if x == 0 or not math.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.{digits - 1}e}")


def _encode(value):
    if isinstance(value, (bool, str, int)) or value is None:
        return value
    if isinstance(value, float):
        return round_sig(value)
    if isinstance(value, complex):
        return [round_sig(value.real), round_sig(value.imag)]
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, np.floating):
        return round_sig(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    raise TypeError(f"cannot encode {type(value)}")


def write_report(path: Path, payload: dict) -> str:
    text = json.dumps(_encode(payload), sort_keys=True, indent=1)
    path.write_text(text + "\n", encoding="utf-8")
    return file_digest(path)


# ---------------------------------------------------------------------------
# Stages.
# ---------------------------------------------------------------------------

def verification_stage(cfg: FieldConfig, table: SolutionTable, records,
                       model: ModelSpec, tol: EngineTolerances,
                       allow_rank_deficient: bool = False) -> dict:
    projectors: ProjectorReport = verify_projectors(records)
    residuals = residual_report(cfg, table, model)
    # A run that knowingly accepted reduced-rank equations gates on
    # orthonormality; the trace-4 identity only holds at full rank.
    trace_gate = projectors.max_orthonormality if allow_rank_deficient \
        else projectors.max_trace_residual
    ok = (max(trace_gate, projectors.max_idempotency, projectors.max_hermiticity,
              projectors.max_pair_overlap) <= tol.orth
          and residuals.max_on_model <= RESIDUAL_TOLERANCE)
    return {
        "projectors": projectors.to_dict(),
        "residuals": residuals.to_dict(),
        "tolerances": {"orth": tol.orth, "residual": RESIDUAL_TOLERANCE},
        "ok": ok,
    }


def observe_stage(table: SolutionTable, cfg: FieldConfig, *,
                  a0=None, grid: int | None = None, seed: int = 0,
                  probes: int = 100, threads: int = 1) -> dict:
    ue = u_e(table)
    ud_pair = u_d(table, cfg)
    ud_res = u_d_from_residuals(table, cfg)
    scale = float(np.linalg.norm(ud_pair))
    gap = float(np.linalg.norm(ud_pair - ud_res)) / scale if scale > 0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        best_a0, r_min = best_amplitude(table, cfg)
    if a0 is not None:
        vec = np.asarray(a0, dtype=float).reshape(4, 2)
        amp = vec[:, 0] + 1j * vec[:, 1]
        source = "given"
    else:
        amp, source = best_a0, "best"
    r_val = accuracy(table, cfg, amp, gram=ud_res)

    means = {
        "unit": complex(a_mean_raw(ue, ue, amp)),
        "energy": complex(a_mean_raw(ue, a_e(table, lambda n: (cfg.q4 + n[3] * cfg.omega) * np.eye(4)), amp)),
    }
    report = {
        "model": table.model_name,
        "domain_size": len(table.blocks),
        "a0": [[amp[i].real, amp[i].imag] for i in range(4)],
        "a0_source": source,
        "U_E": ue,
        "U_D": ud_res,
        "U_D_pair_sum": ud_pair,
        "ud_path_rel_gap": gap,
        "R": r_val,
        "R_min": r_min,
        "means": means,
        "psd": {
            "u_e_min_eig": float(np.linalg.eigvalsh(0.5 * (ue + ue.conj().T)).min()),
            "u_d_min_eig": float(np.linalg.eigvalsh(0.5 * (ud_res + ud_res.conj().T)).min()),
        },
    }
    if probes > 0:
        rng = np.random.default_rng(seed)
        draws = rng.normal(size=(probes, 4)) + 1j * rng.normal(size=(probes, 4))
        vals = [accuracy(table, cfg, d, gram=ud_res) for d in draws]
        report["probes"] = {
            "count": probes,
            "min_R": min(vals),
            "all_ge_R_min": bool(min(vals) >= r_min - 1e-12),
        }
    if grid is not None:
        n = grid if grid > 0 else None
        quad = quadrature_u_e(table, cfg, n, threads=threads)
        denom = float(np.linalg.norm(ue))
        report["quadrature"] = {
            "grid": grid,
            "u_e_rel_gap": float(np.linalg.norm(quad - ue)) / denom if denom else 0.0,
        }
    return report


def a_mean_raw(ue: np.ndarray, ae: np.ndarray, a0: np.ndarray) -> complex:
    den = complex(a0.conj() @ ue @ a0).real
    if den <= 0:
        raise ValueError("degenerate denominator")
    return complex(a0.conj() @ ae @ a0) / den


def pipeline(run: RunConfig) -> RunManifest:
    """Full run: build model, solve, verify, observe, persist everything.

    Raises RankDeficiencyError (without the opt-in flag) and ConfigError;
    verification failures are recorded in the manifest, not raised, so the
    caller decides the exit code.
    """
    run.validate()
    cfg = run.field_config()
    model = build_model(run.model)
    out = Path(run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    table, records = run_model(
        cfg, model,
        allow_rank_deficient=run.allow_rank_deficient,
        tol=run.tolerances,
    )
    timings["solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sol_path = out / "solution.estc"
    sol_digest = save_solution(table, sol_path)
    timings["persist"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    verification = verification_stage(cfg, table, records, model, run.tolerances,
                                      allow_rank_deficient=run.allow_rank_deficient)
    ver_digest = write_report(out / "verification.json", verification)
    timings["verify"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    observed = observe_stage(table, cfg, a0=run.a0, grid=run.grid,
                             seed=run.seed, probes=run.probes, threads=run.threads)
    obs_digest = write_report(out / "observables.json", observed)
    timings["observe"] = time.perf_counter() - t0

    if run.compact:
        table.records = None

    manifest = RunManifest(
        config=_config_echo(run, cfg),
        version=__version__,
        timings={k: round(v, 6) for k, v in timings.items()},
        cluster_stats=table.cluster_stats.to_dict() if table.cluster_stats else {},
        verification={
            "ok": verification["ok"],
            "max_pair_overlap": verification["projectors"]["max_pair_overlap"],
            "max_idempotency": verification["projectors"]["max_idempotency"],
            "max_trace_residual": verification["projectors"]["max_trace_residual"],
            "max_on_model_residual": verification["residuals"]["max_on_model"],
        },
        digests={
            "solution.estc": sol_digest,
            "verification.json": ver_digest,
            "observables.json": obs_digest,
        },
        out_dir=str(out),
        ok=verification["ok"],
    )
    (out / "manifest.json").write_text(
        json.dumps(_encode(manifest.to_dict()), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    return manifest


def _config_echo(run: RunConfig, cfg: FieldConfig) -> dict:
    return {
        "field": field_config_to_dict(cfg),
        "model": run.model if isinstance(run.model, str) else int(run.model),
        "tolerances": {"rank": run.tolerances.rank, "orth": run.tolerances.orth,
                       "drop": run.tolerances.drop},
        "threads": run.threads,
        "seed": run.seed,
        "allow_rank_deficient": run.allow_rank_deficient,
        "compact": run.compact,
        "grid": run.grid,
        "a0": run.a0,
        "probes": run.probes,
    }


_STAGES = ("solve", "verify", "observe")


def resume(manifest_path, stage: str, *, a0=None, grid: int | None = None,
           field: dict | None = None) -> RunManifest:
    """Recompute a run from ``stage`` onward, trusting digest-checked artifacts.

    A changed field configuration invalidates everything and forces a full
    pipeline; a corrupted solution file raises :class:`DigestError`.
    """
    if stage not in _STAGES:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {_STAGES}")
    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    out = Path(data["out_dir"])
    run = RunConfig(
        field=field if field is not None else data["config"]["field"],
        model=data["config"]["model"],
        out_dir=out,
        tolerances=EngineTolerances(**data["config"]["tolerances"]),
        threads=int(data["config"]["threads"]),
        seed=int(data["config"]["seed"]),
        allow_rank_deficient=bool(data["config"]["allow_rank_deficient"]),
        compact=bool(data["config"]["compact"]),
        grid=grid if grid is not None else data["config"]["grid"],
        a0=a0 if a0 is not None else data["config"]["a0"],
        probes=int(data["config"]["probes"]),
    )
    if field is not None and _encode(field_config_to_dict(run.field_config())) != data["config"]["field"]:
        return pipeline(run)  # changed physics: full recompute
    if stage == "solve":
        return pipeline(run)

    sol_path = out / "solution.estc"
    if not sol_path.exists():
        raise DigestError(f"missing artifact {sol_path}")
    if file_digest(sol_path) != data["digests"]["solution.estc"]:
        raise DigestError(f"digest mismatch for {sol_path}")
    table = load_solution(sol_path)
    cfg = table.config
    model = build_model(run.model)
    timings = dict(data.get("timings", {}))

    verification = dict(data.get("verification", {}))
    if stage == "verify":
        # Stored blocks support the residual check; projector identities
        # need the in-memory records, so a full re-verify re-solves.
        t0 = time.perf_counter()
        residuals = residual_report(cfg, table, model)
        payload = {
            "residuals": residuals.to_dict(),
            "tolerances": {"residual": RESIDUAL_TOLERANCE},
            "ok": residuals.max_on_model <= RESIDUAL_TOLERANCE,
            "note": "resumed: residual check on stored blocks only",
        }
        write_report(out / "verification.json", payload)
        timings["verify"] = round(time.perf_counter() - t0, 6)
        verification = {"ok": payload["ok"],
                        "max_on_model_residual": residuals.max_on_model}

    t0 = time.perf_counter()
    observed = observe_stage(table, cfg, a0=run.a0, grid=run.grid,
                             seed=run.seed, probes=run.probes, threads=run.threads)
    obs_digest = write_report(out / "observables.json", observed)
    timings["observe"] = round(time.perf_counter() - t0, 6)

    digests = dict(data["digests"])
    digests["observables.json"] = obs_digest
    digests["verification.json"] = file_digest(out / "verification.json")
    manifest = RunManifest(
        config=_config_echo(run, run.field_config()),
        version=__version__,
        timings=timings,
        cluster_stats=data.get("cluster_stats", {}),
        verification=verification,
        digests=digests,
        out_dir=str(out),
        ok=bool(verification.get("ok", True)),
    )
    manifest_path.write_text(
        json.dumps(_encode(manifest.to_dict()), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    return manifest


def scan_q4(field: dict | FieldConfig, model_selector, q4_values, *,
            allow_rank_deficient: bool = False) -> list[tuple[float, float]]:
    """Re-solve the model over a frequency sweep; returns (q4, R_min) pairs."""
    base = field if isinstance(field, FieldConfig) else field_config_from_dict(field)
    model = build_model(model_selector)
    rows = []
    for q4 in q4_values:
        cfg = FieldConfig(amplitudes=base.amplitudes, q=base.q, q4=float(q4), omega=base.omega)
        table, _ = run_model(cfg, model, allow_rank_deficient=allow_rank_deficient)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                _, r_min = best_amplitude(table, cfg)
        except ValueError:
            r_min = float("nan")  # empty solution space at this frequency
        rows.append((float(q4), r_min))
    return rows
