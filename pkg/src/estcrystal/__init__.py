"""Fractal-scheduled exact solutions of finite electromagnetic space-time crystal models."""

__version__ = "0.1.0"

from .lattice import (
    ORIGIN,
    OddParityError,
    Point,
    g3d,
    g4d,
    index_of,
    is_lattice_point,
    iter_points,
    point_of,
    s69,
    stencil_13,
)
from .scheduler import (
    CENTRAL_WINDOW,
    ModelSpec,
    PointLattice,
    Region,
    build_cycle1,
    full_model_42,
    model_spec,
    points_in_region,
    verify_separation,
)
# The shift-block accessor stays on the submodule (estcrystal.coupling.coupling)
# so the package attribute keeps pointing at the module itself.
from .coupling import (
    FieldConfig,
    UPWARD_SHIFTS,
    d_n,
    dirac_matrices,
    field_config_from_dict,
    load_field_config,
    potential_terms,
    standing_wave_amplitudes,
)
from .engine import (
    EngineTolerances,
    ProjectorRecord,
    RankDeficiencyError,
    SolutionTable,
    equation_rows,
    load_solution,
    residual_map,
    run_model,
    save_solution,
    verify_projectors,
)
from .observables import (
    accuracy,
    a_mean,
    best_amplitude,
    evolution,
    phase,
    quadrature_u_e,
    rayleigh_minimizer,
    u_d,
    u_d_from_residuals,
    u_e,
    wavefunction,
)
from .pipeline import RunConfig, RunManifest, pipeline, resume, scan_q4
