import numpy as np
import pytest

from estcrystal.coupling import FieldConfig
from estcrystal.scheduler import ModelSpec, Region, build_cycle1, f0_points, points_in_region

# Weak generic field, frozen ahead of time; no resonance of any diagonal
# block in the first-cycle window, so every equation keeps full rank.
SAMPLE_SEED = 7


def make_sample_field(scale=0.05, q4=0.35) -> FieldConfig:
    rng = np.random.default_rng(SAMPLE_SEED)
    amps = (rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))) * scale
    return FieldConfig(amplitudes=amps, q=np.array([0.01, 0.02, 0.03]), q4=q4, omega=0.5)


def make_zero_field(q=(0.0, 0.0, 0.0), q4=0.5, omega=0.5) -> FieldConfig:
    return FieldConfig(amplitudes=np.zeros((6, 3)), q=np.array(q), q4=q4, omega=omega)


def onshell_free_field() -> FieldConfig:
    q = (0.0, 0.0, 0.04)
    return make_zero_field(q=q, q4=float(np.sqrt(1.0 + 0.04 ** 2)))


def make_toy_model() -> ModelSpec:
    """Eleven closely coupled equations: family 0 centers plus three bridges."""
    box = Region((-1, -1, -1, -1), (2, 2, 2, 2))
    lats = build_cycle1()
    return ModelSpec(
        name="toy",
        k_list=(0, 1, 2, 3),
        points={
            0: tuple(f0_points(box)),
            1: tuple(points_in_region(lats[8], box)),
            2: tuple(points_in_region(lats[9], box)),
            3: tuple(points_in_region(lats[10], box)),
        },
    )


@pytest.fixture(scope="session")
def sample_field() -> FieldConfig:
    return make_sample_field()


@pytest.fixture(scope="session")
def toy_model() -> ModelSpec:
    return make_toy_model()


@pytest.fixture(scope="session")
def solved_model1(sample_field):
    from estcrystal.engine import run_model
    from estcrystal.scheduler import model_spec

    table, records = run_model(sample_field, model_spec(1))
    return table, records
