"""
Shared fixtures: a short Stripmap collection, a synthetic focused image and
band-limited point-target rasters
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.config import reset_config  # noqa: E402
from src.processing.focus import FocusConfig, FocusedImage  # noqa: E402
from src.processing.geometry import AcquisitionGeometry  # noqa: E402
from src.processing.rawsim import CollectionPlan, PointTarget, scene_reference  # noqa: E402
from src.processing.signal import ChirpParams  # noqa: E402


def dirichlet(n: int, bins: int, center: int) -> np.ndarray:
    """Periodic band-limited impulse: `bins` (odd) spectral bins out of n, peak 1 at center"""
    x = np.arange(n) - center
    num = np.sin(np.pi * bins * x / n)
    den = bins * np.sin(np.pi * x / n)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(x == 0, 1.0, num / np.where(x == 0, 1.0, den))
    return out


def point_response(n: int = 64, bins: int = 31, peak=(32, 32), amplitude: float = 1.0) -> np.ndarray:
    """Separable 2-D point response on an n x n grid"""
    return amplitude * np.outer(dirichlet(n, bins, peak[0]), dirichlet(n, bins, peak[1])).astype(complex)


@pytest.fixture(autouse=True)
def fresh_config():
    reset_config()
    yield
    reset_config()


@pytest.fixture
def short_plan() -> CollectionPlan:
    """Ten milliseconds of 100 MHz Stripmap data around the scene center"""
    return CollectionPlan(
        geom=AcquisitionGeometry(),
        chirp=ChirpParams.with_oversampling(100e6, 2e-6),
        prf=4500.0,
        start=-0.005,
        stop=0.005,
    )


@pytest.fixture
def center_target(short_plan) -> PointTarget:
    return PointTarget(scene_reference(short_plan).center, 1.0e4, name="CR1")


@pytest.fixture
def flat_image(short_plan) -> FocusedImage:
    """Unit-valued image spanning +-100 m of slant range around the scene center"""
    ref = scene_reference(short_plan)
    return FocusedImage(
        pixels=np.ones((4, 5), dtype=complex),
        azimuth_time_axis=np.linspace(-0.01, 0.01, 4),
        slant_range_axis=ref.slant_range + np.linspace(-100.0, 100.0, 5),
        config=FocusConfig(),
        plan=short_plan,
        metadata={"azimuth_bandwidth": 2700.0},
    )


@pytest.fixture
def fast_scenario() -> dict:
    """Single-target 100 MHz Stripmap scenario that runs end to end in seconds"""
    return {
        "name": "unit-stripmap",
        "seed": 3,
        "chirp": {"bandwidth": 100e6, "pulse_duration": 2e-6},
        "product": {"scale_policy": "FIXED"},
        "quality": {"plots": False},
        "stages": ["simulate", "focus", "slc", "grd", "analyze", "report"],
    }
