"""
Tests for range-Doppler and back-projection focusing
"""
import math

import numpy as np
import pytest

from src.config.scenario import ScenarioConfig, build_focus_config, build_plan, build_targets
from src.core.exceptions import DopplerOverflowError, GridOutsideCollectionError, ModeUnsupportedError
from src.processing.focus import (
    FocusAlgorithm,
    FocusConfig,
    ImageGrid,
    focus,
    focus_backprojection,
    focus_range_doppler,
    scene_grid,
    spotlight_azimuth_resolution,
    stripmap_azimuth_resolution,
)
from src.processing.geometry import AcquisitionGeometry, AcquisitionMode
from src.processing.products import form_slc
from src.processing.quality import ResolutionConvention, extract_irf, measure_irf
from src.processing.rawsim import (
    CollectionPlan,
    SteeringLaw,
    SteeringMode,
    scene_reference,
    simulate_raw,
)
from src.processing.signal import RESOLUTION_KAPPA_UNIFORM, SINC_HALF_POWER_WIDTH, SPEED_OF_LIGHT, ChirpParams


@pytest.fixture(scope="module")
def stripmap_run():
    scenario = ScenarioConfig.from_dict({"chirp": {"bandwidth": 100e6, "pulse_duration": 2e-6}})
    plan = build_plan(scenario)
    targets = build_targets(scenario, plan)
    raw = simulate_raw(targets, plan, threads=2)
    return scenario, plan, raw


def test_stripmap_resolution_formula():
    cfg = FocusConfig()
    expected = RESOLUTION_KAPPA_UNIFORM * 7000.0 / 2700.0
    assert stripmap_azimuth_resolution(cfg, 7000.0) == pytest.approx(expected)
    assert stripmap_azimuth_resolution(FocusConfig(processed_doppler_bandwidth=math.inf), 7000.0) == 1.6


def test_focus_config_rejects_odd_kernel():
    with pytest.raises(Exception):
        FocusConfig(rcmc_kernel_taps=7)


def test_processed_band_above_prf_limit(short_plan, center_target):
    raw = simulate_raw([center_target], short_plan, threads=1)
    with pytest.raises(DopplerOverflowError):
        focus_range_doppler(raw, FocusConfig(processed_doppler_bandwidth=4400.0))


def test_range_doppler_refuses_spotlight():
    plan = CollectionPlan(
        geom=AcquisitionGeometry(mode=AcquisitionMode.SPOTLIGHT, center_incidence=30.0),
        chirp=ChirpParams.with_oversampling(100e6, 2e-6),
        prf=4500.0,
        start=-0.005,
        stop=0.005,
        steering=SteeringLaw(SteeringMode.SPOT),
    )
    raw = simulate_raw([], plan, threads=1)
    with pytest.raises(ModeUnsupportedError):
        focus_range_doppler(raw)


def test_backprojection_grid_outside_collection(short_plan, center_target):
    raw = simulate_raw([center_target], short_plan, threads=1)
    ref = scene_reference(short_plan)
    grid = ImageGrid(np.linspace(1.0, 1.1, 4), ref.slant_range + np.arange(4.0))
    with pytest.raises(GridOutsideCollectionError):
        focus_backprojection(raw, grid)


@pytest.mark.slow
def test_range_doppler_point_target(stripmap_run):
    scenario, plan, raw = stripmap_run
    img = focus(raw, build_focus_config(scenario), threads=2)
    assert img.metadata["algorithm"] == FocusAlgorithm.RANGE_DOPPLER.value

    slc = form_slc(img)
    row, col = np.unravel_index(int(np.argmax(np.abs(slc.pixels))), slc.pixels.shape)
    ref = scene_reference(plan)
    assert abs(slc.azimuth_time_axis[row] - ref.time) <= 1.0 / plan.prf
    assert abs(slc.slant_range_axis[col] - ref.slant_range) <= 1.5 * slc.range_spacing

    report = measure_irf(extract_irf(slc, (int(row), int(col)), name="CR1"))
    range_res = SINC_HALF_POWER_WIDTH * SPEED_OF_LIGHT / (2.0 * 100e6)
    azimuth_res = SINC_HALF_POWER_WIDTH * slc.metadata.ground_velocity / 2700.0
    assert report.resolution_range == pytest.approx(range_res, rel=0.05)
    assert report.resolution_azimuth == pytest.approx(azimuth_res, rel=0.10)
    assert report.pslr_range == pytest.approx(-13.26, abs=0.8)
    assert report.pslr_azimuth < -12.0


@pytest.mark.slow
def test_backprojection_matches_the_target_position(stripmap_run):
    scenario, plan, raw = stripmap_run
    grid = scene_grid(plan, 96, 96)
    cfg = FocusConfig(algorithm=FocusAlgorithm.BACKPROJECTION)
    img = focus(raw, cfg, grid=grid, threads=2)
    assert img.pixels.shape == (96, 96)

    row, col = np.unravel_index(int(np.argmax(np.abs(img.pixels))), img.pixels.shape)
    assert abs(int(row) - 48) <= 1
    assert abs(int(col) - 48) <= 1

    report = measure_irf(extract_irf(form_slc(img), (int(row), int(col))))
    assert report.resolution_range == pytest.approx(
        SINC_HALF_POWER_WIDTH * SPEED_OF_LIGHT / (2.0 * 100e6), rel=0.05
    )
    assert report.pslr_range < -12.0


def _peak(pixels: np.ndarray):
    row, col = np.unravel_index(int(np.argmax(np.abs(pixels))), pixels.shape)
    return int(row), int(col)


@pytest.mark.slow
def test_stripmap_resolution_at_full_bandwidth():
    scenario = ScenarioConfig.from_dict({"chirp": {"bandwidth": 300e6, "pulse_duration": 2e-6}})
    plan = build_plan(scenario)
    raw = simulate_raw(build_targets(scenario, plan), plan, threads=2)
    slc = form_slc(focus(raw, build_focus_config(scenario), threads=2))

    report = measure_irf(extract_irf(slc, _peak(slc.pixels)), convention=ResolutionConvention.NOMINAL)
    assert report.resolution_range == pytest.approx(0.50, rel=0.05)
    assert 2.5 <= report.resolution_azimuth <= 3.0


@pytest.mark.slow
@pytest.mark.parametrize("resolution", [0.25, 1.0])
def test_spotlight_reaches_the_requested_resolution(resolution):
    scenario = ScenarioConfig.from_dict({
        "geometry": {"mode": "SPOTLIGHT", "center_incidence": 30.0},
        "chirp": {"bandwidth": 100e6, "pulse_duration": 1e-6},
        "plan": {"prf": 3000.0, "azimuth_resolution": resolution},
    })
    plan = build_plan(scenario)
    assert spotlight_azimuth_resolution(plan) == pytest.approx(resolution, rel=0.02)

    raw = simulate_raw(build_targets(scenario, plan), plan, threads=2)
    img = focus(raw, build_focus_config(scenario), grid=scene_grid(plan, 96, 96), threads=2)
    assert img.metadata["algorithm"] == FocusAlgorithm.BACKPROJECTION.value

    slc = form_slc(img)
    report = measure_irf(extract_irf(slc, _peak(slc.pixels)), convention=ResolutionConvention.NOMINAL)
    assert report.resolution_azimuth == pytest.approx(resolution, rel=0.10)
    assert 0.2 <= report.resolution_azimuth <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_range_doppler_agrees_with_backprojection(seed):
    rng = np.random.default_rng(seed)
    scenario = ScenarioConfig.from_dict({
        "seed": seed,
        "chirp": {"bandwidth": 100e6, "pulse_duration": 2e-6},
        "targets": [{
            "name": "CR1",
            "azimuth_offset": float(rng.uniform(-100.0, 100.0)),
            "range_offset": float(rng.uniform(-200.0, 200.0)),
            "rcs": float(rng.uniform(1.0e3, 1.0e5)),
        }],
    })
    plan = build_plan(scenario)
    raw = simulate_raw(build_targets(scenario, plan), plan, threads=2)
    cfg = build_focus_config(scenario)

    slc = form_slc(focus_range_doppler(raw, cfg, threads=2))
    row, col = _peak(slc.pixels)
    rows = slice(row - 48, row + 48)
    cols = slice(col - 48, col + 48)
    grid = ImageGrid(slc.azimuth_time_axis[rows], slc.slant_range_axis[cols])
    bp_cfg = FocusConfig(algorithm=FocusAlgorithm.BACKPROJECTION)
    bp = form_slc(focus_backprojection(raw, grid, bp_cfg, threads=2))

    bp_row, bp_col = _peak(bp.pixels)
    assert abs(bp_row - 48) <= 1
    assert abs(bp_col - 48) <= 1

    rda_power = measure_irf(extract_irf(slc, (row, col))).peak_power
    bp_power = measure_irf(extract_irf(bp, (bp_row, bp_col))).peak_power
    assert 10.0 * math.log10(bp_power / rda_power) == pytest.approx(0.0, abs=0.3)
