"""
Tests for the reflector campaign simulation
"""
import math

import numpy as np
import pytest

from src.config.scenario import ScenarioConfig, build_plan
from src.core.exceptions import ValidationError
from src.processing.calibration import estimate_calibration_constant, theoretical_calibration_constant
from src.processing.campaign import (
    CAMPAIGN_CHAIN,
    NOMINAL_BUDGET,
    reflector_ranges,
    simulate_reflector_campaign,
)
from src.processing.focus import FocusConfig
from src.processing.quality import recovered_rcs_errors_db, relative_radiometric_accuracy
from src.processing.rawsim import scene_reference


@pytest.fixture(scope="module")
def campaign_plan():
    return build_plan(ScenarioConfig.from_dict({"chirp": {"bandwidth": 100e6, "pulse_duration": 2e-6}}))


@pytest.fixture(scope="module")
def reference_constant_db(campaign_plan):
    k = theoretical_calibration_constant(campaign_plan, FocusConfig(), CAMPAIGN_CHAIN)
    return 10 * math.log10(k)


def test_reflectors_straddle_the_scene_center(short_plan):
    ranges = reflector_ranges(short_plan, 5)
    assert ranges.size == 5
    assert np.all(np.diff(ranges) > 0)
    assert ranges[2] == pytest.approx(scene_reference(short_plan).slant_range, rel=1e-4)
    assert reflector_ranges(short_plan, 1)[0] == pytest.approx(ranges[2])


@pytest.mark.parametrize("count, fraction", [(0, 0.5), (3, 1.5)])
def test_reflector_layout_is_validated(short_plan, count, fraction):
    with pytest.raises(ValidationError):
        reflector_ranges(short_plan, count, fraction)


@pytest.mark.slow
def test_unperturbed_campaign_is_consistent(campaign_plan, reference_constant_db):
    result = simulate_reflector_campaign(campaign_plan, count=3, threads=2)
    assert len(result.chips) == len(result.reports) == 3
    assert [c.name for c in result.chips] == ["CR01", "CR02", "CR03"]
    assert np.allclose(result.perturbations["rcs_error_db"], 0.0)

    report = estimate_calibration_constant(result.chips, result.true_rcs)
    assert report.residual_std_db < 0.5
    assert abs(report.constant_db - reference_constant_db) <= 2.0
    for irf in result.reports:
        assert irf.pslr_range < -12.0


@pytest.mark.slow
def test_nominal_budget_meets_radiometric_accuracy(campaign_plan, reference_constant_db):
    result = simulate_reflector_campaign(campaign_plan, count=8, budget=NOMINAL_BUDGET, seed=4, threads=2)
    assert np.std(result.perturbations["rcs_error_db"]) > 0.0

    report = estimate_calibration_constant(result.chips, result.true_rcs)
    assert abs(report.constant_db - reference_constant_db) <= 2.0
    assert relative_radiometric_accuracy(result.chips, result.true_rcs) <= 1.0


@pytest.mark.slow
def test_near_and_far_range_agree_after_compensation(campaign_plan):
    result = simulate_reflector_campaign(campaign_plan, count=2, swath_fraction=1.0, threads=2)
    near, far = result.slant_ranges
    assert far - near > 5e3
    errors = recovered_rcs_errors_db(result.chips, result.true_rcs)
    assert abs(errors[1] - errors[0]) <= 1.0
