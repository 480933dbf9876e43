"""
Tests for IRF extraction, PSLR/ISLR/resolution and population statistics
"""
import math

import numpy as np
import pytest
from scipy import integrate

from conftest import point_response
from src.core.exceptions import MultiplePeaksError, PeakOnEdgeError, TooFewError, ValidationError
from src.core.models import IRFReport
from src.processing.quality import (
    ISLR_SPAN_CELLS,
    Axis,
    IRFChip,
    MainlobePolicy,
    ResolutionConvention,
    aggregate_reports,
    calibrate_islr_k,
    extract_irf_from_array,
    format_table,
    integrated_energy,
    measure_irf,
    measure_islr,
    measure_pslr,
    measure_resolution,
    relative_radiometric_accuracy,
)
from src.processing.signal import SINC_HALF_POWER_WIDTH

# 31 of 64 spectral bins: 64/31 pixels per resolution cell
CELL = 64 / 31


@pytest.fixture
def chip():
    return extract_irf_from_array(point_response(), (32, 32), 1.0, 1.0, name="CR1")


@pytest.fixture
def sinc_chip():
    """Ideal sinc with nulls at whole samples, 64 times oversampled along range"""
    factor = 64
    x = (np.arange(48 * factor) - 24 * factor) / factor
    return IRFChip(
        pixels=np.sinc(np.arange(-24, 24))[None, :].astype(complex),
        oversampled=np.tile(np.sinc(x).astype(complex), (3, 1)),
        range_spacing=1.0,
        azimuth_spacing=1.0,
        oversample_factor=factor,
        peak_position=(0.0, 0.0),
    )


def _first_null_islr(span: float) -> float:
    """Sidelobe-to-mainlobe energy of sinc^2 by quadrature, mainlobe out to the first null"""
    main, _ = integrate.quad(lambda x: np.sinc(x) ** 2, 0.0, 1.0)
    side, _ = integrate.quad(lambda x: np.sinc(x) ** 2, 1.0, span, limit=400)
    return 10.0 * math.log10(side / main)


def _report(pslr: float) -> IRFReport:
    return IRFReport(
        target="t",
        peak_position=(0.0, 0.0),
        peak_power=1.0,
        resolution_range=1.0,
        resolution_azimuth=2.0,
        pslr_range=pslr,
        pslr_azimuth=pslr,
        islr_range=-10.0,
        islr_azimuth=-10.0,
    )


class TestExtraction:
    def test_peak_is_recentered(self, chip):
        assert chip.peak_position[0] == pytest.approx(32.0, abs=0.05)
        assert chip.peak_position[1] == pytest.approx(32.0, abs=0.05)
        row, col = chip.center
        power = np.abs(chip.oversampled) ** 2
        assert power[row, col] == pytest.approx(power.max())

    def test_low_oversampling_is_rejected(self):
        with pytest.raises(ValidationError):
            extract_irf_from_array(point_response(), (32, 32), 1.0, 1.0, oversample=8)

    def test_peak_near_the_edge(self):
        with pytest.raises(PeakOnEdgeError):
            extract_irf_from_array(point_response(peak=(2, 2)), (2, 2), 1.0, 1.0)

    def test_second_target_in_the_chip(self):
        image = point_response() + point_response(peak=(42, 42))
        with pytest.raises(MultiplePeaksError):
            extract_irf_from_array(image, (32, 32), 1.0, 1.0)

    def test_spectrum_at_nyquist_measures_like_baseband(self, chip):
        rows, cols = np.indices((64, 64))
        shifted = point_response() * (-1.0) ** (rows + cols)
        moved = extract_irf_from_array(shifted, (32, 32), 1.0, 1.0, name="CR1")
        for axis in (Axis.RANGE, Axis.AZIMUTH):
            assert measure_resolution(moved, axis) == pytest.approx(measure_resolution(chip, axis), rel=1e-3)
            assert measure_pslr(moved, axis) == pytest.approx(measure_pslr(chip, axis), abs=0.05)


class TestMetrics:
    def test_half_power_resolution(self, chip):
        expected = SINC_HALF_POWER_WIDTH * CELL
        assert measure_resolution(chip, Axis.RANGE) == pytest.approx(expected, rel=0.015)
        assert measure_resolution(chip, Axis.AZIMUTH) == pytest.approx(expected, rel=0.015)

    def test_nominal_resolution(self, chip):
        width = measure_resolution(chip, Axis.RANGE, ResolutionConvention.NOMINAL)
        assert width == pytest.approx(CELL, rel=0.015)

    def test_spacing_scales_the_width(self):
        wide = extract_irf_from_array(point_response(), (32, 32), 2.0, 1.0)
        assert measure_resolution(wide, Axis.RANGE) == pytest.approx(
            2.0 * measure_resolution(wide, Axis.AZIMUTH), rel=1e-6
        )

    def test_pslr_of_an_unweighted_response(self, chip):
        assert measure_pslr(chip, Axis.RANGE) == pytest.approx(-13.26, abs=0.3)
        assert measure_pslr(chip, Axis.AZIMUTH) == pytest.approx(-13.26, abs=0.3)

    def test_islr_mainlobe_policies(self, chip):
        assert measure_islr(chip, Axis.RANGE) == pytest.approx(-5.03, abs=0.3)
        first_null = measure_islr(chip, Axis.RANGE, MainlobePolicy.FIRST_NULL)
        assert -10.8 < first_null < -9.6

    def test_calibrated_islr_on_an_ideal_sinc(self, sinc_chip):
        assert measure_islr(sinc_chip, Axis.RANGE) == pytest.approx(-5.03, abs=0.1)

    def test_first_null_islr_matches_quadrature(self, sinc_chip):
        expected = _first_null_islr(ISLR_SPAN_CELLS * SINC_HALF_POWER_WIDTH)
        assert measure_islr(sinc_chip, Axis.RANGE, MainlobePolicy.FIRST_NULL) == pytest.approx(expected, abs=0.1)

    def test_islr_multiplier_follows_the_target(self):
        # a lower target needs a wider mainlobe
        assert calibrate_islr_k(-8.0) > calibrate_islr_k(-5.03)

    def test_integrated_energy_of_a_unit_point(self, chip):
        energy, background = integrated_energy(chip)
        assert 0.9 * CELL ** 2 < energy < CELL ** 2
        assert background >= 0.0

    def test_full_report(self, chip):
        report = measure_irf(chip)
        assert report.target == "CR1"
        assert report.resolution_convention == "HALF_POWER"
        assert report.islr_mainlobe == "K_TIMES_RES"
        assert report.pslr_range < -12.9


class TestPopulation:
    def test_mean_and_unbiased_std(self):
        summary = aggregate_reports([_report(-13.0), _report(-14.0)])
        assert summary.count == 2
        assert summary.pslr_range.mean == pytest.approx(-13.5)
        assert summary.pslr_range.std == pytest.approx(0.70711, abs=1e-4)

    def test_single_report_is_not_a_population(self):
        with pytest.raises(TooFewError):
            aggregate_reports([_report(-13.0)])

    def test_table_lists_every_metric(self):
        table = format_table(aggregate_reports([_report(-13.0), _report(-14.0)]))
        assert "Range PSLR [dB]" in table
        assert "Azimuth ISLR [dB]" in table
        assert "-13.50" in table

    def test_relative_accuracy_of_consistent_targets(self):
        amplitudes = [1.0, 2.0, 3.0]
        chips = [
            extract_irf_from_array(point_response(amplitude=a), (32, 32), 1.0, 1.0) for a in amplitudes
        ]
        assert relative_radiometric_accuracy(chips, [5.0 * a * a for a in amplitudes]) == pytest.approx(
            0.0, abs=1e-6
        )
        with pytest.raises(TooFewError):
            relative_radiometric_accuracy(chips[:1], [5.0])
