"""
Tests for SLC wrapping, GRD formation, resampling kernels and quantization
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from src.config.scenario import ScenarioConfig, build_focus_config, build_plan, build_targets
from src.core.exceptions import (
    MissingCalibrationError,
    SaturationExceededError,
    SpacingUnreachableError,
    ValidationError,
    WindowedInputError,
)
from src.processing.focus import FocusConfig, FocusedImage, focus
from src.processing.products import (
    DETECTION_RULE,
    INT16_MAX,
    GRDProduct,
    Resampler,
    ScalePolicy,
    build_metadata,
    clipped_fraction,
    cubic_convolution_weights,
    form_grd,
    form_slc,
    ground_positions,
    multilook_intensity,
    quantize_int16,
    radar_brightness,
    resample_axis,
    saturation_scale,
    scene_incidences,
)
from src.processing.quality import Axis, extract_irf, integrated_energy, measure_pslr, measure_resolution
from src.processing.rawsim import scene_reference, simulate_raw
from src.processing.signal import WindowSpec


@pytest.fixture
def speckle_slc(short_plan):
    """Fully developed speckle on the native 100 MHz sampling grid"""
    rng = np.random.default_rng(21)
    ref = scene_reference(short_plan)
    n_az, n_rg = 64, 256
    spacing = short_plan.chirp.range_sample_spacing
    img = FocusedImage(
        pixels=rng.standard_normal((n_az, n_rg)) + 1j * rng.standard_normal((n_az, n_rg)),
        azimuth_time_axis=(np.arange(n_az) - n_az // 2) / short_plan.prf,
        slant_range_axis=ref.slant_range + (np.arange(n_rg) - n_rg // 2) * spacing,
        config=FocusConfig(),
        plan=short_plan,
        metadata={"azimuth_bandwidth": 2700.0},
    )
    return form_slc(img, calibration_constant=40.0)


class TestSLC:
    def test_pixels_pass_through(self, flat_image):
        slc = form_slc(flat_image, calibration_constant=12.0)
        assert slc.pixels is flat_image.pixels
        assert slc.metadata.product_type == "SLC"
        assert slc.metadata.calibration_constant == 12.0
        assert slc.range_spacing == pytest.approx(50.0)
        assert slc.metadata.pixel_area == pytest.approx(slc.range_spacing * slc.azimuth_spacing)

    def test_tapered_range_compression_is_refused(self, flat_image):
        tapered = replace(flat_image, config=FocusConfig(range_window=WindowSpec.tuned(-17.5)))
        with pytest.raises(WindowedInputError):
            form_slc(tapered)

    def test_metadata_overrides(self, flat_image):
        meta = build_metadata(flat_image, "SLC", quantization_scale=2.0)
        assert meta.quantization_scale == 2.0
        assert meta.azimuth_bandwidth == 2700.0
        assert meta.incidence_near < meta.incidence_far


class TestQuantization:
    def test_fixed_policy_maps_the_peak_to_full_scale(self):
        values, scale = quantize_int16(np.array([0.0, 1.0, 4.0]), ScalePolicy.FIXED)
        assert values.dtype == np.int16
        assert values[-1] == INT16_MAX
        assert scale == pytest.approx(4.0 / INT16_MAX)

    def test_fixed_scale_is_honored(self):
        values, scale = quantize_int16(np.array([1.0, 2.0]), ScalePolicy.FIXED, fixed_scale=0.5)
        assert scale == 0.5
        assert values.tolist() == [2, 4]

    def test_percentile_policy_leaves_headroom(self):
        values, _ = quantize_int16(np.ones(1000))
        assert int(values.max()) == round(0.9 * INT16_MAX)

    def test_all_zero_input(self):
        values, scale = quantize_int16(np.zeros(10))
        assert scale == 1.0
        assert not np.any(values)

    @pytest.mark.parametrize("bad", [np.array([-1.0, 1.0]), np.array([np.nan, 1.0])])
    def test_rejects_invalid_amplitudes(self, bad):
        with pytest.raises(ValidationError):
            quantize_int16(bad)

    def test_grd_must_be_int16(self, speckle_slc):
        with pytest.raises(ValidationError):
            GRDProduct(pixels=np.zeros((2, 2)), ground_spacing=1.0, azimuth_spacing=1.0, looks=(1, 1),
                       metadata=speckle_slc.metadata, ground_range_axis=np.arange(2.0))


class TestResampling:
    def test_cubic_taps_sum_to_one(self):
        weights = cubic_convolution_weights(np.linspace(0.0, 0.99, 50))
        assert np.allclose(weights.sum(axis=1), 1.0)

    @pytest.mark.parametrize("method", list(Resampler))
    def test_integer_positions_reproduce_the_samples(self, method):
        data = np.random.default_rng(0).standard_normal((3, 10))
        out = resample_axis(data, np.arange(10.0), axis=1, method=method)
        assert np.allclose(out, data)

    def test_cubic_is_exact_for_linear_ramps(self):
        data = np.arange(12.0)[None, :]
        positions = np.array([2.25, 5.5, 8.75])
        out = resample_axis(data, positions, axis=1, method=Resampler.CUBIC)
        assert np.allclose(out[0], positions)


class TestGRD:
    def test_ground_product(self, speckle_slc, short_plan):
        grd = form_grd(speckle_slc, 2.5, WindowSpec.tuned(-17.5), short_plan.geom,
                       scale_policy=ScalePolicy.FIXED)
        assert grd.pixels.dtype == np.int16
        assert int(grd.pixels.max()) == INT16_MAX
        assert np.allclose(np.diff(grd.ground_range_axis), 2.5)
        assert grd.metadata.product_type == "GRD"
        assert grd.metadata.detection == DETECTION_RULE
        assert grd.metadata.resampler == "CUBIC"
        assert grd.metadata.ground_range_definition == "ARC_LENGTH"
        assert grd.metadata.ground_range_first == pytest.approx(grd.ground_range_axis[0])
        assert min(grd.looks) >= 1
        assert grd.pixels.shape[1] == grd.ground_range_axis.size

    def test_brightness_uses_the_quantization_scale(self, speckle_slc, short_plan):
        grd = form_grd(speckle_slc, 2.5, WindowSpec.tuned(-17.5), short_plan.geom,
                       scale_policy=ScalePolicy.FIXED)
        beta = radar_brightness(grd.pixels, grd.metadata)
        scale = grd.metadata.quantization_scale
        assert np.allclose(beta, 40.0 * (grd.pixels.astype(float) * scale) ** 2)

    def test_brightness_needs_calibration(self, flat_image):
        slc = form_slc(flat_image)
        with pytest.raises(MissingCalibrationError):
            radar_brightness(slc.pixels, slc.metadata)

    def test_spacing_coarser_than_resolution(self, speckle_slc, short_plan):
        with pytest.raises(SpacingUnreachableError):
            form_grd(speckle_slc, 5.0, WindowSpec.tuned(-17.5), short_plan.geom)

    def test_weak_window_is_refused(self, speckle_slc, short_plan):
        with pytest.raises(ValidationError):
            form_grd(speckle_slc, 2.5, WindowSpec.tuned(-15.0), short_plan.geom)

    def test_projection_stretches_by_inverse_sine(self, speckle_slc, short_plan):
        ranges = speckle_slc.slant_range_axis
        ground = ground_positions(speckle_slc, short_plan.geom)
        mid = ranges.size // 2
        slope = (ground[mid + 1] - ground[mid - 1]) / (ranges[mid + 1] - ranges[mid - 1])
        incidence = scene_incidences(short_plan, ranges[[mid]])[0]
        assert slope == pytest.approx(1.0 / math.sin(math.radians(incidence)), rel=0.01)
        assert np.all(np.diff(ground) > 0)


class TestMultilook:
    @pytest.mark.parametrize("looks", [(2, 2), (1, 3)])
    def test_speckle_variance_drops_with_the_look_count(self, looks):
        rng = np.random.default_rng(5)
        pixels = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))

        def cv2(range_looks: int, azimuth_looks: int) -> float:
            intensity = multilook_intensity(
                pixels,
                range_sample_rate=1.0,
                range_bandwidth=1.0,
                range_looks=range_looks,
                azimuth_sample_rate=1.0,
                azimuth_bandwidth=1.0,
                azimuth_looks=azimuth_looks,
                window=WindowSpec(),
            )
            return float(np.var(intensity) / np.mean(intensity) ** 2)

        n = looks[0] * looks[1]
        assert cv2(1, 1) / cv2(*looks) == pytest.approx(n, rel=0.15)

    def test_mean_intensity_is_kept(self):
        rng = np.random.default_rng(6)
        pixels = rng.standard_normal((128, 128)) + 1j * rng.standard_normal((128, 128))
        intensity = multilook_intensity(pixels, 1.0, 1.0, 2, 1.0, 1.0, 2, WindowSpec.tuned(-17.5))
        assert float(np.mean(intensity)) == pytest.approx(float(np.mean(np.abs(pixels) ** 2)), rel=0.05)


@pytest.fixture
def bright_point_slc(speckle_slc):
    """Speckle with one corner-reflector-like pixel 60 dB above the clutter"""
    pixels = np.array(speckle_slc.pixels, copy=True)
    pixels[32, 128] = 1.0e3 * np.abs(pixels).max()
    return replace(speckle_slc, pixels=pixels)


class TestSaturation:
    def test_scale_leaves_the_allowed_tail(self):
        pixels = np.concatenate([np.ones(100_000), np.full(50, 1000.0)])
        scale = saturation_scale(pixels)
        assert scale == pytest.approx(1000.0 / INT16_MAX)
        assert clipped_fraction(pixels, scale) == 0.0

    def test_few_bright_pixels_may_clip(self):
        pixels = np.concatenate([np.ones(100_000), np.full(5, 1000.0)])
        scale = saturation_scale(pixels)
        assert scale == pytest.approx(1.0 / INT16_MAX)
        assert clipped_fraction(pixels, scale) <= 1e-4

    def test_point_target_under_the_default_policy(self, bright_point_slc, short_plan, caplog):
        grd = form_grd(bright_point_slc, 2.5, WindowSpec.tuned(-17.5), short_plan.geom)
        assert grd.pixels.dtype == np.int16
        saturated = np.count_nonzero(grd.pixels == INT16_MAX)
        assert saturated <= int(np.floor(grd.pixels.size * 1e-4)) + 2
        assert "scale raised" in caplog.text

    def test_speckle_under_the_default_policy(self, speckle_slc, short_plan):
        grd = form_grd(speckle_slc, 2.5, WindowSpec.tuned(-17.5), short_plan.geom)
        saturated = np.count_nonzero(grd.pixels == INT16_MAX)
        assert saturated <= int(np.floor(grd.pixels.size * 1e-4)) + 2
        assert int(np.median(grd.pixels)) > 0

    def test_fixed_scale_that_clips_is_an_error(self, speckle_slc, short_plan):
        with pytest.raises(SaturationExceededError):
            form_grd(speckle_slc, 2.5, WindowSpec.tuned(-17.5), short_plan.geom,
                     scale_policy=ScalePolicy.FIXED, fixed_scale=1e-9)


@pytest.fixture(scope="module")
def steep_point_slc():
    """A 300 MHz corner reflector at 30 deg incidence, cropped around its peak"""
    scenario = ScenarioConfig.from_dict({
        "geometry": {"center_incidence": 30.0},
        "chirp": {"bandwidth": 300e6, "pulse_duration": 2e-6},
    })
    plan = build_plan(scenario)
    raw = simulate_raw(build_targets(scenario, plan), plan, threads=2)
    slc = form_slc(focus(raw, build_focus_config(scenario), threads=2), calibration_constant=1.0)
    row, col = np.unravel_index(int(np.argmax(np.abs(slc.pixels))), slc.pixels.shape)
    rows = slice(int(row) - 128, int(row) + 128)
    cols = slice(int(col) - 192, int(col) + 192)
    return replace(
        slc,
        pixels=slc.pixels[rows, cols],
        azimuth_time_axis=slc.azimuth_time_axis[rows],
        slant_range_axis=slc.slant_range_axis[cols],
    )


@pytest.fixture(scope="module")
def steep_point_grd(steep_point_slc):
    return form_grd(steep_point_slc, 0.5, WindowSpec.tuned(-18.5), steep_point_slc.plan.geom,
                    azimuth_spacing=1.0, resolution=3.0, scale_policy=ScalePolicy.FIXED)


def _chip(product):
    peak = np.unravel_index(int(np.argmax(np.abs(product.pixels))), product.pixels.shape)
    return extract_irf(product, (int(peak[0]), int(peak[1])))


@pytest.mark.slow
class TestGRDPointTarget:
    def test_ground_range_resolution(self, steep_point_grd):
        chip = _chip(steep_point_grd)
        assert measure_resolution(chip, Axis.RANGE) == pytest.approx(3.0, rel=0.10)
        assert measure_pslr(chip, Axis.RANGE) <= -17.0

    def test_single_clean_peak(self, steep_point_grd):
        pixels = steep_point_grd.pixels.astype(float)
        row, col = np.unravel_index(int(np.argmax(pixels)), pixels.shape)
        window = pixels[row - 3:row + 4, col - 3:col + 4]
        assert window.min() > 0

    def test_brightness_matches_the_slc(self, steep_point_slc, steep_point_grd):
        slc_energy, _ = integrated_energy(_chip(steep_point_slc))
        grd_energy, _ = integrated_energy(_chip(steep_point_grd))
        slc_meta, grd_meta = steep_point_slc.metadata, steep_point_grd.metadata
        slc_beta = slc_meta.calibration_constant * slc_energy * slc_meta.pixel_area
        grd_beta = (grd_meta.calibration_constant * grd_meta.quantization_scale ** 2
                    * grd_energy * grd_meta.pixel_area)
        assert 10.0 * math.log10(grd_beta / slc_beta) == pytest.approx(0.0, abs=0.3)
