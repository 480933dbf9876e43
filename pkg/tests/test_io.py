"""
Tests for raster persistence, JSON reports and input validators
"""
import json

import numpy as np
import pytest

from src.core.exceptions import ValidationError
from src.processing.products import GRDProduct, build_metadata, form_slc
from src.processing.rawsim import simulate_raw
from src.utils.io import (
    load_grd,
    load_image,
    load_raw,
    load_slc,
    plan_to_dict,
    read_json,
    save_grd,
    save_image,
    save_raw,
    save_slc,
    sha256_file,
    write_json,
)
from src.utils.validators import validate_output_dir, validate_raster, validate_region, validate_seed


class TestRasters:
    def test_raw_keeps_samples_targets_and_plan(self, tmp_path, short_plan, center_target):
        raw = simulate_raw([center_target], short_plan, threads=1)
        paths = save_raw(raw, tmp_path / "raw")
        assert [p.suffix for p in paths] == [".bin", ".json"]
        assert paths[0].stat().st_size == raw.samples.size * 8

        loaded = load_raw(tmp_path / "raw.bin")
        assert np.allclose(loaded.samples, raw.samples, rtol=1e-6, atol=1e-12 * np.abs(raw.samples).max())
        assert loaded.targets[0].name == "CR1"
        assert loaded.range_window_start == raw.range_window_start
        assert plan_to_dict(loaded.plan) == plan_to_dict(raw.plan)

    def test_image_axes_are_rebuilt(self, tmp_path, flat_image):
        save_image(flat_image, tmp_path / "image")
        loaded = load_image(tmp_path / "image")
        assert np.allclose(loaded.slant_range_axis, flat_image.slant_range_axis)
        assert np.allclose(loaded.azimuth_time_axis, flat_image.azimuth_time_axis)
        assert loaded.config == flat_image.config

    def test_slc_metadata(self, tmp_path, flat_image):
        slc = form_slc(flat_image, calibration_constant=7.0)
        save_slc(slc, tmp_path / "slc")
        loaded = load_slc(tmp_path / "slc.json")
        assert loaded.metadata == slc.metadata
        assert np.allclose(loaded.pixels, slc.pixels)

    def test_grd_is_little_endian_int16(self, tmp_path, flat_image):
        meta = build_metadata(flat_image, "GRD", ground_range_first=1000.0)
        grd = GRDProduct(
            pixels=np.arange(12, dtype=np.int16).reshape(3, 4),
            ground_spacing=meta.range_spacing,
            azimuth_spacing=meta.azimuth_spacing,
            looks=(1, 1),
            metadata=meta,
            ground_range_axis=1000.0 + meta.range_spacing * np.arange(4),
        )
        bin_path, json_path = save_grd(grd, tmp_path / "grd")
        assert np.array_equal(np.fromfile(bin_path, dtype="<i2").reshape(3, 4), grd.pixels)
        assert read_json(json_path)["dtype"] == "<i2"
        loaded = load_grd(tmp_path / "grd")
        assert np.array_equal(loaded.pixels, grd.pixels)
        assert loaded.ground_range_axis[0] == 1000.0

    def test_kind_mismatch(self, tmp_path, flat_image):
        save_slc(form_slc(flat_image), tmp_path / "slc")
        with pytest.raises(ValidationError, match="expected GRD"):
            load_grd(tmp_path / "slc")

    def test_truncated_raster(self, tmp_path, flat_image):
        bin_path, _ = save_slc(form_slc(flat_image), tmp_path / "slc")
        bin_path.write_bytes(bin_path.read_bytes()[:-8])
        with pytest.raises(ValidationError, match="sidecar says"):
            load_slc(tmp_path / "slc")


class TestJson:
    def test_sorted_keys_and_numpy_values(self, tmp_path):
        path = write_json({"b": np.float64(1.5), "a": np.arange(3)}, tmp_path / "out" / "r.json")
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5}

    def test_identical_content_hashes_equal(self, tmp_path):
        first = write_json({"x": 1, "y": [1, 2]}, tmp_path / "a.json")
        second = write_json({"y": [1, 2], "x": 1}, tmp_path / "b.json")
        assert sha256_file(first) == sha256_file(second)

    def test_missing_report(self, tmp_path):
        with pytest.raises(ValidationError):
            read_json(tmp_path / "nope.json")


class TestValidators:
    def test_region_slices(self):
        rows, cols = validate_region((1, 3, 0, 2), (4, 5))
        assert (rows.start, rows.stop, cols.start, cols.stop) == (1, 3, 0, 2)

    @pytest.mark.parametrize("region", [(0, 5, 0, 2), (2, 2, 0, 2), (0, 1, 0)])
    def test_bad_regions(self, region):
        with pytest.raises(ValidationError):
            validate_region(region, (4, 5))

    def test_raster_checks(self):
        assert validate_raster(np.zeros((2, 2), dtype=np.int16), np.int16)
        with pytest.raises(ValidationError):
            validate_raster(np.zeros((2, 2)), np.int16)
        with pytest.raises(ValidationError):
            validate_raster(np.array([[np.nan]]), np.float64)

    @pytest.mark.parametrize("seed", [-1, True, 1.5])
    def test_bad_seeds(self, seed):
        with pytest.raises(ValidationError):
            validate_seed(seed)

    def test_output_dir_is_created(self, tmp_path):
        out = validate_output_dir(str(tmp_path / "a" / "b"))
        assert out.is_dir()
        with pytest.raises(ValidationError):
            validate_output_dir("  ")
