"""
Raster persistence
Each raster is a little-endian binary file plus a JSON sidecar with the same
stem. Raw and SLC samples are interleaved complex float32 ("<c8"), GRD
samples are 16-bit signed integers ("<i2"), all row-major.
"""
import hashlib
import json
import logging
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..core.exceptions import ValidationError
from ..core.models import ManifestEntry, ProductMetadata
from ..processing.focus import FocusAlgorithm, FocusConfig, FocusedImage
from ..processing.geometry import AcquisitionGeometry, EarthEllipsoid, OrbitModel
from ..processing.products import GRDProduct, SLCProduct
from ..processing.rawsim import (
    AntennaModel,
    CollectionPlan,
    NoiseSettings,
    PointTarget,
    RawDataMatrix,
    SteeringLaw,
)
from ..processing.signal import ChirpParams, WindowSpec

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
COMPLEX_DTYPE = np.dtype("<c8")
GRD_DTYPE = np.dtype("<i2")

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    """JSON-ready copy of dataclasses, enums, numpy values and pydantic models"""
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if is_dataclass(value) and not isinstance(value, type):
        return {k: _plain(v) for k, v in asdict(value).items()}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_json(data: Any, path: PathLike) -> Path:
    """Write JSON with sorted keys so identical content gives identical bytes"""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump(_plain(data), f, indent=2, sort_keys=True)
        f.write("\n")
    return out


def read_json(path: PathLike) -> Dict[str, Any]:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"File not found: {p}", field="path")
    with open(p, "r") as f:
        return json.load(f)


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def manifest_entry(path: PathLike, kind: str) -> Dict[str, Any]:
    return ManifestEntry(path=str(path), sha256=sha256_file(path), kind=kind).model_dump()


def _stem(path: PathLike) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in (".bin", ".json") else p


def _write_raster(pixels: np.ndarray, dtype: np.dtype, sidecar: Dict[str, Any], path: PathLike) -> List[Path]:
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(pixels, dtype=dtype)
    bin_path = stem.with_suffix(".bin")
    data.tofile(bin_path)
    sidecar = dict(sidecar, format_version=FORMAT_VERSION, dtype=dtype.str, shape=list(data.shape))
    json_path = write_json(sidecar, stem.with_suffix(".json"))
    logger.info(f"Wrote {sidecar['kind']} {data.shape} to {bin_path}")
    return [bin_path, json_path]


def _read_raster(path: PathLike, kind: str) -> Tuple[np.ndarray, Dict[str, Any]]:
    stem = _stem(path)
    sidecar = read_json(stem.with_suffix(".json"))
    if sidecar.get("kind") != kind:
        raise ValidationError(f"{stem} holds {sidecar.get('kind')}, expected {kind}", field="path")
    dtype = np.dtype(sidecar["dtype"])
    shape = tuple(sidecar["shape"])
    data = np.fromfile(stem.with_suffix(".bin"), dtype=dtype)
    if data.size != int(np.prod(shape)):
        raise ValidationError(f"{stem}.bin holds {data.size} samples, sidecar says {shape}", field="path")
    return data.reshape(shape), sidecar


def plan_to_dict(plan: CollectionPlan) -> Dict[str, Any]:
    return _plain(plan)


def plan_from_dict(data: Dict[str, Any]) -> CollectionPlan:
    """Rebuild a CollectionPlan from plan_to_dict output"""
    g = data["geom"]
    o = g["orbit"]
    orbit = OrbitModel(
        height_at_equator=o["height_at_equator"],
        inclination=o["inclination"],
        epoch=o["epoch"],
        ascending_node=o["ascending_node"],
        phase=o["phase"],
        ellipsoid=EarthEllipsoid(**o["ellipsoid"]),
        gm=o["gm"],
    )
    geom = AcquisitionGeometry(orbit, g["look_side"], g["mode"], g["center_incidence"], g["scene_height"])
    window = data.get("range_window")
    return CollectionPlan(
        geom=geom,
        chirp=ChirpParams(**data["chirp"]),
        prf=data["prf"],
        start=data["start"],
        stop=data["stop"],
        steering=SteeringLaw(**data["steering"]),
        tx_power=data["tx_power"],
        rx_gain=data["rx_gain"],
        duty_cycle=data["duty_cycle"],
        antenna=AntennaModel(**data["antenna"]),
        noise=NoiseSettings(**data["noise"]),
        range_window=(float(window[0]), int(window[1])) if window is not None else None,
        gain_offset_db=data["gain_offset_db"],
        seed=data["seed"],
    )


def focus_config_to_dict(cfg: FocusConfig) -> Dict[str, Any]:
    return _plain(cfg)


def focus_config_from_dict(data: Dict[str, Any]) -> FocusConfig:
    return FocusConfig(
        processed_doppler_bandwidth=data["processed_doppler_bandwidth"],
        rcmc_kernel_taps=data["rcmc_kernel_taps"],
        algorithm=FocusAlgorithm(data["algorithm"]),
        azimuth_window=WindowSpec(**data["azimuth_window"]),
        range_window=WindowSpec(**data["range_window"]),
        equalize_azimuth_pattern=data["equalize_azimuth_pattern"],
        range_upsampling=data["range_upsampling"],
    )


def _axis(first: float, spacing: float, count: int) -> np.ndarray:
    return first + spacing * np.arange(count)


def save_raw(raw: RawDataMatrix, path: PathLike) -> List[Path]:
    sidecar = {
        "kind": "raw",
        "range_window_start": raw.range_window_start,
        "pulse_time_first": float(raw.pulse_times[0]),
        "prf": raw.plan.prf,
        "noise_power": raw.noise_power,
        "targets": [
            {"name": t.name, "position": t.position, "rcs": t.rcs, "phase_offset": t.phase_offset}
            for t in raw.targets
        ],
        "plan": plan_to_dict(raw.plan),
        "metadata": raw.metadata,
    }
    return _write_raster(raw.samples, COMPLEX_DTYPE, sidecar, path)


def load_raw(path: PathLike) -> RawDataMatrix:
    samples, sidecar = _read_raster(path, "raw")
    plan = plan_from_dict(sidecar["plan"])
    targets = tuple(
        PointTarget(np.asarray(t["position"]), t["rcs"], t["phase_offset"], t["name"])
        for t in sidecar["targets"]
    )
    return RawDataMatrix(
        samples=samples.astype(np.complex128),
        pulse_times=plan.pulse_times[: samples.shape[0]],
        range_window_start=sidecar["range_window_start"],
        plan=plan,
        targets=targets,
        noise_power=sidecar["noise_power"],
        metadata=sidecar.get("metadata", {}),
    )


def save_image(img: FocusedImage, path: PathLike) -> List[Path]:
    sidecar = {
        "kind": "image",
        "azimuth_time_first": float(img.azimuth_time_axis[0]),
        "azimuth_time_spacing": img.azimuth_time_spacing,
        "slant_range_first": float(img.slant_range_axis[0]),
        "range_spacing": img.range_spacing,
        "focus": focus_config_to_dict(img.config),
        "plan": plan_to_dict(img.plan),
        "metadata": img.metadata,
    }
    return _write_raster(img.pixels, COMPLEX_DTYPE, sidecar, path)


def load_image(path: PathLike) -> FocusedImage:
    pixels, sidecar = _read_raster(path, "image")
    rows, cols = pixels.shape
    return FocusedImage(
        pixels=pixels.astype(np.complex128),
        azimuth_time_axis=_axis(sidecar["azimuth_time_first"], sidecar["azimuth_time_spacing"], rows),
        slant_range_axis=_axis(sidecar["slant_range_first"], sidecar["range_spacing"], cols),
        config=focus_config_from_dict(sidecar["focus"]),
        plan=plan_from_dict(sidecar["plan"]),
        metadata=sidecar.get("metadata", {}),
    )


def save_slc(slc: SLCProduct, path: PathLike) -> List[Path]:
    sidecar = {
        "kind": "SLC",
        "metadata": slc.metadata.model_dump(mode="json"),
        "plan": plan_to_dict(slc.plan) if slc.plan is not None else None,
    }
    return _write_raster(slc.pixels, COMPLEX_DTYPE, sidecar, path)


def load_slc(path: PathLike) -> SLCProduct:
    pixels, sidecar = _read_raster(path, "SLC")
    meta = ProductMetadata(**sidecar["metadata"])
    rows, cols = pixels.shape
    plan = plan_from_dict(sidecar["plan"]) if sidecar.get("plan") else None
    return SLCProduct(
        pixels=pixels.astype(np.complex128),
        range_spacing=meta.range_spacing,
        azimuth_spacing=meta.azimuth_spacing,
        metadata=meta,
        azimuth_time_axis=_axis(meta.azimuth_time_first, meta.azimuth_time_spacing, rows),
        slant_range_axis=_axis(meta.slant_range_first, meta.range_spacing, cols),
        plan=plan,
    )


def save_grd(grd: GRDProduct, path: PathLike) -> List[Path]:
    sidecar = {"kind": "GRD", "metadata": grd.metadata.model_dump(mode="json")}
    return _write_raster(grd.pixels, GRD_DTYPE, sidecar, path)


def load_grd(path: PathLike) -> GRDProduct:
    pixels, sidecar = _read_raster(path, "GRD")
    meta = ProductMetadata(**sidecar["metadata"])
    first = meta.ground_range_first if meta.ground_range_first is not None else 0.0
    return GRDProduct(
        pixels=pixels.astype(np.int16),
        ground_spacing=meta.range_spacing,
        azimuth_spacing=meta.azimuth_spacing,
        looks=tuple(meta.looks),
        metadata=meta,
        ground_range_axis=_axis(first, meta.range_spacing, pixels.shape[1]),
    )
