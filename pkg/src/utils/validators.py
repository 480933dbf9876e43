"""
Validation utilities for pipeline inputs and persisted rasters
"""
import os
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np

from ..core.exceptions import ValidationError


def validate_output_dir(path: str) -> Path:
    """
    Create the output directory if needed and check it is writable

    Args:
        path: Output directory

    Returns:
        Resolved directory path

    Raises:
        ValidationError: If the directory cannot be created or written
    """
    if not path or not str(path).strip():
        raise ValidationError("Output directory cannot be empty", field="output_dir")

    out = Path(path).expanduser()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValidationError(f"Cannot create output directory {out}: {e}", field="output_dir") from e
    if not os.access(out, os.W_OK):
        raise ValidationError(f"Output directory {out} is not writable", field="output_dir")
    return out


def validate_region(region: Sequence[int], shape: Tuple[int, int]) -> Tuple[slice, slice]:
    """
    Validate a (row0, row1, col0, col1) window against a raster shape

    Returns:
        Row and column slices

    Raises:
        ValidationError: If the window is empty or leaves the raster
    """
    if len(region) != 4:
        raise ValidationError("Region must be (row0, row1, col0, col1)", field="region")

    r0, r1, c0, c1 = (int(v) for v in region)
    if not (0 <= r0 < r1 <= shape[0] and 0 <= c0 < c1 <= shape[1]):
        raise ValidationError(
            f"Region {tuple(region)} outside raster of shape {tuple(shape)}",
            field="region"
        )
    return slice(r0, r1), slice(c0, c1)


def validate_raster(pixels: np.ndarray, dtype: np.dtype, name: str = "raster") -> bool:
    """
    Check a raster is 2-D, non-empty, finite and of the expected dtype

    Raises:
        ValidationError: If any check fails
    """
    if pixels.ndim != 2 or pixels.size == 0:
        raise ValidationError(f"{name} must be a non-empty 2-D array", field=name)

    if pixels.dtype != np.dtype(dtype):
        raise ValidationError(f"{name} has dtype {pixels.dtype}, expected {np.dtype(dtype)}", field=name)

    if np.iscomplexobj(pixels) or np.issubdtype(pixels.dtype, np.floating):
        if not np.all(np.isfinite(pixels)):
            raise ValidationError(f"{name} contains non-finite values", field=name)

    return True


def validate_seed(seed: int) -> bool:
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError("Seed must be a non-negative integer", field="seed")
    return True
