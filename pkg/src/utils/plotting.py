"""
Write-only PNG plots: IRF cuts, quicklooks and gain surfaces
"""
import logging
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..config import get_config  # noqa: E402
from ..core.models import IRFReport  # noqa: E402
from ..processing.quality import Axis, IRFChip  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
DB_FLOOR = -60.0


def _to_db(power: np.ndarray) -> np.ndarray:
    peak = float(np.max(power)) if power.size else 0.0
    if peak <= 0:
        return np.full(power.shape, DB_FLOOR)
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(power / peak), DB_FLOOR)


def _save(fig: plt.Figure, path: PathLike) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=get_config().plot_dpi, metadata={"Software": None})
    plt.close(fig)
    logger.debug(f"Wrote plot {out}")
    return out


def plot_irf_cuts(chip: IRFChip, report: Optional[IRFReport], path: PathLike) -> Path:
    """Range and azimuth cuts through the oversampled peak, annotated with the measurements"""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, axis in ((axes[0], Axis.RANGE), (axes[1], Axis.AZIMUTH)):
        cut, spacing = chip.cut(axis)
        x = (np.arange(cut.size) - cut.size // 2) * spacing
        ax.plot(x, _to_db(cut), linewidth=1.0)
        ax.set_xlabel(f"{axis.value.lower()} offset [m]")
        ax.grid(True, alpha=0.3)
        if report is not None:
            key = "range" if axis == Axis.RANGE else "azimuth"
            ax.set_title(
                f"res {getattr(report, f'resolution_{key}'):.3f} m, "
                f"PSLR {getattr(report, f'pslr_{key}'):.2f} dB, "
                f"ISLR {getattr(report, f'islr_{key}'):.2f} dB",
                fontsize=9,
            )
    axes[0].set_ylabel("normalized power [dB]")
    axes[0].set_ylim(DB_FLOOR, 3.0)
    fig.suptitle(chip.name or "IRF")
    fig.tight_layout()
    return _save(fig, path)


def plot_quicklook(pixels: np.ndarray, path: PathLike, title: str = "", dynamic_range: float = 40.0) -> Path:
    """Detected image in dB, azimuth down and range across"""
    power = np.abs(pixels.astype(float) if not np.iscomplexobj(pixels) else pixels) ** 2
    db = _to_db(power)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.imshow(db, cmap="gray", vmin=-dynamic_range, vmax=0.0, aspect="auto", interpolation="nearest")
    ax.set_xlabel("range sample")
    ax.set_ylabel("azimuth line")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_gain_surface(surface: np.ndarray, path: PathLike, title: str = "compensation gain") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    image = ax.imshow(20.0 * np.log10(surface), aspect="auto", cmap="viridis")
    fig.colorbar(image, ax=ax, label="dB")
    ax.set_xlabel("range sample")
    ax.set_ylabel("azimuth line")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
