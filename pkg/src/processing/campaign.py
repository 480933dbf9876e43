"""
Simulated corner-reflector campaign
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import IRFReport
from .calibration import CompensationChain, Correction, apply_compensations
from .focus import FocusConfig, focus
from .geometry import CrossTrackPlane
from .products import form_slc
from .quality import (
    DEFAULT_CHIP_SIZE,
    DEFAULT_OVERSAMPLE,
    IRFChip,
    extract_irf,
    measure_irf,
)
from .rawsim import (
    CollectionPlan,
    PerturbationBudget,
    PointTarget,
    boresight_look_angle,
    scene_reference,
    simulate_raw,
)

logger = logging.getLogger(__name__)

DEFAULT_REFLECTOR_RCS = 1.0e4
CAMPAIGN_CHAIN = CompensationChain(
    corrections=(Correction.RANGE_SPREAD, Correction.ELEVATION_PATTERN, Correction.AZIMUTH_PATTERN_SPOT)
)
# one-sigma knowledge errors of a routine calibration campaign (pointing in degrees)
NOMINAL_BUDGET = PerturbationBudget(
    elevation_pointing_std=0.02, rcs_std_db=0.3, chirp_droop_db=0.5, gain_drift_std_db=0.3
)


@dataclass
class CampaignResult:
    """Chips and reports of one simulated campaign; true_rcs holds the surveyed values"""
    chips: List[IRFChip] = field(default_factory=list)
    true_rcs: List[float] = field(default_factory=list)
    reports: List[IRFReport] = field(default_factory=list)
    slant_ranges: List[float] = field(default_factory=list)
    perturbations: Dict[str, np.ndarray] = field(default_factory=dict)


def reflector_ranges(plan: CollectionPlan, count: int, swath_fraction: float = 0.5) -> np.ndarray:
    """
    Slant ranges of reflectors spread evenly across a fraction of the -3 dB elevation beam
    """
    if count < 1:
        raise ValidationError("campaign needs at least one reflector", field="count")
    if not 0.0 <= swath_fraction <= 1.0:
        raise ValidationError("swath_fraction must lie in [0, 1]", field="swath_fraction")
    ref = scene_reference(plan)
    geom = plan.geom
    plane = CrossTrackPlane(ref.state, geom.look_side, geom.orbit.ellipsoid, geom.scene_height)
    half_beam = math.asin(0.443 * plan.wavelength / plan.antenna.height_elevation) * swath_fraction
    offsets = np.linspace(-half_beam, half_beam, count) if count > 1 else np.zeros(1)
    psi = plane.nadir_psi + boresight_look_angle(plan, include_error=False) + offsets
    return np.asarray(plane.ray_distance(psi), dtype=float)


def simulate_reflector_campaign(
    plan: CollectionPlan,
    count: int = 20,
    rcs: float = DEFAULT_REFLECTOR_RCS,
    budget: PerturbationBudget = PerturbationBudget(),
    cfg: FocusConfig = FocusConfig(),
    chain: CompensationChain = CAMPAIGN_CHAIN,
    swath_fraction: float = 0.5,
    seed: int = 0,
    chip_size: int = DEFAULT_CHIP_SIZE,
    oversample: int = DEFAULT_OVERSAMPLE,
    threads: Optional[int] = None,
) -> CampaignResult:
    """
    Simulate one reflector per scene across the swath and measure each

    Every scene shares the nominal plan; pointing error, gain drift and the
    reflector rcs error are drawn per scene from the budget, and the chirp
    droop of the budget is applied to all of them. Processing only knows the
    nominal plan and the surveyed rcs.

    Args:
        plan: Nominal collection plan
        count: Number of reflectors
        rcs: Surveyed reflector rcs (m^2)
        budget: One-sigma perturbations
        cfg: Focusing configuration (UNIFORM range window for SLC products)
        chain: Compensations applied before SLC formation
        swath_fraction: Fraction of the -3 dB elevation beam covered
        seed: Seed of the perturbation draws
        chip_size: IRF chip edge in pixels
        oversample: IRF oversampling factor
        threads: Worker threads for simulation and focusing

    Returns:
        CampaignResult with one chip and IRF report per reflector
    """
    ranges = reflector_ranges(plan, count, swath_fraction)
    draws = budget.draw(np.random.default_rng(seed), count)
    ref = scene_reference(plan)
    geom = plan.geom
    plane = CrossTrackPlane(ref.state, geom.look_side, geom.orbit.ellipsoid, geom.scene_height)
    chirp = replace(plan.chirp, droop_db=budget.chirp_droop_db) if budget.chirp_droop_db else plan.chirp
    result = CampaignResult(perturbations=draws)

    logger.info(f"Reflector campaign: {count} scenes over {ranges.min() / 1e3:.1f}-{ranges.max() / 1e3:.1f} km")
    for i, rng in enumerate(ranges):
        name = f"CR{i + 1:02d}"
        psi = plane.psi_for_range(rng)
        position = ref.state.position + rng * plane.direction(psi)[0]
        actual_rcs = rcs * 10.0 ** (draws["rcs_error_db"][i] / 10.0)
        antenna = replace(plan.antenna, pointing_error=plan.antenna.pointing_error + draws["pointing_error"][i])
        scene_plan = replace(
            plan,
            chirp=chirp,
            antenna=antenna,
            gain_offset_db=plan.gain_offset_db + draws["gain_offset_db"][i],
            seed=plan.seed + i,
            range_window=None,
        )
        raw = simulate_raw([PointTarget(position, actual_rcs, name=name)], scene_plan, threads=threads)
        img = apply_compensations(focus(raw, cfg, threads=threads), chain, plan)
        slc = form_slc(img)
        peak = np.unravel_index(int(np.argmax(np.abs(slc.pixels))), slc.pixels.shape)
        chip = extract_irf(slc, (int(peak[0]), int(peak[1])), chip_size, oversample, name)
        result.chips.append(chip)
        result.true_rcs.append(rcs)
        result.reports.append(measure_irf(chip))
        result.slant_ranges.append(float(rng))
        logger.debug(f"{name}: R={rng:.1f} m, rcs error {draws['rcs_error_db'][i]:+.2f} dB")
    return result
