"""Placement style selection and Gaussian placement noise.

Agents (and scripts) pick implausibly round coordinates; adding small
zero-mean jitter at placement time makes arrangements look lived-in. The
per-category standard deviations below are the calibrated defaults for
the two styles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry.poses import Pose2

NATURAL_KEYWORDS = ("lived-in", "cozy", "casual")
PERFECT_KEYWORDS = ("pristine", "showroom", "gallery")


@dataclass(frozen=True)
class NoiseCell:
    position: float  # Std dev in meters (per axis where applicable).
    rotation: float  # Std dev in degrees.


@dataclass(frozen=True)
class WallNoiseCell:
    along: float  # Std dev along the wall, meters.
    height: float  # Std dev vertically, meters.
    rotation: float  # Degrees.


# Calibrated noise table: (category, style) -> standard deviations.
NOISE_PROFILES: dict[str, dict[str, NoiseCell | WallNoiseCell]] = {
    "furniture": {
        "natural": NoiseCell(position=0.03, rotation=1.0),
        "perfect": NoiseCell(position=0.001, rotation=0.1),
    },
    "wall": {
        "natural": WallNoiseCell(along=0.02, height=0.01, rotation=0.5),
        "perfect": WallNoiseCell(along=0.001, height=0.001, rotation=0.1),
    },
    "ceiling": {
        "natural": NoiseCell(position=0.02, rotation=0.5),
        "perfect": NoiseCell(position=0.001, rotation=0.1),
    },
    "manipuland": {
        "natural": NoiseCell(position=0.01, rotation=3.0),
        "perfect": NoiseCell(position=0.001, rotation=0.1),
    },
}


def select_style(prompt_text: str) -> str:
    """Choose natural or perfect placement from prompt keywords.

    Matching is case-insensitive substring search; natural wins conflicts
    and is the default when nothing matches.
    """
    lowered = prompt_text.lower()
    natural = any(k in lowered for k in NATURAL_KEYWORDS)
    perfect = any(k in lowered for k in PERFECT_KEYWORDS)
    if natural:
        return "natural"
    if perfect:
        return "perfect"
    return "natural"


def apply_noise(pose: Pose2, category: str, style: str, rng: np.random.Generator) -> Pose2:
    """Jitter a planar pose with the category/style noise profile.

    Wall placements read (x, y) as (along-wall, height) and use their own
    anisotropic deviations.

    Raises:
        KeyError: Unknown category or style.
    """
    if category not in NOISE_PROFILES:
        raise KeyError(f"unknown noise category {category!r}")
    if style not in NOISE_PROFILES[category]:
        raise KeyError(f"unknown placement style {style!r}")
    cell = NOISE_PROFILES[category][style]
    if isinstance(cell, WallNoiseCell):
        dx = rng.normal(0.0, cell.along)
        dy = rng.normal(0.0, cell.height)
        dtheta = rng.normal(0.0, cell.rotation)
    else:
        dx = rng.normal(0.0, cell.position)
        dy = rng.normal(0.0, cell.position)
        dtheta = rng.normal(0.0, cell.rotation)
    return Pose2(pose.x + dx, pose.y + dy, pose.theta + dtheta)
