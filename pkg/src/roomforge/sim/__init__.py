"""Quasi-static settling simulation and composite placement tools."""

from .composites import (
    CompositeConfig,
    CompositeResult,
    container_interior_hull,
    create_arrangement,
    create_pile,
    create_stack,
    fill_container,
    surface_slab,
)
from .engine import BodyOutcome, SettleReport, SimBody, SimConfig, settle

__all__ = [
    "BodyOutcome",
    "CompositeConfig",
    "CompositeResult",
    "SettleReport",
    "SimBody",
    "SimConfig",
    "container_interior_hull",
    "create_arrangement",
    "create_pile",
    "create_stack",
    "fill_container",
    "settle",
    "surface_slab",
]
