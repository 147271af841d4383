"""Household data model, CSV ingestion and synthetic generation."""

from .ampds import load_ampds2_csv, read_mapping
from .model import RESOURCES, Appliance, Household, synthesize_metered
from .synthetic import (ApplianceSpec, BaseSpec, PulseTrain, SyntheticSpec,
                        default_spec, generate_synthetic_day)

__all__ = [
    "RESOURCES", "Appliance", "Household", "synthesize_metered",
    "load_ampds2_csv", "read_mapping",
    "ApplianceSpec", "BaseSpec", "PulseTrain", "SyntheticSpec",
    "default_spec", "generate_synthetic_day",
]
