"""Conformal geometry of spacelike surfaces in the projectivized light
cone of R^{4,2}: frames, invariants, Willmore functionals, polar and
adjoint transforms."""

from .ambient import (ETA, SIGNS, Motion, ProjectivePoint, apply_motion,
                      inner, projective_distance)
from .analysis import (EnergyResult, ResidualReport, check_integrability,
                       check_structure, gauss_metric_check,
                       harmonicity_residual, homogeneous_torus_energy,
                       omega_value, swillmore_residual, theta_holomorphy,
                       willmore_energy, willmore_residual)
from .charts import (CATALOG, SurfaceChart, catalog_chart, moved_chart,
                     sample_grid, scaled_chart, validate_chart)
from .dsl import chart_from_source
from .errors import LightconeError
from .frames import (FrameData, InvariantSet, canonical_lift, classify_point,
                     frame_and_invariants, frame_at, invariants,
                     invariants_at)
from .jets import Jet2, JetVec6, seed_point
from .transforms import (TransformedSurface, adjoint_left, adjoint_right,
                         apply_chain, duality_report, full_second_envelope,
                         inverse_check, polar_left, polar_right)

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "ETA", "EnergyResult", "FrameData", "InvariantSet", "Jet2",
    "JetVec6", "LightconeError", "Motion", "ProjectivePoint",
    "ResidualReport", "SIGNS", "SurfaceChart", "TransformedSurface",
    "adjoint_left", "adjoint_right", "apply_chain", "apply_motion",
    "canonical_lift", "catalog_chart", "chart_from_source",
    "check_integrability", "check_structure", "classify_point",
    "duality_report", "frame_and_invariants", "frame_at",
    "full_second_envelope", "gauss_metric_check", "harmonicity_residual",
    "homogeneous_torus_energy", "inner", "invariants", "invariants_at",
    "inverse_check", "moved_chart", "omega_value", "polar_left",
    "polar_right", "projective_distance", "sample_grid", "scaled_chart",
    "seed_point", "swillmore_residual", "theta_holomorphy",
    "validate_chart", "willmore_energy", "willmore_residual",
]
