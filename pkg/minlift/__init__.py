"""Harmonic shears of the unit disk and their Weierstrass-Enneper lifts to minimal surfaces."""
from .analytic import AnalyticExpr, eval_d, integrate_path, integrate_radial, integrate_segment
from .criteria import CriterionReport, DiskGrid
from .errors import (DegenerateCurveError, DilatationMismatchError, DomainError, MeshIOError,
                     MinliftError, PoleError, UnknownNameError)
from .lift import SurfacePoint, closed_form_oracle, lift_family, lift_point
from .mappings import FAMILIES, FamilySpec, HarmonicMap, catalog, combine, dilatation, from_pq, shear
from .surface import SurfaceMesh, build_mesh, export, load_mesh_json
