import logging
from typing import Optional, Tuple, Union

import mesa
import numpy as np
import pandas as pd

from . import mappings
from .analytic import DEFAULT_NODES
from .criteria import (BOUNDARY_POINTS, DEFAULT_N_R, DEFAULT_N_THETA, DEFAULT_TOLERANCE, DiskGrid,
                       check_css_univalence, check_dilatation_equal, check_injectivity_boundary,
                       check_local_univalence, check_rotational_symmetry)
from .errors import DilatationMismatchError
from .lift import lift_family
from .mappings import Family, FamilySpec, HarmonicMap, catalog, combine, family_for, family_spec
from .surface import laplacian_residual, mean_curvature_estimate

ISO_RATIO_LIMIT = 1e-9
CURVATURE_LIMIT = 1e-6
LAPLACIAN_LIMIT = 1e-5
INTERIOR_FRACTION = 0.9


class MemberAgent(mesa.Agent):
    """
    One member f_s = (1-s) f_a + s f_b of a deformation family. Once the model
    has lifted it, the agent verifies the member and its mesh.

    Attributes:
        unique_id (int): Position of s in the schedule.
        model (FamilySweep): The sweep this member belongs to.
        s (float): Combination parameter in [0, 1].
        harmonic_map (HarmonicMap): The combined map.
        mesh (SurfaceMesh): The lifted mesh, set by the model before the agent steps.
        reports (list): CriterionReports produced by the last step.
    """

    def __init__(self, unique_id, model, s, harmonic_map):
        super().__init__(unique_id, model)
        self.s = s
        self.harmonic_map = harmonic_map
        self.mesh = None
        self.reports = []
        self.verified = False
        self.min_jacobian = None
        self.css_min = None
        self.symmetry_error = None
        self.crossings = None
        self.max_iso_ratio = None
        self.max_curvature = None
        self.max_laplacian = None

    @property
    def name(self):
        return self.harmonic_map.name

    @property
    def minimality_passed(self):
        return (self.max_iso_ratio <= ISO_RATIO_LIMIT and self.max_curvature <= CURVATURE_LIMIT
                and self.max_laplacian <= LAPLACIAN_LIMIT)

    @property
    def passed(self):
        return self.verified and all(report.passed for report in self.reports) and self.minimality_passed

    def interior_samples(self):
        """Uniform random points of the disk of radius INTERIOR_FRACTION * grid radius."""
        radius = INTERIOR_FRACTION * self.model.grid.r_max
        n = self.model.samples
        r = radius * np.sqrt(self.model.random.random(n))
        theta = 2.0 * np.pi * self.model.random.random(n)
        return r * np.exp(1j * theta)

    def step(self):
        """
        Verify the member: local univalence on the grid, the shear certificate if
        the family is convex in the imaginary direction, k-fold symmetry if the
        family has it, a simple boundary image, and minimality of the lift
        (isothermality on the mesh, |H| and the Laplacian at random interior points).
        """
        f, grid, tolerance = self.harmonic_map, self.model.grid, self.model.tolerance
        self.reports = [check_local_univalence(f, grid, tolerance)]
        self.min_jacobian = self.reports[0].min_value
        if self.model.family.convex:
            css = check_css_univalence(f, np.pi / 2, grid, tolerance)
            self.reports.append(css)
            self.css_min = css.min_value
        if self.model.family.symmetry > 1:
            symmetry = check_rotational_symmetry(f, self.model.family.symmetry, grid)
            self.reports.append(symmetry)
            self.symmetry_error = -symmetry.min_value
        boundary = check_injectivity_boundary(f, INTERIOR_FRACTION * grid.r_max, self.model.boundary_points)
        self.reports.append(boundary)
        self.crossings = boundary.parameters["crossings"]

        inside = self.mesh.radius_mask(INTERIOR_FRACTION)
        self.max_iso_ratio = float(np.max(self.mesh.iso_ratio()[inside]))
        samples = self.interior_samples()
        if len(samples):
            self.max_curvature = float(np.max(mean_curvature_estimate(f, samples)))
            self.max_laplacian = float(np.max(laplacian_residual(f, samples, nodes=self.model.nodes)))
        else:
            self.max_curvature = self.max_laplacian = 0.0
        self.verified = True
        if self.passed:
            logging.debug(f"member s = {self.s:g} of {self.model.family.name} passed.")
        else:
            failed = [report.criterion for report in self.reports if not report.passed]
            if not self.minimality_passed:
                failed.append("minimality")
            logging.info(f"member s = {self.s:g} of {self.model.family.name} failed {', '.join(failed)}.")

    def to_dict(self):
        return {
            "s": self.s,
            "map": self.name,
            "passed": self.passed,
            "reports": [report.to_dict() for report in self.reports],
            "max_iso_ratio": self.max_iso_ratio,
            "max_H": self.max_curvature,
            "max_laplacian": self.max_laplacian,
        }


class FamilySweep(mesa.Model):
    """
    Lift and verify every member of a deformation family. The keyword
    parameters are what `mesa.batch_run` sweeps; one step does all the work.
    `endpoints` overrides the catalog maps named by the family.
    """

    def __init__(self,
                 family: Union[str, Family] = "enneper-scherk",
                 steps=6,
                 n_r=DEFAULT_N_R,
                 n_theta=DEFAULT_N_THETA,
                 r_max=None,
                 nodes=DEFAULT_NODES,
                 tolerance=DEFAULT_TOLERANCE,
                 samples=50,
                 boundary_points=BOUNDARY_POINTS,
                 seed=None,
                 threads=None,
                 endpoints: Optional[Tuple[HarmonicMap, HarmonicMap]] = None
                 ):
        super().__init__()
        self.family = family if isinstance(family, Family) else mappings.family(family)
        if endpoints is None:
            self.spec = family_spec(self.family, steps)
        else:
            self.spec = FamilySpec.evenly(*endpoints, steps, self.family.name)
        self.grid = DiskGrid(n_r, n_theta, r_max if r_max is not None else self.family.grid_r_max)
        self.nodes = nodes
        self.tolerance = tolerance
        self.samples = samples
        self.boundary_points = boundary_points
        self.threads = threads
        self.meshes = []

        self.random = np.random.default_rng(seed)
        self.schedule = mesa.time.BaseScheduler(self)
        self.datacollector = mesa.DataCollector(
            model_reporters={
                "all_passed": "all_passed",
                "min_jacobian": "min_jacobian",
                "max_iso_ratio": "max_iso_ratio",
                "max_H": "max_curvature",
                "max_laplacian": "max_laplacian",
            },
            agent_reporters={
                "s": "s",
                "passed": "passed",
                "min_jacobian": "min_jacobian",
                "css_min": "css_min",
                "symmetry_error": "symmetry_error",
                "crossings": "crossings",
                "max_iso_ratio": "max_iso_ratio",
                "max_H": "max_curvature",
                "max_laplacian": "max_laplacian",
            },
        )

        a, b = self.spec.endpoint_a, self.spec.endpoint_b
        if not check_dilatation_equal(a, b):
            raise DilatationMismatchError(f"{a.name} and {b.name} have different dilatations")
        for index, s in enumerate(self.spec.parameters):
            self.schedule.add(MemberAgent(index, self, s, combine(a, b, s, check=False)))
        logging.debug(f"sweep of {self.family.name} with {steps} members on grid {self.grid.as_tuple()}.")

    @property
    def members(self):
        return list(self.schedule.agents)

    def _verified(self):
        return [agent for agent in self.members if agent.verified]

    @property
    def all_passed(self):
        verified = self._verified()
        return bool(verified) and len(verified) == len(self.members) and all(a.passed for a in verified)

    @property
    def min_jacobian(self):
        return min((a.min_jacobian for a in self._verified()), default=None)

    @property
    def max_iso_ratio(self):
        return max((a.max_iso_ratio for a in self._verified()), default=None)

    @property
    def max_curvature(self):
        return max((a.max_curvature for a in self._verified()), default=None)

    @property
    def max_laplacian(self):
        return max((a.max_laplacian for a in self._verified()), default=None)

    def step(self):
        self.meshes = lift_family(self.spec, self.grid, self.nodes, self.threads)
        for agent, (_, mesh) in zip(self.members, self.meshes):
            agent.mesh = mesh
        self.schedule.step()
        self.datacollector.collect(self)
        self.running = False
        logging.info(f"sweep of {self.family.name}: {'all members pass' if self.all_passed else 'FAILED'}.")

    def table(self) -> pd.DataFrame:
        """One row per member, from the agent reporters."""
        frame = self.datacollector.get_agent_vars_dataframe()
        if frame.empty:
            return frame
        return frame.xs(frame.index.get_level_values("Step").max(), level="Step")

    def summary(self) -> dict:
        return {
            "family": self.family.name,
            "endpoints": [self.family.endpoint_a, self.family.endpoint_b],
            "grid": list(self.grid.as_tuple()),
            "nodes": self.nodes,
            "tolerance": self.tolerance,
            "schedule": list(self.spec.parameters),
            "all_passed": self.all_passed,
            "members": [agent.to_dict() for agent in self.members],
        }


def run_sweep(endpoint_a: str, endpoint_b: str, **kwargs) -> FamilySweep:
    """Build and run the sweep between two catalog entries."""
    catalog(endpoint_a)
    catalog(endpoint_b)
    model = FamilySweep(family=family_for(endpoint_a, endpoint_b), **kwargs)
    model.step()
    return model
