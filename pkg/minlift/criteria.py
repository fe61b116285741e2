"""
Grid-evaluated sufficient conditions for univalence and directional convexity.

Every check samples a condition on a polar `DiskGrid` and reduces it to a
`CriterionReport` holding the minimum, the grid point where it is attained
(ties go to the smallest grid index) and the verdict against a tolerance.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from shapely.geometry import LinearRing

from .analytic import DEFAULT_R_MAX, AnalyticExpr, eval_d, unit
from .errors import DegenerateCurveError, DomainError
from .mappings import HarmonicMap, dilatation, eval_map, shear

DEFAULT_TOLERANCE = 1e-10
SYMMETRY_TOLERANCE = 1e-12
DEFAULT_N_R = 100
DEFAULT_N_THETA = 256
DEFAULT_GRID_R_MAX = 0.95
ALPHA_SEARCH = 64
BOUNDARY_POINTS = 2000
COINCIDENCE = 1e-14
DIRECTION_TOLERANCE = 1e-4


@dataclass(frozen=True)
class DiskGrid:
    """
    Polar lattice z = (j/n_r) r_max e^{2 pi i k/n_theta}, j = 1..n_r,
    k = 0..n_theta-1, preceded by the origin (index 0). Ring j, angle k sits at
    index 1 + (j-1) n_theta + k. Doubling n_r and n_theta yields a superset.
    """

    n_r: int = DEFAULT_N_R
    n_theta: int = DEFAULT_N_THETA
    r_max: float = DEFAULT_GRID_R_MAX

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError(f"grid needs n_r >= 1 and n_theta >= 1, got ({self.n_r}, {self.n_theta})")
        if not 0.0 < self.r_max < 1.0:
            raise ValueError(f"grid radius must lie in (0, 1), got {self.r_max}")

    @cached_property
    def points(self) -> np.ndarray:
        radii = self.r_max * (np.arange(1, self.n_r + 1) / self.n_r)
        angles = 2.0 * np.pi * (np.arange(self.n_theta) / self.n_theta)
        ring = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        points = np.concatenate([[0j], ring])
        points.setflags(write=False)
        return points

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta + 1

    def index(self, j: int, k: int) -> int:
        if j == 0:
            return 0
        return 1 + (j - 1) * self.n_theta + k % self.n_theta

    def as_tuple(self):
        return (self.n_r, self.n_theta, self.r_max)


def default_grid(r_max: float = DEFAULT_R_MAX, n_r: int = DEFAULT_N_R,
                 n_theta: int = DEFAULT_N_THETA) -> DiskGrid:
    """The default lattice for a map valid on |z| < r_max: radius 0.95, or 0.94 for r_max = 0.95."""
    return DiskGrid(n_r, n_theta, round(min(DEFAULT_GRID_R_MAX, r_max - 0.01), 6))


def precondition_grid(a: HarmonicMap, b: HarmonicMap) -> DiskGrid:
    # 201 points, well inside both disks
    return DiskGrid(10, 20, 0.95 * min(a.r_max, b.r_max))


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    grid: Optional[tuple]
    min_value: float
    argmin: complex
    tolerance: float
    passed: bool
    parameters: dict = field(default_factory=dict)

    @property
    def strict(self) -> bool:
        return self.min_value > 0.0

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "grid": list(self.grid) if self.grid is not None else None,
            "min_value": self.min_value,
            "argmin": [float(self.argmin.real), float(self.argmin.imag)],
            "tolerance": self.tolerance,
            "passed": self.passed,
            "strict": self.strict,
            "parameters": self.parameters,
        }


def _reduce(criterion, grid, points, values, tolerance, parameters, positive=False):
    index = int(np.argmin(values))
    min_value = float(values[index])
    passed = min_value > tolerance if positive else min_value >= -tolerance
    logging.debug(f"{criterion} {parameters}: min {min_value:.6g} at {complex(points[index]):.6g}, "
                  f"{'pass' if passed else 'FAIL'}")
    return CriterionReport(criterion, grid.as_tuple(), min_value, complex(points[index]),
                           tolerance, passed, dict(parameters))


def _derivative(phi, points, r_max):
    return eval_d(phi, points, 1, r_max)[1]


def jacobian_values(f: HarmonicMap, z):
    """|h'|^2 - |g'|^2, the Jacobian of f = h + conj(g)."""
    _, dh = eval_d(f.h, z, 1, f.r_max)
    _, dg = eval_d(f.g, z, 1, f.r_max)
    return np.abs(dh) ** 2 - np.abs(dg) ** 2


def hs_values(phi: AnalyticExpr, z, r_max: float = DEFAULT_R_MAX):
    """Re{(1 - z^2) phi'(z)}."""
    z = np.asarray(z, dtype=complex)
    return ((1.0 - z * z) * _derivative(phi, z, r_max)).real


def koepf_values(phi: AnalyticExpr, beta: float, alpha: float, z, r_max: float = DEFAULT_R_MAX,
                 dphi=None):
    """Re{phi'(z) (1 + z e^{i(alpha+beta)}) (1 + z e^{-i(alpha-beta)})}."""
    z = np.asarray(z, dtype=complex)
    if dphi is None:
        dphi = _derivative(phi, z, r_max)
    return (dphi * (1.0 + z * unit(alpha + beta)) * (1.0 + z * unit(beta - alpha))).real


def taylor_values(phi: AnalyticExpr, beta: float, alpha: float, z, r_max: float = DEFAULT_R_MAX,
                  dphi=None):
    """[cos a + cos(b + g)] [Re phi' cos(b + g) - Im phi' sin(b + g)] at z = r e^{i g}."""
    z = np.asarray(z, dtype=complex)
    if dphi is None:
        dphi = _derivative(phi, z, r_max)
    theta = beta + np.angle(z)
    return (np.cos(alpha) + np.cos(theta)) * (dphi.real * np.cos(theta) - dphi.imag * np.sin(theta))


def check_local_univalence(f: HarmonicMap, grid: DiskGrid = None,
                           tolerance: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Lewy: f is sense-preserving and locally univalent where |h'| > |g'|; passes iff min J > tolerance."""
    grid = grid or default_grid(f.r_max)
    values = jacobian_values(f, grid.points)
    return _reduce("local-univalence", grid, grid.points, values, tolerance,
                   {"map": f.name}, positive=True)


def check_hs(phi: AnalyticExpr, grid: DiskGrid = None, tolerance: float = DEFAULT_TOLERANCE,
             r_max: float = DEFAULT_R_MAX) -> CriterionReport:
    """Hengartner-Schober: Re{(1 - z^2) phi'} >= 0 certifies convexity in the imaginary direction."""
    grid = grid or default_grid(r_max)
    values = hs_values(phi, grid.points, r_max)
    return _reduce("hs", grid, grid.points, values, tolerance, {"phi": str(phi)})


def check_koepf(phi: AnalyticExpr, beta: float, alpha: float, grid: DiskGrid = None,
                tolerance: float = DEFAULT_TOLERANCE, r_max: float = DEFAULT_R_MAX) -> CriterionReport:
    grid = grid or default_grid(r_max)
    values = koepf_values(phi, beta, alpha, grid.points, r_max)
    return _reduce("koepf", grid, grid.points, values, tolerance,
                   {"phi": str(phi), "beta": beta, "alpha": alpha})


def check_taylor(phi: AnalyticExpr, beta: float, alpha: float, grid: DiskGrid = None,
                 tolerance: float = DEFAULT_TOLERANCE, r_max: float = DEFAULT_R_MAX) -> CriterionReport:
    # the final inequality as displayed, without the radial factors of its derivation
    grid = grid or default_grid(r_max)
    values = taylor_values(phi, beta, alpha, grid.points, r_max)
    return _reduce("taylor", grid, grid.points, values, tolerance,
                   {"phi": str(phi), "beta": beta, "alpha": alpha})


_CONDITIONS = {"koepf": koepf_values, "taylor": taylor_values}


def search_alpha(phi: AnalyticExpr, beta: float, grid: DiskGrid = None, condition: str = "koepf",
                 n_alpha: int = ALPHA_SEARCH, tolerance: float = DEFAULT_TOLERANCE,
                 r_max: float = DEFAULT_R_MAX) -> CriterionReport:
    """
    Evaluate the Koepf (or Taylor) condition for alpha = 2 pi k / n_alpha and
    report the alpha whose grid minimum is largest (first one on ties).
    """
    if condition not in _CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    grid = grid or default_grid(r_max)
    points = grid.points
    dphi = _derivative(phi, points, r_max)
    best_alpha, best_values, best_min = None, None, -np.inf
    for k in range(n_alpha):
        alpha = 2.0 * np.pi * k / n_alpha
        values = _CONDITIONS[condition](phi, beta, alpha, points, r_max, dphi=dphi)
        current = float(np.min(values))
        if current > best_min:
            best_alpha, best_values, best_min = alpha, values, current
    return _reduce(condition, grid, points, best_values, tolerance,
                   {"phi": str(phi), "beta": beta, "alpha": best_alpha, "alpha_search": n_alpha})


def _is_imaginary_direction(beta: float) -> bool:
    return abs(unit(2.0 * beta) + 1.0) < DIRECTION_TOLERANCE


def check_css_univalence(f: HarmonicMap, beta: float = np.pi / 2, grid: DiskGrid = None,
                         tolerance: float = DEFAULT_TOLERANCE, convention: str = "css") -> CriterionReport:
    """
    Clunie-Sheil-Small: f is univalent onto a domain convex in the e^{i beta}
    direction if it is locally univalent and its shear is convex in that
    direction. The shear is certified by Hengartner-Schober for the imaginary
    direction and by the alpha-searched Koepf condition otherwise.
    """
    grid = grid or default_grid(f.r_max)
    local = check_local_univalence(f, grid, tolerance)
    phi = shear(f, beta, convention)
    if _is_imaginary_direction(beta):
        sub = check_hs(phi, grid, tolerance, f.r_max)
    else:
        sub = search_alpha(phi, beta, grid, "koepf", tolerance=tolerance, r_max=f.r_max)
    weaker = min((local, sub), key=lambda report: report.min_value)
    parameters = {"map": f.name, "beta": beta, "convention": convention,
                  "local-univalence": local.min_value, sub.criterion: sub.min_value}
    if "alpha" in sub.parameters:
        parameters["alpha"] = sub.parameters["alpha"]
    passed = local.passed and sub.passed
    logging.debug(f"CSS certificate for {f.name} at beta = {beta:.6g}: {'pass' if passed else 'FAIL'}")
    return CriterionReport("css-univalence", grid.as_tuple(), weaker.min_value, weaker.argmin,
                           tolerance, passed, parameters)


def dilatation_report(a: HarmonicMap, b: HarmonicMap, grid: DiskGrid = None,
                      tol: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """max |omega_a - omega_b| on the grid, reported as min_value = -max."""
    grid = grid or precondition_grid(a, b)
    difference = np.abs(dilatation(a, grid.points) - dilatation(b, grid.points))
    return _reduce("dilatation-equal", grid, grid.points, -difference, tol,
                   {"maps": [a.name, b.name]})


def check_dilatation_equal(a: HarmonicMap, b: HarmonicMap, grid: DiskGrid = None,
                           tol: float = DEFAULT_TOLERANCE) -> bool:
    return dilatation_report(a, b, grid, tol).passed


def check_rotational_symmetry(f: HarmonicMap, k: int, grid: DiskGrid = None,
                              tolerance: float = SYMMETRY_TOLERANCE) -> CriterionReport:
    """max over j = 1..k-1 of |e^{2 pi i j/k} f(z e^{-2 pi i j/k}) - f(z)|, reported as -max."""
    if k < 1:
        raise ValueError(f"symmetry order must be at least 1, got {k}")
    grid = grid or default_grid(f.r_max)
    points = grid.points
    base = eval_map(f, points)
    errors = np.zeros(points.shape)
    for j in range(1, k):
        rho = unit(2.0 * np.pi * j / k)
        errors = np.maximum(errors, np.abs(rho * eval_map(f, points * np.conj(rho)) - base))
    return _reduce("symmetry", grid, points, -errors, tolerance, {"map": f.name, "k": k})


def _signs(values, eps):
    return np.where(np.abs(values) <= eps, 0, np.sign(values))


def _within(a, b, c, eps):
    # c inside the bounding box of segment ab
    return np.all((np.minimum(a, b) - eps <= c) & (c <= np.maximum(a, b) + eps), axis=-1)


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def count_crossings(w: np.ndarray, chunk: int = 256):
    """
    Pairwise test of the closed polyline through `w` (complex samples) for
    intersections between non-adjacent segments, collinear overlaps included.
    Returns the number of intersecting pairs and the first segment index involved.
    """
    p = np.column_stack([w.real, w.imag])
    q = np.roll(p, -1, axis=0)
    n = len(p)
    scale = float(np.max(np.ptp(p, axis=0))) or 1.0
    eps_area, eps_len = 1e-12 * scale * scale, 1e-12 * scale
    count, first = 0, None
    j = np.arange(n)[None, :]
    for start in range(0, n, chunk):
        i = np.arange(start, min(start + chunk, n))[:, None]
        mask = (j > i + 1) & ~((i == 0) & (j == n - 1))
        a, b = p[i[:, 0]][:, None, :], q[i[:, 0]][:, None, :]
        c, d = p[None, :, :], q[None, :, :]
        o1 = _signs(_cross(b - a, c - a), eps_area)
        o2 = _signs(_cross(b - a, d - a), eps_area)
        o3 = _signs(_cross(d - c, a - c), eps_area)
        o4 = _signs(_cross(d - c, b - c), eps_area)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        hit |= (o1 == 0) & _within(a, b, c, eps_len)
        hit |= (o2 == 0) & _within(a, b, d, eps_len)
        hit |= (o3 == 0) & _within(c, d, a, eps_len)
        hit |= (o4 == 0) & _within(c, d, b, eps_len)
        hit &= mask
        found = int(np.count_nonzero(hit))
        if found and first is None:
            first = int(start + np.argwhere(hit)[0][0])
        count += found
    return count, first


def check_injectivity_boundary(f: HarmonicMap, r: float, n: int = BOUNDARY_POINTS) -> CriterionReport:
    """
    Sample the image curve f(r e^{2 pi i k/n}) and test the closed polyline for
    self-intersection. Together with a positive Jacobian inside, a simple
    boundary image is numeric evidence that f is univalent on |z| <= r.
    """
    if n < 16:
        raise ValueError(f"boundary sampling needs at least 16 points, got {n}")
    if not 0.0 < r < f.r_max:
        raise DomainError(f"boundary radius {r} must lie in (0, {f.r_max})")
    samples = r * np.exp(2j * np.pi * (np.arange(n) / n))
    w = eval_map(f, samples)
    gaps = np.abs(np.roll(w, -1) - w)
    if np.any(gaps < COINCIDENCE):
        k = int(np.argmin(gaps))
        raise DegenerateCurveError(f"samples {k} and {(k + 1) % n} of {f.name} coincide at r = {r}")
    crossings, first = count_crossings(w)
    simple = crossings == 0
    shapely_simple = bool(LinearRing(np.column_stack([w.real, w.imag])).is_simple)
    if shapely_simple != simple:
        logging.warning(f"Boundary of {f.name} at r = {r}: segment test says "
                        f"{'simple' if simple else 'crossing'}, shapely says "
                        f"{'simple' if shapely_simple else 'crossing'}")
    argmin = complex(samples[first if first is not None else 0])
    logging.debug(f"Boundary of {f.name} at r = {r} with {n} samples: {crossings} crossing pairs")
    return CriterionReport("injectivity-boundary", (1, n, r), -float(crossings), argmin, 0.0, simple,
                           {"map": f.name, "r": r, "n": n, "crossings": crossings,
                            "shapely_simple": shapely_simple})


@dataclass(frozen=True)
class PrimeEndScan:
    """Where Re{phi} attains its sup and inf on circles |z| = r approaching r_max."""

    radii: tuple
    sup_angles: tuple
    inf_angles: tuple
    sup_values: tuple
    inf_values: tuple
    sup_near_plus_one: bool
    inf_near_minus_one: bool

    def to_dict(self) -> dict:
        return {name: (list(value) if isinstance(value, tuple) else value)
                for name, value in self.__dict__.items()}


def _wrap(angle):
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def scan_prime_ends(phi: AnalyticExpr, r_max: float = DEFAULT_GRID_R_MAX, n_rings: int = 5,
                    n_theta: int = 720, angular_tolerance: float = 0.05,
                    eval_r_max: float = DEFAULT_R_MAX) -> PrimeEndScan:
    """
    Diagnostic for the normalization that Re{phi} tends to its sup near z = 1
    and to its inf near z = -1. It never gates a verdict.
    """
    radii = r_max * np.linspace(0.5, 1.0, n_rings)
    angles = 2.0 * np.pi * (np.arange(n_theta) / n_theta)
    sup_angles, inf_angles, sup_values, inf_values = [], [], [], []
    for r in radii:
        values = eval_d(phi, r * np.exp(1j * angles), 0, eval_r_max)[0].real
        sup_angles.append(float(_wrap(angles[int(np.argmax(values))])))
        inf_angles.append(float(_wrap(angles[int(np.argmin(values))])))
        sup_values.append(float(np.max(values)))
        inf_values.append(float(np.min(values)))
    return PrimeEndScan(tuple(float(r) for r in radii), tuple(sup_angles), tuple(inf_angles),
                        tuple(sup_values), tuple(inf_values),
                        bool(abs(sup_angles[-1]) <= angular_tolerance),
                        bool(abs(_wrap(inf_angles[-1] - np.pi)) <= angular_tolerance))
