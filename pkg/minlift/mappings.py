import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .analytic import (DEFAULT_NODES, DEFAULT_R_MAX, POLE_GUARD, AnalyticExpr, AtanhLog,
                       RadialIntegral, Scaled, Sum, Variable, eval_d, from_json, square_label,
                       unit)
from .errors import DilatationMismatchError, PoleError, UnknownNameError

FOUR_FOLD_R_MAX = 0.95


@dataclass(frozen=True)
class HarmonicMap:
    """
    A sense-preserving harmonic map f = h + conj(g) on the disk |z| < r_max.

    Attributes:
        name (str): Catalog label, or a description of how the map was built.
        h (AnalyticExpr): Analytic part, normalized so that h(0) = 0.
        g (AnalyticExpr): Co-analytic part, normalized so that g(0) = 0.
        q (AnalyticExpr): Analytic square root of the dilatation, g'/h' = q**2.
            It fixes the branch of sqrt(h'g') = h'q used by the minimal-surface lift.
        r_max (float): Radius of the disk on which h, g and q are evaluated.
    """

    name: str
    h: AnalyticExpr
    g: AnalyticExpr
    q: AnalyticExpr
    r_max: float = DEFAULT_R_MAX

    def __post_init__(self):
        if not 0.0 < self.r_max <= 1.0:
            raise ValueError(f"r_max must lie in (0, 1], got {self.r_max}")

    @property
    def omega_label(self) -> str:
        return square_label(self.q)

    def to_json(self) -> dict:
        return {"name": self.name, "r_max": self.r_max,
                "h": self.h.to_json(), "g": self.g.to_json(), "q": self.q.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "HarmonicMap":
        return cls(name=data["name"], h=from_json(data["h"]), g=from_json(data["g"]),
                   q=from_json(data["q"]), r_max=float(data["r_max"]))


@dataclass(frozen=True)
class FamilySpec:
    """Two endpoints and the schedule of s values of f_s = (1-s) f_a + s f_b."""

    endpoint_a: HarmonicMap
    endpoint_b: HarmonicMap
    parameters: Tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        parameters = tuple(float(s) for s in self.parameters)
        if not parameters:
            raise ValueError("a family needs at least one parameter value")
        if any(s < 0.0 or s > 1.0 for s in parameters):
            raise ValueError(f"family parameters must lie in [0, 1], got {parameters}")
        if any(b < a for a, b in zip(parameters, parameters[1:])):
            raise ValueError(f"family parameters must be sorted, got {parameters}")
        object.__setattr__(self, "parameters", parameters)
        if not self.name:
            object.__setattr__(self, "name", f"{self.endpoint_a.name}-{self.endpoint_b.name}")

    @classmethod
    def evenly(cls, endpoint_a, endpoint_b, steps, name=""):
        """`steps` equal increments from s = 0 to s = 1 inclusive."""
        if steps < 2:
            raise ValueError(f"a sweep needs at least 2 steps, got {steps}")
        return cls(endpoint_a, endpoint_b, tuple(i / (steps - 1) for i in range(steps)), name)


@dataclass(frozen=True)
class Family:
    """A named deformation family and how it is verified."""

    name: str
    endpoint_a: str
    endpoint_b: str
    grid_r_max: float
    convex: bool  # the imaginary-direction CSS certificate applies along the sweep
    symmetry: int = 1


z = Variable()
L = AtanhLog()


def _enneper():
    return HarmonicMap("enneper", h=z, g=z ** 3 / 3, q=z)


def _scherk_singly():
    # printed h_S and g_S are swapped: as printed g'/h' = 1/z^2
    return HarmonicMap("scherk-singly",
                       h=0.25 * L - 0.25j * L.rotate(1j),
                       g=0.25 * L + 0.25j * L.rotate(1j),
                       q=z)


def _scherk_doubly():
    return HarmonicMap("scherk-doubly",
                       h=0.25 * L - 0.25j * L.rotate(1j),
                       g=-0.25 * L - 0.25j * L.rotate(1j),
                       q=1j * z)


def _catenoid():
    return HarmonicMap("catenoid",
                       h=0.25 * L + 0.5 * (z / (1 - z ** 2)),
                       g=0.25 * L - 0.5 * (z / (1 - z ** 2)),
                       q=1j * z)


def _enneper4():
    return HarmonicMap("enneper4", h=z, g=(-1 / 7) * z ** 7, q=1j * z ** 3,
                       r_max=FOUR_FOLD_R_MAX)


def _noid4():
    # log((z+1)/(z-1)) enters as -L(z); the constant i*pi is dropped by f(0) = 0
    plus = (2 * z / (1 + z ** 2) + 3 * L) / 8
    minus = (z / (1 - z ** 2) + 1.5j * L.rotate(-1j)) / 4
    return HarmonicMap("noid4", h=0.5 * (plus + minus), g=0.5 * (plus - minus),
                       q=1j * z ** 3, r_max=FOUR_FOLD_R_MAX)


_CATALOG = {
    "enneper": _enneper,
    "scherk-singly": _scherk_singly,
    "scherk-doubly": _scherk_doubly,
    "catenoid": _catenoid,
    "enneper4": _enneper4,
    "noid4": _noid4,
}
CATALOG_NAMES = tuple(_CATALOG)

FAMILIES = {family.name: family for family in (
    Family("enneper-scherk", "enneper", "scherk-singly", grid_r_max=0.95, convex=True),
    Family("scherk-catenoid", "scherk-doubly", "catenoid", grid_r_max=0.95, convex=True),
    Family("enneper4-noid4", "enneper4", "noid4", grid_r_max=0.94, convex=False, symmetry=4),
)}


def catalog(name: str) -> HarmonicMap:
    if name not in _CATALOG:
        raise UnknownNameError(f"unknown mapping {name!r}; expected one of {', '.join(CATALOG_NAMES)}")
    return _CATALOG[name]()


def family(name: str) -> Family:
    if name not in FAMILIES:
        raise UnknownNameError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    return FAMILIES[name]


def family_for(endpoint_a: str, endpoint_b: str) -> Family:
    """The registered family with these endpoints, or an unregistered one with no certificates."""
    return family_of(catalog(endpoint_a), catalog(endpoint_b))


def family_of(a: HarmonicMap, b: HarmonicMap) -> Family:
    """Like family_for, for endpoint maps that need not come from the catalog."""
    for entry in FAMILIES.values():
        if (entry.endpoint_a, entry.endpoint_b) == (a.name, b.name):
            return entry
    grid_r_max = round(min(0.95, min(a.r_max, b.r_max) - 0.01), 6)
    return Family(f"{a.name}-{b.name}", a.name, b.name, grid_r_max, convex=False)


def family_spec(entry: Family, steps: int) -> FamilySpec:
    return FamilySpec.evenly(catalog(entry.endpoint_a), catalog(entry.endpoint_b), steps, entry.name)


def eval_map(f: HarmonicMap, z):
    """f(z) = h(z) + conj(g(z))."""
    h = eval_d(f.h, z, 0, f.r_max)[0]
    g = eval_d(f.g, z, 0, f.r_max)[0]
    return h + np.conj(g)


def dilatation(f: HarmonicMap, z):
    """omega(z) = g'(z) / h'(z)."""
    _, dh = eval_d(f.h, z, 1, f.r_max)
    _, dg = eval_d(f.g, z, 1, f.r_max)
    if np.any(np.abs(dh) < POLE_GUARD):
        raise PoleError(f"h' of {f.name} vanishes, dilatation undefined")
    return dg / dh


def shear(f: HarmonicMap, beta: float, convention: str = "css") -> AnalyticExpr:
    """
    The shear phi = h - e^{2i beta} g, whose convexity in the e^{i beta}
    direction certifies univalence of f. With convention "difference", phi = h - g
    regardless of beta.
    """
    if convention == "difference":
        return Sum((f.h, Scaled(-1.0, f.g)))
    if convention != "css":
        raise ValueError(f"unknown shear convention {convention!r}")
    return Sum((f.h, Scaled(-unit(2.0 * beta), f.g)))


def combine(a: HarmonicMap, b: HarmonicMap, s: float, check: bool = True) -> HarmonicMap:
    """
    The convex combination (1-s) a + s b.

    Both maps must share their dilatation, in which case the combination has
    the same dilatation and inherits q from `a`. At s = 0 and s = 1 the
    endpoint itself is returned.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"combination parameter must lie in [0, 1], got {s}")
    from .criteria import check_dilatation_equal, precondition_grid

    if check and not check_dilatation_equal(a, b):
        raise DilatationMismatchError(f"{a.name} and {b.name} have different dilatations")
    r_max = min(a.r_max, b.r_max)
    name = f"{a.name}+{b.name}@s={s:g}"
    if s == 0.0:
        return replace(a, name=name, r_max=r_max)
    if s == 1.0:
        return replace(b, name=name, r_max=r_max)
    combined = HarmonicMap(name,
                           h=Sum((Scaled(1.0 - s, a.h), Scaled(s, b.h))),
                           g=Sum((Scaled(1.0 - s, a.g), Scaled(s, b.g))),
                           q=a.q, r_max=r_max)
    if check:
        # surfaces h' = 0 of the combination as a PoleError
        dilatation(combined, precondition_grid(a, b).points)
    logging.debug(f"Combined {a.name} and {b.name} at s = {s:g}")
    return combined


def from_pq(p: AnalyticExpr, q: AnalyticExpr, name: str = "from-pq",
            r_max: float = DEFAULT_R_MAX, nodes: int = DEFAULT_NODES) -> HarmonicMap:
    """
    The harmonic map with h' = p and g' = p q**2, normalized to h(0) = g(0) = 0.

    h and g are radial integrals of p and p q**2. p and q must be analytic on
    the disk; they are sampled on a grid and a pole there raises PoleError.
    """
    from .criteria import DiskGrid

    samples = DiskGrid(20, 32, 0.95 * r_max).points
    for part, label in ((p, "p"), (q, "q")):
        values = eval_d(part, samples, 0, r_max)[0]
        if not np.all(np.isfinite(values)):
            raise PoleError(f"{label} = {part} is not analytic on the disk")
    return HarmonicMap(name, h=RadialIntegral(p, nodes), g=RadialIntegral(p * q * q, nodes),
                       q=q, r_max=r_max)
