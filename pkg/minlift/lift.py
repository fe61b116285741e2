"""
Weierstrass-Enneper lift of a harmonic map f = h + conj(g) to a minimal surface

    X(z) = (Re{h + g}, Im{h - g}, 2 Im{integral_0^z h' q}),

where q is the analytic square root of the dilatation carried by the map, so
that h' q is the single-valued branch of sqrt(h' g').
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import DEFAULT_NODES, AnalyticExpr, Product, eval_d, integrate_radial
from .criteria import DiskGrid, check_dilatation_equal
from .errors import DilatationMismatchError, DomainError, UnknownNameError
from .mappings import FamilySpec, HarmonicMap, catalog, combine

CHUNK = 4096


@dataclass(frozen=True)
class SurfacePoint:
    x1: float
    x2: float
    x3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


def height_integrand(f: HarmonicMap) -> AnalyticExpr:
    """h' q, the branch of sqrt(h' g') fixed by q."""
    return Product(f.h.derivative(), f.q)


def _lift_chunk(f, points, integrand, nodes):
    h = eval_d(f.h, points, 0, f.r_max)[0]
    g = eval_d(f.g, points, 0, f.r_max)[0]
    height = integrate_radial(integrand, points, nodes, f.r_max)
    return np.stack([(h + g).real, (h - g).imag, 2.0 * height.imag], axis=-1)


def lift_points(f: HarmonicMap, z, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Lift an array of disk points; the result has shape z.shape + (3,)."""
    points = np.asarray(z, dtype=complex)
    flat = np.atleast_1d(points).ravel()
    integrand = height_integrand(f)
    parts = [_lift_chunk(f, flat[start:start + CHUNK], integrand, nodes)
             for start in range(0, len(flat), CHUNK)]
    lifted = np.concatenate(parts) if parts else np.zeros((0, 3))
    return lifted.reshape(points.shape + (3,))


def lift_point(f: HarmonicMap, z, nodes: int = DEFAULT_NODES) -> SurfacePoint:
    x1, x2, x3 = lift_points(f, complex(z), nodes)
    return SurfacePoint(float(x1), float(x2), float(x3))


def _L(w):
    return np.log1p(w) - np.log1p(-w)


# closed forms of the lifts, from antiderivatives of h' q
_ORACLES = {
    "enneper": lambda z: ((z + z ** 3 / 3).real, (z - z ** 3 / 3).imag, (z ** 2).imag),
    "scherk-singly": lambda z: ((0.5 * _L(z)).real, (-0.5j * _L(1j * z)).imag, (0.5 * _L(z ** 2)).imag),
    "scherk-doubly": lambda z: ((-0.5j * _L(1j * z)).real, (0.5 * _L(z)).imag, (0.5j * _L(z ** 2)).imag),
    "catenoid": lambda z: ((0.5 * _L(z)).real, (z / (1 - z ** 2)).imag, (1 / (1 - z ** 2)).real - 1),
    "enneper4": lambda z: ((z - z ** 7 / 7).real, (z + z ** 7 / 7).imag, (z ** 4).real / 2),
    "noid4": lambda z: (((2 * z / (1 + z ** 2) + 3 * _L(z)) / 8).real,
                        ((z / (1 - z ** 2) + 1.5j * _L(-1j * z)) / 4).imag,
                        ((1 / (1 - z ** 4)).real - 1) / 2),
}


def closed_form_oracle(name: str, z):
    """
    The lift of catalog map `name` at z, evaluated from its closed form.
    Scalars give a SurfacePoint, arrays an array of shape z.shape + (3,).
    """
    if name not in _ORACLES:
        raise UnknownNameError(f"no closed form for {name!r}; expected one of {', '.join(_ORACLES)}")
    r_max = catalog(name).r_max
    points = np.asarray(z, dtype=complex)
    if np.any(np.abs(points) >= r_max):
        raise DomainError(f"|z| must stay below {r_max} for {name}")
    x = np.stack(_ORACLES[name](points), axis=-1)
    if np.ndim(z) == 0:
        return SurfacePoint(*(float(v) for v in x))
    return x


def thread_cap() -> int:
    """Worker threads for family lifts: MINLIFT_THREADS if set, else the CPU count."""
    value = os.environ.get("MINLIFT_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logging.warning(f"Ignoring MINLIFT_THREADS={value!r}, not an integer")
    return os.cpu_count() or 1


def worker_count(threads: int, members: int) -> int:
    """Requested threads, never above thread_cap() or the number of members."""
    cap = thread_cap()
    return max(1, min(threads or cap, cap, members))


def lift_family(spec: FamilySpec, grid: DiskGrid, nodes: int = DEFAULT_NODES, threads: int = None):
    """
    Lift every member (1-s) a + s b of the family to a SurfaceMesh.
    Returns [(s, mesh), ...] in schedule order.
    """
    from .surface import build_mesh

    a, b = spec.endpoint_a, spec.endpoint_b
    if not check_dilatation_equal(a, b):
        raise DilatationMismatchError(f"{a.name} and {b.name} have different dilatations")
    members = [combine(a, b, s, check=False) for s in spec.parameters]
    workers = worker_count(threads, len(members))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        meshes = list(pool.map(lambda member: build_mesh(member, grid, nodes), members))
    logging.info(f"Lifted {len(meshes)} members of {spec.name} on a {grid.n_r}x{grid.n_theta} grid")
    return list(zip(spec.parameters, meshes))
