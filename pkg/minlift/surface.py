import json
import logging
import os
import tempfile
from dataclasses import dataclass
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd

from .analytic import DEFAULT_NODES, eval_d
from .criteria import DiskGrid
from .errors import DomainError, MeshIOError
from .lift import lift_points
from .mappings import HarmonicMap

CURVATURE_STEP = 1e-4
LAPLACIAN_STEP = 1e-3
STEP_FIT = 0.45
FORMATS = ("obj", "ply", "csv", "json")


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """
    A lifted polar lattice with per-vertex diagnostics.

    Attributes:
        name (str): Name of the lifted map.
        grid (tuple): (n_r, n_theta, r_max) of the lattice.
        params (np.ndarray): Disk points z, in DiskGrid order.
        vertices (np.ndarray): Lifted points, shape (N, 3).
        faces (tuple): 0-based vertex index tuples; quads between rings and an
            origin triangle fan.
        lam (np.ndarray): Conformal factor |x_u|^2.
        iso_dev (np.ndarray): max(|x_u . x_v|, ||x_u|^2 - |x_v|^2|).
        h_est (np.ndarray): Mean-curvature estimate |H|.
    """

    name: str
    grid: tuple
    params: np.ndarray
    vertices: np.ndarray
    faces: tuple
    lam: np.ndarray
    iso_dev: np.ndarray
    h_est: np.ndarray

    def __post_init__(self):
        n = len(self.params)
        if not (len(self.vertices) == len(self.lam) == len(self.iso_dev) == len(self.h_est) == n):
            raise ValueError("mesh vertex, parameter and diagnostic lists differ in length")
        if any(index < 0 or index >= n for face in self.faces for index in face):
            raise ValueError("mesh face refers to a missing vertex")

    @property
    def n_quads(self) -> int:
        return sum(1 for face in self.faces if len(face) == 4)

    @property
    def n_triangles(self) -> int:
        return sum(1 for face in self.faces if len(face) == 3)

    def radius_mask(self, fraction: float = 0.9) -> np.ndarray:
        return np.abs(self.params) <= fraction * self.grid[2]

    def iso_ratio(self) -> np.ndarray:
        return self.iso_dev / self.lam


def lattice_faces(grid: DiskGrid) -> tuple:
    """Counter-clockwise origin fan plus (n_r - 1) * n_theta quads."""
    faces = [(0, grid.index(1, k), grid.index(1, k + 1)) for k in range(grid.n_theta)]
    for j in range(1, grid.n_r):
        for k in range(grid.n_theta):
            faces.append((grid.index(j, k), grid.index(j + 1, k),
                          grid.index(j + 1, k + 1), grid.index(j, k + 1)))
    return tuple(faces)


def first_partials(f: HarmonicMap, z):
    """
    Analytic x_u and x_v of the lift at z = u + iv. With
    Phi = (h' + g', -i(h' - g'), -2i h' q), x = Re{integral Phi}, so
    x_u = Re Phi and x_v = -Im Phi.
    """
    _, dh = eval_d(f.h, z, 1, f.r_max)
    _, dg = eval_d(f.g, z, 1, f.r_max)
    q = eval_d(f.q, z, 0, f.r_max)[0]
    phi = np.stack([dh + dg, -1j * (dh - dg), -2j * dh * q], axis=-1)
    return phi.real, -phi.imag


def isothermal_diagnostics(x_u, x_v):
    """(lambda, iso_dev) from the first partials."""
    e = np.sum(x_u * x_u, axis=-1)
    f = np.sum(x_u * x_v, axis=-1)
    g = np.sum(x_v * x_v, axis=-1)
    return e, np.maximum(np.abs(f), np.abs(e - g))


def _first_difference(fn, z, direction, step):
    # central four-point rule, O(step^4)
    d = direction * step
    scale = np.asarray(12 * step, dtype=float)[..., np.newaxis]
    return (-fn(z + 2 * d) + 8 * fn(z + d) - 8 * fn(z - d) + fn(z - 2 * d)) / scale


def _second_difference(fn, z, direction, step):
    # five-point rule along one axis, O(step^4)
    d = direction * step
    return (-fn(z + 2 * d) + 16 * fn(z + d) - 30 * fn(z) + 16 * fn(z - d) - fn(z - 2 * d)) / (12 * step * step)


def _check_margin(f, points, step):
    if np.any(np.abs(points) + 2 * step >= f.r_max):
        raise DomainError(f"finite-difference stencil of step {step:g} leaves the disk of radius {f.r_max}")


def fitted_step(f: HarmonicMap, points, step: float) -> np.ndarray:
    """Per-point step, shrunk near the rim so that |z| + 2 step < r_max."""
    return np.minimum(step, STEP_FIT * (f.r_max - np.abs(points)))


def mean_curvature_estimate(f: HarmonicMap, z, step: float = CURVATURE_STEP, partials=None,
                            fit_step: bool = False):
    """
    |H| from the first and second fundamental forms. First partials are
    analytic; second partials are central differences of the first ones.
    `partials` (z -> (x_u, x_v)) replaces the lift's partials, for controls.
    With `fit_step`, points closer than 2 step to the rim use a smaller step
    instead of raising DomainError.
    """
    points = np.asarray(z, dtype=complex)
    if fit_step:
        step = fitted_step(f, points, step)
    else:
        _check_margin(f, points, step)
    partials = partials or (lambda w: first_partials(f, w))
    x_u, x_v = partials(points)
    x_uu = _first_difference(lambda w: partials(w)[0], points, 1.0, step)
    x_uv = _first_difference(lambda w: partials(w)[0], points, 1j, step)
    x_vv = _first_difference(lambda w: partials(w)[1], points, 1j, step)
    normal = np.cross(x_u, x_v)
    normal = normal / np.linalg.norm(normal, axis=-1, keepdims=True)
    e, f_, g = (np.sum(x_u * x_u, axis=-1), np.sum(x_u * x_v, axis=-1), np.sum(x_v * x_v, axis=-1))
    l, m, n = (np.sum(x_uu * normal, axis=-1), np.sum(x_uv * normal, axis=-1),
               np.sum(x_vv * normal, axis=-1))
    h = (e * n - 2 * f_ * m + g * l) / (2 * (e * g - f_ * f_))
    return float(abs(h)) if np.ndim(z) == 0 else np.abs(h)


def laplacian_residual(f: HarmonicMap, z, step: float = LAPLACIAN_STEP, nodes: int = DEFAULT_NODES,
                       coordinates=None):
    """
    max over the three coordinates of |x_uu + x_vv|, by the five-point rule in
    each axis. `coordinates` (z -> array (..., 3)) replaces the lift, for controls.
    """
    points = np.asarray(z, dtype=complex)
    _check_margin(f, points, step)
    coordinates = coordinates or (lambda w: lift_points(f, w, nodes))
    laplacian = (_second_difference(coordinates, points, 1.0, step)
                 + _second_difference(coordinates, points, 1j, step))
    residual = np.max(np.abs(laplacian), axis=-1)
    return float(residual) if np.ndim(z) == 0 else residual


def build_mesh(f: HarmonicMap, grid: DiskGrid, nodes: int = DEFAULT_NODES,
               curvature_step: float = CURVATURE_STEP) -> SurfaceMesh:
    points = np.array(grid.points)
    vertices = lift_points(f, points, nodes)
    lam, iso_dev = isothermal_diagnostics(*first_partials(f, points))
    h_est = mean_curvature_estimate(f, points, curvature_step, fit_step=True)
    logging.debug(f"Mesh of {f.name}: {len(points)} vertices, max iso_dev/lambda "
                  f"{float(np.max(iso_dev / lam)):.3g}, max |H| {float(np.max(h_est)):.3g}")
    return SurfaceMesh(f.name, grid.as_tuple(), points, vertices, lattice_faces(grid),
                       lam, iso_dev, h_est)


def _clean(values):
    # rounds to the printed precision, then folds -0.0 into 0.0
    return np.round(np.asarray(values, dtype=float), 9) + 0.0


def _obj_text(mesh):
    lines = [f"# minlift {mesh.name} grid {mesh.grid[0]}x{mesh.grid[1]} r_max {mesh.grid[2]:g}"]
    lines += [f"v {x:.9f} {y:.9f} {z:.9f}" for x, y, z in _clean(mesh.vertices)]
    lines += ["f " + " ".join(str(index + 1) for index in face) for face in mesh.faces]
    return "\n".join(lines) + "\n"


def _ply_text(mesh):
    header = [
        "ply",
        "format ascii 1.0",
        f"comment minlift {mesh.name}",
        f"element vertex {len(mesh.vertices)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    body = [f"{x:.9f} {y:.9f} {z:.9f}" for x, y, z in _clean(mesh.vertices)]
    body += [f"{len(face)} " + " ".join(str(index) for index in face) for face in mesh.faces]
    return "\n".join(header + body) + "\n"


def mesh_frame(mesh: SurfaceMesh) -> pd.DataFrame:
    vertices = _clean(mesh.vertices)
    return pd.DataFrame({
        "z_re": _clean(mesh.params.real),
        "z_im": _clean(mesh.params.imag),
        "x1": vertices[:, 0],
        "x2": vertices[:, 1],
        "x3": vertices[:, 2],
        "lambda": mesh.lam,
        "iso_dev": mesh.iso_dev,
        "H_est": mesh.h_est,
    })


def _csv_text(mesh):
    buffer = StringIO()
    mesh_frame(mesh).to_csv(buffer, index=False, float_format="%.9f", lineterminator="\n")
    return buffer.getvalue()


def mesh_to_dict(mesh: SurfaceMesh) -> dict:
    return {
        "name": mesh.name,
        "grid": list(mesh.grid),
        "params": [[float(z.real), float(z.imag)] for z in mesh.params],
        "vertices": mesh.vertices.tolist(),
        "faces": [list(face) for face in mesh.faces],
        "lambda": mesh.lam.tolist(),
        "iso_dev": mesh.iso_dev.tolist(),
        "H_est": mesh.h_est.tolist(),
    }


def _json_text(mesh):
    return json.dumps(mesh_to_dict(mesh), sort_keys=True) + "\n"


_WRITERS = {"obj": _obj_text, "ply": _ply_text, "csv": _csv_text, "json": _json_text}


def atomic_write_text(path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename over `path`."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile("w", dir=path.parent, prefix=f".{path.name}.", delete=False,
                                         encoding="utf-8", newline="\n") as handle:
            handle.write(text)
            temporary = handle.name
        os.replace(temporary, path)
    except OSError as error:
        raise MeshIOError(f"cannot write {path}: {error}") from error
    logging.debug(f"Wrote {path}")
    return path


def export(mesh: SurfaceMesh, fmt: str, path) -> Path:
    """Write `mesh` as obj, ply, csv or json; the bytes depend only on the mesh."""
    if fmt not in _WRITERS:
        raise ValueError(f"unknown mesh format {fmt!r}; expected one of {', '.join(FORMATS)}")
    return atomic_write_text(path, _WRITERS[fmt](mesh))


def load_mesh_json(path) -> SurfaceMesh:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as error:
        raise MeshIOError(f"cannot read {path}: {error}") from error
    params = np.array([complex(re, im) for re, im in data["params"]])
    return SurfaceMesh(data["name"], tuple(data["grid"]), params,
                       np.array(data["vertices"], dtype=float).reshape(-1, 3),
                       tuple(tuple(face) for face in data["faces"]),
                       np.array(data["lambda"]), np.array(data["iso_dev"]), np.array(data["H_est"]))


def mesh_filename(family_name: str, s: float, fmt: str) -> str:
    return f"family_{family_name}_s{round(100 * s):03d}.{fmt}"
