import numpy as np
import pandas as pd
import pytest

from minlift.analytic import eval_d
from minlift.criteria import DiskGrid
from minlift.errors import DomainError, MeshIOError
from minlift.mappings import CATALOG_NAMES, FAMILIES, catalog, combine, family_spec
from minlift.surface import (SurfaceMesh, build_mesh, export, first_partials, fitted_step,
                             isothermal_diagnostics, lattice_faces, laplacian_residual, load_mesh_json,
                             mean_curvature_estimate, mesh_filename)


@pytest.fixture(scope="module")
def small_enneper():
    return build_mesh(catalog("enneper"), DiskGrid(3, 8, 0.9))


def test_lattice_counts(small_enneper):
    mesh = small_enneper
    assert len(mesh.vertices) == len(mesh.params) == 25
    # (n_r - 1) * n_theta quads between rings, n_theta triangles around the origin
    assert mesh.n_quads == 16
    assert mesh.n_triangles == 8
    assert all(0 <= index < 25 for face in mesh.faces for index in face)


def test_every_vertex_is_used():
    faces = lattice_faces(DiskGrid(4, 6, 0.5))
    assert {index for face in faces for index in face} == set(range(25))


def test_conformal_factor_of_enneper(small_enneper):
    lam, iso_dev = isothermal_diagnostics(*first_partials(catalog("enneper"), 0.5))
    assert lam == pytest.approx(1.5625, abs=1e-14)
    assert iso_dev <= 1e-14
    expected = (1 + np.abs(small_enneper.params) ** 2) ** 2
    assert np.max(np.abs(small_enneper.lam - expected)) <= 1e-12


def test_doubly_periodic_scherk_is_isothermal():
    mesh = build_mesh(catalog("scherk-doubly"), DiskGrid(20, 32, 0.9))
    assert np.all(mesh.iso_dev <= 1e-12 * mesh.lam)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_lifts_are_regular_and_isothermal(name):
    f = catalog(name)
    grid = DiskGrid(20, 32, 0.94)
    mesh = build_mesh(f, grid)
    inside = mesh.radius_mask(0.9)
    assert np.max(mesh.iso_ratio()[inside]) <= 1e-9
    _, dh = eval_d(f.h, mesh.params, 1, f.r_max)
    _, dg = eval_d(f.g, mesh.params, 1, f.r_max)
    assert np.all(mesh.lam > 0)
    np.testing.assert_allclose(mesh.lam, (np.abs(dh) + np.abs(dg)) ** 2, rtol=1e-12)


def test_mean_curvature_examples():
    assert mean_curvature_estimate(catalog("enneper"), 0.3 + 0.2j) <= 1e-6
    assert mean_curvature_estimate(catalog("catenoid"), 0.5j) <= 1e-6


def test_flattened_lift_is_flagged_by_isothermality():
    f = catalog("enneper")

    def flattened(w):
        x_u, x_v = first_partials(f, w)
        x_u, x_v = np.array(x_u), np.array(x_v)
        x_u[..., 2] = 0.0
        x_v[..., 2] = 0.0
        return x_u, x_v

    _, iso_dev = isothermal_diagnostics(*flattened(0.5))
    assert iso_dev > 1e-3
    assert np.isfinite(mean_curvature_estimate(f, 0.5, partials=flattened))


def test_laplacian_examples():
    assert laplacian_residual(catalog("enneper"), 0.4) <= 1e-6
    assert laplacian_residual(catalog("scherk-singly"), 0.3j) <= 1e-6


def test_laplacian_detects_a_non_harmonic_height():
    def paraboloid(w):
        return np.stack([w.real, w.imag, np.abs(w) ** 2], axis=-1)

    residual = laplacian_residual(catalog("enneper"), 0.4, coordinates=paraboloid)
    assert residual == pytest.approx(4.0, abs=1e-6)


def test_stencils_must_stay_in_the_disk():
    with pytest.raises(DomainError):
        mean_curvature_estimate(catalog("enneper"), 0.9899)
    with pytest.raises(DomainError):
        laplacian_residual(catalog("noid4"), 0.949)


def test_mesh_reaching_the_rim_shrinks_the_curvature_step():
    f = catalog("noid4")
    mesh = build_mesh(f, DiskGrid(4, 8, f.r_max - 1e-4))
    assert np.all(np.isfinite(mesh.h_est))
    assert np.max(mesh.h_est) <= 1e-6
    steps = fitted_step(f, mesh.params, 1e-4)
    assert np.all(np.abs(mesh.params) + 2 * steps < f.r_max)
    assert steps[0] == 1e-4


@pytest.mark.parametrize("name", list(FAMILIES))
def test_family_members_are_minimal(name, random_disk):
    entry = FAMILIES[name]
    spec = family_spec(entry, 6)
    points = random_disk(10, 0.9 * entry.grid_r_max)
    for s in spec.parameters:
        member = combine(spec.endpoint_a, spec.endpoint_b, s)
        assert np.max(mean_curvature_estimate(member, points)) <= 1e-6
        assert np.max(laplacian_residual(member, points)) <= 1e-5


def test_obj_export(small_enneper, tmp_path):
    path = export(small_enneper, "obj", tmp_path / "enneper.obj")
    lines = path.read_text().splitlines()
    vertices = [line for line in lines if line.startswith("v ")]
    faces = [line for line in lines if line.startswith("f ")]
    assert len(vertices) == 25
    assert vertices[0] == "v 0.000000000 0.000000000 0.000000000"
    assert len(faces) == 24
    indices = [int(token) for line in faces for token in line.split()[1:]]
    assert min(indices) == 1 and max(indices) == 25
    assert "-0.000000000" not in path.read_text()


def test_ply_export(small_enneper, tmp_path):
    text = export(small_enneper, "ply", tmp_path / "enneper.ply").read_text()
    header, body = text.split("end_header\n")
    assert header.startswith("ply\nformat ascii 1.0\n")
    assert "element vertex 25" in header
    assert "element face 24" in header
    assert len(body.splitlines()) == 49


def test_csv_export(tmp_path):
    mesh = build_mesh(catalog("enneper"), DiskGrid(1, 8, np.sqrt(0.5)))
    frame = pd.read_csv(export(mesh, "csv", tmp_path / "enneper.csv"))
    assert list(frame.columns) == ["z_re", "z_im", "x1", "x2", "x3", "lambda", "iso_dev", "H_est"]
    row = frame[(frame.z_re - 0.5).abs().lt(1e-9) & (frame.z_im - 0.5).abs().lt(1e-9)]
    assert len(row) == 1
    assert row.x3.iloc[0] == pytest.approx(0.5, abs=1e-9)


def test_json_round_trip_is_exact(small_enneper, tmp_path):
    path = export(small_enneper, "json", tmp_path / "enneper.json")
    loaded = load_mesh_json(path)
    assert np.array_equal(loaded.vertices, small_enneper.vertices)
    assert np.array_equal(loaded.params, small_enneper.params)
    assert loaded.faces == small_enneper.faces
    assert loaded.grid == small_enneper.grid


@pytest.mark.parametrize("fmt", ["obj", "ply", "csv", "json"])
def test_exports_are_byte_deterministic(fmt, tmp_path):
    first = build_mesh(catalog("catenoid"), DiskGrid(4, 12, 0.9))
    second = build_mesh(catalog("catenoid"), DiskGrid(4, 12, 0.9))
    a = export(first, fmt, tmp_path / f"a.{fmt}").read_bytes()
    b = export(second, fmt, tmp_path / f"b.{fmt}").read_bytes()
    assert a == b


def test_export_errors(small_enneper, tmp_path):
    with pytest.raises(ValueError):
        export(small_enneper, "stl", tmp_path / "enneper.stl")
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(MeshIOError):
        export(small_enneper, "obj", blocker / "enneper.obj")
    with pytest.raises(OSError):
        load_mesh_json(tmp_path / "missing.json")


def test_mesh_validation(small_enneper):
    with pytest.raises(ValueError):
        SurfaceMesh("broken", small_enneper.grid, small_enneper.params[:-1], small_enneper.vertices,
                    small_enneper.faces, small_enneper.lam, small_enneper.iso_dev, small_enneper.h_est)
    with pytest.raises(ValueError):
        SurfaceMesh("broken", small_enneper.grid, small_enneper.params, small_enneper.vertices,
                    ((0, 1, 99),), small_enneper.lam, small_enneper.iso_dev, small_enneper.h_est)


def test_mesh_filenames():
    assert mesh_filename("enneper-scherk", 0.2, "obj") == "family_enneper-scherk_s020.obj"
    assert mesh_filename("enneper4-noid4", 1 / 3, "ply") == "family_enneper4-noid4_s033.ply"
    assert mesh_filename("scherk-catenoid", 1.0, "obj") == "family_scherk-catenoid_s100.obj"
