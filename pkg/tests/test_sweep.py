import mesa
import pytest

from minlift.errors import DilatationMismatchError, UnknownNameError
from minlift.mappings import family_for
from minlift.sweep import FamilySweep, run_sweep

SMALL = dict(n_r=8, n_theta=32, samples=5, boundary_points=256, seed=7)


def test_enneper_scherk_sweep_passes():
    model = FamilySweep("enneper-scherk", steps=3, **SMALL)
    assert len(model.members) == 3
    assert not model.all_passed
    model.step()
    assert not model.running
    assert model.all_passed
    assert model.min_jacobian > 0
    assert model.max_iso_ratio <= 1e-9
    assert model.max_curvature <= 1e-6
    assert model.max_laplacian <= 1e-5

    table = model.table()
    assert len(table) == 3
    assert list(table["s"]) == pytest.approx([0.0, 0.5, 1.0])
    assert table["passed"].all()
    assert table["crossings"].eq(0).all()
    assert table["css_min"].gt(0).all()


def test_each_member_gets_its_mesh():
    model = FamilySweep("scherk-catenoid", steps=2, **SMALL)
    model.step()
    assert [s for s, _ in model.meshes] == [0.0, 1.0]
    for agent, (_, mesh) in zip(model.members, model.meshes):
        assert agent.mesh is mesh
        assert mesh.name == agent.name


def test_four_fold_family_checks_symmetry():
    model = FamilySweep("enneper4-noid4", steps=4, **SMALL)
    model.step()
    assert model.grid.r_max == 0.94
    assert model.all_passed
    for agent in model.members:
        criteria = [report.criterion for report in agent.reports]
        assert "symmetry" in criteria
        assert "css" not in criteria
        assert agent.symmetry_error <= 1e-10


def test_unknown_family():
    with pytest.raises(UnknownNameError):
        FamilySweep("enneper-catenoid")
    with pytest.raises(UnknownNameError):
        run_sweep("enneper", "helicoid")


def test_mismatched_endpoints():
    with pytest.raises(DilatationMismatchError):
        FamilySweep(family_for("enneper", "scherk-doubly"), steps=2, **SMALL)


def test_same_seed_same_summary():
    first = run_sweep("scherk-doubly", "catenoid", steps=3, **SMALL).summary()
    second = run_sweep("scherk-doubly", "catenoid", steps=3, **SMALL).summary()
    assert first == second
    assert first["family"] == "scherk-catenoid"
    assert first["schedule"] == pytest.approx([0.0, 0.5, 1.0])
    assert len(first["members"]) == 3
    assert all(member["passed"] for member in first["members"])


def test_no_interior_samples():
    model = run_sweep("enneper", "scherk-singly", steps=2, **{**SMALL, "samples": 0})
    assert model.all_passed
    assert model.max_curvature == 0.0


def test_batch_run_over_families():
    results = mesa.batch_run(
        FamilySweep,
        parameters={"family": ["enneper-scherk", "scherk-catenoid"], "steps": 2, "n_r": 6, "n_theta": 16,
                    "samples": 3, "boundary_points": 128, "seed": 0},
        iterations=1,
        max_steps=1,
        number_processes=1,
        data_collection_period=-1,
        display_progress=False,
    )
    assert len({row["RunId"] for row in results}) == 2
    assert {row["family"] for row in results} == {"enneper-scherk", "scherk-catenoid"}
    assert all(row["all_passed"] for row in results)
