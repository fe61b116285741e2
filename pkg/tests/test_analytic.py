import json

import numpy as np
import pytest
from hypothesis import given

from conftest import disk_points
from minlift.analytic import (AtanhLog, Constant, Power, RadialIntegral, Rotated, Variable, eval_d,
                              from_json, gauss_legendre, integrate_path, integrate_radial,
                              integrate_segment, square_label, unit)
from minlift.errors import DomainError, PoleError
from minlift.mappings import CATALOG_NAMES, catalog

z = Variable()
L = AtanhLog()


def catalog_expressions():
    for name in CATALOG_NAMES:
        f = catalog(name)
        yield from (f.h, f.g, f.q)


def test_polynomial_at_origin():
    assert eval_d(z - z ** 3 / 3, 0, order=2) == (0, 1, 0)


def test_atanh_log_at_half():
    value, first, second = eval_d(L, 0.5, order=2)
    assert value == pytest.approx(np.log(3.0), abs=1e-14)
    # L = 2 atanh(z), so L' = 2 / (1 - z^2)
    assert first == pytest.approx(8.0 / 3.0, abs=1e-14)
    assert second == pytest.approx(4.0 * 0.5 / 0.75 ** 2, abs=1e-13)


def test_square_on_imaginary_axis():
    value, first, second = eval_d(z ** 2, 0.5j, order=2)
    assert value == pytest.approx(-0.25)
    assert first == pytest.approx(1j)
    assert second == pytest.approx(2)


def test_rotated_log_matches_principal_log():
    w = 0.3 + 0.4j
    expected = np.log((1j - w) / (1j + w))
    assert eval_d(L.rotate(1j), w)[0] == pytest.approx(expected, abs=1e-14)
    assert str(L.rotate(1j)) == "L(iz)"


def test_array_evaluation_keeps_shape():
    points = np.array([[0.1, 0.2j], [-0.3, 0.4 + 0.1j]])
    value, first = eval_d(z ** 3, points, order=1)
    assert value.shape == (2, 2)
    np.testing.assert_allclose(first, 3 * points ** 2)


def test_outside_disk_is_a_domain_error():
    with pytest.raises(DomainError):
        eval_d(z, 0.995)
    with pytest.raises(DomainError):
        eval_d(z, 0.5, r_max=0.5)
    with pytest.raises(DomainError):
        eval_d(z, complex("nan"))


def test_vanishing_denominator_is_a_pole_error():
    with pytest.raises(PoleError):
        eval_d(1 / z, 0)
    assert eval_d(1 / z, 0.5)[0] == pytest.approx(2.0)


def test_bad_arguments():
    with pytest.raises(ValueError):
        eval_d(z, 0.1, order=3)
    with pytest.raises(TypeError):
        z ** 2.5
    with pytest.raises(TypeError):
        z + "one"
    with pytest.raises(ValueError):
        Rotated(2.0, L)
    with pytest.raises(ValueError):
        Power(-1)


@given(disk_points(0.9))
def test_first_derivative_matches_central_differences(w):
    step = 1e-6
    for expr in catalog_expressions():
        exact = eval_d(expr, w, order=1)[1]
        numeric = (eval_d(expr, w + step)[0] - eval_d(expr, w - step)[0]) / (2 * step)
        assert abs(exact - numeric) <= 1e-7 * max(1.0, abs(exact))


@given(disk_points(0.9))
def test_symbolic_derivative_agrees_with_jet(w):
    for expr in catalog_expressions():
        _, first, second = eval_d(expr, w, order=2)
        derivative = expr.derivative()
        assert eval_d(derivative, w)[0] == pytest.approx(first, rel=1e-12, abs=1e-12)
        assert eval_d(derivative, w, order=1)[1] == pytest.approx(second, rel=1e-10, abs=1e-10)


def test_json_round_trip_of_catalog_expressions():
    for expr in catalog_expressions():
        assert from_json(expr.to_json()) == expr
        assert from_json(json.dumps(expr.to_json())) == expr


def test_unknown_json_kind():
    with pytest.raises(ValueError):
        from_json({"kind": "sinh", "children": []})


def test_square_labels():
    assert square_label(z) == "z^2"
    assert square_label(1j * z) == "-z^2"
    assert square_label(1j * z ** 3) == "-z^6"
    assert square_label(Constant(0)) == "0"


def test_unit_snaps_axis_angles():
    assert unit(np.pi) == -1
    assert unit(np.pi / 2) == 1j
    assert unit(0.0) == 1
    assert unit(0.3) == pytest.approx(np.exp(0.3j))


def test_gauss_legendre_on_unit_interval():
    t, w = gauss_legendre(8)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all((t > 0) & (t < 1))
    assert not t.flags.writeable


def test_integrate_radial_examples():
    assert integrate_radial(z, 0.8, nodes=16) == pytest.approx(0.32, abs=1e-15)
    assert integrate_radial(1 / (1 - z ** 2), 0.5, nodes=64) == pytest.approx(np.arctanh(0.5), abs=1e-14)
    assert integrate_radial(z, (1 + 1j) / 2) == pytest.approx(0.25j, abs=1e-15)


@given(disk_points(0.95))
def test_integrate_radial_matches_antiderivatives(w):
    cases = [
        (z ** 3 - 2 * z, w ** 4 / 4 - w ** 2),
        (L, (1 + w) * np.log1p(w) + (1 - w) * np.log1p(-w)),
        (1 / (1 - z ** 2) ** 2, w / (2 * (1 - w ** 2)) + np.arctanh(w) / 2),
        (z / (1 - z ** 4), np.arctanh(w ** 2) / 2),
    ]
    for expr, exact in cases:
        assert abs(integrate_radial(expr, w) - exact) <= 1e-12 * max(1.0, abs(exact))


@given(disk_points(0.9))
def test_integration_is_linear(w):
    a, b = 0.7 - 0.2j, -1.3
    first, second = L.rotate(1j), z / (1 - z ** 2)
    combined = integrate_radial(a * first + b * second, w)
    separate = a * integrate_radial(first, w) + b * integrate_radial(second, w)
    assert abs(combined - separate) <= 1e-13


def test_integrate_segment_and_path():
    assert integrate_segment(z, 0.2, 0.6) == pytest.approx(0.16, abs=1e-15)
    target = 0.5 + 0.5j
    via_corner = integrate_path(L, [0, 0.5, target])
    assert via_corner == pytest.approx(integrate_radial(L, target), abs=1e-13)
    with pytest.raises(ValueError):
        integrate_path(z, [0.3])


def test_integrate_segment_vectorizes_over_endpoints():
    ends = np.array([0.1, 0.5j, -0.3 + 0.2j])
    np.testing.assert_allclose(integrate_segment(z, 0, ends), ends ** 2 / 2, atol=1e-15)


def test_radial_integral_node():
    cube = RadialIntegral(z ** 2)
    value, first, second = eval_d(cube, 0.6, order=2)
    assert value == pytest.approx(0.072, abs=1e-15)
    assert first == pytest.approx(0.36)
    assert second == pytest.approx(1.2)
    assert cube.derivative() == z ** 2
    with pytest.raises(ValueError):
        RadialIntegral(z, nodes=1)
