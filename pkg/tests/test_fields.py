import numpy as np
import pytest

import hamlip as hl
from hamlip.errors import ContractError
from hamlip.fields import read_field_csv, write_field_csv


def test_infinity_serialized_as_literal(tmp_path):
    coords = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 0.25]])
    values = np.array([0.0, np.inf, 1.25])
    path = tmp_path / "field.csv"
    write_field_csv(path, coords, values)
    text = path.read_text()
    assert ",inf" in text.splitlines()[2]
    got_coords, got_values = read_field_csv(path)
    assert np.array_equal(got_coords, coords)
    assert np.array_equal(got_values, values)  # inf round-trips


def test_values_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(2)
    coords = rng.normal(size=(20, 3))
    values = rng.normal(size=20)
    path = tmp_path / "field.csv"
    write_field_csv(path, coords, values)
    got_coords, got_values = read_field_csv(path)
    assert np.array_equal(got_coords, coords)
    assert np.array_equal(got_values, values)


def test_scalar_field_validation():
    with pytest.raises(ContractError):
        hl.ScalarField(np.arange(3), np.zeros(4))


def test_distance_field_direction_tag():
    with pytest.raises(ContractError):
        hl.DistanceField(np.arange(2), np.zeros(2), direction="sideways")


def test_value_at():
    f = hl.ScalarField(np.array([3, 7, 9]), np.array([1.0, 2.0, 3.0]))
    assert f.value_at(7) == 2.0
    with pytest.raises(ContractError):
        f.value_at(5)
