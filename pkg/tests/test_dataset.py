import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from elscreen.dataset import DataError, Dataset, load_csv, rescale_features, write_csv
from elscreen.simgen import SimulationSpec, gen_example


def write_text(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_centers_response(tmp_path):
    path = write_text(tmp_path, "a,y,b\n1,1,4\n2,2,5\n3,3,7\n")
    d = load_csv(path, "y")
    np.testing.assert_array_equal(d.y, [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(d.x, [[1, 4], [2, 5], [3, 7]])
    assert d.feature_names == ("a", "b")
    assert d.z is None


def test_load_without_centering_and_index(tmp_path):
    path = write_text(tmp_path, "z,x1,y,x2\n0.1,1,10,2\n0.2,3,20,4\n")
    d = load_csv(path, "y", index_col="z", center_response=False)
    np.testing.assert_array_equal(d.y, [10, 20])
    np.testing.assert_array_equal(d.z, [0.1, 0.2])
    assert d.feature_names == ("x1", "x2")
    assert d.index_name == "z"


def test_missing_column_is_named(tmp_path):
    path = write_text(tmp_path, "a,b\n1,2\n3,4\n")
    with pytest.raises(DataError, match="'resp'"):
        load_csv(path, "resp")
    with pytest.raises(DataError, match="'zz'"):
        load_csv(path, "a", index_col="zz")


def test_text_cell_reports_row_and_column(tmp_path):
    path = write_text(tmp_path, "y,x1,x2\n1,2,3\n2,abc,4\n")
    with pytest.raises(DataError) as err:
        load_csv(path, "y")
    assert "row 3" in str(err.value)
    assert "'x1'" in str(err.value)


def test_insufficient_rows(tmp_path):
    path = write_text(tmp_path, "y,x\n1,2\n")
    with pytest.raises(DataError, match="at least 2"):
        load_csv(path, "y")


def test_ragged_row(tmp_path):
    path = write_text(tmp_path, "y,x\n1,2\n3\n")
    with pytest.raises(DataError, match="row 3"):
        load_csv(path, "y")


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(x=np.ones((3, 2)), y=np.ones(4))
    with pytest.raises(DataError):
        Dataset(x=np.array([[1.0, np.nan], [2.0, 3.0]]), y=[1.0, 2.0])
    with pytest.raises(DataError):
        Dataset(x=np.ones((3, 1)), y=np.ones(3), z=np.ones(2))
    with pytest.raises(DataError):
        Dataset(x=np.ones((1, 1)), y=np.ones(1))


def test_dataset_is_read_only():
    d = Dataset(x=np.ones((3, 2)), y=np.arange(3.0))
    with pytest.raises(ValueError):
        d.x[0, 0] = 5.0
    assert d.feature_names == ("X1", "X2")


def test_example1_round_trip(tmp_path):
    d = gen_example(SimulationSpec(1, n=60, p=12), 0)
    path = tmp_path / "ex1.csv"
    write_csv(d, path)
    back = load_csv(path, d.response_name)
    np.testing.assert_allclose(back.x, d.x, atol=1e-12, rtol=0)
    np.testing.assert_allclose(back.y, d.y, atol=1e-12, rtol=0)
    assert back.feature_names == d.feature_names


def test_example5_round_trip_keeps_index(tmp_path):
    d = gen_example(SimulationSpec(5, n=40, p=6), 3)
    path = tmp_path / "ex5.csv"
    write_csv(d, path)
    back = load_csv(path, d.response_name, index_col=d.index_name, center_response=False)
    np.testing.assert_array_equal(back.z, d.z)
    np.testing.assert_array_equal(back.x, d.x)
    np.testing.assert_array_equal(back.y, d.y)


def test_rescale_examples():
    d = Dataset(x=np.array([[2.0, 5.0, 10.0], [4.0, 5.0, -1.0], [6.0, 5.0, 3.0]]), y=[1.0, 2.0, 3.0])
    mm = rescale_features(d, "minmax")
    np.testing.assert_allclose(mm.x[:, 0], [0, 0.5, 1])
    np.testing.assert_array_equal(mm.x[:, 1], [0.5, 0.5, 0.5])
    rk = rescale_features(d, "rank")
    np.testing.assert_allclose(rk.x[:, 2], [5 / 6, 1 / 6, 3 / 6])
    np.testing.assert_array_equal(rk.y, d.y)
    assert rescale_features(d, "none") is d
    with pytest.raises(ValueError):
        rescale_features(d, "zscore")


matrices = hnp.arrays(
    np.float64,
    st.tuples(st.integers(2, 15), st.integers(1, 4)),
    elements=st.floats(-1e6, 1e6, allow_nan=False),
)


@settings(max_examples=150, deadline=None)
@given(matrices, st.sampled_from(["minmax", "rank"]))
def test_rescale_idempotent_and_preserves_names(x, mode):
    names = tuple(f"f{j}" for j in range(x.shape[1]))
    d = Dataset(x=x, y=np.arange(x.shape[0], dtype=float), feature_names=names)
    once = rescale_features(d, mode)
    twice = rescale_features(once, mode)
    np.testing.assert_allclose(twice.x, once.x, atol=1e-12)
    assert once.feature_names == names
    assert np.all((once.x >= 0) & (once.x <= 1))


@settings(max_examples=60, deadline=None)
@given(matrices, st.booleans())
def test_write_load_identity(tmp_path_factory, x, with_z):
    n = x.shape[0]
    y = np.linspace(-1, 1, n) ** 3
    z = np.linspace(0, 1, n) if with_z else None
    d = Dataset(x=x, y=y, z=z, index_name="Z" if with_z else None)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(d, path)
    back = load_csv(path, "y", index_col="Z" if with_z else None, center_response=False)
    np.testing.assert_allclose(back.x, d.x, atol=1e-12, rtol=0)
    np.testing.assert_allclose(back.y, d.y, atol=1e-12, rtol=0)
    if with_z:
        np.testing.assert_allclose(back.z, d.z, atol=1e-12, rtol=0)
