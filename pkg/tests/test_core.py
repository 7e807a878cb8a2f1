import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lsc.core import (
    ClusterModel,
    DataError,
    DataMatrix,
    LineSeries,
    as_labels,
    lines_to_array,
    to_line_space,
    to_matrix,
)


def test_single_value_line():
    (line,) = to_line_space(DataMatrix([[7.0]]))
    assert line.points == [(1, 7.0)]


def test_rows_become_lines():
    lines = to_line_space(DataMatrix([[1, 2, 3], [4, 5, 6]]))
    assert [ln.points for ln in lines] == [
        [(1, 1.0), (2, 2.0), (3, 3.0)],
        [(1, 4.0), (2, 5.0), (3, 6.0)],
    ]
    assert [ln.index for ln in lines] == [0, 1]


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-1e6, 1e6)))
def test_line_space_round_trip(values):
    m = DataMatrix(values)
    assert to_matrix(to_line_space(m)) == m


@pytest.mark.parametrize("bad", [[[np.nan, 1.0]], [[np.inf]], [], [[[1.0]]]])
def test_matrix_rejects_bad_input(bad):
    with pytest.raises(DataError):
        DataMatrix(bad)


def test_one_dimensional_input_is_one_row():
    assert DataMatrix([1.0, 2.0]).shape == (1, 2)


def test_matrix_is_read_only():
    m = DataMatrix([[1.0, 2.0]])
    with pytest.raises(ValueError):
        m.values[0, 0] = 5.0


def test_matrix_copies_input():
    a = np.array([[1.0, 2.0]])
    m = DataMatrix(a)
    a[0, 0] = 9.0
    assert m.values[0, 0] == 1.0


def test_lines_of_unequal_length_rejected():
    with pytest.raises(DataError):
        lines_to_array([LineSeries(0, [0, 1, 2]), LineSeries(1, [0, 2])])


def test_as_labels_checks_range():
    assert as_labels([0, 1, 1]).dtype == np.int64
    with pytest.raises(DataError):
        as_labels([0, 3], n_clusters=2)
    with pytest.raises(DataError):
        as_labels([-1, 0])


def test_model_center_lines():
    model = ClusterModel(np.array([[1.0, 2.0]]), np.array([0, 0]), 1, True, [], {}, {})
    assert model.k == 1
    assert model.center_lines[0].points == [(1, 1.0), (2, 2.0)]
