import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from admaiora.airtime import ParameterError
from admaiora.radio import (
    PathLossModel,
    Position,
    SensitivityTable,
    build_rssi_matrix,
    path_loss,
    reachable_sfs,
    rssi,
    RssiMatrix,
)

import oracles

DEFAULT_MODEL = PathLossModel()


def test_path_loss_reference_and_decade():
    assert path_loss(DEFAULT_MODEL, 40.0) == pytest.approx(127.41)
    assert path_loss(DEFAULT_MODEL, 400.0) == pytest.approx(148.21)
    other = PathLossModel(l0=100.0, d0=10.0, gamma=3.0)
    assert path_loss(other, 10.0) == pytest.approx(100.0)


@pytest.mark.parametrize("d", [0.0, -5.0])
def test_path_loss_rejects_non_positive_distance(d):
    with pytest.raises(ParameterError):
        path_loss(DEFAULT_MODEL, d)


def test_rssi_examples():
    assert rssi(14.0, DEFAULT_MODEL, 40.0) == pytest.approx(-113.41)
    assert rssi(0.0, DEFAULT_MODEL, 400.0) == pytest.approx(-148.21)


@given(st.floats(1.0, 5000.0), st.floats(1.0, 5000.0))
def test_loss_monotone_in_distance(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert path_loss(DEFAULT_MODEL, lo) < path_loss(DEFAULT_MODEL, hi)
    assert rssi(14, DEFAULT_MODEL, lo) > rssi(14, DEFAULT_MODEL, hi)
    assert path_loss(DEFAULT_MODEL, hi) == pytest.approx(oracles.log_distance_loss(hi))


def test_shadowing_draws_from_rng():
    model = PathLossModel(sigma2=16.0)
    a = path_loss(model, np.full(1000, 40.0), np.random.default_rng(1))
    b = path_loss(model, np.full(1000, 40.0), np.random.default_rng(1))
    assert np.array_equal(a, b)
    assert abs(np.mean(a) - 127.41) < 0.5 and abs(np.std(a) - 4.0) < 0.3


def test_build_rssi_matrix():
    m = build_rssi_matrix([Position(40, 0)], [Position(0, 0)])
    assert m.r.shape == (1, 1)
    assert m.r[0, 0] == pytest.approx(-113.41)

    # co-located node clamps to 1 m
    m = build_rssi_matrix([Position(0, 0)], [Position(0, 0)])
    assert m.r[0, 0] == pytest.approx(14 - path_loss(DEFAULT_MODEL, 1.0))

    m = build_rssi_matrix([Position(0, 50)], [Position(-30, 0), Position(30, 0)])
    assert m.r[0, 0] == m.r[1, 0]

    with pytest.raises(ParameterError):
        build_rssi_matrix([], [Position(0, 0)])


def test_build_rssi_matrix_is_reproducible_with_shadowing():
    nodes = [Position(x, 10) for x in range(1, 50)]
    gws = [Position(0, 0), Position(100, 0)]
    model = PathLossModel(sigma2=9.0)
    a = build_rssi_matrix(nodes, gws, model, rng=np.random.default_rng(7)).r
    b = build_rssi_matrix(nodes, gws, model, rng=np.random.default_rng(7)).r
    assert a.tobytes() == b.tobytes()


def test_reachable_sfs_examples():
    sens = SensitivityTable()
    m = RssiMatrix(np.array([[-120.0, -127.0, -200.0]]))
    assert reachable_sfs(m, sens, 0, 125_000) == [{7, 8, 9, 10, 11, 12}]
    assert reachable_sfs(m, sens, 1, 125_000) == [{9, 10, 11, 12}]
    assert reachable_sfs(m, sens, 2, 125_000) == [set()]


def test_sensitivity_table_rejects_non_monotone():
    with pytest.raises(ParameterError):
        SensitivityTable.from_125k([-123, -126, -125, -132, -134.5, -137])
    with pytest.raises(ParameterError):
        SensitivityTable(np.zeros((5, 1)))
    one_col = SensitivityTable(np.array([-123, -126, -129, -132, -134.5, -137.0]))
    with pytest.raises(ParameterError):
        one_col.column(250_000)


@given(st.lists(st.floats(-150, -100), min_size=6, max_size=6), st.floats(-160, -90))
def test_reachable_sets_are_upward_closed(values, r):
    try:
        sens = SensitivityTable.from_125k(values)
    except ParameterError:
        assert not all(b < a for a, b in zip(values, values[1:]))
        return
    reach = reachable_sfs(RssiMatrix(np.array([[r]])), sens, 0, 125_000)[0]
    for sf in reach:
        assert all(s in reach for s in range(sf, 13))
