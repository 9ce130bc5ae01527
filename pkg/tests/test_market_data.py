import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from racorn import (
    DataError,
    PriceRelativeSeries,
    PriceSeries,
    derive_relatives,
    load_csv,
    window,
    write_csv,
)


def test_relatives_are_ratios():
    p = PriceSeries(np.array([[100.0], [110.0], [99.0]]), ("X",))
    np.testing.assert_allclose(derive_relatives(p).relatives[:, 0], [1.10, 0.90])


def test_constant_prices_give_unit_relatives():
    p = PriceSeries(np.full((3, 1), 50.0), ("X",))
    assert derive_relatives(p).relatives[:, 0].tolist() == [1.0, 1.0]


def test_zero_price_rejected_with_position():
    with pytest.raises(DataError, match=r"row 1, column 0: 0\.0"):
        PriceSeries(np.array([[100.0], [0.0], [99.0]]), ("X",))


def test_nonfinite_relative_rejected():
    with pytest.raises(DataError):
        PriceRelativeSeries(np.array([[1.0, np.inf]]), ())


def test_labels_carry_through():
    p = PriceSeries(np.array([[1.0, 2.0], [2.0, 2.0], [4.0, 1.0]]), ("a", "b"), ("d0", "d1", "d2"))
    r = derive_relatives(p)
    assert r.period_labels == ("d1", "d2")
    assert r.start_label == "d0"
    assert r.asset_names == ("a", "b")


def test_series_is_read_only():
    r = PriceRelativeSeries(np.ones((2, 2)), ())
    with pytest.raises(ValueError):
        r.relatives[0, 0] = 2.0


def test_csv_round_trip_prices(tmp_path):
    p = PriceSeries(np.array([[1.5, 2.0], [1.25, 2.5], [1.75, 2.25]]), ("AA", "BB"),
                    ("2001-01-02", "2001-01-03", "2001-01-04"))
    path = tmp_path / "p.csv"
    write_csv(path, p)
    q = load_csv(path, "prices")
    assert isinstance(q, PriceSeries)
    assert (q.n_raw, q.m) == (3, 2)
    assert q.asset_names == p.asset_names and q.period_labels == p.period_labels
    np.testing.assert_array_equal(q.closes, p.closes)


def test_csv_round_trip_without_dates(tmp_path):
    r = PriceRelativeSeries(np.array([[1.1, 0.9], [1.0, 1.2]]), ("A", "B"))
    write_csv(tmp_path / "r.csv", r)
    q = load_csv(tmp_path / "r.csv", "relatives")
    np.testing.assert_array_equal(q.relatives, r.relatives)


def test_missing_cell_cites_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("A,B\n1.0,2.0\n1.1,\n1.2,2.2\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(path, "prices")


def test_ragged_row_cites_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("A,B\n1.0,2.0\n1.1,2.1,3.3\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(path, "prices")


def test_non_numeric_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("date,A,B\n2001-01-01,1.0,2.0\n2001-01-02,abc,2.0\n")
    with pytest.raises(DataError, match="line 3.*'abc'"):
        load_csv(path, "prices")


def test_negative_relative_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("A,B\n1.0,-0.5\n")
    with pytest.raises(DataError, match="non-positive"):
        load_csv(path, "relatives")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError, match="empty"):
        load_csv(path, "prices")


def test_mode_is_explicit(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("A\n1.0\n")
    with pytest.raises(ValueError):
        load_csv(path, "auto")


def test_window_unrolled():
    r = PriceRelativeSeries(np.array([[1.1, 0.9], [1.0, 1.2]]), ())
    assert window(r, 2, 2).flat.tolist() == [1.1, 0.9, 1.0, 1.2]
    assert window(r, 1, 1).flat.tolist() == [1.1, 0.9]
    with pytest.raises(IndexError):
        window(r, 1, 2)


def test_window_copies_storage():
    r = PriceRelativeSeries(np.arange(1.0, 13.0).reshape(6, 2), ())
    a, b = window(r, 3, 2), window(r, 4, 2)
    assert not np.shares_memory(a.flat, b.flat)
    assert a.flat.size == 4


prices = arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 4)),
                elements=st.floats(0.01, 1e4))


@settings(max_examples=60, deadline=None)
@given(prices, st.floats(1e-3, 1e3), st.data())
def test_scaling_one_asset_leaves_relatives_unchanged(closes, c, data):
    col = data.draw(st.integers(0, closes.shape[1] - 1))
    scaled = closes.copy()
    scaled[:, col] *= c
    a = derive_relatives(PriceSeries(closes, ())).relatives
    b = derive_relatives(PriceSeries(scaled, ())).relatives
    np.testing.assert_allclose(a, b, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(prices)
def test_cumprod_recovers_normalized_prices(closes):
    rel = derive_relatives(PriceSeries(closes, ())).relatives
    back = np.cumprod(rel, axis=0)
    np.testing.assert_allclose(back, closes[1:] / closes[0], rtol=1e-12)
