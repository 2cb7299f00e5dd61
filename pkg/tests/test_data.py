import numpy as np
import pytest

from lshstream import (
    CsvParseError,
    Dataset,
    ScalerParams,
    SynthSpec,
    apply_scaler,
    load_csv,
    robust_scale,
    select_subset,
    synth_stream,
    write_csv,
)


def test_csv_round_trip(tmp_path):
    path = tmp_path / "data.csv"
    original = Dataset(
        points=np.random.default_rng(0).normal(0, 5, (40, 6)),
        labels=np.random.default_rng(1).random(40) < 0.2,
    )
    write_csv(original, path)
    loaded = load_csv(path, label_column="label")
    assert loaded.m == 6
    assert loaded.n == 40
    assert np.array_equal(loaded.points, original.points)
    assert np.array_equal(loaded.labels, original.labels)
    assert loaded.column_names == [f"x{i}" for i in range(6)]


def test_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("a,b,c\n")
    dataset = load_csv(path)
    assert dataset.n == 0
    assert dataset.m == 3


def test_csv_text_cell_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n1,oops\n")
    with pytest.raises(CsvParseError, match=":3:"):
        load_csv(path)


def test_csv_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("a,b\n1,2\n1\n")
    with pytest.raises(CsvParseError, match=":3:"):
        load_csv(path)


def test_csv_bad_label(tmp_path):
    path = tmp_path / "label.csv"
    path.write_text("a,label\n1,0\n2,2\n")
    with pytest.raises(CsvParseError, match="label"):
        load_csv(path, label_column="label")


def test_csv_unknown_label_column(tmp_path):
    path = tmp_path / "nolabel.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(CsvParseError):
        load_csv(path, label_column="y")


def test_csv_non_finite_cell(tmp_path):
    path = tmp_path / "inf.csv"
    path.write_text("a,b\n1,inf\n")
    with pytest.raises(CsvParseError, match=":2:"):
        load_csv(path)


def test_csv_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_csv(tmp_path / "absent.csv")


def test_robust_scale_known_quantiles():
    # column {1..5}: median 3, q25 2, q75 4 under linear interpolation
    dataset = Dataset(points=np.array([[1.0], [2.0], [3.0], [4.0], [5.0]]))
    scaled, params = robust_scale(dataset)
    assert params.median[0] == 3.0
    assert params.iqr[0] == 2.0
    assert scaled.points[-1, 0] == 1.0
    assert scaled.points[0, 0] == -1.0


def test_robust_scale_constant_column_warns():
    dataset = Dataset(points=np.column_stack([np.ones(10), np.arange(10.0)]))
    with pytest.warns(UserWarning, match="zero interquartile"):
        scaled, _ = robust_scale(dataset)
    assert np.all(scaled.points[:, 0] == 0.0)
    assert scaled.points[:, 1].max() > 0


def test_robust_scale_idempotent():
    rng = np.random.default_rng(5)
    dataset = Dataset(points=rng.lognormal(0, 1, (500, 3)))
    once, _ = robust_scale(dataset)
    twice, _ = robust_scale(once)
    assert np.allclose(once.points, twice.points, atol=1e-12)


def test_robust_scale_empty_rejected():
    with pytest.raises(ValueError):
        robust_scale(Dataset(points=np.zeros((0, 2))))


def test_apply_scaler_dimension_mismatch():
    params = ScalerParams(median=np.zeros(2), iqr=np.ones(2))
    with pytest.raises(ValueError):
        apply_scaler(Dataset(points=np.ones((3, 3))), params)


def test_scaler_params_json_round_trip():
    params = ScalerParams(
        median=np.array([1.0, 2.0]), iqr=np.array([0.5, 4.0]), column_names=["a", "b"]
    )
    parsed = ScalerParams.from_json(params.to_json())
    assert np.array_equal(parsed.median, params.median)
    assert np.array_equal(parsed.iqr, params.iqr)
    assert parsed.column_names == ["a", "b"]


def test_select_subset_whole_dataset():
    dataset = Dataset(points=np.arange(20.0).reshape(10, 2))
    subset = select_subset(dataset, 10, np.random.default_rng(0))
    assert np.array_equal(subset.points, dataset.points)


def test_select_subset_contiguous_ordered():
    dataset = Dataset(
        points=np.arange(100.0).reshape(50, 2),
        labels=np.arange(50) % 2 == 0,
    )
    subset = select_subset(dataset, 8, np.random.default_rng(4))
    start = int(subset.points[0, 0] // 2)
    assert np.array_equal(subset.points, dataset.points[start : start + 8])
    assert np.array_equal(subset.labels, dataset.labels[start : start + 8])


def test_select_subset_too_large():
    dataset = Dataset(points=np.ones((5, 2)))
    with pytest.raises(ValueError):
        select_subset(dataset, 6, np.random.default_rng(0))


def test_select_subset_varies_with_seed():
    dataset = Dataset(points=np.arange(2000.0).reshape(1000, 2))
    starts = {
        select_subset(dataset, 10, np.random.default_rng(seed)).points[0, 0]
        for seed in range(10)
    }
    assert len(starts) > 1


def test_synth_no_outliers():
    data = synth_stream(SynthSpec(n=500, dims=3, outlier_rate=0.0, seed=1))
    assert not data.labels.any()
    assert data.points.shape == (500, 3)


def test_synth_outlier_rate_concentrates():
    data = synth_stream(SynthSpec(n=10_000, dims=4, outlier_rate=0.02, seed=2))
    count = int(data.labels.sum())
    sigma = np.sqrt(10_000 * 0.02 * 0.98)
    assert abs(count - 200) <= 3 * sigma


def test_synth_drift_shifts_mean():
    spec = SynthSpec(
        n=10_000, dims=3, outlier_rate=0.0, drift_at=5000, drift_shift=4.0, seed=3
    )
    data = synth_stream(spec)
    before = data.points[:5000, 0].mean()
    after = data.points[5000:, 0].mean()
    assert abs((after - before) - 4.0) < 0.1


def test_synth_deterministic():
    a = synth_stream(SynthSpec(n=100, seed=9))
    b = synth_stream(SynthSpec(n=100, seed=9))
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.labels, b.labels)


def test_synth_validation():
    with pytest.raises(ValueError):
        SynthSpec(n=0)
    with pytest.raises(ValueError):
        SynthSpec(n=10, outlier_rate=0.5)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(points=np.ones((3, 2)), labels=np.array([True]))
    with pytest.raises(ValueError):
        Dataset(points=np.ones((3, 2)), column_names=["only_one"])
