import numpy as np
import pytest
from PIL import Image

from modules.harness.datasets import (
    ClassificationData, DatasetParseError, MaskPair, load_dataset, load_mask, load_raster, read_grid_file,
    write_dataset,
)
from modules.harness.fixtures import random_dataset
from modules.metrics.cluster import ClusteredData
from modules.metrics.core import LabelError
from modules.metrics.correlate import VariablePair
from modules.metrics.imgqual import DataRange, RasterPair
from modules.metrics.regress import PairedSeries
from modules.metrics.segment import Mask
from modules.metrics.stattest import SampleGroups


def test_classification_with_positive_scores(tmp_path):
    data = ClassificationData.of([0, 1, 1, 0], [0, 1, 0, 0], scores=[0.1, 0.9, 0.4, 0.2])
    path = tmp_path / "cls.csv"
    write_dataset(data, path)
    assert path.read_text().splitlines()[0] == "y_true,y_pred,p_1"

    loaded = load_dataset(path, "classification")
    assert loaded.labels == (0, 1)
    np.testing.assert_array_equal(loaded.cm.counts, data.cm.counts)
    np.testing.assert_allclose(loaded.scores, [0.1, 0.9, 0.4, 0.2])


def test_classification_with_per_class_scores(tmp_path):
    data = random_dataset("classification")
    path = tmp_path / "cls.csv"
    write_dataset(data, path)
    loaded = load_dataset(path, "classification")
    assert loaded.labels == (0, 1, 2)
    assert loaded.scores.shape == (200, 3)
    np.testing.assert_array_equal(loaded.y_pred.values, data.y_pred.values)


def test_truth_column_override(tmp_path):
    path = tmp_path / "cls.csv"
    path.write_text("label,y_pred\n1,1\n0,1\n")
    data = load_dataset(path, "classification", truth_col="label")
    assert data.y_true.values.tolist() == [1, 0]


def test_label_sets_must_agree():
    with pytest.raises(LabelError):
        ClassificationData.of([0, 1, 2], [0, 1, 1], labels=(0, 1))


def test_bad_cell_reports_line_and_field(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y_true,y_pred\n0,1\n1,abc\n")
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path, "classification")
    assert info.value.line == 3
    assert info.value.field == "y_pred"
    assert "line 3" in str(info.value)


def test_missing_column_and_short_row(tmp_path):
    path = tmp_path / "missing.csv"
    path.write_text("y_true,prediction\n0,1\n")
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path, "regression")
    assert (info.value.line, info.value.field) == (1, "y_pred")

    path.write_text("y_true,y_pred\n1.0,2.0\n3.0\n")
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path, "regression")
    assert info.value.line == 3


def test_non_finite_and_empty_tables(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("y_true,y_pred\n1.0,nan\n2.0,3.0\n")
    with pytest.raises(DatasetParseError, match="non-finite"):
        load_dataset(path, "regression")

    path.write_text("y_true,y_pred\n")
    with pytest.raises(DatasetParseError, match="no data rows"):
        load_dataset(path, "regression")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "absent.csv", "regression")


def test_regression_round_trip(tmp_path):
    data = PairedSeries(np.array([1.5, 2.0, 3.25]), np.array([1.0, 2.5, 3.0]))
    write_dataset(data, tmp_path / "reg.csv")
    loaded = load_dataset(tmp_path / "reg.csv", "regression")
    np.testing.assert_array_equal(loaded.y, data.y)
    np.testing.assert_array_equal(loaded.y_hat, data.y_hat)


def test_clustering_writes_and_reads_centers_sidecar(tmp_path):
    X = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0], [11.0, 10.0], [0.0, 9.0], [1.0, 9.0]])
    data = ClusteredData(X, np.array([0, 0, 1, 1, 2, 2]), np.array([[0.5, 0.0], [10.5, 10.0], [0.5, 9.0]]))
    written = write_dataset(data, tmp_path / "points.csv")
    assert [p.name for p in written] == ["points.csv", "points.centers.csv"]

    loaded = load_dataset(tmp_path / "points.csv", "clustering")
    np.testing.assert_array_equal(loaded.X, X)
    np.testing.assert_array_equal(loaded.centers, data.centers)


def test_correlation_covariates(tmp_path):
    data = VariablePair(np.arange(5.0), np.arange(5.0) ** 2, np.arange(10.0).reshape(5, 2))
    write_dataset(data, tmp_path / "corr.csv")
    assert (tmp_path / "corr.csv").read_text().splitlines()[0] == "x,y,z1,z2"
    loaded = load_dataset(tmp_path / "corr.csv", "correlation")
    assert loaded.covariate_count == 2
    np.testing.assert_array_equal(loaded.Z, data.Z)


def test_stattest_groups_keep_file_order(tmp_path):
    path = tmp_path / "groups.csv"
    path.write_text("group,value\nb,1\nb,2\na,5\na,6\na,7\n")
    data = load_dataset(path, "stattest")
    assert data.sizes == [2, 3]
    assert data.groups[0].tolist() == [1.0, 2.0]

    write_dataset(SampleGroups.of([1.0, 2.0], [3.0, 4.0, 5.0]), tmp_path / "out.csv")
    assert load_dataset(tmp_path / "out.csv", "stattest").sizes == [2, 3]


def test_mask_grid_round_trip_keeps_spacing(tmp_path):
    pred = np.zeros((3, 4), dtype=bool)
    pred[1, 1:3] = True
    ref = np.zeros((3, 4), dtype=bool)
    ref[1, 2:4] = True
    path = tmp_path / "mask.txt"
    write_dataset(MaskPair(Mask(pred, (0.5, 2.0)), Mask(ref, (0.5, 2.0))), path)
    assert path.read_text().splitlines()[0] == "dims=2 shape=3,4 spacing=0.5,2"

    loaded = load_dataset(path, "segmentation2d")
    np.testing.assert_array_equal(loaded.pred.grid, pred)
    np.testing.assert_array_equal(loaded.ref.grid, ref)
    assert loaded.pred.spacing == (0.5, 2.0)


def test_volume_round_trip(tmp_path):
    data = random_dataset("segmentation3d")
    write_dataset(data, tmp_path / "vol.txt")
    loaded = load_dataset(tmp_path / "vol.txt", "segmentation3d")
    np.testing.assert_array_equal(loaded.ref.grid, data.ref.grid)

    with pytest.raises(DatasetParseError, match="expected a 2D mask"):
        load_dataset(tmp_path / "vol.txt", "segmentation2d")


def test_raster_declared_range(tmp_path):
    ref = np.arange(6.0).reshape(2, 3)
    path = tmp_path / "img.txt"
    write_dataset(RasterPair(ref, ref + 0.5, declared_max=255.0), path)
    loaded = load_dataset(path, "image2d")
    assert loaded.declared_max == 255.0
    assert loaded.data_range == DataRange.DECLARED
    np.testing.assert_array_equal(loaded.test, ref + 0.5)

    path.write_text("dims=2 shape=1,2\n1 2\n---\n1 3\n")
    assert load_raster(path).data_range == DataRange.OBSERVED_REF_RANGE


@pytest.mark.parametrize("text,line,field", [
    ("dims=4 shape=1,1\n1\n---\n1\n", 1, "dims"),
    ("dims=2 shape=2\n1 1\n---\n1 1\n", 1, "shape"),
    ("dims=2 shape=1,2 spacing=1,-1\n1 1\n---\n1 1\n", 1, "spacing"),
    ("dims=2 shape=1,2 colour=red\n1 1\n---\n1 1\n", 1, "colour"),
    ("shape=1,2\n1 1\n---\n1 1\n", 1, "dims"),
    ("dims=2 shape=1,2\n1 x\n---\n1 1\n", 2, "value 2"),
    ("dims=2 shape=1,2\n1 1\n---\n1\n", 4, "values"),
])
def test_grid_parse_errors(tmp_path, text, line, field):
    path = tmp_path / "grid.txt"
    path.write_text(text)
    with pytest.raises(DatasetParseError) as info:
        read_grid_file(path)
    assert (info.value.line, info.value.field) == (line, field)


def test_mask_values_must_be_binary(tmp_path):
    path = tmp_path / "mask.txt"
    path.write_text("dims=2 shape=1,2\n0 2\n---\n0 1\n")
    with pytest.raises(DatasetParseError, match="0 or 1"):
        load_mask(path)

    path.write_text("dims=2 shape=1,2\n0 1\n")
    with pytest.raises(DatasetParseError, match="two grids"):
        load_mask(path)


def test_png_pairs(tmp_path):
    a = np.zeros((4, 4), dtype=np.uint8)
    a[1:3, 1:3] = 255
    b = np.zeros((4, 4), dtype=np.uint8)
    b[1:3, 1:4] = 200
    Image.fromarray(a).save(tmp_path / "a.png")
    Image.fromarray(b).save(tmp_path / "b.png")
    spec = f"{tmp_path / 'a.png'},{tmp_path / 'b.png'}"

    masks = load_dataset(spec, "segmentation2d")
    assert int(masks.pred.grid.sum()) == 4
    assert int(masks.ref.grid.sum()) == 6

    rasters = load_dataset(spec, "image2d")
    assert rasters.declared_max == 255.0
    assert rasters.ref.max() == 255.0
    assert rasters.test.max() == 200.0
