"""
Dataset ingestion and serialisation for every task family.

Tabular tasks read comma-separated UTF-8 files with a header row. Masks
and rasters read a header line

    dims=<2|3> shape=<a,b[,c]> spacing=<s1,s2[,s3]> [data_range=<L>]

followed by two grids of row-major whitespace-separated values separated
by a ``---`` line (prediction then reference for masks, reference then
test for rasters). 2D masks and rasters may also be given as two PNG
files joined by a comma.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from modules.metrics.cluster import ClusteredData
from modules.metrics.core import ConfusionMatrix, LabelVector, ShapeError, TaskFamily, confusion_matrix
from modules.metrics.correlate import VariablePair
from modules.metrics.imgqual import DataRange, RasterPair
from modules.metrics.regress import PairedSeries
from modules.metrics.segment import Mask
from modules.metrics.stattest import SampleGroups

logger = logging.getLogger(__name__)

GRID_SEPARATOR = "---"
PathLike = Union[str, Path]


class DatasetParseError(ValueError):
    """Input file does not follow the dataset grammar"""

    def __init__(self, message: str, path: Optional[PathLike] = None, line: Optional[int] = None,
                 field: Optional[str] = None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.field = field
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


@dataclass(frozen=True)
class ClassificationData:
    """True and predicted labels over one declared label set, plus optional scores"""
    y_true: LabelVector
    y_pred: LabelVector
    scores: Optional[np.ndarray] = None
    cm: ConfusionMatrix = field(init=False)

    def __post_init__(self):
        if self.y_true.labels != self.y_pred.labels:
            raise ShapeError(f"label sets differ: {self.y_true.labels} vs {self.y_pred.labels}")
        object.__setattr__(self, "cm", confusion_matrix(self.y_true, self.y_pred, self.y_true.labels))

    @classmethod
    def of(cls, y_true: Sequence[int], y_pred: Sequence[int], labels: Optional[Sequence[int]] = None,
           scores=None) -> "ClassificationData":
        labels = tuple(labels) if labels is not None else tuple(sorted(set(y_true) | set(y_pred)))
        return cls(LabelVector(np.asarray(y_true), labels), LabelVector(np.asarray(y_pred), labels),
                   None if scores is None else np.asarray(scores, dtype=float))

    @property
    def labels(self) -> Tuple[int, ...]:
        return self.y_true.labels


@dataclass(frozen=True)
class MaskPair:
    pred: Mask
    ref: Mask


TaskData = Union[ClassificationData, PairedSeries, ClusteredData, VariablePair, SampleGroups, MaskPair, RasterPair]


def n_classes_of(data: Any) -> int:
    """Label-set size used for the classification variant sweep"""
    return len(data.labels) if isinstance(data, ClassificationData) else 2


# ---------------------------------------------------------------------------
# Tabular input
# ---------------------------------------------------------------------------

def _read_table(path: Path) -> Tuple[List[str], List[Tuple[int, Dict[str, str]]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            header = [h.strip() for h in (reader.fieldnames or [])]
            if not header:
                raise DatasetParseError("missing header row", path, 1)
            reader.fieldnames = header
            rows = []
            for row in reader:
                if None in row or any(v is None for v in row.values()):
                    raise DatasetParseError(f"expected {len(header)} columns", path, reader.line_num)
                rows.append((reader.line_num, {k: v.strip() for k, v in row.items()}))
    except UnicodeDecodeError as e:
        raise DatasetParseError(f"not UTF-8 text: {e}", path)
    if not rows:
        raise DatasetParseError("no data rows", path, 2)
    return header, rows


def _require_columns(path: Path, header: Sequence[str], *names: str):
    for name in names:
        if name not in header:
            raise DatasetParseError(f"missing column (have {', '.join(header)})", path, 1, name)


def _cell(path: Path, line: int, row: Dict[str, str], name: str, kind=float):
    raw = row[name]
    try:
        value = kind(raw)
    except ValueError:
        raise DatasetParseError(f"cannot read '{raw}' as {kind.__name__}", path, line, name)
    if kind is float and not math.isfinite(value):
        raise DatasetParseError(f"non-finite value '{raw}'", path, line, name)
    return value


def _column(path: Path, rows, name: str, kind=float) -> List:
    return [_cell(path, line, row, name, kind) for line, row in rows]


def _load_classification(path: Path, truth_col: Optional[str]) -> ClassificationData:
    header, rows = _read_table(path)
    truth = truth_col or "y_true"
    _require_columns(path, header, truth, "y_pred")
    y_true = _column(path, rows, truth, int)
    y_pred = _column(path, rows, "y_pred", int)

    score_columns = {}
    for name in header:
        if name.startswith("p_"):
            try:
                score_columns[int(name[2:])] = name
            except ValueError:
                raise DatasetParseError("score columns are named p_<integer label>", path, 1, name)
    labels = tuple(sorted(set(y_true) | set(y_pred) | set(score_columns)))

    scores = None
    if score_columns:
        if set(score_columns) == set(labels):
            scores = np.column_stack([_column(path, rows, score_columns[label]) for label in labels])
        elif len(labels) == 2 and set(score_columns) == {labels[1]}:
            scores = np.asarray(_column(path, rows, score_columns[labels[1]]))
        else:
            raise DatasetParseError(f"score columns must cover every label {labels} or only label {labels[-1]}",
                                    path, 1, ",".join(sorted(score_columns.values())))
    return ClassificationData.of(y_true, y_pred, labels, scores)


def _load_regression(path: Path, truth_col: Optional[str]) -> PairedSeries:
    header, rows = _read_table(path)
    truth = truth_col or "y_true"
    _require_columns(path, header, truth, "y_pred")
    return PairedSeries(np.asarray(_column(path, rows, truth)), np.asarray(_column(path, rows, "y_pred")))


def centers_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.centers.csv")


def _load_clustering(path: Path, truth_col: Optional[str]) -> ClusteredData:
    header, rows = _read_table(path)
    label = truth_col or "label"
    _require_columns(path, header, label)
    features = [h for h in header if h != label]
    if not features:
        raise DatasetParseError("no feature columns", path, 1)
    X = np.column_stack([_column(path, rows, name) for name in features])
    labels = np.asarray(_column(path, rows, label, int))

    centers = None
    sidecar = centers_path(path)
    if sidecar.exists():
        center_header, center_rows = _read_table(sidecar)
        _require_columns(sidecar, center_header, *features)
        centers = np.column_stack([_column(sidecar, center_rows, name) for name in features])
        logger.debug(f"Loaded {centers.shape[0]} cluster centers from {sidecar}")
    return ClusteredData(X, labels, centers)


def _load_correlation(path: Path, truth_col: Optional[str]) -> VariablePair:
    header, rows = _read_table(path)
    x_name = truth_col or "x"
    _require_columns(path, header, x_name, "y")
    covariates = [h for h in header if h.startswith("z")]
    Z = np.column_stack([_column(path, rows, name) for name in covariates]) if covariates else None
    return VariablePair(np.asarray(_column(path, rows, x_name)), np.asarray(_column(path, rows, "y")), Z)


def _load_stattest(path: Path, truth_col: Optional[str]) -> SampleGroups:
    header, rows = _read_table(path)
    _require_columns(path, header, "group", truth_col or "value")
    groups: Dict[str, List[float]] = {}
    for line, row in rows:
        groups.setdefault(row["group"], []).append(_cell(path, line, row, truth_col or "value"))
    return SampleGroups(tuple(np.asarray(values) for values in groups.values()))


# ---------------------------------------------------------------------------
# Grid input
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridHeader:
    dims: int
    shape: Tuple[int, ...]
    spacing: Tuple[float, ...]
    data_range: Optional[float] = None


def _parse_header(path: Path, text: str) -> GridHeader:
    fields: Dict[str, str] = {}
    for token in text.split():
        if "=" not in token:
            raise DatasetParseError(f"expected key=value, got '{token}'", path, 1)
        key, value = token.split("=", 1)
        fields[key] = value
    for key in ("dims", "shape"):
        if key not in fields:
            raise DatasetParseError("missing header field", path, 1, key)
    unknown = sorted(set(fields) - {"dims", "shape", "spacing", "data_range"})
    if unknown:
        raise DatasetParseError("unknown header field", path, 1, unknown[0])

    def numbers(key: str, kind):
        try:
            return tuple(kind(v) for v in fields[key].split(","))
        except ValueError:
            raise DatasetParseError(f"cannot read '{fields[key]}'", path, 1, key)

    dims = numbers("dims", int)[0]
    if dims not in (2, 3):
        raise DatasetParseError(f"dims must be 2 or 3, got {dims}", path, 1, "dims")
    shape = numbers("shape", int)
    if len(shape) != dims or min(shape) < 1:
        raise DatasetParseError(f"shape {shape} does not match dims={dims}", path, 1, "shape")
    spacing = numbers("spacing", float) if "spacing" in fields else (1.0,) * dims
    if len(spacing) != dims or not all(math.isfinite(s) and s > 0 for s in spacing):
        raise DatasetParseError(f"spacing {spacing} must hold {dims} positive values", path, 1, "spacing")
    data_range = numbers("data_range", float)[0] if "data_range" in fields else None
    return GridHeader(dims, shape, spacing, data_range)


def read_grid_file(path: PathLike) -> Tuple[GridHeader, List[np.ndarray]]:
    """
    Parse a header line plus the grids that follow it

    Args:
        path: Grid text file

    Returns:
        Tuple[GridHeader, List[np.ndarray]]: Header and each grid reshaped to the header shape
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DatasetParseError("empty file", path, 1)
    header = _parse_header(path, lines[0])
    size = int(np.prod(header.shape))

    blocks: List[Tuple[int, List[float]]] = [(2, [])]
    for number, text in enumerate(lines[1:], start=2):
        stripped = text.strip()
        if stripped == GRID_SEPARATOR:
            blocks.append((number + 1, []))
            continue
        for j, token in enumerate(stripped.split()):
            try:
                blocks[-1][1].append(float(token))
            except ValueError:
                raise DatasetParseError(f"cannot read '{token}' as a number", path, number, f"value {j + 1}")

    grids = []
    for start, values in blocks:
        if len(values) != size:
            raise DatasetParseError(f"grid holds {len(values)} values, shape {header.shape} needs {size}",
                                    path, start, "values")
        grid = np.asarray(values).reshape(header.shape)
        if not np.all(np.isfinite(grid)):
            raise DatasetParseError("non-finite grid value", path, start, "values")
        grids.append(grid)
    return header, grids


def _two_grids(path: Path, grids: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    if len(grids) != 2:
        raise DatasetParseError(f"expected two grids separated by '{GRID_SEPARATOR}', got {len(grids)}", path)
    return grids[0], grids[1]


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as image:
            return np.asarray(image.convert("L"), dtype=float)
    except OSError as e:
        raise DatasetParseError(f"cannot read image: {e}", path)


def _png_pair(path: PathLike) -> Optional[Tuple[Path, Path]]:
    parts = str(path).split(",")
    if len(parts) == 2 and all(p.strip().lower().endswith(".png") for p in parts):
        return Path(parts[0].strip()), Path(parts[1].strip())
    return None


def load_mask(path: PathLike, ndim: Optional[int] = None) -> MaskPair:
    """
    Load a prediction/reference mask pair

    Args:
        path: Grid text file, or "pred.png,ref.png" (PNG masks are binarised at > 0)
        ndim: Required dimensionality, if any

    Returns:
        MaskPair: Validated masks
    """
    pngs = _png_pair(path)
    if pngs:
        pred, ref = (_read_png(p) > 0 for p in pngs)
        spacing = None
    else:
        path = Path(path)
        header, grids = read_grid_file(path)
        pred, ref = _two_grids(path, grids)
        for grid in (pred, ref):
            if not np.all(np.isin(grid, (0.0, 1.0))):
                raise DatasetParseError("mask values must be 0 or 1", path, field="values")
        spacing = header.spacing
    if ndim is not None and pred.ndim != ndim:
        raise DatasetParseError(f"expected a {ndim}D mask, got {pred.ndim}D", path, 1, "dims")
    return MaskPair(Mask(pred, spacing), Mask(ref, spacing))


def load_raster(path: PathLike, ndim: Optional[int] = None) -> RasterPair:
    """
    Load a reference/test raster pair

    Args:
        path: Grid text file, or "ref.png,test.png" (8-bit grey, declared range 255)
        ndim: Required dimensionality, if any

    Returns:
        RasterPair: Validated rasters with the declared range, if any
    """
    pngs = _png_pair(path)
    if pngs:
        ref, test = (_read_png(p) for p in pngs)
        declared = 255.0
    else:
        path = Path(path)
        header, grids = read_grid_file(path)
        ref, test = _two_grids(path, grids)
        declared = header.data_range
    if ndim is not None and ref.ndim != ndim:
        raise DatasetParseError(f"expected a {ndim}D raster, got {ref.ndim}D", path, 1, "dims")
    return RasterPair(ref, test, declared_max=declared,
                      data_range=DataRange.DECLARED if declared is not None else DataRange.OBSERVED_REF_RANGE)


_TABULAR_LOADERS = {
    TaskFamily.CLASSIFICATION: _load_classification,
    TaskFamily.REGRESSION: _load_regression,
    TaskFamily.CLUSTERING: _load_clustering,
    TaskFamily.CORRELATION: _load_correlation,
    TaskFamily.STATTEST: _load_stattest,
}


def load_dataset(path: PathLike, task, truth_col: Optional[str] = None) -> TaskData:
    """
    Load and validate one dataset

    Args:
        path: Input file
        task: Task family that fixes the grammar
        truth_col: Name of the truth column for tabular input

    Returns:
        TaskData: Task-specific container

    Raises:
        DatasetParseError: Grammar violation, with line and field
        MetricError: Shape or label violations
    """
    task = TaskFamily(task)
    if task in (TaskFamily.SEGMENTATION2D, TaskFamily.SEGMENTATION3D):
        data = load_mask(path, task.ndim)
    elif task in (TaskFamily.IMAGE2D, TaskFamily.IMAGE3D):
        data = load_raster(path, task.ndim)
    else:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"dataset not found: {path}")
        data = _TABULAR_LOADERS[task](path, truth_col)
    logger.info(f"✅ Loaded {task.value} dataset from {path}")
    return data


# ---------------------------------------------------------------------------
# Output in the same grammar
# ---------------------------------------------------------------------------

def _format_number(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() and abs(value) < 2**53 else repr(value)


def _write_table(path: Path, header: Sequence[str], columns: Sequence[Sequence[Any]]):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([v if isinstance(v, str) else _format_number(v) for v in row])


def _grid_text(header: str, grids: Sequence[np.ndarray]) -> str:
    lines = [header]
    for i, grid in enumerate(grids):
        if i:
            lines.append(GRID_SEPARATOR)
        for row in np.asarray(grid, dtype=float).reshape(-1, grid.shape[-1]):
            lines.append(" ".join(_format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def _grid_header(shape: Tuple[int, ...], spacing: Sequence[float], data_range: Optional[float] = None) -> str:
    text = (f"dims={len(shape)} shape={','.join(str(n) for n in shape)} "
            f"spacing={','.join(_format_number(s) for s in spacing)}")
    if data_range is not None:
        text += f" data_range={_format_number(data_range)}"
    return text


def write_dataset(data: TaskData, path: PathLike) -> List[Path]:
    """
    Write a dataset in the input grammar

    Args:
        data: Task container
        path: Output file

    Returns:
        List[Path]: Files written (clustering adds a centers sidecar)
    """
    path = Path(path)
    written = [path]
    if isinstance(data, ClassificationData):
        header = ["y_true", "y_pred"]
        columns: List[Sequence[Any]] = [data.y_true.values.tolist(), data.y_pred.values.tolist()]
        if data.scores is not None:
            if data.scores.ndim == 1:
                header.append(f"p_{data.labels[1]}")
                columns.append(data.scores.tolist())
            else:
                header.extend(f"p_{label}" for label in data.labels)
                columns.extend(data.scores[:, i].tolist() for i in range(len(data.labels)))
        _write_table(path, header, columns)
    elif isinstance(data, PairedSeries):
        _write_table(path, ["y_true", "y_pred"], [data.y.tolist(), data.y_hat.tolist()])
    elif isinstance(data, ClusteredData):
        features = [f"f{i}" for i in range(data.X.shape[1])]
        _write_table(path, ["label"] + features, [data.labels.tolist()] + [data.X[:, i].tolist() for i in
                                                                             range(data.X.shape[1])])
        if data.centers is not None:
            sidecar = centers_path(path)
            _write_table(sidecar, features, [data.centers[:, i].tolist() for i in range(data.centers.shape[1])])
            written.append(sidecar)
    elif isinstance(data, VariablePair):
        header = ["x", "y"]
        columns = [data.x.tolist(), data.y.tolist()]
        if data.Z is not None:
            header.extend(f"z{i + 1}" for i in range(data.Z.shape[1]))
            columns.extend(data.Z[:, i].tolist() for i in range(data.Z.shape[1]))
        _write_table(path, header, columns)
    elif isinstance(data, SampleGroups):
        names = [f"g{i + 1}" for i in range(data.g) for _ in range(data.groups[i].size)]
        _write_table(path, ["group", "value"], [names, np.concatenate(data.groups).tolist()])
    elif isinstance(data, MaskPair):
        text = _grid_text(_grid_header(data.pred.shape, data.pred.spacing),
                          [data.pred.grid.astype(float), data.ref.grid.astype(float)])
        path.write_text(text, encoding="utf-8")
    elif isinstance(data, RasterPair):
        text = _grid_text(_grid_header(data.ref.shape, (1.0,) * data.ref.ndim, data.declared_max),
                          [data.ref, data.test])
        path.write_text(text, encoding="utf-8")
    else:
        raise TypeError(f"cannot serialise {type(data).__name__}")
    logger.info(f"✅ Wrote {', '.join(str(p) for p in written)}")
    return written
