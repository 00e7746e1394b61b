"""File formats: dataset manifests, detection grids, entities, predictions, reports.

Manifest (JSON, ``"schema": 1``)::

    {"schema": 1,
     "items": [{"id": "doc-001",
                "image_path": "images/doc-001.png",
                "quad": [[x, y], [x, y], [x, y], [x, y]],
                "entities_path": "entities/doc-001.json",   # optional
                "grid_path": "grids/doc-001.json",          # optional
                "pred_quad": [[x, y], ...]}]}               # optional

Relative paths resolve against the manifest's directory. Quads are
reordered to TL, TR, BR, BL on load.

Grid files are either JSON ``{"rows", "cols", "stride", "alpha", "data"}``
with ``data`` the row-major flat list of ``rows * cols * 7`` numbers, or a
binary blob: a 16-byte header of four little-endian uint32 (rows, cols,
stride, round(alpha * 1000)) followed by little-endian float32 data.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .detect import N_CHANNELS, DetectionGrid
from .exceptions import (
    DanglingPath,
    DataError,
    DataIOError,
    DuplicateId,
    MalformedFile,
    ManifestNotFound,
    OutOfRange,
    ShapeMismatch,
)
from .geometry import order_quad, validate_quad
from .ocr_metric import Entity

SCHEMA_VERSION = 1
_GRID_HEADER = struct.Struct("<4I")


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    try:
        with open(tmp, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise DataIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except FileNotFoundError as exc:
        raise DataIOError(f"file not found: {path}") from exc
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_json(path):
    raw = _read_bytes(path)
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"{path}: not valid JSON ({exc})") from exc


def _parse_quad(value, where):
    try:
        q = np.asarray(value, dtype=np.float64)
        if q.shape != (4, 2):
            raise ValueError(f"expected 4 [x, y] pairs, got shape {q.shape}")
        return validate_quad(order_quad(q))
    except (ValueError, TypeError) as exc:
        raise MalformedFile(f"{where}: invalid quad ({exc})") from exc


def quad_to_json(quad):
    return [[float(x), float(y)] for x, y in np.asarray(quad, dtype=np.float64)]


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class ManifestItem:
    id: str
    image_path: Path
    quad: np.ndarray
    entities_path: Path | None = None
    grid_path: Path | None = None
    pred_quad: np.ndarray | None = None


@dataclass(frozen=True)
class DatasetManifest:
    items: tuple = ()
    root: Path = Path(".")

    @property
    def ids(self):
        return [item.id for item in self.items]

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def get(self, item_id):
        for item in self.items:
            if item.id == item_id:
                return item
        raise KeyError(item_id)


def load_manifest(path, check_paths=True):
    """Parse and validate a manifest file.

    Raises:
        ManifestNotFound: the manifest itself is missing.
        MalformedFile: bad JSON, wrong schema or invalid fields.
        DuplicateId: two items share an id.
        DanglingPath: a referenced file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestNotFound(f"manifest not found: {path}")
    doc = read_json(path)
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_VERSION:
        raise MalformedFile(f"{path}: expected an object with \"schema\": {SCHEMA_VERSION}")
    raw_items = doc.get("items")
    if not isinstance(raw_items, list):
        raise MalformedFile(f"{path}: \"items\" must be a list")
    root = path.parent
    seen = set()
    items = []
    for n, raw in enumerate(raw_items):
        where = f"{path}: item {n}"
        if not isinstance(raw, dict):
            raise MalformedFile(f"{where}: not an object")
        item_id = raw.get("id")
        if not isinstance(item_id, str) or not item_id:
            raise MalformedFile(f"{where}: missing string \"id\"")
        if item_id in seen:
            raise DuplicateId(item_id)
        seen.add(item_id)
        if not isinstance(raw.get("image_path"), str):
            raise MalformedFile(f"{where}: missing \"image_path\"")
        paths = {}
        for key in ("image_path", "entities_path", "grid_path"):
            value = raw.get(key)
            if value is None:
                paths[key] = None
                continue
            if not isinstance(value, str):
                raise MalformedFile(f"{where}: \"{key}\" must be a string")
            resolved = root / value
            if check_paths and not resolved.is_file():
                raise DanglingPath(resolved, item_id)
            paths[key] = resolved
        pred = raw.get("pred_quad")
        items.append(
            ManifestItem(
                id=item_id,
                image_path=paths["image_path"],
                quad=_parse_quad(raw.get("quad"), where),
                entities_path=paths["entities_path"],
                grid_path=paths["grid_path"],
                pred_quad=None if pred is None else _parse_quad(pred, f"{where} pred_quad"),
            )
        )
    return DatasetManifest(tuple(items), root)


def save_manifest(manifest, path):
    """Write ``manifest`` with paths relative to the destination directory."""
    base = Path(path).parent.resolve()

    def rel(p):
        if p is None:
            return None
        return os.path.relpath(Path(p).resolve(), base)

    items = []
    for item in manifest.items:
        entry = {"id": item.id, "image_path": rel(item.image_path), "quad": quad_to_json(item.quad)}
        if item.entities_path is not None:
            entry["entities_path"] = rel(item.entities_path)
        if item.grid_path is not None:
            entry["grid_path"] = rel(item.grid_path)
        if item.pred_quad is not None:
            entry["pred_quad"] = quad_to_json(item.pred_quad)
        items.append(entry)
    atomic_write(path, json.dumps({"schema": SCHEMA_VERSION, "items": items}, indent=2) + "\n")


# ---------------------------------------------------------------------------
# grids


def _grid_from_json(doc, path):
    if not isinstance(doc, dict):
        raise MalformedFile(f"{path}: grid must be a JSON object")
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        stride = int(doc.get("stride", 16))
        alpha = float(doc.get("alpha", 4.0))
        data = np.asarray(doc["data"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"{path}: bad grid fields ({exc})") from exc
    if data.ndim != 1:
        data = data.reshape(-1)
    if rows < 1 or cols < 1 or data.size != rows * cols * N_CHANNELS:
        raise ShapeMismatch(
            f"{path}: {data.size} values for a {rows}x{cols}x{N_CHANNELS} grid"
        )
    return DetectionGrid(rows, cols, data, stride, alpha)


def _grid_from_binary(raw, path):
    if len(raw) < _GRID_HEADER.size:
        raise MalformedFile(f"{path}: truncated grid header")
    rows, cols, stride, alpha_milli = _GRID_HEADER.unpack_from(raw)
    payload = len(raw) - _GRID_HEADER.size
    expected = rows * cols * N_CHANNELS * 4
    if rows < 1 or cols < 1 or payload != expected:
        raise ShapeMismatch(f"{path}: {payload} data bytes for a {rows}x{cols}x{N_CHANNELS} grid")
    data = np.frombuffer(raw, dtype="<f4", offset=_GRID_HEADER.size).astype(np.float64)
    return DetectionGrid(rows, cols, data, stride, alpha_milli / 1000.0)


def load_grid(path):
    """Load a grid in either the JSON or the binary layout (sniffed from content).

    Raises:
        DataIOError: unreadable file.
        ShapeMismatch: data length differs from ``rows * cols * 7``.
        OutOfRange: a probability outside [0, 1] or a non-finite value.
        MalformedFile: anything else that does not parse.
    """
    raw = _read_bytes(path)
    try:
        if raw.lstrip()[:1] == b"{":
            try:
                doc = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise MalformedFile(f"{path}: not valid JSON ({exc})") from exc
            return _grid_from_json(doc, path)
        return _grid_from_binary(raw, path)
    except (OutOfRange, ShapeMismatch) as exc:
        if str(path) in str(exc):
            raise
        raise type(exc)(f"{path}: {exc}") from exc
    except DataError:
        raise
    except Exception as exc:  # loader must never leak an untyped failure
        raise MalformedFile(f"{path}: {exc}") from exc


def grid_to_json(grid):
    return {
        "rows": grid.rows,
        "cols": grid.cols,
        "stride": grid.stride,
        "alpha": grid.alpha,
        "data": [float(v) for v in grid.cells.reshape(-1)],
    }


def grid_to_bytes(grid):
    header = _GRID_HEADER.pack(grid.rows, grid.cols, grid.stride, int(round(grid.alpha * 1000)))
    return header + grid.cells.reshape(-1).astype("<f4").tobytes()


def write_grid(grid, path, fmt="json"):
    if fmt == "json":
        atomic_write(path, json.dumps(grid_to_json(grid)))
    elif fmt == "binary":
        atomic_write(path, grid_to_bytes(grid))
    else:
        raise ValueError(f"unknown grid format {fmt!r}")


# ---------------------------------------------------------------------------
# entities and OCR predictions


def entities_to_json(entities):
    return [{"name": e.name, "text": e.text, "box": list(e.box)} for e in entities]


def load_entities(path):
    doc = read_json(path)
    if not isinstance(doc, list):
        raise MalformedFile(f"{path}: entity file must be a JSON list")
    try:
        return [Entity(str(e["name"]), str(e["text"]), tuple(e["box"])) for e in doc]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"{path}: bad entity record ({exc})") from exc


def write_entities(entities, path):
    atomic_write(path, json.dumps(entities_to_json(entities), ensure_ascii=False, indent=2) + "\n")


def load_prediction(path):
    """Load an OCR prediction file.

    Returns ``("name", {name: text})`` for ``{"entities": {...}}`` files and
    ``("box", [{"box": [...], "text": str}, ...])`` for ``{"boxes": [...]}``.
    """
    doc = read_json(path)
    if isinstance(doc, dict) and isinstance(doc.get("entities"), dict):
        return "name", {str(k): str(v) for k, v in doc["entities"].items()}
    if isinstance(doc, dict) and isinstance(doc.get("boxes"), list):
        out = []
        for rec in doc["boxes"]:
            try:
                box = [float(v) for v in rec["box"]]
                if len(box) != 4 or box[2] < box[0] or box[3] < box[1]:
                    raise ValueError(f"malformed box {rec['box']!r}")
                out.append({"box": box, "text": str(rec["text"])})
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedFile(f"{path}: bad box record ({exc})") from exc
        return "box", out
    raise MalformedFile(f"{path}: expected {{\"entities\": {{...}}}} or {{\"boxes\": [...]}}")


# ---------------------------------------------------------------------------
# reports

#: Fixed CSV header. ``kind`` is ``item`` or ``aggregate``; aggregate rows
#: store their means in the ``iou`` and ``ocr_score`` columns.
CSV_HEADER = ("kind", "id", "bin", "round", "partition", "n", "iou", "ocr_score", "latency_ms")


@dataclass
class ItemResult:
    id: str
    bin: int | None = None
    iou: float | None = None
    ocr_score: float | None = None
    latency_ms: float | None = None


@dataclass
class Aggregate:
    """Mean over a group of items; ``round is None`` marks a mean of round means."""

    round: int | None
    partition: str
    n: int
    mean_iou: float | None = None
    mean_score: float | None = None


@dataclass
class EvalReport:
    items: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "meta": self.meta,
            "items": [asdict(r) for r in self.items],
            "aggregates": [asdict(a) for a in self.aggregates],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(
                items=[ItemResult(**r) for r in doc.get("items", [])],
                aggregates=[Aggregate(**a) for a in doc.get("aggregates", [])],
                meta=dict(doc.get("meta", {})),
            )
        except (TypeError, AttributeError) as exc:
            raise MalformedFile(f"bad report structure ({exc})") from exc

    def aggregate(self, partition, round=None):
        for agg in self.aggregates:
            if agg.partition == partition and agg.round == round:
                return agg
        raise KeyError((partition, round))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def report_to_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in report.items:
        writer.writerow(
            [_cell(v) for v in ("item", r.id, r.bin, None, None, None, r.iou, r.ocr_score, r.latency_ms)]
        )
    for a in report.aggregates:
        writer.writerow(
            [_cell(v) for v in ("aggregate", None, None, a.round, a.partition, a.n, a.mean_iou, a.mean_score, None)]
        )
    return buf.getvalue()


def write_report(report, path, fmt=None):
    """Serialise ``report`` as JSON or CSV (chosen from the extension by default)."""
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "json"
    if fmt == "json":
        atomic_write(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        atomic_write(path, report_to_csv(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def read_report(path):
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise MalformedFile(f"{path}: report must be a JSON object")
    return EvalReport.from_dict(doc)
