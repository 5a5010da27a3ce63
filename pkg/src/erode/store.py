"""Experiment records: CSV ingestion, a line-oriented store file, and queries.

Store file layout (``erode-store v1``)::

    erode-store v1
    id=1<TAB>po_material=PC52<TAB>to_material=OL37<TAB>...<TAB>time_tp=152.0

One record per line, fields as ``key=value`` pairs separated by a single tab,
always in the order of :data:`STORE_FIELDS`. Numbers are written with
``repr`` so a save/load round trip is bit-exact. Blank lines are ignored.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from erode.errors import CsvFormatError, RecordError, StoreFormatError

POWER_TOLERANCE = 0.5  # watts, |P - U*I|

CSV_HEADER = (
    "po_material",
    "to_material",
    "machine",
    "operation",
    "regime",
    "voltage_v",
    "current_a",
    "power_w",
    "time_s",
)
STORE_MAGIC = "erode-store"
STORE_VERSION = "v1"
STORE_FIELDS = (
    "id",
    "po_material",
    "to_material",
    "machine",
    "operation",
    "regime",
    "voltage_u",
    "current_i",
    "power_p",
    "time_tp",
)
TEXT_FIELDS = ("po_material", "to_material", "machine", "operation", "regime")
NUMERIC_FIELDS = ("voltage_u", "current_i", "power_p", "time_tp")
_FORBIDDEN_TEXT = ("\t", "\n", "\r")


@dataclass(frozen=True)
class ExperimentRecord:
    """One debiting experiment.

    ``po_material`` is the processed object (workpiece), ``to_material`` the
    transfer object (tool electrode). Power is in W, time in s. ``id`` is
    ``None`` until the record is added to a store.
    """

    po_material: str
    to_material: str
    machine: str
    operation: str
    regime: str
    voltage_u: float
    current_i: float
    power_p: float
    time_tp: float
    id: int | None = None

    def validate(self) -> None:
        for name in TEXT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, str):
                raise RecordError(f"{name} must be text, got {value!r}")
            if any(ch in value for ch in _FORBIDDEN_TEXT):
                raise RecordError(f"{name} must not contain tabs or line breaks")
        for name in NUMERIC_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise RecordError(f"{name} must be finite and positive, got {value!r}")
        product = self.voltage_u * self.current_i
        if abs(self.power_p - product) > POWER_TOLERANCE:
            raise RecordError(
                f"power {self.power_p!r} W differs from U*I = {product!r} W by "
                f"{abs(self.power_p - product):g} W (> {POWER_TOLERANCE} W)"
            )


@dataclass(frozen=True)
class QueryFilter:
    """Conjunction of exact, case-sensitive field matches; ``None`` matches anything."""

    po_material: str | None = None
    to_material: str | None = None
    machine: str | None = None
    operation: str | None = None
    regime: str | None = None

    def matches(self, record: ExperimentRecord) -> bool:
        for name in TEXT_FIELDS:
            wanted = getattr(self, name)
            if wanted is not None and getattr(record, name) != wanted:
                return False
        return True


@dataclass(frozen=True)
class Dataset:
    """Ordered (power W, time s) pairs. Repeated x values are allowed."""

    points: tuple[tuple[float, float], ...]
    label: str = ""

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if not pts:
            raise ValueError("a dataset needs at least one point")
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
            raise ValueError("dataset points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def x(self) -> list[float]:
        return [p[0] for p in self.points]

    @property
    def y(self) -> list[float]:
        return [p[1] for p in self.points]

    def __len__(self):
        return len(self.points)


class ExperimentStore:
    """In-memory experiment table with monotonically increasing ids."""

    def __init__(self, records: Iterable[ExperimentRecord] = ()):
        self._records: dict[int, ExperimentRecord] = {}
        self._next_id = 1
        for rec in records:
            if rec.id is None:
                self.add(rec)
            else:
                self._insert_with_id(rec)

    def _insert_with_id(self, record: ExperimentRecord) -> None:
        record.validate()
        if record.id in self._records:
            raise RecordError(f"duplicate record id {record.id}")
        if record.id < 1:
            raise RecordError(f"record id must be positive, got {record.id}")
        self._records[record.id] = record
        self._next_id = max(self._next_id, record.id + 1)

    def add(self, record: ExperimentRecord) -> int:
        """Validate and append ``record``; return its new id."""
        record.validate()
        new_id = self._next_id
        self._records[new_id] = dataclasses.replace(record, id=new_id)
        self._next_id += 1
        return new_id

    def get(self, record_id: int) -> ExperimentRecord:
        return self._records[record_id]

    def query(self, flt: QueryFilter | None = None) -> list[ExperimentRecord]:
        flt = flt or QueryFilter()
        return [self._records[i] for i in sorted(self._records) if flt.matches(self._records[i])]

    @property
    def records(self) -> list[ExperimentRecord]:
        return self.query()

    def __len__(self):
        return len(self._records)

    def __iter__(self) -> Iterator[ExperimentRecord]:
        return iter(self.records)

    def __eq__(self, other):
        if not isinstance(other, ExperimentStore):
            return NotImplemented
        return self.records == other.records


def add_record(store: ExperimentStore, record: ExperimentRecord) -> int:
    return store.add(record)


def query(store: ExperimentStore, flt: QueryFilter | None = None) -> list[ExperimentRecord]:
    return store.query(flt)


# ---------------------------------------------------------------- CSV


def _csv_rows(text: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, cells) skipping blank and ``#`` comment lines."""
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader([line]))


def _record_from_cells(lineno: int, cells: list[str]) -> ExperimentRecord:
    if len(cells) != len(CSV_HEADER):
        raise CsvFormatError(
            f"expected {len(CSV_HEADER)} columns, got {len(cells)}", line=lineno
        )
    values = {}
    for col, field, cell in zip(CSV_HEADER[5:], NUMERIC_FIELDS, cells[5:]):
        try:
            values[field] = float(cell)
        except ValueError:
            raise CsvFormatError(f"not a number: {cell!r}", line=lineno, column=col) from None
    rec = ExperimentRecord(*(c.strip() for c in cells[:5]), **values)
    try:
        rec.validate()
    except RecordError as exc:
        raise CsvFormatError(str(exc), line=lineno) from None
    return rec


def _check_header(lineno: int, cells: list[str]) -> None:
    if tuple(c.strip() for c in cells) != CSV_HEADER:
        raise CsvFormatError(
            "header must be " + ",".join(CSV_HEADER), line=lineno
        )


def parse_csv_lenient(text: str) -> tuple[list[ExperimentRecord], list[CsvFormatError]]:
    """Parse what can be parsed; collect one error per rejected row."""
    rows = _csv_rows(text)
    first = next(rows, None)
    if first is None:
        return [], []
    _check_header(*first)
    records, errors = [], []
    for lineno, cells in rows:
        try:
            records.append(_record_from_cells(lineno, cells))
        except CsvFormatError as exc:
            errors.append(exc)
    return records, errors


def parse_csv(text: str | TextIO) -> list[ExperimentRecord]:
    """Parse the experiment CSV; raise :class:`CsvFormatError` on the first bad row."""
    if not isinstance(text, str):
        text = text.read()
    records, errors = parse_csv_lenient(text)
    if errors:
        raise errors[0]
    return records


def to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    # text always quoted so a leading '#' is not read back as a comment
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONNUMERIC)
    for r in records:
        writer.writerow(
            [r.po_material, r.to_material, r.machine, r.operation, r.regime]
            + [float(getattr(r, f)) for f in NUMERIC_FIELDS]
        )
    return buf.getvalue()


# ---------------------------------------------------------------- store file


def _format_line(rec: ExperimentRecord) -> str:
    parts = []
    for name in STORE_FIELDS:
        value = getattr(rec, name)
        parts.append(f"{name}={repr(float(value)) if name in NUMERIC_FIELDS else value}")
    return "\t".join(parts)


def _parse_line(lineno: int, line: str) -> ExperimentRecord:
    parts = line.split("\t")
    if len(parts) != len(STORE_FIELDS):
        raise StoreFormatError(
            f"expected {len(STORE_FIELDS)} fields, got {len(parts)}", line=lineno
        )
    values = {}
    for name, part in zip(STORE_FIELDS, parts):
        key, sep, raw = part.partition("=")
        if not sep or key != name:
            raise StoreFormatError(f"expected field {name!r}, got {part!r}", line=lineno)
        try:
            if name == "id":
                values[name] = int(raw)
            elif name in NUMERIC_FIELDS:
                values[name] = float(raw)
            else:
                values[name] = raw
        except ValueError:
            raise StoreFormatError(f"bad value for {name}: {raw!r}", line=lineno) from None
    return ExperimentRecord(**values)


def dump_store(store: ExperimentStore, fh: TextIO) -> None:
    fh.write(f"{STORE_MAGIC} {STORE_VERSION}\n")
    for rec in store.records:
        fh.write(_format_line(rec) + "\n")


def read_store(fh: TextIO) -> ExperimentStore:
    store = ExperimentStore()
    header_seen = False
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not header_seen:
            if not line.strip():
                continue
            magic, _, version = line.partition(" ")
            if magic != STORE_MAGIC:
                raise StoreFormatError("not an erode store file", line=lineno)
            if version != STORE_VERSION:
                raise StoreFormatError(
                    f"unsupported schema version {version!r} (expected {STORE_VERSION})",
                    line=lineno,
                )
            header_seen = True
            continue
        if not line.strip():
            continue
        rec = _parse_line(lineno, line)
        try:
            store._insert_with_id(rec)
        except RecordError as exc:
            raise StoreFormatError(str(exc), line=lineno) from None
    return store


def save_store(store: ExperimentStore, destination: str | os.PathLike) -> None:
    path = Path(destination)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        dump_store(store, fh)
    os.replace(tmp, path)


def load_store(source: str | os.PathLike) -> ExperimentStore:
    """Read a store file. An empty file yields an empty store."""
    with open(source, encoding="utf-8") as fh:
        return read_store(fh)


# ---------------------------------------------------------------- datasets


def _common(values: list[str]) -> str | None:
    return values[0] if len(set(values)) == 1 else None


def extract_dataset(records: list[ExperimentRecord]) -> Dataset:
    """(power, time) points in id order, labelled by shared material/operation."""
    if not records:
        raise ValueError("cannot extract a dataset from an empty record list")
    ordered = sorted(records, key=lambda r: (r.id is None, r.id or 0))
    pieces = []
    po = _common([r.po_material for r in ordered])
    to = _common([r.to_material for r in ordered])
    op = _common([r.operation for r in ordered])
    if po or to:
        pieces.append(f"{po or 'mixed'}/{to or 'mixed'}")
    pieces.append(op or "mixed operations")
    return Dataset(tuple((r.power_p, r.time_tp) for r in ordered), label=" ".join(pieces))


def seed_csv_text() -> str:
    """The bundled PC52/OL37 debiting data set."""
    return (Path(__file__).parent / "data" / "table1.csv").read_text(encoding="utf-8")


def seed_store() -> ExperimentStore:
    return ExperimentStore(parse_csv(seed_csv_text()))
