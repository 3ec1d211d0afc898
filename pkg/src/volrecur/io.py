"""Canonical CSV tables: price series in, labeled numeric tables out."""
from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    DuplicateRecord,
    NonPositivePrice,
    ParseError,
    UnsortedInput,
)

DEFAULT_SCHEMA = {"day": "day", "slot": "slot", "price": "price"}


@dataclass(frozen=True)
class PriceSeries:
    """Intraday prices keyed by (day_index, slot_index).

    Days with missing slots are allowed; records are strictly increasing in
    (day, slot).
    """

    day: np.ndarray
    slot: np.ndarray
    price: np.ndarray
    slots_per_day: int

    def __post_init__(self):
        day = np.asarray(self.day, dtype=np.int64)
        slot = np.asarray(self.slot, dtype=np.int64)
        price = np.asarray(self.price, dtype=float)
        object.__setattr__(self, "day", day)
        object.__setattr__(self, "slot", slot)
        object.__setattr__(self, "price", price)
        validate_prices(day, slot, price, self.slots_per_day)

    def __len__(self):
        return len(self.price)

    @property
    def position(self) -> np.ndarray:
        """Absolute slot index day * S + slot."""
        return self.day * self.slots_per_day + self.slot


def validate_prices(day, slot, price, slots_per_day):
    if not (isinstance(slots_per_day, (int, np.integer)) and slots_per_day > 0):
        raise DataError(f"slots_per_day must be a positive integer, got {slots_per_day!r}")
    if not (len(day) == len(slot) == len(price)):
        raise DataError("day, slot and price arrays differ in length")
    if len(price) == 0:
        return
    if np.any(day < 0):
        raise DataError("negative day index")
    if np.any((slot < 0) | (slot >= slots_per_day)):
        raise DataError(f"slot index outside [0, {slots_per_day})")
    bad = np.flatnonzero(~(price > 0))
    if bad.size:
        raise NonPositivePrice(f"non-positive price {price[bad[0]]!r} at record {bad[0]}")
    key = day * slots_per_day + slot
    step = np.diff(key)
    if np.any(step == 0):
        i = int(np.flatnonzero(step == 0)[0]) + 1
        raise DuplicateRecord(f"duplicate (day, slot) at record {i}")
    if np.any(step < 0):
        i = int(np.flatnonzero(step < 0)[0]) + 1
        raise UnsortedInput(f"record {i} precedes its predecessor")


def load_price_csv(path, slots_per_day: int, schema: Mapping[str, str] | None = None) -> PriceSeries:
    """Read a (day, slot, price) CSV into a validated :class:`PriceSeries`.

    ``schema`` maps the logical names ``day``, ``slot`` and ``price`` to
    header names in the file. Rows are never reordered; ordering, duplicate
    and price violations raise with the offending line number.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    days, slots, prices = [], [], []
    prev_key = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        try:
            idx = {k: header.index(v) for k, v in schema.items()}
        except ValueError as exc:
            raise ParseError(f"missing column ({exc})", line=1) from None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                d = int(row[idx["day"]])
                s = int(row[idx["slot"]])
                p = float(row[idx["price"]])
            except (ValueError, IndexError):
                raise ParseError(f"cannot parse row {row!r}", line=lineno) from None
            if not p > 0:
                raise NonPositivePrice(f"non-positive price {row[idx['price']]!r}", line=lineno)
            if d < 0 or not 0 <= s < slots_per_day:
                raise ParseError(f"day/slot out of range: ({d}, {s})", line=lineno)
            key = d * slots_per_day + s
            if prev_key is not None:
                if key == prev_key:
                    raise DuplicateRecord(f"duplicate (day, slot) = ({d}, {s})", line=lineno)
                if key < prev_key:
                    raise UnsortedInput(f"({d}, {s}) out of order", line=lineno)
            prev_key = key
            days.append(d)
            slots.append(s)
            prices.append(p)
    return PriceSeries(np.array(days, dtype=np.int64), np.array(slots, dtype=np.int64),
                       np.array(prices), slots_per_day)


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    value = float(value)
    if np.isnan(value):
        return ""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows as CSV with a header line.

    Floats use ``repr`` (shortest round-tripping form, 17 significant
    digits at most); ``None``/NaN become empty cells. The file is written to a
    temporary name and renamed into place.
    """
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise DataError(f"row arity {len(row)} != header arity {len(header)}")
        lines.append(",".join(_format(v) for v in row))
    try:
        _atomic_write(Path(path), "\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by :func:`write_table`; empty cells are NaN."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", line=1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(c) if c.strip() else np.nan for c in row])
            except ValueError:
                raise ParseError(f"cannot parse row {row!r}", line=lineno) from None
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return [h.strip() for h in header], data


def write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    try:
        _atomic_write(Path(path), text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc
