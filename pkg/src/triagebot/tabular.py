"""Deterministic encoding of user-relationship features.

Categorical columns are one-hot encoded with a reserved unknown slot;
numeric columns are standardized to zero mean and unit variance using the
population standard deviation of the training set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import yaml

from .errors import ConfigError

CATEGORICAL = "categorical"
NUMERIC = "numeric"

# Cell value in a TabularRecord: categorical values are strings, numerics are
# floats; None marks a missing value.
CellValue = str | float | int | None
TabularRecord = Mapping[str, CellValue]


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered column list; the order fixes the encoded layout."""

    columns: tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(names) != len(set(names)):
            raise ConfigError("duplicate column names in schema")

    def __iter__(self):
        return iter(self.columns)

    def validate_record(self, record: TabularRecord) -> None:
        known = {c.name for c in self.columns}
        for key in record:
            if key not in known:
                raise ConfigError(f"record key {key!r} is not in the schema")

    @classmethod
    def from_file(cls, path: str | Path) -> "FeatureSchema":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "columns" not in doc:
            raise ConfigError("schema file must contain a top-level 'columns' list")
        columns = []
        for item in doc["columns"]:
            columns.append(
                Column(
                    name=item["name"],
                    kind=item["kind"],
                    categories=tuple(item.get("categories", ())),
                )
            )
        return cls(columns=tuple(columns))


@dataclass(frozen=True)
class _CategoricalEncoding:
    offsets: dict[str, int]  # category -> slot offset within the block
    unknown_offset: int

    @property
    def width(self) -> int:
        return self.unknown_offset + 1


@dataclass(frozen=True)
class _NumericEncoding:
    mean: float
    std: float  # population std; degenerate columns stored as 1.0


@dataclass(frozen=True)
class FittedTransform:
    """Learned encoding state; immutable and shareable after fit."""

    schema: FeatureSchema
    encodings: tuple[_CategoricalEncoding | _NumericEncoding, ...]
    dimension: int = field(init=False, default=0)

    def __post_init__(self):
        dim = 0
        for enc in self.encodings:
            dim += enc.width if isinstance(enc, _CategoricalEncoding) else 1
        object.__setattr__(self, "dimension", dim)


def fit(schema: FeatureSchema, records: Iterable[TabularRecord]) -> FittedTransform:
    """Collect categories and numeric moments from the training records.

    Categories are the union of declared lists and values seen in training,
    ordered: declared first, then seen values sorted ascending. Zero-variance
    numeric columns store std = 1 so transform stays total.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot fit on an empty training set")
    for record in records:
        schema.validate_record(record)

    encodings: list[_CategoricalEncoding | _NumericEncoding] = []
    for column in schema:
        if column.kind == CATEGORICAL:
            seen = {
                str(record[column.name])
                for record in records
                if record.get(column.name) is not None
            }
            ordered = list(column.categories) + sorted(seen - set(column.categories))
            offsets = {cat: i for i, cat in enumerate(ordered)}
            encodings.append(_CategoricalEncoding(offsets=offsets, unknown_offset=len(ordered)))
        else:
            values = np.array(
                [
                    float(record[column.name])
                    for record in records
                    if record.get(column.name) is not None
                ],
                dtype=np.float64,
            )
            if values.size == 0:
                mean, std = 0.0, 1.0
            else:
                mean = float(values.mean())
                std = float(values.std())  # population std (ddof=0)
                if std == 0.0:
                    std = 1.0
            encodings.append(_NumericEncoding(mean=mean, std=std))
    return FittedTransform(schema=schema, encodings=tuple(encodings))


def transform(fitted: FittedTransform, record: TabularRecord) -> np.ndarray:
    """Encode one record to a dense vector in schema order.

    Each categorical block gets exactly one 1 (unknown or missing values land
    in the unknown slot); missing numerics encode to 0, i.e. the training mean.
    """
    fitted.schema.validate_record(record)
    out = np.zeros(fitted.dimension, dtype=np.float64)
    pos = 0
    for column, enc in zip(fitted.schema, fitted.encodings):
        value = record.get(column.name)
        if isinstance(enc, _CategoricalEncoding):
            if value is None:
                offset = enc.unknown_offset
            else:
                offset = enc.offsets.get(str(value), enc.unknown_offset)
            out[pos + offset] = 1.0
            pos += enc.width
        else:
            if value is not None:
                out[pos] = (float(value) - enc.mean) / enc.std
            pos += 1
    return out


def transform_many(fitted: FittedTransform, records: Iterable[TabularRecord]) -> np.ndarray:
    rows = [transform(fitted, r) for r in records]
    if not rows:
        return np.zeros((0, fitted.dimension), dtype=np.float64)
    return np.stack(rows)
