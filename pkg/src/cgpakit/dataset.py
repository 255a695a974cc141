"""Encoded numeric datasets: CSV ingestion, encoding, scaling, splitting.

Categorical/ordinal factors encode to consecutive integers in the
schema's declared level order (ordinal-aware, never hash order).
Continuous factors scale per a policy; scaling parameters are recorded
so the transform is invertible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (DegenerateColumn, DegenerateSplit, EmptyCell, MissingColumn,
                     SchemaError, UnknownColumn, UnknownLevel)
from .schema import FactorSchema, StudentRecord

SCALING_METHODS = ("none", "zscore", "unit_interval")


@dataclass(frozen=True)
class NumericDataset:
    """Immutable n x p real matrix with per-column metadata."""

    matrix: np.ndarray
    columns: tuple
    kinds: tuple                 # per-column factor kind ("continuous", ...)
    scaling: tuple               # per-column {"method": ..., **params}
    encoding_map: dict           # acronym -> {level: int} for non-continuous columns

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise SchemaError("matrix must be 2-dimensional")
        if m.shape[1] != len(self.columns):
            raise SchemaError("column names do not match matrix width")
        if np.isnan(m).any():
            raise SchemaError("dataset contains missing entries")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "scaling", tuple(self.scaling))

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise UnknownColumn(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.column_index(name)]

    @classmethod
    def from_matrix(cls, matrix, columns: Sequence[str], kinds: Sequence[str] = (),
                    scaling: Sequence[dict] = (), encoding_map: dict | None = None,
                    ) -> "NumericDataset":
        columns = tuple(columns)
        if not kinds:
            kinds = ("continuous",) * len(columns)
        if not scaling:
            scaling = ({"method": "none"},) * len(columns)
        return cls(np.asarray(matrix, dtype=float), columns, tuple(kinds),
                   tuple(dict(s) for s in scaling), dict(encoding_map or {}))

    # -- scaling helpers --------------------------------------------------

    def unscaled(self) -> np.ndarray:
        """Invert per-column scaling back to encoded/raw values."""
        out = np.array(self.matrix, dtype=float)
        for j, s in enumerate(self.scaling):
            out[:, j] = _invert_scaling(out[:, j], s)
        return out

    def decode_row(self, i: int, schema: FactorSchema) -> StudentRecord:
        """Reconstruct the raw record for row ``i`` (continuous up to fp error)."""
        raw = {}
        for j, name in enumerate(self.columns):
            v = _invert_scaling(np.array([self.matrix[i, j]]), self.scaling[j])[0]
            spec = schema[name]
            if spec.is_continuous:
                raw[name] = float(v)
            else:
                idx = int(round(v))
                if not 0 <= idx < len(spec.levels):
                    raise UnknownLevel(name, v)
                raw[name] = spec.levels[idx]
        return StudentRecord(raw)


def _apply_scaling(col: np.ndarray, spec: dict) -> np.ndarray:
    method = spec["method"]
    if method == "none":
        return col
    if method == "zscore":
        return (col - spec["mean"]) / spec["sd"]
    if method == "unit_interval":
        return (col - spec["lo"]) / (spec["hi"] - spec["lo"])
    raise SchemaError(f"unknown scaling method {method!r}")


def _invert_scaling(col: np.ndarray, spec: dict) -> np.ndarray:
    method = spec["method"]
    if method == "none":
        return col
    if method == "zscore":
        return col * spec["sd"] + spec["mean"]
    if method == "unit_interval":
        return col * (spec["hi"] - spec["lo"]) + spec["lo"]
    raise SchemaError(f"unknown scaling method {method!r}")


def _fit_scaling(col: np.ndarray, method: str, factor_spec) -> dict:
    if method == "none":
        return {"method": "none"}
    if method == "zscore":
        sd = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
        if sd == 0.0:
            raise DegenerateColumn(f"{factor_spec.acronym}: constant column cannot be z-scored")
        return {"method": "zscore", "mean": float(np.mean(col)), "sd": sd}
    if method == "unit_interval":
        if factor_spec.is_continuous:
            lo, hi = factor_spec.range
        else:
            lo, hi = 0.0, float(len(factor_spec.levels) - 1)
        return {"method": "unit_interval", "lo": float(lo), "hi": float(hi)}
    raise SchemaError(f"unknown scaling method {method!r}")


def default_policy(schema: FactorSchema) -> dict:
    """Training policy: z-score every factor except CGPA, which maps to [0,1]."""
    policy = {}
    for f in schema.factors:
        policy[f.acronym] = "unit_interval" if f.acronym == "CGPA" else "zscore"
    return policy


def raw_policy(schema: FactorSchema) -> dict:
    """Inspection policy: encode only, no rescaling."""
    return {f.acronym: "none" for f in schema.factors}


def load_csv(path, schema: FactorSchema) -> list:
    """Read a UTF-8 CSV whose header is exactly the schema acronyms (any order)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn("file has no header row") from None
        header = [h.strip() for h in header]
        unknown = [h for h in header if h not in schema.acronyms]
        if unknown:
            raise UnknownColumn(f"unexpected columns: {unknown}")
        missing = [a for a in schema.acronyms if a not in header]
        if missing:
            raise MissingColumn(f"missing columns: {missing}")
        records = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise EmptyCell(row_no, header[len(row)] if len(row) < len(header) else "<extra>")
            raw = {}
            for name, cell in zip(header, row):
                if cell.strip() == "":
                    raise EmptyCell(row_no, name)
                raw[name] = cell.strip()
            for name in header:
                raw[name] = schema[name].validate_value(raw[name], row=row_no)
            records.append(StudentRecord(raw))
    return records


def deduplicate(records: Iterable[StudentRecord]) -> list:
    """Drop exact duplicates, keeping the first occurrence in order."""
    seen = set()
    out = []
    for r in records:
        k = r.key()
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out


def encode_records(records: Sequence[StudentRecord], schema: FactorSchema) -> np.ndarray:
    """Map records to the encoded (unscaled) matrix in schema column order."""
    n = len(records)
    p = len(schema.acronyms)
    m = np.empty((n, p), dtype=float)
    for j, name in enumerate(schema.acronyms):
        spec = schema[name]
        if spec.is_continuous:
            m[:, j] = [float(r[name]) for r in records]
        else:
            index = {lvl: i for i, lvl in enumerate(spec.levels)}
            for i, r in enumerate(records):
                try:
                    m[i, j] = index[r[name]]
                except KeyError:
                    raise UnknownLevel(name, r[name]) from None
    return m


def encode_and_scale(records: Sequence[StudentRecord], schema: FactorSchema,
                     policy: dict | None = None) -> NumericDataset:
    """Encode levels to integers by declared order, then scale per policy."""
    if not records:
        raise SchemaError("no records to encode")
    policy = policy if policy is not None else default_policy(schema)
    m = encode_records(records, schema)
    kinds = tuple(schema[a].kind for a in schema.acronyms)
    scaling = []
    encoding_map = {}
    for j, name in enumerate(schema.acronyms):
        spec = schema[name]
        if not spec.is_continuous:
            encoding_map[name] = {lvl: i for i, lvl in enumerate(spec.levels)}
        s = _fit_scaling(m[:, j], policy.get(name, "none"), spec)
        m[:, j] = _apply_scaling(m[:, j], s)
        scaling.append(s)
    return NumericDataset(m, tuple(schema.acronyms), kinds, tuple(scaling), encoding_map)


def train_test_split(ds: NumericDataset, test_fraction: float, seed: int,
                     ) -> tuple:
    """Disjoint covering row partition; scaling refit on train, applied to test."""
    n = ds.n_rows
    if n < 2:
        raise DegenerateSplit("need at least 2 rows")
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateSplit("test_fraction must lie in (0,1)")
    n_train = int(round(n * (1.0 - test_fraction)))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"split {n_train}/{n - n_train} leaves one side empty")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])

    raw = ds.unscaled()
    train_raw, test_raw = raw[train_idx], raw[test_idx]
    new_scaling = []
    train_m = np.array(train_raw)
    test_m = np.array(test_raw)
    for j, name in enumerate(ds.columns):
        old = ds.scaling[j]
        method = old["method"]
        if method == "zscore":
            sd = float(np.std(train_raw[:, j], ddof=1))
            if sd == 0.0:
                raise DegenerateColumn(f"{name}: constant on train split")
            s = {"method": "zscore", "mean": float(np.mean(train_raw[:, j])), "sd": sd}
        else:
            s = dict(old)  # none / unit_interval are domain-derived, not data-fit
        train_m[:, j] = _apply_scaling(train_raw[:, j], s)
        test_m[:, j] = _apply_scaling(test_raw[:, j], s)
        new_scaling.append(s)

    make = lambda m: NumericDataset(m, ds.columns, ds.kinds, tuple(dict(s) for s in new_scaling),
                                    {k: dict(v) for k, v in ds.encoding_map.items()})
    return make(train_m), make(test_m)
