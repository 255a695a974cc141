"""Descriptive statistics, crosstabs, and the Fisher-z independence test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .dataset import NumericDataset, _invert_scaling
from .errors import ContinuousFactor, SingularCovariance, TooFewSamples
from .schema import FactorSchema


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    independent: bool
    cond_set: tuple

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "independent": self.independent, "cond_set": list(self.cond_set)}


@dataclass(frozen=True)
class CrosstabReport:
    row_factor: str
    col_factor: str
    row_levels: tuple
    col_levels: tuple
    counts: np.ndarray
    row_pct: np.ndarray
    col_pct: np.ndarray
    total_pct: np.ndarray

    def to_dict(self) -> dict:
        return {"row_factor": self.row_factor, "col_factor": self.col_factor,
                "row_levels": list(self.row_levels), "col_levels": list(self.col_levels),
                "counts": self.counts.tolist(), "row_pct": self.row_pct.tolist(),
                "col_pct": self.col_pct.tolist(), "total_pct": self.total_pct.tolist()}

    def to_text(self) -> str:
        width = max([len(str(l)) for l in self.col_levels] + [10])
        rw = max(len(str(l)) for l in self.row_levels) + 2
        head = " " * rw + "".join(f"{str(c):>{width + 2}}" for c in self.col_levels)
        lines = [f"{self.row_factor} x {self.col_factor} (count / total %)", head]
        for i, rl in enumerate(self.row_levels):
            cells = "".join(
                f"{int(self.counts[i, j]):>{width - 4}} {self.total_pct[i, j]:5.1f}%"
                for j in range(len(self.col_levels)))
            lines.append(f"{str(rl):<{rw}}{cells}")
        return "\n".join(lines)


def describe(ds: NumericDataset) -> dict:
    """Per-column count, unique, mode (first-seen tie-break), mean, sd, min, max."""
    out = {}
    for j, name in enumerate(ds.columns):
        col = ds.matrix[:, j]
        values, first_pos, counts = np.unique(col, return_index=True, return_counts=True)
        best = np.lexsort((first_pos, -counts))[0]
        out[name] = {
            "count": int(col.size),
            "unique": int(values.size),
            "mode": float(values[best]),
            "mean": float(np.mean(col)),
            "sd": float(np.std(col, ddof=1)) if col.size > 1 else 0.0,
            "min": float(np.min(col)),
            "max": float(np.max(col)),
        }
    return out


def validation_report(records, schema: FactorSchema) -> dict:
    """Raw-record report in the survey-table shape: non-null, unique, mode."""
    out = {}
    for name in schema.acronyms:
        values = [r[name] for r in records]
        seen, counts = [], {}
        for v in values:
            if v not in counts:
                seen.append(v)
            counts[v] = counts.get(v, 0) + 1
        mode = max(seen, key=lambda v: counts[v]) if seen else None
        out[name] = {"non_null": len(values), "unique": len(seen), "mode": mode}
    return out


def crosstab(ds: NumericDataset, row_factor: str, col_factor: str) -> CrosstabReport:
    """Count table with row/column/total percentages over declared levels."""
    for f in (row_factor, col_factor):
        j = ds.column_index(f)
        if ds.kinds[j] == "continuous":
            raise ContinuousFactor(f"{f} is continuous; crosstab needs level factors")

    def levels_and_codes(f):
        j = ds.column_index(f)
        raw = _invert_scaling(ds.matrix[:, j], ds.scaling[j])
        codes = np.rint(raw).astype(int)
        emap = ds.encoding_map.get(f)
        if emap:
            ordered = [lvl for lvl, _ in sorted(emap.items(), key=lambda kv: kv[1])]
        else:
            ordered = [str(v) for v in sorted(set(codes.tolist()))]
            codes = np.searchsorted(np.array(sorted(set(codes.tolist()))), codes)
        return tuple(ordered), codes

    row_levels, r_codes = levels_and_codes(row_factor)
    col_levels, c_codes = levels_and_codes(col_factor)
    counts = np.zeros((len(row_levels), len(col_levels)))
    np.add.at(counts, (r_codes, c_codes), 1.0)
    n = counts.sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        row_pct = np.where(counts.sum(1, keepdims=True) > 0,
                           100.0 * counts / counts.sum(1, keepdims=True), 0.0)
        col_pct = np.where(counts.sum(0, keepdims=True) > 0,
                           100.0 * counts / counts.sum(0, keepdims=True), 0.0)
    total_pct = 100.0 * counts / n
    return CrosstabReport(row_factor, col_factor, row_levels, col_levels,
                          counts, row_pct, col_pct, total_pct)


def pearson_correlation(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise SingularCovariance("zero-variance column in correlation")
    return float(xc @ yc) / denom


def partial_correlation(ds: NumericDataset, i: str, j: str, cond=()) -> float:
    """Partial correlation of columns i and j given ``cond`` columns."""
    cond = tuple(cond)
    if len(cond) > ds.n_rows - 3:
        raise TooFewSamples(f"|cond|={len(cond)} too large for n={ds.n_rows}")
    cols = [ds.column_index(i), ds.column_index(j)] + [ds.column_index(c) for c in cond]
    sub = ds.matrix[:, cols]
    return partial_correlation_from_matrix(sub)


def partial_correlation_from_matrix(sub: np.ndarray) -> float:
    """First two columns partialled on the rest (precision-matrix form)."""
    corr = np.corrcoef(sub, rowvar=False)
    if np.isnan(corr).any():
        raise SingularCovariance("zero-variance column")
    if corr.shape[0] == 2:  # empty conditioning set: plain Pearson correlation
        return float(np.clip(corr[0, 1], -1.0, 1.0))
    try:
        omega = np.linalg.inv(corr)
    except np.linalg.LinAlgError:
        raise SingularCovariance("correlation submatrix is singular") from None
    denom = omega[0, 0] * omega[1, 1]
    if denom <= 0:
        raise SingularCovariance("non-positive precision diagonal")
    r = -omega[0, 1] / math.sqrt(denom)
    return float(np.clip(r, -1.0, 1.0))


def fisher_z_test(r: float, n: int, z_dim: int, alpha: float) -> CiResult:
    """Two-sided Fisher-z test of zero (partial) correlation."""
    if n - z_dim - 3 < 1:
        raise TooFewSamples(f"need n - |Z| - 3 >= 1, got n={n}, |Z|={z_dim}")
    if not abs(r) < 1.0:
        r = math.copysign(1.0 - 1e-12, r)  # perfectly collinear sample estimate
    statistic = math.sqrt(n - z_dim - 3) * math.atanh(r)
    p = 2.0 * float(norm.sf(abs(statistic)))
    return CiResult(statistic=statistic, p_value=p, independent=p > alpha, cond_set=())


def ci_test(ds: NumericDataset, i: str, j: str, cond, alpha: float) -> CiResult:
    """Fisher-z conditional-independence test of i _||_ j | cond."""
    cond = tuple(cond)
    r = partial_correlation(ds, i, j, cond)
    res = fisher_z_test(r, ds.n_rows, len(cond), alpha)
    return CiResult(res.statistic, res.p_value, res.independent, cond)
