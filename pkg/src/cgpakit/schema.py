"""Survey factor schema and validated student records.

The schema fixes the 23 socio-academic factors, their kinds, admissible
levels/ranges, and the declared level order used for integer encoding.
The default schema ships as a JSON resource so the service and the UI
can consume the exact same document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import SchemaError, ValueOutOfDomain

REQUIRED_ACRONYMS = (
    "DI", "YS", "G", "SSC", "HSC", "FE", "ME", "FJ", "MJ", "MI", "AC", "SH",
    "IF", "GS", "S", "PI", "HS", "PSR", "C", "RS", "CS", "SCI", "CGPA",
)

KINDS = ("continuous", "ordinal", "categorical", "binary")


@dataclass(frozen=True)
class FactorSpec:
    acronym: str
    name: str
    kind: str
    levels: tuple = ()          # declared order; empty for continuous
    range: tuple = ()           # (min, max); empty for non-continuous
    units: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"{self.acronym}: unknown kind {self.kind!r}")
        if self.kind == "continuous":
            if len(self.range) != 2 or not self.range[0] < self.range[1]:
                raise SchemaError(f"{self.acronym}: continuous factor needs a [min,max] range")
        else:
            if len(self.levels) < 2:
                raise SchemaError(f"{self.acronym}: {self.kind} factor needs >= 2 levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"{self.acronym}: duplicate levels")
            if self.kind == "binary" and len(self.levels) != 2:
                raise SchemaError(f"{self.acronym}: binary factor needs exactly 2 levels")

    @property
    def is_continuous(self) -> bool:
        return self.kind == "continuous"

    def validate_value(self, value, row: int = -1):
        """Return the canonical in-domain value, or raise ValueOutOfDomain."""
        if self.is_continuous:
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise ValueOutOfDomain(row, self.acronym, value) from None
            lo, hi = self.range
            if not (lo <= v <= hi):
                raise ValueOutOfDomain(row, self.acronym, value)
            return v
        v = str(value)
        if v not in self.levels:
            raise ValueOutOfDomain(row, self.acronym, value)
        return v


@dataclass(frozen=True)
class FactorSchema:
    factors: tuple

    _by_acronym: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        acronyms = [f.acronym for f in self.factors]
        if sorted(acronyms) != sorted(REQUIRED_ACRONYMS):
            missing = set(REQUIRED_ACRONYMS) - set(acronyms)
            extra = set(acronyms) - set(REQUIRED_ACRONYMS)
            raise SchemaError(f"schema must declare exactly the 23 survey factors "
                              f"(missing={sorted(missing)}, extra={sorted(extra)})")
        cgpa = next(f for f in self.factors if f.acronym == "CGPA")
        if not cgpa.is_continuous or tuple(cgpa.range) != (0.0, 4.0):
            raise SchemaError("CGPA must be continuous with range [0.0, 4.0]")
        object.__setattr__(self, "_by_acronym", {f.acronym: f for f in self.factors})

    @property
    def acronyms(self) -> tuple:
        return tuple(f.acronym for f in self.factors)

    def __getitem__(self, acronym: str) -> FactorSpec:
        try:
            return self._by_acronym[acronym]
        except KeyError:
            raise SchemaError(f"unknown factor {acronym!r}") from None

    def __contains__(self, acronym: str) -> bool:
        return acronym in self._by_acronym

    def to_json(self) -> str:
        return json.dumps({"factors": [
            {"acronym": f.acronym, "name": f.name, "kind": f.kind,
             "levels": list(f.levels), "range": list(f.range), "units": f.units}
            for f in self.factors]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FactorSchema":
        doc = json.loads(text)
        return cls(tuple(
            FactorSpec(acronym=d["acronym"], name=d["name"], kind=d["kind"],
                       levels=tuple(d.get("levels", ())),
                       range=tuple(d.get("range", ())),
                       units=d.get("units", ""))
            for d in doc["factors"]))


@dataclass(frozen=True)
class StudentRecord:
    """One respondent; values keyed by factor acronym, already validated."""

    values: dict

    def __getitem__(self, acronym: str):
        return self.values[acronym]

    def key(self) -> tuple:
        """Hashable identity used for duplicate detection."""
        return tuple(sorted(self.values.items()))

    @classmethod
    def build(cls, raw: dict, schema: FactorSchema, row: int = -1) -> "StudentRecord":
        missing = [a for a in schema.acronyms if a not in raw]
        if missing:
            raise SchemaError(f"record missing factors: {missing}")
        vals = {a: schema[a].validate_value(raw[a], row=row) for a in schema.acronyms}
        return cls(vals)


def default_schema() -> FactorSchema:
    """The 23-factor survey schema shipped with the package."""
    text = resources.files("cgpakit.resources").joinpath("schema.json").read_text("utf-8")
    return FactorSchema.from_json(text)
