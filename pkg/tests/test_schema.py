import pytest

from cgpakit.errors import SchemaError, ValueOutOfDomain
from cgpakit.schema import (REQUIRED_ACRONYMS, FactorSchema, FactorSpec,
                            StudentRecord, default_schema)


def test_default_schema_declares_all_23_factors():
    schema = default_schema()
    assert len(schema.factors) == 23
    assert sorted(schema.acronyms) == sorted(REQUIRED_ACRONYMS)
    assert len(set(schema.acronyms)) == 23


def test_cgpa_range_pinned():
    schema = default_schema()
    assert schema["CGPA"].kind == "continuous"
    assert tuple(schema["CGPA"].range) == (0.0, 4.0)


def test_every_discrete_factor_has_two_levels():
    for f in default_schema().factors:
        if not f.is_continuous:
            assert len(f.levels) >= 2
            assert len(set(f.levels)) == len(f.levels)


def test_schema_rejects_missing_factor():
    schema = default_schema()
    trimmed = tuple(f for f in schema.factors if f.acronym != "SH")
    with pytest.raises(SchemaError):
        FactorSchema(trimmed)


def test_schema_rejects_wrong_cgpa_range():
    schema = default_schema()
    factors = tuple(
        FactorSpec("CGPA", f.name, "continuous", (), (0.0, 5.0), f.units)
        if f.acronym == "CGPA" else f
        for f in schema.factors)
    with pytest.raises(SchemaError):
        FactorSchema(factors)


def test_record_requires_every_factor():
    schema = default_schema()
    with pytest.raises(SchemaError):
        StudentRecord.build({"SH": "3-9 hours"}, schema)


def test_record_validates_levels_and_ranges():
    schema = default_schema()
    values = {f.acronym: (f.levels[0] if f.levels else f.range[0])
              for f in schema.factors}
    rec = StudentRecord.build(values, schema)
    assert rec["G"] == "Female"
    bad = dict(values)
    bad["CGPA"] = 4.2
    with pytest.raises(ValueOutOfDomain):
        StudentRecord.build(bad, schema)


def test_schema_json_round_trip():
    schema = default_schema()
    again = FactorSchema.from_json(schema.to_json())
    assert again == schema
