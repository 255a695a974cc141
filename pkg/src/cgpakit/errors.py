"""Exception types shared across the toolkit.

Every error carries a stable ``code`` string so the CLI and the HTTP
service can emit machine-parsable errors without string matching.
"""

from __future__ import annotations


class CgpakitError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


# --- data model ---------------------------------------------------------

class MissingColumn(CgpakitError):
    code = "MissingColumn"


class UnknownColumn(CgpakitError):
    code = "UnknownColumn"


class ValueOutOfDomain(CgpakitError):
    code = "ValueOutOfDomain"

    def __init__(self, row: int, acronym: str, value=None):
        self.row = row
        self.acronym = acronym
        self.value = value
        super().__init__(f"row {row}, column {acronym}: value {value!r} outside declared domain")


class EmptyCell(CgpakitError):
    code = "EmptyCell"

    def __init__(self, row: int, acronym: str):
        self.row = row
        self.acronym = acronym
        super().__init__(f"row {row}, column {acronym}: empty cell")


class UnknownLevel(CgpakitError):
    code = "UnknownLevel"

    def __init__(self, acronym: str, value):
        self.acronym = acronym
        self.value = value
        super().__init__(f"column {acronym}: level {value!r} not declared in schema")


class CyclicSpec(CgpakitError):
    code = "CyclicSpec"


class DegenerateSplit(CgpakitError):
    code = "DegenerateSplit"


class DegenerateColumn(CgpakitError):
    code = "DegenerateColumn"


class SchemaError(CgpakitError):
    code = "SchemaError"


# --- stats --------------------------------------------------------------

class ContinuousFactor(CgpakitError):
    code = "ContinuousFactor"


class SingularCovariance(CgpakitError):
    code = "SingularCovariance"


class TooFewSamples(CgpakitError):
    code = "TooFewSamples"


# --- discovery ----------------------------------------------------------

class SingularRegression(CgpakitError):
    code = "SingularRegression"


class IcaNonConvergence(CgpakitError):
    code = "IcaNonConvergence"

    def __init__(self, max_iters: int):
        self.max_iters = max_iters
        super().__init__(f"fixed-point ICA did not converge in {max_iters} iterations")


class NodeMismatch(CgpakitError):
    code = "NodeMismatch"


class GraphError(CgpakitError):
    code = "GraphError"


# --- predictors ---------------------------------------------------------

class SingularSystem(CgpakitError):
    code = "SingularSystem"


class NonConvergence(CgpakitError):
    code = "NonConvergence"

    def __init__(self, max_iters: int, detail: str = ""):
        self.max_iters = max_iters
        super().__init__(f"solver did not converge in {max_iters} iterations{': ' + detail if detail else ''}")


class EmptyData(CgpakitError):
    code = "EmptyData"


class SingleClass(CgpakitError):
    code = "SingleClass"


class DimensionMismatch(CgpakitError):
    code = "DimensionMismatch"


class OutOfRange(CgpakitError):
    code = "OutOfRange"


class LengthMismatch(CgpakitError):
    code = "LengthMismatch"


class TooFewRows(CgpakitError):
    code = "TooFewRows"


# --- explainers ---------------------------------------------------------

class TooManyFeatures(CgpakitError):
    code = "TooManyFeatures"


class DegenerateNeighborhood(CgpakitError):
    code = "DegenerateNeighborhood"


# --- artifacts / service -------------------------------------------------

class ArtifactCorrupt(CgpakitError):
    code = "ArtifactCorrupt"


class InsufficientData(CgpakitError):
    code = "InsufficientData"
