"""Exception hierarchy shared across the audit engine.

Every error carries a stable machine-readable ``code`` so the HTTP service
and CLI can surface failures without string matching.
"""

from __future__ import annotations


class ComplaiError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "detail": str(self)}


# --- tabular ---------------------------------------------------------------

class SchemaError(ComplaiError):
    code = "schema_error"


class MissingColumn(ComplaiError):
    code = "missing_column"

    def __init__(self, column: str):
        super().__init__(f"column {column!r} missing from CSV header")
        self.column = column


class ParseError(ComplaiError):
    code = "parse_error"

    def __init__(self, row: int, column: str, token: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {token!r} as a number")
        self.row = row
        self.column = column
        self.token = token


class UnknownClassLabel(ComplaiError):
    code = "unknown_class_label"

    def __init__(self, row: int, label: str):
        super().__init__(f"row {row}: label {label!r} is not a declared class")
        self.row = row
        self.label = label


class EmptyDataset(ComplaiError):
    code = "empty_dataset"


class BadPredicate(ComplaiError):
    code = "bad_predicate"


class SchemaViolation(ComplaiError):
    code = "schema_violation"


# --- model bridge ----------------------------------------------------------

class BridgeFailure(ComplaiError):
    code = "bridge_failure"

    def __init__(self, message: str, payload: str | None = None):
        super().__init__(message if payload is None else f"{message}; raw payload: {payload!r}")
        self.payload = payload


class ShapeMismatch(ComplaiError):
    code = "shape_mismatch"

    def __init__(self, expected: int, got: int):
        super().__init__(f"model returned {got} predictions for {expected} instances")
        self.expected = expected
        self.got = got


class IncompatibleTask(ComplaiError):
    code = "incompatible_task"


class DegenerateData(ComplaiError):
    code = "degenerate_data"


# --- counterfactual search -------------------------------------------------

class MissingTolerance(ComplaiError):
    code = "missing_tolerance"


class NoUnlikeNeighbor(ComplaiError):
    code = "no_unlike_neighbor"


class QueryBudgetExceeded(ComplaiError):
    code = "query_budget_exceeded"


# --- scoring ---------------------------------------------------------------

class EmptyResults(ComplaiError):
    code = "empty_results"


class IncompatibleMetric(ComplaiError):
    code = "incompatible_metric"


class AdjR2Undefined(ComplaiError):
    code = "adj_r2_undefined"


class NoApplicableScores(ComplaiError):
    code = "no_applicable_scores"


# --- drift -------------------------------------------------------------

class FeatureSetMismatch(ComplaiError):
    code = "feature_set_mismatch"


class ZeroTrainAttribution(ComplaiError):
    code = "zero_train_attribution"


class EmptyWindow(ComplaiError):
    code = "empty_window"


# --- fairness ----------------------------------------------------------

class EmptySubgroup(ComplaiError):
    code = "empty_subgroup"


class EmptyAlternateGroup(ComplaiError):
    code = "empty_alternate_group"


class UndefinedRate(ComplaiError):
    code = "undefined_rate"


class UnknownClass(ComplaiError):
    code = "unknown_class"


class EmptyRange(ComplaiError):
    code = "empty_range"


class AllCellsEmpty(ComplaiError):
    code = "all_cells_empty"


# --- workbench ---------------------------------------------------------

class MalformedReport(ComplaiError):
    code = "malformed_report"


class MalformedPolicy(ComplaiError):
    code = "malformed_policy"


class EmptySlice(ComplaiError):
    code = "empty_slice"


class PipelineError(ComplaiError):
    """Wraps a module error with the pipeline stage it occurred in."""

    code = "pipeline_error"

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause
