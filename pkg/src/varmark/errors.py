"""Exception types raised across the package."""


class VarmarkError(Exception):
    """Base class for all package errors."""

    code = "error"


class UnsupportedLanguage(VarmarkError):
    code = "unsupported_language"


class UnparseableInput(VarmarkError):
    code = "unparseable_input"


class IllegalIdentifier(VarmarkError):
    code = "illegal_identifier"


class ReservedWord(VarmarkError):
    code = "reserved_word"


class NameCollision(VarmarkError):
    code = "name_collision"


class EmptyContext(VarmarkError):
    code = "empty_context"


class DimensionMismatch(VarmarkError):
    code = "dimension_mismatch"


class IsolatedNode(VarmarkError):
    code = "isolated_node"


class IndexOutOfRange(VarmarkError):
    code = "index_out_of_range"


class EmptyOutput(VarmarkError):
    code = "empty_output"


class TeacherUnavailable(VarmarkError):
    code = "teacher_unavailable"


class NoStatementContext(VarmarkError):
    code = "no_statement_context"


class SchemaError(VarmarkError):
    code = "schema_error"


class EmptyCorpus(VarmarkError):
    code = "empty_corpus"


class Divergence(VarmarkError):
    code = "divergence"


class CapacityExceeded(VarmarkError):
    code = "capacity_exceeded"


class NoVariables(VarmarkError):
    code = "no_variables"


class BeamExhausted(VarmarkError):
    code = "beam_exhausted"


class LengthMismatch(VarmarkError):
    code = "length_mismatch"


class UntrainedModel(VarmarkError):
    code = "untrained_model"
