"""Design-time confidentiality analysis of software architecture models.

The package answers one question: which data, carrying which
characteristics, reaches which parts of a deployed architecture, and
does any of it violate a stated confidentiality constraint?

Typical use::

    from flowcheck import DataFlowAnalysis, parse_constraint

    analysis = DataFlowAnalysis.from_file("model.json")
    sequences = analysis.find_all_sequences()
    propagated = analysis.evaluate_data_flows(sequences)
    constraint = parse_constraint(
        "VIOLATION geo WHERE node.ServerLocation.nonEU "
        "AND DATA data.DataSensitivity.Personal",
        analysis.model.dictionary,
    )
    violations = analysis.query_all(propagated, [constraint])
"""

from .analysis import DataFlowAnalysis
from .constraints import (
    Constraint,
    Violation,
    format_report,
    load_constraints,
    parse_constraint,
    parse_constraints_text,
    query,
    query_many,
)
from .errors import (
    CallDepthError,
    ConstraintError,
    DictionaryError,
    ExtractionError,
    FlowcheckError,
    ModelLoadError,
    PropagationError,
    TermSyntaxError,
    UnknownElementError,
)
from .extraction import ActionSequence, find_all_sequences
from .labels import DataDictionary, Label, LabelSet, LabelType
from .loader import load_model, load_model_text, model_to_json, save_model
from .model import ArchitectureModel, validate_model
from .propagation import (
    DataFlowVariable,
    ElementResult,
    PropagatedSequence,
    evaluate_all,
    evaluate_assignments,
    propagate,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSequence",
    "ArchitectureModel",
    "CallDepthError",
    "Constraint",
    "ConstraintError",
    "DataDictionary",
    "DataFlowAnalysis",
    "DataFlowVariable",
    "DictionaryError",
    "ElementResult",
    "ExtractionError",
    "FlowcheckError",
    "Label",
    "LabelSet",
    "LabelType",
    "ModelLoadError",
    "PropagatedSequence",
    "PropagationError",
    "TermSyntaxError",
    "UnknownElementError",
    "Violation",
    "evaluate_all",
    "evaluate_assignments",
    "find_all_sequences",
    "format_report",
    "load_constraints",
    "load_model",
    "load_model_text",
    "model_to_json",
    "parse_constraint",
    "parse_constraints_text",
    "propagate",
    "query",
    "query_many",
    "save_model",
    "validate_model",
    "__version__",
]
