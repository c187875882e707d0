"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "FlowcheckError",
    "DictionaryError",
    "TermSyntaxError",
    "ModelLoadError",
    "UnknownElementError",
    "ExtractionError",
    "CallDepthError",
    "PropagationError",
    "ConstraintError",
]


class FlowcheckError(Exception):
    """Base class for every error raised by this package."""


class DictionaryError(FlowcheckError):
    """A label, label set or reference does not fit the data dictionary in use."""


class TermSyntaxError(FlowcheckError):
    """Malformed assignment or constraint text.

    ``position`` is the zero-based offset into ``text`` where parsing
    failed; the rendered message reports it as a one-based column.
    """

    def __init__(self, message: str, text: str | None = None, position: int | None = None):
        self.reason = message
        self.text = text
        self.position = position
        if position is not None:
            message = f"column {position + 1}: {message}"
        super().__init__(message)


class ModelLoadError(FlowcheckError):
    """A model file or document failed to load or validate.

    ``defects`` holds one human-readable message per problem found; the
    loader collects as many as it can before raising.
    """

    def __init__(self, defects):
        self.defects = tuple(defects)
        summary = f"{len(self.defects)} defect(s)"
        if self.defects:
            summary += ": " + "; ".join(self.defects)
        super().__init__(summary)


class UnknownElementError(FlowcheckError):
    """Lookup of a model element (instance, signature, scenario, ...) failed."""


class ExtractionError(FlowcheckError):
    """A usage scenario could not be expanded into action sequences."""


class CallDepthError(ExtractionError):
    """Call expansion exceeded the recursion bound (cyclic call structure)."""

    def __init__(self, message: str, call_chain=()):
        self.call_chain = tuple(call_chain)
        super().__init__(message)


class PropagationError(FlowcheckError):
    """Label propagation hit an inconsistent sequence or frame state."""


class ConstraintError(FlowcheckError):
    """A constraint is malformed or references unknown labels."""
