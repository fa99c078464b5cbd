"""Engine error hierarchy.

Every error carries a stable string ``code`` so the session protocol can
report failures to clients without leaking Python class names.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-level failures."""

    code = "EngineError"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail


class EmptyTag(EngineError):
    code = "EmptyTag"


class ScaleOutOfRange(EngineError):
    code = "ScaleOutOfRange"


class UnknownEntity(EngineError):
    code = "UnknownEntity"


class UnknownRecording(EngineError):
    code = "UnknownRecording"


class SameObject(EngineError):
    code = "SameObject"


class NoSnapAnchor(EngineError):
    code = "NoSnapAnchor"


class NotAClone(EngineError):
    code = "NotAClone"


class NotStatic(EngineError):
    code = "NotStatic"


class AlreadyGrouped(EngineError):
    code = "AlreadyGrouped"


class TooFewMembers(EngineError):
    code = "TooFewMembers"


class CannotRemoveControlledBody(EngineError):
    code = "CannotRemoveControlledBody"


class EmptyUndoStack(EngineError):
    code = "EmptyUndoStack"


class BadTimestep(EngineError):
    code = "BadTimestep"


class TargetNotOnGround(EngineError):
    code = "TargetNotOnGround"


class AlreadyRecording(EngineError):
    code = "AlreadyRecording"


class NotRecording(EngineError):
    code = "NotRecording"


class EmptyRecording(EngineError):
    code = "EmptyRecording"


class ScopeViolation(EngineError):
    code = "ScopeViolation"


class HandOccupied(EngineError):
    code = "HandOccupied"


class ParseError(EngineError):
    code = "ParseError"


class ValidationError(EngineError):
    code = "ValidationError"


class UnresolvedName(EngineError):
    code = "UnresolvedName"


class SceneLoadError(EngineError):
    code = "SceneLoadError"
