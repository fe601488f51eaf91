"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RosettaError(Exception):
    """Base class for every domain error raised by the knowledge base."""


# core model

class IncompleteSnapshot(RosettaError):
    pass


# term registry

class UnknownTerm(RosettaError):
    pass


class UnknownParent(RosettaError):
    pass


class CycleDetected(RosettaError):
    pass


class HubViolation(RosettaError):
    pass


class DuplicateMapping(RosettaError):
    pass


class NoMapping(RosettaError):
    pass


# schema registry

class InconsistentAnswers(RosettaError):
    pass


class UnknownConstraintClass(RosettaError):
    pass


class NoRequiredPosition(RosettaError):
    pass


class UnknownSchema(RosettaError):
    pass


class NoResourcePositions(RosettaError):
    pass


class RequiredAdditionRejected(RosettaError):
    pass


class BreakingChangeRejected(RosettaError):
    pass


class ValidationFailed(RosettaError):
    """Carries the structured validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__("validation failed: " + "; ".join(
            f"{v['position']}: {v['reason']}" for v in report))


# statement store

class UnknownStatement(RosettaError):
    pass


class LightModeImmutable(RosettaError):
    pass


class StatementDeleted(RosettaError):
    pass


class AlreadyDeleted(RosettaError):
    pass


class ConstraintViolation(RosettaError):
    pass


class UnknownPosition(RosettaError):
    pass


class IncompleteStatement(RosettaError):
    pass


class UnknownVersion(RosettaError):
    pass


class ConflictingTruthTag(RosettaError):
    pass


class LightToFullUnsupported(RosettaError):
    pass


# crosswalk engine

class UncoveredRequiredSlot(RosettaError):
    pass


class UnknownCrosswalk(RosettaError):
    pass


class TermTranslationFailed(RosettaError):
    def __init__(self, term, vocabulary):
        self.term = term
        self.vocabulary = vocabulary
        super().__init__(f"no translation of {term!r} into vocabulary {vocabulary!r}")


class SchemaMismatch(RosettaError):
    pass


class DocumentShapeMismatch(RosettaError):
    pass


# query engine

class IncompatibleBinding(RosettaError):
    pass


class IncompatibleJoin(RosettaError):
    pass


# display engine

class UnknownVariable(RosettaError):
    pass


class UnknownTemplate(RosettaError):
    pass


class TemplateSchemaMismatch(RosettaError):
    pass


class PatternSchemaMismatch(RosettaError):
    pass


# interface layer / persistence

class ReplayError(RosettaError):
    pass


class AddressInUse(RosettaError):
    pass


class DataDirectoryUnwritable(RosettaError):
    pass
