"""rosetta-kb: statement-centric knowledge base engine.

Statements instantiate statement classes with a subject and labeled object
positions; schemata are authored through a ten-question wizard, terms map
through a reference-vocabulary hub, the store soft-deletes and versions, and
questions evaluate as Boolean answers or result sets.
"""

from .core import (
    LiteralValue,
    ProvenanceStamp,
    Resource,
    Value,
    canonical_serialize,
    content_hash,
    mint_upri,
)
from .errors import RosettaError
from .kb import KbConfig, KnowledgeBase
from .query import Binding, CompositeQuestion, JoinLink, QuestionStatement
from .schema import Constraint, ObjectPositionSpec, ReferenceSchema, WizardAnswers

__version__ = "0.1.0"

__all__ = [
    "Binding",
    "CompositeQuestion",
    "Constraint",
    "JoinLink",
    "KbConfig",
    "KnowledgeBase",
    "LiteralValue",
    "ObjectPositionSpec",
    "ProvenanceStamp",
    "QuestionStatement",
    "ReferenceSchema",
    "Resource",
    "RosettaError",
    "Value",
    "WizardAnswers",
    "canonical_serialize",
    "content_hash",
    "mint_upri",
]
