"""Reference schemata: wizard intake, validation, evolution, shape and OWL export."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from .core import CLASS_TERM, DATATYPES, Value, literal_is_valid
from .errors import (
    BreakingChangeRejected,
    InconsistentAnswers,
    NoRequiredPosition,
    NoResourcePositions,
    RequiredAdditionRejected,
    UnknownConstraintClass,
    UnknownSchema,
)
from .terms import TermRegistry

LIGHT = "light"
FULL = "full"

LOGICAL_FLAGS = ("transitive", "symmetric", "reflexive")

_VAR_RE = re.compile(r"\$\{([A-Za-z0-9_]+)\}")


@dataclass(frozen=True)
class Constraint:
    """Either a subclass-closed resource constraint or a literal constraint."""

    kind: str  # "resource" | "literal"
    class_upri: Optional[str] = None
    datatype: Optional[str] = None
    pattern: Optional[str] = None
    minimum: Optional[str] = None
    maximum: Optional[str] = None

    def __post_init__(self):
        if self.kind == "resource":
            if not self.class_upri:
                raise ValueError("resource constraint needs a class")
            if self.pattern or self.minimum or self.maximum or self.datatype:
                raise ValueError("pattern/range/datatype apply only to literal constraints")
        elif self.kind == "literal":
            if self.datatype not in DATATYPES:
                raise ValueError(f"unknown datatype {self.datatype!r}")
        else:
            raise ValueError(f"unknown constraint kind {self.kind!r}")

    def to_doc(self) -> dict:
        if self.kind == "resource":
            return {"kind": "resource", "class": self.class_upri}
        doc = {"kind": "literal", "datatype": self.datatype}
        if self.pattern:
            doc["pattern"] = self.pattern
        if self.minimum is not None or self.maximum is not None:
            doc["range"] = {"min": self.minimum, "max": self.maximum}
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Constraint":
        if doc["kind"] == "resource":
            return cls(kind="resource", class_upri=doc["class"])
        rng = doc.get("range") or {}
        return cls(kind="literal", datatype=doc["datatype"], pattern=doc.get("pattern"),
                   minimum=rng.get("min"), maximum=rng.get("max"))


@dataclass(frozen=True)
class ObjectPositionSpec:
    label: str
    required: bool
    constraint: Constraint
    description: str = ""
    logical_flags: Tuple[str, ...] = ()
    position_class_upri: Optional[str] = None

    def to_doc(self) -> dict:
        return {
            "label": self.label,
            "required": self.required,
            "constraint": self.constraint.to_doc(),
            "description": self.description,
            "logical": list(self.logical_flags),
            "position_class": self.position_class_upri,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ObjectPositionSpec":
        return cls(doc["label"], doc["required"], Constraint.from_doc(doc["constraint"]),
                   doc.get("description", ""), tuple(doc.get("logical", ())),
                   doc.get("position_class"))


@dataclass(frozen=True)
class ReferenceSchema:
    statement_class: str
    predicate_label: str
    description: str
    examples: Tuple[str, ...]
    subject_label: str
    subject_class: str
    positions: Tuple[ObjectPositionSpec, ...]
    paradigm: str
    dynamic_label_default: str
    version: int = 1

    def position(self, label: str) -> Optional[ObjectPositionSpec]:
        for pos in self.positions:
            if pos.label == label:
                return pos
        return None

    @property
    def required_labels(self) -> Tuple[str, ...]:
        return tuple(p.label for p in self.positions if p.required)

    def to_doc(self) -> dict:
        return {
            "statement_class": self.statement_class,
            "predicate_label": self.predicate_label,
            "description": self.description,
            "examples": list(self.examples),
            "paradigm": self.paradigm,
            "subject": {"label": self.subject_label, "class": self.subject_class},
            "positions": [p.to_doc() for p in self.positions],
            "dynamic_label": self.dynamic_label_default,
            "version": self.version,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ReferenceSchema":
        return cls(
            statement_class=doc["statement_class"],
            predicate_label=doc["predicate_label"],
            description=doc.get("description", ""),
            examples=tuple(doc.get("examples", ())),
            subject_label=doc["subject"]["label"],
            subject_class=doc["subject"]["class"],
            positions=tuple(ObjectPositionSpec.from_doc(p) for p in doc["positions"]),
            paradigm=doc.get("paradigm", LIGHT),
            dynamic_label_default=doc.get("dynamic_label", ""),
            version=doc.get("version", 1),
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_doc(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "ReferenceSchema":
        return cls.from_doc(yaml.safe_load(text))


@dataclass(frozen=True)
class WizardAnswers:
    """Answers to the ten schema-authoring questions.

    `labels` and `constraints` list the subject first, then the object
    positions; the remaining per-position lists cover object positions only.
    """

    examples: Tuple[str, ...]
    predicate: str
    description: str
    position_count: int
    labels: Tuple[str, ...]
    required_flags: Tuple[bool, ...]
    position_descriptions: Tuple[str, ...]
    constraints: Tuple[Constraint, ...]
    logical_flags: Tuple[Tuple[str, ...], ...]
    dynamic_label: str

    def validate(self) -> None:
        n = self.position_count
        checks = (
            (len(self.labels), n + 1, "labels"),
            (len(self.required_flags), n, "required flags"),
            (len(self.position_descriptions), n, "position descriptions"),
            (len(self.constraints), n + 1, "constraints"),
            (len(self.logical_flags), n, "logical flags"),
        )
        for actual, expected, what in checks:
            if actual != expected:
                raise InconsistentAnswers(
                    f"{what}: expected {expected} entries, got {actual}")
        if len(set(self.labels)) != len(self.labels):
            raise InconsistentAnswers("position labels must be unique")
        if self.constraints[0].kind != "resource":
            raise InconsistentAnswers("the subject constraint must be a resource class")
        mentioned = set(_VAR_RE.findall(self.dynamic_label))
        must_mention = {self.labels[0]} | {
            lbl for lbl, req in zip(self.labels[1:], self.required_flags) if req}
        missing = must_mention - mentioned
        if missing:
            raise InconsistentAnswers(
                "dynamic label must mention " + ", ".join(sorted(missing)))

    def to_doc(self) -> dict:
        return {
            "examples": list(self.examples),
            "predicate": self.predicate,
            "description": self.description,
            "position_count": self.position_count,
            "labels": list(self.labels),
            "required": list(self.required_flags),
            "position_descriptions": list(self.position_descriptions),
            "constraints": [c.to_doc() for c in self.constraints],
            "logical": [list(flags) for flags in self.logical_flags],
            "dynamic_label": self.dynamic_label,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "WizardAnswers":
        return cls(
            examples=tuple(doc.get("examples", ())),
            predicate=doc["predicate"],
            description=doc.get("description", ""),
            position_count=doc["position_count"],
            labels=tuple(doc["labels"]),
            required_flags=tuple(doc["required"]),
            position_descriptions=tuple(doc.get("position_descriptions",
                                                [""] * doc["position_count"])),
            constraints=tuple(Constraint.from_doc(c) for c in doc["constraints"]),
            logical_flags=tuple(tuple(f) for f in doc.get(
                "logical", [()] * doc["position_count"])),
            dynamic_label=doc["dynamic_label"],
        )


# Question metadata served to every front end so prompts stay identical
# across CLI and UI.
WIZARD_QUESTIONS = (
    {"number": 1, "field": "examples",
     "prompt": "Provide some example statements.", "repeat": "list"},
    {"number": 2, "field": "predicate",
     "prompt": "What is the predicate or verb of the statement?", "repeat": "one"},
    {"number": 3, "field": "description",
     "prompt": "Describe the type of statement this schema will cover.",
     "repeat": "one"},
    {"number": 4, "field": "position_count",
     "prompt": "How many object positions should the statement cover?",
     "repeat": "one"},
    {"number": 5, "field": "labels",
     "prompt": "Give the subject position and each object position a short, "
               "meaningful label.", "repeat": "subject+positions"},
    {"number": 6, "field": "required",
     "prompt": "Which object positions are required to form a meaningful "
               "statement? All others are optional.", "repeat": "positions"},
    {"number": 7, "field": "position_descriptions",
     "prompt": "For each object position, briefly describe the objects it "
               "covers and give typical examples.", "repeat": "positions"},
    {"number": 8, "field": "constraints",
     "prompt": "For each position, is the object a resource or a literal? "
               "Pick the allowed class for resources, or the datatype plus "
               "optional pattern/range constraints for literals.",
     "repeat": "subject+positions"},
    {"number": 9, "field": "logical",
     "prompt": "Do any logical properties (e.g. transitivity) apply to the "
               "predicate, and if so at which object position?",
     "repeat": "positions"},
    {"number": 10, "field": "dynamic_label",
     "prompt": "Write a human-readable sentence using the labels of the "
               "subject and the object positions.", "repeat": "one"},
)


def check_value(constraint: Constraint, value: Value, registry: TermRegistry,
                allow_placeholders: bool = False) -> Optional[str]:
    """Return a violation reason, or None when the value satisfies the constraint."""
    if constraint.kind == "resource":
        if not value.is_resource:
            return "wrong-kind"
        res = value.resource
        if res.kind in ("some-instance", "every-instance"):
            if not allow_placeholders:
                return "wrong-kind"
            if res.upri not in registry or not registry.is_subclass_of(
                    res.upri, constraint.class_upri):
                return "class-violation"
            return None
        if not registry.instantiates(res.upri, constraint.class_upri):
            return "class-violation"
        return None
    # literal constraint
    if value.is_resource:
        return "wrong-kind"
    lit = value.literal
    if lit.datatype != constraint.datatype or not literal_is_valid(lit.lexical,
                                                                   lit.datatype):
        return "datatype-violation"
    if constraint.pattern and not re.fullmatch(constraint.pattern, lit.lexical):
        return "pattern-violation"
    if constraint.minimum is not None or constraint.maximum is not None:
        if lit.datatype in ("decimal", "integer"):
            val = Decimal(lit.lexical)
            lo = Decimal(constraint.minimum) if constraint.minimum is not None else None
            hi = Decimal(constraint.maximum) if constraint.maximum is not None else None
        else:
            val = lit.lexical
            lo, hi = constraint.minimum, constraint.maximum
        if (lo is not None and val < lo) or (hi is not None and val > hi):
            return "range-violation"
    return None


class SchemaRegistry:
    """Stores every version of every reference schema."""

    def __init__(self, registry: TermRegistry):
        self._registry = registry
        self._schemas: Dict[str, List[ReferenceSchema]] = {}

    def __contains__(self, statement_class: str) -> bool:
        return statement_class in self._schemas

    def get(self, statement_class: str, version: Optional[int] = None) -> ReferenceSchema:
        versions = self._schemas.get(statement_class)
        if not versions:
            raise UnknownSchema(statement_class)
        if version is None:
            return versions[-1]
        if not 1 <= version <= len(versions):
            raise UnknownSchema(f"{statement_class} has no version {version}")
        return versions[version - 1]

    def all_latest(self) -> List[ReferenceSchema]:
        return [v[-1] for v in self._schemas.values()]

    # -- wizard -----------------------------------------------------------

    def create_from_wizard(self, answers: WizardAnswers, paradigm: str,
                           statement_class: str,
                           position_classes: Sequence[Optional[str]]) -> ReferenceSchema:
        """Build and store a schema from validated wizard answers.

        `statement_class` and `position_classes` are minted by the caller so
        that replaying an event log reproduces identical identifiers.
        """
        answers.validate()
        if paradigm not in (LIGHT, FULL):
            raise ValueError(f"unknown paradigm {paradigm!r}")
        if not any(answers.required_flags):
            raise NoRequiredPosition(answers.predicate)
        for constraint in answers.constraints:
            if constraint.kind == "resource":
                if constraint.class_upri not in self._registry or \
                        self._registry.get(constraint.class_upri).kind != CLASS_TERM:
                    raise UnknownConstraintClass(constraint.class_upri)
        positions = tuple(
            ObjectPositionSpec(
                label=answers.labels[i + 1],
                required=answers.required_flags[i],
                constraint=answers.constraints[i + 1],
                description=answers.position_descriptions[i],
                logical_flags=answers.logical_flags[i],
                position_class_upri=position_classes[i] if paradigm == FULL else None,
            )
            for i in range(answers.position_count))
        schema = ReferenceSchema(
            statement_class=statement_class,
            predicate_label=answers.predicate,
            description=answers.description,
            examples=answers.examples,
            subject_label=answers.labels[0],
            subject_class=answers.constraints[0].class_upri,
            positions=positions,
            paradigm=paradigm,
            dynamic_label_default=answers.dynamic_label,
            version=1,
        )
        self._schemas[statement_class] = [schema]
        return schema

    # -- validation -------------------------------------------------------

    def validate_statement(self, schema: ReferenceSchema, subject: Value,
                           bindings: Mapping[str, Value],
                           allow_placeholders: bool = False) -> List[dict]:
        """Report of violations; empty list means the statement is valid."""
        report: List[dict] = []
        if not subject.is_resource:
            report.append({"position": schema.subject_label, "reason": "wrong-kind"})
        else:
            reason = check_value(Constraint(kind="resource",
                                            class_upri=schema.subject_class),
                                 subject, self._registry, allow_placeholders)
            if reason:
                report.append({"position": schema.subject_label, "reason": reason})
        known = {p.label for p in schema.positions}
        for label in bindings:
            if label not in known:
                report.append({"position": label, "reason": "unknown-position"})
        for pos in schema.positions:
            value = bindings.get(pos.label)
            if value is None:
                if pos.required:
                    report.append({"position": pos.label, "reason": "missing-required"})
                continue
            reason = check_value(pos.constraint, value, self._registry,
                                 allow_placeholders)
            if reason:
                report.append({"position": pos.label, "reason": reason})
        return report

    # -- evolution --------------------------------------------------------

    def evolve(self, statement_class: str,
               new_positions: Sequence[ObjectPositionSpec]) -> ReferenceSchema:
        current = self.get(statement_class)
        existing = {p.label for p in current.positions}
        for pos in new_positions:
            if pos.required:
                raise RequiredAdditionRejected(pos.label)
            if pos.label in existing or pos.label == current.subject_label:
                raise BreakingChangeRejected(f"position {pos.label!r} already exists")
        evolved = replace(current,
                          positions=current.positions + tuple(new_positions),
                          version=current.version + 1)
        self._schemas[statement_class].append(evolved)
        return evolved

    # -- derived artifacts ------------------------------------------------

    def derived_property_label(self, schema: ReferenceSchema,
                               position: ObjectPositionSpec) -> str:
        """Label rule: predicate verb + domain-class qualifier + position label,
        e.g. has_part on MATERIAL OBJECT with a PART slot -> 'has material part'."""
        verb = re.split(r"[\s_]+", schema.predicate_label.strip())[0].lower()
        domain_label = self._registry.label_of(schema.subject_class)
        qualifier = domain_label.split()[0].lower()
        return f"{verb} {qualifier} {position.label.lower().replace('_', ' ')}"

    def derive_owl(self, schema: ReferenceSchema) -> dict:
        """Derived object properties for the resource-constrained required positions."""
        resource_positions = [p for p in schema.positions
                              if p.required and p.constraint.kind == "resource"]
        if not resource_positions:
            raise NoResourcePositions(schema.statement_class)
        properties = []
        for pos in resource_positions:
            properties.append({
                "label": self.derived_property_label(schema, pos),
                "subproperty_of": "required object position",
                "domain": schema.subject_class,
                "range": pos.constraint.class_upri,
                "axioms": sorted(pos.logical_flags),
                "statement_class": schema.statement_class,
            })
        return {
            "statement_class": schema.statement_class,
            "schema_version": schema.version,
            "properties": properties,
        }

    def export_shape(self, schema: ReferenceSchema) -> dict:
        """Neutral shape document: target class, subject class, per-slot cardinalities."""
        return {
            "target_class": schema.statement_class,
            "subject": {"class": schema.subject_class},
            "properties": [
                {
                    "label": p.label,
                    "min": 1 if p.required else 0,
                    "max": 1,
                    "constraint": p.constraint.to_doc(),
                }
                for p in schema.positions
            ],
            "version": schema.version,
        }

    def export_shape_bytes(self, schema: ReferenceSchema) -> bytes:
        return json.dumps(self.export_shape(schema), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")

    # -- persistence ------------------------------------------------------

    def to_state(self) -> dict:
        return {sc: [s.to_doc() for s in versions]
                for sc, versions in self._schemas.items()}

    def load_state(self, state: dict) -> None:
        self._schemas = {
            sc: [ReferenceSchema.from_doc(doc) for doc in versions]
            for sc, versions in state.items()
        }
