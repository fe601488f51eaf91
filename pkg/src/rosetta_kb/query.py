"""Question statements and their evaluation against the statement store.

Questions mirror a reference schema: each slot carries a binding that is
either fully specified (exact) or a placeholder (some-instance,
every-instance, class, literal filter, unbound).  Fully specified questions
answer true/false under a closed-world reading; any placeholder turns the
answer into the list of matching statements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .core import CLASS_TERM, EVERY_INSTANCE, SOME_INSTANCE, Value
from .errors import IncompatibleBinding, IncompatibleJoin, UnknownSchema
from .schema import Constraint, ReferenceSchema, SchemaRegistry, check_value
from .store import StatementRecord, StatementStore
from .terms import TermRegistry

EXACT = "exact"
SOME = "some-instance"
EVERY = "every-instance"
CLASS = "class"
FILTER = "literal-filter"
UNBOUND = "unbound"


@dataclass(frozen=True)
class Binding:
    kind: str
    value: Optional[Value] = None          # exact
    class_upri: Optional[str] = None       # some/every/class
    datatype: Optional[str] = None         # literal-filter
    pattern: Optional[str] = None
    minimum: Optional[str] = None
    maximum: Optional[str] = None

    @classmethod
    def exact(cls, value: Value) -> "Binding":
        return cls(EXACT, value=value)

    @classmethod
    def some_instance_of(cls, class_upri: str) -> "Binding":
        return cls(SOME, class_upri=class_upri)

    @classmethod
    def every_instance_of(cls, class_upri: str) -> "Binding":
        return cls(EVERY, class_upri=class_upri)

    @classmethod
    def of_class(cls, class_upri: str) -> "Binding":
        return cls(CLASS, class_upri=class_upri)

    @classmethod
    def literal_filter(cls, datatype: str, pattern: Optional[str] = None,
                       minimum: Optional[str] = None,
                       maximum: Optional[str] = None) -> "Binding":
        return cls(FILTER, datatype=datatype, pattern=pattern,
                   minimum=minimum, maximum=maximum)

    @classmethod
    def unbound(cls) -> "Binding":
        return cls(UNBOUND)

    def to_doc(self) -> dict:
        if self.kind == EXACT:
            return {"kind": EXACT, "value": self.value.to_doc()}
        if self.kind in (SOME, EVERY, CLASS):
            return {"kind": self.kind, "class": self.class_upri}
        if self.kind == FILTER:
            doc = {"kind": FILTER, "datatype": self.datatype}
            if self.pattern:
                doc["pattern"] = self.pattern
            if self.minimum is not None or self.maximum is not None:
                doc["range"] = {"min": self.minimum, "max": self.maximum}
            return doc
        return {"kind": UNBOUND}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Binding":
        kind = doc["kind"]
        if kind == EXACT:
            return cls.exact(Value.from_doc(doc["value"]))
        if kind in (SOME, EVERY, CLASS):
            return cls(kind, class_upri=doc["class"])
        if kind == FILTER:
            rng = doc.get("range") or {}
            return cls.literal_filter(doc["datatype"], doc.get("pattern"),
                                      rng.get("min"), rng.get("max"))
        if kind == UNBOUND:
            return cls.unbound()
        raise ValueError(f"unknown binding kind {kind!r}")


@dataclass
class QuestionStatement:
    schema: str
    subject_binding: Binding
    position_bindings: Dict[str, Binding] = field(default_factory=dict)
    negated: bool = False
    upri: Optional[str] = None
    stored: bool = False

    def to_doc(self) -> dict:
        doc = {
            "schema": self.schema,
            "subject": self.subject_binding.to_doc(),
            "positions": {label: b.to_doc()
                          for label, b in sorted(self.position_bindings.items())},
        }
        if self.negated:
            doc["negated"] = True
        if self.upri:
            doc["upri"] = self.upri
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "QuestionStatement":
        return cls(
            schema=doc["schema"],
            subject_binding=Binding.from_doc(doc["subject"]),
            position_bindings={label: Binding.from_doc(b)
                               for label, b in doc.get("positions", {}).items()},
            negated=doc.get("negated", False),
            upri=doc.get("upri"),
        )


@dataclass(frozen=True)
class JoinLink:
    left_child: int
    left_slot: str
    right_child: int
    right_slot: str

    def to_doc(self) -> dict:
        return {"left": {"child": self.left_child, "slot": self.left_slot},
                "right": {"child": self.right_child, "slot": self.right_slot}}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "JoinLink":
        return cls(doc["left"]["child"], doc["left"]["slot"],
                   doc["right"]["child"], doc["right"]["slot"])


@dataclass
class CompositeQuestion:
    op: str  # "and" | "or"
    children: List[Union[QuestionStatement, "CompositeQuestion"]]
    joins: List[JoinLink] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {"composite": {
            "op": self.op,
            "children": [c.to_doc() for c in self.children],
            "joins": [j.to_doc() for j in self.joins],
        }}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "CompositeQuestion":
        body = doc["composite"]
        children = []
        for child in body["children"]:
            if "composite" in child:
                children.append(cls.from_doc(child))
            else:
                children.append(QuestionStatement.from_doc(child))
        return cls(body["op"], children,
                   [JoinLink.from_doc(j) for j in body.get("joins", ())])


def question_from_doc(doc: Mapping) -> Union[QuestionStatement, CompositeQuestion]:
    if "composite" in doc:
        return CompositeQuestion.from_doc(doc)
    return QuestionStatement.from_doc(doc)


def _literal_key(value: Value) -> tuple:
    lit = value.literal
    if lit.datatype in ("decimal", "integer"):
        return (lit.datatype, str(Decimal(lit.lexical)))
    return (lit.datatype, lit.lexical)


def value_key(value: Value):
    """Equality key for joins and exact matching."""
    if value.is_resource:
        return ("res", value.resource.upri)
    return ("lit",) + _literal_key(value)


class QueryEngine:
    def __init__(self, terms: TermRegistry, schemas: SchemaRegistry,
                 store: StatementStore):
        self._terms = terms
        self._schemas = schemas
        self._store = store
        self._index_stamp = -1
        self._by_class: Dict[str, List[str]] = {}
        self._by_subject: Dict[Tuple[str, str], List[str]] = {}
        self._by_position: Dict[Tuple[str, str, str], List[str]] = {}

    # -- construction -----------------------------------------------------

    def build_question(self, schema_id: str, subject_binding: Binding,
                       position_bindings: Mapping[str, Binding],
                       negated: bool = False) -> QuestionStatement:
        schema = self._schemas.get(schema_id)
        self._check_resource_binding(subject_binding, schema.subject_class,
                                     schema.subject_label)
        for label, binding in position_bindings.items():
            position = schema.position(label)
            if position is None:
                raise IncompatibleBinding(f"unknown position {label!r}")
            if position.constraint.kind == "resource":
                self._check_resource_binding(binding,
                                             position.constraint.class_upri, label)
            else:
                self._check_literal_binding(binding, position.constraint, label)
        return QuestionStatement(schema_id, subject_binding,
                                 dict(position_bindings), negated)

    def _check_resource_binding(self, binding: Binding, slot_class: str,
                                label: str) -> None:
        if binding.kind == EXACT:
            if not binding.value.is_resource:
                raise IncompatibleBinding(f"{label}: resource slot bound to literal")
            return
        if binding.kind in (SOME, EVERY, CLASS):
            if binding.class_upri not in self._terms or \
                    not self._terms.is_subclass_of(binding.class_upri, slot_class):
                raise IncompatibleBinding(
                    f"{label}: {binding.class_upri} is not a subclass of {slot_class}")
            return
        if binding.kind == FILTER:
            raise IncompatibleBinding(f"{label}: literal filter on a resource slot")

    @staticmethod
    def _check_literal_binding(binding: Binding, constraint: Constraint,
                               label: str) -> None:
        if binding.kind == EXACT:
            if binding.value.is_resource:
                raise IncompatibleBinding(f"{label}: literal slot bound to resource")
            if binding.value.literal.datatype != constraint.datatype:
                raise IncompatibleBinding(f"{label}: datatype mismatch")
            return
        if binding.kind == FILTER:
            if binding.datatype != constraint.datatype:
                raise IncompatibleBinding(f"{label}: datatype mismatch")
            return
        if binding.kind != UNBOUND:
            raise IncompatibleBinding(
                f"{label}: {binding.kind} placeholder on a literal slot")

    # -- matching ---------------------------------------------------------

    def _subject_matches(self, binding: Binding, record: StatementRecord) -> bool:
        subject = record.subject.resource
        if subject is None:
            return False
        if binding.kind == EXACT:
            return subject.upri == binding.value.resource.upri
        if binding.kind == SOME:
            return self._terms.instantiates(subject.upri, binding.class_upri) or (
                subject.kind == SOME_INSTANCE
                and subject.upri in self._terms
                and self._terms.is_subclass_of(subject.upri, binding.class_upri))
        if binding.kind == EVERY:
            if record.effective_truth_tag != "universal":
                return False
            return subject.upri == binding.class_upri
        if binding.kind == CLASS:
            if subject.kind == CLASS_TERM:
                return subject.upri == binding.class_upri
            return binding.class_upri in self._terms.direct_classes(subject.upri)
        return True  # unbound

    def _value_matches(self, binding: Binding, value: Value,
                       record: StatementRecord) -> bool:
        if binding.kind == UNBOUND:
            return True
        if binding.kind == EXACT:
            return value_key(value) == value_key(binding.value)
        if binding.kind == FILTER:
            if value.is_resource:
                return False
            constraint = Constraint(kind="literal", datatype=binding.datatype,
                                    pattern=binding.pattern,
                                    minimum=binding.minimum,
                                    maximum=binding.maximum)
            return check_value(constraint, value, self._terms) is None
        if not value.is_resource:
            return False
        res = value.resource
        if binding.kind == SOME:
            return self._terms.instantiates(res.upri, binding.class_upri)
        if binding.kind == EVERY:
            return (record.effective_truth_tag == "universal"
                    and res.upri == binding.class_upri)
        if binding.kind == CLASS:
            return res.kind == CLASS_TERM and res.upri == binding.class_upri
        return False

    def matches(self, question: QuestionStatement,
                record: StatementRecord) -> bool:
        if record.statement_class != question.schema or not record.current:
            return False
        if "question" in record.tags:
            return False
        if ("negation" in record.tags) != question.negated:
            return False
        if not self._subject_matches(question.subject_binding, record):
            return False
        schema = self._schemas.get(question.schema, record.schema_version) \
            if record.schema_version else self._schemas.get(question.schema)
        _, bindings = self._store.current_view(record.upri)
        for label, binding in question.position_bindings.items():
            value = bindings.get(label)
            if value is None:
                if binding.kind == UNBOUND:
                    continue
                return False
            if not self._value_matches(binding, value, record):
                return False
        # unbound required positions are implicitly some-instance of the slot
        # class; stored statements always bind them, so nothing further to do.
        return True

    # -- evaluation -------------------------------------------------------

    @staticmethod
    def is_fully_specified(question: QuestionStatement,
                           schema: ReferenceSchema) -> bool:
        if question.subject_binding.kind != EXACT:
            return False
        for binding in question.position_bindings.values():
            if binding.kind not in (EXACT, UNBOUND):
                return False
        for label in schema.required_labels:
            binding = question.position_bindings.get(label)
            if binding is None or binding.kind != EXACT:
                return False
        return True

    def _refresh_indexes(self) -> None:
        if self._index_stamp == self._store.mutation_counter:
            return
        self._by_class.clear()
        self._by_subject.clear()
        self._by_position.clear()
        for record in self._store.all_statements():
            if "question" in record.tags:
                continue
            cls = record.statement_class
            self._by_class.setdefault(cls, []).append(record.upri)
            if record.subject.is_resource:
                self._by_subject.setdefault(
                    (cls, record.subject.resource.upri), []).append(record.upri)
            _, bindings = self._store.current_view(record.upri)
            for label, value in bindings.items():
                if value.is_resource:
                    self._by_position.setdefault(
                        (cls, label, value.resource.upri), []).append(record.upri)
        self._index_stamp = self._store.mutation_counter

    def _candidates(self, question: QuestionStatement) -> List[str]:
        self._refresh_indexes()
        if question.subject_binding.kind == EXACT:
            return self._by_subject.get(
                (question.schema, question.subject_binding.value.resource.upri), [])
        for label, binding in sorted(question.position_bindings.items()):
            if binding.kind == EXACT and binding.value.is_resource:
                return self._by_position.get(
                    (question.schema, label, binding.value.resource.upri), [])
        return self._by_class.get(question.schema, [])

    def evaluate(self, question: QuestionStatement):
        """Boolean for fully specified questions, matching statements otherwise."""
        schema = self._schemas.get(question.schema)
        results = [upri for upri in self._candidates(question)
                   if self.matches(question, self._store.get(upri))]
        if self.is_fully_specified(question, schema):
            return len(results) > 0
        return sorted(results)

    # -- composites -------------------------------------------------------

    def _leaf_results(self, node) -> List[Tuple[str, ...]]:
        if isinstance(node, QuestionStatement):
            matches = [upri for upri in self._candidates(node)
                       if self.matches(node, self._store.get(upri))]
            return [(upri,) for upri in sorted(matches)]
        return self._evaluate_node(node)

    def _slot_key(self, statement: str, slot: str):
        record = self._store.get(statement)
        if slot == "subject":
            return value_key(record.subject)
        _, bindings = self._store.current_view(statement)
        value = bindings.get(slot)
        return None if value is None else value_key(value)

    def _check_join(self, node: CompositeQuestion, join: JoinLink) -> None:
        for child_index, slot in ((join.left_child, join.left_slot),
                                  (join.right_child, join.right_slot)):
            if not 0 <= child_index < len(node.children):
                raise IncompatibleJoin(f"no child {child_index}")
            child = node.children[child_index]
            if not isinstance(child, QuestionStatement):
                raise IncompatibleJoin("joins must reference leaf questions")
            schema = self._schemas.get(child.schema)
            if slot == "subject":
                continue
            position = schema.position(slot)
            if position is None:
                raise IncompatibleJoin(f"unknown join slot {slot!r}")
            if position.constraint.kind != "resource":
                raise IncompatibleJoin(f"join slot {slot!r} is not a resource slot")
        left = node.children[join.left_child]
        right = node.children[join.right_child]
        left_class = self._slot_class(left, join.left_slot)
        right_class = self._slot_class(right, join.right_slot)
        if not (self._terms.is_subclass_of(left_class, right_class)
                or self._terms.is_subclass_of(right_class, left_class)):
            raise IncompatibleJoin(
                f"{left_class} and {right_class} are unrelated classes")

    def _slot_class(self, leaf: QuestionStatement, slot: str) -> str:
        schema = self._schemas.get(leaf.schema)
        if slot == "subject":
            return schema.subject_class
        return schema.position(slot).constraint.class_upri

    def _evaluate_node(self, node: CompositeQuestion) -> List[Tuple[str, ...]]:
        child_results = [self._leaf_results(child) for child in node.children]
        if node.op == "or":
            widths = {len(t) for tuples in child_results for t in tuples}
            if len(widths) > 1:
                raise IncompatibleJoin("OR branches must have the same arity")
            merged = set()
            for tuples in child_results:
                merged.update(tuples)
            return sorted(merged)
        if node.op != "and":
            raise ValueError(f"unknown composite operator {node.op!r}")
        for join in node.joins:
            self._check_join(node, join)
        # map each direct child to its tuple slice in the concatenated result
        offsets, width = [], 0
        for tuples in child_results:
            offsets.append(width)
            width += len(tuples[0]) if tuples else 1
        out = []
        for combo in product(*child_results):
            row = tuple(x for t in combo for x in t)
            ok = True
            for join in node.joins:
                left_stmt = row[offsets[join.left_child]]
                right_stmt = row[offsets[join.right_child]]
                left_key = self._slot_key(left_stmt, join.left_slot)
                right_key = self._slot_key(right_stmt, join.right_slot)
                if left_key is None or left_key != right_key:
                    ok = False
                    break
            if ok:
                out.append(row)
        return sorted(set(out))

    def evaluate_composite(self, composite: CompositeQuestion) -> List[Tuple[str, ...]]:
        return self._evaluate_node(composite)

    # -- plans ------------------------------------------------------------

    def explain_plan(self, question) -> str:
        if isinstance(question, CompositeQuestion):
            lines = [f"composite {question.op.upper()} over "
                     f"{len(question.children)} sub-plans"]
            for i, child in enumerate(question.children):
                sub = self.explain_plan(child).replace("\n", "\n  ")
                lines.append(f"  child {i}:\n  {sub}")
            for join in question.joins:
                lines.append(f"  join child {join.left_child}.{join.left_slot} = "
                             f"child {join.right_child}.{join.right_slot}")
            return "\n".join(lines)
        schema = self._schemas.get(question.schema)
        lines = []
        if question.subject_binding.kind == EXACT:
            lines.append(f"index lookup (statement class, subject) on "
                         f"{question.schema}")
        else:
            exact = [label for label, b in sorted(question.position_bindings.items())
                     if b.kind == EXACT and b.value.is_resource]
            if exact:
                lines.append(f"index lookup (statement class, position "
                             f"{exact[0]}, resource) on {question.schema}")
            else:
                lines.append(f"class scan on {question.schema}")
        lines.append(f"filter subject: {question.subject_binding.kind}")
        for label in [p.label for p in schema.positions]:
            binding = question.position_bindings.get(label)
            if binding is not None and binding.kind != UNBOUND:
                lines.append(f"filter {label}: {binding.kind}")
        return "\n".join(lines)
