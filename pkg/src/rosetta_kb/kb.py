"""The knowledge-base facade: wires every engine together, owns identifier
minting, write serialization, and event-sourced persistence."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from .core import (
    CLASS_TERM,
    EVERY_INSTANCE,
    SOME_INSTANCE,
    ProvenanceStamp,
    Value,
    canonical_serialize,
    content_hash,
    mint_upri,
    now_utc,
)
from .crosswalk import Alignment, Crosswalk, CrosswalkEngine, crosswalk_counts
from .display import DisplayEngine, DynamicLabel, MindMapPattern
from .errors import (
    ConstraintViolation,
    LightToFullUnsupported,
    UnknownPosition,
    ValidationFailed,
)
from .events import EventLog
from .query import (
    Binding,
    CompositeQuestion,
    QueryEngine,
    QuestionStatement,
    question_from_doc,
)
from .schema import (
    FULL,
    LIGHT,
    ObjectPositionSpec,
    ReferenceSchema,
    SchemaRegistry,
    WizardAnswers,
    check_value,
)
from .store import StatementStore
from .terms import TermRegistry


@dataclass
class KbConfig:
    data_dir: Optional[Path] = None
    namespace: str = "urn:rosetta:"
    reference_vocabulary: str = "wikidata"
    default_paradigm: str = LIGHT
    snapshot_interval: int = 500

    def __post_init__(self):
        if not self.namespace:
            raise ValueError("namespace must be non-empty")


class KnowledgeBase:
    def __init__(self, config: Optional[KbConfig] = None):
        self.config = config or KbConfig()
        self._lock = threading.RLock()
        self.terms = TermRegistry(self.config.reference_vocabulary)
        self.schemas = SchemaRegistry(self.terms)
        self.store = StatementStore()
        self.crosswalks = CrosswalkEngine(self.terms, self.schemas, self.store,
                                          self._create_statement_for_import)
        self.queries = QueryEngine(self.terms, self.schemas, self.store)
        self.display = DisplayEngine(self.terms, self.schemas, self.store)
        self._log: Optional[EventLog] = None
        if self.config.data_dir is not None:
            self._log = EventLog(Path(self.config.data_dir))
            self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        skip = 0
        snapshot = self._log.read_snapshot()
        if snapshot is not None:
            self._load_state(snapshot["state"])
            skip = snapshot["offset"]
        for index, event in enumerate(self._log.read_events()):
            if index < skip:
                continue
            self._apply(event)

    def _emit(self, event: dict) -> None:
        self._apply(event)
        if self._log is not None:
            self._log.append(event)
            if (self.config.snapshot_interval
                    and self._log.event_count % self.config.snapshot_interval == 0):
                self._log.write_snapshot(self._state())

    def _state(self) -> dict:
        return {
            "terms": self.terms.to_doc(),
            "schemas": self.schemas.to_state(),
            "store": self.store.to_state(),
            "crosswalks": self.crosswalks.to_state(),
            "display": self.display.to_state(),
        }

    def _load_state(self, state: dict) -> None:
        self.terms.load_doc(state["terms"])
        self.schemas.load_state(state["schemas"])
        self.store.load_state(state["store"])
        self.crosswalks.load_state(state["crosswalks"])
        self.display.load_state(state["display"])

    def write_snapshot(self) -> None:
        if self._log is not None:
            with self._lock:
                self._log.write_snapshot(self._state())

    # -- event application (replay-deterministic) --------------------------

    def _apply(self, event: dict) -> None:
        handler = getattr(self, "_apply_" + event["type"].replace(".", "_"))
        handler(event)

    def _apply_term_register(self, event: dict) -> None:
        self.terms.register(event["upri"], event["label"], event["kind"],
                            event.get("definition", ""), event.get("parents", ()),
                            event.get("vocabulary", "local"),
                            event.get("reference"))

    def _apply_term_map(self, event: dict) -> None:
        self.terms.add_mapping(event["source"], event["target"], event["kind"],
                               ProvenanceStamp.from_doc(event["provenance"]))

    def _apply_schema_create(self, event: dict) -> None:
        answers = WizardAnswers.from_doc(event["answers"])
        schema = self.schemas.create_from_wizard(
            answers, event["paradigm"], event["statement_class"],
            event["position_classes"])
        self.display.register_label(DynamicLabel(
            id=event["default_label_id"],
            schema=schema.statement_class,
            name="default",
            template=schema.dynamic_label_default,
            is_default=True,
        ))

    def _apply_schema_evolve(self, event: dict) -> None:
        positions = [ObjectPositionSpec.from_doc(p) for p in event["positions"]]
        self.schemas.evolve(event["statement_class"], positions)

    def _apply_stmt_create(self, event: dict) -> None:
        schema = self.schemas.get(event["schema_id"], event["schema_version"])
        self.store.apply_create(
            upri=event["upri"],
            schema=schema,
            subject=Value.from_doc(event["subject"]),
            bindings={label: Value.from_doc(doc)
                      for label, doc in event["bindings"].items()},
            metadata=event["metadata"],
            paradigm=event["paradigm"],
            provenance=ProvenanceStamp.from_doc(event["provenance"]),
            position_upris=event["position_upris"],
            classification=event.get("classification", ()),
        )

    def _apply_stmt_edit(self, event: dict) -> None:
        self.store.apply_edit(event["statement"], event["label"],
                              Value.from_doc(event["value"]),
                              ProvenanceStamp.from_doc(event["provenance"]),
                              event["new_upri"])

    def _apply_stmt_delete(self, event: dict) -> None:
        self.store.apply_soft_delete(event["statement"])

    def _apply_stmt_version(self, event: dict) -> None:
        record = self.store.get(event["statement"])
        schema = self.schemas.get(record.statement_class, record.schema_version)
        self.store.apply_version(event["statement"], event["version_upri"],
                                 ProvenanceStamp.from_doc(event["provenance"]),
                                 schema.required_labels)

    def _apply_stmt_classify(self, event: dict) -> None:
        self.store.apply_classify(event["statement"], event["tag"])

    def _apply_stmt_declassify(self, event: dict) -> None:
        self.store.apply_declassify(event["statement"], event["tag"])

    def _apply_question_store(self, event: dict) -> None:
        question = QuestionStatement.from_doc(event["question"])
        schema = self.schemas.get(question.schema)
        subject = self._binding_value(question.subject_binding,
                                      schema.subject_class)
        bindings = {}
        for label, binding in question.position_bindings.items():
            position = schema.position(label)
            fallback = (position.constraint.class_upri
                        if position.constraint.kind == "resource" else None)
            value = self._binding_value(binding, fallback)
            if value is not None:
                bindings[label] = value
        self.store.apply_create(
            upri=event["upri"],
            schema=schema,
            subject=subject,
            bindings=bindings,
            metadata={"question": question.to_doc()},
            paradigm=LIGHT,
            provenance=ProvenanceStamp.from_doc(event["provenance"]),
            position_upris=event["position_upris"],
            classification=("question",),
        )

    @staticmethod
    def _binding_value(binding: Binding, fallback_class: Optional[str]):
        if binding.kind == "exact":
            return binding.value
        if binding.kind == "some-instance":
            return Value.of_resource(binding.class_upri, SOME_INSTANCE)
        if binding.kind == "every-instance":
            return Value.of_resource(binding.class_upri, EVERY_INSTANCE)
        if binding.kind == "class":
            return Value.of_resource(binding.class_upri, CLASS_TERM)
        if fallback_class is not None:
            return Value.of_resource(fallback_class, SOME_INSTANCE)
        return None

    def _apply_crosswalk_define(self, event: dict) -> None:
        self.crosswalks.define(Crosswalk.from_doc(event["crosswalk"]))

    def _apply_template_register(self, event: dict) -> None:
        doc = event["template"]
        if doc["kind"] == "label":
            self.display.register_label(DynamicLabel(
                doc["id"], doc["schema"], doc["name"], doc["template"],
                doc.get("optional_segments", {}), doc.get("default", False)))
        else:
            self.display.register_pattern(MindMapPattern(
                doc["id"], doc["schema"], doc["name"],
                doc["predicate_node_label"], doc["edge_labels"]))

    # -- identifiers -------------------------------------------------------

    def mint(self, entity_kind: str) -> str:
        return mint_upri(self.config.namespace, entity_kind)

    def _stamp(self, creator: str, imported_from: Optional[str] = None,
               created_at: Optional[str] = None) -> dict:
        return ProvenanceStamp(creator, created_at or now_utc(),
                               imported_from).to_doc()

    # -- terms -------------------------------------------------------------

    def register_term(self, label: str, kind: str, definition: str = "",
                      parents: Iterable[str] = (), vocabulary: str = "local",
                      upri: Optional[str] = None,
                      is_reference: Optional[bool] = None) -> str:
        with self._lock:
            upri = upri or self.mint("term")
            self._emit({
                "type": "term.register", "upri": upri, "label": label,
                "kind": kind, "definition": definition,
                "parents": list(parents), "vocabulary": vocabulary,
                "reference": is_reference,
            })
            return upri

    def add_mapping(self, source: str, target: str, kind: str,
                    creator: str = "system") -> dict:
        with self._lock:
            event = {"type": "term.map", "source": source, "target": target,
                     "kind": kind, "provenance": self._stamp(creator)}
            self._emit(event)
            return {"source": source, "target": target, "kind": kind}

    def resolve_term(self, term: str, target_vocabulary: str,
                     minimum_kind: str = "equivalent-class") -> str:
        return self.terms.resolve(term, target_vocabulary, minimum_kind)

    # -- schemata ----------------------------------------------------------

    def create_schema_from_wizard(self, answers: Union[WizardAnswers, Mapping],
                                  paradigm: Optional[str] = None) -> ReferenceSchema:
        if not isinstance(answers, WizardAnswers):
            answers = WizardAnswers.from_doc(answers)
        paradigm = paradigm or self.config.default_paradigm
        with self._lock:
            answers.validate()
            statement_class = self.mint("stmt-class")
            position_classes = [self.mint("pos-class") if paradigm == FULL else None
                                for _ in range(answers.position_count)]
            self._emit({
                "type": "schema.create",
                "answers": answers.to_doc(),
                "paradigm": paradigm,
                "statement_class": statement_class,
                "position_classes": position_classes,
                "default_label_id": f"{statement_class}#default-label",
            })
            return self.schemas.get(statement_class)

    def evolve_schema(self, statement_class: str,
                      new_positions: Sequence[ObjectPositionSpec]) -> ReferenceSchema:
        with self._lock:
            current = self.schemas.get(statement_class)
            docs = []
            for pos in new_positions:
                if current.paradigm == FULL and pos.position_class_upri is None:
                    pos = ObjectPositionSpec(pos.label, pos.required, pos.constraint,
                                             pos.description, pos.logical_flags,
                                             self.mint("pos-class"))
                docs.append(pos.to_doc())
            self._emit({"type": "schema.evolve",
                        "statement_class": statement_class, "positions": docs})
            return self.schemas.get(statement_class)

    def derive_owl_schema(self, statement_class: str) -> dict:
        with self._lock:
            schema = self.schemas.get(statement_class)
            doc = self.schemas.derive_owl(schema)
            alignments = [{"source_slot": "subject", "target_path": "anchor:subject",
                           "term_translate": False}]
            nodes = [{"id": "anchor:subject", "label": schema.subject_label}]
            edges = []
            for position in schema.positions:
                if not position.required:
                    continue
                anchor = f"anchor:{position.label}"
                nodes.append({"id": anchor, "label": position.label})
                if position.constraint.kind == "resource":
                    label = self.schemas.derived_property_label(schema, position)
                else:
                    label = "has " + position.label.lower().replace("_", " ")
                alignments.append({"source_slot": position.label,
                                   "target_path": anchor, "term_translate": False})
                edges.append({"from": "anchor:subject", "rel": label, "to": anchor})
            crosswalk_doc = {
                "id": f"{statement_class}#owl",
                "source_schema": statement_class,
                "target": {"name": f"owl:{schema.predicate_label}",
                           "kind": "graph-template",
                           "vocabulary": self.config.reference_vocabulary},
                "alignments": alignments,
                "scaffold": {"nodes": nodes, "edges": edges},
            }
            self._emit({"type": "crosswalk.define", "crosswalk": crosswalk_doc})
            doc["crosswalk"] = crosswalk_doc["id"]
            return doc

    def export_shape(self, statement_class: str,
                     version: Optional[int] = None) -> dict:
        return self.schemas.export_shape(self.schemas.get(statement_class, version))

    def validate_statement(self, statement_class: str, subject: Value,
                           bindings: Mapping[str, Value]) -> List[dict]:
        return self.schemas.validate_statement(self.schemas.get(statement_class),
                                               subject, bindings)

    # -- statements --------------------------------------------------------

    def create_statement(self, schema_id: str, subject: Value,
                         bindings: Mapping[str, Value],
                         metadata: Optional[dict] = None,
                         paradigm: Optional[str] = None,
                         creator: str = "anonymous",
                         classification: Iterable[str] = (),
                         imported_from: Optional[str] = None) -> str:
        with self._lock:
            schema = self.schemas.get(schema_id)
            paradigm = paradigm or schema.paradigm
            report = self.schemas.validate_statement(schema, subject, bindings)
            if report:
                raise ValidationFailed(report)
            upri = self.mint("stmt")
            self._emit({
                "type": "stmt.create",
                "upri": upri,
                "schema_id": schema_id,
                "schema_version": schema.version,
                "subject": subject.to_doc(),
                "bindings": {label: value.to_doc()
                             for label, value in bindings.items()},
                "metadata": metadata or {},
                "paradigm": paradigm,
                "provenance": self._stamp(creator, imported_from),
                "position_upris": {label: self.mint("pos")
                                   for label in bindings},
                "classification": list(classification),
            })
            return upri

    def _create_statement_for_import(self, schema_id: str, subject: Value,
                                     bindings: Mapping[str, Value],
                                     metadata: dict, paradigm: Optional[str],
                                     creator: str,
                                     imported_from: Optional[str]) -> str:
        return self.create_statement(schema_id, subject, bindings, metadata,
                                     paradigm, creator,
                                     imported_from=imported_from)

    def edit_position(self, statement: str, label: str, value: Value,
                      creator: str = "anonymous") -> str:
        with self._lock:
            record = self.store.get(statement)
            schema = self.schemas.get(record.statement_class,
                                      record.schema_version)
            position = schema.position(label)
            if position is None:
                raise UnknownPosition(label)
            reason = check_value(position.constraint, value, self.terms)
            if reason:
                raise ConstraintViolation(f"{label}: {reason}")
            new_upri = self.mint("pos")
            self._emit({
                "type": "stmt.edit", "statement": statement, "label": label,
                "value": value.to_doc(), "provenance": self._stamp(creator),
                "new_upri": new_upri,
            })
            return new_upri

    def soft_delete(self, statement: str) -> None:
        with self._lock:
            self._emit({"type": "stmt.delete", "statement": statement})

    def classify(self, statement: str, tag: str) -> None:
        with self._lock:
            self._emit({"type": "stmt.classify", "statement": statement,
                        "tag": tag})

    def declassify(self, statement: str, tag: str) -> None:
        with self._lock:
            self._emit({"type": "stmt.declassify", "statement": statement,
                        "tag": tag})

    def create_version(self, statement: str, creator: str = "anonymous") -> str:
        with self._lock:
            version_upri = self.mint("version")
            self._emit({
                "type": "stmt.version", "statement": statement,
                "version_upri": version_upri,
                "provenance": self._stamp(creator),
            })
            return version_upri

    def get_version_view(self, statement: str, version_upri: str) -> dict:
        subject, bindings = self.store.get_version_view(statement, version_upri)
        return {
            "subject": subject.to_doc(),
            "positions": {label: value.to_doc()
                          for label, value in sorted(bindings.items())},
            "hash": content_hash(canonical_serialize(subject, bindings)),
        }

    def full_to_light(self, statement: str) -> dict:
        record = self.store.get(statement)
        if record.paradigm != FULL:
            raise LightToFullUnsupported(
                "only full-paradigm statements convert to the light form")
        return self.store.full_to_light(statement)

    def light_to_full(self, statement: str):
        raise LightToFullUnsupported(
            "light statements lack the object-position instances the full "
            "paradigm requires")

    # -- crosswalks --------------------------------------------------------

    def define_crosswalk(self, doc: Mapping) -> Crosswalk:
        with self._lock:
            doc = dict(doc)
            doc.setdefault("id", self.mint("crosswalk"))
            crosswalk = Crosswalk.from_doc(doc)
            schema = self.schemas.get(crosswalk.source_schema)  # raises early
            self._emit({"type": "crosswalk.define", "crosswalk": crosswalk.to_doc()})
            return self.crosswalks.get(crosswalk.id)

    def export_statement(self, statement: str, crosswalk_id: str):
        return self.crosswalks.export_statement(statement, crosswalk_id)

    def import_statement(self, document, crosswalk_id: str,
                         creator: str = "anonymous",
                         paradigm: Optional[str] = None) -> str:
        return self.crosswalks.import_statement(document, crosswalk_id, creator,
                                                paradigm)

    def transit_convert(self, document, crosswalk_in: str, crosswalk_out: str,
                        creator: str = "anonymous"):
        return self.crosswalks.transit_convert(document, crosswalk_in,
                                               crosswalk_out, creator)

    @staticmethod
    def crosswalk_counts(n: int) -> dict:
        return crosswalk_counts(n)

    # -- questions ---------------------------------------------------------

    def build_question(self, doc_or_question) -> QuestionStatement:
        if isinstance(doc_or_question, QuestionStatement):
            question = doc_or_question
        else:
            question = QuestionStatement.from_doc(doc_or_question)
        return self.queries.build_question(question.schema,
                                           question.subject_binding,
                                           question.position_bindings,
                                           question.negated)

    def store_question(self, question: QuestionStatement,
                       creator: str = "anonymous") -> str:
        with self._lock:
            question = self.build_question(question)
            upri = self.mint("question")
            schema = self.schemas.get(question.schema)
            labels = [label for label, binding
                      in question.position_bindings.items()
                      if self._binding_value(
                          binding,
                          schema.position(label).constraint.class_upri
                          if schema.position(label).constraint.kind == "resource"
                          else None) is not None]
            self._emit({
                "type": "question.store",
                "upri": upri,
                "question": question.to_doc(),
                "provenance": self._stamp(creator),
                "position_upris": {label: self.mint("pos") for label in labels},
            })
            question.upri = upri
            question.stored = True
            return upri

    def evaluate(self, question_or_doc) -> dict:
        if isinstance(question_or_doc, CompositeQuestion):
            question = question_or_doc
        elif isinstance(question_or_doc, QuestionStatement):
            question = self.build_question(question_or_doc)
        else:
            question = question_from_doc(question_or_doc)
            if isinstance(question, QuestionStatement):
                question = self.build_question(question)
        if isinstance(question, CompositeQuestion):
            tuples = self.queries.evaluate_composite(question)
            return {"kind": "tuples", "value": [list(t) for t in tuples]}
        answer = self.queries.evaluate(question)
        if isinstance(answer, bool):
            return {"kind": "boolean", "value": answer}
        return {"kind": "statements", "value": answer}

    def explain_plan(self, question_or_doc) -> str:
        if isinstance(question_or_doc, (QuestionStatement, CompositeQuestion)):
            return self.queries.explain_plan(question_or_doc)
        return self.queries.explain_plan(question_from_doc(question_or_doc))

    # -- display -----------------------------------------------------------

    def register_template(self, doc: Mapping) -> str:
        with self._lock:
            doc = dict(doc)
            doc.setdefault("id", self.mint("template"))
            self._emit({"type": "template.register", "template": doc})
            return doc["id"]

    def render_label(self, statement: str,
                     template_id: Optional[str] = None) -> str:
        if template_id is None:
            record = self.store.get(statement)
            template_id = self.display.default_label_id(record.statement_class)
        return self.display.render_label(statement, template_id)

    def render_mindmap(self, statement: str, pattern_id: str) -> dict:
        return self.display.render_mindmap(statement, pattern_id)

    # -- documents ---------------------------------------------------------

    def schema_doc(self, statement_class: str,
                   version: Optional[int] = None) -> dict:
        return self.schemas.get(statement_class, version).to_doc()

    def statement_doc(self, statement: str) -> dict:
        return self.store.to_doc(statement)

    def health(self) -> dict:
        return {
            "status": "ok",
            "terms": len(self.terms.all_terms()),
            "schemas": len(self.schemas.all_latest()),
            "statements": len(self.store.all_statements(include_deleted=True)),
            "records": self.store.record_count,
        }
