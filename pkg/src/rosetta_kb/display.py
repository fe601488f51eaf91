"""Display engine: dynamic labels (text) and mind-map patterns (graph docs)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .core import Value
from .errors import (
    PatternSchemaMismatch,
    TemplateSchemaMismatch,
    UnknownTemplate,
    UnknownVariable,
)
from .schema import ReferenceSchema, SchemaRegistry
from .store import StatementStore
from .terms import TermRegistry

_VAR_RE = re.compile(r"\$\{([A-Za-z0-9_]+)\}")


@dataclass(frozen=True)
class DynamicLabel:
    id: str
    schema: str
    name: str
    template: str
    optional_segments: Mapping[str, str] = field(default_factory=dict)
    is_default: bool = False

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "schema": self.schema,
            "name": self.name,
            "kind": "label",
            "template": self.template,
            "optional_segments": dict(self.optional_segments),
            "default": self.is_default,
        }


@dataclass(frozen=True)
class MindMapPattern:
    id: str
    schema: str
    name: str
    predicate_node_label: str
    edge_labels: Mapping[str, str]  # "subject" plus one entry per position

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "schema": self.schema,
            "name": self.name,
            "kind": "mindmap",
            "predicate_node_label": self.predicate_node_label,
            "edge_labels": dict(self.edge_labels),
        }


class DisplayEngine:
    def __init__(self, terms: TermRegistry, schemas: SchemaRegistry,
                 store: StatementStore):
        self._terms = terms
        self._schemas = schemas
        self._store = store
        self._labels: Dict[str, DynamicLabel] = {}
        self._patterns: Dict[str, MindMapPattern] = {}
        self._defaults: Dict[str, str] = {}  # schema -> default label template id

    # -- registration -----------------------------------------------------

    def register_label(self, template: DynamicLabel) -> DynamicLabel:
        schema = self._schemas.get(template.schema)
        self._check_label(template, schema)
        self._labels[template.id] = template
        if template.is_default:
            self._defaults[template.schema] = template.id
        return template

    def _check_label(self, template: DynamicLabel, schema: ReferenceSchema) -> None:
        known = {schema.subject_label} | {p.label for p in schema.positions}
        used = set(_VAR_RE.findall(template.template))
        unknown = used - known
        if unknown:
            raise UnknownVariable(", ".join(sorted(unknown)))
        missing = {p.label for p in schema.positions if p.required} - used
        if missing:
            raise UnknownVariable(
                "template must reference required positions: "
                + ", ".join(sorted(missing)))
        for label, fragment in template.optional_segments.items():
            if label not in known:
                raise UnknownVariable(label)
            if fragment not in template.template:
                raise UnknownVariable(
                    f"optional segment for {label} does not occur in the template")

    def register_pattern(self, pattern: MindMapPattern) -> MindMapPattern:
        schema = self._schemas.get(pattern.schema)
        known = {"subject"} | {p.label for p in schema.positions}
        unknown = set(pattern.edge_labels) - known
        if unknown:
            raise UnknownVariable(", ".join(sorted(unknown)))
        missing = known - set(pattern.edge_labels)
        if missing:
            raise UnknownVariable(
                "pattern needs an edge label per slot; missing: "
                + ", ".join(sorted(missing)))
        self._patterns[pattern.id] = pattern
        return pattern

    def get_label(self, template_id: str) -> DynamicLabel:
        template = self._labels.get(template_id)
        if template is None:
            raise UnknownTemplate(template_id)
        return template

    def get_pattern(self, pattern_id: str) -> MindMapPattern:
        pattern = self._patterns.get(pattern_id)
        if pattern is None:
            raise UnknownTemplate(pattern_id)
        return pattern

    def default_label_id(self, schema: str) -> Optional[str]:
        return self._defaults.get(schema)

    def templates_for(self, schema: str) -> List[dict]:
        docs = [t.to_doc() for t in self._labels.values() if t.schema == schema]
        docs += [p.to_doc() for p in self._patterns.values() if p.schema == schema]
        return docs

    # -- rendering --------------------------------------------------------

    def _display_text(self, value: Value) -> str:
        if value.is_resource:
            return self._terms.label_of(value.resource.upri)
        return value.literal.lexical

    def render_label(self, statement: str, template_id: str) -> str:
        template = self.get_label(template_id)
        record = self._store.get(statement)
        if record.statement_class != template.schema:
            raise TemplateSchemaMismatch(
                f"template {template_id} does not belong to "
                f"{record.statement_class}")
        schema = self._schemas.get(template.schema)
        subject, bindings = self._store.current_view(statement)
        text = template.template
        for label, fragment in template.optional_segments.items():
            if label not in bindings:
                text = text.replace(fragment, "")
        substitutions = {schema.subject_label: self._display_text(subject)}
        for label, value in bindings.items():
            substitutions[label] = self._display_text(value)
        text = _VAR_RE.sub(lambda m: substitutions.get(m.group(1), ""), text)
        return re.sub(r"\s{2,}", " ", text).strip()

    def render_mindmap(self, statement: str, pattern_id: str) -> dict:
        pattern = self.get_pattern(pattern_id)
        record = self._store.get(statement)
        if record.statement_class != pattern.schema:
            raise PatternSchemaMismatch(
                f"pattern {pattern_id} does not belong to {record.statement_class}")
        schema = self._schemas.get(pattern.schema)
        subject, bindings = self._store.current_view(statement)
        predicate_id = f"{statement}#predicate"
        nodes = [{"id": predicate_id, "label": pattern.predicate_node_label,
                  "role": "predicate"}]
        edges = []

        def node_id(value: Value, slot: str) -> str:
            if value.is_resource:
                return value.resource.upri
            return f"{statement}#{slot}"

        nodes.append({"id": node_id(subject, "subject"),
                      "label": self._display_text(subject), "role": "subject"})
        edges.append({"from": predicate_id, "to": node_id(subject, "subject"),
                      "label": pattern.edge_labels["subject"]})
        for position in schema.positions:
            value = bindings.get(position.label)
            if value is None:
                continue
            nid = node_id(value, position.label)
            nodes.append({"id": nid, "label": self._display_text(value),
                          "role": "object"})
            edges.append({"from": predicate_id, "to": nid,
                          "label": pattern.edge_labels[position.label]})
        return {"nodes": nodes, "edges": edges}

    @staticmethod
    def merge_mindmaps(docs: List[dict]) -> dict:
        """Combine statement mind-maps; nodes deduplicate by id."""
        nodes: Dict[str, dict] = {}
        edges = []
        seen = set()
        for doc in docs:
            for node in doc["nodes"]:
                nodes.setdefault(node["id"], node)
            for edge in doc["edges"]:
                key = (edge["from"], edge["to"], edge["label"])
                if key not in seen:
                    seen.add(key)
                    edges.append(edge)
        return {"nodes": list(nodes.values()), "edges": edges}

    # -- persistence ------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "labels": [t.to_doc() for t in self._labels.values()],
            "patterns": [p.to_doc() for p in self._patterns.values()],
            "defaults": dict(self._defaults),
        }

    def load_state(self, state: dict) -> None:
        self._labels = {
            t["id"]: DynamicLabel(t["id"], t["schema"], t["name"], t["template"],
                                  t.get("optional_segments", {}),
                                  t.get("default", False))
            for t in state["labels"]
        }
        self._patterns = {
            p["id"]: MindMapPattern(p["id"], p["schema"], p["name"],
                                    p["predicate_node_label"], p["edge_labels"])
            for p in state["patterns"]
        }
        self._defaults = dict(state["defaults"])
