"""Schema crosswalks: declarative alignments between the reference schema and
foreign graph/tabular/tree targets, with term translation through the hub."""

from __future__ import annotations

import copy
import csv
import io
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .core import NAMED_INDIVIDUAL, Value
from .errors import (
    DocumentShapeMismatch,
    NoMapping,
    SchemaMismatch,
    StatementDeleted,
    TermTranslationFailed,
    UncoveredRequiredSlot,
    UnknownCrosswalk,
    UnknownTerm,
)
from .schema import SchemaRegistry
from .store import StatementStore
from .terms import EQUIVALENT_CLASS, TermRegistry

logger = logging.getLogger(__name__)

GRAPH = "graph-template"
TABULAR = "tabular"
TREE = "tree"

SUBJECT_SLOT = "subject"


@dataclass(frozen=True)
class Alignment:
    source_slot: str  # "subject" or a position label
    target_path: str  # anchor node id (graph), column (tabular), dotted path (tree)
    term_translate: bool = False

    def to_doc(self) -> dict:
        return {"source_slot": self.source_slot, "target_path": self.target_path,
                "term_translate": self.term_translate}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Alignment":
        return cls(doc["source_slot"], doc["target_path"],
                   doc.get("term_translate", False))


@dataclass(frozen=True)
class Crosswalk:
    id: str
    source_schema: str
    target_name: str
    target_kind: str
    target_vocabulary: str
    alignments: Tuple[Alignment, ...]
    scaffold: dict

    def alignment_for(self, slot: str) -> Optional[Alignment]:
        for alignment in self.alignments:
            if alignment.source_slot == slot:
                return alignment
        return None

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "source_schema": self.source_schema,
            "target": {"name": self.target_name, "kind": self.target_kind,
                       "vocabulary": self.target_vocabulary},
            "alignments": [a.to_doc() for a in self.alignments],
            "scaffold": self.scaffold,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Crosswalk":
        target = doc["target"]
        return cls(
            id=doc["id"],
            source_schema=doc["source_schema"],
            target_name=target["name"],
            target_kind=target["kind"],
            target_vocabulary=target["vocabulary"],
            alignments=tuple(Alignment.from_doc(a) for a in doc["alignments"]),
            scaffold=doc.get("scaffold", {}),
        )


def crosswalk_counts(n: int) -> dict:
    """Stored crosswalks needed for n schemata: every pair vs through the hub."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return {"pairwise": n * (n - 1) // 2, "hub": n}


class CrosswalkEngine:
    def __init__(self, terms: TermRegistry, schemas: SchemaRegistry,
                 store: StatementStore,
                 create_statement: Callable[..., str]):
        self._terms = terms
        self._schemas = schemas
        self._store = store
        self._create_statement = create_statement
        self._crosswalks: Dict[str, Crosswalk] = {}

    def get(self, crosswalk_id: str) -> Crosswalk:
        cw = self._crosswalks.get(crosswalk_id)
        if cw is None:
            raise UnknownCrosswalk(crosswalk_id)
        return cw

    def for_schema(self, statement_class: str) -> List[Crosswalk]:
        return [cw for cw in self._crosswalks.values()
                if cw.source_schema == statement_class]

    def all_crosswalks(self) -> List[Crosswalk]:
        return list(self._crosswalks.values())

    # -- definition -------------------------------------------------------

    def define(self, crosswalk: Crosswalk) -> Crosswalk:
        schema = self._schemas.get(crosswalk.source_schema)
        covered = [a.source_slot for a in crosswalk.alignments]
        for slot in (SUBJECT_SLOT, *schema.required_labels):
            if covered.count(slot) != 1:
                raise UncoveredRequiredSlot(slot)
        self._crosswalks[crosswalk.id] = crosswalk
        return crosswalk

    # -- export -----------------------------------------------------------

    def export_statement(self, statement: str, crosswalk_id: str):
        cw = self.get(crosswalk_id)
        record = self._store.get(statement)
        if not record.current:
            raise StatementDeleted(statement)
        if record.statement_class != cw.source_schema:
            raise SchemaMismatch(
                f"{statement} instantiates {record.statement_class}, "
                f"crosswalk covers {cw.source_schema}")
        subject, bindings = self._store.current_view(statement)
        values = {SUBJECT_SLOT: subject, **bindings}
        slot_values: Dict[str, Value] = {}
        for slot, value in values.items():
            alignment = cw.alignment_for(slot)
            if alignment is None:
                logger.warning("crosswalk %s has no slot for bound position %s; "
                               "dropping it", cw.id, slot)
                continue
            slot_values[slot] = self._translate_out(value, alignment, cw)
        if cw.target_kind == GRAPH:
            return self._export_graph(cw, slot_values)
        if cw.target_kind == TABULAR:
            return self._export_tabular(cw, slot_values)
        if cw.target_kind == TREE:
            return self._export_tree(cw, slot_values)
        raise ValueError(f"unknown target kind {cw.target_kind!r}")

    def _translate_out(self, value: Value, alignment: Alignment,
                       cw: Crosswalk) -> Value:
        if not (alignment.term_translate and value.is_resource):
            return value
        try:
            translated = self._terms.resolve(value.resource.upri,
                                             cw.target_vocabulary,
                                             EQUIVALENT_CLASS)
        except (NoMapping, UnknownTerm):
            raise TermTranslationFailed(value.resource.upri, cw.target_vocabulary)
        return Value.of_resource(translated, value.resource.kind)

    def _node_for(self, value: Value) -> dict:
        if value.is_resource:
            upri = value.resource.upri
            classes = self._terms.direct_classes(upri)
            return {"id": upri, "label": self._terms.label_of(upri),
                    "class": classes[0] if classes else None}
        lit = value.literal
        return {"id": f"literal:{lit.datatype}:{lit.lexical}",
                "label": lit.lexical, "class": None, "datatype": lit.datatype}

    def _export_graph(self, cw: Crosswalk, slot_values: Mapping[str, Value]) -> dict:
        anchor_ids = {a.target_path: a.source_slot for a in cw.alignments}
        replacements: Dict[str, dict] = {}
        for anchor_id, slot in anchor_ids.items():
            if slot in slot_values:
                replacements[anchor_id] = self._node_for(slot_values[slot])
        nodes, edges = [], []
        for node in cw.scaffold.get("nodes", ()):
            if node["id"] in replacements:
                nodes.append(replacements[node["id"]])
            elif node["id"] in anchor_ids:
                continue  # unbound optional anchor
            else:
                nodes.append({"id": node["id"], "label": node.get("label", node["id"]),
                              "class": node.get("class")})
        for edge in cw.scaffold.get("edges", ()):
            src = replacements.get(edge["from"], {"id": edge["from"]})["id"]
            dst = replacements.get(edge["to"], {"id": edge["to"]})["id"]
            if edge["from"] in anchor_ids and edge["from"] not in replacements:
                continue
            if edge["to"] in anchor_ids and edge["to"] not in replacements:
                continue
            edges.append({"from": src, "rel": edge["rel"], "to": dst})
        return {"nodes": nodes, "edges": edges}

    def _cell_for(self, value: Value) -> str:
        if value.is_resource:
            return self._terms.label_of(value.resource.upri)
        return value.literal.lexical

    def _export_tabular(self, cw: Crosswalk, slot_values: Mapping[str, Value]) -> str:
        headers = cw.scaffold["headers"]
        constants = cw.scaffold.get("constants", {})
        by_column = {a.target_path: a.source_slot for a in cw.alignments}
        row = []
        for column in headers:
            slot = by_column.get(column)
            if slot is not None and slot in slot_values:
                row.append(self._cell_for(slot_values[slot]))
            else:
                row.append(constants.get(column, ""))
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(headers)
        writer.writerow(row)
        return out.getvalue()

    @staticmethod
    def _set_path(doc: dict, path: str, value) -> None:
        parts = path.split(".")
        node = doc
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    @staticmethod
    def _get_path(doc: Mapping, path: str):
        node = doc
        for part in path.split("."):
            if not isinstance(node, Mapping) or part not in node:
                raise DocumentShapeMismatch(f"missing path {path!r}")
            node = node[part]
        return node

    def _export_tree(self, cw: Crosswalk, slot_values: Mapping[str, Value]) -> dict:
        doc = copy.deepcopy(cw.scaffold.get("template", {}))
        for alignment in cw.alignments:
            if alignment.source_slot not in slot_values:
                continue
            value = slot_values[alignment.source_slot]
            leaf = (value.resource.upri if value.is_resource
                    else value.literal.lexical)
            self._set_path(doc, alignment.target_path, leaf)
        return doc

    # -- import -----------------------------------------------------------

    def import_statement(self, document, crosswalk_id: str, creator: str,
                         paradigm: Optional[str] = None,
                         metadata: Optional[dict] = None) -> str:
        cw = self.get(crosswalk_id)
        schema = self._schemas.get(cw.source_schema)
        if cw.target_kind == GRAPH:
            slot_values = self._import_graph(cw, document)
        elif cw.target_kind == TABULAR:
            slot_values = self._import_tabular(cw, schema, document)
        elif cw.target_kind == TREE:
            slot_values = self._import_tree(cw, schema, document)
        else:
            raise ValueError(f"unknown target kind {cw.target_kind!r}")
        normalized = {slot: self._translate_in(value, cw.alignment_for(slot), cw)
                      for slot, value in slot_values.items()}
        subject = normalized.pop(SUBJECT_SLOT, None)
        if subject is None:
            raise DocumentShapeMismatch("document carries no subject")
        return self._create_statement(
            schema_id=cw.source_schema,
            subject=subject,
            bindings=normalized,
            metadata=metadata or {},
            paradigm=paradigm,
            creator=creator,
            imported_from=cw.target_name,
        )

    def _translate_in(self, value: Value, alignment: Optional[Alignment],
                      cw: Crosswalk) -> Value:
        if alignment is None or not (alignment.term_translate and value.is_resource):
            return value
        try:
            translated = self._terms.resolve(value.resource.upri,
                                             self._terms.reference_vocabulary,
                                             EQUIVALENT_CLASS)
        except (NoMapping, UnknownTerm):
            raise TermTranslationFailed(value.resource.upri,
                                        self._terms.reference_vocabulary)
        return Value.of_resource(translated, value.resource.kind)

    def _value_from_node(self, node: Mapping) -> Value:
        if node.get("datatype"):
            return Value.of_literal(node["label"], node["datatype"])
        upri = node["id"]
        kind = NAMED_INDIVIDUAL
        if upri in self._terms:
            kind = self._terms.get(upri).kind
        return Value.of_resource(upri, kind)

    def _import_graph(self, cw: Crosswalk, document: Mapping) -> Dict[str, Value]:
        if not isinstance(document, Mapping) or "edges" not in document:
            raise DocumentShapeMismatch("graph document needs nodes and edges")
        doc_nodes = {n["id"]: n for n in document.get("nodes", ())}
        doc_edges = document["edges"]
        anchor_ids = {a.target_path for a in cw.alignments}
        slot_values: Dict[str, Value] = {}
        for alignment in cw.alignments:
            anchor = alignment.target_path
            located = None
            for edge in cw.scaffold.get("edges", ()):
                if edge["from"] == anchor and edge["to"] not in anchor_ids:
                    located = self._match_edge(doc_edges, rel=edge["rel"],
                                               to=edge["to"], take="from")
                elif edge["to"] == anchor and edge["from"] not in anchor_ids:
                    located = self._match_edge(doc_edges, rel=edge["rel"],
                                               frm=edge["from"], take="to")
                if located is not None:
                    break
            if located is None:
                continue  # unbound optional slot
            node = doc_nodes.get(located, {"id": located, "label": located})
            slot_values[alignment.source_slot] = self._value_from_node(node)
        return slot_values

    @staticmethod
    def _match_edge(edges, rel: str, take: str, frm: Optional[str] = None,
                    to: Optional[str] = None) -> Optional[str]:
        for edge in edges:
            if edge["rel"] != rel:
                continue
            if frm is not None and edge["from"] != frm:
                continue
            if to is not None and edge["to"] != to:
                continue
            return edge[take]
        return None

    def _slot_constraint(self, schema, slot: str):
        if slot == SUBJECT_SLOT:
            return None
        position = schema.position(slot)
        if position is None:
            raise DocumentShapeMismatch(f"unknown slot {slot!r}")
        return position.constraint

    def _lookup_label(self, label: str) -> str:
        """Resolve a human label from a table cell to a term.

        Cells name individuals far more often than classes, so named
        individuals win when a class shares the label; the reference
        vocabulary breaks any remaining tie.
        """
        candidates = self._terms.find_all_by_label(label)
        individuals = [u for u in candidates
                       if self._terms.get(u).kind == NAMED_INDIVIDUAL]
        pool = individuals or candidates
        if len(pool) != 1:
            in_reference = [u for u in pool if self._terms.get(u).vocabulary
                            == self._terms.reference_vocabulary]
            pool = in_reference
        if len(pool) != 1:
            raise TermTranslationFailed(label, self._terms.reference_vocabulary)
        return pool[0]

    def _import_tabular(self, cw: Crosswalk, schema, document) -> Dict[str, Value]:
        if not isinstance(document, str):
            raise DocumentShapeMismatch("tabular document must be CSV text")
        rows = list(csv.reader(io.StringIO(document)))
        if len(rows) < 2:
            raise DocumentShapeMismatch("CSV document needs a header and a row")
        headers, row = rows[0], rows[1]
        if headers != list(cw.scaffold["headers"]):
            raise DocumentShapeMismatch("CSV header does not match the crosswalk")
        cells = dict(zip(headers, row))
        slot_values: Dict[str, Value] = {}
        for alignment in cw.alignments:
            cell = cells.get(alignment.target_path, "")
            if cell == "":
                continue
            constraint = self._slot_constraint(schema, alignment.source_slot)
            if constraint is None or constraint.kind == "resource":
                if alignment.term_translate:
                    try:
                        upri = self._terms.find_by_label(cw.target_vocabulary, cell)
                    except UnknownTerm:
                        raise TermTranslationFailed(cell, cw.target_vocabulary)
                else:
                    upri = self._lookup_label(cell)
                slot_values[alignment.source_slot] = Value.of_resource(
                    upri, self._terms.get(upri).kind)
            else:
                slot_values[alignment.source_slot] = Value.of_literal(
                    cell, constraint.datatype)
        return slot_values

    def _import_tree(self, cw: Crosswalk, schema, document) -> Dict[str, Value]:
        if not isinstance(document, Mapping):
            raise DocumentShapeMismatch("tree document must be a JSON object")
        slot_values: Dict[str, Value] = {}
        for alignment in cw.alignments:
            try:
                leaf = self._get_path(document, alignment.target_path)
            except DocumentShapeMismatch:
                constraint = self._slot_constraint(schema, alignment.source_slot)
                position = schema.position(alignment.source_slot)
                if alignment.source_slot == SUBJECT_SLOT or (
                        position is not None and position.required):
                    raise
                continue
            constraint = self._slot_constraint(schema, alignment.source_slot)
            if constraint is None or constraint.kind == "resource":
                kind = NAMED_INDIVIDUAL
                if leaf in self._terms:
                    kind = self._terms.get(leaf).kind
                slot_values[alignment.source_slot] = Value.of_resource(leaf, kind)
            else:
                slot_values[alignment.source_slot] = Value.of_literal(
                    str(leaf), constraint.datatype)
        return slot_values

    # -- transit ----------------------------------------------------------

    def transit_convert(self, document, crosswalk_in: str, crosswalk_out: str,
                        creator: str):
        """Foreign-to-foreign conversion through the reference schema."""
        cw_in, cw_out = self.get(crosswalk_in), self.get(crosswalk_out)
        if cw_in.source_schema != cw_out.source_schema:
            raise SchemaMismatch("crosswalks do not share a source schema")
        statement = self.import_statement(document, crosswalk_in, creator)
        return self.export_statement(statement, crosswalk_out)

    # -- persistence ------------------------------------------------------

    def to_state(self) -> dict:
        return {"crosswalks": [cw.to_doc() for cw in self._crosswalks.values()]}

    def load_state(self, state: dict) -> None:
        self._crosswalks = {
            doc["id"]: Crosswalk.from_doc(doc) for doc in state["crosswalks"]
        }
