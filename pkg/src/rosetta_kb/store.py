"""Statement store: light/full paradigms, soft delete, edit history, versions.

The store only ever grows: edits append new position instances, deletion flips
the `current` flag, and version nodes are immutable once minted.  All mutating
entry points take explicit pre-minted identifiers so that replaying an event
log reproduces the state bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .core import ProvenanceStamp, Value, canonical_serialize, content_hash
from .errors import (
    AlreadyDeleted,
    ConflictingTruthTag,
    IncompleteStatement,
    LightModeImmutable,
    StatementDeleted,
    UnknownPosition,
    UnknownStatement,
    UnknownVersion,
)
from .schema import FULL, LIGHT, ReferenceSchema

TRUTH_TAGS = ("assertional", "contingent", "prototypical", "universal")


def is_truth_tag(tag: str) -> bool:
    return tag in TRUTH_TAGS


@dataclass
class PositionInstance:
    upri: str
    statement: str
    label: str
    position_class: Optional[str]
    value: Value
    current: bool
    provenance: ProvenanceStamp
    version_ids: Set[str] = field(default_factory=set)
    seq: int = 0  # insertion tie-break for identical timestamps

    def to_doc(self) -> dict:
        return {
            "upri": self.upri,
            "label": self.label,
            "position_class": self.position_class,
            "value": self.value.to_doc(),
            "current": self.current,
            "provenance": self.provenance.to_doc(),
            "version_ids": sorted(self.version_ids),
        }


@dataclass
class VersionNode:
    upri: str
    statement: str
    created: ProvenanceStamp
    content_hash: str
    previous: Optional[str]

    def to_doc(self) -> dict:
        return {
            "upri": self.upri,
            "hash": self.content_hash,
            "previous": self.previous,
            "created": self.created.to_doc(),
        }


@dataclass
class StatementRecord:
    upri: str
    statement_class: str
    schema_version: int
    subject: Value
    paradigm: str
    current: bool = True
    truth_tag: Optional[str] = None  # None means the assertional default
    tags: Set[str] = field(default_factory=set)
    metadata: Dict = field(default_factory=dict)
    provenance: Optional[ProvenanceStamp] = None
    current_version: Optional[str] = None
    versions: List[str] = field(default_factory=list)

    @property
    def effective_truth_tag(self) -> str:
        return self.truth_tag or "assertional"

    @property
    def classification(self) -> List[str]:
        return [self.effective_truth_tag] + sorted(self.tags)


class StatementStore:
    def __init__(self):
        self._statements: Dict[str, StatementRecord] = {}
        self._positions: Dict[str, Dict[str, List[PositionInstance]]] = {}
        self._versions: Dict[str, VersionNode] = {}
        self._seq = 0
        self.mutation_counter = 0

    # -- introspection ----------------------------------------------------

    @property
    def record_count(self) -> int:
        return (len(self._statements) + len(self._versions)
                + sum(len(instances) for by_label in self._positions.values()
                      for instances in by_label.values()))

    def get(self, upri: str) -> StatementRecord:
        record = self._statements.get(upri)
        if record is None:
            raise UnknownStatement(upri)
        return record

    def __contains__(self, upri: str) -> bool:
        return upri in self._statements

    def all_statements(self, include_deleted: bool = False) -> List[StatementRecord]:
        return [s for s in self._statements.values()
                if include_deleted or s.current]

    def instances(self, statement: str, label: str) -> List[PositionInstance]:
        return self._positions.get(statement, {}).get(label, [])

    def current_instance(self, statement: str, label: str) -> Optional[PositionInstance]:
        for inst in self.instances(statement, label):
            if inst.current:
                return inst
        return None

    def current_view(self, statement: str) -> Tuple[Value, Dict[str, Value]]:
        record = self.get(statement)
        bindings = {}
        for label in self._positions.get(statement, {}):
            inst = self.current_instance(statement, label)
            if inst is not None:
                bindings[label] = inst.value
        return record.subject, bindings

    # -- mutations (identifiers supplied by the caller) --------------------

    def apply_create(self, upri: str, schema: ReferenceSchema, subject: Value,
                     bindings: Mapping[str, Value], metadata: Dict,
                     paradigm: str, provenance: ProvenanceStamp,
                     position_upris: Mapping[str, str],
                     classification: Iterable[str] = ()) -> StatementRecord:
        record = StatementRecord(
            upri=upri,
            statement_class=schema.statement_class,
            schema_version=schema.version,
            subject=subject,
            paradigm=paradigm,
            metadata=dict(metadata),
            provenance=provenance,
        )
        for tag in classification:
            self._apply_tag(record, tag)
        self._statements[upri] = record
        by_label: Dict[str, List[PositionInstance]] = {}
        for pos in schema.positions:
            value = bindings.get(pos.label)
            if value is None:
                continue
            self._seq += 1
            by_label[pos.label] = [PositionInstance(
                upri=position_upris[pos.label],
                statement=upri,
                label=pos.label,
                position_class=pos.position_class_upri if paradigm == FULL else None,
                value=value,
                current=True,
                provenance=provenance,
                seq=self._seq,
            )]
        self._positions[upri] = by_label
        self.mutation_counter += 1
        return record

    def apply_edit(self, statement: str, label: str, value: Value,
                   provenance: ProvenanceStamp, new_upri: str) -> PositionInstance:
        record = self.get(statement)
        if record.paradigm != FULL:
            raise LightModeImmutable(
                "light statements are edited by delete-and-recreate")
        if not record.current:
            raise StatementDeleted(statement)
        previous = self.current_instance(statement, label)
        if previous is not None:
            previous.current = False
        self._seq += 1
        inst = PositionInstance(
            upri=new_upri,
            statement=statement,
            label=label,
            position_class=self._position_class(statement, label),
            value=value,
            current=True,
            provenance=provenance,
            seq=self._seq,
        )
        self._positions[statement].setdefault(label, []).append(inst)
        self.mutation_counter += 1
        return inst

    def _position_class(self, statement: str, label: str) -> Optional[str]:
        for inst in self.instances(statement, label):
            return inst.position_class
        return None

    def apply_soft_delete(self, statement: str) -> None:
        record = self.get(statement)
        if not record.current:
            raise AlreadyDeleted(statement)
        record.current = False
        self.mutation_counter += 1

    def apply_version(self, statement: str, version_upri: str,
                      provenance: ProvenanceStamp,
                      required_labels: Iterable[str]) -> VersionNode:
        record = self.get(statement)
        if record.paradigm != FULL:
            raise LightModeImmutable("light statements cannot be versioned")
        if not record.current:
            raise StatementDeleted(statement)
        subject, bindings = self.current_view(statement)
        missing = [lbl for lbl in required_labels if lbl not in bindings]
        if missing:
            raise IncompleteStatement(", ".join(sorted(missing)))
        digest = content_hash(canonical_serialize(subject, bindings))
        node = VersionNode(
            upri=version_upri,
            statement=statement,
            created=provenance,
            content_hash=digest,
            previous=record.current_version,
        )
        self._versions[version_upri] = node
        record.current_version = version_upri
        record.versions.append(version_upri)
        for by_label in self._positions[statement].values():
            for inst in by_label:
                if inst.current:
                    inst.version_ids.add(version_upri)
        self.mutation_counter += 1
        return node

    def apply_classify(self, statement: str, tag: str) -> None:
        record = self.get(statement)
        self._apply_tag(record, tag)
        self.mutation_counter += 1

    def _apply_tag(self, record: StatementRecord, tag: str) -> None:
        if is_truth_tag(tag):
            if record.truth_tag is not None and record.truth_tag != tag:
                raise ConflictingTruthTag(
                    f"{record.upri} is already {record.truth_tag}")
            record.truth_tag = tag
        else:
            record.tags.add(tag)

    def apply_declassify(self, statement: str, tag: str) -> None:
        record = self.get(statement)
        if is_truth_tag(tag):
            if record.truth_tag == tag:
                record.truth_tag = None  # falls back to the assertional default
        else:
            record.tags.discard(tag)
        self.mutation_counter += 1

    # -- reads ------------------------------------------------------------

    def get_history(self, statement: str,
                    label: Optional[str] = None) -> List[PositionInstance]:
        self.get(statement)  # deleted statements keep their history
        by_label = self._positions.get(statement, {})
        if label is not None:
            if label not in by_label:
                raise UnknownPosition(label)
            pool = list(by_label[label])
        else:
            pool = [inst for instances in by_label.values() for inst in instances]
        return sorted(pool, key=lambda i: (i.provenance.created_at, i.seq))

    def get_version(self, version_upri: str) -> VersionNode:
        node = self._versions.get(version_upri)
        if node is None:
            raise UnknownVersion(version_upri)
        return node

    def get_version_view(self, statement: str,
                         version_upri: str) -> Tuple[Value, Dict[str, Value]]:
        node = self.get_version(version_upri)
        if node.statement != statement:
            raise UnknownVersion(f"{version_upri} does not version {statement}")
        record = self.get(statement)
        bindings = {}
        for label, instances in self._positions[statement].items():
            for inst in instances:
                if version_upri in inst.version_ids:
                    bindings[label] = inst.value
                    break
        return record.subject, bindings

    def reconstruct_input(self, statement: str,
                          include_deleted: bool = False) -> dict:
        """The data a user would re-enter to recreate the current state."""
        record = self.get(statement)
        if not record.current and not include_deleted:
            raise StatementDeleted(statement)
        subject, bindings = self.current_view(statement)
        return {
            "statement_class": record.statement_class,
            "schema_version": record.schema_version,
            "subject": subject.to_doc(),
            "bindings": {label: value.to_doc()
                         for label, value in sorted(bindings.items())},
            "classification": record.classification,
            "metadata": dict(record.metadata),
        }

    def full_to_light(self, statement: str) -> dict:
        """Light representation of a full-paradigm statement's current state."""
        record = self.get(statement)
        subject, bindings = self.current_view(statement)
        links = [{"label": label, "value": bindings[label].to_doc()}
                 for label in sorted(bindings)]
        return {
            "statement_class": record.statement_class,
            "schema_version": record.schema_version,
            "subject": subject.to_doc(),
            "links": links,
            "classification": record.classification,
            "link_count": 1 + len(links),  # 'has subject' plus one per position
        }

    def to_doc(self, statement: str) -> dict:
        record = self.get(statement)
        positions = []
        for label in sorted(self._positions.get(statement, {})):
            for inst in self.get_history(statement, label):
                positions.append(inst.to_doc())
        return {
            "upri": record.upri,
            "statement_class": record.statement_class,
            "schema_version": record.schema_version,
            "subject": record.subject.to_doc(),
            "paradigm": record.paradigm,
            "current": record.current,
            "positions": positions,
            "classification": record.classification,
            "metadata": dict(record.metadata),
            "provenance": record.provenance.to_doc() if record.provenance else None,
            "current_version": record.current_version,
            "versions": [self._versions[v].to_doc() for v in record.versions],
        }

    # -- persistence ------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "seq": self._seq,
            "statements": [
                {
                    "upri": s.upri,
                    "statement_class": s.statement_class,
                    "schema_version": s.schema_version,
                    "subject": s.subject.to_doc(),
                    "paradigm": s.paradigm,
                    "current": s.current,
                    "truth_tag": s.truth_tag,
                    "tags": sorted(s.tags),
                    "metadata": s.metadata,
                    "provenance": s.provenance.to_doc() if s.provenance else None,
                    "current_version": s.current_version,
                    "versions": s.versions,
                }
                for s in self._statements.values()
            ],
            "positions": [
                {
                    "upri": i.upri,
                    "statement": i.statement,
                    "label": i.label,
                    "position_class": i.position_class,
                    "value": i.value.to_doc(),
                    "current": i.current,
                    "provenance": i.provenance.to_doc(),
                    "version_ids": sorted(i.version_ids),
                    "seq": i.seq,
                }
                for by_label in self._positions.values()
                for instances in by_label.values()
                for i in instances
            ],
            "versions": [
                {
                    "upri": v.upri,
                    "statement": v.statement,
                    "created": v.created.to_doc(),
                    "content_hash": v.content_hash,
                    "previous": v.previous,
                }
                for v in self._versions.values()
            ],
        }

    def load_state(self, state: dict) -> None:
        self._seq = state["seq"]
        self._statements = {}
        for s in state["statements"]:
            self._statements[s["upri"]] = StatementRecord(
                upri=s["upri"],
                statement_class=s["statement_class"],
                schema_version=s["schema_version"],
                subject=Value.from_doc(s["subject"]),
                paradigm=s["paradigm"],
                current=s["current"],
                truth_tag=s["truth_tag"],
                tags=set(s["tags"]),
                metadata=s["metadata"],
                provenance=ProvenanceStamp.from_doc(s["provenance"])
                if s["provenance"] else None,
                current_version=s["current_version"],
                versions=list(s["versions"]),
            )
        self._positions = {upri: {} for upri in self._statements}
        for i in state["positions"]:
            inst = PositionInstance(
                upri=i["upri"],
                statement=i["statement"],
                label=i["label"],
                position_class=i["position_class"],
                value=Value.from_doc(i["value"]),
                current=i["current"],
                provenance=ProvenanceStamp.from_doc(i["provenance"]),
                version_ids=set(i["version_ids"]),
                seq=i["seq"],
            )
            self._positions.setdefault(inst.statement, {}).setdefault(
                inst.label, []).append(inst)
        self._versions = {
            v["upri"]: VersionNode(
                upri=v["upri"],
                statement=v["statement"],
                created=ProvenanceStamp.from_doc(v["created"]),
                content_hash=v["content_hash"],
                previous=v["previous"],
            )
            for v in state["versions"]
        }
        self.mutation_counter += 1
