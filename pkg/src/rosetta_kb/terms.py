"""Term registry: vocabulary terms, subclass taxonomy, and the mapping hub.

Every mapping touches a reference term, so cross-vocabulary resolution is at
most two hops (source -> reference -> target) and V vocabularies need V mapping
families instead of V*(V-1)/2 pairwise ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .core import CLASS_TERM, NAMED_INDIVIDUAL, PROPERTY_TERM, ProvenanceStamp
from .errors import (
    CycleDetected,
    DuplicateMapping,
    HubViolation,
    NoMapping,
    UnknownParent,
    UnknownTerm,
)

SAME_AS = "same-as"
EQUIVALENT_CLASS = "equivalent-class"
MAPPING_KINDS = (SAME_AS, EQUIVALENT_CLASS)

TERM_KINDS = (NAMED_INDIVIDUAL, CLASS_TERM, PROPERTY_TERM)


@dataclass(frozen=True)
class TermRecord:
    upri: str
    label: str
    kind: str
    definition: str = ""
    parents: Tuple[str, ...] = ()
    vocabulary: str = "local"
    is_reference_term: bool = False

    def to_doc(self) -> dict:
        return {
            "upri": self.upri,
            "label": self.label,
            "kind": self.kind,
            "definition": self.definition,
            "parents": list(self.parents),
            "vocabulary": self.vocabulary,
            "reference": self.is_reference_term,
        }


@dataclass(frozen=True)
class TermMapping:
    source: str
    target: str
    kind: str
    provenance: Optional[ProvenanceStamp] = None

    def to_doc(self) -> dict:
        return {"source": self.source, "target": self.target, "kind": self.kind}


class TermRegistry:
    def __init__(self, reference_vocabulary: str = "wikidata"):
        self.reference_vocabulary = reference_vocabulary
        self._terms: Dict[str, TermRecord] = {}
        self._mappings: Dict[Tuple[str, str], TermMapping] = {}
        self._by_label: Dict[Tuple[str, str], str] = {}  # (vocabulary, label) -> upri

    # -- terms ------------------------------------------------------------

    def register(self, upri: str, label: str, kind: str, definition: str = "",
                 parents: Iterable[str] = (), vocabulary: str = "local",
                 is_reference_term: Optional[bool] = None) -> str:
        if kind not in TERM_KINDS:
            raise ValueError(f"unknown term kind {kind!r}")
        parents = tuple(parents)
        if upri in parents:
            raise CycleDetected(f"{upri} cannot be its own parent")
        for parent in parents:
            record = self._terms.get(parent)
            if record is None:
                raise UnknownParent(parent)
            if record.kind != CLASS_TERM:
                raise UnknownParent(f"{parent} is not a class-term")
        if is_reference_term is None:
            is_reference_term = vocabulary == self.reference_vocabulary
        term = TermRecord(upri, label, kind, definition, parents, vocabulary,
                          is_reference_term)
        self._terms[upri] = term
        self._assert_acyclic(upri)
        self._by_label.setdefault((vocabulary, label), upri)
        return upri

    def _assert_acyclic(self, start: str) -> None:
        seen: Set[str] = set()
        stack = [start]
        while stack:
            node = stack.pop()
            for parent in self._terms[node].parents:
                if parent == start:
                    del self._terms[start]
                    raise CycleDetected(start)
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)

    def get(self, upri: str) -> TermRecord:
        term = self._terms.get(upri)
        if term is None:
            raise UnknownTerm(upri)
        return term

    def __contains__(self, upri: str) -> bool:
        return upri in self._terms

    def all_terms(self) -> List[TermRecord]:
        return list(self._terms.values())

    def label_of(self, upri: str) -> str:
        term = self._terms.get(upri)
        return term.label if term else upri

    def find_by_label(self, vocabulary: str, label: str) -> str:
        upri = self._by_label.get((vocabulary, label))
        if upri is None:
            raise UnknownTerm(f"no term labeled {label!r} in vocabulary {vocabulary!r}")
        return upri

    def find_all_by_label(self, label: str) -> List[str]:
        """Every term carrying this label, across all vocabularies."""
        return sorted({upri for (_, lbl), upri in self._by_label.items()
                       if lbl == label})

    # -- mappings ---------------------------------------------------------

    def add_mapping(self, source: str, target: str, kind: str,
                    provenance: Optional[ProvenanceStamp] = None) -> TermMapping:
        if kind not in MAPPING_KINDS:
            raise ValueError(f"unknown mapping kind {kind!r}")
        if source == target:
            raise ValueError("mapping source and target must differ")
        src, tgt = self.get(source), self.get(target)
        if not (src.is_reference_term or tgt.is_reference_term):
            raise HubViolation(f"neither {source} nor {target} is a reference term")
        if (source, target) in self._mappings or (target, source) in self._mappings:
            raise DuplicateMapping(f"{source} <-> {target}")
        mapping = TermMapping(source, target, kind, provenance)
        self._mappings[(source, target)] = mapping
        return mapping

    def all_mappings(self) -> List[TermMapping]:
        return list(self._mappings.values())

    def _neighbors(self, upri: str, minimum_kind: str) -> List[str]:
        # same-as satisfies an equivalent-class requirement, not vice versa.
        out = []
        for (src, tgt), mapping in self._mappings.items():
            if minimum_kind == SAME_AS and mapping.kind != SAME_AS:
                continue
            if src == upri:
                out.append(tgt)
            elif tgt == upri:
                out.append(src)
        return sorted(out)

    def resolve(self, term: str, target_vocabulary: str,
                minimum_kind: str = EQUIVALENT_CLASS) -> str:
        """Translate `term` into `target_vocabulary` through the reference hub.

        At most two mapping hops; identity when already in the target vocabulary.
        """
        record = self.get(term)
        if record.vocabulary == target_vocabulary:
            return term
        for hop1 in self._neighbors(term, minimum_kind):
            if self.get(hop1).vocabulary == target_vocabulary:
                return hop1
            if self.get(hop1).is_reference_term:
                for hop2 in self._neighbors(hop1, minimum_kind):
                    if hop2 != term and self.get(hop2).vocabulary == target_vocabulary:
                        return hop2
        raise NoMapping(f"{term} has no path into vocabulary {target_vocabulary!r}")

    # -- taxonomy ---------------------------------------------------------

    def is_subclass_of(self, a: str, b: str) -> bool:
        """Reflexive, transitive reachability over parent links."""
        for upri in (a, b):
            if self.get(upri).kind != CLASS_TERM:
                raise UnknownTerm(f"{upri} is not a class-term")
        if a == b:
            return True
        seen: Set[str] = set()
        stack = [a]
        while stack:
            node = stack.pop()
            for parent in self._terms[node].parents:
                if parent == b:
                    return True
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        return False

    def instantiates(self, value_upri: str, class_upri: str) -> bool:
        """True when the resource is (subclass-closed) an instance of the class."""
        term = self._terms.get(value_upri)
        if term is None:
            return False
        if term.kind == NAMED_INDIVIDUAL:
            return any(self.is_subclass_of(p, class_upri) for p in term.parents)
        if term.kind == CLASS_TERM:
            return self.is_subclass_of(value_upri, class_upri)
        return False

    def direct_classes(self, value_upri: str) -> Tuple[str, ...]:
        term = self._terms.get(value_upri)
        return term.parents if term else ()

    # -- bulk import/export -----------------------------------------------

    def to_doc(self) -> dict:
        return {
            "terms": [t.to_doc() for t in self._terms.values()],
            "mappings": [m.to_doc() for m in self._mappings.values()],
        }

    def load_doc(self, doc: dict) -> None:
        for t in doc.get("terms", ()):
            self.register(t["upri"], t["label"], t["kind"], t.get("definition", ""),
                          t.get("parents", ()), t.get("vocabulary", "local"),
                          t.get("reference"))
        for m in doc.get("mappings", ()):
            self.add_mapping(m["source"], m["target"], m["kind"])
