"""Shared domain types: identifiers, values, provenance, canonical bytes and hashing.

All types here are immutable values and safe to share between threads.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import re
import secrets
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Mapping, Optional, Sequence

from .errors import IncompleteSnapshot

# Resource kinds.  some-instance / every-instance resources carry the class
# they range over in their `upri` field.
NAMED_INDIVIDUAL = "named-individual"
CLASS_TERM = "class-term"
PROPERTY_TERM = "property-term"
SOME_INSTANCE = "some-instance"
EVERY_INSTANCE = "every-instance"

RESOURCE_KINDS = frozenset({
    NAMED_INDIVIDUAL, CLASS_TERM, PROPERTY_TERM, SOME_INSTANCE, EVERY_INSTANCE,
})

# Fixed datatype palette; extensible through LITERAL_PARSERS.
DATATYPES = ("text", "decimal", "integer", "boolean", "date", "datetime", "uri")

_URI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S+$")


def _parse_datetime(lexical: str) -> _dt.datetime:
    value = _dt.datetime.fromisoformat(lexical.replace("Z", "+00:00"))
    if value.tzinfo is None:
        raise ValueError("datetime literal must carry a UTC offset")
    return value


LITERAL_PARSERS = {
    "text": str,
    "decimal": Decimal,
    "integer": int,
    "boolean": lambda s: {"true": True, "false": False}[s],
    "date": _dt.date.fromisoformat,
    "datetime": _parse_datetime,
    "uri": lambda s: s if _URI_RE.match(s) else (_ for _ in ()).throw(ValueError(s)),
}


def literal_is_valid(lexical: str, datatype: str) -> bool:
    parser = LITERAL_PARSERS.get(datatype)
    if parser is None:
        return False
    try:
        parser(lexical)
    except (ValueError, KeyError, ArithmeticError, InvalidOperation):
        return False
    return True


@dataclass(frozen=True)
class LiteralValue:
    lexical: str
    datatype: str

    def parsed(self):
        return LITERAL_PARSERS[self.datatype](self.lexical)


@dataclass(frozen=True)
class Resource:
    upri: str
    kind: str


@dataclass(frozen=True)
class Value:
    """Exactly one of `resource` / `literal` is populated."""

    resource: Optional[Resource] = None
    literal: Optional[LiteralValue] = None

    def __post_init__(self):
        if (self.resource is None) == (self.literal is None):
            raise ValueError("a value is either a resource or a literal")

    @classmethod
    def of_resource(cls, upri: str, kind: str = NAMED_INDIVIDUAL) -> "Value":
        if kind not in RESOURCE_KINDS:
            raise ValueError(f"unknown resource kind {kind!r}")
        return cls(resource=Resource(upri, kind))

    @classmethod
    def of_literal(cls, lexical: str, datatype: str) -> "Value":
        return cls(literal=LiteralValue(lexical, datatype))

    @property
    def is_resource(self) -> bool:
        return self.resource is not None

    def to_doc(self) -> dict:
        if self.resource is not None:
            return {"resource": {"upri": self.resource.upri, "kind": self.resource.kind}}
        return {"literal": {"lexical": self.literal.lexical, "datatype": self.literal.datatype}}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Value":
        if "resource" in doc and doc["resource"] is not None:
            r = doc["resource"]
            return cls.of_resource(r["upri"], r.get("kind", NAMED_INDIVIDUAL))
        lit = doc["literal"]
        return cls.of_literal(lit["lexical"], lit["datatype"])


@dataclass(frozen=True)
class ProvenanceStamp:
    creator: str
    created_at: str
    imported_from: Optional[str] = None

    def to_doc(self) -> dict:
        doc = {"creator": self.creator, "created_at": self.created_at}
        if self.imported_from is not None:
            doc["imported_from"] = self.imported_from
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ProvenanceStamp":
        return cls(doc["creator"], doc["created_at"], doc.get("imported_from"))


def now_utc() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat().replace("+00:00", "Z")


def mint_upri(namespace: str, entity_kind: str, token_hex=None) -> str:
    """Fresh identifier: namespace + entity kind + 128-bit random token."""
    if not namespace:
        raise ValueError("namespace must be non-empty")
    token = token_hex if token_hex is not None else secrets.token_hex(16)
    return f"{namespace}{entity_kind}:{token}"


def canonical_serialize(subject: Value, positions: Mapping[str, Value],
                        required: Sequence[str] = ()) -> bytes:
    """Deterministic bytes for a statement snapshot.

    Subject first, then positions sorted by label; independent of input order.
    """
    missing = [label for label in required if label not in positions]
    if missing:
        raise IncompleteSnapshot(f"unbound required positions: {', '.join(sorted(missing))}")
    doc = {
        "subject": subject.to_doc(),
        "positions": [[label, positions[label].to_doc()] for label in sorted(positions)],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
