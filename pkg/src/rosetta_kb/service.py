"""HTTP service exposing the knowledge base as JSON endpoints."""

from __future__ import annotations

import socket
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .core import Value
from .errors import (
    AddressInUse,
    RosettaError,
    UnknownCrosswalk,
    UnknownPosition,
    UnknownSchema,
    UnknownStatement,
    UnknownTemplate,
    UnknownTerm,
    UnknownVersion,
    ValidationFailed,
)
from .kb import KbConfig, KnowledgeBase
from .schema import ObjectPositionSpec, WIZARD_QUESTIONS

_NOT_FOUND = (UnknownSchema, UnknownStatement, UnknownTerm, UnknownPosition,
              UnknownVersion, UnknownCrosswalk, UnknownTemplate)


def create_app(kb: KnowledgeBase) -> FastAPI:
    app = FastAPI(title="rosetta-kb", version="0.1.0")

    @app.exception_handler(RosettaError)
    async def _domain_error(request: Request, exc: RosettaError):
        status = 404 if isinstance(exc, _NOT_FOUND) else 400
        payload = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, ValidationFailed):
            payload["report"] = exc.report
        return JSONResponse(status_code=status, content=payload)

    # -- health -----------------------------------------------------------

    @app.get("/health")
    def health():
        return kb.health()

    # -- schemata ---------------------------------------------------------

    @app.get("/schemas/wizard-spec")
    def wizard_spec():
        return {"questions": list(WIZARD_QUESTIONS)}

    @app.post("/schemas/wizard")
    def create_schema(body: dict = Body(...)):
        schema = kb.create_schema_from_wizard(body["answers"],
                                              body.get("paradigm"))
        return schema.to_doc()

    @app.get("/schemas")
    def list_schemas():
        return {"schemas": [s.to_doc() for s in kb.schemas.all_latest()]}

    @app.get("/schemas/{schema_id}/wizard-spec")
    def wizard_spec_for(schema_id: str):
        return {"questions": list(WIZARD_QUESTIONS)}

    @app.get("/schemas/{schema_id}")
    def get_schema(schema_id: str, version: Optional[int] = None):
        return kb.schema_doc(schema_id, version)

    @app.get("/schemas/{schema_id}/shape")
    def get_shape(schema_id: str, version: Optional[int] = None):
        return kb.export_shape(schema_id, version)

    @app.get("/schemas/{schema_id}/owl")
    def get_owl(schema_id: str):
        return kb.derive_owl_schema(schema_id)

    @app.post("/schemas/{schema_id}/evolve")
    def evolve_schema(schema_id: str, body: dict = Body(...)):
        positions = [ObjectPositionSpec.from_doc(p) for p in body["positions"]]
        return kb.evolve_schema(schema_id, positions).to_doc()

    @app.get("/schemas/{schema_id}/templates")
    def schema_templates(schema_id: str):
        return {"templates": kb.display.templates_for(schema_id),
                "default_label": kb.display.default_label_id(schema_id)}

    @app.get("/schemas/{schema_id}/crosswalks")
    def schema_crosswalks(schema_id: str):
        return {"crosswalks": [c.to_doc()
                               for c in kb.crosswalks.for_schema(schema_id)]}

    # -- terms ------------------------------------------------------------

    @app.post("/terms")
    def register_term(body: dict = Body(...)):
        upri = kb.register_term(
            label=body["label"], kind=body["kind"],
            definition=body.get("definition", ""),
            parents=body.get("parents", ()),
            vocabulary=body.get("vocabulary", "local"),
            upri=body.get("upri"),
            is_reference=body.get("reference"))
        return kb.terms.get(upri).to_doc()

    @app.get("/terms")
    def export_terms():
        return kb.terms.to_doc()

    @app.post("/terms/mappings")
    def add_mapping(body: dict = Body(...)):
        return kb.add_mapping(body["source"], body["target"], body["kind"],
                              body.get("creator", "api"))

    @app.get("/terms/{term_id}/resolve")
    def resolve_term(term_id: str, vocab: str,
                     kind: str = "equivalent-class"):
        return {"term": term_id, "vocabulary": vocab,
                "resolved": kb.resolve_term(term_id, vocab, kind)}

    @app.get("/terms/{term_id}")
    def get_term(term_id: str):
        return kb.terms.get(term_id).to_doc()

    # -- statements -------------------------------------------------------

    @app.post("/statements")
    def create_statement(body: dict = Body(...)):
        upri = kb.create_statement(
            schema_id=body["schema"],
            subject=Value.from_doc(body["subject"]),
            bindings={label: Value.from_doc(doc)
                      for label, doc in body.get("bindings", {}).items()},
            metadata=body.get("metadata"),
            paradigm=body.get("paradigm"),
            creator=body.get("creator", "api"),
            classification=body.get("classification", ()))
        return kb.statement_doc(upri)

    @app.get("/statements")
    def list_statements(include_deleted: bool = False):
        return {"statements": [
            kb.statement_doc(s.upri)
            for s in kb.store.all_statements(include_deleted=include_deleted)
        ]}

    @app.get("/statements/{stmt_id}")
    def get_statement(stmt_id: str, include_deleted: bool = False):
        doc = kb.statement_doc(stmt_id)
        if not doc["current"] and not include_deleted:
            return JSONResponse(status_code=404, content={
                "error": "UnknownStatement",
                "detail": f"{stmt_id} has been deleted"})
        return doc

    @app.patch("/statements/{stmt_id}/positions/{label}")
    def edit_position(stmt_id: str, label: str, body: dict = Body(...)):
        kb.edit_position(stmt_id, label, Value.from_doc(body["value"]),
                         body.get("creator", "api"))
        return kb.statement_doc(stmt_id)

    @app.delete("/statements/{stmt_id}")
    def delete_statement(stmt_id: str):
        kb.soft_delete(stmt_id)
        return {"deleted": stmt_id}

    @app.get("/statements/{stmt_id}/history")
    def get_history(stmt_id: str, position: Optional[str] = None):
        return {"history": [inst.to_doc()
                            for inst in kb.store.get_history(stmt_id, position)]}

    @app.get("/statements/{stmt_id}/reconstruct")
    def reconstruct(stmt_id: str, include_deleted: bool = False):
        return kb.store.reconstruct_input(stmt_id, include_deleted)

    @app.get("/statements/{stmt_id}/light")
    def to_light(stmt_id: str):
        return kb.full_to_light(stmt_id)

    @app.post("/statements/{stmt_id}/versions")
    def create_version(stmt_id: str, body: dict = Body(default={})):
        version = kb.create_version(stmt_id, body.get("creator", "api"))
        return kb.store.get_version(version).to_doc()

    @app.get("/statements/{stmt_id}/versions/{version_id}")
    def version_view(stmt_id: str, version_id: str):
        return kb.get_version_view(stmt_id, version_id)

    @app.post("/statements/{stmt_id}/classify")
    def classify(stmt_id: str, body: dict = Body(...)):
        if body.get("remove"):
            kb.declassify(stmt_id, body["tag"])
        else:
            kb.classify(stmt_id, body["tag"])
        return kb.statement_doc(stmt_id)

    @app.get("/statements/{stmt_id}/render")
    def render(stmt_id: str, template: Optional[str] = None):
        return {"text": kb.render_label(stmt_id, template)}

    @app.get("/statements/{stmt_id}/mindmap")
    def mindmap(stmt_id: str, pattern: str):
        return kb.render_mindmap(stmt_id, pattern)

    # -- crosswalks -------------------------------------------------------

    @app.get("/crosswalks/counts")
    def counts(n: int = Query(..., ge=1)):
        return kb.crosswalk_counts(n)

    @app.post("/crosswalks")
    def define_crosswalk(body: dict = Body(...)):
        return kb.define_crosswalk(body).to_doc()

    @app.get("/crosswalks")
    def list_crosswalks():
        return {"crosswalks": [c.to_doc() for c in kb.crosswalks.all_crosswalks()]}

    @app.post("/crosswalks/{crosswalk_id}/export/{stmt_id}")
    def export_statement(crosswalk_id: str, stmt_id: str):
        document = kb.export_statement(stmt_id, crosswalk_id)
        if isinstance(document, str):
            return PlainTextResponse(document)
        return {"document": document}

    @app.post("/crosswalks/{crosswalk_id}/import")
    def import_statement(crosswalk_id: str, body: dict = Body(...)):
        upri = kb.import_statement(body["document"], crosswalk_id,
                                   body.get("creator", "api"),
                                   body.get("paradigm"))
        return kb.statement_doc(upri)

    # -- queries ----------------------------------------------------------

    @app.post("/queries/evaluate")
    def evaluate(body: dict = Body(...)):
        return kb.evaluate(body)

    @app.post("/queries/plan")
    def plan(body: dict = Body(...)):
        return {"plan": kb.explain_plan(body)}

    @app.post("/queries/store")
    def store_question(body: dict = Body(...)):
        question = kb.build_question(body["question"])
        upri = kb.store_question(question, body.get("creator", "api"))
        return {"upri": upri}

    # -- templates --------------------------------------------------------

    @app.post("/templates")
    def register_template(body: dict = Body(...)):
        template_id = kb.register_template(body)
        return {"id": template_id}

    return app


def serve(config: KbConfig, host: str = "127.0.0.1", port: int = 8750) -> None:
    """Run the HTTP service; raises AddressInUse when the port is occupied."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise AddressInUse(f"{host}:{port}") from exc
    finally:
        probe.close()
    kb = KnowledgeBase(config)
    uvicorn.run(create_app(kb), host=host, port=port, log_level="warning")
