"""Command line interface: every subcommand maps onto a library operation."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Optional

import click
import yaml

from .core import Value
from .errors import RosettaError
from .kb import KbConfig, KnowledgeBase
from .query import question_from_doc
from .schema import Constraint, ObjectPositionSpec, WIZARD_QUESTIONS, WizardAnswers


def _open_kb(ctx) -> KnowledgeBase:
    data_dir = ctx.obj["data_dir"]
    config = KbConfig(data_dir=Path(data_dir) if data_dir else None)
    return KnowledgeBase(config)


def _out(ctx, doc, text: Optional[str] = None) -> None:
    if ctx.obj["json"] or text is None:
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
    else:
        click.echo(text)


def _load_doc(path: str):
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith((".yaml", ".yml")):
        return yaml.safe_load(text)
    return json.loads(text)


@click.group()
@click.option("--data-dir", envvar="ROSETTA_DATA_DIR", default=None,
              help="Persistence directory (event log + snapshot).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, data_dir, as_json):
    """rosetta-kb: schema-driven statement knowledge base."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir
    ctx.obj["json"] = as_json


def _run(ctx, fn):
    try:
        fn()
    except RosettaError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)


# -- schema -----------------------------------------------------------------

@main.group()
def schema():
    """Author, inspect, and export reference schemata."""


def _interactive_answers() -> WizardAnswers:
    prompts = {q["field"]: q["prompt"] for q in WIZARD_QUESTIONS}
    examples = click.prompt(prompts["examples"] + " (separate with ';')",
                            default="", show_default=False)
    predicate = click.prompt(prompts["predicate"])
    description = click.prompt(prompts["description"], default="",
                               show_default=False)
    count = click.prompt(prompts["position_count"], type=int)
    labels = [click.prompt("Label for the subject position")]
    for i in range(count):
        labels.append(click.prompt(f"Label for object position {i + 1}"))
    click.echo(prompts["required"])
    required = [click.confirm(f"  is {labels[i + 1]} required?", default=True)
                for i in range(count)]
    click.echo(prompts["position_descriptions"])
    descriptions = [click.prompt(f"  description of {labels[i + 1]}", default="",
                                 show_default=False) for i in range(count)]
    click.echo(prompts["constraints"])
    constraints = []
    for label in labels:
        kind = click.prompt(f"  {label}: resource or literal",
                            type=click.Choice(["resource", "literal"]),
                            default="resource" if label == labels[0] else None)
        if kind == "resource":
            constraints.append(Constraint(kind="resource",
                                          class_upri=click.prompt("    class UPRI")))
        else:
            constraints.append(Constraint(
                kind="literal",
                datatype=click.prompt("    datatype"),
                pattern=click.prompt("    pattern", default="",
                                     show_default=False) or None))
    click.echo(prompts["logical"])
    logical = []
    for i in range(count):
        flags = click.prompt(f"  flags for {labels[i + 1]} "
                             "(comma-separated, empty for none)",
                             default="", show_default=False)
        logical.append(tuple(f.strip() for f in flags.split(",") if f.strip()))
    dynamic_label = click.prompt(prompts["dynamic_label"])
    return WizardAnswers(
        examples=tuple(e.strip() for e in examples.split(";") if e.strip()),
        predicate=predicate,
        description=description,
        position_count=count,
        labels=tuple(labels),
        required_flags=tuple(required),
        position_descriptions=tuple(descriptions),
        constraints=tuple(constraints),
        logical_flags=tuple(logical),
        dynamic_label=dynamic_label,
    )


@schema.command("new")
@click.option("--answers", "answers_path", default=None,
              help="Wizard answers file (YAML or JSON); interactive otherwise.")
@click.option("--paradigm", type=click.Choice(["light", "full"]), default=None)
@click.pass_context
def schema_new(ctx, answers_path, paradigm):
    """Create a schema by answering the ten wizard questions."""
    def go():
        kb = _open_kb(ctx)
        if answers_path:
            answers = WizardAnswers.from_doc(_load_doc(answers_path))
        else:
            answers = _interactive_answers()
        created = kb.create_schema_from_wizard(answers, paradigm)
        _out(ctx, created.to_doc(), created.statement_class)
    _run(ctx, go)


@schema.command("list")
@click.pass_context
def schema_list(ctx):
    def go():
        kb = _open_kb(ctx)
        docs = [s.to_doc() for s in kb.schemas.all_latest()]
        _out(ctx, docs, "\n".join(f"{d['statement_class']}  {d['predicate_label']}"
                                  f"  v{d['version']}" for d in docs))
    _run(ctx, go)


@schema.command("show")
@click.argument("schema_id")
@click.option("--yaml", "as_yaml", is_flag=True)
@click.pass_context
def schema_show(ctx, schema_id, as_yaml):
    def go():
        kb = _open_kb(ctx)
        found = kb.schemas.get(schema_id)
        if as_yaml:
            click.echo(found.to_yaml())
        else:
            _out(ctx, found.to_doc())
    _run(ctx, go)


@schema.command("shape")
@click.argument("schema_id")
@click.pass_context
def schema_shape(ctx, schema_id):
    def go():
        _out(ctx, _open_kb(ctx).export_shape(schema_id))
    _run(ctx, go)


@schema.command("owl")
@click.argument("schema_id")
@click.pass_context
def schema_owl(ctx, schema_id):
    def go():
        _out(ctx, _open_kb(ctx).derive_owl_schema(schema_id))
    _run(ctx, go)


@schema.command("evolve")
@click.argument("schema_id")
@click.argument("positions_file")
@click.pass_context
def schema_evolve(ctx, schema_id, positions_file):
    """Add optional positions from a file: [{label, constraint, ...}]."""
    def go():
        kb = _open_kb(ctx)
        positions = [ObjectPositionSpec.from_doc(p)
                     for p in _load_doc(positions_file)]
        _out(ctx, kb.evolve_schema(schema_id, positions).to_doc())
    _run(ctx, go)


# -- term -------------------------------------------------------------------

@main.group()
def term():
    """Register terms and mappings; resolve across vocabularies."""


@term.command("add")
@click.argument("label")
@click.option("--kind", default="class-term")
@click.option("--definition", default="")
@click.option("--parent", "parents", multiple=True)
@click.option("--vocabulary", default="local")
@click.option("--upri", default=None)
@click.pass_context
def term_add(ctx, label, kind, definition, parents, vocabulary, upri):
    def go():
        kb = _open_kb(ctx)
        minted = kb.register_term(label, kind, definition, parents,
                                  vocabulary, upri)
        _out(ctx, kb.terms.get(minted).to_doc(), minted)
    _run(ctx, go)


@term.command("map")
@click.argument("source")
@click.argument("target")
@click.option("--kind", type=click.Choice(["same-as", "equivalent-class"]),
              default="same-as")
@click.pass_context
def term_map(ctx, source, target, kind):
    def go():
        _out(ctx, _open_kb(ctx).add_mapping(source, target, kind, "cli"))
    _run(ctx, go)


@term.command("resolve")
@click.argument("term_id")
@click.argument("vocabulary")
@click.option("--kind", type=click.Choice(["same-as", "equivalent-class"]),
              default="equivalent-class")
@click.pass_context
def term_resolve(ctx, term_id, vocabulary, kind):
    def go():
        resolved = _open_kb(ctx).resolve_term(term_id, vocabulary, kind)
        _out(ctx, {"resolved": resolved}, resolved)
    _run(ctx, go)


@term.command("import")
@click.argument("path")
@click.pass_context
def term_import(ctx, path):
    """Bulk-load a {terms: [...], mappings: [...]} document."""
    def go():
        kb = _open_kb(ctx)
        doc = _load_doc(path)
        for t in doc.get("terms", ()):
            kb.register_term(t["label"], t["kind"], t.get("definition", ""),
                             t.get("parents", ()), t.get("vocabulary", "local"),
                             t["upri"], t.get("reference"))
        for m in doc.get("mappings", ()):
            kb.add_mapping(m["source"], m["target"], m["kind"], "import")
        _out(ctx, kb.terms.to_doc(), "imported")
    _run(ctx, go)


# -- stmt -------------------------------------------------------------------

@main.group()
def stmt():
    """Create, edit, version, and render statements."""


@stmt.command("create")
@click.argument("input_file")
@click.option("--paradigm", type=click.Choice(["light", "full"]), default=None)
@click.option("--creator", default="cli")
@click.pass_context
def stmt_create(ctx, input_file, paradigm, creator):
    """Create from a file: {schema, subject, bindings, metadata?}."""
    def go():
        kb = _open_kb(ctx)
        doc = _load_doc(input_file)
        upri = kb.create_statement(
            doc["schema"], Value.from_doc(doc["subject"]),
            {label: Value.from_doc(v)
             for label, v in doc.get("bindings", {}).items()},
            doc.get("metadata"), paradigm, creator,
            doc.get("classification", ()))
        _out(ctx, kb.statement_doc(upri), upri)
    _run(ctx, go)


@stmt.command("show")
@click.argument("stmt_id")
@click.pass_context
def stmt_show(ctx, stmt_id):
    def go():
        _out(ctx, _open_kb(ctx).statement_doc(stmt_id))
    _run(ctx, go)


@stmt.command("edit")
@click.argument("stmt_id")
@click.argument("label")
@click.argument("value_json")
@click.option("--creator", default="cli")
@click.pass_context
def stmt_edit(ctx, stmt_id, label, value_json, creator):
    """Append a new value; VALUE_JSON like '{"literal": {...}}'."""
    def go():
        kb = _open_kb(ctx)
        kb.edit_position(stmt_id, label, Value.from_doc(json.loads(value_json)),
                         creator)
        _out(ctx, kb.statement_doc(stmt_id), "edited")
    _run(ctx, go)


@stmt.command("delete")
@click.argument("stmt_id")
@click.pass_context
def stmt_delete(ctx, stmt_id):
    def go():
        _open_kb(ctx).soft_delete(stmt_id)
        _out(ctx, {"deleted": stmt_id}, f"deleted {stmt_id}")
    _run(ctx, go)


@stmt.command("history")
@click.argument("stmt_id")
@click.option("--position", default=None)
@click.pass_context
def stmt_history(ctx, stmt_id, position):
    def go():
        kb = _open_kb(ctx)
        docs = [i.to_doc() for i in kb.store.get_history(stmt_id, position)]
        _out(ctx, docs, "\n".join(
            f"{d['provenance']['created_at']}  {d['label']}  "
            f"{'current' if d['current'] else 'superseded'}" for d in docs))
    _run(ctx, go)


@stmt.command("version")
@click.argument("stmt_id")
@click.option("--creator", default="cli")
@click.pass_context
def stmt_version(ctx, stmt_id, creator):
    def go():
        kb = _open_kb(ctx)
        version = kb.create_version(stmt_id, creator)
        _out(ctx, kb.store.get_version(version).to_doc(), version)
    _run(ctx, go)


@stmt.command("classify")
@click.argument("stmt_id")
@click.argument("tag")
@click.option("--remove", is_flag=True)
@click.pass_context
def stmt_classify(ctx, stmt_id, tag, remove):
    def go():
        kb = _open_kb(ctx)
        if remove:
            kb.declassify(stmt_id, tag)
        else:
            kb.classify(stmt_id, tag)
        _out(ctx, kb.statement_doc(stmt_id), "ok")
    _run(ctx, go)


@stmt.command("render")
@click.argument("stmt_id")
@click.option("--template", default=None)
@click.pass_context
def stmt_render(ctx, stmt_id, template):
    def go():
        text = _open_kb(ctx).render_label(stmt_id, template)
        _out(ctx, {"text": text}, text)
    _run(ctx, go)


@stmt.command("mindmap")
@click.argument("stmt_id")
@click.option("--pattern", required=True)
@click.pass_context
def stmt_mindmap(ctx, stmt_id, pattern):
    def go():
        _out(ctx, _open_kb(ctx).render_mindmap(stmt_id, pattern))
    _run(ctx, go)


@stmt.command("to-light")
@click.argument("stmt_id")
@click.pass_context
def stmt_to_light(ctx, stmt_id):
    def go():
        _out(ctx, _open_kb(ctx).full_to_light(stmt_id))
    _run(ctx, go)


@stmt.command("reconstruct")
@click.argument("stmt_id")
@click.option("--include-deleted", is_flag=True)
@click.pass_context
def stmt_reconstruct(ctx, stmt_id, include_deleted):
    def go():
        _out(ctx, _open_kb(ctx).store.reconstruct_input(stmt_id, include_deleted))
    _run(ctx, go)


# -- crosswalk --------------------------------------------------------------

@main.group()
def crosswalk():
    """Define crosswalks; export, import, and transit-convert statements."""


@crosswalk.command("define")
@click.argument("definition_file")
@click.pass_context
def crosswalk_define(ctx, definition_file):
    def go():
        defined = _open_kb(ctx).define_crosswalk(_load_doc(definition_file))
        _out(ctx, defined.to_doc(), defined.id)
    _run(ctx, go)


@crosswalk.command("export")
@click.argument("crosswalk_id")
@click.argument("stmt_id")
@click.pass_context
def crosswalk_export(ctx, crosswalk_id, stmt_id):
    def go():
        document = _open_kb(ctx).export_statement(stmt_id, crosswalk_id)
        if isinstance(document, str):
            click.echo(document, nl=False)
        else:
            click.echo(json.dumps(document, indent=2, sort_keys=True))
    _run(ctx, go)


@crosswalk.command("import")
@click.argument("crosswalk_id")
@click.argument("document_file")
@click.option("--creator", default="cli")
@click.pass_context
def crosswalk_import(ctx, crosswalk_id, document_file, creator):
    def go():
        kb = _open_kb(ctx)
        path = Path(document_file)
        if path.suffix == ".csv":
            document = path.read_text(encoding="utf-8")
        else:
            document = _load_doc(document_file)
        upri = kb.import_statement(document, crosswalk_id, creator)
        _out(ctx, kb.statement_doc(upri), upri)
    _run(ctx, go)


@crosswalk.command("counts")
@click.argument("n", type=int)
@click.pass_context
def crosswalk_counts_cmd(ctx, n):
    def go():
        counts = _open_kb(ctx).crosswalk_counts(n)
        _out(ctx, counts, f"pairwise={counts['pairwise']} hub={counts['hub']}")
    _run(ctx, go)


# -- query ------------------------------------------------------------------

@main.group()
def query():
    """Evaluate question documents."""


@query.command("run")
@click.argument("question_file")
@click.pass_context
def query_run(ctx, question_file):
    def go():
        answer = _open_kb(ctx).evaluate(_load_doc(question_file))
        _out(ctx, answer, json.dumps(answer))
    _run(ctx, go)


@query.command("plan")
@click.argument("question_file")
@click.pass_context
def query_plan(ctx, question_file):
    def go():
        click.echo(_open_kb(ctx).explain_plan(_load_doc(question_file)))
    _run(ctx, go)


@query.command("store")
@click.argument("question_file")
@click.option("--creator", default="cli")
@click.pass_context
def query_store(ctx, question_file, creator):
    def go():
        kb = _open_kb(ctx)
        question = kb.build_question(_load_doc(question_file))
        upri = kb.store_question(question, creator)
        _out(ctx, {"upri": upri}, upri)
    _run(ctx, go)


# -- template ---------------------------------------------------------------

@main.group()
def template():
    """Register display templates."""


@template.command("add")
@click.argument("template_file")
@click.pass_context
def template_add(ctx, template_file):
    def go():
        template_id = _open_kb(ctx).register_template(_load_doc(template_file))
        _out(ctx, {"id": template_id}, template_id)
    _run(ctx, go)


# -- serve ------------------------------------------------------------------

@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8750)
@click.pass_context
def serve_cmd(ctx, host, port):
    """Run the HTTP service."""
    from .service import serve

    def go():
        data_dir = ctx.obj["data_dir"]
        serve(KbConfig(data_dir=Path(data_dir) if data_dir else None),
              host=host, port=port)
    _run(ctx, go)


if __name__ == "__main__":
    main()
