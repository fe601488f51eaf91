import random
import re
from decimal import Decimal
from itertools import product

import pytest

from rosetta_kb import Binding, CompositeQuestion, JoinLink, QuestionStatement, Value
from rosetta_kb.errors import IncompatibleBinding, IncompatibleJoin


# ---------------------------------------------------------------------------
# Brute-force oracle: a from-scratch linear filter over the whole store,
# sharing no code with the query engine.
# ---------------------------------------------------------------------------

def _oracle_value_matches(kb, binding, value, record):
    if binding.kind == "unbound":
        return True
    if binding.kind == "exact":
        want = binding.value
        if want.is_resource != value.is_resource:
            return False
        if want.is_resource:
            return want.resource.upri == value.resource.upri
        if want.literal.datatype != value.literal.datatype:
            return False
        if want.literal.datatype in ("decimal", "integer"):
            return Decimal(want.literal.lexical) == Decimal(value.literal.lexical)
        return want.literal.lexical == value.literal.lexical
    if binding.kind == "literal-filter":
        if value.is_resource or value.literal.datatype != binding.datatype:
            return False
        lex = value.literal.lexical
        if binding.pattern and not re.fullmatch(binding.pattern, lex):
            return False
        if binding.datatype in ("decimal", "integer"):
            num = Decimal(lex)
            if binding.minimum is not None and num < Decimal(binding.minimum):
                return False
            if binding.maximum is not None and num > Decimal(binding.maximum):
                return False
        return True
    if not value.is_resource:
        return False
    upri = value.resource.upri
    if binding.kind == "some-instance":
        return kb.terms.instantiates(upri, binding.class_upri)
    if binding.kind == "every-instance":
        return (record.effective_truth_tag == "universal"
                and upri == binding.class_upri)
    if binding.kind == "class":
        return (value.resource.kind == "class-term"
                and upri == binding.class_upri)
    raise AssertionError(binding.kind)


def _oracle_subject_matches(kb, binding, record):
    subject = record.subject.resource
    if subject is None:
        return False
    if binding.kind == "unbound":
        return True
    if binding.kind == "exact":
        return subject.upri == binding.value.resource.upri
    if binding.kind == "some-instance":
        if kb.terms.instantiates(subject.upri, binding.class_upri):
            return True
        return (subject.kind == "some-instance" and subject.upri in kb.terms
                and kb.terms.is_subclass_of(subject.upri, binding.class_upri))
    if binding.kind == "every-instance":
        return (record.effective_truth_tag == "universal"
                and subject.upri == binding.class_upri)
    if binding.kind == "class":
        if subject.kind == "class-term":
            return subject.upri == binding.class_upri
        return binding.class_upri in kb.terms.direct_classes(subject.upri)
    raise AssertionError(binding.kind)


def oracle_leaf(kb, question):
    out = []
    for record in kb.store.all_statements():
        if record.statement_class != question.schema:
            continue
        if "question" in record.tags:
            continue
        if ("negation" in record.tags) != question.negated:
            continue
        if not _oracle_subject_matches(kb, question.subject_binding, record):
            continue
        _, bindings = kb.store.current_view(record.upri)
        ok = True
        for label, binding in question.position_bindings.items():
            value = bindings.get(label)
            if value is None:
                if binding.kind != "unbound":
                    ok = False
                    break
                continue
            if not _oracle_value_matches(kb, binding, value, record):
                ok = False
                break
        if ok:
            out.append(record.upri)
    return sorted(out)


def _oracle_slot_key(kb, statement, slot):
    record = kb.store.get(statement)
    if slot == "subject":
        value = record.subject
    else:
        _, bindings = kb.store.current_view(statement)
        value = bindings.get(slot)
        if value is None:
            return None
    if value.is_resource:
        return ("res", value.resource.upri)
    lex = value.literal.lexical
    if value.literal.datatype in ("decimal", "integer"):
        lex = str(Decimal(lex))
    return ("lit", value.literal.datatype, lex)


def oracle_evaluate(kb, question):
    if isinstance(question, QuestionStatement):
        return [(u,) for u in oracle_leaf(kb, question)]
    child_results = [oracle_evaluate(kb, child) for child in question.children]
    if question.op == "or":
        merged = set()
        for tuples in child_results:
            merged.update(tuples)
        return sorted(merged)
    offsets, width = [], 0
    for tuples in child_results:
        offsets.append(width)
        width += len(tuples[0]) if tuples else 1
    out = set()
    for combo in product(*child_results):
        row = tuple(x for t in combo for x in t)
        if all(
            (k := _oracle_slot_key(kb, row[offsets[j.left_child]], j.left_slot))
            is not None
            and k == _oracle_slot_key(kb, row[offsets[j.right_child]],
                                      j.right_slot)
            for j in question.joins
        ):
            out.add(row)
    return sorted(out)


# ---------------------------------------------------------------------------
# Directed behaviour tests
# ---------------------------------------------------------------------------

class TestBindingCompatibility:
    def test_literal_filter_on_resource_slot_rejected(self, kb, weight_schema):
        with pytest.raises(IncompatibleBinding):
            kb.build_question({
                "schema": weight_schema.statement_class,
                "subject": {"kind": "unbound"},
                "positions": {"UNIT": {"kind": "literal-filter",
                                       "datatype": "decimal"}}})

    def test_class_binding_must_be_subclass(self, kb, taxonomy, weight_schema):
        with pytest.raises(IncompatibleBinding):
            kb.build_question({
                "schema": weight_schema.statement_class,
                "subject": {"kind": "some-instance",
                            "class": taxonomy["person"]}})

    def test_datatype_mismatch_rejected(self, kb, weight_schema):
        with pytest.raises(IncompatibleBinding):
            kb.build_question({
                "schema": weight_schema.statement_class,
                "subject": {"kind": "unbound"},
                "positions": {"VALUE": {"kind": "exact", "value": {
                    "literal": {"lexical": "x", "datatype": "text"}}}}})

    def test_unknown_position_rejected(self, kb, weight_schema):
        with pytest.raises(IncompatibleBinding):
            kb.build_question({
                "schema": weight_schema.statement_class,
                "subject": {"kind": "unbound"},
                "positions": {"NOPE": {"kind": "unbound"}}})


class TestEvaluation:
    def test_fully_specified_is_boolean(self, kb, taxonomy, apple_statement,
                                        weight_schema):
        question = {
            "schema": weight_schema.statement_class,
            "subject": {"kind": "exact", "value": {
                "resource": {"upri": taxonomy["apple"],
                             "kind": "named-individual"}}},
            "positions": {
                "VALUE": {"kind": "exact", "value": {
                    "literal": {"lexical": "212.45", "datatype": "decimal"}}},
                "UNIT": {"kind": "exact", "value": {
                    "resource": {"upri": taxonomy["gram"],
                                 "kind": "named-individual"}}},
            }}
        assert kb.evaluate(question) == {"kind": "boolean", "value": True}
        question["positions"]["VALUE"]["value"]["literal"]["lexical"] = "999"
        assert kb.evaluate(question) == {"kind": "boolean", "value": False}

    def test_placeholder_returns_statement_list(self, kb, taxonomy,
                                                apple_statement, weight_schema):
        answer = kb.evaluate({
            "schema": weight_schema.statement_class,
            "subject": {"kind": "some-instance",
                        "class": taxonomy["apple_class"]}})
        assert answer == {"kind": "statements", "value": [apple_statement]}

    def test_range_filter(self, kb, taxonomy, apple_statement, weight_schema):
        def ask(lo, hi):
            return kb.evaluate({
                "schema": weight_schema.statement_class,
                "subject": {"kind": "unbound"},
                "positions": {"VALUE": {
                    "kind": "literal-filter", "datatype": "decimal",
                    "range": {"min": lo, "max": hi}}}})["value"]
        assert ask("200", "220") == [apple_statement]
        assert ask("300", None) == []

    def test_every_instance_needs_universal_tag(self, kb, taxonomy,
                                                weight_schema):
        sc = weight_schema.statement_class
        universal = kb.create_statement(
            sc, Value.of_resource(taxonomy["apple_class"], "class-term"),
            {"VALUE": Value.of_literal("150", "decimal"),
             "UNIT": Value.of_resource(taxonomy["gram"])},
            classification=["universal"])
        kb.create_statement(
            sc, Value.of_resource(taxonomy["apple"]),
            {"VALUE": Value.of_literal("150", "decimal"),
             "UNIT": Value.of_resource(taxonomy["gram"])})
        answer = kb.evaluate({
            "schema": sc,
            "subject": {"kind": "every-instance",
                        "class": taxonomy["apple_class"]}})
        assert answer["value"] == [universal]

    def test_negated_statements_need_negated_question(self, kb, taxonomy,
                                                      weight_schema):
        sc = weight_schema.statement_class
        negated = kb.create_statement(
            sc, Value.of_resource(taxonomy["apple"]),
            {"VALUE": Value.of_literal("1", "decimal"),
             "UNIT": Value.of_resource(taxonomy["gram"])},
            classification=["negation"])
        plain = {"schema": sc, "subject": {"kind": "unbound"}}
        assert kb.evaluate(plain)["value"] == []
        assert kb.evaluate(dict(plain, negated=True))["value"] == [negated]

    def test_stored_questions_never_match(self, kb, taxonomy, apple_statement,
                                          weight_schema):
        question = kb.build_question({
            "schema": weight_schema.statement_class,
            "subject": {"kind": "some-instance",
                        "class": taxonomy["apple_class"]}})
        kb.store_question(question)
        answer = kb.evaluate({"schema": weight_schema.statement_class,
                              "subject": {"kind": "unbound"}})
        assert answer["value"] == [apple_statement]

    def test_explain_plan_mentions_index_or_scan(self, kb, taxonomy,
                                                 weight_schema):
        exact = kb.explain_plan({
            "schema": weight_schema.statement_class,
            "subject": {"kind": "exact", "value": {
                "resource": {"upri": taxonomy["apple"],
                             "kind": "named-individual"}}}})
        assert "index lookup" in exact
        scan = kb.explain_plan({"schema": weight_schema.statement_class,
                                "subject": {"kind": "unbound"}})
        assert "class scan" in scan


class TestComposites:
    @pytest.fixture
    def travel_world(self, kb, taxonomy, travel_schema):
        sc = travel_schema.statement_class
        bob = kb.register_term("Bob", "named-individual",
                               parents=[taxonomy["person"]], vocabulary="local")
        s1 = kb.create_statement(
            sc, Value.of_resource(taxonomy["anna"]),
            {"DESTINATION_LOCATION": Value.of_resource(taxonomy["paris"]),
             "TRANSPORTATION": Value.of_resource(taxonomy["train"])})
        s2 = kb.create_statement(
            sc, Value.of_resource(bob),
            {"DESTINATION_LOCATION": Value.of_resource(taxonomy["paris"])})
        s3 = kb.create_statement(
            sc, Value.of_resource(bob),
            {"DESTINATION_LOCATION": Value.of_resource(taxonomy["berlin"])})
        return {"sc": sc, "bob": bob, "s1": s1, "s2": s2, "s3": s3}

    def _leaf(self, kb, sc, **positions):
        return {"schema": sc, "subject": {"kind": "unbound"},
                "positions": positions}

    def test_and_with_join_on_destination(self, kb, taxonomy, travel_world):
        sc = travel_world["sc"]
        doc = {"composite": {
            "op": "and",
            "children": [self._leaf(kb, sc), self._leaf(kb, sc)],
            "joins": [{"left": {"child": 0, "slot": "DESTINATION_LOCATION"},
                       "right": {"child": 1, "slot": "DESTINATION_LOCATION"}}],
        }}
        answer = kb.evaluate(doc)
        assert answer["kind"] == "tuples"
        pairs = {tuple(t) for t in answer["value"]}
        s1, s2, s3 = (travel_world[k] for k in ("s1", "s2", "s3"))
        assert pairs == {(s1, s1), (s1, s2), (s2, s1), (s2, s2), (s3, s3)}

    def test_or_union(self, kb, taxonomy, travel_world):
        sc = travel_world["sc"]
        doc = {"composite": {"op": "or", "children": [
            self._leaf(kb, sc, DESTINATION_LOCATION={
                "kind": "exact", "value": {"resource": {
                    "upri": taxonomy["paris"], "kind": "named-individual"}}}),
            self._leaf(kb, sc, DESTINATION_LOCATION={
                "kind": "exact", "value": {"resource": {
                    "upri": taxonomy["berlin"], "kind": "named-individual"}}}),
        ]}}
        answer = kb.evaluate(doc)
        assert {t[0] for t in answer["value"]} == {
            travel_world["s1"], travel_world["s2"], travel_world["s3"]}

    def test_join_on_literal_slot_rejected(self, kb, travel_world):
        sc = travel_world["sc"]
        doc = {"composite": {
            "op": "and",
            "children": [self._leaf(kb, sc), self._leaf(kb, sc)],
            "joins": [{"left": {"child": 0, "slot": "DATETIME"},
                       "right": {"child": 1, "slot": "DATETIME"}}],
        }}
        with pytest.raises(IncompatibleJoin):
            kb.evaluate(doc)

    def test_join_on_unrelated_classes_rejected(self, kb, taxonomy,
                                                travel_world):
        sc = travel_world["sc"]
        doc = {"composite": {
            "op": "and",
            "children": [self._leaf(kb, sc), self._leaf(kb, sc)],
            "joins": [{"left": {"child": 0, "slot": "subject"},
                       "right": {"child": 1, "slot": "DESTINATION_LOCATION"}}],
        }}
        with pytest.raises(IncompatibleJoin):
            kb.evaluate(doc)


# ---------------------------------------------------------------------------
# Randomized oracle equivalence
# ---------------------------------------------------------------------------

def test_oracle_equivalence_randomized(kb, taxonomy, weight_schema,
                                       travel_schema):
    """100 random questions (20 composite) against the brute-force oracle."""
    rng = random.Random(4242)
    wsc = weight_schema.statement_class
    tsc = travel_schema.statement_class
    units = [taxonomy["gram"], taxonomy["kilogram"]]
    apples = [taxonomy["apple"]]
    for i in range(3):
        apples.append(kb.register_term(
            f"apple {i}", "named-individual",
            parents=[taxonomy["apple_class"]], vocabulary="local"))
    people = [taxonomy["anna"]]
    for i in range(3):
        people.append(kb.register_term(
            f"person {i}", "named-individual",
            parents=[taxonomy["person"]], vocabulary="local"))
    places = [taxonomy["paris"], taxonomy["berlin"]]

    statements = []
    for i in range(150):
        tags = []
        if rng.random() < 0.1:
            tags.append("negation")
        if rng.random() < 0.1:
            tags.append("universal")
        if rng.random() < 0.5:
            subject = (Value.of_resource(taxonomy["apple_class"], "class-term")
                       if "universal" in tags
                       else Value.of_resource(rng.choice(apples)))
            stmt = kb.create_statement(
                wsc, subject,
                {"VALUE": Value.of_literal(f"{rng.randint(0, 500)}.5",
                                           "decimal"),
                 "UNIT": Value.of_resource(rng.choice(units))},
                classification=tags)
        else:
            subject = (Value.of_resource(taxonomy["person"], "class-term")
                       if "universal" in tags
                       else Value.of_resource(rng.choice(people)))
            bindings = {"DESTINATION_LOCATION":
                        Value.of_resource(rng.choice(places))}
            if rng.random() < 0.5:
                bindings["TRANSPORTATION"] = Value.of_resource(taxonomy["train"])
            if rng.random() < 0.3:
                bindings["DATETIME"] = Value.of_literal(
                    f"2023-04-{rng.randint(10, 28)}", "date")
            stmt = kb.create_statement(tsc, subject, bindings,
                                       classification=tags)
        statements.append(stmt)
    # a few deletions so non-current statements exist
    for stmt in rng.sample(statements, 10):
        kb.soft_delete(stmt)

    def random_weight_leaf():
        subject = rng.choice([
            Binding.unbound(),
            Binding.exact(Value.of_resource(rng.choice(apples))),
            Binding.some_instance_of(taxonomy["apple_class"]),
            Binding.every_instance_of(taxonomy["apple_class"]),
            Binding.of_class(taxonomy["apple_class"]),
        ])
        positions = {}
        roll = rng.random()
        if roll < 0.4:
            lo = rng.randint(0, 300)
            positions["VALUE"] = Binding.literal_filter(
                "decimal", minimum=str(lo), maximum=str(lo + 150))
        elif roll < 0.6:
            positions["VALUE"] = Binding.exact(
                Value.of_literal(f"{rng.randint(0, 500)}.5", "decimal"))
        if rng.random() < 0.4:
            positions["UNIT"] = rng.choice([
                Binding.exact(Value.of_resource(rng.choice(units))),
                Binding.some_instance_of(taxonomy["unit_of_mass"]),
            ])
        return kb.build_question(QuestionStatement(
            wsc, subject, positions, negated=rng.random() < 0.15))

    def random_travel_leaf():
        subject = rng.choice([
            Binding.unbound(),
            Binding.exact(Value.of_resource(rng.choice(people))),
            Binding.some_instance_of(taxonomy["person"]),
        ])
        positions = {}
        if rng.random() < 0.5:
            positions["DESTINATION_LOCATION"] = rng.choice([
                Binding.exact(Value.of_resource(rng.choice(places))),
                Binding.some_instance_of(taxonomy["location"]),
            ])
        if rng.random() < 0.3:
            positions["DATETIME"] = Binding.unbound()
        return kb.build_question(QuestionStatement(
            tsc, subject, positions, negated=rng.random() < 0.15))

    def random_leaf():
        return random_weight_leaf() if rng.random() < 0.5 \
            else random_travel_leaf()

    checked_composites = 0
    for i in range(100):
        if i < 20:
            checked_composites += 1
            op = rng.choice(["and", "or"])
            if op == "or":
                question = CompositeQuestion("or", [random_leaf(),
                                                    random_leaf()])
            else:
                children = [random_travel_leaf(), random_travel_leaf()]
                joins = []
                if rng.random() < 0.7:
                    slot = rng.choice(["subject", "DESTINATION_LOCATION"])
                    joins = [JoinLink(0, slot, 1, slot)]
                question = CompositeQuestion("and", children, joins)
            got = kb.queries.evaluate_composite(question)
            assert sorted(got) == oracle_evaluate(kb, question)
        else:
            question = random_leaf()
            got = kb.queries.evaluate(question)
            expected = oracle_leaf(kb, question)
            if isinstance(got, bool):
                assert got == (len(expected) > 0)
            else:
                assert got == expected
    assert checked_composites == 20
