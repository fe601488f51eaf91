"""Shared fixtures: a small taxonomy, the weight and travel schemata, and the
foreign-format crosswalks used throughout the suite."""

import pytest

from rosetta_kb import KnowledgeBase, Value


@pytest.fixture
def kb():
    return KnowledgeBase()


@pytest.fixture
def taxonomy(kb):
    """Class hierarchy plus the individuals the example statements mention."""
    t = {}
    t["material_object"] = kb.register_term(
        "material object", "class-term", vocabulary="wikidata",
        upri="wikidata:Q223557")
    t["apple_class"] = kb.register_term(
        "apple", "class-term", parents=[t["material_object"]],
        vocabulary="wikidata", upri="wikidata:Q89")
    t["unit_of_mass"] = kb.register_term(
        "unit of mass", "class-term", vocabulary="wikidata",
        upri="wikidata:Q3647172")
    t["gram"] = kb.register_term(
        "gram", "named-individual", parents=[t["unit_of_mass"]],
        vocabulary="wikidata", upri="wikidata:Q41803")
    t["kilogram"] = kb.register_term(
        "kilogram", "named-individual", parents=[t["unit_of_mass"]],
        vocabulary="wikidata", upri="wikidata:Q11570")
    t["weight"] = kb.register_term(
        "weight", "class-term", vocabulary="wikidata", upri="wikidata:Q25288")
    # the statement subject: an individual apple labeled just "apple"
    t["apple"] = kb.register_term(
        "apple", "named-individual", parents=[t["apple_class"]],
        vocabulary="local", upri="local:apple-1")
    # travel world
    t["person"] = kb.register_term(
        "person", "class-term", vocabulary="wikidata", upri="wikidata:Q215627")
    t["location"] = kb.register_term(
        "location", "class-term", vocabulary="wikidata", upri="wikidata:Q17334923")
    t["transportation"] = kb.register_term(
        "means of transport", "class-term", vocabulary="wikidata",
        upri="wikidata:Q334166")
    t["anna"] = kb.register_term(
        "Anna", "named-individual", parents=[t["person"]], vocabulary="local")
    t["train"] = kb.register_term(
        "train", "named-individual", parents=[t["transportation"]],
        vocabulary="wikidata", upri="wikidata:Q870")
    t["berlin"] = kb.register_term(
        "Berlin", "named-individual", parents=[t["location"]],
        vocabulary="wikidata", upri="wikidata:Q64")
    t["paris"] = kb.register_term(
        "Paris", "named-individual", parents=[t["location"]],
        vocabulary="wikidata", upri="wikidata:Q90")
    # foreign unit vocabularies hanging off the hub
    t["gram_uo"] = kb.register_term(
        "gram", "named-individual", vocabulary="uo", upri="uo:0000021")
    t["gram_qudt"] = kb.register_term(
        "gram", "named-individual", vocabulary="qudt", upri="qudt:GM")
    kb.add_mapping(t["gram_uo"], t["gram"], "same-as")
    kb.add_mapping(t["gram_qudt"], t["gram"], "same-as")
    return t


WEIGHT_ANSWERS = {
    "examples": ["This apple has a weight of 212.45 gram"],
    "predicate": "has_weight",
    "description": "the weight of a material object",
    "position_count": 2,
    "labels": ["OBJECT", "VALUE", "UNIT"],
    "required": [True, True],
    "position_descriptions": ["the measured numeric weight",
                              "the unit of the measurement"],
    "constraints": [
        {"kind": "resource", "class": "wikidata:Q223557"},
        {"kind": "literal", "datatype": "decimal"},
        {"kind": "resource", "class": "wikidata:Q3647172"},
    ],
    "logical": [[], []],
    "dynamic_label": "This ${OBJECT} has a weight of ${VALUE} ${UNIT}",
}

TRAVEL_ANSWERS = {
    "examples": ["Anna travels by train from Berlin to Paris on the 2023-04-21"],
    "predicate": "travels",
    "description": "a person travelling to a destination",
    "position_count": 4,
    "labels": ["PERSON", "DESTINATION_LOCATION", "DEPARTURE_LOCATION",
               "TRANSPORTATION", "DATETIME"],
    "required": [True, False, False, False],
    "position_descriptions": ["where the journey ends",
                              "where the journey starts",
                              "the vehicle used", "the travel date"],
    "constraints": [
        {"kind": "resource", "class": "wikidata:Q215627"},
        {"kind": "resource", "class": "wikidata:Q17334923"},
        {"kind": "resource", "class": "wikidata:Q17334923"},
        {"kind": "resource", "class": "wikidata:Q334166"},
        {"kind": "literal", "datatype": "date"},
    ],
    "logical": [[], [], [], []],
    "dynamic_label": "${PERSON} travels by ${TRANSPORTATION} from "
                     "${DEPARTURE_LOCATION} to ${DESTINATION_LOCATION} "
                     "on the ${DATETIME}",
}

HAS_PART_ANSWERS = {
    "examples": ["This tree has part an apple"],
    "predicate": "has_part",
    "description": "a material object having another as part",
    "position_count": 1,
    "labels": ["WHOLE", "PART"],
    "required": [True],
    "position_descriptions": ["the material part"],
    "constraints": [
        {"kind": "resource", "class": "wikidata:Q223557"},
        {"kind": "resource", "class": "wikidata:Q223557"},
    ],
    "logical": [["transitive"]],
    "dynamic_label": "${WHOLE} has part ${PART}",
}


@pytest.fixture
def weight_schema(kb, taxonomy):
    return kb.create_schema_from_wizard(WEIGHT_ANSWERS, "full")


@pytest.fixture
def travel_schema(kb, taxonomy):
    return kb.create_schema_from_wizard(TRAVEL_ANSWERS, "full")


@pytest.fixture
def apple_statement(kb, taxonomy, weight_schema):
    return kb.create_statement(
        weight_schema.statement_class,
        Value.of_resource(taxonomy["apple"]),
        {"VALUE": Value.of_literal("212.45", "decimal"),
         "UNIT": Value.of_resource(taxonomy["gram"])},
        creator="fixture")


@pytest.fixture
def travel_statement(kb, taxonomy, travel_schema):
    return kb.create_statement(
        travel_schema.statement_class,
        Value.of_resource(taxonomy["anna"]),
        {"DESTINATION_LOCATION": Value.of_resource(taxonomy["paris"]),
         "DEPARTURE_LOCATION": Value.of_resource(taxonomy["berlin"]),
         "TRANSPORTATION": Value.of_resource(taxonomy["train"]),
         "DATETIME": Value.of_literal("2023-04-21", "date")},
        creator="fixture")


def obi_crosswalk_doc(statement_class):
    """Measurement-datum style graph target: five statement-level edges."""
    return {
        "id": "cw:obi",
        "source_schema": statement_class,
        "target": {"name": "obi-weight", "kind": "graph-template",
                   "vocabulary": "uo"},
        "alignments": [
            {"source_slot": "subject", "target_path": "anchor:subject"},
            {"source_slot": "VALUE", "target_path": "anchor:VALUE"},
            {"source_slot": "UNIT", "target_path": "anchor:UNIT",
             "term_translate": True},
        ],
        "scaffold": {
            "nodes": [
                {"id": "anchor:subject", "label": "OBJECT"},
                {"id": "quality", "label": "weight quality"},
                {"id": "measurement-datum", "label": "scalar measurement datum"},
                {"id": "value-specification", "label": "value specification"},
                {"id": "anchor:VALUE", "label": "VALUE"},
                {"id": "anchor:UNIT", "label": "UNIT"},
            ],
            "edges": [
                {"from": "quality", "rel": "inheres-in", "to": "anchor:subject"},
                {"from": "measurement-datum", "rel": "is-quality-measurement-of",
                 "to": "quality"},
                {"from": "measurement-datum", "rel": "has-value-specification",
                 "to": "value-specification"},
                {"from": "value-specification", "rel": "has-specified-numeric-value",
                 "to": "anchor:VALUE"},
                {"from": "value-specification", "rel": "has-measurement-unit-label",
                 "to": "anchor:UNIT"},
            ],
        },
    }


def oboe_crosswalk_doc(statement_class):
    """Observation/measurement style graph target: six statement-level edges."""
    return {
        "id": "cw:oboe",
        "source_schema": statement_class,
        "target": {"name": "oboe-weight", "kind": "graph-template",
                   "vocabulary": "wikidata"},
        "alignments": [
            {"source_slot": "subject", "target_path": "anchor:subject"},
            {"source_slot": "VALUE", "target_path": "anchor:VALUE"},
            {"source_slot": "UNIT", "target_path": "anchor:UNIT"},
        ],
        "scaffold": {
            "nodes": [
                {"id": "observation", "label": "observation"},
                {"id": "anchor:subject", "label": "OBJECT"},
                {"id": "measurement", "label": "measurement"},
                {"id": "characteristic", "label": "weight characteristic"},
                {"id": "protocol", "label": "observation protocol"},
                {"id": "anchor:VALUE", "label": "VALUE"},
                {"id": "anchor:UNIT", "label": "UNIT"},
            ],
            "edges": [
                {"from": "observation", "rel": "of-entity", "to": "anchor:subject"},
                {"from": "observation", "rel": "has-measurement", "to": "measurement"},
                {"from": "observation", "rel": "uses-protocol", "to": "protocol"},
                {"from": "measurement", "rel": "of-characteristic",
                 "to": "characteristic"},
                {"from": "measurement", "rel": "has-value", "to": "anchor:VALUE"},
                {"from": "measurement", "rel": "uses-standard", "to": "anchor:UNIT"},
            ],
        },
    }


def qudt_crosswalk_doc(statement_class):
    """Quantity-value style tree target with unit translation."""
    return {
        "id": "cw:qudt",
        "source_schema": statement_class,
        "target": {"name": "qudt-weight", "kind": "tree", "vocabulary": "qudt"},
        "alignments": [
            {"source_slot": "subject", "target_path": "quantity.of"},
            {"source_slot": "VALUE", "target_path": "quantity.value.numericValue"},
            {"source_slot": "UNIT", "target_path": "quantity.value.unit",
             "term_translate": True},
        ],
        "scaffold": {"template": {"quantity": {"kind": "Weight"}}},
    }


def csv_crosswalk_doc(statement_class):
    return {
        "id": "cw:csv",
        "source_schema": statement_class,
        "target": {"name": "weights.csv", "kind": "tabular",
                   "vocabulary": "wikidata"},
        "alignments": [
            {"source_slot": "subject", "target_path": "OBJECT"},
            {"source_slot": "VALUE", "target_path": "VALUE"},
            {"source_slot": "UNIT", "target_path": "UNIT"},
        ],
        "scaffold": {"headers": ["OBJECT", "QUALITY", "VALUE", "UNIT"],
                     "constants": {"QUALITY": "weight"}},
    }


@pytest.fixture
def weight_crosswalks(kb, weight_schema):
    sc = weight_schema.statement_class
    return {
        "obi": kb.define_crosswalk(obi_crosswalk_doc(sc)).id,
        "oboe": kb.define_crosswalk(oboe_crosswalk_doc(sc)).id,
        "qudt": kb.define_crosswalk(qudt_crosswalk_doc(sc)).id,
        "csv": kb.define_crosswalk(csv_crosswalk_doc(sc)).id,
    }
