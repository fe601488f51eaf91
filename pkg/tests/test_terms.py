import itertools
import random

import pytest

from rosetta_kb.errors import (
    CycleDetected,
    DuplicateMapping,
    HubViolation,
    NoMapping,
    UnknownParent,
    UnknownTerm,
)
from rosetta_kb.terms import TermRegistry


@pytest.fixture
def registry():
    return TermRegistry("wikidata")


def test_register_and_get(registry):
    registry.register("w:1", "thing", "class-term", vocabulary="wikidata")
    term = registry.get("w:1")
    assert term.label == "thing"
    assert term.is_reference_term  # reference vocabulary implies reference term


def test_unknown_parent_rejected(registry):
    with pytest.raises(UnknownParent):
        registry.register("l:1", "x", "class-term", parents=["nope"])


def test_individual_cannot_be_parent(registry):
    registry.register("w:c", "c", "class-term", vocabulary="wikidata")
    registry.register("l:i", "i", "named-individual", parents=["w:c"])
    with pytest.raises(UnknownParent):
        registry.register("l:j", "j", "class-term", parents=["l:i"])


def test_self_cycle_rejected(registry):
    with pytest.raises(CycleDetected):
        registry.register("l:1", "x", "class-term", parents=["l:1"])


def test_cycle_registration_rolls_back(registry):
    registry.register("a", "a", "class-term")
    with pytest.raises(UnknownParent):
        # b's parent c does not exist yet, so no cycle can even form
        registry.register("b", "b", "class-term", parents=["c"])
    assert "b" not in registry


def test_subclass_oracle_against_transitive_closure(registry):
    """Compare reachability with an independently computed closure."""
    rng = random.Random(7)
    names = [f"c{i}" for i in range(30)]
    parents = {}
    for i, name in enumerate(names):
        pool = names[:i]
        chosen = rng.sample(pool, k=min(len(pool), rng.randint(0, 2)))
        registry.register(name, name, "class-term", parents=chosen)
        parents[name] = chosen

    closure = {n: {n} for n in names}
    for name in names:  # parents precede children, so one pass suffices
        for p in parents[name]:
            closure[name] |= closure[p]

    for a, b in itertools.product(names, names):
        assert registry.is_subclass_of(a, b) == (b in closure[a])


def test_instantiates(registry):
    registry.register("w:animal", "animal", "class-term", vocabulary="wikidata")
    registry.register("w:dog", "dog", "class-term", parents=["w:animal"],
                      vocabulary="wikidata")
    registry.register("l:rex", "Rex", "named-individual", parents=["w:dog"])
    assert registry.instantiates("l:rex", "w:dog")
    assert registry.instantiates("l:rex", "w:animal")  # subclass-closed
    assert registry.instantiates("w:dog", "w:animal")  # class counts as instance
    assert not registry.instantiates("w:animal", "w:dog")
    assert not registry.instantiates("missing", "w:dog")


class TestMappingHub:
    def _hub(self, registry, vocabularies):
        registry.register("ref:t", "t", "class-term", vocabulary="wikidata")
        for voc in vocabularies:
            registry.register(f"{voc}:t", "t", "class-term", vocabulary=voc)
            registry.add_mapping(f"{voc}:t", "ref:t", "same-as")

    def test_mapping_must_touch_reference_term(self, registry):
        registry.register("a:t", "t", "class-term", vocabulary="a")
        registry.register("b:t", "t", "class-term", vocabulary="b")
        with pytest.raises(HubViolation):
            registry.add_mapping("a:t", "b:t", "same-as")

    def test_duplicate_rejected_both_directions(self, registry):
        self._hub(registry, ["a"])
        with pytest.raises(DuplicateMapping):
            registry.add_mapping("a:t", "ref:t", "equivalent-class")
        with pytest.raises(DuplicateMapping):
            registry.add_mapping("ref:t", "a:t", "same-as")

    def test_resolve_identity(self, registry):
        self._hub(registry, ["a"])
        assert registry.resolve("a:t", "a") == "a:t"

    def test_resolve_one_hop(self, registry):
        self._hub(registry, ["a"])
        assert registry.resolve("a:t", "wikidata") == "ref:t"

    def test_resolve_two_hops_through_hub(self, registry):
        self._hub(registry, ["a", "b"])
        assert registry.resolve("a:t", "b") == "b:t"
        assert registry.resolve("b:t", "a") == "a:t"

    def test_no_mapping(self, registry):
        self._hub(registry, ["a"])
        with pytest.raises(NoMapping):
            registry.resolve("a:t", "zz")

    def test_same_as_satisfies_equivalent_class_not_vice_versa(self, registry):
        registry.register("ref:t", "t", "class-term", vocabulary="wikidata")
        registry.register("a:t", "t", "class-term", vocabulary="a")
        registry.add_mapping("a:t", "ref:t", "equivalent-class")
        assert registry.resolve("a:t", "wikidata", "equivalent-class") == "ref:t"
        with pytest.raises(NoMapping):
            registry.resolve("a:t", "wikidata", "same-as")

    def test_resolve_matches_bounded_path_oracle(self, registry):
        """Resolution agrees with brute-force enumeration of <=2-hop paths."""
        self._hub(registry, ["a", "b", "c"])
        edges = [(m.source, m.target) for m in registry.all_mappings()]
        adjacency = {}
        for s, t in edges:
            adjacency.setdefault(s, set()).add(t)
            adjacency.setdefault(t, set()).add(s)
        terms = [t.upri for t in registry.all_terms()]
        for term in terms:
            for target_voc in ("wikidata", "a", "b", "c", "zz"):
                reachable = set()
                if registry.get(term).vocabulary == target_voc:
                    reachable.add(term)
                for n1 in adjacency.get(term, ()):
                    if registry.get(n1).vocabulary == target_voc:
                        reachable.add(n1)
                    for n2 in adjacency.get(n1, ()):
                        if n2 != term and registry.get(n2).vocabulary == target_voc:
                            reachable.add(n2)
                if reachable:
                    assert registry.resolve(term, target_voc) in reachable
                else:
                    with pytest.raises(NoMapping):
                        registry.resolve(term, target_voc)

    def test_hub_needs_n_mappings_for_n_vocabularies(self, registry):
        """Eight vocabularies resolve pairwise with only eight mappings."""
        vocabularies = [f"v{i}" for i in range(8)]
        self._hub(registry, vocabularies)
        assert len(registry.all_mappings()) == 8
        for a, b in itertools.permutations(vocabularies, 2):
            assert registry.resolve(f"{a}:t", b) == f"{b}:t"


def test_find_by_label(registry):
    registry.register("w:g", "gram", "named-individual", vocabulary="wikidata")
    assert registry.find_by_label("wikidata", "gram") == "w:g"
    with pytest.raises(UnknownTerm):
        registry.find_by_label("uo", "gram")
    assert registry.find_all_by_label("gram") == ["w:g"]


def test_doc_roundtrip(registry):
    registry.register("w:a", "a", "class-term", vocabulary="wikidata")
    registry.register("l:b", "b", "named-individual", parents=["w:a"])
    registry.add_mapping("l:b", "w:a", "equivalent-class")
    doc = registry.to_doc()
    fresh = TermRegistry("wikidata")
    fresh.load_doc(doc)
    assert fresh.to_doc() == doc
