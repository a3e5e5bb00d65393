import random

import pytest

from cokb.hierarchy import (
    CycleIntroducedError,
    Hierarchy,
    HierarchyLink,
    LinkKind,
    NoAnchorError,
    Placement,
    UnknownObjectError,
    classify_statement,
)
from cokb.matcher import CompareKind, compare
from cokb.notation import parse_sentence

from oracles import bfs_related


def bare_hierarchy() -> Hierarchy:
    h = Hierarchy()
    for key in ("thing", "a", "b", "c"):
        h.add_object(key)
    return h


class TestAddTerm:
    def test_subtype_anchor(self):
        h = bare_hierarchy()
        h.add_term("u1#bird", [HierarchyLink(LinkKind.SUBTYPE, "u1#bird", "thing", "u1")])
        assert h.has("u1#bird")

    def test_no_anchor_rejected(self):
        h = bare_hierarchy()
        with pytest.raises(NoAnchorError):
            h.add_term("u1#bird", [])

    def test_non_anchoring_kind_rejected(self):
        h = bare_hierarchy()
        with pytest.raises(NoAnchorError):
            h.add_term("u1#bird", [HierarchyLink(LinkKind.ARGUMENT, "u1#bird", "thing", "u1")])

    def test_subprocess_only_for_process_types(self):
        h = bare_hierarchy()
        link = [HierarchyLink(LinkKind.SUBPROCESS, "u1#boarding", "thing", "u1")]
        with pytest.raises(NoAnchorError):
            h.add_term("u1#boarding", list(link))
        h.add_term("u1#boarding", list(link), is_process=True)
        assert h.has("u1#boarding")

    def test_cycle_rejected(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "a", "b", "u1"))
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "b", "c", "u1"))
        with pytest.raises(CycleIntroducedError):
            h.add_link(HierarchyLink(LinkKind.SUBTYPE, "c", "a", "u1"))

    def test_unknown_endpoint(self):
        h = bare_hierarchy()
        with pytest.raises(UnknownObjectError):
            h.add_link(HierarchyLink(LinkKind.SUBTYPE, "a", "ghost", "u1"))


class TestSpecializationsOf:
    def test_leaf_single_node(self):
        h = bare_hierarchy()
        tree = h.specializations_of("c")
        assert tree.label == "c" and tree.children == []

    def test_depth_one_returns_direct_only(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "a", "thing", "u1"))
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "b", "a", "u1"))
        tree = h.specializations_of("thing", max_depth=1)
        assert [c.label for c in tree.children] == ["a"]
        assert tree.children[0].children == []

    def test_each_object_once(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "a", "thing", "u1"))
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "b", "thing", "u1"))
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "c", "a", "u1"))
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "c", "b", "u1"))
        tree = h.specializations_of("thing")
        labels = []

        def collect(node):
            labels.append(node.label)
            for ch in node.children:
                collect(ch)

        collect(tree)
        assert sorted(labels) == ["a", "b", "c", "thing"]

    def test_unknown_root(self):
        with pytest.raises(UnknownObjectError):
            bare_hierarchy().specializations_of("ghost")

    def test_annotations_carry_kind_and_creator(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.INSTANCE, "a", "thing", "u2"))
        child = h.specializations_of("thing").children[0]
        assert child.link_kind == "instance"
        assert child.creator == "u2"


class TestExplicitlyRelated:
    def test_linked_pair(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.CORRECTIVE_GENERALIZATION, "a", "b", "u1"))
        assert h.explicitly_related("a", "b")
        assert h.explicitly_related("b", "a")

    def test_disjoint_components(self):
        h = bare_hierarchy()
        h.add_link(HierarchyLink(LinkKind.SUBTYPE, "a", "b", "u1"))
        assert not h.explicitly_related("a", "c")

    def test_unknown_object_raises(self):
        with pytest.raises(UnknownObjectError):
            bare_hierarchy().explicitly_related("a", "ghost")

    def test_random_graphs_match_bfs_oracle(self):
        rng = random.Random(3)
        for _ in range(20):
            h = Hierarchy()
            n = rng.randint(3, 10)
            keys = [f"o{i}" for i in range(n)]
            for k in keys:
                h.add_object(k)
            adjacency = {k: set() for k in keys}
            for _ in range(rng.randint(1, 2 * n)):
                a, b = rng.sample(keys, 2)
                kind = rng.choice([LinkKind.EQUIVALENCE, LinkKind.ARGUMENT,
                                   LinkKind.CORRECTIVE_RESTRICTION, LinkKind.EXAMPLE])
                h.add_link(HierarchyLink(kind, a, b, "u1"))
                adjacency[a].add(b)
                adjacency[b].add(a)
            for a in keys:
                for b in keys:
                    assert h.explicitly_related(a, b) == bfs_related(adjacency, a, b)


class TestClassifyStatement:
    def test_instantiation_found(self, seeded):
        seeded.execute("u1", "u1#`every wn#bird can be agent of a flight´;")
        tweety = parse_sentence(
            "u2#`Tweety can be agent of a flight with duration at least 2.5 hour´")
        seeded.execute("u2", "wn#bird instance: Tweety;")
        placement = classify_statement(tweety, seeded.kb)
        assert [i.render() for i in placement.direct_generalizations] == ["u1#s1"]

    def test_empty_kb_empty_placement(self, seeded):
        stmt = parse_sentence("u1#`every wn#bird can be agent of a flight´")
        placement = classify_statement(stmt, seeded.kb)
        assert placement == Placement((), ())

    def test_placement_is_transitive_reduction(self, seeded):
        # chain: every (strongest) > 75% > 50%
        texts = [
            ("u1", "u1#`every wn#bird can be agent of a flight´;"),
            ("u2", "u2#`u1#s1 has for corrective_generalization "
                   "u2#`75% of wn#bird can be agent of a flight´´;"),
            ("u3", "u3#`u2#s1 has for corrective_generalization "
                   "u3#`50% of wn#bird can be agent of a flight´´;"),
        ]
        for agent, text in texts:
            outcome = seeded.execute(agent, text).outcome
            assert outcome.accepted
        kb = seeded.kb
        probe = parse_sentence("u3#`60% of wn#bird can be agent of a flight´")
        placement = classify_statement(probe, kb)
        # the only direct generalization is the 50% statement; every/75% are
        # generalized (they specialize the probe), the nearest being 75%
        assert [i.render() for i in placement.direct_generalizations] == ["u3#s1"]
        assert [i.render() for i in placement.direct_specializations] == ["u2#s1"]
