import random
from fractions import Fraction

import pytest

from cokb.hierarchy import TreeNode
from cokb.model import (
    Comparator,
    ConceptNode,
    Context,
    ContextKind,
    Edge,
    GraphBody,
    Ident,
    Measure,
    MetaBody,
    Quantifier,
    QTag,
    Statement,
    StatementKind,
    TermRef,
    TextBody,
    structurally_equal,
)
from cokb.notation import (
    KifUnsupported,
    ParseError,
    parse_command,
    parse_fl,
    parse_sentence,
    render_fe,
    render_kif,
    render_tree,
    split_units,
)
from cokb.notation.parser import CommandKind


class TestParseSentence:
    def test_formal_definition(self):
        s = parse_sentence("u1#`any u1#bird is pm#agent of a pm#flight´")
        assert s.kind is StatementKind.DEFINITION
        assert s.creator == "u1"
        assert s.believer is None
        edge = s.body.edges[0]
        assert edge.subject.term.render() == "u1#bird"
        assert edge.subject.quantifier.tag is QTag.UNIVERSAL
        assert edge.relation.render() == "pm#agent"
        assert edge.obj.term.render() == "pm#flight"
        assert edge.obj.quantifier == Quantifier.at_least(1)

    def test_semiformal_belief(self):
        s = parse_sentence("u1#`every u1#bird is agent of a flight´")
        assert s.kind is StatementKind.BELIEF
        assert s.believer == "u1"
        edge = s.body.edges[0]
        assert edge.relation.ident is None  # informal relation term
        assert edge.obj.term.ident is None

    def test_informal_with_interpreter(self):
        s = parse_sentence('u1#u2#"birds fly"')
        assert s.kind is StatementKind.INFORMAL
        assert s.creator == "u1"
        assert s.interpreted_source == "u2"
        assert s.body.text == "birds fly"

    def test_individual_modal_with_measure(self):
        s = parse_sentence(
            "u2#`Tweety can be agent of a flight with duration at least 2.5 hour´")
        assert s.kind is StatementKind.BELIEF
        assert s.has_modality_possible()
        edge = s.body.edges[0]
        assert edge.subject.quantifier.tag is QTag.INDIVIDUAL
        assert edge.subject.term.name == "Tweety"
        m = edge.obj.measure
        assert m.relation.name == "duration"
        assert m.comparator is Comparator.GE
        assert m.magnitude == Fraction(5, 2)
        assert m.unit == "hour"

    def test_no_quantifier(self):
        s = parse_sentence("u3#`no bird is agent of a flight´")
        assert s.body.edges[0].subject.quantifier.tag is QTag.NO

    def test_percent_with_contexts(self):
        s = parse_sentence(
            "u3#`75% of bird can be agent of a flight in place France and in period 2005 to 2006´")
        q = s.body.edges[0].subject.quantifier
        assert q.tag is QTag.AT_LEAST_PERCENT and q.p == 75
        kinds = {c.kind for c in s.contexts}
        assert kinds == {ContextKind.MODALITY_POSSIBLE, ContextKind.PLACE,
                         ContextKind.PERIOD}

    def test_meta_with_id_and_embedded(self):
        s = parse_sentence(
            "u2#`u1#s1 has for corrective_generalization "
            "u2#`75% of wn#bird can be agent of a flight´´")
        body = s.body
        assert isinstance(body, MetaBody)
        assert body.first == Ident("u1", "s1")
        assert isinstance(body.second, Statement)
        assert body.second.creator == "u2"

    def test_adjective_chain_folds_into_informal_term(self):
        s = parse_sentence("u2#`most healthy flying_bird are able to be agent of a flight´")
        edge = s.body.edges[0]
        assert edge.subject.term.name == "healthy_flying_bird"
        assert edge.subject.quantifier.tag is QTag.MOST
        assert s.has_modality_possible()

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_sentence("u1#`every bird is of a flight´")
        assert err.value.line == 1

    def test_default_creator_applies(self):
        s = parse_sentence("`every bird is agent of a flight´", default_creator="u9")
        assert s.creator == "u9"
        assert s.believer == "u9"


class TestParseFl:
    def test_sourced_relation(self):
        links = parse_fl("wfm#workflow_management part: wfm#scheduling (s162557)")
        assert len(links) == 1
        link = links[0]
        assert link.subject.render() == "wfm#workflow_management"
        assert link.relation == "part"
        assert [o.render() for o in link.objects] == ["wfm#scheduling"]
        assert link.source == "s162557"

    def test_two_objects_expand(self):
        links = parse_fl("a subtype: b c")
        assert len(links) == 2
        assert all(l.relation == "subtype" for l in links)
        assert [l.objects[0].render() for l in links] == ["b", "c"]

    def test_empty_object_list(self):
        with pytest.raises(ParseError) as err:
            parse_fl("a subtype: ")
        assert err.value.expected == "term"

    def test_multiple_groups(self):
        links = parse_fl("a subtype: b, part: c (s1)")
        assert [(l.relation, l.source) for l in links] == [("subtype", None), ("part", "s1")]


class TestParseCommand:
    def test_spec_of(self):
        cmd = parse_command("spec of wfm#workflow_management")
        assert cmd.kind is CommandKind.SPEC_OF
        assert cmd.term.render() == "wfm#workflow_management"

    def test_remove(self):
        cmd = parse_command("remove u1#s42")
        assert cmd.kind is CommandKind.REMOVE
        assert cmd.target.render() == "u1#s42"

    def test_sentence_is_assert(self):
        cmd = parse_command("u3#`no bird is agent of a flight´")
        assert cmd.kind is CommandKind.ASSERT
        assert cmd.statement.body.edges[0].subject.quantifier.tag is QTag.NO

    def test_fl_line_is_assert_links(self):
        cmd = parse_command("wn#bird instance: Tweety")
        assert cmd.kind is CommandKind.ASSERT_LINKS

    def test_rate(self):
        cmd = parse_command("rate u1#s1 acceptance 0.3")
        assert cmd.kind is CommandKind.RATE
        assert cmd.value == Fraction(3, 10)

    def test_measure_prefix_expression(self):
        cmd = parse_command("measure m1 (wmean acceptance (userscore rater))")
        assert cmd.kind is CommandKind.DEF_MEASURE
        assert cmd.expr == ("wmean", "acceptance", ("userscore", "rater"))

    def test_filter(self):
        cmd = parse_command("filter f1 hide (>= score 0.3)")
        assert cmd.kind is CommandKind.SET_FILTER
        assert cmd.action == "hide"
        assert cmd.expr == (">=", "score", Fraction(3, 10))


class TestSplitUnits:
    def test_semicolon_inside_quotes(self):
        units = split_units('u1#"a; b"; remove u1#s1;')
        assert units == ['u1#"a; b"', "remove u1#s1"]

    def test_comments_dropped(self):
        units = split_units("// hello\nremove u1#s1; // tail\n")
        assert units == ["remove u1#s1"]

    def test_unterminated_raises(self):
        with pytest.raises(ParseError):
            split_units("remove u1#s1")


# --- round-trip -------------------------------------------------------------

TERMS = ["bird", "flight", "u1#bird", "wn#bird", "pm#flight", "healthy_bird"]
RELATIONS = ["agent", "pm#agent", "part"]
UNITS = ["hour", "km"]


def random_statement(rng: random.Random) -> Statement:
    """A normalized statement in the single-clause fragment."""
    kind_pick = rng.random()
    creator = rng.choice(["u1", "u2", "u3"])
    interpreted = rng.choice([None, None, None, "u4"])
    if kind_pick < 0.1:
        return Statement(creator=creator, kind=StatementKind.INFORMAL,
                         body=TextBody(rng.choice(["birds fly", "penguins walk"])),
                         interpreted_source=interpreted)
    is_def = kind_pick < 0.25
    if is_def:
        subject_q = Quantifier.universal()
    else:
        subject_q = rng.choice([
            Quantifier.universal(), Quantifier.no(), Quantifier.most(),
            Quantifier.at_least_percent(rng.choice([50, 75, Fraction(25, 2)])),
            Quantifier.at_least(rng.randint(1, 5)),
            Quantifier.exact(rng.randint(1, 5)),
            Quantifier.individual(),
        ])
    subject_term = (TermRef.parse(rng.choice(["Tweety", "u2#Tweety"]))
                    if subject_q.tag is QTag.INDIVIDUAL
                    else TermRef.parse(rng.choice(TERMS)))
    object_q = rng.choice([Quantifier.at_least(1), Quantifier.at_least(1),
                           Quantifier.exact(2), Quantifier.universal()])
    measure = None
    if rng.random() < 0.4:
        measure = Measure(TermRef("duration"), rng.choice(list(Comparator)),
                          Fraction(rng.randint(1, 40), rng.choice([1, 2, 4])),
                          rng.choice(UNITS))
    contexts = []
    modal = rng.random() < 0.5
    if modal:
        contexts.append(Context.possible())
    if rng.random() < 0.3:
        contexts.append(Context(ContextKind.PLACE, place=TermRef("France")))
    if rng.random() < 0.3:
        contexts.append(Context(ContextKind.PERIOD, start="2005", end="2006"))
    edge = Edge(
        ConceptNode(subject_term, subject_q,
                    referent=subject_term.ident if subject_q.tag is QTag.INDIVIDUAL else None),
        TermRef.parse(rng.choice(RELATIONS)),
        ConceptNode(TermRef.parse(rng.choice(TERMS)), object_q, measure=measure),
    )
    kind = StatementKind.DEFINITION if is_def else StatementKind.BELIEF
    believer = None
    if kind is StatementKind.BELIEF and interpreted is None:
        believer = creator
    return Statement(creator=creator, kind=kind, body=GraphBody((edge,)),
                     believer=believer, interpreted_source=interpreted,
                     contexts=tuple(contexts))


class TestRoundTrip:
    def test_spec_examples_round_trip(self):
        examples = [
            "u1#`any u1#bird is pm#agent of a pm#flight´",
            "u1#`every u1#bird is agent of a flight´",
            'u1#u2#"birds fly"',
            "u2#`Tweety can be agent of a flight with duration at least 2.5 hour´",
        ]
        for text in examples:
            stmt = parse_sentence(text)
            assert structurally_equal(parse_sentence(render_fe(stmt)), stmt)

    def test_no_contexts_renders_without_context_clause(self):
        stmt = parse_sentence("u1#`every bird is agent of a flight´")
        assert " in " not in render_fe(stmt)

    def test_thousand_random_statements(self):
        rng = random.Random(20260808)
        for i in range(1000):
            stmt = random_statement(rng)
            text = render_fe(stmt)
            back = parse_sentence(text)
            assert structurally_equal(back, stmt), f"case {i}: {text}"

    def test_meta_round_trip(self):
        text = ("u2#`u1#s1 has for corrective_generalization "
                "u2#`75% of wn#bird can be agent of a flight´´")
        stmt = parse_sentence(text)
        assert structurally_equal(parse_sentence(render_fe(stmt)), stmt)


class TestKif:
    def test_definition_byte_exact(self):
        stmt = parse_sentence("u1#`any u1#bird is pm#agent of a pm#flight´")
        assert render_kif(stmt) == (
            "(creator u1 '(defrelation u1#bird (?b) :=> "
            "(exists ((?f pm#flight)) (pm#agent ?b ?f))))")

    def test_universal_belief_byte_exact(self):
        stmt = parse_sentence("u1#`every u1#bird is agent of a flight´")
        assert render_kif(stmt) == (
            "(believer u1 '(forall ((?b u1#bird)) "
            "(exists ((?f flight)) (agent ?b ?f))))")

    def test_modal_belief_byte_exact(self):
        stmt = parse_sentence("u1#`every bird can be agent of a flight´")
        assert render_kif(stmt) == (
            "(believer u1 '(modality possible '(forall ((?b bird)) "
            "(exists ((?f flight)) (agent ?b ?f))))")

    def test_percent_unsupported(self):
        stmt = parse_sentence("u2#`75% of bird is agent of a flight´")
        with pytest.raises(KifUnsupported):
            render_kif(stmt)

    def test_most_unsupported(self):
        stmt = parse_sentence("u2#`most bird is agent of a flight´")
        with pytest.raises(KifUnsupported):
            render_kif(stmt)

    def test_variable_disambiguation(self):
        stmt = parse_sentence("u1#`every bird is agent of a bird_feeder´")
        text = render_kif(stmt)
        assert "?b " in text and "?b2" in text


class TestRenderTree:
    def test_single_node(self):
        assert render_tree(TreeNode("wn#bird")) == "wn#bird"

    def test_children_sorted_by_identifier(self):
        tree = TreeNode("a", children=[
            TreeNode("a#z", "subtype", "u2"),
            TreeNode("a#b", "instance", "u1"),
        ])
        assert render_tree(tree).splitlines() == [
            "a",
            "  a#b  (instance, u1)",
            "  a#z  (subtype, u2)",
        ]

    def test_deterministic(self):
        tree = TreeNode("root", children=[TreeNode("b", "subtype", "u1"),
                                          TreeNode("a", "subtype", "u1")])
        assert render_tree(tree) == render_tree(tree)
