"""
Tests for the concrete syntax: parsing, desugaring and printing.
"""
import pytest
from hypothesis import HealthCheck, given, settings

from conftest import node_exprs, scaled, sequents
from hxpathd.errors import NamespaceClash, ParseError
from hxpathd.parser import parse_node, parse_path, split_sequent_text
from hxpathd.sequents import DataCmp, Sat, Sequent, labeled, parse_labeled, parse_sequent
from hxpathd.syntax import (
    BOT,
    At,
    Cmp,
    CmpPolarity,
    Comp,
    Dia,
    Goto,
    Imp,
    Nom,
    Prop,
    Signature,
    Step,
    Test,
    box,
    box_cmp,
    conj,
    dia,
    disj,
    eps,
    iff,
    neg,
    nominals_of,
    print_node,
    print_path,
    rename_nominals,
    signature_of,
    size,
    split_conj,
    top,
)

P, Q = Prop("p"), Prop("q")
EQ, NEQ = CmpPolarity.EQ, CmpPolarity.NEQ


class TestSugar:
    """Derived connectives desugar into the core constructors."""

    def test_boolean_connectives(self):
        assert parse_node("true") == Imp(BOT, BOT)
        assert parse_node("~p") == Imp(P, BOT)
        assert parse_node("p & q") == neg(Imp(P, neg(Q)))
        assert parse_node("p | q") == Imp(neg(P), Q)
        assert parse_node("p <-> q") == conj(Imp(P, Q), Imp(Q, P))

    def test_implication_is_right_associative(self):
        assert parse_node("p -> q -> p") == Imp(P, Imp(Q, P))
        assert parse_node("(p -> q) -> p") == Imp(Imp(P, Q), P)

    def test_conjunction_binds_tighter_than_implication(self):
        assert parse_node("p & q -> p") == Imp(conj(P, Q), P)

    def test_diamond_over_paths(self):
        assert parse_node("<a>p") == Dia("a", P)
        assert parse_node("<I:>p") == At("I", P)
        assert parse_node("<q?>p") == conj(Q, P)
        assert parse_node("<a ; b>p") == Dia("a", Dia("b", P))
        assert parse_node("<eps>p") == conj(top(), P)

    def test_boxes(self):
        assert parse_node("[a]p") == neg(Dia("a", neg(P)))
        assert parse_node("[a =c b]") == neg(Cmp(NEQ, "c", Step("a"), Step("b")))
        assert parse_node("[a !=c b]") == neg(Cmp(EQ, "c", Step("a"), Step("b")))
        assert box(Step("a"), P) == parse_node("[a]p")
        assert box_cmp(EQ, "c", Step("a"), Step("b")) == parse_node("[a =c b]")

    def test_comparisons_keep_paths(self):
        e = parse_node("<a ; I: =c p?>")
        assert e == Cmp(EQ, "c", Comp(Step("a"), Goto("I")), Test(P))

    def test_eps_path(self):
        assert parse_path("eps") == eps()
        assert eps() == Test(top())

    def test_at_and_nominal(self):
        assert parse_node("@I J") == At("I", Nom("J"))
        assert parse_node("@I ~p") == At("I", neg(P))

    def test_comments_are_ignored(self):
        assert parse_node("p -> q  # trailing note") == Imp(P, Q)


class TestBuilders:
    def test_dia_on_each_path_shape(self):
        assert dia(Step("a"), P) == Dia("a", P)
        assert dia(Goto("I"), P) == At("I", P)
        assert dia(Test(Q), P) == conj(Q, P)
        assert dia(Comp(Step("a"), Goto("I")), P) == Dia("a", At("I", P))

    def test_split_conj(self):
        assert split_conj(conj(P, Q)) == (P, Q)
        assert split_conj(Imp(P, Q)) is None

    def test_disj_and_iff(self):
        assert disj(P, Q) == Imp(neg(P), Q)
        assert split_conj(iff(P, Q)) == (Imp(P, Q), Imp(Q, P))

    def test_size(self):
        assert size(P) == 1
        assert size(Imp(P, Q)) == 3
        assert size(Cmp(EQ, "c", Step("a"), Comp(Step("a"), Goto("I")))) == 4


class TestSignature:
    def test_signature_of_expression(self):
        sig = signature_of(parse_node("@I <a>p -> <b ; J: =c q?>"))
        assert sig == Signature(
            props=frozenset({"p", "q"}),
            noms=frozenset({"I", "J"}),
            mods=frozenset({"a", "b"}),
            cmps=frozenset({"c"}),
        )

    def test_clashes(self):
        sig = Signature(props=frozenset({"x"}), mods=frozenset({"x", "a"}))
        assert sig.clashes() == {"x"}

    def test_rename_nominals(self):
        e = parse_node("@I <I: =c J:>")
        renamed = rename_nominals(e, {"I": "K"})
        assert renamed == parse_node("@K <K: =c J:>")
        assert nominals_of(renamed) == frozenset({"K", "J"})


class TestErrors:
    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as info:
            parse_node("p -> -> q")
        assert info.value.line == 1
        assert info.value.column is not None

    def test_unexpected_end(self):
        with pytest.raises(ParseError):
            parse_node("p ->")

    def test_namespace_clash_between_prop_and_modality(self):
        with pytest.raises(NamespaceClash):
            parse_node("<a>a")

    def test_namespace_clash_between_sort_and_modality(self):
        with pytest.raises(NamespaceClash):
            parse_node("<a =a a>")

    def test_reserved_nominals_need_permission(self):
        with pytest.raises(ParseError):
            parse_node("@_g0 p")
        assert parse_node("@_g0 p", allow_reserved=True) == At("_g0", P)


class TestSequentText:
    def test_parse_sequent(self):
        s = parse_sequent("@I p, <I =c J> |- @J q")
        assert s == Sequent.of([Sat("I", P), DataCmp(EQ, "c", "I", "J")], [Sat("J", Q)])

    def test_members_must_be_labelled(self):
        with pytest.raises(ParseError):
            parse_sequent("p |- @I p")

    def test_jump_comparison_becomes_named_comparison(self):
        assert parse_labeled("@K <I: !=c J:>") == DataCmp(NEQ, "c", "I", "J")
        assert labeled("K", Cmp(EQ, "c", Goto("I"), Goto("J"))) == DataCmp(EQ, "c", "I", "J")

    def test_empty_sides(self):
        s = parse_sequent("|- @I I")
        assert s.ante == frozenset()
        assert s.text() == "|- @I I"
        assert parse_sequent("@I p |-").cons == frozenset()

    def test_split_sequent_text(self):
        assert split_sequent_text("@I p |- @I q") == ("@I p ", " @I q")
        assert split_sequent_text("@I p") is None


class TestPrinting:
    @pytest.mark.parametrize("text", [
        "p -> q -> p",
        "(p -> q) -> p",
        "@I (p -> false)",
        "<a>(p -> q)",
        "<(<a>p)? ; I: =c a>",
        "<a ; b ; c !=d e>",
        "<(a ; b) ; c =d e>",
        "@I @J K",
        "<(p -> q)? =c (false)?>",
    ])
    def test_printed_text_is_stable(self, text):
        e = parse_node(text)
        assert parse_node(print_node(e)) == e
        assert print_node(parse_node(print_node(e))) == print_node(e)

    def test_core_only_output(self):
        assert print_node(parse_node("p & q")) == "(p -> q -> false) -> false"
        assert print_path(parse_path("eps")) == "(false -> false)?"

    @settings(derandomize=True, deadline=None, max_examples=scaled(200),
              suppress_health_check=[HealthCheck.too_slow])
    @given(node_exprs())
    def test_print_then_parse_gives_same_tree(self, e):
        assert parse_node(print_node(e)) == e

    @settings(derandomize=True, deadline=None, max_examples=scaled(100),
              suppress_health_check=[HealthCheck.too_slow])
    @given(sequents(max_members=3))
    def test_sequent_text_round_trip(self, s):
        assert parse_sequent(s.text()) == s
