"""
Tests for derived-rule expansion and rule inversion.
"""
import pytest

from hxpathd.cutelim import eliminate_cuts
from hxpathd.errors import NotARuleInstance, ParamShape, UnexpandableStub
from hxpathd.kernel import RuleId, RuleParams, apply_rule_backward, check_derivation
from hxpathd.meta import DerivedRuleId, InverseRequest, expand_derived, invert, premisses_of
from hxpathd.parser import parse_path
from hxpathd.prover import find_proof
from hxpathd.semantics import find_rule_violation
from hxpathd.sequents import parse_labeled, parse_sequent
from hxpathd.tactics import graft, principal


def seq(text):
    return parse_sequent(text)


def m(text):
    return parse_labeled(text)


def params(principal=(), fresh=(), witnesses=(), path=None):
    return RuleParams(
        principal=tuple(m(t) for t in principal),
        fresh=tuple(fresh),
        witnesses=tuple(m(t) for t in witnesses),
        path=None if path is None else parse_path(path),
    )


# (rule, conclusion, params, premisses, eigen)
DERIVED = [
    (DerivedRuleId.AX_GEN, "@I (p -> q) |- @I (p -> q)", params(["@I (p -> q)"]), [], False),
    (DerivedRuleId.AX_GEN, "@I <a =c I:> |- @I <a =c I:>", params(["@I <a =c I:>"]), [], False),
    (DerivedRuleId.TOP_L, "|- @I p", params(["@I true"]), ["@I true |- @I p"], False),
    (DerivedRuleId.NEG_L, "@I ~p |- @I q", params(["@I ~p"]), ["|- @I q, @I p"], False),
    (DerivedRuleId.NEG_R, "|- @I ~p", params(["@I ~p"]), ["@I p |-"], False),
    (DerivedRuleId.AND_L, "@I (p & q) |- @I r", params(["@I (p & q)"]), ["@I p, @I q |- @I r"], False),
    (DerivedRuleId.AND_R, "|- @I (p & q)", params(["@I (p & q)"]), ["|- @I p", "|- @I q"], False),
    (DerivedRuleId.IFF_L, "@I (p <-> q) |- @I r", params(["@I (p <-> q)"]),
     ["@I p, @I q |- @I r", "|- @I r, @I p, @I q"], False),
    (DerivedRuleId.IFF_R, "|- @I (p <-> q)", params(["@I (p <-> q)"]),
     ["@I p |- @I q", "@I q |- @I p"], False),
    (DerivedRuleId.MP, "|- @I q", params(["@I (p -> q)"]), ["|- @I p", "|- @I (p -> q)"], False),
    (DerivedRuleId.DIA_PATH_L, "@I <a ; b>p |-", params(["@I <a ; b>p"], fresh=["K"], path="a ; b"),
     ["@I <a ; b>K, @K p |-"], True),
    (DerivedRuleId.DIA_PATH_L, "@I <a ; q?>p |-", params(["@I <a ; q?>p"], fresh=["K"], path="a ; q?"),
     ["@I <a ; q?>K, @K p |-"], True),
    (DerivedRuleId.DIA_PATH_R, "@I <a ; b>K |- @I <a ; b>p",
     params(["@I <a ; b>p"], witnesses=["@I <a ; b>K"], path="a ; b"),
     ["@I <a ; b>K |- @I <a ; b>p, @K p"], False),
    (DerivedRuleId.S1_GEN, "@I J, @I (p -> q) |-", params(["@I J", "@I (p -> q)"]),
     ["@I J, @I (p -> q), @J (p -> q) |-"], False),
    (DerivedRuleId.S1_GEN, "@I J, @I <a>p |-", params(["@I J", "@I <a>p"]),
     ["@I J, @I <a>p, @J <a>p |-"], False),
    (DerivedRuleId.S2_GEN, "@J K, @I <a ; b>J |-", params(["@J K", "@I <a ; b>J"], path="a ; b"),
     ["@J K, @I <a ; b>J, @I <a ; b>K |-"], False),
    (DerivedRuleId.S3_GEN, "@I J, <I !=c K> |-", params(["@I J", "<I !=c K>"]),
     ["@I J, <I !=c K>, <J !=c K> |-"], False),
    (DerivedRuleId.AT_B, "@I J |-", params(["@I J"]), ["@J I |-"], False),
    (DerivedRuleId.CMP_B, "<I =c J> |-", params(["<I =c J>"]), ["<J =c I> |-"], False),
    (DerivedRuleId.CMP_B, "<I !=c J> |-", params(["<I !=c J>"]), ["<J !=c I> |-"], False),
    (DerivedRuleId.AT_CMP_L, "<I =c J> |-", params(["<I =c J>"]), ["<I =c J> |-"], False),
    (DerivedRuleId.AT_CMP_R, "|- <I =c J>", params(["<I =c J>"]), ["|- <I =c J>"], False),
    (DerivedRuleId.BOX_CMP_L, "@I [a =c b], @I <a>J, @I <b>K |-",
     params(["@I [a =c b]"], witnesses=["@I <a>J", "@I <b>K"]),
     ["@I [a =c b], @I <a>J, @I <b>K, <J =c K> |-"], False),
    (DerivedRuleId.BOX_CMP_L, "@I [a !=c b], @I <a>J, @I <b>K |-",
     params(["@I [a !=c b]"], witnesses=["@I <a>J", "@I <b>K"]),
     ["@I [a !=c b], @I <a>J, @I <b>K, <J !=c K> |-"], False),
    (DerivedRuleId.BOX_CMP_R, "|- @I [a =c b]", params(["@I [a =c b]"], fresh=["J", "K"]),
     ["@I <a>J, @I <b>K |- <J =c K>"], True),
]


def case_id(value):
    return getattr(value, "value", None)


class TestDerivedRules:
    @pytest.mark.parametrize("rule,conclusion,p,expected,eigen", DERIVED, ids=case_id)
    def test_premisses(self, rule, conclusion, p, expected, eigen):
        assert premisses_of(rule, seq(conclusion), p) == [seq(t) for t in expected]

    @pytest.mark.parametrize("rule,conclusion,p,expected,eigen", DERIVED, ids=case_id)
    def test_expansion_has_the_premisses_as_open_leaves(self, rule, conclusion, p, expected, eigen):
        stubs = [seq(t) for t in expected]
        d = expand_derived(rule, seq(conclusion), p, stubs)
        report = check_derivation(d)
        assert report.well_formed, report.error
        assert d.conclusion == seq(conclusion)
        assert set(report.open_leaves) == set(stubs)
        assert report.proved == (not stubs)

    @pytest.mark.parametrize("rule,conclusion,p,expected,eigen", [c for c in DERIVED if not c[4]], ids=case_id)
    def test_locally_sound(self, rule, conclusion, p, expected, eigen):
        assert find_rule_violation([seq(t) for t in expected], seq(conclusion), 2) is None

    def test_stub_may_be_smaller_than_premiss(self):
        d = expand_derived(DerivedRuleId.NEG_R, seq("|- @I ~p, @I q"), params(["@I ~p"]), [seq("@I p |-")])
        report = check_derivation(d)
        assert report.well_formed
        assert report.open_leaves == [seq("@I p |-")]

    def test_stub_that_does_not_fit(self):
        with pytest.raises(UnexpandableStub):
            expand_derived(DerivedRuleId.NEG_R, seq("|- @I ~p"), params(["@I ~p"]), [seq("@I q |-")])

    def test_wrong_number_of_stubs(self):
        with pytest.raises(UnexpandableStub):
            expand_derived(DerivedRuleId.AND_R, seq("|- @I (p & q)"), params(["@I (p & q)"]), [seq("|- @I p")])

    def test_wrong_shape(self):
        with pytest.raises(ParamShape):
            premisses_of(DerivedRuleId.AND_L, seq("@I p |-"), params(["@I p"]))
        with pytest.raises(ParamShape):
            premisses_of(DerivedRuleId.DIA_PATH_L, seq("@I <a>p |-"), params(["@I <a>p"], fresh=["K"]))

    def test_open_leaves_can_be_closed_by_grafting(self):
        stubs = [seq("@I p |- @I p"), seq("@I q |- @I (p -> q)")]
        d = expand_derived(DerivedRuleId.MP, seq("@I p, @I q |- @I q"), params(["@I (p -> q)"]), stubs)
        closed = graft(d, {s: find_proof(s) for s in stubs})
        report = check_derivation(closed)
        assert report.proved
        assert report.cut_count == 2


# (rule, given sequent, principal text, fresh)
INVERSIONS = [
    (RuleId.IMP_R, "|- @I (p -> p)", "@I (p -> p)", ()),
    (RuleId.IMP_L, "@I (p -> q), @I p |- @I q", "@I (p -> q)", ()),
    (RuleId.AT_R, "|- @K @I I", "@K @I I", ()),
    (RuleId.AT_L, "@K @I p |- @I p", "@K @I p", ()),
    (RuleId.DIA_L, "@I <a>p |- @I <a>(q -> p)", "@I <a>p", ("J",)),
    (RuleId.CMP_L, "@I <a =c a> |- @I <a =c a>", "@I <a =c a>", ("J", "K")),
    (RuleId.NEQ_R, "|- <I !=c J>, <I =c J>", "<I !=c J>", ()),
    (RuleId.NEQ_L, "<I !=c J>, <I =c J> |-", "<I !=c J>", ()),
]


class TestInversion:
    @pytest.mark.parametrize("rule,text,f,fresh", INVERSIONS, ids=case_id)
    def test_premisses_are_derivable(self, rule, text, f, fresh):
        d = find_proof(seq(text))
        assert d is not None
        instance = principal(m(f), fresh=fresh)
        results = invert(InverseRequest(rule, instance, d))
        wanted = apply_rule_backward(rule, seq(text), instance)
        assert [r.conclusion for r in results] == wanted
        for r in results:
            assert check_derivation(r).proved

    @pytest.mark.parametrize("rule,text,f,fresh", INVERSIONS, ids=case_id)
    def test_inverted_proofs_can_be_made_cut_free(self, rule, text, f, fresh):
        d = find_proof(seq(text))
        for r in invert(InverseRequest(rule, principal(m(f), fresh=fresh), d)):
            out = eliminate_cuts(r)
            report = check_derivation(out)
            assert report.proved
            assert report.cut_count == 0
            assert out.conclusion == r.conclusion

    def test_axiom_has_no_premisses(self):
        d = find_proof(seq("@I p |- @I p"))
        assert invert(InverseRequest(RuleId.AX, principal(m("@I p")), d)) == []

    def test_not_an_instance(self):
        d = find_proof(seq("|- @I (p -> p)"))
        with pytest.raises(NotARuleInstance):
            invert(InverseRequest(RuleId.IMP_L, principal(m("@I (p -> p)")), d))

    @pytest.mark.parametrize("rule", [RuleId.CUT, RuleId.WL, RuleId.WR, RuleId.OPEN])
    def test_structural_rules_are_not_inverted(self, rule):
        d = find_proof(seq("@I p |- @I p"))
        with pytest.raises(NotARuleInstance):
            invert(InverseRequest(rule, RuleParams(), d))


# (rule, given sequent, params); each premiss only adds to the conclusion
WEAKENING_INVERSIONS = [
    (RuleId.AT_T, "@I p |- @I p", params(["@I I"])),
    (RuleId.AT_5, "@I J, @I K, @I p |- @I p", params(["@I J", "@I K"])),
    (RuleId.NOM_FRESH, "@I p |- @I p", params(["@I L"], fresh=["L"])),
    (RuleId.S1, "@I J, @I q, @I p |- @I p", params(["@I J", "@I q"])),
    (RuleId.S2, "@J K, @I <a>J, @I p |- @I p", params(["@J K", "@I <a>J"])),
    (RuleId.S3, "@I J, <I =c K>, @I p |- @I p", params(["@I J", "<I =c K>"])),
    (RuleId.DIA_R, "@I <a>J, @I p |- @I p, @I <a>q", params(["@I <a>q"], witnesses=["@I <a>J"])),
    (RuleId.CMP_R, "@I <a>J, @I <a>K, @I p |- @I p, @I <a =c a>",
     params(["@I <a =c a>"], witnesses=["@I <a>J", "@I <a>K"])),
    (RuleId.EQ_T, "@I p |- @I p", params(["<I =c I>"])),
    (RuleId.EQ_5, "<I =c J>, <I =c K>, @I p |- @I p", params(["<I =c J>", "<I =c K>"])),
]


class TestWeakeningInversion:
    @pytest.mark.parametrize("rule,text,instance", WEAKENING_INVERSIONS, ids=case_id)
    def test_premiss_is_derived(self, rule, text, instance):
        d = find_proof(seq(text))
        assert d is not None
        (r,) = invert(InverseRequest(rule, instance, d))
        assert [r.conclusion] == apply_rule_backward(rule, seq(text), instance)
        out = eliminate_cuts(r)
        report = check_derivation(out)
        assert report.proved
        assert report.cut_count == 0
        assert out.conclusion == r.conclusion
