"""
Tests for rule application, the derivation checker and tree utilities.
"""
import itertools
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import NOMS, members, node_exprs, path_exprs, scaled, sequents
from hxpathd.errors import KernelError, ParamShape, PrincipalMissing, SideConditionViolated
from hxpathd.kernel import (
    EIGEN_RULES,
    KEEPABLE,
    CheckReport,
    Derivation,
    RuleId,
    RuleParams,
    apply_rule_backward,
    check_derivation,
    cut_count,
    derivation_height,
    iter_nodes,
    node_at,
    node_count,
    open_leaf,
    premiss_count,
    provable_leaf_forms,
    replace_at,
)
from hxpathd.semantics import enumerate_models, find_countermodel, find_rule_violation, sequent_valid_in
from hxpathd.sequents import DataCmp, Sat, labeled, parse_labeled, parse_sequent
from hxpathd.syntax import BOT, At, Cmp, CmpPolarity, Comp, Dia, Imp, Nom, Prop, Signature, Step, dia
from hxpathd.tactics import principal


def seq(text):
    return parse_sequent(text)


def m(text):
    return parse_labeled(text)


def premisses(rule, conclusion, **params):
    return apply_rule_backward(rule, seq(conclusion), RuleParams(**params))


# (rule, conclusion, params, premisses) for instances without eigen-nominals
SHAPES = [
    (RuleId.IMP_L, "@I (p -> q) |- @I q", dict(principal=(m("@I (p -> q)"),)),
     ["|- @I p, @I q", "@I q |- @I q"]),
    (RuleId.IMP_R, "|- @I (p -> q)", dict(principal=(m("@I (p -> q)"),)),
     ["@I p |- @I q"]),
    (RuleId.AT_T, "|- @I p", dict(principal=(m("@I I"),)),
     ["@I I |- @I p"]),
    (RuleId.AT_5, "@I J, @I K |-", dict(principal=(m("@I J"), m("@I K"))),
     ["@I J, @I K, @J K |-"]),
    (RuleId.S1, "@I J, @I p |-", dict(principal=(m("@I J"), m("@I p"))),
     ["@I J, @I p, @J p |-"]),
    (RuleId.S1, "@I J, @I <a>K |-", dict(principal=(m("@I J"), m("@I <a>K"))),
     ["@I J, @I <a>K, @J <a>K |-"]),
    (RuleId.S2, "@J K, @I <a>J |-", dict(principal=(m("@J K"), m("@I <a>J"))),
     ["@J K, @I <a>J, @I <a>K |-"]),
    (RuleId.S3, "@I J, <I =c K> |-", dict(principal=(m("@I J"), m("<I =c K>"))),
     ["@I J, <I =c K>, <J =c K> |-"]),
    (RuleId.AT_L, "@K @I p |- @I q", dict(principal=(m("@K @I p"),)),
     ["@I p |- @I q"]),
    (RuleId.AT_R, "|- @K @I p", dict(principal=(m("@K @I p"),)),
     ["|- @I p"]),
    (RuleId.DIA_R, "@I <a>J |- @I <a>p", dict(principal=(m("@I <a>p"),), witnesses=(m("@I <a>J"),)),
     ["@I <a>J |- @I <a>p, @J p"]),
    (RuleId.CMP_R, "@I <a>J, @I <b>K |- @I <a =c b>",
     dict(principal=(m("@I <a =c b>"),), witnesses=(m("@I <a>J"), m("@I <b>K"))),
     ["@I <a>J, @I <b>K |- @I <a =c b>, <J =c K>"]),
    (RuleId.EQ_T, "|- <I =c J>", dict(principal=(m("<I =c I>"),)),
     ["<I =c I> |- <I =c J>"]),
    (RuleId.EQ_5, "<I =c J>, <I =c K> |-", dict(principal=(m("<I =c J>"), m("<I =c K>"))),
     ["<I =c J>, <I =c K>, <J =c K> |-"]),
    (RuleId.NEQ_L, "<I !=c J> |-", dict(principal=(m("<I !=c J>"),)),
     ["|- <I =c J>"]),
    (RuleId.NEQ_R, "|- <I !=c J>", dict(principal=(m("<I !=c J>"),)),
     ["<I =c J> |-"]),
]


class TestRuleShapes:
    @pytest.mark.parametrize("rule,conclusion,params,expected", SHAPES, ids=lambda x: getattr(x, "value", None))
    def test_premisses(self, rule, conclusion, params, expected):
        assert premisses(rule, conclusion, **params) == [seq(t) for t in expected]

    @pytest.mark.parametrize("rule,conclusion,params,expected", SHAPES, ids=lambda x: getattr(x, "value", None))
    def test_locally_sound(self, rule, conclusion, params, expected):
        got = premisses(rule, conclusion, **params)
        assert find_rule_violation(got, seq(conclusion), 2) is None

    def test_keep_retains_principal(self):
        f = m("@I (p -> q)")
        got = premisses(RuleId.IMP_L, "@I (p -> q) |- @I q", principal=(f,), keep=True)
        assert all(f in p.ante for p in got)

    def test_keep_only_for_keepable_rules(self):
        with pytest.raises(ParamShape):
            premisses(RuleId.AT_T, "|- @I p", principal=(m("@I I"),), keep=True)

    def test_dia_l_introduces_fresh_nominal(self):
        got = premisses(RuleId.DIA_L, "@I <a>p |- @I q", principal=(m("@I <a>p"),), fresh=("K",))
        assert got == [seq("@I <a>K, @K p |- @I q")]

    def test_cmp_l_introduces_two_fresh_nominals(self):
        got = premisses(RuleId.CMP_L, "@I <a !=c J:> |-", principal=(m("@I <a !=c J:>"),), fresh=("K", "L"))
        assert got == [seq("@I <a>K, @I @J L, <K !=c L> |-")]

    def test_named_comparison_is_a_cmp_principal(self):
        conclusion = "@J @J J, @J @K K |- <J =c K>"
        got = premisses(RuleId.CMP_R, conclusion,
                        principal=(m("<J =c K>"),), witnesses=(m("@J @J J"), m("@J @K K")))
        assert got == [seq(conclusion)]

    def test_nom_fresh(self):
        got = premisses(RuleId.NOM_FRESH, "@I p |-", principal=(m("@I K"),), fresh=("K",))
        assert got == [seq("@I p, @I K |-")]

    def test_relational_cut(self):
        got = premisses(RuleId.CUT, "@I p |- @I q", cut=m("@I r"))
        assert got == [seq("@I p |- @I q, @I r"), seq("@I p, @I r |- @I q")]

    def test_weakening(self):
        assert premisses(RuleId.WL, "@I p |- @I q", principal=(m("@I p"),)) == [seq("|- @I q")]
        assert premisses(RuleId.WR, "@I p |- @I q", principal=(m("@I q"),)) == [seq("@I p |-")]


class TestEigenRules:
    """Eigen rules are sound globally: a valid premiss gives a valid conclusion."""

    def test_dia_l(self):
        (p,) = premisses(RuleId.DIA_L, "@I <a>(p & q) |- @I <a>p",
                         principal=(m("@I <a>(p & q)"),), fresh=("J",))
        assert find_countermodel(p, 2) is None
        assert find_countermodel(seq("@I <a>(p & q) |- @I <a>p"), 2) is None

    def test_eigen_name_must_be_fresh(self):
        with pytest.raises(SideConditionViolated):
            premisses(RuleId.DIA_L, "@I <a>p |- @J q", principal=(m("@I <a>p"),), fresh=("J",))
        with pytest.raises(SideConditionViolated):
            premisses(RuleId.CMP_L, "@I <a =c a> |-", principal=(m("@I <a =c a>"),), fresh=("J", "J"))

    def test_nom_fresh_needs_fresh_name(self):
        with pytest.raises(SideConditionViolated):
            premisses(RuleId.NOM_FRESH, "@I J |-", principal=(m("@I J"),), fresh=("J",))


class TestRuleErrors:
    def test_principal_missing(self):
        with pytest.raises(PrincipalMissing):
            premisses(RuleId.IMP_R, "|- @I q", principal=(m("@I (p -> q)"),))

    def test_wrong_shape(self):
        with pytest.raises(SideConditionViolated):
            premisses(RuleId.IMP_R, "|- @I q", principal=(m("@I q"),))

    def test_wrong_parameter_count(self):
        with pytest.raises(ParamShape):
            premisses(RuleId.AT_5, "@I J |-", principal=(m("@I J"),))
        with pytest.raises(ParamShape):
            premisses(RuleId.DIA_R, "@I <a>J |- @I <a>p", principal=(m("@I <a>p"),))

    def test_witness_must_match(self):
        with pytest.raises(SideConditionViolated):
            premisses(RuleId.DIA_R, "@I <b>J |- @I <a>p",
                      principal=(m("@I <a>p"),), witnesses=(m("@I <b>J"),))

    def test_errors_share_a_base(self):
        assert issubclass(PrincipalMissing, KernelError)
        assert issubclass(ParamShape, KernelError)


def at_refl() -> Derivation:
    refl = m("@I I")
    leaf = Derivation(seq("@I I |- @I I"), RuleId.AX, principal(refl))
    return Derivation(seq("|- @I I"), RuleId.AT_T, principal(refl), (leaf,))


class TestChecker:
    def test_proved(self):
        report = check_derivation(at_refl())
        assert report.well_formed and report.proved
        assert report.cut_count == 0
        assert report.height == 2
        assert report.node_count == 2
        assert report.summary() == "proved, cuts: 0"

    def test_leaf_forms(self):
        assert provable_leaf_forms(seq("@I p |- @I p")) is RuleId.AX
        assert provable_leaf_forms(seq("@I false |- @I p")) is RuleId.BOT
        assert provable_leaf_forms(seq("@I (p -> p) |- @I (p -> p)")) is None
        assert provable_leaf_forms(seq("<I !=c J> |- <I !=c J>")) is None

    def test_compound_axiom_is_rejected(self):
        f = m("@I (p -> p)")
        d = Derivation(seq("@I (p -> p) |- @I (p -> p)"), RuleId.AX, principal(f))
        report = check_derivation(d)
        assert not report.well_formed
        assert report.failure_path == ()

    def test_wrong_child(self):
        f = m("@I (p -> q)")
        leaf = Derivation(seq("@I p |- @I p"), RuleId.AX, principal(m("@I p")))
        d = Derivation(seq("|- @I (p -> q)"), RuleId.IMP_R, principal(f), (leaf,))
        report = check_derivation(d)
        assert not report.well_formed
        assert report.summary().startswith("ill-formed at root: ImpR: premiss 0")

    def test_failure_path_points_into_tree(self):
        refl = m("@I I")
        bad = Derivation(seq("@I I |- @I I"), RuleId.BOT, principal(refl))
        d = Derivation(seq("|- @I I"), RuleId.AT_T, principal(refl), (bad,))
        report = check_derivation(d)
        assert report.failure_path == (0,)
        assert report.summary().startswith("ill-formed at 0:")

    def test_wrong_arity(self):
        d = Derivation(seq("|- @I I"), RuleId.AT_T, principal(m("@I I")))
        assert not check_derivation(d).well_formed

    def test_open_leaves(self):
        d = Derivation(seq("|- @I I"), RuleId.AT_T, principal(m("@I I")), (open_leaf(seq("@I I |- @I I")),))
        report = check_derivation(d)
        assert report.well_formed
        assert not report.proved
        assert report.open_leaves == [seq("@I I |- @I I")]
        assert report.summary() == "open leaves: 1, cuts: 0"

    def test_cut_combines_premisses(self):
        f = m("@I p")
        left = Derivation(seq("@I p |- @I p"), RuleId.AX, principal(f))
        right = Derivation(seq("@I p |- @I p"), RuleId.AX, principal(f))
        d = Derivation(seq("@I p |- @I p"), RuleId.CUT, RuleParams(cut=f), (left, right))
        report = check_derivation(d)
        assert report.proved
        assert report.cut_count == 1

    def test_cut_formula_must_be_on_both_sides(self):
        f, g = m("@I p"), m("@I q")
        left = Derivation(seq("@I p |- @I p"), RuleId.AX, principal(f))
        d = Derivation(seq("@I p |- @I p"), RuleId.CUT, RuleParams(cut=g), (left, left))
        assert isinstance(check_derivation(d), CheckReport)
        assert not check_derivation(d).well_formed

    def test_cut_conclusion_may_not_add_unrelated_formulas(self):
        f = m("@I p")
        left = Derivation(seq("@I p |- @I p"), RuleId.AX, principal(f))
        d = Derivation(seq("@I p, @I q |- @I p"), RuleId.CUT, RuleParams(cut=f), (left, left))
        assert not check_derivation(d).well_formed


class TestTreeUtilities:
    def test_walk_and_metrics(self):
        d = at_refl()
        paths = [path for path, _ in iter_nodes(d)]
        assert paths == [(), (0,)]
        assert node_at(d, (0,)).rule is RuleId.AX
        assert derivation_height(d) == 2
        assert node_count(d) == 2
        assert cut_count(d) == 0

    def test_replace_at(self):
        d = at_refl()
        swapped = replace_at(d, (0,), open_leaf(seq("@I I |- @I I")))
        assert node_at(swapped, (0,)).rule is RuleId.OPEN
        assert node_at(d, (0,)).rule is RuleId.AX

    def test_node_at_rejects_bad_path(self):
        with pytest.raises(IndexError):
            node_at(at_refl(), (1,))


# Random rule instances

NAMES = st.sampled_from(NOMS)
FRESH = ("L", "M")
STEP_PATHS = st.sampled_from([Step("a"), Comp(Step("a"), Step("a"))])

LOCAL_RULES = [r for r in RuleId if r not in EIGEN_RULES and r is not RuleId.OPEN]


@st.composite
def rule_instances(draw, rule):
    """(conclusion, params) for one application of rule inside a random context."""
    ctx = draw(sequents(max_members=1, max_leaves=2))
    i, j, k = draw(NAMES), draw(NAMES), draw(NAMES)
    phi, psi = draw(node_exprs(2)), draw(node_exprs(2))
    keep = rule in KEEPABLE and draw(st.booleans())
    left, right, p = (), (), RuleParams()

    if rule is RuleId.AX:
        f = draw(st.sampled_from([Sat(i, Prop("p")), Sat(i, Nom(j)), DataCmp(CmpPolarity.EQ, "c", i, j)]))
        left, right, p = (f,), (f,), RuleParams(principal=(f,))
    elif rule is RuleId.BOT:
        f = Sat(i, BOT)
        left, p = (f,), RuleParams(principal=(f,))
    elif rule in (RuleId.IMP_L, RuleId.IMP_R):
        f = Sat(i, Imp(phi, psi))
        p = RuleParams(principal=(f,), keep=keep)
        left, right = ((f,), ()) if rule is RuleId.IMP_L else ((), (f,))
    elif rule in (RuleId.AT_L, RuleId.AT_R):
        f = Sat(j, At(i, phi))
        p = RuleParams(principal=(f,), keep=keep)
        left, right = ((f,), ()) if rule is RuleId.AT_L else ((), (f,))
    elif rule is RuleId.AT_T:
        p = RuleParams(principal=(Sat(i, Nom(i)),))
    elif rule is RuleId.AT_5:
        f, g = Sat(i, Nom(j)), Sat(i, Nom(k))
        left, p = (f, g), RuleParams(principal=(f, g))
    elif rule is RuleId.S1:
        f = Sat(i, Nom(j))
        g = Sat(i, draw(st.sampled_from([Prop("p"), BOT, Dia("a", Nom(k))])))
        left, p = (f, g), RuleParams(principal=(f, g))
    elif rule is RuleId.S2:
        f, g = Sat(j, Nom(k)), Sat(i, Dia("a", Nom(j)))
        left, p = (f, g), RuleParams(principal=(f, g))
    elif rule is RuleId.S3:
        f, g = Sat(i, Nom(j)), DataCmp(CmpPolarity.EQ, "c", i, k)
        left, p = (f, g), RuleParams(principal=(f, g))
    elif rule is RuleId.DIA_R:
        f, w = Sat(i, Dia("a", phi)), Sat(i, Dia("a", Nom(j)))
        left, right, p = (w,), (f,), RuleParams(principal=(f,), witnesses=(w,))
    elif rule is RuleId.CMP_R:
        alpha, beta = draw(STEP_PATHS), draw(STEP_PATHS)
        f = Sat(i, Cmp(draw(st.sampled_from(list(CmpPolarity))), "c", alpha, beta))
        w1, w2 = labeled(i, dia(alpha, Nom(j))), labeled(i, dia(beta, Nom(k)))
        left, right, p = (w1, w2), (f,), RuleParams(principal=(f,), witnesses=(w1, w2))
    elif rule is RuleId.EQ_T:
        p = RuleParams(principal=(DataCmp(CmpPolarity.EQ, "c", i, i),))
    elif rule is RuleId.EQ_5:
        f, g = DataCmp(CmpPolarity.EQ, "c", i, j), DataCmp(CmpPolarity.EQ, "c", i, k)
        left, p = (f, g), RuleParams(principal=(f, g))
    elif rule in (RuleId.NEQ_L, RuleId.NEQ_R):
        f = DataCmp(CmpPolarity.NEQ, "c", i, j)
        p = RuleParams(principal=(f,), keep=keep)
        left, right = ((f,), ()) if rule is RuleId.NEQ_L else ((), (f,))
    elif rule is RuleId.CUT:
        p = RuleParams(cut=draw(members(2)))
    elif rule in (RuleId.WL, RuleId.WR):
        f = draw(members(2))
        p = RuleParams(principal=(f,))
        left, right = ((f,), ()) if rule is RuleId.WL else ((), (f,))
    elif rule is RuleId.DIA_L:
        f = Sat(i, Dia("a", phi))
        left, p = (f,), RuleParams(principal=(f,), fresh=FRESH[:1], keep=keep)
    elif rule is RuleId.CMP_L:
        paths = path_exprs(node_exprs(1), 2)
        f = labeled(i, Cmp(draw(st.sampled_from(list(CmpPolarity))), "c", draw(paths), draw(paths)))
        left, p = (f,), RuleParams(principal=(f,), fresh=FRESH, keep=keep)
    elif rule is RuleId.NOM_FRESH:
        p = RuleParams(principal=(Sat(i, Nom(FRESH[0])),), fresh=FRESH[:1])
    return ctx.add_left(*left).add_right(*right), p


def reassigned(model, names):
    """Every variant of model that moves the given nominals."""
    for values in itertools.product(range(model.n_nodes), repeat=len(names)):
        yield replace(model, assign={**model.assign, **dict(zip(names, values))})


def eigen_violation(premiss, conclusion, fresh, max_n):
    """A model refuting conclusion where no choice of the fresh names refutes premiss."""
    sig = Signature.merge([conclusion.signature(), premiss.signature()])
    for model in enumerate_models(sig, max_n):
        if sequent_valid_in(model, conclusion):
            continue
        if all(sequent_valid_in(v, premiss) for v in reassigned(model, fresh)):
            return model
    return None


class TestRandomInstances:
    @pytest.mark.parametrize("rule", LOCAL_RULES, ids=lambda r: r.value)
    @settings(derandomize=True, deadline=None, max_examples=scaled(50),
              suppress_health_check=[HealthCheck.too_slow])
    @given(data=st.data())
    def test_locally_sound(self, rule, data):
        conclusion, p = data.draw(rule_instances(rule))
        got = apply_rule_backward(rule, conclusion, p)
        assert len(got) == premiss_count(rule)
        assert find_rule_violation(got, conclusion, 2) is None

    @pytest.mark.parametrize("rule", sorted(EIGEN_RULES, key=lambda r: r.value), ids=lambda r: r.value)
    @settings(derandomize=True, deadline=None, max_examples=scaled(50),
              suppress_health_check=[HealthCheck.too_slow])
    @given(data=st.data())
    def test_sound_for_some_choice_of_fresh_names(self, rule, data):
        conclusion, p = data.draw(rule_instances(rule))
        (premiss,) = apply_rule_backward(rule, conclusion, p)
        assert eigen_violation(premiss, conclusion, p.fresh, 2) is None
