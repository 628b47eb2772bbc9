"""
Tests for finite models: satisfaction, enumeration, countermodels and the model text format.
"""
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import MODS, NOMS, SORTS, models, node_exprs, path_exprs, scaled
from hxpathd.errors import ModelFormatError, UndeclaredSymbol
from hxpathd.parser import parse_node
from hxpathd.semantics import (
    HybridDataModel,
    box_cmp_check,
    diamond_check,
    enumerate_models,
    eval_node,
    eval_path,
    find_countermodel,
    find_rule_violation,
    holds,
    model_to_dict,
    parse_model,
    print_model,
    sequent_valid_in,
    set_partitions,
    successors,
)
from hxpathd.sequents import Sat, labeled, parse_sequent
from hxpathd.syntax import CmpPolarity, Comp, Goto, Prop, Signature, Step, Test, box_cmp, dia

SMALL = dict(derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@pytest.fixture
def two_nodes(fixture_dir):
    return parse_model((fixture_dir / "two_nodes.model").read_text())


class TestEvaluation:
    def test_steps_and_jumps(self, two_nodes):
        m = two_nodes
        assert successors(m, 0, Step("a")) == frozenset({1})
        assert successors(m, 1, Step("a")) == frozenset()
        assert successors(m, 1, Goto("I")) == frozenset({0})
        assert eval_path(m, 0, 1, Comp(Goto("J"), Test(Prop("p"))))

    def test_node_expressions(self, two_nodes):
        m = two_nodes
        assert eval_node(m, 0, parse_node("<a>p"))
        assert not eval_node(m, 1, parse_node("<a>p"))
        assert eval_node(m, 1, parse_node("@I <a>J"))
        assert eval_node(m, 0, parse_node("<I: !=c J:>"))
        assert not eval_node(m, 0, parse_node("<I: =c J:>"))
        assert eval_node(m, 0, parse_node("<a =c J:>"))
        assert eval_node(m, 0, parse_node("[a !=c I:]"))

    def test_comparison_with_no_successor_is_false(self, two_nodes):
        assert not eval_node(two_nodes, 1, parse_node("<a =c a>"))
        assert eval_node(two_nodes, 1, parse_node("[a =c a]"))

    def test_members(self, two_nodes):
        assert holds(two_nodes, Sat("J", Prop("p")))
        assert not holds(two_nodes, labeled("I", parse_node("<I: =c J:>")))

    def test_undeclared_symbols(self, two_nodes):
        with pytest.raises(UndeclaredSymbol):
            eval_node(two_nodes, 0, parse_node("q"))
        with pytest.raises(UndeclaredSymbol):
            eval_node(two_nodes, 0, parse_node("<b>p"))
        with pytest.raises(UndeclaredSymbol) as info:
            eval_node(two_nodes, 0, parse_node("@K p"))
        assert info.value.kind == "nominal"
        assert info.value.name == "K"


class TestDirectChecks:
    """The direct diamond and box-comparison checks agree with the desugared forms."""

    @settings(max_examples=scaled(150), **SMALL)
    @given(models(), st.data())
    def test_diamond_check(self, m, data):
        path = data.draw(path_exprs(node_exprs(2)))
        body = data.draw(node_exprs(3))
        for n in range(m.n_nodes):
            assert diamond_check(m, n, path, body) == eval_node(m, n, dia(path, body))

    @settings(max_examples=scaled(150), **SMALL)
    @given(models(), st.data())
    def test_box_cmp_check(self, m, data):
        left = data.draw(path_exprs(node_exprs(2)))
        right = data.draw(path_exprs(node_exprs(2)))
        pol = data.draw(st.sampled_from(list(CmpPolarity)))
        for n in range(m.n_nodes):
            expected = eval_node(m, n, box_cmp(pol, SORTS[0], left, right))
            assert box_cmp_check(m, n, pol, SORTS[0], left, right) == expected

    @settings(max_examples=scaled(100), **SMALL)
    @given(models(), node_exprs(4), st.sampled_from(NOMS))
    def test_members_do_not_depend_on_the_point(self, m, body, i):
        assert holds(m, labeled(i, body)) == eval_node(m, m.named(i), body)


class TestEnumeration:
    def test_partitions_follow_bell_numbers(self):
        assert [len(list(set_partitions(n))) for n in range(1, 5)] == [1, 2, 5, 15]
        assert list(set_partitions(2)) == [(0, 0), (0, 1)]

    def test_model_count(self):
        sig = Signature(noms=frozenset({"I"}))
        assert len(list(enumerate_models(sig, 2))) == 3
        sig = Signature(props=frozenset({"p"}), mods=frozenset({"a"}))
        # one node: 2 relations * 2 valuations; two nodes: 16 * 4
        assert len(list(enumerate_models(sig, 2))) == 4 + 64

    def test_partitions_are_canonical(self):
        m = HybridDataModel(2, cmp={"c": (5, 3)})
        assert m.cmp["c"] == (0, 1)
        assert m == HybridDataModel(2, cmp={"c": (0, 1)})


class TestCountermodels:
    def test_valid_sequent_has_none(self):
        assert find_countermodel(parse_sequent("@I p |- @I (q -> p)"), 2) is None
        assert find_countermodel(parse_sequent("|- <I =c I>"), 2) is None

    def test_invalid_sequent(self):
        s = parse_sequent("@I <a>p |- @I <a>q")
        m = find_countermodel(s, 2)
        assert m is not None
        assert not sequent_valid_in(m, s)

    def test_needs_two_nodes(self):
        s = parse_sequent("|- @I J")
        assert find_countermodel(s, 1) is None
        assert find_countermodel(s, 2).n_nodes == 2

    def test_rule_violation(self):
        sound = find_rule_violation([parse_sequent("@I p |- @I q")], parse_sequent("|- @I (p -> q)"), 2)
        assert sound is None
        unsound = find_rule_violation([parse_sequent("|- @I p")], parse_sequent("|- @I q"), 2)
        assert unsound is not None


class TestModelText:
    def test_parse(self, two_nodes):
        assert two_nodes.n_nodes == 2
        assert two_nodes.rel == {"a": frozenset({(0, 1)})}
        assert two_nodes.assign == {"I": 0, "J": 1}
        assert two_nodes.val == {"p": frozenset({1})}

    def test_print(self, two_nodes):
        assert print_model(two_nodes) == (
            "nodes 2\n"
            "rel a: (0,1)\n"
            "cmp c: {0}{1}\n"
            "nom I = 0\n"
            "nom J = 1\n"
            "val p: 1\n"
        )

    def test_dict_view(self, two_nodes):
        assert model_to_dict(two_nodes)["cmp"] == {"c": [0, 1]}

    @settings(max_examples=scaled(100), **SMALL)
    @given(models())
    def test_print_then_parse(self, m):
        assert parse_model(print_model(m)) == m

    @pytest.mark.parametrize("text,line", [
        ("rel a: (0,1)\n", None),
        ("nodes 2\nrel a: (0,2)\n", None),
        ("nodes 2\ncmp c: {0}\n", 2),
        ("nodes 2\ncmp c: {0,1}{1}\n", 2),
        ("nodes 2\nedge a\n", 2),
        ("nodes 2\nnom I = x\n", 2),
    ])
    def test_malformed(self, text, line):
        with pytest.raises(ModelFormatError) as info:
            parse_model(text)
        assert info.value.line == line

    def test_empty_relation_and_valuation(self):
        m = parse_model("nodes 1\nrel a:\nval p:\n")
        assert m.rel == {"a": frozenset()}
        assert m.val == {"p": frozenset()}
        assert set(MODS) <= set(m.rel)
