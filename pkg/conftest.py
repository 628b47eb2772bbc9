"""Shared strategies and fixtures for the hxpathd test suite."""
import os
from pathlib import Path

import pytest
from hypothesis import strategies as st

from hxpathd.hilbert import SchemaId
from hxpathd.semantics import HybridDataModel
from hxpathd.sequents import DataCmp, Sequent, labeled
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
    Step,
    Test,
)

FIXTURES = Path(__file__).parent / "fixtures"

PROPS = ("p", "q")
NOMS = ("I", "J", "K")
MODS = ("a",)
SORTS = ("c",)


def scaled(default: int) -> int:
    """Example count, raised through HXPATHD_EXAMPLES for the long runs."""
    return int(os.environ.get("HXPATHD_EXAMPLES", default))


# Expressions

def path_exprs(nodes, max_leaves: int = 3):
    segments = st.one_of(
        st.sampled_from(MODS).map(Step),
        st.sampled_from(NOMS).map(Goto),
        nodes.map(Test),
    )
    return st.recursive(segments, lambda p: st.builds(Comp, p, p), max_leaves=max_leaves)


def node_exprs(max_leaves: int = 6):
    leaves = st.one_of(
        st.sampled_from(PROPS).map(Prop),
        st.sampled_from(NOMS).map(Nom),
        st.just(BOT),
    )

    def extend(children):
        return st.one_of(
            st.builds(Imp, children, children),
            st.builds(At, st.sampled_from(NOMS), children),
            st.builds(Dia, st.sampled_from(MODS), children),
            st.builds(
                Cmp,
                st.sampled_from(list(CmpPolarity)),
                st.sampled_from(SORTS),
                path_exprs(children, 2),
                path_exprs(children, 2),
            ),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def members(max_leaves: int = 3):
    sat = st.builds(labeled, st.sampled_from(NOMS), node_exprs(max_leaves))
    data = st.builds(
        DataCmp,
        st.sampled_from(list(CmpPolarity)),
        st.sampled_from(SORTS),
        st.sampled_from(NOMS),
        st.sampled_from(NOMS),
    )
    return st.one_of(sat, sat, data)


@st.composite
def sequents(draw, max_members: int = 2, max_leaves: int = 3):
    ante = draw(st.lists(members(max_leaves), max_size=max_members))
    cons = draw(st.lists(members(max_leaves), min_size=1, max_size=max_members))
    return Sequent.of(ante, cons)


@st.composite
def models(draw, max_nodes: int = 3):
    n = draw(st.integers(1, max_nodes))
    nodes = st.integers(0, n - 1)
    return HybridDataModel(
        n_nodes=n,
        rel={m: frozenset(draw(st.lists(st.tuples(nodes, nodes), max_size=n * n))) for m in MODS},
        cmp={c: tuple(draw(st.lists(nodes, min_size=n, max_size=n))) for c in SORTS},
        assign={i: draw(nodes) for i in NOMS},
        val={p: frozenset(draw(st.lists(nodes, max_size=n))) for p in PROPS},
    )


# One instance per axiom schema: atomic formulas, single steps, one sort

_A, _B, _P, _Q = Step("a"), Step("b"), Prop("p"), Prop("q")
_EQ = CmpPolarity.EQ

SCHEMA_INSTANCES = {
    SchemaId.CPL: {"phi": Imp(_P, _P)},
    SchemaId.AT_DEF: {"i": "I", "phi": _P, "c": "c"},
    SchemaId.DIA_DEF: {"alpha": _A, "phi": _P, "c": "c"},
    SchemaId.K: {"alpha": _A, "phi": _P, "psi": _Q},
    SchemaId.AT_K: {"i": "I", "phi": _P, "psi": _Q},
    SchemaId.AT_SELF_DUAL: {"i": "I", "phi": _P},
    SchemaId.AT_INTRO: {"i": "I", "phi": _P},
    SchemaId.AT_REFL: {"i": "I"},
    SchemaId.COMP_ASSOC: {"alpha": _A, "beta": _B, "gamma": _A, "eta": _B, "pol": _EQ, "c": "c"},
    SchemaId.COMP_NEUTRAL: {"alpha": _A, "beta": _B, "gamma": _A, "pol": _EQ, "c": "c"},
    SchemaId.COMP_NEUTRAL_L: {"beta": _A, "gamma": _B, "pol": _EQ, "c": "c"},
    SchemaId.COMP_NEUTRAL_R: {"alpha": _A, "gamma": _B, "pol": _EQ, "c": "c"},
    SchemaId.COMP_DIST: {"alpha": _A, "beta": _B, "phi": _P},
    SchemaId.EQUAL: {"c": "c"},
    SchemaId.CMP_COMM: {"alpha": _A, "beta": _B, "pol": _EQ, "c": "c"},
    SchemaId.EPS_TRANS: {"alpha": _A, "beta": _B, "c": "c"},
    SchemaId.DISTINCT: {"c": "c"},
    SchemaId.AT_DATA: {"i": "I", "j": "J", "c": "c"},
    SchemaId.SUBPATH: {"alpha": _A, "beta": _B, "gamma": _A, "pol": _EQ, "c": "c"},
    SchemaId.AT_CMP_DIST: {"i": "I", "alpha": _A, "beta": _B, "pol": _EQ, "c": "c"},
    SchemaId.CMP_TEST: {"phi": _P, "alpha": _A, "beta": _B, "pol": _EQ, "c": "c"},
    SchemaId.AGREE: {"i": "I", "j": "J", "alpha": _A, "beta": _B, "pol": _EQ, "c": "c"},
    SchemaId.BACK: {"alpha": _A, "i": "I", "beta": _B, "gamma": _A, "pol": _EQ, "c": "c"},
    SchemaId.CMP_COMP_DIST: {"alpha": _A, "beta": _B, "gamma": _A, "pol": _EQ, "c": "c"},
}


# Fixtures

@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture
def cli_env(monkeypatch, tmp_path):
    """Default configuration with fixture-relative file arguments."""
    monkeypatch.setenv("HXPATHD_CONFIG", str(tmp_path / "absent.toml"))
    monkeypatch.setenv("HXPATHD_FIXTURES", str(FIXTURES))
    return tmp_path
