"""Combinators for building derivations bottom-up from goal sequents."""
import logging
import re
from dataclasses import replace
from typing import Callable, Dict, Iterable, Optional

from .errors import KernelError
from .kernel import (
    EIGEN_RULES,
    KEEPABLE,
    RIGHT_RULES,
    Derivation,
    RuleId,
    RuleParams,
    apply_rule_backward,
    fold_tree,
    iter_nodes,
    leaf_params,
    open_leaf,
    rebuild,
)
from .sequents import DataCmp, LabeledExpr, Sat, Sequent, labeled, print_labeled, rename_member
from .syntax import (
    At,
    Bot,
    Cmp,
    CmpPolarity,
    Dia,
    Imp,
    Nom,
    dia,
    rename_nominals,
)

logger = logging.getLogger(__name__)

Builder = Callable[[Sequent], Derivation]

_GENSYM = re.compile(r"_g(\d+)$")


class NameSupply:
    """Hands out reserved nominals _gN never seen before."""

    def __init__(self, *seeds):
        self._next = 0
        self.note(*seeds)

    def note(self, *objs) -> None:
        """Move the counter past every reserved nominal in objs."""
        for obj in objs:
            for name in _names_in(obj):
                m = _GENSYM.match(name)
                if m:
                    self._next = max(self._next, int(m.group(1)) + 1)

    def fresh(self) -> str:
        name = f"_g{self._next}"
        self._next += 1
        return name


def _names_in(obj) -> Iterable[str]:
    if obj is None:
        return ()
    if isinstance(obj, str):
        return (obj,)
    if isinstance(obj, Sequent):
        return obj.nominals()
    if isinstance(obj, Derivation):
        names: set[str] = set()
        for _, node in iter_nodes(obj):
            names |= node.conclusion.nominals()
            names |= set(node.params.fresh)
        return names
    if isinstance(obj, (list, tuple, set, frozenset)):
        names = set()
        for item in obj:
            names |= set(_names_in(item))
        return names
    return Sequent.of([obj]).nominals()


# Node construction

def apply(rule: RuleId, s: Sequent, params: RuleParams, *builders: Builder) -> Derivation:
    """Apply a rule backwards and build each premiss with the matching builder."""
    premisses = apply_rule_backward(rule, s, params)
    if len(premisses) != len(builders):
        raise KernelError(rule.value, f"{len(premisses)} premiss(es) but {len(builders)} builder(s)")
    return Derivation(s, rule, params, tuple(b(p) for b, p in zip(builders, premisses)))


def principal(*fs: LabeledExpr, **kw) -> RuleParams:
    return RuleParams(principal=tuple(fs), **kw)


def close(s: Sequent) -> Derivation:
    """Ax or Bot leaf on s."""
    found = leaf_params(s)
    if found is None:
        raise KernelError("Ax", f"'{s}' is not an axiom")
    rule, params = found
    return Derivation(s, rule, params)


def stub(s: Sequent) -> Derivation:
    return open_leaf(s)


def given(d: Derivation) -> Builder:
    """Builder that weakens an existing derivation into the goal."""
    return lambda s: fit(d, s)


def fit(d: Derivation, target: Sequent) -> Derivation:
    """Extend d with WL/WR steps so that it concludes target."""
    have = d.conclusion
    if have == target:
        return d
    if not have.issubset(target):
        raise KernelError("WL", f"'{have}' does not weaken to '{target}'")
    current = have
    for f in sorted(target.cons - have.cons, key=print_labeled):
        current = current.add_right(f)
        d = Derivation(current, RuleId.WR, principal(f), (d,))
    for f in sorted(target.ante - have.ante, key=print_labeled):
        current = current.add_left(f)
        d = Derivation(current, RuleId.WL, principal(f), (d,))
    return d


def cut(f: LabeledExpr, left: Derivation, right: Derivation, target: Optional[Sequent] = None) -> Derivation:
    """Cut on f with the smallest conclusion, weakened to target when given."""
    lhs, rhs = left.conclusion, right.conclusion
    natural = Sequent(lhs.ante | (rhs.ante - {f}), (lhs.cons - {f}) | rhs.cons)
    d = Derivation(natural, RuleId.CUT, RuleParams(cut=f), (left, right))
    return d if target is None else fit(d, target)


def cut_in(s: Sequent, f: LabeledExpr, left: Builder, right: Builder) -> Derivation:
    """Cut on f with both premisses carrying the full context of s."""
    return apply(RuleId.CUT, s, RuleParams(cut=f), left, right)


# Generalized identity

def identity(s: Sequent, f: LabeledExpr, supply: NameSupply) -> Derivation:
    """Cut-free proof of s when f occurs on both of its sides."""
    supply.note(s)
    if f not in s.ante or f not in s.cons:
        raise KernelError("Ax", f"{print_labeled(f)} is not on both sides of '{s}'")
    if isinstance(f, DataCmp):
        if f.pol is CmpPolarity.EQ:
            return Derivation(s, RuleId.AX, principal(f))
        eq = DataCmp(CmpPolarity.EQ, f.sort, f.i, f.j)
        return apply(
            RuleId.NEQ_R, s, principal(f),
            lambda p: apply(RuleId.NEQ_L, p, principal(f), lambda q: identity(q, eq, supply)),
        )
    body = f.body
    if isinstance(body, Bot):
        return Derivation(s, RuleId.BOT, principal(f))
    if isinstance(body, Imp):
        lhs, rhs = labeled(f.i, body.lhs), labeled(f.i, body.rhs)
        return apply(
            RuleId.IMP_R, s, principal(f),
            lambda p: apply(
                RuleId.IMP_L, p, principal(f),
                lambda q: identity(q, lhs, supply),
                lambda q: identity(q, rhs, supply),
            ),
        )
    if isinstance(body, At):
        inner = labeled(body.i, body.body)
        return apply(
            RuleId.AT_R, s, principal(f),
            lambda p: apply(RuleId.AT_L, p, principal(f), lambda q: identity(q, inner, supply)),
        )
    if isinstance(body, Dia):
        n = supply.fresh()
        w = Sat(f.i, Dia(body.mod, Nom(n)))
        inner = labeled(n, body.body)
        return apply(
            RuleId.DIA_L, s, principal(f, fresh=(n,)),
            lambda p: apply(
                RuleId.DIA_R, p, principal(f, witnesses=(w,)),
                lambda q: identity(q, inner, supply),
            ),
        )
    if isinstance(body, Cmp):
        j, k = supply.fresh(), supply.fresh()
        w1 = labeled(f.i, dia(body.left, Nom(j)))
        w2 = labeled(f.i, dia(body.right, Nom(k)))
        data = DataCmp(body.pol, body.sort, j, k)
        return apply(
            RuleId.CMP_L, s, principal(f, fresh=(j, k)),
            lambda p: apply(
                RuleId.CMP_R, p, principal(f, witnesses=(w1, w2)),
                lambda q: identity(q, data, supply),
            ),
        )
    return Derivation(s, RuleId.AX, principal(f))


def close_or_identity(s: Sequent, supply: NameSupply) -> Optional[Derivation]:
    """Leaf if s is an axiom, else identity on the smallest shared formula."""
    if leaf_params(s) is not None:
        return close(s)
    shared = sorted(s.ante & s.cons, key=print_labeled)
    return identity(s, shared[0], supply) if shared else None


# Whole-tree operations

def graft(d: Derivation, proofs: Dict[Sequent, Derivation]) -> Derivation:
    """Replace open leaves by proofs of their sequents (weakened as needed)."""
    def swap(node: Derivation, kids):
        if node.rule is RuleId.OPEN and node.conclusion in proofs:
            return fit(proofs[node.conclusion], node.conclusion)
        return node.with_children(*kids) if kids else node
    return rebuild(d, swap)


def _rename_params(params: RuleParams, mapping: Dict[str, str]) -> RuleParams:
    if not mapping:
        return params
    return replace(
        params,
        principal=tuple(rename_member(f, mapping) for f in params.principal),
        fresh=tuple(mapping.get(j, j) for j in params.fresh),
        cut=None if params.cut is None else rename_member(params.cut, mapping),
        witnesses=tuple(rename_member(f, mapping) for f in params.witnesses),
        path=None if params.path is None else rename_nominals(params.path, mapping),
    )


def _eigen_names(d: Derivation) -> set[str]:
    return {j for _, n in iter_nodes(d) if n.rule in EIGEN_RULES for j in n.params.fresh}


def weaken(d: Derivation, extra: Sequent, supply: NameSupply) -> Derivation:
    """Add extra to every sequent of d; the height never grows."""
    if not extra.ante and not extra.cons:
        return d
    supply.note(extra)
    if extra.nominals() & _eigen_names(d):
        d = rename_derivation(d, {}, supply)

    def swap(node: Derivation, kids) -> Derivation:
        s = node.conclusion.union(extra)
        rule, params = node.rule, node.params
        if rule in (RuleId.WL, RuleId.WR) and kids[0].conclusion == s:
            return kids[0]
        if rule in KEEPABLE and not params.keep:
            side = extra.cons if rule in RIGHT_RULES else extra.ante
            if params.principal[0] in side:
                params = replace(params, keep=True)
        return Derivation(s, rule, params, tuple(kids))

    return rebuild(d, swap)


def _grow(d: Derivation, target: Sequent, supply: NameSupply) -> Derivation:
    have = d.conclusion
    if have == target:
        return d
    if not have.issubset(target):
        raise KernelError("WL", f"'{have}' does not weaken to '{target}'")
    return weaken(d, Sequent(target.ante - have.ante, target.cons - have.cons), supply)


def _relink(rule: RuleId, s: Sequent, params: RuleParams, kids, supply: NameSupply) -> Derivation:
    """Rebuild a renamed node whose premisses may have merged formulas."""
    if rule is RuleId.CUT or not kids:
        return Derivation(s, rule, params, tuple(kids))
    if rule in (RuleId.WL, RuleId.WR) and kids[0].conclusion == s:
        return kids[0]
    got = [k.conclusion for k in kids]
    if apply_rule_backward(rule, s, params) == got:
        return Derivation(s, rule, params, tuple(kids))
    if rule in KEEPABLE and not params.keep:
        params = replace(params, keep=True)
    premisses = apply_rule_backward(rule, s, params)
    return Derivation(s, rule, params, tuple(_grow(k, p, supply) for k, p in zip(kids, premisses)))


def rename_derivation(d: Derivation, mapping: Dict[str, str], supply: NameSupply) -> Derivation:
    """Substitute nominals through d; eigen-nominals are first moved to fresh names.

    The substitution may identify nominals. Nodes whose premisses then
    merge are repaired by keeping the principal or dropping a weakening.
    """
    eigen: Dict[int, Dict[str, str]] = {}

    def expand(node: Derivation, m: Dict[str, str]):
        if node.rule in EIGEN_RULES:
            m = dict(m)
            for j in node.params.fresh:
                m[j] = supply.fresh()
            eigen[id(node)] = m
        return [m] * len(node.children)

    def combine(node: Derivation, m: Dict[str, str], kids):
        inner = eigen.pop(id(node), m)
        s = node.conclusion.rename(m)
        return _relink(node.rule, s, _rename_params(node.params, inner), kids, supply)

    return fold_tree(d, dict(mapping), expand, combine)
