"""Rules of the sequent calculus G, rule application and the derivation checker."""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, Optional, Tuple

from .errors import KernelError, ParamShape, PrincipalMissing, SideConditionViolated
from .sequents import (
    DataCmp,
    LabeledExpr,
    Sat,
    Sequent,
    is_atomic,
    labeled,
    print_labeled,
)
from .syntax import (
    Bot,
    Cmp,
    CmpPolarity,
    Dia,
    Goto,
    Imp,
    At,
    Nom,
    PathExpr,
    Prop,
    Step,
    dia,
    dia_target,
)

logger = logging.getLogger(__name__)


class RuleId(str, Enum):
    """Primitive rules of G plus the open-leaf marker."""
    AX = "Ax"
    BOT = "Bot"
    IMP_L = "ImpL"
    IMP_R = "ImpR"
    AT_T = "AtT"
    AT_5 = "At5"
    NOM_FRESH = "NomFresh"
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    AT_L = "AtL"
    AT_R = "AtR"
    DIA_L = "DiaL"
    DIA_R = "DiaR"
    CMP_L = "CmpL"
    CMP_R = "CmpR"
    EQ_T = "EqT"
    EQ_5 = "Eq5"
    NEQ_L = "NEqL"
    NEQ_R = "NEqR"
    CUT = "Cut"
    WL = "WL"
    WR = "WR"
    OPEN = "Open"


LEAF_RULES = frozenset({RuleId.AX, RuleId.BOT, RuleId.OPEN})

# Rules whose principal may stay in the premiss (set reading of "φ, Γ").
KEEPABLE = frozenset({
    RuleId.IMP_L, RuleId.IMP_R, RuleId.AT_L, RuleId.AT_R,
    RuleId.DIA_L, RuleId.CMP_L, RuleId.NEQ_L, RuleId.NEQ_R,
})

# Rules that decompose a formula of the consequent.
RIGHT_RULES = frozenset({RuleId.IMP_R, RuleId.AT_R, RuleId.DIA_R, RuleId.CMP_R, RuleId.NEQ_R})

EIGEN_RULES = frozenset({RuleId.DIA_L, RuleId.CMP_L, RuleId.NOM_FRESH})


def premiss_count(rule: RuleId) -> int:
    if rule in LEAF_RULES:
        return 0
    if rule in (RuleId.IMP_L, RuleId.CUT):
        return 2
    return 1


@dataclass(frozen=True)
class RuleParams:
    """Designated formulas and extra data of one rule application."""
    principal: Tuple[LabeledExpr, ...] = ()
    fresh: Tuple[str, ...] = ()
    cut: Optional[LabeledExpr] = None
    witnesses: Tuple[LabeledExpr, ...] = ()
    path: Optional[PathExpr] = None
    keep: bool = False


NO_PARAMS = RuleParams()


@dataclass(frozen=True)
class Derivation:
    """Sequent-labelled rule tree."""
    conclusion: Sequent
    rule: RuleId
    params: RuleParams = NO_PARAMS
    children: Tuple["Derivation", ...] = ()

    __hash__ = None

    def with_children(self, *children: "Derivation") -> "Derivation":
        return replace(self, children=tuple(children))


def open_leaf(s: Sequent) -> Derivation:
    return Derivation(s, RuleId.OPEN)


# Rule application

def _fmt(f: LabeledExpr) -> str:
    return print_labeled(f)


def _principals(rule: RuleId, params: RuleParams, n: int) -> Tuple[LabeledExpr, ...]:
    if len(params.principal) != n:
        raise ParamShape(rule.value, f"expects {n} principal formula(s), got {len(params.principal)}")
    return params.principal


def _in_ante(rule: RuleId, f: LabeledExpr, s: Sequent) -> None:
    if f not in s.ante:
        raise PrincipalMissing(rule.value, f"{_fmt(f)} is not in the antecedent")


def _in_cons(rule: RuleId, f: LabeledExpr, s: Sequent) -> None:
    if f not in s.cons:
        raise PrincipalMissing(rule.value, f"{_fmt(f)} is not in the consequent")


def _shape(rule: RuleId, f: LabeledExpr, ok: bool, what: str) -> None:
    if not ok:
        raise SideConditionViolated(rule.value, f"{_fmt(f)} is not {what}")


def _sat(f: LabeledExpr, body_type=None) -> bool:
    return isinstance(f, Sat) and (body_type is None or isinstance(f.body, body_type))


def _fresh(rule: RuleId, params: RuleParams, n: int, s: Sequent) -> Tuple[str, ...]:
    if len(params.fresh) != n:
        raise ParamShape(rule.value, f"expects {n} fresh nominal(s), got {len(params.fresh)}")
    if len(set(params.fresh)) != n:
        raise SideConditionViolated(rule.value, "fresh nominals must be different")
    used = s.nominals()
    for j in params.fresh:
        if j in used:
            raise SideConditionViolated(rule.value, f"nominal {j} is not fresh for the conclusion")
    return params.fresh


def cmp_parts(f: LabeledExpr) -> Optional[Tuple[str, CmpPolarity, str, PathExpr, PathExpr]]:
    """(i, pol, sort, α, β) when f is @i<α ▲ β>; a named-point comparison reads as @j<j: ▲ k:>."""
    if isinstance(f, DataCmp):
        return f.i, f.pol, f.sort, Goto(f.i), Goto(f.j)
    if isinstance(f.body, Cmp):
        c = f.body
        return f.i, c.pol, c.sort, c.left, c.right
    return None


def witness_target(i: str, path: PathExpr, w: LabeledExpr) -> Optional[str]:
    """j when w is @i<path>j."""
    if not isinstance(w, Sat) or w.i != i:
        return None
    j = dia_target(path, w.body)
    if j is None or labeled(i, dia(path, Nom(j))) != w:
        return None
    return j


def apply_rule_backward(rule: RuleId, conclusion: Sequent, params: RuleParams = NO_PARAMS) -> List[Sequent]:
    """Premisses of `rule` applied to `conclusion`, read bottom-up."""
    s = conclusion
    rule = RuleId(rule)
    if params.keep and rule not in KEEPABLE:
        raise ParamShape(rule.value, "does not take keep")

    if rule is RuleId.OPEN:
        return []

    if rule is RuleId.AX:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, is_atomic(f), "of the form @i p, @i j or <i =c j>")
        _in_ante(rule, f, s)
        _in_cons(rule, f, s)
        return []

    if rule is RuleId.BOT:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Bot), "of the form @i false")
        _in_ante(rule, f, s)
        return []

    if rule is RuleId.IMP_L:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Imp), "an implication")
        _in_ante(rule, f, s)
        base = s if params.keep else s.drop_left(f)
        return [base.add_right(labeled(f.i, f.body.lhs)), base.add_left(labeled(f.i, f.body.rhs))]

    if rule is RuleId.IMP_R:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Imp), "an implication")
        _in_cons(rule, f, s)
        base = s if params.keep else s.drop_right(f)
        return [base.add_left(labeled(f.i, f.body.lhs)).add_right(labeled(f.i, f.body.rhs))]

    if rule is RuleId.AT_T:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Nom) and f.body.i == f.i, "of the form @i i")
        return [s.add_left(f)]

    if rule is RuleId.AT_5:
        f, g = _principals(rule, params, 2)
        _shape(rule, f, _sat(f, Nom), "of the form @i j")
        _shape(rule, g, _sat(g, Nom) and g.i == f.i, f"of the form @{f.i} k")
        _in_ante(rule, f, s)
        _in_ante(rule, g, s)
        return [s.add_left(Sat(f.body.i, g.body))]

    if rule is RuleId.NOM_FRESH:
        (f,) = _principals(rule, params, 1)
        (j,) = _fresh(rule, params, 1, s)
        _shape(rule, f, _sat(f, Nom) and f.body.i == j, f"of the form @i {j}")
        return [s.add_left(f)]

    if rule is RuleId.S1:
        f, g = _principals(rule, params, 2)
        _shape(rule, f, _sat(f, Nom), "of the form @i j")
        ok = isinstance(g, Sat) and g.i == f.i and (
            isinstance(g.body, (Prop, Bot))
            or (isinstance(g.body, Dia) and isinstance(g.body.body, Nom))
        )
        _shape(rule, g, ok, f"of the form @{f.i} p, @{f.i} false or @{f.i}<a>k")
        _in_ante(rule, f, s)
        _in_ante(rule, g, s)
        return [s.add_left(Sat(f.body.i, g.body))]

    if rule is RuleId.S2:
        f, g = _principals(rule, params, 2)
        _shape(rule, f, _sat(f, Nom), "of the form @j k")
        ok = isinstance(g, Sat) and isinstance(g.body, Dia) and g.body.body == Nom(f.i)
        _shape(rule, g, ok, f"of the form @i<a>{f.i}")
        _in_ante(rule, f, s)
        _in_ante(rule, g, s)
        return [s.add_left(Sat(g.i, Dia(g.body.mod, f.body)))]

    if rule is RuleId.S3:
        f, g = _principals(rule, params, 2)
        _shape(rule, f, _sat(f, Nom), "of the form @i j")
        ok = isinstance(g, DataCmp) and g.pol is CmpPolarity.EQ and g.i == f.i
        _shape(rule, g, ok, f"of the form <{f.i} =c k>")
        _in_ante(rule, f, s)
        _in_ante(rule, g, s)
        return [s.add_left(DataCmp(CmpPolarity.EQ, g.sort, f.body.i, g.j))]

    if rule is RuleId.AT_L:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, At), "of the form @j @i φ")
        _in_ante(rule, f, s)
        base = s if params.keep else s.drop_left(f)
        return [base.add_left(labeled(f.body.i, f.body.body))]

    if rule is RuleId.AT_R:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, At), "of the form @j @i φ")
        _in_cons(rule, f, s)
        base = s if params.keep else s.drop_right(f)
        return [base.add_right(labeled(f.body.i, f.body.body))]

    if rule is RuleId.DIA_L:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Dia), "of the form @i<a>φ")
        _in_ante(rule, f, s)
        (j,) = _fresh(rule, params, 1, s)
        base = s if params.keep else s.drop_left(f)
        return [base.add_left(Sat(f.i, Dia(f.body.mod, Nom(j))), labeled(j, f.body.body))]

    if rule is RuleId.DIA_R:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, _sat(f, Dia), "of the form @i<a>φ")
        _in_cons(rule, f, s)
        if len(params.witnesses) != 1:
            raise ParamShape(rule.value, "expects one witness @i<a>j")
        (w,) = params.witnesses
        j = witness_target(f.i, Step(f.body.mod), w)
        _shape(rule, w, j is not None, f"of the form @{f.i}<{f.body.mod}>j")
        _in_ante(rule, w, s)
        return [s.add_right(labeled(j, f.body.body))]

    if rule is RuleId.CMP_L:
        (f,) = _principals(rule, params, 1)
        parts = cmp_parts(f)
        _shape(rule, f, parts is not None, "a data comparison")
        _in_ante(rule, f, s)
        j, k = _fresh(rule, params, 2, s)
        i, pol, sort, left, right = parts
        base = s if params.keep else s.drop_left(f)
        return [base.add_left(
            labeled(i, dia(left, Nom(j))),
            labeled(i, dia(right, Nom(k))),
            DataCmp(pol, sort, j, k),
        )]

    if rule is RuleId.CMP_R:
        (f,) = _principals(rule, params, 1)
        parts = cmp_parts(f)
        _shape(rule, f, parts is not None, "a data comparison")
        _in_cons(rule, f, s)
        if len(params.witnesses) != 2:
            raise ParamShape(rule.value, "expects two witnesses @i<α>j and @i<β>k")
        i, pol, sort, left, right = parts
        w1, w2 = params.witnesses
        j = witness_target(i, left, w1)
        k = witness_target(i, right, w2)
        _shape(rule, w1, j is not None, "a witness for the left path")
        _shape(rule, w2, k is not None, "a witness for the right path")
        _in_ante(rule, w1, s)
        _in_ante(rule, w2, s)
        return [s.add_right(DataCmp(pol, sort, j, k))]

    if rule is RuleId.EQ_T:
        (f,) = _principals(rule, params, 1)
        ok = isinstance(f, DataCmp) and f.pol is CmpPolarity.EQ and f.i == f.j
        _shape(rule, f, ok, "of the form <i =c i>")
        return [s.add_left(f)]

    if rule is RuleId.EQ_5:
        f, g = _principals(rule, params, 2)
        ok = isinstance(f, DataCmp) and f.pol is CmpPolarity.EQ
        _shape(rule, f, ok, "of the form <i =c j>")
        ok = isinstance(g, DataCmp) and g.pol is CmpPolarity.EQ and g.i == f.i and g.sort == f.sort
        _shape(rule, g, ok, f"of the form <{f.i} ={f.sort} k>")
        _in_ante(rule, f, s)
        _in_ante(rule, g, s)
        return [s.add_left(DataCmp(CmpPolarity.EQ, f.sort, f.j, g.j))]

    if rule is RuleId.NEQ_L:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, isinstance(f, DataCmp) and f.pol is CmpPolarity.NEQ, "of the form <i !=c j>")
        _in_ante(rule, f, s)
        base = s if params.keep else s.drop_left(f)
        return [base.add_right(DataCmp(CmpPolarity.EQ, f.sort, f.i, f.j))]

    if rule is RuleId.NEQ_R:
        (f,) = _principals(rule, params, 1)
        _shape(rule, f, isinstance(f, DataCmp) and f.pol is CmpPolarity.NEQ, "of the form <i !=c j>")
        _in_cons(rule, f, s)
        base = s if params.keep else s.drop_right(f)
        return [base.add_left(DataCmp(CmpPolarity.EQ, f.sort, f.i, f.j))]

    if rule is RuleId.CUT:
        if params.cut is None:
            raise ParamShape(rule.value, "missing cut formula")
        return [s.add_right(params.cut), s.add_left(params.cut)]

    if rule is RuleId.WL:
        (f,) = _principals(rule, params, 1)
        _in_ante(rule, f, s)
        return [s.drop_left(f)]

    if rule is RuleId.WR:
        (f,) = _principals(rule, params, 1)
        _in_cons(rule, f, s)
        return [s.drop_right(f)]

    raise ParamShape(str(rule), "unknown rule")


def provable_leaf_forms(s: Sequent) -> Optional[RuleId]:
    """Ax when an atomic member sits on both sides, Bot when @i false is assumed."""
    if any(is_atomic(f) for f in s.ante & s.cons):
        return RuleId.AX
    if any(_sat(f, Bot) for f in s.ante):
        return RuleId.BOT
    return None


def leaf_params(s: Sequent) -> Optional[Tuple[RuleId, RuleParams]]:
    """Rule and principal closing s as a leaf, picked in canonical order."""
    for f in s.sorted_ante():
        if is_atomic(f) and f in s.cons:
            return RuleId.AX, RuleParams(principal=(f,))
    for f in s.sorted_ante():
        if _sat(f, Bot):
            return RuleId.BOT, RuleParams(principal=(f,))
    return None


# Tree walking

TreePath = Tuple[int, ...]


def iter_nodes(d: Derivation) -> Iterator[Tuple[TreePath, Derivation]]:
    """Pre-order walk yielding (path from root, node)."""
    stack: List[Tuple[TreePath, Derivation]] = [((), d)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for idx in range(len(node.children) - 1, -1, -1):
            stack.append((path + (idx,), node.children[idx]))


def node_at(d: Derivation, path: TreePath) -> Derivation:
    node = d
    for idx in path:
        if idx >= len(node.children):
            raise IndexError(f"no child {idx} at {path}")
        node = node.children[idx]
    return node


def replace_at(d: Derivation, path: TreePath, new: Derivation) -> Derivation:
    """Copy of d with the subtree at path swapped for new."""
    spine = [d]
    for idx in path:
        spine.append(spine[-1].children[idx])
    result = new
    for parent, idx in zip(reversed(spine[:-1]), reversed(path)):
        kids = list(parent.children)
        kids[idx] = result
        result = parent.with_children(*kids)
    return result


def derivation_height(d: Derivation) -> int:
    """1 for a leaf, else one more than the tallest child."""
    heights: dict[int, int] = {}
    stack: List[Tuple[Derivation, bool]] = [(d, False)]
    while stack:
        node, done = stack.pop()
        if done:
            heights[id(node)] = 1 + max((heights[id(c)] for c in node.children), default=0)
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in node.children)
    return heights[id(d)]


def node_count(d: Derivation) -> int:
    return sum(1 for _ in iter_nodes(d))


def cut_count(d: Derivation) -> int:
    return sum(1 for _, n in iter_nodes(d) if n.rule is RuleId.CUT)


# Checking

@dataclass
class CheckReport:
    """Outcome of check_derivation."""
    well_formed: bool = True
    proved: bool = True
    cut_count: int = 0
    uses_weakening: bool = False
    node_count: int = 0
    height: int = 0
    open_leaves: List[Sequent] = field(default_factory=list)
    failure_path: Optional[TreePath] = None
    error: Optional[str] = None

    def summary(self) -> str:
        if not self.well_formed:
            where = "/".join(str(i) for i in self.failure_path or ()) or "root"
            return f"ill-formed at {where}: {self.error}"
        status = "proved" if self.proved else f"open leaves: {len(self.open_leaves)}"
        return f"{status}, cuts: {self.cut_count}"


def cut_natural(left: Sequent, right: Sequent, f: LabeledExpr) -> Sequent:
    """Smallest conclusion of a cut on f between the two premisses."""
    return Sequent(left.ante | (right.ante - {f}), (left.cons - {f}) | right.cons)


def _check_cut(node: Derivation) -> None:
    f = node.params.cut
    if f is None:
        raise ParamShape("Cut", "missing cut formula")
    left, right = (c.conclusion for c in node.children)
    if f not in left.cons:
        raise PrincipalMissing("Cut", f"{_fmt(f)} is not in the consequent of the left premiss")
    if f not in right.ante:
        raise PrincipalMissing("Cut", f"{_fmt(f)} is not in the antecedent of the right premiss")
    natural = cut_natural(left, right, f)
    upper = natural.add_left(f).add_right(f)
    if not (natural.issubset(node.conclusion) and node.conclusion.issubset(upper)):
        raise SideConditionViolated("Cut", "conclusion does not combine the premisses")


def _check_node(node: Derivation) -> None:
    expected = premiss_count(node.rule)
    if len(node.children) != expected:
        raise ParamShape(node.rule.value, f"expects {expected} premiss(es), got {len(node.children)}")
    if node.rule is RuleId.CUT:
        _check_cut(node)
        return
    premisses = apply_rule_backward(node.rule, node.conclusion, node.params)
    for idx, (want, child) in enumerate(zip(premisses, node.children)):
        if child.conclusion != want:
            raise KernelError(
                node.rule.value,
                f"premiss {idx} should be '{want}' but the child concludes '{child.conclusion}'",
            )


def check_derivation(d: Derivation) -> CheckReport:
    """Re-derive every premiss from (rule, conclusion, params) and compare."""
    report = CheckReport()
    for path, node in iter_nodes(d):
        report.node_count += 1
        if node.rule is RuleId.CUT:
            report.cut_count += 1
        elif node.rule in (RuleId.WL, RuleId.WR):
            report.uses_weakening = True
        elif node.rule is RuleId.OPEN:
            report.open_leaves.append(node.conclusion)
        if not report.well_formed:
            continue
        try:
            _check_node(node)
        except (KernelError, ValueError) as e:
            logger.debug(f"derivation fails at {path}: {e}")
            report.well_formed = False
            report.failure_path = path
            report.error = str(e)
    report.height = derivation_height(d)
    report.proved = report.well_formed and not report.open_leaves
    return report


def fold_tree(root: Derivation, ctx, expand, combine):
    """Iterative fold: expand(node, ctx) gives one context per child, combine(node, ctx, results) a value."""
    out: list = []
    stack: list = [(False, root, ctx, out)]
    while stack:
        done, node, c, slot = stack.pop()
        if done:
            parent_slot, kid_slots = slot
            parent_slot.append(combine(node, c, [ks[0] for ks in kid_slots]))
            continue
        kid_ctxs = expand(node, c)
        kid_slots: list = [[] for _ in node.children]
        stack.append((True, node, c, (slot, kid_slots)))
        for child, kc, ks in reversed(list(zip(node.children, kid_ctxs, kid_slots))):
            stack.append((False, child, kc, ks))
    return out[0]


def rebuild(d: Derivation, fn) -> Derivation:
    """Bottom-up rewrite: fn(node, new_children) returns the replacement node."""
    return fold_tree(
        d,
        None,
        lambda node, _: [None] * len(node.children),
        lambda node, _, kids: fn(node, tuple(kids)),
    )
