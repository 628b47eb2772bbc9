"""Derived rules as macros over G, and rule inversion."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence

from .errors import KernelError, NotARuleInstance, ParamShape, UnexpandableStub
from .kernel import (
    Derivation,
    RuleId,
    RuleParams,
    apply_rule_backward,
    cmp_parts,
    open_leaf,
    witness_target,
)
from .sequents import DataCmp, LabeledExpr, Sat, Sequent, labeled, print_labeled
from .syntax import (
    BOT,
    Bot,
    Cmp,
    CmpPolarity,
    Dia,
    Goto,
    Imp,
    NodeExpr,
    Nom,
    PathExpr,
    Prop,
    Step,
    Test,
    conj,
    dia,
    neg,
    split_conj,
    top,
    undia,
)
from .tactics import (
    Builder,
    NameSupply,
    apply,
    close,
    cut,
    cut_in,
    fit,
    identity,
    principal,
)

logger = logging.getLogger(__name__)


class DerivedRuleId(str, Enum):
    """Derived rules available as single steps."""
    AX_GEN = "AxGen"
    TOP_L = "TopL"
    NEG_L = "NegL"
    NEG_R = "NegR"
    AND_L = "AndL"
    AND_R = "AndR"
    IFF_L = "IffL"
    IFF_R = "IffR"
    MP = "MP"
    DIA_PATH_L = "DiaPathL"
    DIA_PATH_R = "DiaPathR"
    S1_GEN = "S1Gen"
    S2_GEN = "S2Gen"
    S3_GEN = "S3Gen"
    AT_B = "AtB"
    AT_CMP_L = "AtCmpL"
    AT_CMP_R = "AtCmpR"
    CMP_B = "CmpB"
    BOX_CMP_L = "BoxCmpL"
    BOX_CMP_R = "BoxCmpR"


@dataclass(frozen=True)
class InverseRequest:
    """Invert `rule` at `instance` using a derivation of its conclusion."""
    rule: RuleId
    instance: RuleParams
    given: Derivation


# Shape helpers

def _one(rule: DerivedRuleId, params: RuleParams, n: int = 1) -> tuple:
    if len(params.principal) != n:
        raise ParamShape(rule.value, f"expects {n} principal formula(s)")
    return params.principal


def _need(rule: DerivedRuleId, ok: bool, what: str) -> None:
    if not ok:
        raise ParamShape(rule.value, what)


def _sat_body(rule: DerivedRuleId, f: LabeledExpr, kind, what: str):
    _need(rule, isinstance(f, Sat) and isinstance(f.body, kind), f"{print_labeled(f)} is not {what}")
    return f.body


def _neg_body(rule: DerivedRuleId, f: LabeledExpr) -> NodeExpr:
    body = _sat_body(rule, f, Imp, "a negation")
    _need(rule, body.rhs == BOT, f"{print_labeled(f)} is not a negation")
    return body.lhs


def _conj_parts(rule: DerivedRuleId, f: LabeledExpr) -> tuple[NodeExpr, NodeExpr]:
    parts = split_conj(f.body) if isinstance(f, Sat) else None
    _need(rule, parts is not None, f"{print_labeled(f)} is not a conjunction")
    return parts


def _iff_parts(rule: DerivedRuleId, f: LabeledExpr) -> tuple[NodeExpr, NodeExpr]:
    left, right = _conj_parts(rule, f)
    ok = isinstance(left, Imp) and isinstance(right, Imp) and left.lhs == right.rhs and left.rhs == right.lhs
    _need(rule, ok, f"{print_labeled(f)} is not a biconditional")
    return left.lhs, left.rhs


def _box_parts(rule: DerivedRuleId, f: LabeledExpr):
    """(inner, (label, pol, sort, α, β)) for @i[α ▲ β] = @i~<α ▼ β>."""
    lhs = _neg_body(rule, f)
    _need(rule, isinstance(lhs, Cmp), f"{print_labeled(f)} is not a box comparison")
    inner = labeled(f.i, lhs)
    label, pol, sort, left, right = cmp_parts(inner)
    return inner, (label, pol.flip(), sort, left, right)


def _path(rule: DerivedRuleId, params: RuleParams) -> PathExpr:
    _need(rule, params.path is not None, "missing path")
    return params.path


def _dia_body(rule: DerivedRuleId, f: LabeledExpr, path: PathExpr) -> NodeExpr:
    body = undia(path, f.body) if isinstance(f, Sat) else None
    _need(rule, body is not None, f"{print_labeled(f)} is not a diamond over the given path")
    return body


def _in(rule: DerivedRuleId, f: LabeledExpr, side, where: str) -> None:
    _need(rule, f in side, f"{print_labeled(f)} is not in the {where}")


def premisses_of(rule: DerivedRuleId, conclusion: Sequent, params: RuleParams) -> List[Sequent]:
    """The premiss sequents of a derived rule instance.

    AtCmpL and AtCmpR return the conclusion itself: sequents store a comparison
    between named points in one normal form whatever label it was written under.
    """
    rule = DerivedRuleId(rule)
    c = conclusion
    if rule is DerivedRuleId.AX_GEN:
        (f,) = _one(rule, params)
        _in(rule, f, c.ante, "antecedent")
        _in(rule, f, c.cons, "consequent")
        return []
    if rule is DerivedRuleId.TOP_L:
        (f,) = _one(rule, params)
        _need(rule, isinstance(f, Sat) and f.body == top(), f"{print_labeled(f)} is not @i true")
        return [c.add_left(f)]
    if rule is DerivedRuleId.NEG_L:
        (f,) = _one(rule, params)
        body = _neg_body(rule, f)
        _in(rule, f, c.ante, "antecedent")
        return [c.drop_left(f).add_right(labeled(f.i, body))]
    if rule is DerivedRuleId.NEG_R:
        (f,) = _one(rule, params)
        body = _neg_body(rule, f)
        _in(rule, f, c.cons, "consequent")
        return [c.drop_right(f).add_left(labeled(f.i, body))]
    if rule is DerivedRuleId.AND_L:
        (f,) = _one(rule, params)
        x, y = _conj_parts(rule, f)
        _in(rule, f, c.ante, "antecedent")
        return [c.drop_left(f).add_left(labeled(f.i, x), labeled(f.i, y))]
    if rule is DerivedRuleId.AND_R:
        (f,) = _one(rule, params)
        x, y = _conj_parts(rule, f)
        _in(rule, f, c.cons, "consequent")
        base = c.drop_right(f)
        return [base.add_right(labeled(f.i, x)), base.add_right(labeled(f.i, y))]
    if rule is DerivedRuleId.IFF_L:
        (f,) = _one(rule, params)
        x, y = _iff_parts(rule, f)
        _in(rule, f, c.ante, "antecedent")
        base = c.drop_left(f)
        both = (labeled(f.i, x), labeled(f.i, y))
        return [base.add_left(*both), base.add_right(*both)]
    if rule is DerivedRuleId.IFF_R:
        (f,) = _one(rule, params)
        x, y = _iff_parts(rule, f)
        _in(rule, f, c.cons, "consequent")
        base = c.drop_right(f)
        lx, ly = labeled(f.i, x), labeled(f.i, y)
        return [base.add_left(lx).add_right(ly), base.add_left(ly).add_right(lx)]
    if rule is DerivedRuleId.MP:
        (f,) = _one(rule, params)
        body = _sat_body(rule, f, Imp, "an implication")
        goal = labeled(f.i, body.rhs)
        _in(rule, goal, c.cons, "consequent")
        base = c.drop_right(goal)
        return [base.add_right(labeled(f.i, body.lhs)), base.add_right(f)]
    if rule is DerivedRuleId.DIA_PATH_L:
        (f,) = _one(rule, params)
        path = _path(rule, params)
        body = _dia_body(rule, f, path)
        _in(rule, f, c.ante, "antecedent")
        _need(rule, len(params.fresh) == 1, "expects one fresh nominal")
        (j,) = params.fresh
        return [c.drop_left(f).add_left(labeled(f.i, dia(path, Nom(j))), labeled(j, body))]
    if rule is DerivedRuleId.DIA_PATH_R:
        (f,) = _one(rule, params)
        path = _path(rule, params)
        body = _dia_body(rule, f, path)
        _in(rule, f, c.cons, "consequent")
        _need(rule, len(params.witnesses) == 1, "expects one witness")
        (w,) = params.witnesses
        j = witness_target(f.i, path, w)
        _need(rule, j is not None, f"{print_labeled(w)} is not @{f.i}<{path}>j")
        _in(rule, w, c.ante, "antecedent")
        return [c.add_right(labeled(j, body))]
    if rule is DerivedRuleId.S1_GEN:
        link, g = _one(rule, params, 2)
        _sat_body(rule, link, Nom, "of the form @i j")
        _in(rule, link, c.ante, "antecedent")
        _in(rule, g, c.ante, "antecedent")
        if isinstance(g, DataCmp):
            return [c]
        _need(rule, g.i == link.i, f"{print_labeled(g)} is not labelled by {link.i}")
        return [c.add_left(labeled(link.body.i, g.body))]
    if rule is DerivedRuleId.S2_GEN:
        link, w = _one(rule, params, 2)
        path = _path(rule, params)
        _sat_body(rule, link, Nom, "of the form @j k")
        _need(rule, isinstance(w, Sat) and witness_target(w.i, path, w) == link.i,
              f"{print_labeled(w)} is not @i<{path}>{link.i}")
        _in(rule, link, c.ante, "antecedent")
        _in(rule, w, c.ante, "antecedent")
        return [c.add_left(labeled(w.i, dia(path, link.body)))]
    if rule is DerivedRuleId.S3_GEN:
        link, g = _one(rule, params, 2)
        _sat_body(rule, link, Nom, "of the form @i j")
        _need(rule, isinstance(g, DataCmp) and g.i == link.i, f"{print_labeled(g)} is not <{link.i} ▲ k>")
        _in(rule, link, c.ante, "antecedent")
        _in(rule, g, c.ante, "antecedent")
        return [c.add_left(DataCmp(g.pol, g.sort, link.body.i, g.j))]
    if rule is DerivedRuleId.AT_B:
        (f,) = _one(rule, params)
        _sat_body(rule, f, Nom, "of the form @i j")
        _in(rule, f, c.ante, "antecedent")
        return [c.drop_left(f).add_left(Sat(f.body.i, Nom(f.i)))]
    if rule is DerivedRuleId.CMP_B:
        (f,) = _one(rule, params)
        _need(rule, isinstance(f, DataCmp), f"{print_labeled(f)} is not a named comparison")
        _in(rule, f, c.ante, "antecedent")
        return [c.drop_left(f).add_left(DataCmp(f.pol, f.sort, f.j, f.i))]
    if rule in (DerivedRuleId.AT_CMP_L, DerivedRuleId.AT_CMP_R):
        (f,) = _one(rule, params)
        _need(rule, isinstance(f, DataCmp), f"{print_labeled(f)} is not a named comparison")
        side = c.ante if rule is DerivedRuleId.AT_CMP_L else c.cons
        _in(rule, f, side, "antecedent" if rule is DerivedRuleId.AT_CMP_L else "consequent")
        return [c]
    if rule is DerivedRuleId.BOX_CMP_L:
        (f,) = _one(rule, params)
        _, (label, pol, sort, left, right) = _box_parts(rule, f)
        _in(rule, f, c.ante, "antecedent")
        _need(rule, len(params.witnesses) == 2, "expects two witnesses")
        w1, w2 = params.witnesses
        j, k = witness_target(label, left, w1), witness_target(label, right, w2)
        _need(rule, j is not None and k is not None, "witnesses do not match the paths")
        _in(rule, w1, c.ante, "antecedent")
        _in(rule, w2, c.ante, "antecedent")
        return [c.add_left(DataCmp(pol, sort, j, k))]
    if rule is DerivedRuleId.BOX_CMP_R:
        (f,) = _one(rule, params)
        _, (label, pol, sort, left, right) = _box_parts(rule, f)
        _in(rule, f, c.cons, "consequent")
        _need(rule, len(params.fresh) == 2, "expects two fresh nominals")
        j, k = params.fresh
        return [c.drop_right(f)
                .add_left(labeled(label, dia(left, Nom(j))), labeled(label, dia(right, Nom(k))))
                .add_right(DataCmp(pol, sort, j, k))]
    raise ParamShape(str(rule), "unknown derived rule")


# Building blocks shared by the templates

def _from_stub(st: Sequent) -> Builder:
    def build(goal: Sequent) -> Derivation:
        if not st.issubset(goal):
            raise UnexpandableStub(f"premiss '{st}' does not fit '{goal}'")
        return fit(open_leaf(st), goal)
    return build


def _flip(s: Sequent, n: str, m: str, cont: Builder) -> Derivation:
    """From @n m obtain @m n with (@T) and (@5)."""
    want = Sat(m, Nom(n))
    if want in s.ante:
        return cont(s)
    refl = Sat(n, Nom(n))
    return apply(
        RuleId.AT_T, s, principal(refl),
        lambda p: apply(RuleId.AT_5, p, principal(Sat(n, Nom(m)), refl), cont),
    )


def transport(s: Sequent, i: str, j: str, phi: NodeExpr, supply: NameSupply) -> Derivation:
    """Prove s from @i j, @i φ on the left to @j φ on the right."""
    supply.note(s)
    src, dst = labeled(i, phi), labeled(j, phi)
    if src == dst or dst in s.ante:
        return identity(s, dst, supply)
    link = Sat(i, Nom(j))
    if isinstance(phi, (Prop, Bot)) or (isinstance(phi, Dia) and isinstance(phi.body, Nom)):
        return apply(RuleId.S1, s, principal(link, src), lambda p: identity(p, dst, supply))
    if isinstance(phi, Nom):
        return apply(RuleId.AT_5, s, principal(link, src), lambda p: identity(p, dst, supply))
    if isinstance(phi, Dia):
        n = supply.fresh()
        step, moved = Sat(i, Dia(phi.mod, Nom(n))), Sat(j, Dia(phi.mod, Nom(n)))
        inner = labeled(n, phi.body)
        return apply(
            RuleId.DIA_L, s, principal(src, fresh=(n,)),
            lambda p: apply(
                RuleId.S1, p, principal(link, step),
                lambda q: apply(
                    RuleId.DIA_R, q, principal(dst, witnesses=(moved,)),
                    lambda r: identity(r, inner, supply),
                ),
            ),
        )
    if isinstance(phi, Imp):
        return apply(
            RuleId.IMP_R, s, principal(dst),
            lambda p: apply(
                RuleId.IMP_L, p, principal(src),
                lambda q: _flip(q, i, j, lambda r: transport(r, j, i, phi.lhs, supply)),
                lambda q: transport(q, i, j, phi.rhs, supply),
            ),
        )
    if isinstance(phi, Cmp):
        a, b = supply.fresh(), supply.fresh()
        left, right = dia(phi.left, Nom(a)), dia(phi.right, Nom(b))
        v1, v2 = labeled(j, left), labeled(j, right)
        data = DataCmp(phi.pol, phi.sort, a, b)
        return apply(
            RuleId.CMP_L, s, principal(src, fresh=(a, b)),
            lambda p: cut_in(
                p, v1,
                lambda q: transport(q, i, j, left, supply),
                lambda q: cut_in(
                    q, v2,
                    lambda r: transport(r, i, j, right, supply),
                    lambda r: apply(
                        RuleId.CMP_R, r, principal(dst, witnesses=(v1, v2)),
                        lambda t: identity(t, data, supply),
                    ),
                ),
            ),
        )
    # @k ψ
    inner = labeled(phi.i, phi.body)
    return apply(
        RuleId.AT_R, s, principal(dst),
        lambda p: apply(RuleId.AT_L, p, principal(src), lambda q: identity(q, inner, supply)),
    )


def _mono(
    s: Sequent,
    i: str,
    path: PathExpr,
    phi: NodeExpr,
    psi: NodeExpr,
    inner: Callable[[Sequent, str], Derivation],
    supply: NameSupply,
) -> Derivation:
    """From @i<path>φ on the left to @i<path>ψ on the right, given inner at each endpoint."""
    supply.note(s)
    src, dst = labeled(i, dia(path, phi)), labeled(i, dia(path, psi))
    if isinstance(path, Step):
        n = supply.fresh()
        return apply(
            RuleId.DIA_L, s, principal(src, fresh=(n,)),
            lambda p: apply(
                RuleId.DIA_R, p, principal(dst, witnesses=(Sat(i, Dia(path.mod, Nom(n))),)),
                lambda q: inner(q, n),
            ),
        )
    if isinstance(path, Goto):
        return apply(
            RuleId.AT_R, s, principal(dst),
            lambda p: apply(RuleId.AT_L, p, principal(src), lambda q: inner(q, path.nom)),
        )
    if isinstance(path, Test):
        cond = path.cond
        want, have = Sat(i, Imp(cond, neg(psi))), Sat(i, Imp(cond, neg(phi)))
        return apply(
            RuleId.IMP_R, s, principal(dst),
            lambda p: apply(
                RuleId.IMP_L, p, principal(src),
                lambda q: apply(
                    RuleId.IMP_R, q, principal(have),
                    lambda r: apply(
                        RuleId.IMP_R, r, principal(Sat(i, neg(phi))),
                        lambda t: apply(
                            RuleId.IMP_L, t, principal(want),
                            lambda u: identity(u, labeled(i, cond), supply),
                            lambda u: apply(
                                RuleId.IMP_L, u, principal(Sat(i, neg(psi))),
                                lambda v: inner(v, i),
                                close,
                            ),
                        ),
                    ),
                ),
                close,
            ),
        )
    return _mono(
        s, i, path.left, dia(path.right, phi), dia(path.right, psi),
        lambda q, n: _mono(q, n, path.right, phi, psi, inner, supply),
        supply,
    )


def retarget(s: Sequent, i: str, path: PathExpr, j: str, k: str, supply: NameSupply) -> Derivation:
    """From @j k and @i<path>j on the left to @i<path>k on the right."""
    if isinstance(path, Step):
        moved = Sat(i, Dia(path.mod, Nom(k)))
        return apply(
            RuleId.S2, s, principal(Sat(j, Nom(k)), Sat(i, Dia(path.mod, Nom(j)))),
            lambda p: identity(p, moved, supply),
        )

    def inner(q: Sequent, n: str) -> Derivation:
        if n == j:
            return close(q)
        return _flip(q, n, j, lambda r: apply(
            RuleId.AT_5, r, principal(Sat(j, Nom(n)), Sat(j, Nom(k))), close,
        ))

    return _mono(s, i, path, Nom(j), Nom(k), inner, supply)


def reach(s: Sequent, i: str, path: PathExpr, n: str, chi: NodeExpr, supply: NameSupply) -> Derivation:
    """From @i<path>n and @n χ on the left to @i<path>χ on the right."""
    def inner(q: Sequent, m: str) -> Derivation:
        if m == n:
            return identity(q, labeled(n, chi), supply)
        return _flip(q, m, n, lambda r: transport(r, n, m, chi, supply))

    return _mono(s, i, path, Nom(n), chi, inner, supply)


def _conj_intro(s: Sequent, i: str, x: NodeExpr, y: NodeExpr, supply: NameSupply) -> Derivation:
    """From @i x and @i y on the left to @i(x & y) on the right."""
    goal, inner = Sat(i, conj(x, y)), Sat(i, Imp(x, neg(y)))
    return apply(
        RuleId.IMP_R, s, principal(goal),
        lambda p: apply(
            RuleId.IMP_L, p, principal(inner),
            lambda q: identity(q, labeled(i, x), supply),
            lambda q: apply(
                RuleId.IMP_L, q, principal(Sat(i, neg(y))),
                lambda r: identity(r, labeled(i, y), supply),
                close,
            ),
        ),
    )


def _dia_path_l(
    s: Sequent,
    i: str,
    path: PathExpr,
    phi: NodeExpr,
    j: str,
    cont: Builder,
    supply: NameSupply,
    keep: bool = False,
) -> Derivation:
    """Unfold @i<path>φ into @i<path>j and @j φ, leftmost segment first."""
    supply.note(s, j)
    src = labeled(i, dia(path, phi))
    target = labeled(j, phi)
    if isinstance(path, Step):
        return apply(RuleId.DIA_L, s, principal(src, fresh=(j,), keep=keep), cont)
    if isinstance(path, Goto):
        m = path.nom
        link, hop = Sat(m, Nom(j)), Sat(i, dia(path, Nom(j)))
        return apply(
            RuleId.AT_L, s, principal(src, keep=keep),
            lambda p: apply(
                RuleId.NOM_FRESH, p, principal(link, fresh=(j,)),
                lambda q: cut_in(
                    q, target,
                    lambda r: transport(r, m, j, phi, supply),
                    lambda r: cut_in(
                        r, hop,
                        lambda t: apply(RuleId.AT_R, t, principal(hop), close),
                        cont,
                    ),
                ),
            ),
        )
    if isinstance(path, Test):
        cond = path.cond
        link, hop = Sat(i, Nom(j)), labeled(i, dia(path, Nom(j)))
        return apply(
            RuleId.IMP_L, s, principal(src, keep=keep),
            lambda p: apply(
                RuleId.IMP_R, p, principal(Sat(i, Imp(cond, neg(phi)))),
                lambda q: apply(
                    RuleId.IMP_R, q, principal(Sat(i, neg(phi))),
                    lambda r: apply(
                        RuleId.NOM_FRESH, r, principal(link, fresh=(j,)),
                        lambda t: cut_in(
                            t, target,
                            lambda u: transport(u, i, j, phi, supply),
                            lambda u: cut_in(
                                u, hop,
                                lambda v: _conj_intro(v, i, cond, Nom(j), supply),
                                cont,
                            ),
                        ),
                    ),
                ),
            ),
            close,
        )
    m = supply.fresh()
    rest = dia(path.right, Nom(j))
    whole = labeled(i, dia(path.left, rest))
    return _dia_path_l(
        s, i, path.left, dia(path.right, phi), m,
        lambda p: _dia_path_l(
            p, m, path.right, phi, j,
            lambda q: cut_in(q, whole, lambda r: reach(r, i, path.left, m, rest, supply), cont),
            supply, keep=True,
        ),
        supply, keep=keep,
    )


# Templates

def _expand(rule: DerivedRuleId, c: Sequent, params: RuleParams, premiss_stubs: Sequence[Sequent],
            supply: NameSupply) -> Derivation:
    stubs = [_from_stub(st) for st in premiss_stubs]
    if rule is DerivedRuleId.AX_GEN:
        return identity(c, params.principal[0], supply)

    if rule is DerivedRuleId.TOP_L:
        (f,) = params.principal
        return cut_in(
            c, f,
            lambda p: apply(RuleId.IMP_R, p, principal(f), close),
            stubs[0],
        )

    if rule is DerivedRuleId.NEG_L:
        (f,) = params.principal
        return apply(RuleId.IMP_L, c, principal(f), stubs[0], close)

    if rule is DerivedRuleId.NEG_R:
        (f,) = params.principal
        return apply(RuleId.IMP_R, c, principal(f), stubs[0])

    if rule is DerivedRuleId.AND_L:
        (f,) = params.principal
        x, y = split_conj(f.body)
        return apply(
            RuleId.IMP_L, c, principal(f),
            lambda p: apply(
                RuleId.IMP_R, p, principal(Sat(f.i, Imp(x, neg(y)))),
                lambda q: apply(RuleId.IMP_R, q, principal(Sat(f.i, neg(y))), stubs[0]),
            ),
            close,
        )

    if rule is DerivedRuleId.AND_R:
        (f,) = params.principal
        x, y = split_conj(f.body)
        return apply(
            RuleId.IMP_R, c, principal(f),
            lambda p: apply(
                RuleId.IMP_L, p, principal(Sat(f.i, Imp(x, neg(y)))),
                stubs[0],
                lambda q: apply(RuleId.IMP_L, q, principal(Sat(f.i, neg(y))), stubs[1], close),
            ),
        )

    if rule is DerivedRuleId.IFF_L:
        (f,) = params.principal
        x, y = _iff_parts(rule, f)
        fwd, bwd = Sat(f.i, Imp(x, y)), Sat(f.i, Imp(y, x))
        lx, ly = labeled(f.i, x), labeled(f.i, y)
        return apply(
            RuleId.IMP_L, c, principal(f),
            lambda p: apply(
                RuleId.IMP_R, p, principal(Sat(f.i, Imp(Imp(x, y), neg(Imp(y, x))))),
                lambda q: apply(
                    RuleId.IMP_R, q, principal(Sat(f.i, neg(Imp(y, x)))),
                    lambda r: apply(
                        RuleId.IMP_L, r, principal(bwd),
                        lambda t: apply(
                            RuleId.IMP_L, t, principal(fwd),
                            stubs[1],
                            lambda u: identity(u, ly, supply),
                        ),
                        lambda t: apply(
                            RuleId.IMP_L, t, principal(fwd),
                            lambda u: identity(u, lx, supply),
                            stubs[0],
                        ),
                    ),
                ),
            ),
            close,
        )

    if rule is DerivedRuleId.IFF_R:
        (f,) = params.principal
        x, y = _iff_parts(rule, f)
        inner = Sat(f.i, Imp(Imp(x, y), neg(Imp(y, x))))
        return apply(
            RuleId.IMP_R, c, principal(f),
            lambda p: apply(
                RuleId.IMP_L, p, principal(inner),
                lambda q: apply(RuleId.IMP_R, q, principal(Sat(f.i, Imp(x, y))), stubs[0]),
                lambda q: apply(
                    RuleId.IMP_L, q, principal(Sat(f.i, neg(Imp(y, x)))),
                    lambda r: apply(RuleId.IMP_R, r, principal(Sat(f.i, Imp(y, x))), stubs[1]),
                    close,
                ),
            ),
        )

    if rule is DerivedRuleId.MP:
        (f,) = params.principal
        ante, goal = labeled(f.i, f.body.lhs), labeled(f.i, f.body.rhs)
        minor, major = (open_leaf(st) for st in premiss_stubs)
        minor = fit(minor, minor.conclusion.add_right(ante))
        major = fit(major, major.conclusion.add_right(f))
        elim = apply(
            RuleId.IMP_L, Sequent.of([ante, f], [goal]), principal(f),
            lambda q: identity(q, ante, supply),
            lambda q: identity(q, goal, supply),
        )
        inverse = cut(f, major, elim)
        return fit(cut(ante, minor, inverse), c)

    if rule is DerivedRuleId.DIA_PATH_L:
        (f,) = params.principal
        path = params.path
        return _dia_path_l(c, f.i, path, undia(path, f.body), params.fresh[0], stubs[0], supply)

    if rule is DerivedRuleId.DIA_PATH_R:
        (f,) = params.principal
        path, (w,) = params.path, params.witnesses
        body = undia(path, f.body)
        j = witness_target(f.i, path, w)
        if isinstance(path, Step):
            return apply(RuleId.DIA_R, c, principal(f, witnesses=(w,)), stubs[0])
        return cut_in(c, labeled(j, body), stubs[0], lambda p: reach(p, f.i, path, j, body, supply))

    if rule is DerivedRuleId.S1_GEN:
        link, g = params.principal
        if isinstance(g, DataCmp):
            return stubs[0](c)
        phi, j = g.body, link.body.i
        moved = labeled(j, phi)
        if moved == g or moved in c.ante:
            return stubs[0](c)
        if isinstance(phi, (Prop, Bot)) or (isinstance(phi, Dia) and isinstance(phi.body, Nom)):
            return apply(RuleId.S1, c, principal(link, g), stubs[0])
        if isinstance(phi, Nom):
            return apply(RuleId.AT_5, c, principal(link, g), stubs[0])
        return cut_in(c, moved, lambda p: transport(p, g.i, j, phi, supply), stubs[0])

    if rule is DerivedRuleId.S2_GEN:
        link, w = params.principal
        path = params.path
        if isinstance(path, Step):
            return apply(RuleId.S2, c, principal(link, w), stubs[0])
        moved = labeled(w.i, dia(path, link.body))
        return cut_in(
            c, moved,
            lambda p: retarget(p, w.i, path, link.i, link.body.i, supply),
            stubs[0],
        )

    if rule is DerivedRuleId.S3_GEN:
        link, g = params.principal
        i, j, k = link.i, link.body.i, g.j
        if g.pol is CmpPolarity.EQ:
            return apply(RuleId.S3, c, principal(link, g), stubs[0])
        goal = DataCmp(CmpPolarity.NEQ, g.sort, j, k)
        eq_jk = DataCmp(CmpPolarity.EQ, g.sort, j, k)
        return cut_in(
            c, goal,
            lambda p: apply(
                RuleId.NEQ_R, p, principal(goal),
                lambda q: apply(
                    RuleId.NEQ_L, q, principal(g),
                    lambda r: _flip(r, i, j, lambda t: apply(
                        RuleId.S3, t, principal(Sat(j, Nom(i)), eq_jk), close,
                    )),
                ),
            ),
            stubs[0],
        )

    if rule is DerivedRuleId.AT_B:
        (f,) = params.principal
        return _flip(c, f.i, f.body.i, stubs[0])

    if rule is DerivedRuleId.CMP_B:
        (f,) = params.principal
        i, j = f.i, f.j
        if f.pol is CmpPolarity.EQ:
            refl = DataCmp(CmpPolarity.EQ, f.sort, i, i)
            return apply(
                RuleId.EQ_T, c, principal(refl),
                lambda p: apply(RuleId.EQ_5, p, principal(f, refl), stubs[0]),
            )
        swapped = DataCmp(CmpPolarity.NEQ, f.sort, j, i)
        refl = DataCmp(CmpPolarity.EQ, f.sort, j, j)
        eq_ji = DataCmp(CmpPolarity.EQ, f.sort, j, i)
        return cut_in(
            c, swapped,
            lambda p: apply(
                RuleId.NEQ_R, p, principal(swapped),
                lambda q: apply(
                    RuleId.NEQ_L, q, principal(f),
                    lambda r: apply(
                        RuleId.EQ_T, r, principal(refl),
                        lambda t: apply(RuleId.EQ_5, t, principal(eq_ji, refl), close),
                    ),
                ),
            ),
            stubs[0],
        )

    if rule in (DerivedRuleId.AT_CMP_L, DerivedRuleId.AT_CMP_R):
        # labeled() already turns @k <i: ▲ j:> into <i ▲ j>, so premiss and conclusion coincide
        return stubs[0](c)

    if rule is DerivedRuleId.BOX_CMP_L:
        (f,) = params.principal
        inner, (label, pol, sort, left, right) = _box_parts(rule, f)
        w1, w2 = params.witnesses
        j, k = witness_target(label, left, w1), witness_target(label, right, w2)
        flipped = DataCmp(pol.flip(), sort, j, k)
        wanted = DataCmp(pol, sort, j, k)

        def after_cmp(p: Sequent) -> Derivation:
            if pol is CmpPolarity.EQ:
                return apply(RuleId.NEQ_R, p, principal(flipped), stubs[0])
            return cut_in(
                p, wanted,
                lambda q: apply(RuleId.NEQ_R, q, principal(wanted), close),
                stubs[0],
            )

        return apply(
            RuleId.IMP_L, c, principal(f, keep=True),
            lambda p: apply(RuleId.CMP_R, p, principal(inner, witnesses=(w1, w2)), after_cmp),
            close,
        )

    if rule is DerivedRuleId.BOX_CMP_R:
        (f,) = params.principal
        inner, (label, pol, sort, left, right) = _box_parts(rule, f)
        j, k = params.fresh
        flipped = DataCmp(pol.flip(), sort, j, k)
        wanted = DataCmp(pol, sort, j, k)

        def after_cmp(p: Sequent) -> Derivation:
            if pol is CmpPolarity.EQ:
                return apply(RuleId.NEQ_L, p, principal(flipped), stubs[0])
            return cut_in(
                p, wanted,
                stubs[0],
                lambda q: apply(RuleId.NEQ_L, q, principal(wanted), close),
            )

        return apply(
            RuleId.IMP_R, c, principal(f),
            lambda p: apply(RuleId.CMP_L, p, principal(inner, fresh=(j, k)), after_cmp),
        )

    raise ParamShape(rule.value, "no template")


def expand_derived(
    rule: DerivedRuleId,
    conclusion: Sequent,
    params: RuleParams,
    premiss_stubs: Sequence[Sequent],
    supply: Optional[NameSupply] = None,
) -> Derivation:
    """Core-rule derivation of conclusion whose open leaves are the given premisses."""
    rule = DerivedRuleId(rule)
    expected = premisses_of(rule, conclusion, params)
    if len(premiss_stubs) != len(expected):
        raise UnexpandableStub(f"{rule.value} takes {len(expected)} premiss(es), got {len(premiss_stubs)}")
    for have, want in zip(premiss_stubs, expected):
        if not have.issubset(want):
            raise UnexpandableStub(f"{rule.value}: premiss '{have}' does not match '{want}'")
    supply = supply or NameSupply(conclusion, list(premiss_stubs), list(params.principal),
                                  list(params.witnesses), list(params.fresh))
    d = _expand(rule, conclusion, params, premiss_stubs, supply)
    logger.debug(f"expanded {rule.value} on '{conclusion}'")
    return d


# Inversion

def _invert_one(rule: RuleId, c: Sequent, params: RuleParams, p: Sequent, d: Derivation,
                supply: NameSupply) -> Derivation:
    if c.issubset(p):
        return fit(d, p)
    (f,) = params.principal
    use = lambda q: fit(d, q)  # noqa: E731
    if rule is RuleId.IMP_L:
        x, y = labeled(f.i, f.body.lhs), labeled(f.i, f.body.rhs)
        shared = x if x in p.cons else y
        return cut_in(
            p, f,
            lambda q: apply(RuleId.IMP_R, q, principal(f), lambda r: identity(r, shared, supply)),
            use,
        )
    if rule is RuleId.IMP_R:
        x, y = labeled(f.i, f.body.lhs), labeled(f.i, f.body.rhs)
        return cut_in(
            p, f, use,
            lambda q: apply(
                RuleId.IMP_L, q, principal(f),
                lambda r: identity(r, x, supply),
                lambda r: identity(r, y, supply),
            ),
        )
    if rule is RuleId.AT_L:
        inner = labeled(f.body.i, f.body.body)
        return cut_in(
            p, f,
            lambda q: apply(RuleId.AT_R, q, principal(f), lambda r: identity(r, inner, supply)),
            use,
        )
    if rule is RuleId.AT_R:
        inner = labeled(f.body.i, f.body.body)
        return cut_in(
            p, f, use,
            lambda q: apply(RuleId.AT_L, q, principal(f), lambda r: identity(r, inner, supply)),
        )
    if rule is RuleId.DIA_L:
        (j,) = params.fresh
        w = Sat(f.i, Dia(f.body.mod, Nom(j)))
        inner = labeled(j, f.body.body)
        return cut_in(
            p, f,
            lambda q: apply(RuleId.DIA_R, q, principal(f, witnesses=(w,)), lambda r: identity(r, inner, supply)),
            use,
        )
    if rule is RuleId.CMP_L:
        j, k = params.fresh
        i, pol, sort, left, right = cmp_parts(f)
        w1, w2 = labeled(i, dia(left, Nom(j))), labeled(i, dia(right, Nom(k)))
        data = DataCmp(pol, sort, j, k)
        return cut_in(
            p, f,
            lambda q: apply(RuleId.CMP_R, q, principal(f, witnesses=(w1, w2)), lambda r: identity(r, data, supply)),
            use,
        )
    if rule is RuleId.NEQ_L:
        return cut_in(
            p, f,
            lambda q: apply(RuleId.NEQ_R, q, principal(f), close),
            use,
        )
    if rule is RuleId.NEQ_R:
        return cut_in(
            p, f, use,
            lambda q: apply(RuleId.NEQ_L, q, principal(f), close),
        )
    raise NotARuleInstance(f"{rule.value} has no inverse construction")


def invert(req: InverseRequest) -> List[Derivation]:
    """One derivation per premiss of the rule, each built from the given proof of its conclusion."""
    rule = RuleId(req.rule)
    if rule in (RuleId.CUT, RuleId.WL, RuleId.WR, RuleId.OPEN):
        raise NotARuleInstance(f"{rule.value} is not invertible here")
    c = req.given.conclusion
    try:
        premisses = apply_rule_backward(rule, c, req.instance)
    except KernelError as e:
        raise NotARuleInstance(f"not an instance of {rule.value}: {e}") from e
    supply = NameSupply(req.given, list(req.instance.principal), list(req.instance.fresh))
    return [_invert_one(rule, c, req.instance, p, req.given, supply) for p in premisses]
