"""Fixed G derivations of the axiom schemas of H.

Every schema gets one derivation template built from the primitive rules and
the derived rules of :mod:`hxpathd.meta`. Nothing here searches: a template
either fits the instance or raises TemplateError.
"""
import logging
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

from .errors import TemplateError
from .kernel import Derivation, RuleId, RuleParams, cmp_parts
from .meta import DerivedRuleId, expand_derived, premisses_of, transport
from .sequents import DataCmp, LabeledExpr, Sat, Sequent, labeled, print_labeled
from .syntax import (
    At,
    Cmp,
    CmpPolarity,
    Comp,
    Goto,
    Imp,
    NodeExpr,
    Nom,
    PathExpr,
    Test,
    conj,
    dia,
    neg,
    split_conj,
    top,
    undia,
)
from .tactics import Builder, NameSupply, apply, close_or_identity, cut_in, graft, identity, principal

logger = logging.getLogger(__name__)

EQ, NEQ = CmpPolarity.EQ, CmpPolarity.NEQ

# (goal, source member, member to prove) -> derivation
Move = Callable[[Sequent, Optional[LabeledExpr], LabeledExpr], Derivation]


class _Templates:
    """Derivation builders sharing one name supply."""

    def __init__(self, supply: NameSupply):
        self.supply = supply

    # Plumbing

    def finish(self, q: Sequent) -> Derivation:
        done = close_or_identity(q, self.supply)
        if done is None:
            raise TemplateError(f"open branch '{q}'")
        return done

    def rule(self, rule: RuleId, q: Sequent, params: RuleParams, *builders: Builder) -> Derivation:
        done = close_or_identity(q, self.supply)
        return done if done is not None else apply(rule, q, params, *builders)

    def derived(self, rule: DerivedRuleId, q: Sequent, params: RuleParams, *builders: Builder) -> Derivation:
        done = close_or_identity(q, self.supply)
        if done is not None:
            return done
        stubs = premisses_of(rule, q, params)
        d = expand_derived(rule, q, params, stubs, self.supply)
        return graft(d, {st: build(st) for st, build in zip(stubs, builders)})

    def cut(self, q: Sequent, f: LabeledExpr, left: Builder, right: Builder) -> Derivation:
        done = close_or_identity(q, self.supply)
        return done if done is not None else cut_in(q, f, left, right)

    # Moves between members

    def at_move(self, q: Sequent, src: Optional[LabeledExpr], dst: LabeledExpr) -> Derivation:
        """Prove dst from src by peeling @ on both sides."""
        if dst in q.ante:
            return identity(q, dst, self.supply)
        if isinstance(dst, Sat) and isinstance(dst.body, At):
            inner = labeled(dst.body.i, dst.body.body)
            return self.rule(RuleId.AT_R, q, principal(dst), lambda p: self.at_move(p, src, inner))
        if isinstance(src, Sat) and isinstance(src.body, At):
            inner = labeled(src.body.i, src.body.body)
            return self.rule(RuleId.AT_L, q, principal(src), lambda p: self.at_move(p, inner, dst))
        raise TemplateError(f"cannot reach {print_labeled(dst)} from {print_labeled(src) if src else 'nothing'}")

    def drop_top(self, q: Sequent, have: LabeledExpr, want: LabeledExpr) -> Derivation:
        """From @n (true & φ) to φ."""
        _, rest = split_conj(have.body)
        return self.derived(DerivedRuleId.AND_L, q, principal(have),
                            lambda p: self.at_move(p, labeled(have.i, rest), want))

    def add_top(self, q: Sequent, have: LabeledExpr, want: LabeledExpr) -> Derivation:
        """From φ to @n (true & φ)."""
        return self.conj_move(q, have, want)

    def conj_move(self, q: Sequent, have: Optional[LabeledExpr], want: LabeledExpr) -> Derivation:
        """@n (ψ & φ) from φ, with ψ already assumed or true."""
        first, rest = split_conj(want.body)
        return self.derived(
            DerivedRuleId.AND_R, q, principal(want),
            lambda p: self.truth(p, labeled(want.i, first)) if first == top() else self.finish(p),
            lambda p: self.at_move(p, have, labeled(want.i, rest)),
        )

    def truth(self, q: Sequent, f: LabeledExpr) -> Derivation:
        return self.rule(RuleId.IMP_R, q, principal(f), self.finish)

    def refl_data(self, q: Sequent, sort: str, x: str) -> Derivation:
        return self.rule(RuleId.EQ_T, q, principal(DataCmp(EQ, sort, x, x)), self.finish)

    # Paths

    def unfold(self, q: Sequent, f: LabeledExpr, path: PathExpr,
               cont: Callable[[Sequent, str, LabeledExpr], Derivation]) -> Derivation:
        """DiaPathL on f with a fresh endpoint n; cont gets n and @i<path>n."""
        n = self.supply.fresh()
        w = labeled(f.i, dia(path, Nom(n)))
        params = RuleParams(principal=(f,), fresh=(n,), path=path)
        return self.derived(DerivedRuleId.DIA_PATH_L, q, params, lambda p: cont(p, n, w))

    def reach_by(self, q: Sequent, f: LabeledExpr, path: PathExpr, w: LabeledExpr, cont: Builder) -> Derivation:
        params = RuleParams(principal=(f,), witnesses=(w,), path=path)
        return self.derived(DerivedRuleId.DIA_PATH_R, q, params, cont)

    def along(self, q: Sequent, path: PathExpr, src: LabeledExpr, dst: LabeledExpr, inner: Move) -> Derivation:
        """@i<path>φ to @i<path>ψ given a move from φ to ψ at the endpoint."""
        have, want = undia(path, src.body), undia(path, dst.body)
        if have is None or want is None:
            raise TemplateError(f"{print_labeled(src)} and {print_labeled(dst)} do not share {path}")
        return self.unfold(q, src, path, lambda p, n, w: self.reach_by(
            p, dst, path, w, lambda r: inner(r, labeled(n, have), labeled(n, want))))

    def along_move(self, path: PathExpr, inner: Move) -> Move:
        return lambda q, src, dst: self.along(q, path, src, dst, inner)

    # Comparisons

    def open_cmp(self, q: Sequent, f: LabeledExpr, label: str,
                 cont: Callable[[Sequent, LabeledExpr, LabeledExpr, DataCmp], Derivation]) -> Derivation:
        """CmpL on f; cont sees both witnesses labelled by label."""
        if cmp_parts(f) is None:
            raise TemplateError(f"{print_labeled(f)} is not a comparison")
        x, y = self.supply.fresh(), self.supply.fresh()
        i, pol, sort, left, right = cmp_parts(f)
        w1, w2 = labeled(i, dia(left, Nom(x))), labeled(i, dia(right, Nom(y)))
        u1, u2 = labeled(label, dia(left, Nom(x))), labeled(label, dia(right, Nom(y)))
        data = DataCmp(pol, sort, x, y)

        def relabel(p: Sequent) -> Derivation:
            if (u1, u2) == (w1, w2):
                return cont(p, w1, w2, data)
            return self.cut(
                p, u1, lambda r: self.at_move(r, w1, u1),
                lambda r: self.cut(r, u2, lambda t: self.at_move(t, w2, u2),
                                   lambda t: cont(t, u1, u2, data)),
            )
        return self.rule(RuleId.CMP_L, q, principal(f, fresh=(x, y)), relabel)

    def close_cmp(
        self,
        q: Sequent,
        f: LabeledExpr,
        label: str,
        x: str,
        y: str,
        sources: Sequence[Optional[LabeledExpr]],
        moves: Sequence[Optional[Move]] = (None, None),
        data: Optional[Builder] = None,
    ) -> Derivation:
        """CmpR on f with endpoints x and y, proving each witness from its source first."""
        i, pol, sort, left, right = cmp_parts(f)
        v = (labeled(i, dia(left, Nom(x))), labeled(i, dia(right, Nom(y))))
        u = (labeled(label, dia(left, Nom(x))), labeled(label, dia(right, Nom(y))))

        def provide(k: int) -> Builder:
            move = moves[k]
            if move is None:
                return lambda r: self.at_move(r, sources[k], v[k])
            if u[k] == v[k]:
                return lambda r: move(r, sources[k], v[k])
            return lambda r: self.cut(r, u[k], lambda z: move(z, sources[k], u[k]),
                                      lambda z: self.at_move(z, u[k], v[k]))

        def last(r: Sequent) -> Derivation:
            return self.rule(RuleId.CMP_R, r, principal(f, witnesses=v), data or self.finish)

        def second(r: Sequent) -> Derivation:
            return last(r) if v[1] in r.ante else self.cut(r, v[1], provide(1), last)

        return second(q) if v[0] in q.ante else self.cut(q, v[0], provide(0), second)

    def rewrite_cmp(self, q: Sequent, src: LabeledExpr, dst: LabeledExpr, label: str,
                    moves: Sequence[Optional[Move]] = (None, None), swap: bool = False) -> Derivation:
        """dst on the right from src on the left, endpoint by endpoint."""
        def go(p: Sequent, w1: LabeledExpr, w2: LabeledExpr, data: DataCmp) -> Derivation:
            if not swap:
                return self.close_cmp(p, dst, label, data.i, data.j, (w1, w2), moves)
            return self.close_cmp(
                p, dst, label, data.j, data.i, (w2, w1), moves,
                lambda r: self.derived(DerivedRuleId.CMP_B, r, principal(data), self.finish),
            )
        return self.open_cmp(q, src, label, go)

    def relink(self, q: Sequent, data: DataCmp, left: LabeledExpr, right: LabeledExpr) -> Derivation:
        """<j ▲ k> from <x ▲ y>, @j x and @k y."""
        if isinstance(right.body, At):
            return self.rule(RuleId.AT_L, q, principal(right),
                             lambda p: self.relink(p, data, left, labeled(right.body.i, right.body.body)))
        j, k = left.i, right.i
        moved = DataCmp(data.pol, data.sort, j, data.j)
        back = DataCmp(data.pol, data.sort, data.j, j)
        done = DataCmp(data.pol, data.sort, k, j)
        return self.derived(
            DerivedRuleId.AT_B, q, principal(left),
            lambda p: self.derived(
                DerivedRuleId.S3_GEN, p, principal(Sat(data.i, Nom(j)), data),
                lambda r: self.derived(
                    DerivedRuleId.AT_B, r, principal(right),
                    lambda t: self.derived(
                        DerivedRuleId.CMP_B, t, principal(moved),
                        lambda u: self.derived(
                            DerivedRuleId.S3_GEN, u, principal(Sat(data.j, Nom(k)), back),
                            lambda z: self.derived(DerivedRuleId.CMP_B, z, principal(done), self.finish),
                        ),
                    ),
                ),
            ),
        )

    def iff_sides(self, q: Sequent, f: LabeledExpr, fwd: Builder, bwd: Builder) -> Derivation:
        return self.derived(DerivedRuleId.IFF_R, q, principal(f), fwd, bwd)

    # Schemas. Each takes the instance, its formula and the label g.

    def at_def(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, phi, c = v["i"], v["phi"], v["c"]
        path = Comp(Goto(i), Test(phi))
        lx, ly = Sat(g, At(i, phi)), labeled(g, Cmp(EQ, c, path, path))
        refl = Sat(i, Nom(i))

        def witness(r, _src, w):
            return self.rule(RuleId.AT_R, r, principal(w), lambda t: self.derived(
                DerivedRuleId.AND_R, t, principal(labeled(i, conj(phi, Nom(i)))), self.finish, self.finish))

        def fwd(p):
            return self.rule(RuleId.AT_L, p, principal(lx), lambda r: self.rule(
                RuleId.AT_T, r, principal(refl), lambda t: self.close_cmp(
                    t, ly, g, i, i, (None, None), (witness, witness), lambda u: self.refl_data(u, c, i))))

        def bwd(p):
            return self.open_cmp(p, ly, g, lambda r, w1, w2, data: self.rule(
                RuleId.AT_R, r, principal(lx), lambda t: self.rule(
                    RuleId.AT_L, t, principal(w1), lambda u: self.derived(
                        DerivedRuleId.AND_L, u, principal(labeled(i, conj(phi, Nom(data.i)))), self.finish))))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def dia_def(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha, phi, c = v["alpha"], v["phi"], v["c"]
        path = Comp(alpha, Test(phi))
        lx, ly = labeled(g, dia(alpha, phi)), labeled(g, Cmp(EQ, c, path, path))

        def fwd(p):
            def found(r, n, w):
                def witness(t, _src, target):
                    return self.reach_by(t, target, alpha, w, lambda u: self.derived(
                        DerivedRuleId.AND_R, u, principal(labeled(n, conj(phi, Nom(n)))),
                        self.finish, self.finish))
                return self.rule(RuleId.AT_T, r, principal(Sat(n, Nom(n))), lambda t: self.close_cmp(
                    t, ly, g, n, n, (None, None), (witness, witness), lambda u: self.refl_data(u, c, n)))
            return self.unfold(p, lx, alpha, found)

        def bwd(p):
            return self.open_cmp(p, ly, g, lambda r, w1, w2, data: self.along(
                r, alpha, w1, lx, lambda t, have, want: self.derived(
                    DerivedRuleId.AND_L, t, principal(have), self.finish)))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def k(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha, phi, psi = v["alpha"], v["phi"], v["psi"]
        imp = Imp(phi, psi)
        mid = labeled(g, f.body.rhs)
        outer, hyp, concl = labeled(g, f.body.lhs), labeled(g, mid.body.lhs), labeled(g, mid.body.rhs)
        claim = labeled(g, dia(alpha, neg(psi)))

        def core(q, n):
            return self.derived(
                DerivedRuleId.NEG_R, q, principal(labeled(n, neg(imp))),
                lambda p: self.derived(
                    DerivedRuleId.NEG_R, p, principal(labeled(n, neg(phi))),
                    lambda r: self.rule(
                        RuleId.IMP_L, r, principal(labeled(n, imp)), self.finish,
                        lambda t: self.derived(DerivedRuleId.NEG_L, t, principal(labeled(n, neg(psi))),
                                               self.finish),
                    ),
                ),
            )

        def at_n(r, n, w):
            return self.derived(
                DerivedRuleId.NEG_L, r, principal(outer),
                lambda a: self.derived(
                    DerivedRuleId.NEG_L, a, principal(hyp),
                    lambda b: self.reach_by(
                        b, labeled(g, dia(alpha, neg(imp))), alpha, w,
                        lambda d: self.reach_by(d, labeled(g, dia(alpha, neg(phi))), alpha, w,
                                                lambda e: core(e, n)),
                    ),
                ),
            )
        return self.rule(
            RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
            lambda p: self.rule(
                RuleId.IMP_R, p, principal(mid),
                lambda r: self.derived(DerivedRuleId.NEG_R, r, principal(concl),
                                       lambda t: self.unfold(t, claim, alpha, at_n)),
            ),
        )

    def at_k(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, phi, psi = v["i"], v["phi"], v["psi"]
        mid = labeled(g, f.body.rhs)
        return self.rule(
            RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
            lambda p: self.rule(
                RuleId.IMP_R, p, principal(mid),
                lambda q: self.rule(
                    RuleId.AT_R, q, principal(Sat(g, At(i, psi))),
                    lambda r: self.rule(
                        RuleId.AT_L, r, principal(Sat(g, At(i, Imp(phi, psi)))),
                        lambda t: self.rule(
                            RuleId.AT_L, t, principal(Sat(g, At(i, phi))),
                            lambda u: self.rule(RuleId.IMP_L, u, principal(labeled(i, Imp(phi, psi))),
                                                self.finish, self.finish),
                        ),
                    ),
                ),
            ),
        )

    def at_self_dual(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, phi = v["i"], v["phi"]
        lx, ly = Sat(g, neg(At(i, phi))), Sat(g, At(i, neg(phi)))
        at_phi = Sat(g, At(i, phi))

        def fwd(p):
            return self.rule(RuleId.AT_R, p, principal(ly), lambda q: self.derived(
                DerivedRuleId.NEG_R, q, principal(labeled(i, neg(phi))), lambda r: self.derived(
                    DerivedRuleId.NEG_L, r, principal(lx), lambda t: self.rule(
                        RuleId.AT_R, t, principal(at_phi), self.finish))))

        def bwd(p):
            return self.derived(DerivedRuleId.NEG_R, p, principal(lx), lambda q: self.rule(
                RuleId.AT_L, q, principal(ly), lambda r: self.rule(
                    RuleId.AT_L, r, principal(at_phi), lambda t: self.derived(
                        DerivedRuleId.NEG_L, t, principal(labeled(i, neg(phi))), self.finish))))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def at_intro(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, phi = v["i"], v["phi"]
        both = labeled(g, f.body.rhs)
        ly = Sat(g, At(i, phi))

        def fwd(p):
            return self.rule(RuleId.AT_R, p, principal(ly), lambda q: transport(q, g, i, phi, self.supply))

        def bwd(p):
            return self.rule(RuleId.AT_L, p, principal(ly), lambda q: self.derived(
                DerivedRuleId.AT_B, q, principal(Sat(g, Nom(i))),
                lambda r: transport(r, i, g, phi, self.supply)))
        return self.rule(RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
                         lambda p: self.iff_sides(p, both, fwd, bwd))

    def at_refl(self, v, f: LabeledExpr, g: str) -> Derivation:
        i = v["i"]
        return self.rule(RuleId.AT_R, Sequent.of(cons=[f]), principal(f),
                         lambda p: self.rule(RuleId.AT_T, p, principal(Sat(i, Nom(i))), self.finish))

    def _cmp_iff(self, f: LabeledExpr, g: str, fwd_moves=(None, None), bwd_moves=(None, None),
                 swap: bool = False) -> Derivation:
        x, y = split_conj(f.body)
        lx, ly = labeled(g, x.lhs), labeled(g, x.rhs)
        return self.iff_sides(
            Sequent.of(cons=[f]), f,
            lambda p: self.rewrite_cmp(p, lx, ly, g, fwd_moves, swap),
            lambda p: self.rewrite_cmp(p, ly, lx, g, bwd_moves, swap),
        )

    def comp_assoc(self, v, f: LabeledExpr, g: str) -> Derivation:
        return self._cmp_iff(f, g)

    def comp_neutral(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha = v["alpha"]
        return self._cmp_iff(f, g, (self.along_move(alpha, self.drop_top), None),
                             (self.along_move(alpha, self.add_top), None))

    def comp_neutral_l(self, v, f: LabeledExpr, g: str) -> Derivation:
        return self._cmp_iff(f, g, (self.drop_top, None), (self.add_top, None))

    def comp_neutral_r(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha = v["alpha"]
        return self._cmp_iff(f, g, (self.along_move(alpha, self.drop_top), None),
                             (self.along_move(alpha, self.add_top), None))

    def comp_dist(self, v, f: LabeledExpr, g: str) -> Derivation:
        return self.iff_sides(Sequent.of(cons=[f]), f, self.finish, self.finish)

    def equal(self, v, f: LabeledExpr, g: str) -> Derivation:
        refl = Sat(g, Nom(g))
        return self.rule(RuleId.AT_T, Sequent.of(cons=[f]), principal(refl), lambda p: self.close_cmp(
            p, f, g, g, g, (refl, refl), (self.add_top, self.add_top), lambda q: self.refl_data(q, v["c"], g)))

    def cmp_comm(self, v, f: LabeledExpr, g: str) -> Derivation:
        return self._cmp_iff(f, g, swap=True)

    def eps_trans(self, v, f: LabeledExpr, g: str) -> Derivation:
        c = v["c"]
        both = labeled(g, f.body.lhs)
        first, second = split_conj(f.body.lhs)
        goal_cmp = labeled(g, f.body.rhs)

        def chain(q, d1: DataCmp, d2: DataCmp) -> Derivation:
            a, mid, d, b = d1.i, d1.j, d2.i, d2.j
            return self.rule(
                RuleId.AT_5, q, principal(Sat(g, Nom(d)), Sat(g, Nom(mid))),
                lambda p: self.rule(
                    RuleId.S3, p, principal(Sat(d, Nom(mid)), d2),
                    lambda r: self.rule(
                        RuleId.EQ_T, r, principal(DataCmp(EQ, c, a, a)),
                        lambda t: self.rule(
                            RuleId.EQ_5, t, principal(d1, DataCmp(EQ, c, a, a)),
                            lambda u: self.rule(
                                RuleId.EQ_5, u, principal(DataCmp(EQ, c, mid, a), DataCmp(EQ, c, mid, b)),
                                self.finish,
                            ),
                        ),
                    ),
                ),
            )

        def joined(p, wa, wc, d1):
            return self.open_cmp(p, labeled(g, second), g, lambda r, wd, wb, d2: self.derived(
                DerivedRuleId.AND_L, r, principal(wc), lambda t: self.derived(
                    DerivedRuleId.AND_L, t, principal(wd), lambda u: self.close_cmp(
                        u, goal_cmp, g, d1.i, d2.j, (wa, wb), data=lambda z: chain(z, d1, d2)))))
        return self.rule(
            RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
            lambda p: self.derived(DerivedRuleId.AND_L, p, principal(both),
                                   lambda q: self.open_cmp(q, labeled(g, first), g, joined)),
        )

    def distinct(self, v, f: LabeledExpr, g: str) -> Derivation:
        c = v["c"]
        inner = labeled(g, f.body.lhs)

        def chain(q, x: str, y: str) -> Derivation:
            return self.rule(
                RuleId.EQ_T, q, principal(DataCmp(EQ, c, g, g)),
                lambda p: self.rule(
                    RuleId.S3, p, principal(Sat(g, Nom(x)), DataCmp(EQ, c, g, g)),
                    lambda r: self.rule(
                        RuleId.EQ_T, r, principal(DataCmp(EQ, c, x, x)),
                        lambda t: self.rule(
                            RuleId.EQ_5, t, principal(DataCmp(EQ, c, x, g), DataCmp(EQ, c, x, x)),
                            lambda u: self.rule(
                                RuleId.S3, u, principal(Sat(g, Nom(y)), DataCmp(EQ, c, g, x)),
                                lambda w: self.rule(
                                    RuleId.EQ_T, w, principal(DataCmp(EQ, c, y, y)),
                                    lambda z: self.rule(
                                        RuleId.EQ_5, z,
                                        principal(DataCmp(EQ, c, y, x), DataCmp(EQ, c, y, y)),
                                        self.finish,
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            )

        def opened(p, w1, w2, data):
            return self.derived(DerivedRuleId.AND_L, p, principal(w1), lambda q: self.derived(
                DerivedRuleId.AND_L, q, principal(w2), lambda r: self.rule(
                    RuleId.NEQ_L, r, principal(data), lambda t: chain(t, data.i, data.j))))
        return self.derived(DerivedRuleId.NEG_R, Sequent.of(cons=[f]), principal(f),
                            lambda p: self.open_cmp(p, inner, g, opened))

    def at_data(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, j, c = v["i"], v["j"], v["c"]
        lx = Sat(g, neg(Cmp(EQ, c, Goto(i), Goto(j))))
        ly = DataCmp(NEQ, c, i, j)

        def fwd(p):
            return self.rule(RuleId.NEQ_R, p, principal(ly),
                             lambda q: self.derived(DerivedRuleId.NEG_L, q, principal(lx), self.finish))

        def bwd(p):
            return self.derived(DerivedRuleId.NEG_R, p, principal(lx),
                                lambda q: self.rule(RuleId.NEQ_L, q, principal(ly), self.finish))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def subpath(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha = v["alpha"]
        want = labeled(g, f.body.rhs)
        return self.rule(
            RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
            lambda p: self.open_cmp(p, labeled(g, f.body.lhs), g, lambda q, w1, w2, data: self.along(
                q, alpha, w1, want, lambda r, have, target: self.truth(r, target))),
        )

    def at_cmp_dist(self, v, f: LabeledExpr, g: str) -> Derivation:
        i, alpha, beta = v["i"], v["alpha"], v["beta"]
        x, y = split_conj(f.body)
        lx, ly = labeled(g, x.lhs), labeled(g, x.rhs)
        inner = labeled(i, ly.body.body)

        def fwd(p):
            def opened(q, w1, w2, data):
                return self.rule(RuleId.AT_R, q, principal(ly), lambda r: self.close_cmp(
                    r, inner, i, data.i, data.j, (w1, w2)))
            return self.open_cmp(p, lx, g, opened)

        def bwd(p):
            return self.rule(RuleId.AT_L, p, principal(ly), lambda q: self.open_cmp(
                q, inner, i, lambda r, u1, u2, data: self.close_cmp(r, lx, g, data.i, data.j, (u1, u2))))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def cmp_test(self, v, f: LabeledExpr, g: str) -> Derivation:
        phi = v["phi"]
        x, y = split_conj(f.body)
        lx, ly = labeled(g, x.lhs), labeled(g, x.rhs)
        _, cmp_body = split_conj(ly.body)
        inner = labeled(g, cmp_body)
        alpha = v["alpha"]

        def fwd(p):
            def opened(q, w1, w2, data):
                here = labeled(g, dia(alpha, Nom(data.i)))
                return self.derived(DerivedRuleId.AND_L, q, principal(w1), lambda r: self.derived(
                    DerivedRuleId.AND_R, r, principal(ly), self.finish,
                    lambda t: self.close_cmp(t, inner, g, data.i, data.j, (here, w2))))
            return self.open_cmp(p, lx, g, opened)

        def bwd(p):
            return self.derived(DerivedRuleId.AND_L, p, principal(ly), lambda q: self.open_cmp(
                q, inner, g, lambda r, u1, u2, data: self.close_cmp(
                    r, lx, g, data.i, data.j, (u1, u2), (self.conj_move, None))))
        return self.iff_sides(Sequent.of(cons=[f]), f, fwd, bwd)

    def agree(self, v, f: LabeledExpr, g: str) -> Derivation:
        return self._cmp_iff(f, g)

    def back(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha = v["alpha"]

        def back_move(q, src, dst):
            return self.unfold(q, src, alpha, lambda p, n, w: self.at_move(
                p, labeled(n, undia(alpha, src.body)), dst))
        return self.rule(
            RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
            lambda p: self.rewrite_cmp(p, labeled(g, f.body.lhs), labeled(g, f.body.rhs), g,
                                       (back_move, None)),
        )

    def cmp_comp_dist(self, v, f: LabeledExpr, g: str) -> Derivation:
        alpha = v["alpha"]
        src, target = labeled(g, f.body.lhs), labeled(g, f.body.rhs)

        def at_n(p, n, wn):
            def lift(q, have, dst):
                return self.reach_by(q, dst, alpha, wn, lambda r: self.at_move(
                    r, have, labeled(n, undia(alpha, dst.body))))
            return self.open_cmp(p, labeled(n, undia(alpha, src.body)), n, lambda q, u1, u2, data: self.close_cmp(
                q, target, g, data.i, data.j, (u1, u2), (lift, lift)))
        return self.rule(RuleId.IMP_R, Sequent.of(cons=[f]), principal(f),
                         lambda p: self.unfold(p, src, alpha, at_n))


_TEMPLATES: Dict[str, Callable[[_Templates, Mapping, LabeledExpr, str], Derivation]] = {
    "AtDef": _Templates.at_def,
    "DiaDef": _Templates.dia_def,
    "K": _Templates.k,
    "AtK": _Templates.at_k,
    "AtSelfDual": _Templates.at_self_dual,
    "AtIntro": _Templates.at_intro,
    "AtRefl": _Templates.at_refl,
    "CompAssoc": _Templates.comp_assoc,
    "CompNeutral": _Templates.comp_neutral,
    "CompNeutralL": _Templates.comp_neutral_l,
    "CompNeutralR": _Templates.comp_neutral_r,
    "CompDist": _Templates.comp_dist,
    "Equal": _Templates.equal,
    "CmpComm": _Templates.cmp_comm,
    "EpsTrans": _Templates.eps_trans,
    "Distinct": _Templates.distinct,
    "AtData": _Templates.at_data,
    "Subpath": _Templates.subpath,
    "AtCmpDist": _Templates.at_cmp_dist,
    "CmpTest": _Templates.cmp_test,
    "Agree": _Templates.agree,
    "Back": _Templates.back,
    "CmpCompDist": _Templates.cmp_comp_dist,
}


def templated_schemas() -> Tuple[str, ...]:
    return tuple(_TEMPLATES)


def axiom_derivation(schema: str, inst: Mapping, formula: NodeExpr, label: str,
                     supply: NameSupply) -> Derivation:
    """Derivation of |- @label formula for an instance of schema."""
    build = _TEMPLATES.get(str(getattr(schema, "value", schema)))
    if build is None:
        raise TemplateError(f"no template for {schema}")
    f = labeled(label, formula)
    supply.note(Sequent.of(cons=[f]))
    d = build(_Templates(supply), inst, f, label)
    if d.conclusion != Sequent.of(cons=[f]):
        raise TemplateError(f"template for {schema} concludes '{d.conclusion}'")
    logger.debug(f"{schema} instance derived at {label}")
    return d


def relink_comparison(s: Sequent, data: DataCmp, left: LabeledExpr, right: LabeledExpr,
                      supply: NameSupply) -> Derivation:
    """Prove s, which has <j ▲ k> on the right, from <x ▲ y>, @j x and @k y (or @g @k y)."""
    supply.note(s)
    return _Templates(supply).relink(s, data, left, right)
