"""Bounded backward proof search in G with countermodel fallback."""
import logging
from dataclasses import dataclass, replace
from typing import Iterator, List, Optional, Set, Tuple, Union

from .kernel import (
    Derivation,
    RuleId,
    RuleParams,
    apply_rule_backward,
    check_derivation,
    cmp_parts,
    witness_target,
)
from .semantics import HybridDataModel, find_countermodel
from .sequents import DataCmp, LabeledExpr, Sat, Sequent, labeled, print_labeled
from .syntax import At, Cmp, CmpPolarity, Dia, Goto, Imp, Nom, Prop, Bot, Signature, Step, Test, dia
from .tactics import NameSupply, close_or_identity, principal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Budget:
    """Search limits."""
    max_fresh: int = 4
    max_depth: int = 64
    model_bound: int = 3
    witness_cuts: bool = True


@dataclass
class Proved:
    derivation: Derivation


@dataclass
class Refuted:
    model: HybridDataModel


@dataclass
class Unknown:
    reason: str


ProveResult = Union[Proved, Refuted, Unknown]

SatStep = Tuple[RuleId, Tuple[LabeledExpr, ...], LabeledExpr]


# Saturation

def _sat_nom(f: LabeledExpr) -> bool:
    return isinstance(f, Sat) and isinstance(f.body, Nom)


def _eq(f: LabeledExpr) -> bool:
    return isinstance(f, DataCmp) and f.pol is CmpPolarity.EQ


def saturation_steps(s: Sequent, sig: Optional[Signature] = None) -> Iterator[SatStep]:
    """Every (rule, principals, added) of the closure rules that applies to s's antecedent."""
    sig = s.signature() if sig is None else sig.union(s.signature())
    noms, sorts = sorted(sig.noms), sorted(sig.cmps)
    ante = s.sorted_ante()
    for i in noms:
        refl = Sat(i, Nom(i))
        yield RuleId.AT_T, (refl,), refl
    for c in sorts:
        for i in noms:
            refl = DataCmp(CmpPolarity.EQ, c, i, i)
            yield RuleId.EQ_T, (refl,), refl
    links = [f for f in ante if _sat_nom(f)]
    eqs = [f for f in ante if _eq(f)]
    for f in links:
        for g in ante:
            if not isinstance(g, Sat) or g.i != f.i:
                continue
            body = g.body
            if isinstance(body, Nom):
                yield RuleId.AT_5, (f, g), Sat(f.body.i, body)
            elif isinstance(body, (Prop, Bot)) or (isinstance(body, Dia) and isinstance(body.body, Nom)):
                yield RuleId.S1, (f, g), Sat(f.body.i, body)
        for g in ante:
            if isinstance(g, Sat) and isinstance(g.body, Dia) and g.body.body == Nom(f.i):
                yield RuleId.S2, (f, g), Sat(g.i, Dia(g.body.mod, f.body))
        for g in eqs:
            if g.i == f.i:
                yield RuleId.S3, (f, g), DataCmp(CmpPolarity.EQ, g.sort, f.body.i, g.j)
    for f in eqs:
        for g in eqs:
            if g.i == f.i and g.sort == f.sort:
                yield RuleId.EQ_5, (f, g), DataCmp(CmpPolarity.EQ, f.sort, f.j, g.j)


def _saturation_chain(s: Sequent, sig: Optional[Signature] = None) -> Tuple[Sequent, List[Tuple[Sequent, RuleId, tuple]]]:
    chain = []
    current = s
    while True:
        new = []
        seen = set()
        for rule, ps, added in saturation_steps(current, sig):
            if added in current.ante or added in seen:
                continue
            seen.add(added)
            new.append((rule, ps, added))
        if not new:
            return current, chain
        for rule, ps, added in new:
            chain.append((current, rule, ps))
            current = current.add_left(added)


def saturate(s: Sequent, sig: Optional[Signature] = None) -> Sequent:
    """Least fixpoint of the antecedent under (@T), (@5), (S1)-(S3), (EqT), (Eq5)."""
    return _saturation_chain(s, sig)[0]


# Search

@dataclass(frozen=True)
class _Branch:
    depth: int = 0
    fresh_used: int = 0
    expanded: frozenset = frozenset()
    instantiated: frozenset = frozenset()
    witness_cuts: bool = True

    def deeper(self, **kw) -> "_Branch":
        return replace(self, depth=self.depth + 1, **kw)


_LEFT_KEEP = (RuleId.AT_L, RuleId.DIA_L, RuleId.CMP_L)


class _Search:
    def __init__(self, budget: Budget, supply: NameSupply):
        self.budget = budget
        self.supply = supply
        self.exhausted: Set[str] = set()

    def run(self, s: Sequent, b: _Branch) -> Optional[Derivation]:
        leaf = close_or_identity(s, self.supply)
        if leaf is not None:
            return leaf
        if b.depth >= self.budget.max_depth:
            self.exhausted.add("max_depth")
            return None

        top, chain = _saturation_chain(s)
        if chain:
            d = self.run(top, b)
            if d is None:
                return None
            for before, rule, ps in reversed(chain):
                d = Derivation(before, rule, principal(*ps), (d,))
            return d

        for f in s.sorted_cons():
            rule = _right_rule(f)
            if rule is not None:
                logger.debug(f"{rule.value} on {print_labeled(f)}")
                return self._one(s, rule, principal(f), b.deeper())

        for f in s.sorted_ante():
            if f in b.expanded:
                continue
            if isinstance(f, DataCmp) and f.pol is CmpPolarity.NEQ:
                return self._one(s, RuleId.NEQ_L, principal(f), b.deeper())
            if not isinstance(f, Sat):
                continue
            body = f.body
            if isinstance(body, At):
                return self._one(s, RuleId.AT_L, principal(f, keep=True), b.deeper(expanded=b.expanded | {f}))
            if isinstance(body, Dia) and not isinstance(body.body, Nom):
                d = self._eigen(s, RuleId.DIA_L, f, 1, b)
                if d is not False:
                    return d
            if isinstance(body, Cmp):
                d = self._eigen(s, RuleId.CMP_L, f, 2, b)
                if d is not False:
                    return d

        d = self._instantiate(s, b)
        if d is not False:
            return d

        for f in s.sorted_ante():
            if f not in b.expanded and isinstance(f, Sat) and isinstance(f.body, Imp):
                params = principal(f, keep=True)
                nb = b.deeper(expanded=b.expanded | {f})
                logger.debug(f"ImpL on {print_labeled(f)}")
                left = self.run(s.add_right(labeled(f.i, f.body.lhs)), nb)
                if left is None:
                    return None
                right = self.run(s.add_left(labeled(f.i, f.body.rhs)), nb)
                if right is None:
                    return None
                return Derivation(s, RuleId.IMP_L, params, (left, right))

        if b.witness_cuts and self.budget.witness_cuts:
            return self._witness_cut(s, b)
        return None

    def _one(self, s: Sequent, rule: RuleId, params: RuleParams, b: _Branch) -> Optional[Derivation]:
        (p,) = apply_rule_backward(rule, s, params)
        d = self.run(p, b)
        return None if d is None else Derivation(s, rule, params, (d,))

    def _eigen(self, s: Sequent, rule: RuleId, f: LabeledExpr, n: int, b: _Branch):
        """False when the fresh budget forbids the step, else the search result."""
        if b.fresh_used + n > self.budget.max_fresh:
            self.exhausted.add("max_fresh")
            return False
        fresh = tuple(self.supply.fresh() for _ in range(n))
        logger.debug(f"{rule.value} on {print_labeled(f)} with {', '.join(fresh)}")
        params = principal(f, fresh=fresh, keep=True)
        return self._one(s, rule, params, b.deeper(fresh_used=b.fresh_used + n, expanded=b.expanded | {f}))

    def _instances(self, s: Sequent, b: _Branch) -> List[Tuple[LabeledExpr, Tuple[LabeledExpr, ...], RuleId]]:
        found = []
        ante = s.sorted_ante()
        for f in s.sorted_cons():
            if isinstance(f, Sat) and isinstance(f.body, Dia):
                for w in ante:
                    if witness_target(f.i, Step(f.body.mod), w) is not None:
                        found.append((f, (w,), RuleId.DIA_R))
            elif isinstance(f, Sat) and isinstance(f.body, Cmp):
                i, _, _, left, right = cmp_parts(f)
                lws = [w for w in ante if witness_target(i, left, w) is not None]
                rws = [w for w in ante if witness_target(i, right, w) is not None]
                found.extend((f, (w1, w2), RuleId.CMP_R) for w1 in lws for w2 in rws)
        return [x for x in found if (x[0], x[1]) not in b.instantiated]

    def _instantiate(self, s: Sequent, b: _Branch):
        """Fire every new DiaR/CmpR instance at once; False when there is none."""
        todo = self._instances(s, b)
        if not todo:
            return False
        chain = []
        current = s
        for f, ws, rule in todo:
            params = principal(f, witnesses=ws)
            (nxt,) = apply_rule_backward(rule, current, params)
            chain.append((current, rule, params))
            current = nxt
        done = b.instantiated | {(f, ws) for f, ws, _ in todo}
        d = self.run(current, b.deeper(instantiated=done))
        if d is None:
            return None
        for before, rule, params in reversed(chain):
            d = Derivation(before, rule, params, (d,))
        return d

    def _witness_cut(self, s: Sequent, b: _Branch) -> Optional[Derivation]:
        """Cut in @i<α>x for a comparison whose compound path has no witness yet."""
        noms = sorted(s.nominals())
        for f in s.sorted_cons():
            if not (isinstance(f, Sat) and isinstance(f.body, Cmp)):
                continue
            i, _, _, left, right = cmp_parts(f)
            for path in (left, right):
                if isinstance(path, Step):
                    continue
                if any(witness_target(i, path, w) is not None for w in s.ante):
                    continue
                if isinstance(path, Test):
                    targets = [i]
                elif isinstance(path, Goto):
                    targets = [path.nom]
                else:
                    targets = noms
                for x in targets:
                    w = labeled(i, dia(path, Nom(x)))
                    nb = b.deeper(witness_cuts=False)
                    proof_w = self.run(s.add_right(w), nb)
                    if proof_w is None:
                        continue
                    logger.debug(f"witness cut on {print_labeled(w)}")
                    rest = self.run(s.add_left(w), b.deeper())
                    if rest is not None:
                        return Derivation(s, RuleId.CUT, RuleParams(cut=w), (proof_w, rest))
        return None


def _right_rule(f: LabeledExpr) -> Optional[RuleId]:
    if isinstance(f, DataCmp):
        return RuleId.NEQ_R if f.pol is CmpPolarity.NEQ else None
    if isinstance(f.body, Imp):
        return RuleId.IMP_R
    if isinstance(f.body, At):
        return RuleId.AT_R
    return None


def find_proof(s: Sequent, budget: Optional[Budget] = None) -> Optional[Derivation]:
    """A checker-proved derivation of s within budget, or None."""
    budget = budget or Budget()
    search = _Search(budget, NameSupply(s))
    d = search.run(s, _Branch(witness_cuts=budget.witness_cuts))
    if d is None:
        return None
    report = check_derivation(d)
    if not report.proved:
        logger.warning(f"search produced an invalid derivation for '{s}': {report.summary()}")
        return None
    return d


def prove(s: Sequent, budget: Optional[Budget] = None) -> ProveResult:
    """Proved, Refuted or Unknown naming the budget that ran out."""
    budget = budget or Budget()
    search = _Search(budget, NameSupply(s))
    d = search.run(s, _Branch(witness_cuts=budget.witness_cuts))
    if d is not None:
        report = check_derivation(d)
        if report.proved:
            logger.info(f"proved '{s}' ({report.node_count} nodes, cuts: {report.cut_count})")
            return Proved(d)
        logger.warning(f"search produced an invalid derivation for '{s}': {report.summary()}")
    m = find_countermodel(s, budget.model_bound)
    if m is not None:
        logger.info(f"refuted '{s}' with {m.n_nodes} node(s)")
        return Refuted(m)
    reason = min(search.exhausted) if search.exhausted else "model_bound"
    logger.warning(f"no verdict for '{s}': {reason} exhausted")
    return Unknown(reason)


def prove_propositional(s: Sequent) -> Optional[Derivation]:
    """Search with ImpL, ImpR, Bot and identity only; modal formulas are atoms."""
    supply = NameSupply(s)

    def go(q: Sequent) -> Optional[Derivation]:
        leaf = close_or_identity(q, supply)
        if leaf is not None:
            return leaf
        for f in q.sorted_cons():
            if isinstance(f, Sat) and isinstance(f.body, Imp):
                params = principal(f)
                p = q.drop_right(f).add_left(labeled(f.i, f.body.lhs)).add_right(labeled(f.i, f.body.rhs))
                d = go(p)
                return None if d is None else Derivation(q, RuleId.IMP_R, params, (d,))
        for f in q.sorted_ante():
            if isinstance(f, Sat) and isinstance(f.body, Imp):
                params = principal(f)
                base = q.drop_left(f)
                left = go(base.add_right(labeled(f.i, f.body.lhs)))
                if left is None:
                    return None
                right = go(base.add_left(labeled(f.i, f.body.rhs)))
                return None if right is None else Derivation(q, RuleId.IMP_L, params, (left, right))
        return None

    return go(s)
