"""Cut elimination: complexity measure, single reductions and the elimination loop."""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .errors import CutBudgetExceeded, IrreducibleCut, KernelError, NotACut, UnhandledCase
from .kernel import (
    EIGEN_RULES,
    KEEPABLE,
    RIGHT_RULES,
    Derivation,
    RuleId,
    TreePath,
    apply_rule_backward,
    check_derivation,
    cmp_parts,
    cut_natural,
    derivation_height,
    iter_nodes,
    node_at,
    replace_at,
    witness_target,
)
from .prover import Budget, find_proof
from .sequents import DataCmp, LabeledExpr, Sat, Sequent, labeled, labeled_size, print_labeled
from .syntax import Nom
from .tactics import NameSupply, fit, principal, rename_derivation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class CutComplexity:
    """(size of the cut formula, cut height), ordered lexicographically."""
    k: int
    h: int

    def __str__(self) -> str:
        return f"({self.k},{self.h})"


@dataclass(frozen=True)
class CutStep:
    """One reduction: where, which case, and the complexity before and after."""
    path: TreePath
    case: str
    before: CutComplexity
    after: Optional[CutComplexity] = None

    def trace_line(self) -> str:
        where = "/".join(str(i) for i in self.path) or "root"
        after = str(self.after) if self.after is not None else "-"
        return f"{where} {self.case} {self.before} -> {after}"


def cut_complexity(d: Derivation, cut_path: TreePath) -> CutComplexity:
    node = node_at(d, cut_path)
    if node.rule is not RuleId.CUT:
        raise NotACut(f"node at {cut_path} is {node.rule.value}, not Cut")
    return _complexity(node)


def _complexity(node: Derivation) -> CutComplexity:
    left, right = node.children
    return CutComplexity(labeled_size(node.params.cut), derivation_height(left) + derivation_height(right))


def topmost_cuts(d: Derivation) -> List[Tuple[TreePath, int]]:
    """(path, cut height) of every cut whose premiss derivations are cut-free."""
    nodes = list(iter_nodes(d))
    height: Dict[int, int] = {}
    has_cut: Dict[int, bool] = {}
    found = []
    for path, node in reversed(nodes):
        kids = node.children
        height[id(node)] = 1 + max((height[id(c)] for c in kids), default=0)
        below = any(has_cut[id(c)] for c in kids)
        has_cut[id(node)] = below or node.rule is RuleId.CUT
        if node.rule is RuleId.CUT and not below:
            found.append((path, sum(height[id(c)] for c in kids)))
    return found


def _right_principal(d: Derivation, f: LabeledExpr) -> bool:
    return d.rule in RIGHT_RULES and d.params.principal[:1] == (f,)


def _uses(d: Derivation, f: LabeledExpr) -> bool:
    return f in d.params.principal or f in d.params.witnesses


def _has_cut(d: Derivation) -> bool:
    return any(node.rule is RuleId.CUT for _, node in iter_nodes(d))


class _Research(Exception):
    """Signals that a cut needs the prover instead of a local rewrite."""


@dataclass
class _StepState:
    supply: NameSupply
    # cuts whose premisses are cut-free; the others are measured once they become topmost
    new_cuts: List[CutComplexity] = field(default_factory=list)


class CutEliminator:
    """Runs reductions on the topmost cut of least height until none is left.

    Every reduction must replace its cut by cuts of strictly smaller (k, h);
    a rewrite that cannot do so raises IrreducibleCut. With fallback_search
    the eliminator instead re-proves the goal below such a cut by bounded
    search. That is an extension outside the local reductions and is off
    unless asked for.
    """

    def __init__(self, max_steps: int = 10000, fallback_search: bool = False, budget: Optional[Budget] = None):
        self.max_steps = max_steps
        self.fallback_search = fallback_search
        self.budget = replace(budget or Budget(), witness_cuts=False)
        self.steps: List[CutStep] = []

    # Loop

    def eliminate(self, d: Derivation) -> Derivation:
        report = check_derivation(d)
        if not report.proved:
            raise KernelError("Cut", f"cut elimination needs a proved derivation ({report.summary()})")
        end = d.conclusion
        while True:
            cands = topmost_cuts(d)
            if not cands:
                break
            if len(self.steps) >= self.max_steps:
                raise CutBudgetExceeded(f"{len(self.steps)} reductions without removing every cut")
            path, _ = min(cands, key=lambda c: (c[1], c[0]))
            d, step = self.reduce(d, path)
            logger.debug(f"cut step {step.trace_line()}")
        report = check_derivation(d)
        if not report.proved or report.cut_count or d.conclusion != end:
            raise UnhandledCase("Cut", "Cut", f"result does not verify ({report.summary()})")
        logger.info(f"eliminated cuts in {len(self.steps)} step(s)")
        return d

    def reduce(self, d: Derivation, path: TreePath) -> Tuple[Derivation, CutStep]:
        """Rewrite the cut at path once."""
        node = node_at(d, path)
        if node.rule is not RuleId.CUT:
            raise NotACut(f"node at {path} is {node.rule.value}, not Cut")
        before = _complexity(node)
        state = _StepState(NameSupply(d))
        left, right = node.children
        try:
            case, new = self._reduce(node, state)
            after = max(state.new_cuts) if state.new_cuts else None
            if after is not None and not after < before:
                raise IrreducibleCut(left.rule.value, right.rule.value,
                                     f"{case} on {print_labeled(node.params.cut)} gives {after}, not below {before}")
            d = replace_at(d, path, new)
        except (_Research, IrreducibleCut, KernelError) as e:
            if not self.fallback_search:
                if isinstance(e, UnhandledCase):
                    raise
                raise UnhandledCase(left.rule.value, right.rule.value, str(e)) from e
            logger.warning(f"cut at {path} re-proved by search: {e}")
            case, after = "research", None
            d = self._research(d, path, node, e)
        step = CutStep(path, case, before, after)
        self.steps.append(step)
        return d, step

    # Fallback

    def _research(self, d: Derivation, path: TreePath, node: Derivation, why: Exception) -> Derivation:
        for depth in range(len(path), -1, -1):
            q = path[:depth]
            goal = node_at(d, q).conclusion
            proof = find_proof(goal, self.budget)
            if proof is not None:
                logger.debug(f"re-derived '{goal}' without cut at {q}")
                return replace_at(d, q, proof)
        left, right = node.children
        raise UnhandledCase(left.rule.value, right.rule.value, f"no cut-free re-derivation ({why})")

    # Single reduction

    def _cut(self, state: _StepState, f: LabeledExpr, left: Derivation, right: Derivation,
             target: Optional[Sequent] = None) -> Derivation:
        natural = cut_natural(left.conclusion, right.conclusion, f)
        d = Derivation(natural, RuleId.CUT, principal(cut=f), (left, right))
        if not (_has_cut(left) or _has_cut(right)):
            state.new_cuts.append(_complexity(d))
        return d if target is None else fit(d, target)

    def _reduce(self, node: Derivation, state: _StepState) -> Tuple[str, Derivation]:
        f = node.params.cut
        left, right = node.children
        c = node.conclusion
        if RuleId.OPEN in (left.rule, right.rule):
            raise UnhandledCase(left.rule.value, right.rule.value, "open leaf above a cut")

        if f in c.cons:
            return "absorb", fit(left, c)
        if f in c.ante:
            return "absorb", fit(right, c)

        if left.rule is RuleId.WR and left.params.principal == (f,):
            return "weakening", fit(left.children[0], c)
        if right.rule is RuleId.WL and right.params.principal == (f,):
            return "weakening", fit(right.children[0], c)

        for side in (left, right):
            if side.rule in (RuleId.AX, RuleId.BOT) and side.params.principal[0] != f:
                g = side.params.principal[0]
                return "base", Derivation(c, side.rule, principal(g))

        if not _right_principal(left, f):
            return "permute-left", self._permute(state, f, left, right, c, on_left=True)
        if not _uses(right, f):
            return "permute-right", self._permute(state, f, left, right, c, on_left=False)
        return self._principal(state, f, left, right, c)

    def _permute(self, state: _StepState, f: LabeledExpr, left: Derivation, right: Derivation,
                 c: Sequent, on_left: bool) -> Derivation:
        """Move the cut above the last rule of one premiss derivation."""
        side = left if on_left else right
        if side.rule in (RuleId.WL, RuleId.WR):
            upper = side.children[0]
            pair = (upper, right) if on_left else (left, upper)
            return self._cut(state, f, *pair, target=c)

        if side.rule in EIGEN_RULES and set(side.params.fresh) & c.nominals():
            side = rename_derivation(side, {}, state.supply)

        def wanted(kid: Derivation) -> Sequent:
            s = kid.conclusion
            if on_left and f in s.cons:
                return cut_natural(s, right.conclusion, f)
            if not on_left and f in s.ante:
                return cut_natural(left.conclusion, s, f)
            return s

        params = side.params
        premisses = apply_rule_backward(side.rule, c, params)
        needs = [wanted(k) for k in side.children]
        if side.rule in KEEPABLE and not all(n.issubset(p) for n, p in zip(needs, premisses)):
            params = replace(params, keep=True)
            premisses = apply_rule_backward(side.rule, c, params)

        kids = []
        for kid, need, p in zip(side.children, needs, premisses):
            if need == kid.conclusion:
                kids.append(fit(kid, p))
            elif on_left:
                kids.append(self._cut(state, f, kid, right, target=p))
            else:
                kids.append(self._cut(state, f, left, kid, target=p))
        return Derivation(c, side.rule, params, tuple(kids))

    def _principal(self, state: _StepState, f: LabeledExpr, left: Derivation, right: Derivation,
                   c: Sequent) -> Tuple[str, Derivation]:
        lrule, rrule = left.rule, right.rule

        def clean_left(kid: Derivation) -> Derivation:
            return self._cut(state, f, kid, right) if f in kid.conclusion.cons else kid

        def clean_right(kid: Derivation) -> Derivation:
            return self._cut(state, f, left, kid) if f in kid.conclusion.ante else kid

        # (⟨a⟩R) against any use of @i<a>m: rebuild @i<a>m from @k m with (S2)
        if lrule is RuleId.DIA_R and isinstance(f.body.body, Nom):
            (w,) = left.params.witnesses
            k, m = w.body.body.i, f.body.body.i
            link = Sat(k, Nom(m))
            upper = clean_left(left.children[0])
            x = right.conclusion.drop_left(f).add_left(link, w)
            regen = Derivation(x, RuleId.S2, principal(link, w), (fit(right, x.add_left(f)),))
            return "dia-nominal", self._cut(state, link, upper, regen, target=c)

        if lrule is RuleId.IMP_R and rrule is RuleId.IMP_L and right.params.principal == (f,):
            a, b = labeled(f.i, f.body.lhs), labeled(f.i, f.body.rhs)
            l0 = clean_left(left.children[0])
            r0, r1 = (clean_right(k) for k in right.children)
            inner = self._cut(state, b, l0, r1)
            return "imp", self._cut(state, a, r0, inner, target=c)

        if lrule is RuleId.AT_R and rrule is RuleId.AT_L and right.params.principal == (f,):
            inner = labeled(f.body.i, f.body.body)
            l0, r0 = clean_left(left.children[0]), clean_right(right.children[0])
            return "at", self._cut(state, inner, l0, r0, target=c)

        if lrule is RuleId.NEQ_R and rrule is RuleId.NEQ_L and right.params.principal == (f,):
            l0, r0 = clean_left(left.children[0]), clean_right(right.children[0])
            eq = DataCmp(f.pol.flip(), f.sort, f.i, f.j)
            return "neq", self._cut(state, eq, r0, l0, target=c)

        if lrule is RuleId.DIA_R and rrule is RuleId.DIA_L and right.params.principal == (f,):
            (w,) = left.params.witnesses
            k = w.body.body.i
            (j,) = right.params.fresh
            r0 = rename_derivation(right.children[0], {j: k}, state.supply)
            l0, r0 = clean_left(left.children[0]), clean_right(r0)
            return "dia", self._cut(state, labeled(k, f.body.body), l0, r0, target=c)

        if lrule is RuleId.CMP_R and rrule is RuleId.CMP_L and right.params.principal == (f,):
            i, pol, sort, alpha, beta = cmp_parts(f)
            w1, w2 = left.params.witnesses
            x, y = witness_target(i, alpha, w1), witness_target(i, beta, w2)
            j, k = right.params.fresh
            r0 = rename_derivation(right.children[0], {j: x, k: y}, state.supply)
            l0, r0 = clean_left(left.children[0]), clean_right(r0)
            return "cmp", self._cut(state, DataCmp(pol, sort, x, y), l0, r0, target=c)

        if f in right.params.witnesses:
            # only CmpR reads a compound witness, and no rule of G rebuilds one from its parts
            raise IrreducibleCut(lrule.value, rrule.value, f"{print_labeled(f)} is a path witness")
        raise _Research(f"{lrule.value} against {rrule.value} on {print_labeled(f)}")


def eliminate_cuts(
    d: Derivation,
    max_steps: int = 10000,
    fallback_search: bool = False,
    budget: Optional[Budget] = None,
) -> Derivation:
    """Cut-free derivation of the same end-sequent."""
    return CutEliminator(max_steps, fallback_search, budget).eliminate(d)


def reduce_cut_once(d: Derivation, cut_path: TreePath, fallback_search: bool = False) -> Derivation:
    new, _ = CutEliminator(fallback_search=fallback_search).reduce(d, cut_path)
    return new
