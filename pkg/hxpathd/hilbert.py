"""The Hilbert system H: schemas, deduction checking and translation into G."""
import itertools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .errors import (
    HilbertError,
    HilbertFormatError,
    KernelError,
    ParseError,
    TargetNotFresh,
    TemplateError,
    UnexpandableStub,
)
from .kernel import Derivation, RuleId, RuleParams, check_derivation
from .meta import DerivedRuleId, InverseRequest, expand_derived, invert, premisses_of
from .parser import parse_node, parse_path
from .prover import prove_propositional
from .sequents import DataCmp, Sat, Sequent, labeled
from .syntax import (
    BOT,
    NODE_TYPES,
    PATH_TYPES,
    At,
    Bot,
    Cmp,
    CmpPolarity,
    Comp,
    Dia,
    Goto,
    Imp,
    NodeExpr,
    Nom,
    PathExpr,
    Step,
    Test,
    box,
    conj,
    dia,
    eps,
    iff,
    neg,
    nominals_of,
    path_segments,
    print_node,
    print_path,
    seq_path,
    split_conj,
    top,
)
from .tactics import NameSupply, apply, close, cut_in, fit, given, graft, identity, principal, rename_derivation
from .templates import axiom_derivation, relink_comparison

logger = logging.getLogger(__name__)

EQ, NEQ = CmpPolarity.EQ, CmpPolarity.NEQ


class SchemaId(str, Enum):
    CPL = "CPL"
    AT_DEF = "AtDef"
    DIA_DEF = "DiaDef"
    K = "K"
    AT_K = "AtK"
    AT_SELF_DUAL = "AtSelfDual"
    AT_INTRO = "AtIntro"
    AT_REFL = "AtRefl"
    COMP_ASSOC = "CompAssoc"
    COMP_NEUTRAL = "CompNeutral"
    COMP_NEUTRAL_L = "CompNeutralL"
    COMP_NEUTRAL_R = "CompNeutralR"
    COMP_DIST = "CompDist"
    EQUAL = "Equal"
    CMP_COMM = "CmpComm"
    EPS_TRANS = "EpsTrans"
    DISTINCT = "Distinct"
    AT_DATA = "AtData"
    SUBPATH = "Subpath"
    AT_CMP_DIST = "AtCmpDist"
    CMP_TEST = "CmpTest"
    AGREE = "Agree"
    BACK = "Back"
    CMP_COMP_DIST = "CmpCompDist"

    @property
    def family(self) -> str:
        """Axiom name as listed in H; the three comp-neutral shapes share one."""
        if self in (SchemaId.COMP_NEUTRAL_L, SchemaId.COMP_NEUTRAL_R):
            return SchemaId.COMP_NEUTRAL.value
        return self.value


MetaValue = Union[NodeExpr, PathExpr, str, CmpPolarity]

_VAR_KINDS = {
    "phi": "node", "psi": "node", "chi": "node",
    "alpha": "path", "beta": "path", "gamma": "path", "eta": "path",
    "i": "nominal", "j": "nominal",
    "c": "sort",
    "pol": "polarity",
}


# Steps

@dataclass
class Axiom:
    schema: SchemaId
    inst: Dict[str, MetaValue] = field(default_factory=dict)
    stated: Optional[NodeExpr] = None


@dataclass
class MP:
    source: int
    impl: int
    stated: Optional[NodeExpr] = None


@dataclass
class Nec:
    source: int
    path: PathExpr
    stated: Optional[NodeExpr] = None


@dataclass
class Name:
    source: int
    nominal: str
    stated: Optional[NodeExpr] = None


@dataclass
class Paste:
    source: int
    i: str
    j: str
    stated: Optional[NodeExpr] = None


HilbertStep = Union[Axiom, MP, Nec, Name, Paste]


# Schema instances

def _cmp(v: Dict[str, MetaValue], left: PathExpr, right: PathExpr) -> NodeExpr:
    return Cmp(v["pol"], v["c"], left, right)


def _eq(v: Dict[str, MetaValue], left: PathExpr, right: PathExpr) -> NodeExpr:
    return Cmp(EQ, v["c"], left, right)


_SCHEMAS: Dict[SchemaId, Tuple[Tuple[str, ...], Callable[[Dict[str, MetaValue]], NodeExpr]]] = {
    SchemaId.CPL: (("phi",), lambda v: v["phi"]),
    SchemaId.AT_DEF: (
        ("i", "phi", "c"),
        lambda v: iff(
            At(v["i"], v["phi"]),
            _eq(v, Comp(Goto(v["i"]), Test(v["phi"])), Comp(Goto(v["i"]), Test(v["phi"]))),
        ),
    ),
    SchemaId.DIA_DEF: (
        ("alpha", "phi", "c"),
        lambda v: iff(
            dia(v["alpha"], v["phi"]),
            _eq(v, Comp(v["alpha"], Test(v["phi"])), Comp(v["alpha"], Test(v["phi"]))),
        ),
    ),
    SchemaId.K: (
        ("alpha", "phi", "psi"),
        lambda v: Imp(
            box(v["alpha"], Imp(v["phi"], v["psi"])),
            Imp(box(v["alpha"], v["phi"]), box(v["alpha"], v["psi"])),
        ),
    ),
    SchemaId.AT_K: (
        ("i", "phi", "psi"),
        lambda v: Imp(
            At(v["i"], Imp(v["phi"], v["psi"])),
            Imp(At(v["i"], v["phi"]), At(v["i"], v["psi"])),
        ),
    ),
    SchemaId.AT_SELF_DUAL: (
        ("i", "phi"),
        lambda v: iff(neg(At(v["i"], v["phi"])), At(v["i"], neg(v["phi"]))),
    ),
    SchemaId.AT_INTRO: (
        ("i", "phi"),
        lambda v: Imp(Nom(v["i"]), iff(v["phi"], At(v["i"], v["phi"]))),
    ),
    SchemaId.AT_REFL: (("i",), lambda v: At(v["i"], Nom(v["i"]))),
    SchemaId.COMP_ASSOC: (
        ("alpha", "beta", "gamma", "eta", "pol", "c"),
        lambda v: iff(
            _cmp(v, Comp(Comp(v["alpha"], v["beta"]), v["gamma"]), v["eta"]),
            _cmp(v, Comp(v["alpha"], Comp(v["beta"], v["gamma"])), v["eta"]),
        ),
    ),
    SchemaId.COMP_NEUTRAL: (
        ("alpha", "beta", "gamma", "pol", "c"),
        lambda v: iff(
            _cmp(v, seq_path(v["alpha"], eps(), v["beta"]), v["gamma"]),
            _cmp(v, seq_path(v["alpha"], v["beta"]), v["gamma"]),
        ),
    ),
    SchemaId.COMP_NEUTRAL_L: (
        ("beta", "gamma", "pol", "c"),
        lambda v: iff(_cmp(v, seq_path(eps(), v["beta"]), v["gamma"]), _cmp(v, v["beta"], v["gamma"])),
    ),
    SchemaId.COMP_NEUTRAL_R: (
        ("alpha", "gamma", "pol", "c"),
        lambda v: iff(_cmp(v, seq_path(v["alpha"], eps()), v["gamma"]), _cmp(v, v["alpha"], v["gamma"])),
    ),
    SchemaId.COMP_DIST: (
        ("alpha", "beta", "phi"),
        lambda v: iff(dia(Comp(v["alpha"], v["beta"]), v["phi"]), dia(v["alpha"], dia(v["beta"], v["phi"]))),
    ),
    SchemaId.EQUAL: (("c",), lambda v: _eq(v, eps(), eps())),
    SchemaId.CMP_COMM: (
        ("alpha", "beta", "pol", "c"),
        lambda v: iff(_cmp(v, v["alpha"], v["beta"]), _cmp(v, v["beta"], v["alpha"])),
    ),
    SchemaId.EPS_TRANS: (
        ("alpha", "beta", "c"),
        lambda v: Imp(
            conj(_eq(v, v["alpha"], eps()), _eq(v, eps(), v["beta"])),
            _eq(v, v["alpha"], v["beta"]),
        ),
    ),
    SchemaId.DISTINCT: (("c",), lambda v: neg(Cmp(NEQ, v["c"], eps(), eps()))),
    SchemaId.AT_DATA: (
        ("i", "j", "c"),
        lambda v: iff(
            neg(_eq(v, Goto(v["i"]), Goto(v["j"]))),
            Cmp(NEQ, v["c"], Goto(v["i"]), Goto(v["j"])),
        ),
    ),
    SchemaId.SUBPATH: (
        ("alpha", "beta", "gamma", "pol", "c"),
        lambda v: Imp(_cmp(v, Comp(v["alpha"], v["beta"]), v["gamma"]), dia(v["alpha"], top())),
    ),
    SchemaId.AT_CMP_DIST: (
        ("i", "alpha", "beta", "pol", "c"),
        lambda v: iff(
            _cmp(v, Comp(Goto(v["i"]), v["alpha"]), Comp(Goto(v["i"]), v["beta"])),
            At(v["i"], _cmp(v, v["alpha"], v["beta"])),
        ),
    ),
    SchemaId.CMP_TEST: (
        ("phi", "alpha", "beta", "pol", "c"),
        lambda v: iff(
            _cmp(v, Comp(Test(v["phi"]), v["alpha"]), v["beta"]),
            conj(v["phi"], _cmp(v, v["alpha"], v["beta"])),
        ),
    ),
    SchemaId.AGREE: (
        ("i", "j", "alpha", "beta", "pol", "c"),
        lambda v: iff(
            _cmp(v, seq_path(Goto(v["j"]), Goto(v["i"]), v["alpha"]), v["beta"]),
            _cmp(v, Comp(Goto(v["i"]), v["alpha"]), v["beta"]),
        ),
    ),
    SchemaId.BACK: (
        ("alpha", "i", "beta", "gamma", "pol", "c"),
        lambda v: Imp(
            _cmp(v, seq_path(v["alpha"], Goto(v["i"]), v["beta"]), v["gamma"]),
            _cmp(v, Comp(Goto(v["i"]), v["beta"]), v["gamma"]),
        ),
    ),
    SchemaId.CMP_COMP_DIST: (
        ("alpha", "beta", "gamma", "pol", "c"),
        lambda v: Imp(
            dia(v["alpha"], _cmp(v, v["beta"], v["gamma"])),
            _cmp(v, Comp(v["alpha"], v["beta"]), Comp(v["alpha"], v["gamma"])),
        ),
    ),
}


def schema_vars(schema: SchemaId) -> Tuple[str, ...]:
    return _SCHEMAS[SchemaId(schema)][0]


def _check_value(name: str, value: MetaValue) -> None:
    kind = _VAR_KINDS[name]
    ok = {
        "node": lambda: isinstance(value, NODE_TYPES),
        "path": lambda: isinstance(value, PATH_TYPES),
        "nominal": lambda: isinstance(value, str) and value[:1].isupper(),
        "sort": lambda: isinstance(value, str) and bool(value),
        "polarity": lambda: isinstance(value, CmpPolarity),
    }[kind]()
    if not ok:
        raise HilbertFormatError(f"{name} must be a {kind}, got {value!r}")


def schema_instance(schema: SchemaId, inst: Dict[str, MetaValue]) -> NodeExpr:
    """The axiom formula for an explicit meta-variable assignment."""
    schema = SchemaId(schema)
    wanted, build = _SCHEMAS[schema]
    missing = [v for v in wanted if v not in inst]
    if missing:
        raise HilbertFormatError(f"{schema.value} needs {', '.join(missing)}")
    extra = sorted(set(inst) - set(wanted))
    if extra:
        raise HilbertFormatError(f"{schema.value} does not use {', '.join(extra)}")
    for name in wanted:
        _check_value(name, inst[name])
    return build(inst)


# Tautologies

def _cpl_atoms(e: NodeExpr, out: List[NodeExpr]) -> None:
    if isinstance(e, Imp):
        _cpl_atoms(e.lhs, out)
        _cpl_atoms(e.rhs, out)
    elif not isinstance(e, Bot) and e not in out:
        out.append(e)


def _truth(e: NodeExpr, val: Dict[NodeExpr, bool]) -> bool:
    if isinstance(e, Bot):
        return False
    if isinstance(e, Imp):
        return not _truth(e.lhs, val) or _truth(e.rhs, val)
    return val[e]


def is_cpl_tautology(e: NodeExpr) -> bool:
    """Truth-table check with every maximal non-propositional subformula taken as an atom."""
    atoms: List[NodeExpr] = []
    _cpl_atoms(e, atoms)
    for row in itertools.product((False, True), repeat=len(atoms)):
        if not _truth(e, dict(zip(atoms, row))):
            return False
    return True


# Checking

@dataclass
class HilbertReport:
    ok: bool
    formulas: List[NodeExpr] = field(default_factory=list)
    failure_step: Optional[int] = None
    error: Optional[str] = None

    @property
    def proved(self) -> Optional[NodeExpr]:
        return self.formulas[-1] if self.ok and self.formulas else None

    def summary(self) -> str:
        if self.ok:
            return f"valid, {len(self.formulas)} step(s), proves {print_node(self.proved)}"
        return f"invalid at step {self.failure_step}: {self.error}"


def _earlier(k: int, ref: int, formulas: Sequence[NodeExpr]) -> NodeExpr:
    if not 1 <= ref < k:
        raise HilbertError(k, f"refers to step {ref}, which is not an earlier step")
    return formulas[ref - 1]


def _paste_parts(k: int, premise: NodeExpr, i: str, j: str):
    """(a, pol, sort, α segments, β, φ) of a Paste premise (@i<a>j & <j:α ▲ β>) -> φ."""
    if not isinstance(premise, Imp):
        raise HilbertError(k, "Paste needs an implication")
    parts = split_conj(premise.lhs)
    if parts is None:
        raise HilbertError(k, "Paste needs a conjunction as antecedent")
    link, comparison = parts
    if not (isinstance(link, At) and link.i == i and isinstance(link.body, Dia)
            and link.body.body == Nom(j)):
        raise HilbertError(k, f"Paste needs @{i}<a>{j} as first conjunct")
    if not isinstance(comparison, Cmp):
        raise HilbertError(k, "Paste needs a data comparison as second conjunct")
    segs = path_segments(comparison.left)
    if segs[0] != Goto(j):
        raise HilbertError(k, f"Paste needs the compared path to start with {j}:")
    return link.body.mod, comparison.pol, comparison.sort, segs[1:], comparison.right, premise.rhs


def _side_condition(k: int, names: Sequence[str], *parts) -> None:
    used = set()
    for part in parts:
        used |= nominals_of(part)
    bad = sorted(set(names) & used)
    if bad:
        raise HilbertError(k, f"nominal {bad[0]} occurs in the formula")


def step_formula(k: int, step: HilbertStep, formulas: Sequence[NodeExpr]) -> NodeExpr:
    """Formula justified by step k (1-based) given the formulas of the earlier steps."""
    if isinstance(step, Axiom):
        try:
            result = schema_instance(step.schema, step.inst)
        except HilbertFormatError as e:
            raise HilbertError(k, str(e)) from e
        if step.schema is SchemaId.CPL and not is_cpl_tautology(result):
            raise HilbertError(k, f"{print_node(result)} is not a tautology")
    elif isinstance(step, MP):
        minor = _earlier(k, step.source, formulas)
        major = _earlier(k, step.impl, formulas)
        if not isinstance(major, Imp) or major.lhs != minor:
            raise HilbertError(k, f"step {step.impl} is not an implication from step {step.source}")
        result = major.rhs
    elif isinstance(step, Nec):
        result = box(step.path, _earlier(k, step.source, formulas))
    elif isinstance(step, Name):
        src = _earlier(k, step.source, formulas)
        if not (isinstance(src, At) and src.i == step.nominal):
            raise HilbertError(k, f"Name needs @{step.nominal} applied to a formula")
        _side_condition(k, [step.nominal], src.body)
        result = src.body
    elif isinstance(step, Paste):
        if step.i == step.j:
            raise HilbertError(k, "Paste needs two different nominals")
        src = _earlier(k, step.source, formulas)
        mod, pol, sort, rest, beta, phi = _paste_parts(k, src, step.i, step.j)
        _side_condition(k, [step.i, step.j], phi, beta, *rest)
        result = Imp(Cmp(pol, sort, seq_path(Goto(step.i), Step(mod), *rest), beta), phi)
    else:
        raise HilbertError(k, f"unknown step {step!r}")
    if step.stated is not None and step.stated != result:
        raise HilbertError(k, f"stated formula differs from {print_node(result)}")
    return result


def check_hilbert(proof: Sequence[HilbertStep]) -> HilbertReport:
    """Validate a deduction step by step; the report stops at the first bad step."""
    formulas: List[NodeExpr] = []
    if not proof:
        return HilbertReport(False, formulas, 0, "empty proof")
    for k, step in enumerate(proof, start=1):
        try:
            formulas.append(step_formula(k, step, formulas))
        except HilbertError as e:
            logger.debug(f"Hilbert proof rejected: {e}")
            return HilbertReport(False, formulas, k, str(e).split(": ", 1)[-1])
    return HilbertReport(True, formulas)


# Translation into G

class _Translator:
    def __init__(self, formulas: Sequence[NodeExpr], target: str):
        self.formulas = formulas
        self.supply = NameSupply(target, *[Sequent.of(cons=[labeled(target, f)]) for f in formulas])
        self.done: List[Tuple[str, Derivation]] = []

    def at(self, ref: int, n: str) -> Derivation:
        """Derivation of |- @n φ_ref."""
        g, d = self.done[ref - 1]
        return d if g == n else rename_derivation(d, {g: n}, self.supply)

    def step(self, k: int, step: HilbertStep) -> None:
        g = self.supply.fresh()
        phi = self.formulas[k - 1]
        goal = Sequent.of(cons=[labeled(g, phi)])
        if isinstance(step, Axiom):
            d = self._axiom(k, step, goal, g)
        elif isinstance(step, MP):
            d = self._mp(step, goal, g)
        elif isinstance(step, Nec):
            d = self._nec(step, goal, g)
        elif isinstance(step, Name):
            d = self._name(step, g)
        else:
            d = self._paste(k, step, goal, g)
        logger.debug(f"translated step {k} at {g}")
        self.done.append((g, d))

    def _axiom(self, k: int, step: Axiom, goal: Sequent, g: str) -> Derivation:
        if step.schema is SchemaId.CPL:
            d = prove_propositional(goal)
            if d is None:
                raise HilbertError(k, "CPL instance has no propositional derivation")
            return d
        try:
            return axiom_derivation(step.schema, step.inst, self.formulas[k - 1], g, self.supply)
        except (TemplateError, KernelError, UnexpandableStub) as e:
            raise HilbertError(k, f"{step.schema.family} template does not fit: {e}") from e

    def _mp(self, step: MP, goal: Sequent, g: str) -> Derivation:
        f = Sat(g, self.formulas[step.impl - 1])
        params = principal(f)
        stubs = premisses_of(DerivedRuleId.MP, goal, params)
        d = expand_derived(DerivedRuleId.MP, goal, params, stubs, self.supply)
        return graft(d, {stubs[0]: self.at(step.source, g), stubs[1]: self.at(step.impl, g)})

    def _nec(self, step: Nec, goal: Sequent, g: str) -> Derivation:
        chi = self.formulas[step.source - 1]
        j = self.supply.fresh()
        f = labeled(g, dia(step.path, neg(chi)))
        inner_goal = Sequent.of([f], [Sat(g, BOT)])
        params = RuleParams(principal=(f,), fresh=(j,), path=step.path)
        (stub,) = premisses_of(DerivedRuleId.DIA_PATH_L, inner_goal, params)
        inner = expand_derived(DerivedRuleId.DIA_PATH_L, inner_goal, params, [stub], self.supply)
        negated = labeled(j, neg(chi))
        body = apply(RuleId.IMP_L, stub, principal(negated), given(self.at(step.source, j)), close)
        inner = graft(inner, {stub: body})
        (top_f,) = goal.cons
        return apply(RuleId.IMP_R, goal, principal(top_f), lambda p: fit(inner, p))

    def _name(self, step: Name, g: str) -> Derivation:
        _, src = self.done[step.source - 1]
        (f,) = src.conclusion.cons
        (d,) = invert(InverseRequest(RuleId.AT_R, principal(f), src))
        return rename_derivation(d, {step.nominal: g}, self.supply)

    def _paste(self, k: int, step: Paste, goal: Sequent, g: str) -> Derivation:
        premise = self.formulas[step.source - 1]
        mod, pol, sort, rest, beta, phi = _paste_parts(k, premise, step.i, step.j)
        (f0,) = goal.cons
        comparison = labeled(g, self.formulas[k - 1].lhs)
        x, y = self.supply.fresh(), self.supply.fresh()
        tail = dia(seq_path(*rest), Nom(x)) if rest else Nom(x)
        jumped = Sat(g, At(step.i, Dia(mod, tail)))
        stepped = Sat(step.i, Dia(mod, tail))
        data = DataCmp(pol, sort, x, y)
        link, compared = split_conj(premise.lhs)
        pasted = Sat(g, premise.lhs)
        w_left = labeled(g, At(step.j, tail))
        w_right = labeled(g, dia(beta, Nom(y)))
        target = labeled(g, compared)

        def compared_proof(q: Sequent) -> Derivation:
            if isinstance(target, DataCmp):
                return relink_comparison(q, data, Sat(step.j, Nom(x)), w_right, self.supply)
            return cut_in(
                q, w_left,
                lambda r: apply(RuleId.AT_R, r, principal(w_left),
                                lambda t: identity(t, labeled(step.j, tail), self.supply)),
                lambda r: apply(RuleId.CMP_R, r, principal(target, witnesses=(w_left, w_right)),
                                lambda t: identity(t, data, self.supply)),
            )

        def conj_proof(q: Sequent) -> Derivation:
            first = Sat(g, link)
            return apply(
                RuleId.IMP_R, q, principal(pasted),
                lambda p: apply(
                    RuleId.IMP_L, p, principal(Sat(g, Imp(link, neg(compared)))),
                    lambda r: apply(RuleId.AT_R, r, principal(first),
                                    lambda t: identity(t, Sat(step.i, link.body), self.supply)),
                    lambda r: apply(RuleId.IMP_L, r, principal(Sat(g, neg(compared))), compared_proof, close),
                ),
            )

        (used,) = invert(InverseRequest(RuleId.IMP_R, principal(Sat(g, premise)), self.at(step.source, g)))
        return apply(
            RuleId.IMP_R, goal, principal(f0),
            lambda s1: apply(
                RuleId.CMP_L, s1, principal(comparison, fresh=(x, y)),
                lambda s2: apply(
                    RuleId.AT_L, s2, principal(jumped),
                    lambda s3: apply(
                        RuleId.DIA_L, s3, principal(stepped, fresh=(step.j,)),
                        lambda s4: cut_in(s4, pasted, conj_proof, given(used)),
                    ),
                ),
            ),
        )


def translate(proof: Sequence[HilbertStep], target: str) -> Derivation:
    """A G derivation of |- @target φ for the formula φ the deduction proves."""
    report = check_hilbert(proof)
    if not report.ok:
        raise HilbertError(report.failure_step, report.error)
    final = report.proved
    if target in nominals_of(final):
        raise TargetNotFresh(f"nominal {target} occurs in {print_node(final)}")
    tr = _Translator(report.formulas, target)
    for k, step in enumerate(proof, start=1):
        tr.step(k, step)
    d = tr.at(len(proof), target)
    check = check_derivation(d)
    if not check.proved:
        raise HilbertError(len(proof), f"translation is not a proof: {check.summary()}")
    logger.info(f"translated {len(proof)} Hilbert step(s) into {check.node_count} nodes, cuts: {check.cut_count}")
    return d


# Text format

_STEP = re.compile(r"^(\d+)\s*\.\s*([A-Za-z]+)\b(.*)$")
_ARGS = {
    "MP": re.compile(r"^\s*(\d+)\s+(\d+)(.*)$"),
    "NAME": re.compile(r"^\s*(\d+)\s+([A-Za-z]\w*)(.*)$"),
    "PASTE": re.compile(r"^\s*(\d+)\s+([A-Za-z]\w*)\s+([A-Za-z]\w*)(.*)$"),
    "NEC": re.compile(r"^\s*(\d+)\s*(<.*)$"),
    "AXIOM": re.compile(r"^\s*([A-Za-z]+)(.*)$"),
}
_PAIRS = {"(": ")", "[": "]", "<": ">"}
_VAR_START = re.compile(r"\s*(" + "|".join(sorted(_VAR_KINDS, key=len, reverse=True)) + r")\s*=")


def _scan(text: str, lineno: int):
    """Yield (index, char, depth) outside arrows, tracking () [] <> nesting."""
    stack: List[str] = []
    k = 0
    while k < len(text):
        for arrow in ("<->", "->"):
            if text.startswith(arrow, k):
                k += len(arrow)
                break
        else:
            ch = text[k]
            if stack and ch == stack[-1]:
                stack.pop()
            elif ch in _PAIRS:
                stack.append(_PAIRS[ch])
            yield k, ch, len(stack)
            k += 1
    if stack:
        raise HilbertFormatError("unbalanced brackets", lineno)


def _group(text: str, lineno: int) -> Tuple[str, str]:
    """Split '<...>rest' or '[...]rest' into the bracket contents and the rest."""
    for k, ch, depth in _scan(text, lineno):
        if depth == 0:
            return text[1:k], text[k + 1:]
    raise HilbertFormatError("unbalanced brackets", lineno)


def _parse_value(name: str, text: str, lineno: int) -> MetaValue:
    kind = _VAR_KINDS[name]
    text = text.strip()
    try:
        if kind == "node":
            return parse_node(text)
        if kind == "path":
            return parse_path(text)
    except ParseError as e:
        raise HilbertFormatError(f"{name}: {e}", lineno) from e
    if kind == "polarity":
        try:
            return CmpPolarity(text)
        except ValueError:
            raise HilbertFormatError(f"pol must be '=' or '!=', got {text!r}", lineno) from None
    if not re.fullmatch(r"[A-Za-z]\w*", text):
        raise HilbertFormatError(f"{name} must be an identifier, got {text!r}", lineno)
    return text


def _parse_inst(text: str, lineno: int) -> Dict[str, MetaValue]:
    cuts = [0]
    for k, ch, depth in _scan(text, lineno):
        if ch == ";" and depth == 0 and _VAR_START.match(text, k + 1):
            cuts.append(k + 1)
    cuts.append(len(text) + 1)
    inst: Dict[str, MetaValue] = {}
    for a, b in zip(cuts, cuts[1:]):
        item = text[a:b - 1].strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in _VAR_KINDS:
            raise HilbertFormatError(f"bad instantiation {item!r}", lineno)
        if name in inst:
            raise HilbertFormatError(f"{name} given twice", lineno)
        inst[name] = _parse_value(name, value, lineno)
    return inst


def _stated(rest: str, lineno: int) -> Optional[NodeExpr]:
    rest = rest.strip()
    if not rest:
        return None
    if not rest.startswith(":"):
        raise HilbertFormatError(f"unexpected {rest!r}", lineno)
    try:
        return parse_node(rest[1:].strip())
    except ParseError as e:
        raise HilbertFormatError(str(e), lineno) from e


def _parse_line(line: str, lineno: int) -> Tuple[int, HilbertStep]:
    m = _STEP.match(line)
    if not m:
        raise HilbertFormatError(f"not a step: {line!r}", lineno)
    number, kind, tail = int(m.group(1)), m.group(2).upper(), m.group(3)
    args = _ARGS.get(kind)
    if args is None:
        raise HilbertFormatError(f"unknown step kind {m.group(2)!r}", lineno)
    a = args.match(tail)
    if not a:
        raise HilbertFormatError(f"bad arguments for {kind}", lineno)
    if kind == "MP":
        return number, MP(int(a.group(1)), int(a.group(2)), _stated(a.group(3), lineno))
    if kind == "NAME":
        return number, Name(int(a.group(1)), a.group(2), _stated(a.group(3), lineno))
    if kind == "PASTE":
        return number, Paste(int(a.group(1)), a.group(2), a.group(3), _stated(a.group(4), lineno))
    if kind == "NEC":
        inner, rest = _group(a.group(2), lineno)
        try:
            path = parse_path(inner)
        except ParseError as e:
            raise HilbertFormatError(str(e), lineno) from e
        return number, Nec(int(a.group(1)), path, _stated(rest, lineno))
    try:
        schema = SchemaId(a.group(1))
    except ValueError:
        raise HilbertFormatError(f"unknown schema {a.group(1)!r}", lineno) from None
    rest = a.group(2).lstrip()
    inst: Dict[str, MetaValue] = {}
    if rest.startswith("["):
        block, rest = _group(rest, lineno)
        inst = _parse_inst(block, lineno)
    return number, Axiom(schema, inst, _stated(rest, lineno))


def parse_hilbert(text: str) -> List[HilbertStep]:
    """Parse the line-based proof format; steps must be numbered 1, 2, ... in order."""
    steps: List[HilbertStep] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        number, step = _parse_line(line, lineno)
        if number != len(steps) + 1:
            raise HilbertFormatError(f"expected step {len(steps) + 1}, found {number}", lineno)
        steps.append(step)
    return steps


def load_hilbert(path: Path) -> List[HilbertStep]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise HilbertFormatError(f"cannot read {path}: {e}") from e
    steps = parse_hilbert(text)
    logger.info(f"loaded {len(steps)} Hilbert step(s) from {path}")
    return steps


def _print_value(value: MetaValue) -> str:
    if isinstance(value, CmpPolarity):
        return value.value
    if isinstance(value, str):
        return value
    if isinstance(value, PATH_TYPES):
        return print_path(value)
    return print_node(value)


def print_step(k: int, step: HilbertStep) -> str:
    if isinstance(step, Axiom):
        inst = "; ".join(f"{n}={_print_value(step.inst[n])}" for n in schema_vars(step.schema) if n in step.inst)
        text = f"{k}. AXIOM {step.schema.value}" + (f" [{inst}]" if inst else "")
    elif isinstance(step, MP):
        text = f"{k}. MP {step.source} {step.impl}"
    elif isinstance(step, Nec):
        text = f"{k}. NEC {step.source} <{print_path(step.path)}>"
    elif isinstance(step, Name):
        text = f"{k}. NAME {step.source} {step.nominal}"
    else:
        text = f"{k}. PASTE {step.source} {step.i} {step.j}"
    return text if step.stated is None else f"{text} : {print_node(step.stated)}"


def print_hilbert(proof: Sequence[HilbertStep]) -> str:
    return "".join(print_step(k, s) + "\n" for k, s in enumerate(proof, start=1))
