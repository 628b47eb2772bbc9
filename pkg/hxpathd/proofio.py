"""Proof files: JSON derivation trees validated with pydantic."""
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import KernelError, ParseError, ProofFormatError, UnexpandableStub
from .kernel import Derivation, RuleId, RuleParams
from .meta import DerivedRuleId, expand_derived
from .parser import parse_path
from .sequents import parse_labeled, parse_sequent, print_labeled
from .syntax import print_path
from .tactics import graft

logger = logging.getLogger(__name__)

DERIVED_PREFIX = "D:"


class ParamsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    principal: List[str] = []
    fresh: List[str] = []
    cut: Optional[str] = None
    witnesses: List[str] = []
    path: Optional[str] = None
    keep: bool = False


class NodeModel(BaseModel):
    """One derivation node; `rule` is a RuleId value or D:<DerivedRuleId>."""
    model_config = ConfigDict(extra="forbid")

    rule: str
    conclusion: str
    params: ParamsModel = Field(default_factory=ParamsModel)
    children: List["NodeModel"] = []


NodeModel.model_rebuild()


def _params(m: ParamsModel, where: str) -> RuleParams:
    try:
        return RuleParams(
            principal=tuple(parse_labeled(t, allow_reserved=True) for t in m.principal),
            fresh=tuple(m.fresh),
            cut=None if m.cut is None else parse_labeled(m.cut, allow_reserved=True),
            witnesses=tuple(parse_labeled(t, allow_reserved=True) for t in m.witnesses),
            path=None if m.path is None else parse_path(m.path, allow_reserved=True),
            keep=m.keep,
        )
    except ParseError as e:
        raise ProofFormatError(f"{where}: bad parameter: {e}") from e


def _build(m: NodeModel, where: str) -> Derivation:
    try:
        conclusion = parse_sequent(m.conclusion, allow_reserved=True)
    except ParseError as e:
        raise ProofFormatError(f"{where}: bad conclusion: {e}") from e
    params = _params(m.params, where)
    kids = [_build(c, f"{where}.{n}") for n, c in enumerate(m.children)]
    if m.rule.startswith(DERIVED_PREFIX):
        try:
            derived = DerivedRuleId(m.rule[len(DERIVED_PREFIX):])
        except ValueError:
            raise ProofFormatError(f"{where}: unknown derived rule {m.rule!r}") from None
        stubs = [k.conclusion for k in kids]
        try:
            expanded = expand_derived(derived, conclusion, params, stubs)
        except (KernelError, UnexpandableStub) as e:
            raise ProofFormatError(f"{where}: cannot expand {m.rule}: {e}") from e
        logger.debug(f"{where}: expanded {m.rule}")
        return graft(expanded, {k.conclusion: k for k in kids})
    try:
        rule = RuleId(m.rule)
    except ValueError:
        raise ProofFormatError(f"{where}: unknown rule {m.rule!r}") from None
    return Derivation(conclusion, rule, params, tuple(kids))


def parse_proof(text: str) -> Derivation:
    """Decode a proof file; derived-rule nodes are expanded into core rules."""
    try:
        model = NodeModel.model_validate_json(text)
    except ValidationError as e:
        raise ProofFormatError(f"invalid proof file: {e}") from e
    return _build(model, "root")


def _model(d: Derivation) -> NodeModel:
    p = d.params
    return NodeModel(
        rule=d.rule.value,
        conclusion=d.conclusion.text(),
        params=ParamsModel(
            principal=[print_labeled(f) for f in p.principal],
            fresh=list(p.fresh),
            cut=None if p.cut is None else print_labeled(p.cut),
            witnesses=[print_labeled(f) for f in p.witnesses],
            path=None if p.path is None else print_path(p.path),
            keep=p.keep,
        ),
        children=[_model(k) for k in d.children],
    )


def print_proof(d: Derivation) -> str:
    """Canonical JSON text; identical derivations give identical bytes."""
    return _model(d).model_dump_json(indent=2, exclude_defaults=True) + "\n"


def load_proof(path: Path) -> Derivation:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ProofFormatError(f"cannot read {path}: {e}") from e
    d = parse_proof(text)
    logger.info(f"loaded proof from {path}")
    return d


def save_proof(d: Derivation, path: Path) -> None:
    Path(path).write_text(print_proof(d), encoding="utf-8")
    logger.info(f"wrote proof to {path}")
