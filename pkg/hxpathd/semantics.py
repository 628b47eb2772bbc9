"""Finite hybrid data models, satisfaction, enumeration and countermodels."""
import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, Optional, Sequence

from .errors import ModelFormatError, UndeclaredSymbol
from .sequents import DataCmp, LabeledExpr, Sat, Sequent
from .syntax import (
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
    Prop,
    Signature,
    Step,
    Test,
)

logger = logging.getLogger(__name__)


def _canonical_blocks(blocks: Sequence[int]) -> tuple[int, ...]:
    """Relabel block indices in order of first appearance."""
    relabel: Dict[int, int] = {}
    return tuple(relabel.setdefault(b, len(relabel)) for b in blocks)


@dataclass(frozen=True, eq=True)
class HybridDataModel:
    """Finite model: nodes 0..n_nodes-1, relations, comparison partitions, nominals, valuation."""
    n_nodes: int
    rel: Dict[str, FrozenSet[tuple[int, int]]] = field(default_factory=dict)
    cmp: Dict[str, tuple[int, ...]] = field(default_factory=dict)
    assign: Dict[str, int] = field(default_factory=dict)
    val: Dict[str, FrozenSet[int]] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ModelFormatError("a model needs at least one node")
        nodes = range(self.n_nodes)
        for mod, pairs in self.rel.items():
            if any(x not in nodes or y not in nodes for x, y in pairs):
                raise ModelFormatError(f"relation {mod} leaves the carrier")
        blocks = {}
        for sort, part in self.cmp.items():
            if len(part) != self.n_nodes:
                raise ModelFormatError(f"partition {sort} does not cover the carrier")
            blocks[sort] = _canonical_blocks(part)
        object.__setattr__(self, "cmp", blocks)
        for name, node in self.assign.items():
            if node not in nodes:
                raise ModelFormatError(f"nominal {name} names a missing node")
        for prop, points in self.val.items():
            if any(x not in nodes for x in points):
                raise ModelFormatError(f"valuation of {prop} leaves the carrier")

    def named(self, i: str) -> int:
        try:
            return self.assign[i]
        except KeyError:
            raise UndeclaredSymbol("nominal", i) from None

    def same_block(self, sort: str, x: int, y: int) -> bool:
        try:
            part = self.cmp[sort]
        except KeyError:
            raise UndeclaredSymbol("comparison sort", sort) from None
        return part[x] == part[y]

    def signature(self) -> Signature:
        return Signature(
            frozenset(self.val), frozenset(self.assign), frozenset(self.rel), frozenset(self.cmp)
        )


def successors(m: HybridDataModel, n: int, a: PathExpr) -> FrozenSet[int]:
    """All n2 with m, n, n2 satisfying the path a."""
    if isinstance(a, Step):
        if a.mod not in m.rel:
            raise UndeclaredSymbol("modality", a.mod)
        return frozenset(y for x, y in m.rel[a.mod] if x == n)
    if isinstance(a, Goto):
        return frozenset([m.named(a.nom)])
    if isinstance(a, Test):
        return frozenset([n]) if eval_node(m, n, a.cond) else frozenset()
    if isinstance(a, Comp):
        result: set[int] = set()
        for mid in successors(m, n, a.left):
            result |= successors(m, mid, a.right)
        return frozenset(result)
    raise TypeError(f"not a path expression: {a!r}")


def eval_path(m: HybridDataModel, n: int, n2: int, a: PathExpr) -> bool:
    return n2 in successors(m, n, a)


def eval_node(m: HybridDataModel, n: int, e: NodeExpr) -> bool:
    """Satisfaction of a core node expression at node n."""
    if isinstance(e, Prop):
        if e.p not in m.val:
            raise UndeclaredSymbol("proposition", e.p)
        return n in m.val[e.p]
    if isinstance(e, Nom):
        return m.named(e.i) == n
    if isinstance(e, Bot):
        return False
    if isinstance(e, Imp):
        return (not eval_node(m, n, e.lhs)) or eval_node(m, n, e.rhs)
    if isinstance(e, At):
        return eval_node(m, m.named(e.i), e.body)
    if isinstance(e, Dia):
        return diamond_check(m, n, Step(e.mod), e.body)
    if isinstance(e, Cmp):
        lefts = successors(m, n, e.left)
        rights = successors(m, n, e.right)
        want = e.pol is CmpPolarity.EQ
        return any(
            m.same_block(e.sort, x, y) == want for x in lefts for y in rights
        )
    raise TypeError(f"not a node expression: {e!r}")


def diamond_check(m: HybridDataModel, n: int, a: PathExpr, e: NodeExpr) -> bool:
    """Direct reading of <a>e: some a-successor satisfies e."""
    return any(eval_node(m, n2, e) for n2 in successors(m, n, a))


def box_cmp_check(
    m: HybridDataModel, n: int, pol: CmpPolarity, sort: str, a: PathExpr, b: PathExpr
) -> bool:
    """Direct reading of [a pol b]: every pair of endpoints compares as pol."""
    want = pol is CmpPolarity.EQ
    return all(
        m.same_block(sort, x, y) == want
        for x in successors(m, n, a)
        for y in successors(m, n, b)
    )


def holds(m: HybridDataModel, f: LabeledExpr) -> bool:
    """Truth of a sequent member; independent of the point of evaluation."""
    if isinstance(f, Sat):
        return eval_node(m, m.named(f.i), f.body)
    return m.same_block(f.sort, m.named(f.i), m.named(f.j)) == (f.pol is CmpPolarity.EQ)


def sequent_valid_in(m: HybridDataModel, s: Sequent) -> bool:
    if all(holds(m, f) for f in s.ante):
        return any(holds(m, f) for f in s.cons)
    return True


# Enumeration

def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n, in lexicographic order."""
    def grow(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))
    if n == 0:
        yield ()
        return
    yield from grow([0], 0)


def _relations(n: int) -> list[FrozenSet[tuple[int, int]]]:
    pairs = [(x, y) for x in range(n) for y in range(n)]
    return [
        frozenset(p for k, p in enumerate(pairs) if mask >> k & 1)
        for mask in range(2 ** len(pairs))
    ]


def _subsets(n: int) -> list[FrozenSet[int]]:
    return [frozenset(x for x in range(n) if mask >> x & 1) for mask in range(2 ** n)]


def enumerate_models(sig: Signature, max_n: int) -> Iterator[HybridDataModel]:
    """Every model over exactly sig's symbols with 1..max_n nodes."""
    mods = sorted(sig.mods)
    cmps = sorted(sig.cmps)
    noms = sorted(sig.noms)
    props = sorted(sig.props)
    for n in range(1, max_n + 1):
        rels = _relations(n)
        parts = list(set_partitions(n))
        subsets = _subsets(n)
        for rel_choice in itertools.product(rels, repeat=len(mods)):
            for part_choice in itertools.product(parts, repeat=len(cmps)):
                for nom_choice in itertools.product(range(n), repeat=len(noms)):
                    for val_choice in itertools.product(subsets, repeat=len(props)):
                        yield HybridDataModel(
                            n_nodes=n,
                            rel=dict(zip(mods, rel_choice)),
                            cmp=dict(zip(cmps, part_choice)),
                            assign=dict(zip(noms, nom_choice)),
                            val=dict(zip(props, val_choice)),
                        )


def find_countermodel(
    s: Sequent, max_n: int, sig: Optional[Signature] = None
) -> Optional[HybridDataModel]:
    """First enumerated model refuting s; None means none up to max_n."""
    sig = s.signature() if sig is None else sig
    for m in enumerate_models(sig, max_n):
        if not sequent_valid_in(m, s):
            logger.debug(f"countermodel with {m.n_nodes} nodes for {s}")
            return m
    return None


def find_rule_violation(
    premisses: Sequence[Sequent], conclusion: Sequent, max_n: int
) -> Optional[HybridDataModel]:
    """A model where every premiss holds and the conclusion fails."""
    sig = Signature.merge([conclusion.signature()] + [p.signature() for p in premisses])
    for m in enumerate_models(sig, max_n):
        if not sequent_valid_in(m, conclusion) and all(sequent_valid_in(m, p) for p in premisses):
            return m
    return None


# Text format

_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_BLOCK = re.compile(r"\{([^}]*)\}")


def _ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ModelFormatError(f"expected node numbers, got '{text.strip()}'", lineno) from None


def parse_model(text: str) -> HybridDataModel:
    """Read the line-oriented model format."""
    n_nodes: Optional[int] = None
    rel: Dict[str, FrozenSet[tuple[int, int]]] = {}
    cmp: Dict[str, tuple[int, ...]] = {}
    assign: Dict[str, int] = {}
    val: Dict[str, FrozenSet[int]] = {}
    blocks_by_sort: Dict[str, tuple[int, list[list[int]]]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "nodes":
            ns = _ints(rest, lineno)
            if len(ns) != 1:
                raise ModelFormatError("'nodes' takes one number", lineno)
            n_nodes = ns[0]
        elif keyword in ("rel", "cmp", "val"):
            name, colon, body = rest.partition(":")
            name = name.strip()
            if not colon or not name:
                raise ModelFormatError(f"expected '{keyword} <name>: ...'", lineno)
            if keyword == "rel":
                leftover = _PAIR.sub("", body).strip()
                if leftover:
                    raise ModelFormatError(f"cannot read pairs near '{leftover}'", lineno)
                rel[name] = frozenset((int(x), int(y)) for x, y in _PAIR.findall(body))
            elif keyword == "val":
                val[name] = frozenset(_ints(body, lineno))
            else:
                blocks = [_ints(b, lineno) for b in _BLOCK.findall(body)]
                blocks_by_sort[name] = (lineno, blocks)
        elif keyword == "nom":
            name, eq, node = rest.partition("=")
            if not eq:
                raise ModelFormatError("expected 'nom <I> = <node>'", lineno)
            ns = _ints(node, lineno)
            if len(ns) != 1:
                raise ModelFormatError("a nominal names exactly one node", lineno)
            assign[name.strip()] = ns[0]
        else:
            raise ModelFormatError(f"unknown line '{keyword}'", lineno)

    if n_nodes is None:
        raise ModelFormatError("missing 'nodes' line")
    for sort, (lineno, blocks) in blocks_by_sort.items():
        owner = [-1] * n_nodes
        for index, block in enumerate(blocks):
            for x in block:
                if not 0 <= x < n_nodes or owner[x] != -1:
                    raise ModelFormatError(f"partition {sort} is not a partition of the nodes", lineno)
                owner[x] = index
        if -1 in owner:
            raise ModelFormatError(f"partition {sort} misses node {owner.index(-1)}", lineno)
        cmp[sort] = tuple(owner)
    return HybridDataModel(n_nodes, rel, cmp, assign, val)


def print_model(m: HybridDataModel) -> str:
    """Render a model in the line-oriented format."""
    lines = [f"nodes {m.n_nodes}"]
    for mod in sorted(m.rel):
        pairs = " ".join(f"({x},{y})" for x, y in sorted(m.rel[mod]))
        lines.append(f"rel {mod}: {pairs}".rstrip())
    for sort in sorted(m.cmp):
        part = m.cmp[sort]
        blocks: Dict[int, list[int]] = {}
        for node, b in enumerate(part):
            blocks.setdefault(b, []).append(node)
        text = "".join("{" + ",".join(map(str, nodes)) + "}" for _, nodes in sorted(blocks.items()))
        lines.append(f"cmp {sort}: {text}")
    for name in sorted(m.assign):
        lines.append(f"nom {name} = {m.assign[name]}")
    for prop in sorted(m.val):
        points = " ".join(str(x) for x in sorted(m.val[prop]))
        lines.append(f"val {prop}: {points}".rstrip())
    return "\n".join(lines) + "\n"


def model_to_dict(m: HybridDataModel) -> dict:
    """JSON-ready view used by structured CLI output."""
    return {
        "nodes": m.n_nodes,
        "rel": {k: sorted(list(p) for p in v) for k, v in sorted(m.rel.items())},
        "cmp": {k: list(v) for k, v in sorted(m.cmp.items())},
        "nom": dict(sorted(m.assign.items())),
        "val": {k: sorted(v) for k, v in sorted(m.val.items())},
    }
