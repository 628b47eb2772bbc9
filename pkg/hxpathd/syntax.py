"""Core expression trees, sugar builders, size and printing."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, Optional, Union


class CmpPolarity(Enum):
    """Polarity of a data comparison."""
    EQ = "="
    NEQ = "!="

    def flip(self) -> "CmpPolarity":
        return CmpPolarity.NEQ if self is CmpPolarity.EQ else CmpPolarity.EQ


# Node expressions

@dataclass(frozen=True)
class Prop:
    p: str


@dataclass(frozen=True)
class Nom:
    i: str


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Imp:
    lhs: "NodeExpr"
    rhs: "NodeExpr"


@dataclass(frozen=True)
class At:
    i: str
    body: "NodeExpr"


@dataclass(frozen=True)
class Dia:
    mod: str
    body: "NodeExpr"


@dataclass(frozen=True)
class Cmp:
    pol: CmpPolarity
    sort: str
    left: "PathExpr"
    right: "PathExpr"


# Path expressions

@dataclass(frozen=True)
class Step:
    mod: str


@dataclass(frozen=True)
class Goto:
    nom: str


@dataclass(frozen=True)
class Test:
    cond: "NodeExpr"


@dataclass(frozen=True)
class Comp:
    left: "PathExpr"
    right: "PathExpr"


NodeExpr = Union[Prop, Nom, Bot, Imp, At, Dia, Cmp]
PathExpr = Union[Step, Goto, Test, Comp]

NODE_TYPES = (Prop, Nom, Bot, Imp, At, Dia, Cmp)
PATH_TYPES = (Step, Goto, Test, Comp)

BOT = Bot()


# Sugar. Each builder returns the core tree the parser produces for it.

def top() -> NodeExpr:
    return Imp(BOT, BOT)


def neg(x: NodeExpr) -> NodeExpr:
    return Imp(x, BOT)


def conj(x: NodeExpr, y: NodeExpr) -> NodeExpr:
    return neg(Imp(x, neg(y)))


def disj(x: NodeExpr, y: NodeExpr) -> NodeExpr:
    return Imp(neg(x), y)


def iff(x: NodeExpr, y: NodeExpr) -> NodeExpr:
    return conj(Imp(x, y), Imp(y, x))


def eps() -> PathExpr:
    return Test(top())


def dia(path: PathExpr, body: NodeExpr) -> NodeExpr:
    """<path>body for an arbitrary path."""
    if isinstance(path, Step):
        return Dia(path.mod, body)
    if isinstance(path, Goto):
        return At(path.nom, body)
    if isinstance(path, Test):
        return conj(path.cond, body)
    return dia(path.left, dia(path.right, body))


def box(path: PathExpr, body: NodeExpr) -> NodeExpr:
    return neg(dia(path, neg(body)))


def box_cmp(pol: CmpPolarity, sort: str, left: PathExpr, right: PathExpr) -> NodeExpr:
    return neg(Cmp(pol.flip(), sort, left, right))


def seq_path(*segments: PathExpr) -> PathExpr:
    """Right-nested composition of one or more segments."""
    if not segments:
        raise ValueError("empty path")
    result = segments[-1]
    for seg in reversed(segments[:-1]):
        result = Comp(seg, result)
    return result


def split_conj(e: NodeExpr) -> Optional[tuple[NodeExpr, NodeExpr]]:
    """Inverse of conj: (x, y) if e is x & y in core form."""
    if (
        isinstance(e, Imp) and e.rhs == BOT
        and isinstance(e.lhs, Imp)
        and isinstance(e.lhs.rhs, Imp) and e.lhs.rhs.rhs == BOT
    ):
        return e.lhs.lhs, e.lhs.rhs.lhs
    return None


def undia(path: PathExpr, e: NodeExpr) -> Optional[NodeExpr]:
    """The body φ with dia(path, φ) == e, or None."""
    if isinstance(path, Step):
        return e.body if isinstance(e, Dia) and e.mod == path.mod else None
    if isinstance(path, Goto):
        return e.body if isinstance(e, At) and e.i == path.nom else None
    if isinstance(path, Test):
        parts = split_conj(e)
        if parts is None or parts[0] != path.cond:
            return None
        return parts[1]
    inner = undia(path.left, e)
    return None if inner is None else undia(path.right, inner)


def dia_target(path: PathExpr, e: NodeExpr) -> Optional[str]:
    """Nominal j when e is <path>j."""
    body = undia(path, e)
    return body.i if isinstance(body, Nom) else None


def path_segments(path: PathExpr) -> list[PathExpr]:
    """Flatten composition into its non-composite segments."""
    if isinstance(path, Comp):
        return path_segments(path.left) + path_segments(path.right)
    return [path]


# Measures

def size(e: Union[NodeExpr, PathExpr]) -> int:
    """Size measure used by cut complexity."""
    if isinstance(e, (Prop, Nom, Bot, Step, Goto)):
        return 1
    if isinstance(e, Imp):
        return 1 + size(e.lhs) + size(e.rhs)
    if isinstance(e, (At, Dia)):
        return 1 + size(e.body)
    if isinstance(e, Test):
        return 1 + size(e.cond)
    if isinstance(e, Comp):
        return size(e.left) + size(e.right)
    if isinstance(e, Cmp):
        return 1 + size(e.left) + size(e.right)
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class Signature:
    """Symbols occurring in some object, one set per namespace."""
    props: FrozenSet[str] = field(default_factory=frozenset)
    noms: FrozenSet[str] = field(default_factory=frozenset)
    mods: FrozenSet[str] = field(default_factory=frozenset)
    cmps: FrozenSet[str] = field(default_factory=frozenset)

    def union(self, other: "Signature") -> "Signature":
        return Signature(
            self.props | other.props,
            self.noms | other.noms,
            self.mods | other.mods,
            self.cmps | other.cmps,
        )

    def clashes(self) -> set[str]:
        """Identifiers present in more than one namespace."""
        seen: set[str] = set()
        dup: set[str] = set()
        for names in (self.props, self.noms, self.mods, self.cmps):
            dup |= seen & names
            seen |= names
        return dup

    @staticmethod
    def merge(parts: Iterable["Signature"]) -> "Signature":
        result = Signature()
        for part in parts:
            result = result.union(part)
        return result


def _collect(e, props, noms, mods, cmps) -> None:
    if isinstance(e, Prop):
        props.add(e.p)
    elif isinstance(e, Nom):
        noms.add(e.i)
    elif isinstance(e, Imp):
        _collect(e.lhs, props, noms, mods, cmps)
        _collect(e.rhs, props, noms, mods, cmps)
    elif isinstance(e, At):
        noms.add(e.i)
        _collect(e.body, props, noms, mods, cmps)
    elif isinstance(e, Dia):
        mods.add(e.mod)
        _collect(e.body, props, noms, mods, cmps)
    elif isinstance(e, Cmp):
        cmps.add(e.sort)
        _collect(e.left, props, noms, mods, cmps)
        _collect(e.right, props, noms, mods, cmps)
    elif isinstance(e, Step):
        mods.add(e.mod)
    elif isinstance(e, Goto):
        noms.add(e.nom)
    elif isinstance(e, Test):
        _collect(e.cond, props, noms, mods, cmps)
    elif isinstance(e, Comp):
        _collect(e.left, props, noms, mods, cmps)
        _collect(e.right, props, noms, mods, cmps)


def signature_of(e) -> Signature:
    """Exact symbol sets of an expression, sequent member or sequent."""
    if isinstance(e, NODE_TYPES + PATH_TYPES):
        props: set[str] = set()
        noms: set[str] = set()
        mods: set[str] = set()
        cmps: set[str] = set()
        _collect(e, props, noms, mods, cmps)
        return Signature(frozenset(props), frozenset(noms), frozenset(mods), frozenset(cmps))
    return e.signature()


def nominals_of(e) -> FrozenSet[str]:
    return signature_of(e).noms


def rename_nominals(e, mapping: dict[str, str]):
    """Apply a nominal substitution to a node or path expression."""
    if not mapping:
        return e
    if isinstance(e, Nom):
        return Nom(mapping.get(e.i, e.i))
    if isinstance(e, (Prop, Bot, Step)):
        return e
    if isinstance(e, Imp):
        return Imp(rename_nominals(e.lhs, mapping), rename_nominals(e.rhs, mapping))
    if isinstance(e, At):
        return At(mapping.get(e.i, e.i), rename_nominals(e.body, mapping))
    if isinstance(e, Dia):
        return Dia(e.mod, rename_nominals(e.body, mapping))
    if isinstance(e, Cmp):
        return Cmp(e.pol, e.sort, rename_nominals(e.left, mapping), rename_nominals(e.right, mapping))
    if isinstance(e, Goto):
        return Goto(mapping.get(e.nom, e.nom))
    if isinstance(e, Test):
        return Test(rename_nominals(e.cond, mapping))
    if isinstance(e, Comp):
        return Comp(rename_nominals(e.left, mapping), rename_nominals(e.right, mapping))
    raise TypeError(f"not an expression: {e!r}")


# Printing. Output is core syntax only and re-parses to the same tree.

def _print_unary(e: NodeExpr) -> str:
    if isinstance(e, Imp):
        return f"({print_node(e)})"
    return print_node(e)


def _print_segment(a: PathExpr) -> str:
    if isinstance(a, Comp):
        return f"({print_path(a)})"
    return print_path(a)


def print_node(e: NodeExpr) -> str:
    """Render a core node expression."""
    if isinstance(e, Prop):
        return e.p
    if isinstance(e, Nom):
        return e.i
    if isinstance(e, Bot):
        return "false"
    if isinstance(e, Imp):
        return f"{_print_unary(e.lhs)} -> {print_node(e.rhs)}"
    if isinstance(e, At):
        return f"@{e.i} {_print_unary(e.body)}"
    if isinstance(e, Dia):
        return f"<{e.mod}>{_print_unary(e.body)}"
    if isinstance(e, Cmp):
        return f"<{print_path(e.left)} {e.pol.value}{e.sort} {print_path(e.right)}>"
    raise TypeError(f"not a node expression: {e!r}")


def print_path(a: PathExpr) -> str:
    """Render a core path expression."""
    if isinstance(a, Step):
        return a.mod
    if isinstance(a, Goto):
        return f"{a.nom}:"
    if isinstance(a, Test):
        cond = a.cond
        if isinstance(cond, (Prop, Nom, Bot)):
            return f"{print_node(cond)}?"
        return f"({print_node(cond)})?"
    if isinstance(a, Comp):
        return f"{_print_segment(a.left)} ; {print_path(a.right)}"
    raise TypeError(f"not a path expression: {a!r}")
