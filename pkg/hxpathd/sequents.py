"""Sequent members and sequents."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, Union

from .errors import ParseError
from .parser import parse_member_raw, parse_sequent_raw
from .syntax import (
    At,
    Cmp,
    CmpPolarity,
    Goto,
    Imp,
    NodeExpr,
    Nom,
    Prop,
    Signature,
    print_node,
    rename_nominals,
    signature_of,
    size,
)


@dataclass(frozen=True)
class Sat:
    """@i body"""
    i: str
    body: NodeExpr


@dataclass(frozen=True)
class DataCmp:
    """<i: =c j:> or <i: !=c j:>"""
    pol: CmpPolarity
    sort: str
    i: str
    j: str


LabeledExpr = Union[Sat, DataCmp]


def labeled(i: str, body: NodeExpr) -> LabeledExpr:
    """Build @i body, normalizing comparisons between named points."""
    if isinstance(body, Cmp) and isinstance(body.left, Goto) and isinstance(body.right, Goto):
        return DataCmp(body.pol, body.sort, body.left.nom, body.right.nom)
    return Sat(i, body)


def as_node(f: LabeledExpr) -> NodeExpr:
    """The point-independent node expression a member stands for."""
    if isinstance(f, Sat):
        return At(f.i, f.body)
    return Cmp(f.pol, f.sort, Goto(f.i), Goto(f.j))


def labeled_size(f: LabeledExpr) -> int:
    return size(as_node(f))


def member_signature(f: LabeledExpr) -> Signature:
    return signature_of(as_node(f))


def rename_member(f: LabeledExpr, mapping: dict[str, str]) -> LabeledExpr:
    if isinstance(f, Sat):
        return labeled(mapping.get(f.i, f.i), rename_nominals(f.body, mapping))
    return DataCmp(f.pol, f.sort, mapping.get(f.i, f.i), mapping.get(f.j, f.j))


def is_atomic(f: LabeledExpr) -> bool:
    """Forms closed by Ax: @i p, @i j, <i =c j>."""
    if isinstance(f, DataCmp):
        return f.pol is CmpPolarity.EQ
    return isinstance(f.body, (Prop, Nom))


@lru_cache(maxsize=None)
def print_labeled(f: LabeledExpr) -> str:
    """Render a member in sequent syntax."""
    if isinstance(f, DataCmp):
        return f"<{f.i} {f.pol.value}{f.sort} {f.j}>"
    body = print_node(f.body)
    if isinstance(f.body, Imp):
        body = f"({body})"
    return f"@{f.i} {body}"


def _to_member(raw) -> LabeledExpr:
    if raw.data is not None:
        pol, sort, i, j = raw.data
        return DataCmp(pol, sort, i, j)
    expr = raw.expr
    if isinstance(expr, At):
        return labeled(expr.i, expr.body)
    if isinstance(expr, Cmp) and isinstance(expr.left, Goto) and isinstance(expr.right, Goto):
        return DataCmp(expr.pol, expr.sort, expr.left.nom, expr.right.nom)
    raise ParseError(f"sequent member must be '@i ...' or a nominal comparison, got '{print_node(expr)}'")


def parse_labeled(text: str, allow_reserved: bool = False) -> LabeledExpr:
    """Parse one sequent member."""
    return _to_member(parse_member_raw(text, allow_reserved))


def _sort(fs: Iterable[LabeledExpr]) -> list[LabeledExpr]:
    return sorted(fs, key=print_labeled)


@dataclass(frozen=True)
class Sequent:
    """Antecedent and consequent sets."""
    ante: FrozenSet[LabeledExpr]
    cons: FrozenSet[LabeledExpr]

    @staticmethod
    def of(ante: Iterable[LabeledExpr] = (), cons: Iterable[LabeledExpr] = ()) -> "Sequent":
        return Sequent(frozenset(ante), frozenset(cons))

    def add_left(self, *fs: LabeledExpr) -> "Sequent":
        return Sequent(self.ante | frozenset(fs), self.cons)

    def add_right(self, *fs: LabeledExpr) -> "Sequent":
        return Sequent(self.ante, self.cons | frozenset(fs))

    def drop_left(self, *fs: LabeledExpr) -> "Sequent":
        return Sequent(self.ante - frozenset(fs), self.cons)

    def drop_right(self, *fs: LabeledExpr) -> "Sequent":
        return Sequent(self.ante, self.cons - frozenset(fs))

    def issubset(self, other: "Sequent") -> bool:
        return self.ante <= other.ante and self.cons <= other.cons

    def union(self, other: "Sequent") -> "Sequent":
        return Sequent(self.ante | other.ante, self.cons | other.cons)

    def members(self) -> FrozenSet[LabeledExpr]:
        return self.ante | self.cons

    def signature(self) -> Signature:
        return Signature.merge(member_signature(f) for f in self.members())

    def nominals(self) -> FrozenSet[str]:
        return self.signature().noms

    def rename(self, mapping: dict[str, str]) -> "Sequent":
        if not mapping:
            return self
        return Sequent.of(
            (rename_member(f, mapping) for f in self.ante),
            (rename_member(f, mapping) for f in self.cons),
        )

    def sorted_ante(self) -> list[LabeledExpr]:
        return _sort(self.ante)

    def sorted_cons(self) -> list[LabeledExpr]:
        return _sort(self.cons)

    def text(self) -> str:
        left = ", ".join(print_labeled(f) for f in self.sorted_ante())
        right = ", ".join(print_labeled(f) for f in self.sorted_cons())
        return f"{left} |- {right}".strip()

    def __str__(self) -> str:
        return self.text()


def parse_sequent(text: str, allow_reserved: bool = False) -> Sequent:
    """Parse `a, b |- c, d`."""
    ante, cons = parse_sequent_raw(text, allow_reserved)
    return Sequent.of((_to_member(m) for m in ante), (_to_member(m) for m in cons))
