"""Concrete grammar and parser producing desugared core trees."""
import logging
from typing import Optional

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
    VisitError,
)

from .errors import HXPathError, NamespaceClash, ParseError
from .syntax import (
    BOT,
    At,
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
    Step,
    Test,
    box,
    box_cmp,
    conj,
    dia,
    disj,
    eps,
    iff,
    neg,
    top,
)

logger = logging.getLogger(__name__)

# Uppercase-initial identifiers are nominals, lowercase-initial ones are
# propositions, modalities or sorts depending on position.
GRAMMAR = r"""
    ?node: imp

    ?imp: disj
        | disj "->" imp                 -> implies
        | disj "<->" imp                -> iff
    ?disj: conj
         | disj "|" conj                -> or_
    ?conj: unary
         | conj "&" unary               -> and_

    ?unary: "~" unary                   -> not_
          | "@" nominal unary           -> at
          | "<" path ">" unary          -> diamond
          | "[" path "]" unary          -> box
          | "<" path cmpop path ">"     -> cmp
          | "[" path cmpop path "]"     -> box_cmp
          | atom

    ?atom: "false"                      -> false
         | "true"                       -> true
         | LOW                          -> prop
         | nominal                      -> nom
         | "(" node ")"

    ?path: seg
         | seg ";" path                 -> comp
    ?seg: LOW                           -> step
        | nominal ":"                   -> goto
        | node "?"                      -> test
        | "eps"                         -> eps
        | "(" path ")"

    cmpop: "=" sort                     -> eq
         | "!=" sort                    -> neq
    sort: LOW | NOM
    nominal: NOM | GENSYM

    sequent: [members] TURNSTILE [members]
    members: member ("," member)*
    ?member: node                       -> member
           | "<" nominal cmpop nominal ">"  -> data_cmp

    TURNSTILE: "|-" | "⊢"
    LOW: /[a-z][A-Za-z0-9_]*/
    NOM: /[A-Z][A-Za-z0-9_]*/
    GENSYM: /_g[0-9]+/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_parser = Lark(
    GRAMMAR,
    parser="earley",
    lexer="basic",
    start=["node", "path", "sequent", "member"],
)


class _Member:
    """Raw sequent member before kernel normalization."""

    def __init__(self, expr=None, data=None):
        self.expr = expr
        self.data = data


@v_args(inline=True)
class _ToCore(Transformer):
    """Build core trees, recording the namespace of every identifier."""

    def __init__(self, allow_reserved: bool = False):
        super().__init__()
        self.allow_reserved = allow_reserved
        self.roles: dict[str, dict[str, Token]] = {}

    def _note(self, tok: Token, role: str) -> str:
        self.roles.setdefault(str(tok), {}).setdefault(role, tok)
        return str(tok)

    # identifiers
    def nominal(self, tok):
        if tok.type == "GENSYM" and not self.allow_reserved:
            raise ParseError(
                f"reserved nominal '{tok}' is not allowed here",
                tok.line,
                tok.column,
            )
        return self._note(tok, "nominal")

    def sort(self, tok):
        return self._note(tok, "comparison sort")

    def prop(self, tok):
        return Prop(self._note(tok, "proposition"))

    def nom(self, name):
        return Nom(name)

    def step(self, tok):
        return Step(self._note(tok, "modality"))

    # node expressions
    def false(self):
        return BOT

    def true(self):
        return top()

    def implies(self, lhs, rhs):
        return Imp(lhs, rhs)

    def iff(self, lhs, rhs):
        return iff(lhs, rhs)

    def or_(self, lhs, rhs):
        return disj(lhs, rhs)

    def and_(self, lhs, rhs):
        return conj(lhs, rhs)

    def not_(self, body):
        return neg(body)

    def at(self, name, body):
        return At(name, body)

    def diamond(self, path, body):
        return dia(path, body)

    def box(self, path, body):
        return box(path, body)

    def cmp(self, left, op, right):
        pol, sort = op
        return Cmp(pol, sort, left, right)

    def box_cmp(self, left, op, right):
        pol, sort = op
        return box_cmp(pol, sort, left, right)

    def eq(self, sort):
        return CmpPolarity.EQ, sort

    def neq(self, sort):
        return CmpPolarity.NEQ, sort

    # paths
    def comp(self, left, right):
        return Comp(left, right)

    def goto(self, name):
        return Goto(name)

    def test(self, cond):
        return Test(cond)

    def eps(self):
        return eps()

    # sequents
    def member(self, expr):
        return _Member(expr=expr)

    def data_cmp(self, i, op, j):
        pol, sort = op
        return _Member(data=(pol, sort, i, j))

    def members(self, *items):
        return list(items)

    def sequent(self, ante, _turnstile, cons):
        return ante or [], cons or []


def _check_namespaces(roles: dict[str, dict[str, Token]]) -> None:
    for name, used in roles.items():
        if len(used) > 1:
            kinds = sorted(used)
            tok = min(used.values(), key=lambda t: (t.line or 0, t.column or 0))
            raise NamespaceClash(
                f"identifier '{name}' used as both {kinds[0]} and {kinds[1]}",
                tok.line,
                tok.column,
            )


def _run(text: str, start: str, allow_reserved: bool):
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedCharacters as e:
        raise ParseError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column,
                         e.allowed or ()) from e
    except UnexpectedToken as e:
        raise ParseError(f"unexpected token {e.token!r}", e.line, e.column, e.expected or ()) from e
    except UnexpectedEOF as e:
        raise ParseError("unexpected end of input", None, None, e.expected or ()) from e
    except UnexpectedInput as e:
        raise ParseError(f"cannot parse input: {e}", getattr(e, "line", None),
                         getattr(e, "column", None)) from e
    builder = _ToCore(allow_reserved)
    try:
        result = builder.transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, HXPathError):
            raise e.orig_exc from None
        raise
    _check_namespaces(builder.roles)
    return result


def parse_node(text: str, allow_reserved: bool = False) -> NodeExpr:
    """Parse a node expression into its desugared core tree."""
    return _run(text, "node", allow_reserved)


def parse_path(text: str, allow_reserved: bool = False) -> PathExpr:
    """Parse a path expression into its desugared core tree."""
    return _run(text, "path", allow_reserved)


def parse_member_raw(text: str, allow_reserved: bool = False) -> _Member:
    return _run(text, "member", allow_reserved)


def parse_sequent_raw(text: str, allow_reserved: bool = False) -> tuple[list, list]:
    return _run(text, "sequent", allow_reserved)


def split_sequent_text(text: str) -> Optional[tuple[str, str]]:
    """Split on the turnstile, None when the text has none."""
    for mark in ("|-", "⊢"):
        if mark in text:
            left, right = text.split(mark, 1)
            return left, right
    return None
