"""Exceptions raised by the toolkit."""
from typing import Optional, Sequence


class HXPathError(Exception):
    """Base class for every toolkit error."""
    pass


class ConfigError(HXPathError):
    """Unreadable or malformed configuration."""
    pass


class ParseError(HXPathError):
    """Lexical or grammar error in expression text."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Sequence[str] = (),
    ):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected))
        where = f"{line}:{column}: " if line is not None else ""
        hint = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{hint}")


class NamespaceClash(ParseError):
    """Same identifier used in two disjoint namespaces."""
    pass


class UndeclaredSymbol(HXPathError):
    """Expression mentions a symbol the model does not declare."""

    def __init__(self, kind: str, name: str):
        self.kind = kind
        self.name = name
        super().__init__(f"undeclared {kind} '{name}'")


class ModelFormatError(HXPathError):
    """Malformed model text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ProofFormatError(HXPathError):
    """Malformed proof file."""
    pass


class HilbertFormatError(ModelFormatError):
    """Malformed Hilbert proof text."""
    pass


class KernelError(HXPathError):
    """A rule application that the calculus does not license."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")


class PrincipalMissing(KernelError):
    """Principal formula absent from the required side of the conclusion."""
    pass


class SideConditionViolated(KernelError):
    """Freshness or form condition of a rule fails."""
    pass


class ParamShape(KernelError):
    """Rule parameters have the wrong shape."""
    pass


class NotARuleInstance(HXPathError):
    """Inversion request does not describe an instance of the rule."""
    pass


class UnexpandableStub(HXPathError):
    """Premiss stub does not match what a derived rule requires."""
    pass


class NotACut(HXPathError):
    """Tree path does not lead to a Cut node."""
    pass


class UnhandledCase(HXPathError):
    """Cut reduction met a configuration it cannot rewrite."""

    def __init__(self, left_rule: str, right_rule: str, detail: str = ""):
        self.left_rule = left_rule
        self.right_rule = right_rule
        extra = f": {detail}" if detail else ""
        super().__init__(f"no reduction for cut between {left_rule} and {right_rule}{extra}")


class IrreducibleCut(UnhandledCase):
    """Cut whose local rewrites would not lower its complexity."""
    pass


class TemplateError(HXPathError):
    """An axiom derivation template does not fit the given instance."""
    pass


class HilbertError(HXPathError):
    """A Hilbert proof step is not justified."""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


class TargetNotFresh(HXPathError):
    """Translation target nominal occurs in the proved formula."""
    pass


class CutBudgetExceeded(HXPathError):
    """Cut elimination ran out of reduction steps."""
    pass
