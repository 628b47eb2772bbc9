"""Command-line front end."""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import __version__
from .config import AppConfig, ConfigManager, resolve_config_path
from .cutelim import CutEliminator
from .errors import HXPathError, ModelFormatError, ProofFormatError, UnhandledCase
from .hilbert import check_hilbert, load_hilbert, translate
from .kernel import CheckReport, Derivation, RuleParams, check_derivation, iter_nodes
from .meta import DerivedRuleId, expand_derived, premisses_of
from .parser import parse_node, parse_path, split_sequent_text
from .proofio import load_proof, save_proof
from .prover import Budget, Proved, Refuted, prove
from .semantics import eval_node, find_countermodel, model_to_dict, parse_model, print_model, sequent_valid_in
from .sequents import parse_labeled, parse_sequent
from .syntax import print_node

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

EXIT_OK, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


@dataclass
class Outcome:
    """Exit code plus the human and structured forms of one report."""
    code: int
    lines: List[str] = field(default_factory=list)
    data: Dict = field(default_factory=dict)


# Inputs

def _find(arg: str, config: AppConfig) -> Optional[Path]:
    """arg as a file, else relative to the fixture directory."""
    direct = Path(arg)
    if direct.is_file():
        return direct
    fallback = config.fixture_dir() / arg
    if not direct.is_absolute() and fallback.is_file():
        return fallback
    return None


def _text(arg: str, config: AppConfig) -> str:
    """Inline text unless arg names a file."""
    path = _find(arg, config)
    if path is None:
        return arg
    logger.debug(f"reading {path}")
    return path.read_text(encoding="utf-8")


def _file(arg: str, config: AppConfig) -> Path:
    path = _find(arg, config)
    if path is None:
        raise ProofFormatError(f"{arg}: no such file")
    return path


def _budget(args, config: AppConfig) -> Budget:
    p = config.prover
    return Budget(
        max_fresh=args.max_fresh if args.max_fresh is not None else p.max_fresh,
        max_depth=args.max_depth if args.max_depth is not None else p.max_depth,
        model_bound=args.model_bound if args.model_bound is not None else p.model_bound,
        witness_cuts=p.witness_cuts and not args.no_witness_cuts,
    )


def _report_data(r: CheckReport) -> Dict:
    return {
        "well_formed": r.well_formed,
        "proved": r.proved,
        "cuts": r.cut_count,
        "nodes": r.node_count,
        "height": r.height,
        "open_leaves": [s.text() for s in r.open_leaves],
        "error": r.error,
    }


def _tree_lines(d: Derivation) -> List[str]:
    return [f"{'  ' * len(path)}{node.rule.value}: {node.conclusion.text()}" for path, node in iter_nodes(d)]


# Commands

def cmd_parse(args, config: AppConfig) -> Outcome:
    text = _text(args.input, config)
    if split_sequent_text(text) is not None:
        s = parse_sequent(text)
        return Outcome(EXIT_OK, [s.text()], {"kind": "sequent", "text": s.text()})
    e = parse_node(text)
    return Outcome(EXIT_OK, [print_node(e)], {"kind": "node", "text": print_node(e)})


def cmd_check(args, config: AppConfig) -> Outcome:
    d = load_proof(_file(args.proof, config))
    r = check_derivation(d)
    return Outcome(EXIT_OK if r.proved else EXIT_NEGATIVE, [r.summary()], _report_data(r))


def cmd_prove(args, config: AppConfig) -> Outcome:
    s = parse_sequent(_text(args.sequent, config))
    result = prove(s, _budget(args, config))
    if isinstance(result, Proved):
        r = check_derivation(result.derivation)
        if not r.proved:
            return Outcome(EXIT_UNKNOWN, [f"search result rejected: {r.summary()}"], {"verdict": "unknown"})
        if args.output:
            save_proof(result.derivation, Path(args.output))
        lines = _tree_lines(result.derivation) if args.trace else []
        return Outcome(EXIT_OK, lines + [r.summary()], {"verdict": "proved", **_report_data(r)})
    if isinstance(result, Refuted):
        if sequent_valid_in(result.model, s):
            return Outcome(EXIT_UNKNOWN, ["countermodel rejected"], {"verdict": "unknown"})
        if args.emit_model:
            Path(args.emit_model).write_text(print_model(result.model), encoding="utf-8")
        lines = ["refuted by countermodel:"] + print_model(result.model).splitlines()
        return Outcome(EXIT_NEGATIVE, lines, {"verdict": "refuted", "model": model_to_dict(result.model)})
    return Outcome(EXIT_UNKNOWN, [f"unknown: {result.reason} exhausted"],
                   {"verdict": "unknown", "reason": result.reason})


def cmd_refute(args, config: AppConfig) -> Outcome:
    s = parse_sequent(_text(args.sequent, config))
    bound = args.bound if args.bound is not None else config.prover.model_bound
    m = find_countermodel(s, bound)
    if m is None:
        return Outcome(EXIT_UNKNOWN, [f"no countermodel up to {bound} node(s)"],
                       {"verdict": "unknown", "bound": bound})
    lines = ["refuted by countermodel:"] + print_model(m).splitlines()
    return Outcome(EXIT_NEGATIVE, lines, {"verdict": "refuted", "model": model_to_dict(m)})


def cmd_cutfree(args, config: AppConfig) -> Outcome:
    d = load_proof(_file(args.proof, config))
    r = check_derivation(d)
    if not r.proved:
        return Outcome(EXIT_NEGATIVE, [f"input is not a proof: {r.summary()}"], _report_data(r))
    elim = CutEliminator(
        max_steps=args.max_steps if args.max_steps is not None else config.cutelim.max_steps,
        fallback_search=config.cutelim.fallback_search or args.fallback,
        budget=_budget(args, config),
    )
    try:
        out = elim.eliminate(d)
    except UnhandledCase as e:
        return Outcome(EXIT_UNKNOWN, [f"stuck after {len(elim.steps)} step(s): {e}"],
                       {"verdict": "unknown", "error": str(e), "steps": len(elim.steps)})
    r2 = check_derivation(out)
    if args.output:
        save_proof(out, Path(args.output))
    trace = [step.trace_line() for step in elim.steps]
    lines = (trace if args.trace else []) + [f"{r2.summary()}, steps: {len(elim.steps)}"]
    return Outcome(EXIT_OK if r2.proved and r2.cut_count == 0 else EXIT_NEGATIVE, lines,
                   {**_report_data(r2), "trace": trace})


def cmd_hilbert_check(args, config: AppConfig) -> Outcome:
    steps = load_hilbert(_file(args.file, config))
    rep = check_hilbert(steps)
    data = {
        "ok": rep.ok,
        "formulas": [print_node(f) for f in rep.formulas],
        "failure_step": rep.failure_step,
        "error": rep.error,
    }
    return Outcome(EXIT_OK if rep.ok else EXIT_NEGATIVE, [rep.summary()], data)


def cmd_hilbert_translate(args, config: AppConfig) -> Outcome:
    steps = load_hilbert(_file(args.file, config))
    d = translate(steps, args.nominal)
    if args.cutfree:
        elim = CutEliminator(config.cutelim.max_steps, config.cutelim.fallback_search or args.fallback,
                             _budget(args, config))
        try:
            d = elim.eliminate(d)
        except UnhandledCase as e:
            return Outcome(EXIT_UNKNOWN, [f"stuck after {len(elim.steps)} step(s): {e}"],
                           {"verdict": "unknown", "error": str(e), "steps": len(elim.steps)})
    r = check_derivation(d)
    if args.output:
        save_proof(d, Path(args.output))
    return Outcome(EXIT_OK if r.proved else EXIT_NEGATIVE,
                   [f"{d.conclusion.text()}", r.summary()],
                   {"end_sequent": d.conclusion.text(), **_report_data(r)})


def cmd_eval(args, config: AppConfig) -> Outcome:
    m = parse_model(_text(args.model, config))
    point = int(args.point) if args.point.isdigit() else m.named(args.point)
    if point >= m.n_nodes:
        raise ModelFormatError(f"model has no node {point}")
    e = parse_node(_text(args.expr, config))
    value = eval_node(m, point, e)
    return Outcome(EXIT_OK if value else EXIT_NEGATIVE, [str(value).lower()],
                   {"point": point, "value": value})


def cmd_expand(args, config: AppConfig) -> Outcome:
    try:
        rule = DerivedRuleId(args.rule)
    except ValueError:
        raise ProofFormatError(f"unknown derived rule {args.rule!r}") from None
    conclusion = parse_sequent(_text(args.conclusion, config))
    params = RuleParams(
        principal=tuple(parse_labeled(t) for t in args.principal),
        fresh=tuple(args.fresh),
        witnesses=tuple(parse_labeled(t) for t in args.witness),
        path=None if args.path is None else parse_path(args.path),
    )
    stubs = premisses_of(rule, conclusion, params)
    d = expand_derived(rule, conclusion, params, stubs)
    r = check_derivation(d)
    if args.output:
        save_proof(d, Path(args.output))
    lines = [f"premiss: {s.text()}" for s in stubs] + [r.summary()]
    return Outcome(EXIT_OK if r.well_formed else EXIT_NEGATIVE, lines,
                   {"premisses": [s.text() for s in stubs], **_report_data(r)})


COMMANDS: Dict[str, Callable] = {
    "parse": cmd_parse,
    "check": cmd_check,
    "prove": cmd_prove,
    "refute": cmd_refute,
    "cutfree": cmd_cutfree,
    "hilbert-check": cmd_hilbert_check,
    "hilbert-translate": cmd_hilbert_translate,
    "eval": cmd_eval,
    "expand": cmd_expand,
}


def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int)
    p.add_argument("--max-fresh", type=int)
    p.add_argument("--model-bound", type=int)
    p.add_argument("--no-witness-cuts", action="store_true")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hxpathd", description="Proof toolkit for hybrid XPath with data")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=["human", "structured"])
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and print a node expression or sequent")
    p.add_argument("input")

    p = sub.add_parser("check", help="check a proof file")
    p.add_argument("proof")

    p = sub.add_parser("prove", help="search for a proof or a countermodel")
    p.add_argument("sequent")
    p.add_argument("-o", "--output", "--emit-proof", dest="output", metavar="FILE", help="write the proof found")
    p.add_argument("--emit-model", metavar="FILE", help="write the countermodel found")
    p.add_argument("--trace", action="store_true")
    _search_flags(p)

    p = sub.add_parser("refute", help="look for a countermodel")
    p.add_argument("sequent")
    p.add_argument("--bound", type=int)

    p = sub.add_parser("cutfree", help="eliminate cuts from a proof file")
    p.add_argument("proof")
    p.add_argument("-o", "--output")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--fallback", action="store_true", help="re-prove stuck cuts by search")
    _search_flags(p)

    p = sub.add_parser("hilbert-check", help="check a Hilbert deduction")
    p.add_argument("file")

    p = sub.add_parser("hilbert-translate", help="translate a Hilbert deduction into a sequent proof")
    p.add_argument("file")
    p.add_argument("--nominal", default="I")
    p.add_argument("-o", "--output")
    p.add_argument("--cutfree", action="store_true")
    p.add_argument("--fallback", action="store_true", help="re-prove stuck cuts by search")
    _search_flags(p)

    p = sub.add_parser("eval", help="evaluate a node expression in a model")
    p.add_argument("model")
    p.add_argument("point", help="node number or nominal")
    p.add_argument("expr")

    p = sub.add_parser("expand", help="expand a derived rule into core rules")
    p.add_argument("rule", choices=[r.value for r in DerivedRuleId])
    p.add_argument("conclusion")
    p.add_argument("--principal", action="append", default=[])
    p.add_argument("--fresh", action="append", default=[])
    p.add_argument("--witness", action="append", default=[])
    p.add_argument("--path")
    p.add_argument("-o", "--output")
    return parser


def _emit(outcome: Outcome, fmt: str) -> None:
    if fmt == "structured":
        print(json.dumps({"exit": outcome.code, **outcome.data}, sort_keys=True, indent=2))
    else:
        for line in outcome.lines:
            print(line)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, stream=sys.stderr)

    try:
        config = ConfigManager(resolve_config_path(args.config)).load()
    except HXPathError as e:
        logger.error(str(e))
        return EXIT_INPUT

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else config.output.log_level
    logging.getLogger().setLevel(level)
    fmt = args.format or config.output.format

    try:
        outcome = COMMANDS[args.command](args, config)
    except (HXPathError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        if fmt == "structured":
            _emit(Outcome(EXIT_INPUT, data={"error": str(e)}), fmt)
        return EXIT_INPUT
    _emit(outcome, fmt)
    return outcome.code
