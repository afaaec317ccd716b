"""Command-line interface.

    xmlgram check <g.xg>
    xmlgram tables <g.xg> [--format text|kv] [--start RULE]
    xmlgram normalize <g.xg>
    xmlgram parse <g.xg> <doc.xml> [--start RULE] [--format term|json]
                  [--oracle] [--keep-whitespace]

Exit codes: 0 success, 1 grammar/document error, 2 I/O error.  The
environment variable XMLGRAM_MAX_DERIVATIONS caps the oracle's search.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Tuple

from .analysis import build_predict_table, check_ll1, compute_sets, render_table_kv, render_table_text
from .ast import Grammar
from .engine import Machine, ParseFailure
from .events import build_tree
from .frontend import try_parse_grammar
from .normalize import normalize_grammar
from .oracle import Oracle
from .pretty import pretty_grammar
from .sax import SaxReader, XmlReadError
from .values import render_json, render_term
from .wellformed import check_grammar, lint_grammar

OK, LANGUAGE_ERROR, IO_ERROR = 0, 1, 2


def _read_file(path: str) -> Optional[str]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None


def _load_grammar(path: str) -> Tuple[Optional[Grammar], int]:
    source = _read_file(path)
    if source is None:
        return None, IO_ERROR
    grammar, diagnostics = try_parse_grammar(source)
    for diag in diagnostics:
        print(f"{path}:{diag}", file=sys.stderr)
    if grammar is None:
        return None, LANGUAGE_ERROR
    return grammar, OK


def _check_pipeline(path: str, grammar: Grammar, start: Optional[str]) -> int:
    """Well-formedness, normalization, and LL(1) checks; prints failures."""
    errors = check_grammar(grammar)
    for err in errors:
        print(f"{path}: {err}", file=sys.stderr)
    for warning in lint_grammar(grammar):
        print(f"{path}: warning: {warning}", file=sys.stderr)
    if errors:
        return LANGUAGE_ERROR
    if not grammar.clauses:
        return OK
    normal = normalize_grammar(grammar)
    start_rule = start or grammar.clauses[0].name
    analysis = compute_sets(normal, start_rule)
    table = build_predict_table(normal, analysis)
    ok, conflicts = check_ll1(table)
    for conflict in conflicts:
        print(f"{path}: conflict: {conflict}", file=sys.stderr)
    return OK if ok else LANGUAGE_ERROR


def cmd_check(args: argparse.Namespace) -> int:
    grammar, code = _load_grammar(args.grammar)
    if grammar is None:
        return code
    return _check_pipeline(args.grammar, grammar, args.start)


def cmd_tables(args: argparse.Namespace) -> int:
    grammar, code = _load_grammar(args.grammar)
    if grammar is None:
        return code
    errors = check_grammar(grammar)
    for err in errors:
        print(f"{args.grammar}: {err}", file=sys.stderr)
    if errors:
        return LANGUAGE_ERROR
    if not grammar.clauses:
        return OK
    normal = normalize_grammar(grammar)
    start_rule = args.start or grammar.clauses[0].name
    analysis = compute_sets(normal, start_rule)
    table = build_predict_table(normal, analysis)
    if args.format == "kv":
        sys.stdout.write(render_table_kv(normal, table))
    else:
        sys.stdout.write(render_table_text(normal, table))
    ok, conflicts = check_ll1(table)
    for conflict in conflicts:
        print(f"{args.grammar}: conflict: {conflict}", file=sys.stderr)
    return OK if ok else LANGUAGE_ERROR


def cmd_normalize(args: argparse.Namespace) -> int:
    grammar, code = _load_grammar(args.grammar)
    if grammar is None:
        return code
    errors = check_grammar(grammar)
    for err in errors:
        print(f"{args.grammar}: {err}", file=sys.stderr)
    if errors:
        return LANGUAGE_ERROR
    sys.stdout.write(pretty_grammar(normalize_grammar(grammar)))
    return OK


def cmd_parse(args: argparse.Namespace) -> int:
    grammar, code = _load_grammar(args.grammar)
    if grammar is None:
        return code
    errors = check_grammar(grammar)
    for err in errors:
        print(f"{args.grammar}: {err}", file=sys.stderr)
    if errors:
        return LANGUAGE_ERROR
    if not grammar.clauses:
        print(f"{args.grammar}: grammar has no rules", file=sys.stderr)
        return LANGUAGE_ERROR
    start_rule = args.start or grammar.clauses[0].name

    try:
        doc_file = open(args.document, "r", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.document}: {exc.strerror}", file=sys.stderr)
        return IO_ERROR

    with doc_file:
        reader = SaxReader(doc_file, keep_whitespace=args.keep_whitespace)
        try:
            if args.oracle:
                value = _parse_with_oracle(grammar, start_rule, reader)
                if value is None:
                    print("parse failed: no derivation", file=sys.stderr)
                    return LANGUAGE_ERROR
            else:
                normal = normalize_grammar(grammar)
                analysis = compute_sets(normal, start_rule)
                table = build_predict_table(normal, analysis)
                ok, conflicts = check_ll1(table)
                if not ok:
                    for conflict in conflicts:
                        print(f"{args.grammar}: conflict: {conflict}", file=sys.stderr)
                    return LANGUAGE_ERROR
                value = Machine(table, start_rule, iter(reader)).run()
        except XmlReadError as exc:
            print(f"{args.document}: {exc}", file=sys.stderr)
            return LANGUAGE_ERROR
        except ParseFailure as exc:
            print(f"{args.document}: parse failed: {exc}", file=sys.stderr)
            return LANGUAGE_ERROR

    print(render_json(value) if args.format == "json" else render_term(value))
    return OK


def _parse_with_oracle(grammar: Grammar, start_rule: str, reader: SaxReader):
    cap = int(os.environ.get("XMLGRAM_MAX_DERIVATIONS", "10000"))
    doc = build_tree(iter(reader))
    result = Oracle(grammar, max_steps=cap).accepts(start_rule, doc)
    if result.ambiguous:
        print(
            f"warning: grammar is ambiguous for this document "
            f"({len(result.values)} distinct values)",
            file=sys.stderr,
        )
    return result.value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="xmlgram", description="XML grammar toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse, well-formedness, normal form, LL(1)")
    p_check.add_argument("grammar")
    p_check.add_argument("--start", help="start rule (default: first rule)")
    p_check.set_defaults(func=cmd_check)

    p_tables = sub.add_parser("tables", help="print the predict table")
    p_tables.add_argument("grammar")
    p_tables.add_argument("--format", choices=("text", "kv"), default="text")
    p_tables.add_argument("--start", help="start rule (default: first rule)")
    p_tables.set_defaults(func=cmd_tables)

    p_norm = sub.add_parser("normalize", help="print the normalized grammar")
    p_norm.add_argument("grammar")
    p_norm.set_defaults(func=cmd_normalize)

    p_parse = sub.add_parser("parse", help="parse an XML document with a grammar")
    p_parse.add_argument("grammar")
    p_parse.add_argument("document")
    p_parse.add_argument("--start", help="start rule (default: first rule)")
    p_parse.add_argument("--format", choices=("term", "json"), default="term")
    p_parse.add_argument("--oracle", action="store_true", help="use the reference interpreter")
    p_parse.add_argument("--keep-whitespace", action="store_true")
    p_parse.set_defaults(func=cmd_parse)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
