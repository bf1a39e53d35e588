"""``aicat`` command line: validate, query, export, register, serve, merge.

Exit codes: 0 success, 1 validation failure or rejection, 2 usage or
parse error, 3 I/O error. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import enum
import json
import logging
import os
import sys
import urllib.error
import urllib.request
from pathlib import Path
from typing import Optional, Sequence

from .catalog import CompetencyQuestionId, answer_cq
from .graph import BlankNode, Graph, GraphError, Iri, Literal, Term
from .profile import (
    RISK_TOKENS,
    ROLE_TOKENS,
    NationalRegistration,
    RegistrantRole,
    RiskStatus,
    ScenarioError,
    classify_scenario,
    parse_token,
    required_fields,
    validate_registration,
)
from .rdfio import FORMATS, ParseError, SourceDocument, parse_turtle, serialize
from .shacl import ShapeParseError, ValidationReport, parse_shapes, validate
from .vocab import UnknownPrefixError, compact_iri, expand_curie

log = logging.getLogger("aicat")


class ExitCode(enum.IntEnum):
    OK = 0
    VALIDATION_FAILURE = 1
    USAGE = 2
    IO = 3


class CliError(Exception):
    def __init__(self, code: ExitCode, message: str) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors surface as CliError, not SystemExit."""

    def error(self, message: str):  # type: ignore[override]
        raise CliError(ExitCode.USAGE, f"{self.prog}: {message}")


def _prefix_arg(text: str) -> tuple[str, str]:
    label, sep, ns = text.partition("=")
    if not sep or not ns:
        raise argparse.ArgumentTypeError(f"expected LABEL=IRI, got {text!r}")
    return label, ns


def _point_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"point must be an integer, got {text!r}") from None
    if not 1 <= value <= 8:
        raise argparse.ArgumentTypeError(f"point must be in 1..8, got {value}")
    return value


def _token_arg(cls, tokens):
    def convert(text: str):
        try:
            return parse_token(cls, text, tokens)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return convert


def _scenario_arg(text: str) -> tuple[int, RiskStatus, RegistrantRole]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected POINT,RISK,ROLE, got {text!r}")
    return (
        _point_arg(parts[0]),
        _token_arg(RiskStatus, RISK_TOKENS)(parts[1]),
        _token_arg(RegistrantRole, ROLE_TOKENS)(parts[2]),
    )


# -- helpers ---------------------------------------------------------------


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(ExitCode.IO, f"cannot read {path}: {exc}") from None


def _load(path: str, args) -> Graph:
    text = _read(path)
    try:
        return parse_turtle(SourceDocument(text, prefixes=dict(args.prefix or [])))
    except ParseError as exc:
        raise CliError(ExitCode.USAGE, f"{path}:{exc.line}:{exc.column}: {exc.kind.value}: {exc.message}") from None
    except GraphError as exc:
        raise CliError(ExitCode.USAGE, f"{path}: {exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(ExitCode.IO, f"cannot write {path}: {exc}") from None


def _resolve(text: str, graph: Graph) -> Iri:
    """A CURIE in the document's prefixes, ``<iri>``, or a bare absolute IRI."""
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    label = text.split(":", 1)[0]
    try:
        if ":" in text and label in graph.prefixes:
            return expand_curie(graph.prefixes, text)
        return Iri(text)
    except (GraphError, UnknownPrefixError, ValueError) as exc:
        raise CliError(ExitCode.USAGE, f"cannot resolve {text!r} to an IRI: {exc}") from None


def format_term(term: Term, prefixes) -> str:
    """CURIE when the prefixes allow it, else the bare IRI; literals as their lexical form."""
    if isinstance(term, Iri):
        return compact_iri(prefixes, term) or term.value
    if isinstance(term, BlankNode):
        return term.n3()
    assert isinstance(term, Literal)
    return term.lexical


def _emit_report(report: ValidationReport, args) -> None:
    if not args.quiet:
        sys.stdout.write(report.to_text())
        if not report.to_text().endswith("\n"):
            sys.stdout.write("\n")
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


# -- commands ------------------------------------------------------------------


def cmd_validate(args) -> ExitCode:
    data = _load(args.file, args)
    if args.shapes:
        try:
            shapes = parse_shapes(_load(args.shapes, args))
        except ShapeParseError as exc:
            raise CliError(ExitCode.USAGE, f"{args.shapes}: {exc}") from None
        report = validate(data, shapes)
        # shape terms outside the supported subset are reported, not fatal
        for note in shapes.ignored:
            print(f"note: {note}", file=sys.stderr)
    else:
        point, risk, role = args.scenario
        try:
            scenario = classify_scenario(point, risk, role)
            report = validate_registration(data, required_fields(scenario, args.with_models))
        except NationalRegistration as exc:
            print(f"notice: {exc} (visibility NationalLevel)", file=sys.stderr)
            if args.json:
                sys.stdout.write(json.dumps({"conforms": False, "notice": str(exc), "visibility": "NationalLevel"}) + "\n")
            elif not args.quiet:
                print("conforms: false, NationalLevel registration")
            return ExitCode.VALIDATION_FAILURE
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return ExitCode.VALIDATION_FAILURE
    _emit_report(report, args)
    return ExitCode.OK if report.conforms else ExitCode.VALIDATION_FAILURE


def cmd_query(args) -> ExitCode:
    try:
        cq = CompetencyQuestionId.parse(args.cq)
    except ValueError as exc:
        raise CliError(ExitCode.USAGE, str(exc)) from None
    graph = _load(args.file, args)
    subject = _resolve(args.subject, graph)
    answers = answer_cq(graph, cq, subject)
    if args.json:
        sys.stdout.write(json.dumps([t.n3() for t in answers]) + "\n")
    else:
        for term in answers:
            print(format_term(term, graph.prefixes))
    return ExitCode.OK


def cmd_export(args) -> ExitCode:
    graph = _load(args.file, args)
    _write(args.output, serialize(graph, args.format))
    return ExitCode.OK


def _register_direct(args, graph: Graph, system: Iri) -> ExitCode:
    from .registry import CatalogStore, InputError, Rejected

    try:
        store = CatalogStore(args.store)
    except OSError as exc:
        raise CliError(ExitCode.IO, f"cannot open store {args.store}: {exc}") from None
    try:
        record = store.submit_registration(graph, system, args.point, args.risk, args.role, args.with_models)
    except Rejected as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        if exc.report is not None:
            _emit_report(exc.report, args)
        return ExitCode.VALIDATION_FAILURE
    except ScenarioError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return ExitCode.VALIDATION_FAILURE
    except InputError as exc:
        raise CliError(ExitCode.USAGE, str(exc)) from None
    except OSError as exc:
        raise CliError(ExitCode.IO, f"store write failed: {exc}") from None
    if args.json:
        sys.stdout.write(json.dumps({"recordId": record.record_id, "visibility": record.visibility.value}) + "\n")
    else:
        print(record.record_id)
    return ExitCode.OK


def _register_remote(args, text: str, system: Iri) -> ExitCode:
    body = json.dumps(
        {
            "turtle": text,
            "systemIri": system.value,
            "point": args.point,
            "risk": args.risk.value,
            "role": args.role.value,
            "includesModelMetadata": args.with_models,
        }
    ).encode("utf-8")
    request = urllib.request.Request(
        args.url.rstrip("/") + "/registrations", data=body, method="POST",
        headers={"Content-Type": "application/json"},
    )
    token = args.token or os.environ.get("AICAT_TOKEN")
    if token:
        request.add_header("Authorization", f"Bearer {token}")
    try:
        with urllib.request.urlopen(request, timeout=30) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", "replace")
        if exc.code == 422:
            print(f"rejected: {detail}", file=sys.stderr)
            return ExitCode.VALIDATION_FAILURE
        if exc.code in (400, 401):
            raise CliError(ExitCode.USAGE, f"service refused the request ({exc.code}): {detail}") from None
        raise CliError(ExitCode.IO, f"service error {exc.code}: {detail}") from None
    except (urllib.error.URLError, OSError) as exc:
        raise CliError(ExitCode.IO, f"cannot reach {args.url}: {exc}") from None
    print(json.dumps(payload) if args.json else payload["recordId"])
    return ExitCode.OK


def cmd_register(args) -> ExitCode:
    graph = _load(args.file, args)
    system = _resolve(args.system, graph)
    if args.store:
        return _register_direct(args, graph, system)
    # the service parses the text itself, so implicit prefixes must be written out
    text = "".join(f"@prefix {k}: <{v}> .\n" for k, v in (args.prefix or [])) + _read(args.file)
    return _register_remote(args, text, system)


def cmd_serve(args) -> ExitCode:
    from .registry.http import make_server

    try:
        server = make_server(args.store, args.bind)
    except ValueError as exc:
        raise CliError(ExitCode.USAGE, str(exc)) from None
    except OSError as exc:
        raise CliError(ExitCode.IO, f"cannot start server: {exc}") from None
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return ExitCode.OK


def cmd_merge(args) -> ExitCode:
    merged = Graph()
    for path in args.files:
        merged = merged.merge(_load(path, args))
    _write(args.output, serialize(merged, args.format))
    return ExitCode.OK


# -- wiring --------------------------------------------------------------------


def _common(top: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so they do not reset flags given before the command
    extra = {} if top else {"default": argparse.SUPPRESS}
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="also emit machine-readable JSON", **extra)
    common.add_argument("--quiet", action="store_true", help="suppress the plain-text report", **extra)
    common.add_argument(
        "--prefix", action="append", type=_prefix_arg, metavar="LABEL=IRI",
        help="implicit prefix binding for input documents (repeatable; empty LABEL binds ':')", **extra,
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(top=False)
    parser = _Parser(prog="aicat", description="AI catalogue validation, query and registry tools.", parents=[_common(top=True)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="validate a catalogue against shapes or a scenario")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--shapes", metavar="FILE")
    group.add_argument("--scenario", type=_scenario_arg, metavar="POINT,RISK,ROLE")
    p.add_argument("--with-models", action="store_true", help="include the model metadata rows")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", parents=[common], help="answer a competency question")
    p.add_argument("file")
    p.add_argument("--cq", required=True, metavar="ID")
    p.add_argument("--subject", required=True, metavar="IRI")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", parents=[common], help="serialize a catalogue")
    p.add_argument("file")
    p.add_argument("--format", choices=FORMATS, default="turtle")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("register", parents=[common], help="submit a registration")
    p.add_argument("file")
    dest = p.add_mutually_exclusive_group(required=True)
    dest.add_argument("--store", metavar="DIR", help="write directly into a store directory")
    dest.add_argument("--url", help="base URL of a running registry service")
    p.add_argument("--system", required=True, metavar="IRI")
    p.add_argument("--point", required=True, type=_point_arg)
    p.add_argument("--risk", required=True, type=_token_arg(RiskStatus, RISK_TOKENS), metavar="high|assessed-non-high")
    p.add_argument("--role", required=True, type=_token_arg(RegistrantRole, ROLE_TOKENS),
                   metavar="provider|authrep|deployer")
    p.add_argument("--with-models", action="store_true")
    p.add_argument("--token", help="bearer token for --url (default: AICAT_TOKEN)")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("serve", parents=[common], help="run the registry HTTP API")
    p.add_argument("--store", metavar="DIR", help="store root (default: AICAT_STORE_DIR)")
    p.add_argument("--bind", metavar="HOST:PORT", help="listen address (default: AICAT_BIND or 127.0.0.1:8080)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("merge", parents=[common], help="union several catalogues")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=FORMATS, default="turtle")
    p.set_defaults(func=cmd_merge)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        return int(args.func(args))
    except CliError as exc:
        print(exc, file=sys.stderr)
        return int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
