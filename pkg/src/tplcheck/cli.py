"""Command-line surface: analyses, disclosure checks, and report rendering.

Exit codes follow the compliance contract: ``0`` for success or a
compliant subject, ``2`` when findings are present, ``1`` for runtime
errors (missing or malformed inputs), and ``64`` for usage errors.

Output is deterministic: JSON uses sorted keys and carries ``"schema": 1``;
a timestamp appears only with ``--timestamps``.  A ``key = value`` config
file can pre-fill any long option (explicit flags win), and the
environment variable ``TPLCHECK_LEXICON_DIR`` redirects bundled lexicon
lookups to a directory of replacement files.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .adup import build_adups, load_action_lexicon, load_generic_terms
from .callgraph import build_fcg, coverage, entry_points
from .compliance import (
    GoldenMismatch,
    adup_to_dict,
    app_compliance_report,
    interaction_to_dict,
    load_golden_labels,
    load_pi_synonyms,
    score_against_golden,
    tpl_compliance_report,
)
from .dataflow import analyze_data_usage, find_doi, load_pi_rules
from .interaction import load_registry, prefix_matches
from .ir import ParseError, parse_program
from .policy_ingest import FormatError, load_parsed_doc
from .propagation import load_dep_graph, propagate

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 2
EXIT_USAGE = 64

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse with the sysexits-style usage code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class _UsageError(Exception):
    """An option required by the subcommand is absent after config merge."""


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [
        "--" + name.replace("_", "-")
        for name in names
        if getattr(args, name) in (None, "")
    ]
    if missing:
        raise _UsageError(f"missing required option(s): {', '.join(missing)}")


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class RunConfig:
    """Validated input/output paths shared by the analysis subcommands."""

    ir: Optional[Path] = None
    policy: Optional[Path] = None
    registry: Optional[Path] = None
    rules: Optional[Path] = None
    actions: Optional[Path] = None
    generic: Optional[Path] = None
    synonyms: Optional[Path] = None
    golden: Optional[Path] = None
    graph: Optional[Path] = None
    apps_dir: Optional[Path] = None
    out: Optional[Path] = None
    format: str = "json"

    def __post_init__(self):
        if self.format not in ("json", "text"):
            raise ValueError(f"unknown report format {self.format!r}")
        for name in (
            "ir",
            "policy",
            "registry",
            "rules",
            "actions",
            "generic",
            "synonyms",
            "golden",
            "graph",
            "apps_dir",
        ):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ValueError(f"--{name.replace('_', '-')} path not found: {value}")


def _load_config_file(path: Path) -> dict:
    """A flat ``key = value`` file; ``#`` comments and blank lines ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        values[key] = value.strip().strip("'\"")
    return values


_TRUE_WORDS = ("1", "true", "yes", "on")


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset options from the config file; explicit flags keep priority."""
    if not getattr(args, "config", None):
        return
    for key, value in _load_config_file(Path(args.config)).items():
        if not hasattr(args, key) or key in ("config", "command", "handler"):
            continue
        current = getattr(args, key)
        if current is None:
            setattr(args, key, value)
        elif current is False and isinstance(current, bool):
            setattr(args, key, value.lower() in _TRUE_WORDS)


# ---------------------------------------------------------------------------
# Output


def _emit(args: argparse.Namespace, payload: dict, text_lines) -> None:
    if args.format == "json":
        payload = dict(payload)
        payload["schema"] = SCHEMA_VERSION
        if args.timestamps:
            payload["generated_at"] = _now_iso()
        rendered = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = list(text_lines)
        if args.timestamps:
            lines.insert(0, f"# generated at {_now_iso()}")
        rendered = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)


def _now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Shared loaders


def _load_program(path):
    return parse_program(Path(path).read_text(encoding="utf-8"), source=str(path))


def _select_entries(program, mode: str):
    declared = list(program.declared_entries)
    if mode == "declared":
        if not declared:
            raise ValueError("no '# entry' directives in the IR file")
        return declared
    if mode == "public":
        return entry_points(program)
    return declared or entry_points(program)


def _lexicons(args):
    syn = load_pi_synonyms(getattr(args, "synonyms", None))
    actions = load_action_lexicon(getattr(args, "actions", None))
    generic = load_generic_terms(getattr(args, "generic", None))
    return syn, actions, generic


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_fcg(args) -> int:
    _require(args, "ir")
    cfg = RunConfig(ir=args.ir, out=args.out, format=args.format)
    program = _load_program(cfg.ir)
    entries = _select_entries(program, args.entries)
    fcg = build_fcg(program, entries)
    stats = coverage(fcg, program)
    payload = {
        "entries": sorted(str(s) for s in entries),
        "nodes": sorted(str(s) for s in fcg.nodes),
        "external": sorted(str(s) for s in fcg.external),
        "edges": [
            {"caller": str(c), "callee": str(t), "site": site}
            for c, t, site in sorted(fcg.edges, key=lambda e: (str(e[0]), e[2], str(e[1])))
        ],
        "coverage": {
            "nodes_fcg": stats.nodes_fcg,
            "nodes_total": stats.nodes_total,
            "coverage": stats.coverage,
            "edge_count": stats.edge_count,
        },
    }
    lines = [f"entry {s}" for s in payload["entries"]]
    lines += [f"node {s}" for s in payload["nodes"]]
    lines += [f"external {s}" for s in payload["external"]]
    lines += [f"edge {e['caller']} -> {e['callee']} @{e['site']}" for e in payload["edges"]]
    lines.append(
        f"coverage {stats.coverage:.4f} ({stats.nodes_fcg}/{stats.nodes_total})"
    )
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_dataflow(args) -> int:
    _require(args, "ir")
    cfg = RunConfig(ir=args.ir, rules=args.rules, out=args.out, format=args.format)
    program = _load_program(cfg.ir)
    api_rules, kw_rules = load_pi_rules(cfg.rules)
    entries = _select_entries(program, args.entries)
    fcg = build_fcg(program, entries)
    traces = [
        analyze_data_usage(program, fcg, site)
        for site in find_doi(program, api_rules, kw_rules)
    ]
    payload = {
        "traces": [
            {
                "pi": t.root.pi.id,
                "label": t.root.pi.display,
                "root": t.root.smi,
                "df": sorted(e.smi for e in t.df),
                "terminals": sorted(e.smi for e in t.terminals),
            }
            for t in traces
        ]
    }
    lines = []
    for t in payload["traces"]:
        lines.append(f"trace {t['pi']} root {t['root']}")
        lines += [f"  df {smi}" for smi in t["df"]]
        lines += [f"  terminal {smi}" for smi in t["terminals"]]
    lines.append(f"{len(traces)} trace(s)")
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_extract_adup(args) -> int:
    _require(args, "policy")
    cfg = RunConfig(
        policy=args.policy,
        actions=args.actions,
        generic=args.generic,
        out=args.out,
        format=args.format,
    )
    doc = load_parsed_doc(cfg.policy)
    actions = load_action_lexicon(cfg.actions)
    generic = load_generic_terms(cfg.generic)
    adups = build_adups(doc, actions, generic)
    payload = {"source_id": doc.source_id, "adups": [adup_to_dict(a) for a in adups]}
    lines = []
    for a in adups:
        types = ", ".join(sorted(a.data_type))
        recipients = ", ".join(sorted(a.data_recipient)) or "-"
        flags = ("neg " if a.neg else "") + ("vague" if a.vague else "")
        lines.append(
            f"adup s{a.sentence_id} {a.data_entity} {a.action} [{a.kind}] "
            f"types=({types}) recipients=({recipients}) {flags}".rstrip()
        )
    lines.append(f"{len(adups)} adup(s)")
    _emit(args, payload, lines)
    return EXIT_OK


def _infer_tpl_entry(program, registry):
    class_names = [cls.name for cls in program.classes]
    matches = [
        entry
        for entry in registry.entries
        if any(
            prefix_matches(name, prefix)
            for name in class_names
            for prefix in entry.package_prefixes
        )
    ]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise ValueError(
            "no registry entry matches the IR's class names; pass --tpl explicitly"
        )
    ids = ", ".join(e.tpl_id for e in matches)
    raise ValueError(f"multiple registry entries match ({ids}); pass --tpl explicitly")


def _report_lines(report) -> list:
    lines = [f"subject {report.subject}"]
    for f in report.findings:
        parts = [f"finding {f.kind}", f"confidence={f.confidence}"]
        if f.pi is not None:
            parts.append(f"pi={f.pi.id}")
        if f.tpl is not None:
            parts.append(f"tpl={f.tpl}")
        lines.append(" ".join(parts))
        lines += [f"  evidence {e}" for e in f.evidence]
    lines.append(
        "compliant" if report.compliant else f"{len(report.findings)} finding(s)"
    )
    return lines


def _cmd_check_tpl(args) -> int:
    _require(args, "registry")
    cfg = RunConfig(
        ir=args.ir,
        policy=args.policy,
        registry=args.registry,
        synonyms=args.synonyms,
        actions=args.actions,
        generic=args.generic,
        out=args.out,
        format=args.format,
    )
    registry = load_registry(cfg.registry)
    program = _load_program(cfg.ir) if cfg.ir else None
    if args.tpl:
        entry = registry.get(args.tpl)
        if entry is None:
            raise ValueError(f"unknown tpl id {args.tpl!r}")
    else:
        if program is None:
            raise ValueError("without --ir, --tpl is required")
        entry = _infer_tpl_entry(program, registry)
    doc = load_parsed_doc(cfg.policy) if cfg.policy else None
    syn, actions, generic = _lexicons(args)
    report = tpl_compliance_report(
        program, doc, entry, syn=syn, actions=actions, generic=generic
    )
    _emit(args, report.to_dict(), _report_lines(report))
    return EXIT_OK if report.compliant else EXIT_FINDINGS


def _cmd_check_app(args) -> int:
    _require(args, "ir", "registry")
    cfg = RunConfig(
        ir=args.ir,
        policy=args.policy,
        registry=args.registry,
        synonyms=args.synonyms,
        actions=args.actions,
        generic=args.generic,
        golden=args.golden,
        out=args.out,
        format=args.format,
    )
    registry = load_registry(cfg.registry)
    program = _load_program(cfg.ir)
    doc = load_parsed_doc(cfg.policy) if cfg.policy else None
    app_id = args.app_id or Path(cfg.ir).stem
    syn, actions, generic = _lexicons(args)
    report = app_compliance_report(
        program,
        doc,
        registry,
        subject=app_id,
        syn=syn,
        actions=actions,
        generic=generic,
    )
    if cfg.golden:
        labels = load_golden_labels(cfg.golden)
        if app_id not in labels:
            raise GoldenMismatch(f"golden labels do not cover app {app_id!r}")
        counters = score_against_golden([report], {app_id: labels[app_id]})
        report = dataclasses.replace(report, counters=counters)
    _emit(args, report.to_dict(), _report_lines(report))
    return EXIT_OK if report.compliant else EXIT_FINDINGS


def _cmd_propagate(args) -> int:
    _require(args, "graph", "seeds")
    cfg = RunConfig(graph=args.graph, out=args.out, format=args.format)
    graph = load_dep_graph(cfg.graph)
    seeds = [s.strip() for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        raise ValueError("no seed artifacts given")
    rounds = 2 if args.rounds is None else int(args.rounds)
    report = propagate(graph, seeds, rounds=rounds)
    payload = report.to_dict()
    lines = ["round  newly  cumulative  edge_hits"]
    lines.append(f"seeds  {'-':>5}  {len(report.seeds):>10}  {'-':>9}")
    for r in report.rounds:
        lines.append(
            f"{r.round_index:>5}  {len(r.newly_affected):>5}  "
            f"{r.cumulative_count:>10}  {r.edge_hits:>9}"
        )
    if report.unknown_seeds:
        lines.append("unknown seeds: " + ", ".join(report.unknown_seeds))
    lines.append(f"total affected: {report.total_affected}")
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_report(args) -> int:
    _require(args, "apps_dir", "registry")
    cfg = RunConfig(
        registry=args.registry,
        apps_dir=args.apps_dir,
        synonyms=args.synonyms,
        actions=args.actions,
        generic=args.generic,
        golden=args.golden,
        graph=args.graph,
        out=args.out,
        format=args.format,
    )
    registry = load_registry(cfg.registry)
    syn, actions, generic = _lexicons(args)
    ir_paths = sorted(Path(cfg.apps_dir).glob("*.ir"))
    if not ir_paths:
        raise ValueError(f"no .ir files under {cfg.apps_dir}")
    reports = []
    for ir_path in ir_paths:
        policy_path = ir_path.with_suffix(".conllu")
        doc = load_parsed_doc(policy_path) if policy_path.exists() else None
        program = _load_program(ir_path)
        reports.append(
            app_compliance_report(
                program,
                doc,
                registry,
                subject=ir_path.stem,
                syn=syn,
                actions=actions,
                generic=generic,
            )
        )

    payload = {"apps": [r.to_dict() for r in reports]}
    lines = []
    for report in reports:
        lines += _report_lines(report)
        lines.append("")

    if cfg.golden:
        labels = load_golden_labels(cfg.golden)
        counters = score_against_golden(reports, labels)
        payload["counters"] = counters
        for check in ("tpl_list", "tpl_data"):
            for level in ("trace", "app"):
                c = counters[check][level]
                lines.append(
                    f"{check} {level}: tp={c['tp']} tn={c['tn']} fp={c['fp']} fn={c['fn']}"
                )

    if cfg.graph:
        seeds = [s.strip() for s in (args.seeds or "").split(",") if s.strip()]
        if not seeds:
            raise ValueError("--graph requires --seeds")
        rounds = 2 if args.rounds is None else int(args.rounds)
        prop = propagate(load_dep_graph(cfg.graph), seeds, rounds=rounds)
        payload["propagation"] = prop.to_dict()
        lines.append(f"propagation total affected: {prop.total_affected}")

    total_findings = sum(len(r.findings) for r in reports)
    lines.append(f"{total_findings} finding(s) across {len(reports)} app(s)")
    _emit(args, payload, lines)
    return EXIT_OK if total_findings == 0 else EXIT_FINDINGS


# ---------------------------------------------------------------------------
# Parser assembly


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="tplcheck",
        description="Privacy-compliance checks for libraries and host apps.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file pre-filling options")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument(
        "--format", choices=("json", "text"), default=None, help="report format"
    )
    common.add_argument(
        "--timestamps",
        action="store_true",
        help="include a generation timestamp (off by default for reproducible output)",
    )

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("fcg", parents=[common], help="build the function call graph")
    p.add_argument("--ir", help="IR program file")
    p.add_argument(
        "--entries",
        choices=("auto", "declared", "public"),
        default="auto",
        help="entry selection: declared '# entry' lines, public methods, or auto",
    )
    p.set_defaults(handler=_cmd_fcg)

    p = sub.add_parser(
        "dataflow", parents=[common], help="trace personal-information usage"
    )
    p.add_argument("--ir", help="IR program file")
    p.add_argument("--rules", help="data-access rule TSV (bundled rules by default)")
    p.add_argument("--entries", choices=("auto", "declared", "public"), default="auto")
    p.set_defaults(handler=_cmd_dataflow)

    p = sub.add_parser(
        "extract-adup", parents=[common], help="extract data-usage statements"
    )
    p.add_argument("--policy", help="annotated policy file")
    p.add_argument("--actions", help="action verb TSV override")
    p.add_argument("--generic", help="generic-term list override")
    p.set_defaults(handler=_cmd_extract_adup)

    p = sub.add_parser(
        "check-tpl", parents=[common], help="normativeness and legality for a library"
    )
    p.add_argument("--ir", help="library IR file")
    p.add_argument("--policy", help="library's annotated policy")
    p.add_argument("--registry", help="library registry JSON")
    p.add_argument("--tpl", help="registry id (inferred from IR class names if omitted)")
    p.add_argument("--synonyms", help="data-type synonym TSV override")
    p.add_argument("--actions", help="action verb TSV override")
    p.add_argument("--generic", help="generic-term list override")
    p.set_defaults(handler=_cmd_check_tpl)

    p = sub.add_parser(
        "check-app", parents=[common], help="disclosure checks for a host app"
    )
    p.add_argument("--ir", help="app IR file")
    p.add_argument("--policy", help="app's annotated policy")
    p.add_argument("--registry", help="library registry JSON")
    p.add_argument("--app-id", help="subject name (defaults to the IR file stem)")
    p.add_argument("--golden", help="hand-labeled ground truth JSON for scoring")
    p.add_argument("--synonyms", help="data-type synonym TSV override")
    p.add_argument("--actions", help="action verb TSV override")
    p.add_argument("--generic", help="generic-term list override")
    p.set_defaults(handler=_cmd_check_app)

    p = sub.add_parser(
        "propagate", parents=[common], help="spread non-compliance over dependents"
    )
    p.add_argument("--graph", help="dependency graph file")
    p.add_argument("--seeds", help="comma-separated seed artifact ids")
    p.add_argument("--rounds", type=int, default=None, help="propagation rounds (default 2)")
    p.set_defaults(handler=_cmd_propagate)

    p = sub.add_parser(
        "report", parents=[common], help="combined report over a directory of apps"
    )
    p.add_argument(
        "--apps-dir",
        help="directory of <app>.ir files with matching <app>.conllu policies",
    )
    p.add_argument("--registry", help="library registry JSON")
    p.add_argument("--golden", help="ground-truth JSON; adds confusion counters")
    p.add_argument("--graph", help="dependency graph for a propagation section")
    p.add_argument("--seeds", help="comma-separated seeds (with --graph)")
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--synonyms", help="data-type synonym TSV override")
    p.add_argument("--actions", help="action verb TSV override")
    p.add_argument("--generic", help="generic-term list override")
    p.set_defaults(handler=_cmd_report)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _merge_config(args)
        if args.format is None:
            args.format = "json"
        return args.handler(args)
    except _UsageError as exc:
        print(f"tplcheck {args.command}: error: {exc}", file=sys.stderr)
        print(f"run 'tplcheck {args.command} --help' for usage", file=sys.stderr)
        return EXIT_USAGE
    except (
        OSError,
        ParseError,
        FormatError,
        GoldenMismatch,
        ValueError,
        KeyError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
