"""Command-line surface: check, manifest, run, inspect, serve.

Exit codes: 0 success, 1 diagnostics at/above the --fail-on threshold (or a
refused run / incomplete meta), 2 usage or parse errors, 3 internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import runtime
from .analysis import analyze_flow, check_payload
from .library import builtin_specs
from .manifest import (
    ManifestError,
    MissingStatutoryFields,
    build_manifest,
    meta_from_json,
    serialize_manifest,
)
from .model import FlowError, InvalidSpecError, SpecRegistry, load_flow, spec_from_json

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _canonical(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _load_registry(specs_dir: Optional[str]) -> SpecRegistry:
    registry = builtin_specs()
    if specs_dir:
        root = Path(specs_dir)
        if not root.is_dir():
            raise CliError(f"spec directory {specs_dir!r} does not exist", EXIT_USAGE)
        for path in sorted(root.glob("*.json")):
            try:
                registry.register(spec_from_json(json.loads(path.read_text(encoding="utf-8"))))
            except (json.JSONDecodeError, InvalidSpecError, FlowError) as e:
                raise CliError(f"bad nodespec {path.name}: {e}", EXIT_USAGE) from None
    return registry


def _load_flow(path: str, registry: SpecRegistry):
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise CliError(f"cannot read flow file: {e}", EXIT_USAGE) from None
    try:
        return load_flow(raw, registry)
    except FlowError as e:
        raise CliError(f"invalid flow file: {e}", EXIT_USAGE) from None


def cmd_check(args) -> int:
    registry = _load_registry(args.specs)
    flow = _load_flow(args.flow, registry)
    report = analyze_flow(flow, registry)
    if args.format == "json":
        sys.stdout.write(_canonical(check_payload(report)))
    else:
        for d in report.diagnostics:
            loc = json.dumps(d.loc.to_json(), ensure_ascii=False)
            sys.stdout.write(f"{d.severity}: [{d.code}] {loc} {d.message}\n")
        from .taint import label_map_to_json

        for entry in label_map_to_json(report.labels)["wires"]:
            badges = "".join(sorted({a["cat"][0].upper() for a in entry["atoms"]})) or "-"
            sys.stdout.write(
                f"label: {entry['from'][0]}:{entry['from'][1]} -> "
                f"{entry['to'][0]}:{entry['to'][1]} [{badges}] "
                f"{', '.join(a['cat'] + ':' + a['tag'] for a in entry['atoms']) or 'clean'}\n"
            )
        sys.stdout.write(
            f"risk: app {report.risk.app_score}/5 ({report.risk.band}); "
            + "; ".join(f"{n.node_id} {n.score} in {list(n.spectrum)}" for n in report.risk.nodes)
            + "\n"
        )
    threshold = {"error": ("error",), "warn": ("error", "warning")}[args.fail_on]
    if any(d.severity in threshold for d in report.diagnostics):
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_manifest(args) -> int:
    registry = _load_registry(args.specs)
    flow = _load_flow(args.flow, registry)
    try:
        meta_raw = json.loads(Path(args.meta).read_text(encoding="utf-8"))
    except OSError as e:
        raise CliError(f"cannot read meta file: {e}", EXIT_USAGE) from None
    except json.JSONDecodeError as e:
        raise CliError(f"meta file is not valid JSON: {e}", EXIT_USAGE) from None
    report = analyze_flow(flow, registry)
    try:
        manifest = build_manifest(flow, registry, report.labels, report.risk, meta_from_json(meta_raw))
    except MissingStatutoryFields as e:
        sys.stderr.write(f"manifest incomplete: {e}\n")
        return EXIT_FINDINGS
    except ManifestError as e:
        raise CliError(str(e), EXIT_USAGE) from None
    payload = serialize_manifest(manifest)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def _parse_profiles(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise CliError(f"--profile expects node=name, got {pair!r}", EXIT_USAGE)
        node, name = pair.split("=", 1)
        out[node] = name
    return out


def cmd_run(args) -> int:
    registry = _load_registry(args.specs)
    flow = _load_flow(args.flow, registry)
    profiles = _parse_profiles(args.profile or ())
    try:
        result = runtime.start_session(flow, registry, args.seed, args.duration, profiles)
    except runtime.RefusedToRun as e:
        sys.stderr.write(f"refusing to run: {e}\n")
        return EXIT_FINDINGS
    if args.provenance:
        Path(args.provenance).write_bytes(result.log_bytes())
    if args.format == "json":
        summary = {
            "seed": args.seed,
            "duration": args.duration,
            "records": len(result.records),
            "faults": result.faults,
            "emitted": {k: result.emitted[k] for k in sorted(result.emitted)},
            "outputs": {
                k: [{"t": t, "msg": m, "payload": p} for t, m, p in v]
                for k, v in sorted(result.outputs.items())
            },
        }
        sys.stdout.write(_canonical(summary))
    else:
        sys.stdout.write(
            f"session: {len(result.records)} records, {result.faults} fault(s)\n"
        )
        for node_id in sorted(result.emitted):
            received = len(result.outputs.get(node_id, ()))
            sys.stdout.write(
                f"node {node_id}: emitted {result.emitted[node_id]}"
                + (f", received {received}" if node_id in result.outputs else "")
                + "\n"
            )
    return EXIT_OK


def cmd_inspect(args) -> int:
    try:
        text = Path(args.log).read_text(encoding="utf-8")
        records = runtime.parse_log(text)
    except OSError as e:
        raise CliError(f"cannot read log: {e}", EXIT_USAGE) from None
    except (json.JSONDecodeError, KeyError) as e:
        raise CliError(f"malformed log: {e}", EXIT_USAGE) from None
    if args.message is not None:
        try:
            tree = runtime.lineage(records, args.message)
        except runtime.UnknownMessage as e:
            raise CliError(str(e), EXIT_USAGE) from None
        if args.format == "json":
            sys.stdout.write(_canonical(tree.to_json()))
        else:
            _print_lineage(tree, 0)
        return EXIT_OK
    if args.node is None:
        raise CliError("inspect needs --node or --message", EXIT_USAGE)
    t_from, t_to = 0, max((r.t for r in records), default=0)
    if args.window:
        try:
            a, b = args.window.split("..", 1)
            t_from, t_to = int(a), int(b)
        except ValueError:
            raise CliError(f"--window expects A..B, got {args.window!r}", EXIT_USAGE) from None
    try:
        rows = runtime.window(records, args.node, t_from, t_to)
    except runtime.UnknownNode as e:
        raise CliError(str(e), EXIT_USAGE) from None
    except ValueError as e:
        raise CliError(str(e), EXIT_USAGE) from None
    if args.format == "json":
        sys.stdout.write(_canonical([r.to_json() for r in rows]))
    else:
        for r in rows:
            sys.stdout.write(runtime.record_line(r) + "\n")
    return EXIT_OK


def _print_lineage(node: runtime.LineageNode, depth: int) -> None:
    indent = "  " * depth
    sys.stdout.write(
        f"{indent}msg {node.msg} <- {node.node}:{node.port} @ {node.t} "
        f"{json.dumps(node.payload, ensure_ascii=False)}\n"
    )
    for parent in node.parents:
        _print_lineage(parent, depth + 1)


def cmd_serve(args) -> int:
    registry = _load_registry(args.specs)
    try:
        import uvicorn

        from .server import create_app
    except ImportError as e:  # pragma: no cover
        raise CliError(f"server dependencies missing: {e}", EXIT_INTERNAL) from None
    ui_dir = args.ui
    if ui_dir is None:
        candidate = Path("frontend/dist")
        ui_dir = str(candidate) if (candidate / "index.html").is_file() else None
    elif ui_dir == "":
        ui_dir = None
    app = create_app(registry, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as e:  # port in use and similar startup faults
        if isinstance(e, SystemExit) and not e.code:
            return EXIT_OK
        sys.stderr.write(f"server failed to start: {e}\n")
        return EXIT_INTERNAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowkit",
        description="Check, document, execute, and inspect privacy-aware flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type, personal-data, and risk analysis")
    p.add_argument("flow")
    p.add_argument("--specs", help="directory of extra nodespec JSON files")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--fail-on", choices=("warn", "error"), default="error")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("manifest", help="build the app manifest")
    p.add_argument("flow")
    p.add_argument("--meta", required=True, help="developer metadata JSON")
    p.add_argument("--specs")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_manifest)

    p = sub.add_parser("run", help="execute a checked flow with mock data")
    p.add_argument("flow")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=int, required=True, help="virtual milliseconds")
    p.add_argument("--profile", action="append", metavar="NODE=NAME")
    p.add_argument("--provenance", help="write the provenance log here")
    p.add_argument("--specs")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("inspect", help="lineage and window queries over a log")
    p.add_argument("log")
    p.add_argument("--node")
    p.add_argument("--message", type=int)
    p.add_argument("--window", metavar="A..B")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("serve", help="start the dev server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8940)
    p.add_argument("--specs")
    p.add_argument("--ui", help="editor build to serve at / (default: frontend/dist if present)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except Exception as e:  # anything unplanned is an internal error
        sys.stderr.write(f"internal error: {type(e).__name__}: {e}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
