"""Command line entry point.

Exit codes: 0 success, 1 the campaign found bugs (or a replay diverged),
2 usage or configuration error, 3 environment error (SUT or model backend
unreachable).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .campaign import Campaign, build_catalog, build_sut, load_report, render_report, resume_campaign
from .collector import write_catalog
from .config import load_config
from .errors import (
    BackendUnavailable,
    CampaignLocked,
    ConfigError,
    CorruptCampaign,
    OptFuzzError,
    SandboxFailure,
    UnreadableRoot,
)

EXIT_OK = 0
EXIT_BUGS = 1
EXIT_USAGE = 2
EXIT_ENV = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"optfuzz: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _config_args(p):
    p.add_argument("--config", help="campaign config file (YAML)")
    p.add_argument("--profile", choices=["mini", "full"], help="budget preset: mini = 10 iterations")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. campaign.seed=3 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="optfuzz", description="Optimization-directed compiler fuzzing.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("collect", help="list the optimizations found in the SUT's source")
    _config_args(p)
    p.add_argument("--out", help="write the catalog as JSONL")

    p = sub.add_parser("summarize", help="produce a requirement per optimization")
    _config_args(p)
    p.add_argument("--out", required=True, help="directory for requirement records")

    p = sub.add_parser("fuzz", help="run a campaign")
    _config_args(p)
    p.add_argument("--campaign", required=True, help="campaign directory (must not hold a campaign yet)")

    p = sub.add_parser("resume", help="continue an interrupted campaign")
    p.add_argument("--campaign", required=True)

    p = sub.add_parser("replay", help="re-run a campaign from its recorded model answers")
    p.add_argument("--campaign", required=True)
    p.add_argument("--out", help="directory for the replayed run (default: <campaign>.replay)")

    p = sub.add_parser("report", help="summarize a campaign directory")
    p.add_argument("--campaign", required=True)
    p.add_argument("--json", action="store_true", help="print the machine-readable report")
    p.add_argument("--time", action="store_true", help="add wall-clock timing columns")
    return parser


def _bug_exit(report: dict, fail_on_bugs: bool) -> int:
    rows = report["optimizations"]
    if rows and all(r["blocked"] for r in rows):
        print("optfuzz: every optimization is blocked (backend or SUT unreachable)", file=sys.stderr)
        return EXIT_ENV
    return EXIT_BUGS if fail_on_bugs and report["totals"]["bugs"] else EXIT_OK


def cmd_collect(args) -> int:
    cfg = load_config(args.config, args.overrides, args.profile)
    catalog = build_catalog(cfg, build_sut(cfg))
    if args.out:
        write_catalog(catalog, args.out)
    for o in catalog:
        print(f"{o.name:32s} {o.kind.value:15s} {o.file_path}:{o.line_span[0]}-{o.line_span[1]}  {o.total_lines} lines")
    print(f"{len(catalog)} optimizations", file=sys.stderr)
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = load_config(args.config, args.overrides, args.profile)
    for opt, req in Campaign(cfg, args.out).summarize():
        print(f"== {opt.name} ({req.format.value}, {req.produced_by})")
        print(req.text.rstrip())
    return EXIT_OK


def cmd_fuzz(args) -> int:
    cfg = load_config(args.config, args.overrides, args.profile)
    report = Campaign(cfg, args.campaign).run()
    print(render_report(report), end="")
    return _bug_exit(report, cfg.campaign.fail_on_bugs)


def cmd_resume(args) -> int:
    report = resume_campaign(args.campaign)
    cfg = load_config(Path(args.campaign) / "config.yaml")
    print(render_report(report), end="")
    return _bug_exit(report, cfg.campaign.fail_on_bugs)


def cmd_replay(args) -> int:
    src = Path(args.campaign)
    original = load_report(src)
    if not (src / "config.yaml").exists():
        raise CorruptCampaign(f"{src} has no config.yaml")
    store = str((src / "replay").resolve())
    cfg = load_config(src / "config.yaml", [
        "analysis.backend=replay", f"analysis.replay_dir={store}",
        "generation.backend=replay", f"generation.replay_dir={store}",
        "campaign.record=false",
    ])
    out = Path(args.out) if args.out else src.with_name(src.name + ".replay")
    c = Campaign(cfg, out)
    report = c.run()
    same = json.dumps(report, sort_keys=True) == json.dumps(original, sort_keys=True)
    print(render_report(report), end="")
    print(f"replay: {'identical' if same else 'DIVERGED'} report, {c.model_calls} model calls", file=sys.stderr)
    if not same:
        return EXIT_BUGS
    return _bug_exit(report, cfg.campaign.fail_on_bugs)


def cmd_report(args) -> int:
    report = load_report(args.campaign)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK
    timing = None
    if args.time:
        path = Path(args.campaign) / "timing.json"
        timing = json.loads(path.read_text()) if path.exists() else {}
    print(render_report(report, timing), end="")
    return EXIT_OK


COMMANDS = {
    "collect": cmd_collect,
    "summarize": cmd_summarize,
    "fuzz": cmd_fuzz,
    "resume": cmd_resume,
    "replay": cmd_replay,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CorruptCampaign) as exc:
        print(f"optfuzz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendUnavailable, SandboxFailure, UnreadableRoot, CampaignLocked) as exc:
        print(f"optfuzz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENV
    except OptFuzzError as exc:
        print(f"optfuzz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENV


if __name__ == "__main__":
    sys.exit(main())
