"""``poliview`` command line: collect, curate views, check policy, report.

Exit codes: 0 success, 1 usage error, 2 policy denial, 3 data or storage error.
Diagnostics go to stderr; machine output goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from . import __version__
from .analytics import AnalyticsError, CampaignSource, build_report, emit_report
from .analytics.report import FORMATS
from .collection import CollectionPlan, PlanError, run_collection
from .curation import (
    ViewConfig,
    ViewError,
    apply_validation,
    extract_view,
    load_annotations,
    merge_view,
    parse_view,
    render_view,
)
from .docmodel import DocValueError, ParseError, canonical_json, parse_timestamp
from .policy import PolicyDenied, PolicyEngine, PolicyError, PrivacyLevel, gate, load_ruleset
from .scenario import write_scenario
from .store import DatasetCollection, StorageError, atomic_write

logger = logging.getLogger("poliview")

EXIT_OK, EXIT_USAGE, EXIT_DENIED, EXIT_DATA = 0, 1, 2, 3
SEED_ENV = "POLIVIEW_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# helpers


def _open_dataset(data_dir: str, name: str) -> DatasetCollection:
    root = Path(data_dir) / name
    if not (root / "manifest.json").exists():
        raise StorageError(f"no dataset at {root}")
    return DatasetCollection.open(root)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc


def _snapshot_clock(ds: DatasetCollection):
    """Audit times come from the data, not the wall clock, so reruns match."""
    latest = None
    for doc in ds.iterate():
        if latest is None or doc.provenance.collected_at > latest:
            latest = doc.provenance.collected_at
    stamp = latest or parse_timestamp("1970-01-01T00:00:00Z")
    return lambda: stamp


def _engine(args, ds: DatasetCollection) -> PolicyEngine:
    rules = load_ruleset(args.ruleset) if args.ruleset else None
    privacy = {pid: PrivacyLevel(p.get("sla", {}).get("default_privacy", "public"))
               for pid, p in ds.meta.get("providers", {}).items()}
    return PolicyEngine(rules, provider_privacy=privacy, audit_path=args.audit,
                        clock=_snapshot_clock(ds))


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        atomic_write(Path(path), text)


# --------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    for path in write_scenario(args.out):
        print(path)
    return EXIT_OK


def cmd_collect(args) -> int:
    plan = CollectionPlan.load(args.plan)
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer") from exc
    data = Path(args.data)
    data.mkdir(parents=True, exist_ok=True)
    names = {plan.dataset} | {t["dataset"] for t in plan.tasks if "dataset" in t}
    for name in names:
        if (data / name).exists():
            raise StorageError(f"{data / name} already exists; collect into a fresh directory")
    staging = Path(tempfile.mkdtemp(prefix=".collect-", dir=data))
    try:
        result = run_collection(plan, staging, seed=seed, clock=args.clock)
        atomic_write(staging / "run-report.json", canonical_json(result.report) + "\n")
        for name in sorted(result.datasets):
            os.replace(staging / name, data / name)
        report_path = Path(args.report) if args.report else data / "run-report.json"
        os.replace(staging / "run-report.json", report_path)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    summary = {pid: p["documents"] for pid, p in result.report["providers"].items()}
    print(canonical_json({"datasets": result.report["datasets"], "providers": summary}))
    return EXIT_OK


def cmd_view_extract(args) -> int:
    ds = _open_dataset(args.data, args.dataset)
    config = ViewConfig.from_dict(_read_json(args.config)) if args.config else ViewConfig()
    if args.merge:
        view = merge_view(parse_view(Path(args.merge).read_text("utf-8")), dataset=ds)
    else:
        view = extract_view(ds, config)
    table, doc = render_view(view)
    _write_text(args.out, doc)
    if args.table:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_view_validate(args) -> int:
    view = parse_view(Path(args.view).read_text("utf-8"))
    for ann in load_annotations(Path(args.annotations).read_text("utf-8")):
        view = apply_validation(view, ann)
    _write_text(args.out or args.view, render_view(view)[1])
    return EXIT_OK


def cmd_view_show(args) -> int:
    view = parse_view(Path(args.view).read_text("utf-8"))
    print(f"view of {view.dataset_id}  version {view.version}  {view.status}  "
          f"{view.document_count} documents  {len(view.relationships)} relationships")
    sys.stdout.write(render_view(view)[0])
    return EXIT_OK


def cmd_policy_check(args) -> int:
    ds = _open_dataset(args.data, args.dataset)
    engine = _engine(args, ds)
    result = gate(ds.iterate(), engine, args.purpose, on_deny="exclude")
    summary = result.summary(args.purpose)
    summary["denied"] = result.denied
    print(canonical_json(summary))
    return EXIT_DENIED if result.denied else EXIT_OK


SECTIONS_BY_KIND = {
    "profile": ("candidates", "timelines"),
    "party": ("parties", "countries"),
    "compare": ("candidates", "parties", "countries", "topics", "timelines"),
}


def cmd_report(args) -> int:
    ds = _open_dataset(args.data, args.dataset)
    view = parse_view(Path(args.view).read_text("utf-8"))
    if view.dataset_id != ds.name:
        raise ViewError(f"view {args.view} describes {view.dataset_id}, not {ds.name}")
    engine = _engine(args, ds)
    passed = gate(ds.iterate(), engine, args.purpose, on_deny=args.on_deny)
    if passed.denied:
        logger.warning("excluded %d denied documents", len(passed.denied))
    src = CampaignSource.from_dataset(ds, passed.documents)
    report = build_report(src, args.top_n)
    sections = SECTIONS_BY_KIND[args.kind]
    for fmt in args.format or ["csv"]:
        for path in emit_report(report, fmt, args.out, sections, figures=not args.no_figures):
            print(path)
    if not report.reconciliation.get("ok"):
        logger.error("reconciliation failed: %s", report.reconciliation)
        return EXIT_DATA
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poliview", description="Harvest, curate and compare campaign data.")
    p.add_argument("--version", action="version", version=f"poliview {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write the bundled simulated campaign scenario")
    s.add_argument("--out", required=True, help="directory for plan, script and configs")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("collect", help="run a collection plan")
    s.add_argument("--plan", required=True)
    s.add_argument("--data", required=True, help="directory receiving the datasets")
    s.add_argument("--seed", type=int, default=None, help=f"overrides the plan seed and ${SEED_ENV}")
    s.add_argument("--clock", choices=("virtual", "real"), default=None)
    s.add_argument("--report", default=None, help="run report path (default DATA/run-report.json)")
    s.set_defaults(func=cmd_collect)

    v = sub.add_parser("view", help="extract, validate or show a dataset view")
    vsub = v.add_subparsers(dest="view_command", required=True, parser_class=_Parser)
    s = vsub.add_parser("extract")
    s.add_argument("--data", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--config", default=None, help="view configuration JSON")
    s.add_argument("--merge", default=None, help="existing view to extend with new documents")
    s.add_argument("--out", required=True)
    s.add_argument("--table", action="store_true", help="also print the summary table")
    s.set_defaults(func=cmd_view_extract)
    s = vsub.add_parser("validate")
    s.add_argument("--view", required=True)
    s.add_argument("--annotations", required=True)
    s.add_argument("--out", default=None, help="defaults to overwriting --view")
    s.set_defaults(func=cmd_view_validate)
    s = vsub.add_parser("show")
    s.add_argument("--view", required=True)
    s.set_defaults(func=cmd_view_show)

    pol = sub.add_parser("policy", help="policy evaluation")
    psub = pol.add_subparsers(dest="policy_command", required=True, parser_class=_Parser)
    s = psub.add_parser("check")
    s.add_argument("--data", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--ruleset", default=None, help="defaults to the built-in deny-biased rules")
    s.add_argument("--purpose", choices=("archive", "analyze", "export"), default="export")
    s.add_argument("--audit", default=None, help="append decisions to this JSONL file")
    s.set_defaults(func=cmd_policy_check)

    r = sub.add_parser("report", help="campaign reports")
    r.add_argument("kind", choices=sorted(SECTIONS_BY_KIND))
    r.add_argument("--data", required=True)
    r.add_argument("--dataset", required=True)
    r.add_argument("--view", required=True, help="curated view of the dataset")
    r.add_argument("--ruleset", default=None)
    r.add_argument("--purpose", choices=("archive", "analyze", "export"), default="export")
    r.add_argument("--on-deny", choices=("abort", "exclude"), default="abort")
    r.add_argument("--audit", default=None)
    r.add_argument("--format", action="append", choices=FORMATS)
    r.add_argument("--top-n", type=int, default=10)
    r.add_argument("--no-figures", action="store_true", help="skip PNGs with plot-tsv output")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:          # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"poliview: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PolicyDenied as exc:
        print(f"poliview: policy denial: {exc}", file=sys.stderr)
        return EXIT_DENIED
    except (PlanError, StorageError, ViewError, PolicyError, ParseError, DocValueError,
            AnalyticsError, OSError) as exc:
        print(f"poliview: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
