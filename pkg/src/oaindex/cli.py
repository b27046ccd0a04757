"""Command-line interface.

``oaindex run`` executes the whole pipeline from a JSON config; ``aggregate``,
``indicators``, ``classify`` and ``export`` run one stage each from the
previous stage's files. The config path defaults to ``$OAINDEX_CONFIG``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from oaindex import pipeline
from oaindex.classification import (
    DEFAULT_JENKS_CLASSES,
    DEFAULT_SYMMETRIC_BOUNDS,
    read_schemes,
    write_schemes,
)
from oaindex.config import CONFIG_ENV, RunConfig, validate
from oaindex.corpus import PeriodSpec, SubjectScheme, ZoneRegistry
from oaindex.counting import read_tables, write_tables
from oaindex.errors import ConfigError, OAIndexError
from oaindex.indicators import INDICATORS, compute_indicators, read_results, write_results
from oaindex.synthetic import write_demo


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"JSON run config (default: ${CONFIG_ENV})")
    p.add_argument("--corpus", action="append", help="corpus JSONL path; repeatable")
    p.add_argument("--scheme", help="subject scheme CSV (sc_code,discipline)")
    p.add_argument("--registry", help="zone registry CSV (code,name,parent[,nuts_prefix])")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--period", action="append", dest="periods", metavar="YYYY-YYYY")
    p.add_argument("--doc-type", action="append", dest="doc_types")
    p.add_argument("--level", action="append", dest="levels", choices=("country", "nuts1"))
    p.add_argument("--indicator", action="append", dest="indicators")
    p.add_argument("--jenks-classes", dest="jenks_classes", type=int)
    p.add_argument("--noai-classes", dest="noai_classes", type=int)
    p.add_argument("--symmetric-bounds", dest="symmetric_bounds", type=_floats)
    p.add_argument("--geometry", action="append", metavar="LEVEL=PATH", type=_level_path)
    p.add_argument("--geometry-id-property", dest="geometry_id_property")
    p.add_argument("--geographic-counting", dest="geographic_counting", choices=("whole", "fractional"))
    p.add_argument("--min-support", dest="min_support", type=float)
    p.add_argument("--workers", type=int, help="cap on worker processes (default: all cores)")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _level_path(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected LEVEL=PATH")
    level, path = text.split("=", 1)
    return level, path


_OVERRIDES = (
    "corpus", "scheme", "registry", "output_dir", "periods", "doc_types", "levels",
    "indicators", "jenks_classes", "noai_classes", "symmetric_bounds",
    "geometry_id_property", "geographic_counting", "min_support", "workers",
)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = RunConfig.load(path) if path else RunConfig()
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "geometry", None):
        cfg.geometry = dict(cfg.geometry, **dict(args.geometry))
    return cfg


def cmd_validate(args) -> int:
    diags = validate(config_from_args(args))
    for d in diags:
        print(d, file=sys.stderr)
    if not diags:
        print("config OK")
    return 1 if diags else 0


def cmd_run(args) -> int:
    report = pipeline.run(config_from_args(args))
    for e in report["errors"]:
        print(f"error [{e['stage']}]: {e['message']}", file=sys.stderr)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if report["status"] == "ok":
        ingest = report["ingest"]
        print(
            f"{ingest['accepted']} records accepted, {ingest['rejected']} rejected; "
            f"{ingest['region_unattributable_pct']} with an address lacking a NUTS1 region"
        )
        print(f"outputs written to {report['config']['output_dir']}")
    return 0 if not report["errors"] else 1


def cmd_aggregate(args) -> int:
    cfg = config_from_args(args)
    diags = [d for d in validate(cfg) if not d.startswith("output_dir")]
    if diags:
        raise ConfigError(diags)
    scheme = SubjectScheme.from_csv(cfg.scheme)
    registry = ZoneRegistry.from_csv(cfg.registry)
    ing, report = pipeline.ingest(cfg, scheme, registry, cfg.effective_workers())
    rows = write_tables(ing.tables(scheme), args.output)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{rows} aggregate rows written to {args.output}")
    return 0


def cmd_indicators(args) -> int:
    scheme = SubjectScheme.from_csv(args.scheme)
    periods = [PeriodSpec.parse(p) for p in args.periods or ()]
    results = []
    for table in read_tables(args.aggregates, periods, args.geographic_counting):
        results.extend(compute_indicators(table, scheme, args.indicators or INDICATORS).results)
    n = write_results(results, args.output)
    print(f"{n} indicator rows written to {args.output}")
    return 0


def cmd_classify(args) -> int:
    results = read_results(args.indicators)
    levels = sorted({r.level for r in results})
    families = sorted({r.indicator.split(":", 1)[0] for r in results})
    warnings: list[str] = []
    schemes = pipeline.build_schemes(
        results, levels, families, args.jenks_classes, args.symmetric_bounds,
        args.min_support, warnings,
    )
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    write_schemes(schemes, args.output)
    print(f"{len(schemes)} class schemes written to {args.output}")
    return 0


def cmd_export(args) -> int:
    results = read_results(args.indicators)
    schemes = read_schemes(args.schemes)
    registry = ZoneRegistry.from_csv(args.registry)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    periods = list(dict.fromkeys(r.period for r in results))
    summary = pipeline.export_all(
        results, schemes, registry, outdir, periods,
        dict(args.geometry or ()), args.geometry_id_property, args.min_support,
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_synth(args) -> int:
    path = write_demo(args.directory, args.records, args.seed)
    print(f"demo inputs written; run: oaindex run --config {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oaindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a run config and list every problem")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run the full pipeline")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("aggregate", help="ingest corpora and write aggregate tables")
    _add_config_flags(p)
    p.add_argument("-o", "--output", required=True, help="aggregate CSV to write")
    p.add_argument("--report", help="write the ingest report as JSON")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("indicators", help="compute indicators from aggregate tables")
    p.add_argument("--aggregates", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--period", action="append", dest="periods", metavar="YYYY-YYYY")
    p.add_argument("--indicator", action="append", dest="indicators")
    p.add_argument("--geographic-counting", default="whole", choices=("whole", "fractional"))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("classify", help="build class schemes from indicator results")
    p.add_argument("--indicators", required=True)
    p.add_argument("--jenks-classes", type=int, default=DEFAULT_JENKS_CLASSES)
    p.add_argument("--symmetric-bounds", type=_floats, default=list(DEFAULT_SYMMETRIC_BOUNDS))
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("export", help="write choropleth tables and GeoJSON joins")
    p.add_argument("--indicators", required=True)
    p.add_argument("--schemes", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--geometry", action="append", metavar="LEVEL=PATH", type=_level_path)
    p.add_argument("--geometry-id-property", default="NUTS_ID")
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("synth", help="write a synthetic demo corpus with reference files")
    p.add_argument("directory")
    p.add_argument("--records", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return 2
    except (OAIndexError, OSError, ValueError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
