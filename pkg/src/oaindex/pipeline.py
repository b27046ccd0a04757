"""End-to-end run: ingest, aggregate, indicators, classify, export.

Outputs are staged in a hidden directory and moved into ``output_dir`` only
when every stage succeeded; a failed run leaves just ``run_report.json``
describing the failing stage.

With more than one worker, corpus files are split into byte ranges at line
boundaries and each range is ingested and aggregated in its own process.
Tallies are exact integers, so the merged result does not depend on the
partitioning. Duplicate pub_ids across ranges are resolved afterwards in
input order: the later occurrence is re-parsed and retracted.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from oaindex.classification import (
    ClassScheme,
    jenks_breaks,
    symmetric_scheme,
    write_schemes,
)
from oaindex.config import RunConfig, validate
from oaindex.corpus import (
    MAX_REJECTION_SAMPLES,
    IngestReport,
    PeriodSpec,
    PublicationRecord,
    RecordParser,
    SubjectScheme,
    ZoneRegistry,
    format_rate,
)
from oaindex.counting import WORLD, AggregateTable, TableBuilder, write_tables
from oaindex.export import emit_table, join_geojson
from oaindex.indicators import IndicatorResult, compute_indicators, write_results

REPORT_NAME = "run_report.json"
MAPPED_INDICATORS = ("oa_share", "noai")
# Below this size a corpus file is never split across workers.
MIN_CHUNK_BYTES = 8 << 20


@dataclass
class Ingestion:
    """Aggregation state for every (level, period) pair of a run."""

    levels: list[str]
    periods: list[PeriodSpec]
    doc_types: frozenset[str]
    registry: ZoneRegistry
    counting: str = "whole"
    builders: dict[tuple[str, str], TableBuilder] = field(default_factory=dict)

    def __post_init__(self):
        for lv in self.levels:
            for p in self.periods:
                self.builders[(lv, p.name)] = TableBuilder(lv, p, self.registry, self.counting)
        self._by_year: dict[int, list[TableBuilder]] = {}

    def _targets(self, year: int) -> list[TableBuilder]:
        hit = self._by_year.get(year)
        if hit is None:
            hit = [b for b in self.builders.values() if year in b.period]
            self._by_year[year] = hit
        return hit

    def add(self, record: PublicationRecord, sign: int = 1) -> None:
        if record.doc_type not in self.doc_types:
            return
        for b in self._targets(record.year):
            b.add(record, sign)

    def tables(self, scheme: SubjectScheme) -> list[AggregateTable]:
        return [self.builders[(lv, p.name)].table(scheme) for lv in self.levels for p in self.periods]


def _new_ingestion(config: RunConfig, registry: ZoneRegistry) -> Ingestion:
    return Ingestion(
        list(config.levels),
        config.period_specs(),
        frozenset(config.doc_types),
        registry,
        config.geographic_counting,
    )


def _iter_range(path: str, start: int, end: int):
    with open(path, "rb") as fh:
        fh.seek(start)
        data = fh.read(end - start)
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def split_ranges(path: str, n: int) -> list[tuple[int, int]]:
    """Byte ranges covering ``path``, each starting at a line start."""
    size = os.path.getsize(path)
    if n <= 1 or size < 2 * MIN_CHUNK_BYTES:
        return [(0, size)]
    n = min(n, size // MIN_CHUNK_BYTES)
    cuts = [0]
    with open(path, "rb") as fh:
        for i in range(1, n):
            fh.seek(max(size * i // n, cuts[-1]))
            fh.readline()
            pos = fh.tell()
            if pos < size and pos > cuts[-1]:
                cuts.append(pos)
    cuts.append(size)
    return list(zip(cuts, cuts[1:]))


_WORKER: dict = {}


def _init_worker(config: RunConfig, scheme: SubjectScheme, registry: ZoneRegistry) -> None:
    _WORKER.update(config=config, scheme=scheme, registry=registry)


def _ingest_range(task):
    path, start, end = task
    config, scheme, registry = _WORKER["config"], _WORKER["scheme"], _WORKER["registry"]
    ing = _new_ingestion(config, registry)
    parser = RecordParser(scheme, registry)
    ids = []
    lines = _iter_range(path, start, end)
    for lineno, line in enumerate(lines, 1):
        r = parser.parse_line(line, lineno, path)
        if r is not None:
            ing.add(r)
            ids.append(r.pub_id)
    for b in ing.builders.values():
        b.registry = None  # the parent process holds its own copy
    return ing.builders, parser.report, ids, len(lines)


def ingest(
    config: RunConfig, scheme: SubjectScheme, registry: ZoneRegistry, workers: int = 1
) -> tuple[Ingestion, IngestReport]:
    tasks = [(p, a, b) for p in config.corpus for a, b in split_ranges(p, workers)]
    if workers <= 1 or len(tasks) <= 1:
        return _ingest_sequential(config, scheme, registry)

    with ProcessPoolExecutor(
        max_workers=min(workers, len(tasks)),
        initializer=_init_worker,
        initargs=(config, scheme, registry),
    ) as pool:
        parts = list(pool.map(_ingest_range, tasks))

    total = _new_ingestion(config, registry)
    report = IngestReport()
    seen: set[str] = set()
    samples = []
    line_base: dict[str, int] = {}
    for (path, start, end), (builders, rep, ids, n_lines) in zip(tasks, parts):
        base = line_base.get(path, 0)
        line_base[path] = base + n_lines
        for key, b in builders.items():
            total.builders[key].update(b)
        samples.extend((config.corpus.index(s), s, base + n, r) for s, n, r in rep.samples)
        rep.samples = []
        report.update(rep)
        dupes = {i for i in ids if i in seen}
        seen.update(ids)
        if not dupes:
            continue
        parser = RecordParser(scheme, registry)
        for lineno, line in enumerate(_iter_range(path, start, end), base + 1):
            r = parser.parse_line(line, lineno, path)
            if r is not None and r.pub_id in dupes:
                dupes.discard(r.pub_id)
                total.add(r, sign=-1)
                report.note_retracted(r, parser.missing_regions(r))
                report.rejections["duplicate pub_id"] += 1
                samples.append((config.corpus.index(path), path, lineno, "duplicate pub_id"))
    samples.sort()
    report.samples = [(s, n, r) for _, s, n, r in samples[:MAX_REJECTION_SAMPLES]]
    return total, report


def _ingest_sequential(config, scheme, registry):
    ing = _new_ingestion(config, registry)
    parser = RecordParser(scheme, registry)
    for path in config.corpus:
        with open(path, "rb") as fh:
            for lineno, line in enumerate(fh, 1):
                if line.endswith(b"\n"):
                    line = line[:-1]
                r = parser.parse_line(line, lineno, path)
                if r is not None:
                    ing.add(r)
    return ing, parser.report


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def table_diagnostics(builder: TableBuilder, table: AggregateTable) -> dict:
    undefined = sorted(sc for sc, c in table.world.items() if c.n > 0 and c.n_oa == 0)
    rate = builder.unresolved / builder.records if builder.records else 0.0
    return {
        "level": table.level,
        "period": table.period.name,
        "records": builder.records,
        "unresolved_records": builder.unresolved,
        "unresolved_rate": rate,
        "unresolved_pct": format_rate(rate),
        "zoneless_records": builder.zoneless,
        "zones": len(table.zones()),
        "undefined_oai_scs": undefined,
        "excluded_sc_count": len(undefined),
    }


def build_schemes(
    results: list[IndicatorResult],
    levels: list[str],
    indicators: list[str],
    jenks_classes: int,
    symmetric_bounds,
    min_support: float = 0.0,
    warnings: list[str] | None = None,
) -> dict[str, ClassScheme]:
    """One scheme per (level, mapped indicator), keyed ``"<level>/<indicator>"``.

    OA share gets a Jenks scheme pooled over all periods; NOAI and
    specialization share one symmetric scheme around 1.
    """
    warnings = warnings if warnings is not None else []
    schemes: dict[str, ClassScheme] = {}
    sym = symmetric_scheme(symmetric_bounds)
    for lv in levels:
        if "oa_share" in indicators:
            vals = [
                r.value for r in results
                if r.level == lv and r.indicator == "oa_share" and r.zone != WORLD
                and r.support >= min_support
            ]
            distinct = len(set(vals))
            if not vals:
                warnings.append(f"{lv}/oa_share: no zone values, no classes built")
            else:
                k = jenks_classes
                if distinct < k:
                    warnings.append(
                        f"{lv}/oa_share: only {distinct} distinct values, using {distinct} classes instead of {k}"
                    )
                    k = distinct
                schemes[f"{lv}/oa_share"] = jenks_breaks(vals, k)
        if "noai" in indicators:
            schemes[f"{lv}/noai"] = sym
        if "specialization" in indicators:
            schemes[f"{lv}/specialization"] = sym
    return schemes


def _family(indicator: str) -> str:
    return indicator.split(":", 1)[0]


def export_all(
    results: list[IndicatorResult],
    schemes: dict[str, ClassScheme],
    registry: ZoneRegistry,
    outdir: Path,
    periods: list[str],
    geometry: dict[str, str] | None = None,
    id_property: str = "NUTS_ID",
    min_support: float = 0.0,
) -> dict:
    """Write choropleth CSVs per scheme key and GeoJSON joins for mapped indicators."""
    geometry = geometry or {}
    written = {}
    joins = {}
    for key, scheme in sorted(schemes.items()):
        lv, fam = key.split("/")
        rows = [
            r for r in results
            if r.level == lv and _family(r.indicator) == fam and r.zone != WORLD
            and r.support >= min_support
        ]
        name = f"choropleth_{lv}_{fam}.csv"
        written[name] = emit_table(rows, scheme, registry, outdir / name)
        if fam in MAPPED_INDICATORS and lv in geometry:
            for period in periods:
                sub = [r for r in rows if r.period == period]
                gname = f"{lv}_{fam}_{period}.geojson"
                rep = join_geojson(sub, scheme, geometry[lv], outdir / gname, id_property, registry)
                joins[gname] = rep.to_dict()
    return {"tables": written, "joins": joins}


def run(config: RunConfig) -> dict:
    """Execute the whole pipeline and return the run report (also written to disk)."""
    t_start = time.perf_counter()
    timings: dict[str, float] = {}
    report: dict = {
        "status": "ok",
        "errors": [],
        "warnings": [],
        "config": config.to_dict(),
    }
    stage = "validate"
    outdir = Path(config.output_dir) if config.output_dir else None
    staging = None

    def mark(name, t0):
        timings[name] = round(time.perf_counter() - t0, 6)

    try:
        t0 = time.perf_counter()
        diags = validate(config)
        if diags:
            report["errors"] = [{"stage": "validate", "message": d} for d in diags]
            report["status"] = "failed"
            return _finish(report, outdir, timings, t_start)
        mark(stage, t0)

        stage = "load"
        t0 = time.perf_counter()
        scheme = SubjectScheme.from_csv(config.scheme)
        registry = ZoneRegistry.from_csv(config.registry)
        inputs = {p: sha256_file(p) for p in config.corpus}
        inputs[config.scheme] = sha256_file(config.scheme)
        inputs[config.registry] = sha256_file(config.registry)
        for p in config.geometry.values():
            inputs[p] = sha256_file(p)
        report["inputs"] = inputs
        mark(stage, t0)

        outdir.mkdir(parents=True, exist_ok=True)
        staging = outdir / f".staging-{os.getpid()}"
        if staging.exists():
            shutil.rmtree(staging)
        staging.mkdir()

        stage = "aggregate"
        t0 = time.perf_counter()
        workers = config.effective_workers()
        ing, ingest_report = ingest(config, scheme, registry, workers)
        tables = ing.tables(scheme)
        report["ingest"] = ingest_report.to_dict()
        report["tables"] = [
            table_diagnostics(ing.builders[(t.level, t.period.name)], t) for t in tables
        ]
        write_tables(tables, staging / "aggregates.csv")
        mark(stage, t0)

        stage = "indicators"
        t0 = time.perf_counter()
        results: list[IndicatorResult] = []
        skipped = {}
        for t, diag in zip(tables, report["tables"]):
            summary = compute_indicators(t, scheme, config.indicators)
            results.extend(summary.results)
            diag["noai_excluded_sc_count"] = summary.excluded_sc_count
            skipped[f"{t.level}/{t.period.name}"] = {k: v for k, v in summary.skipped.items() if v}
        report["skipped_zones"] = skipped
        write_results(results, staging / "indicators.csv")
        mark(stage, t0)

        stage = "classify"
        t0 = time.perf_counter()
        schemes = build_schemes(
            results, config.levels, config.indicators, config.jenks_classes,
            config.symmetric_bounds, config.min_support, report["warnings"],
        )
        write_schemes(schemes, staging / "schemes.json")
        mark(stage, t0)

        stage = "export"
        t0 = time.perf_counter()
        report["exports"] = export_all(
            results, schemes, registry, staging, [p.name for p in config.period_specs()],
            config.geometry, config.geometry_id_property, config.min_support,
        )
        outputs = {}
        for f in sorted(staging.iterdir()):
            outputs[f.name] = sha256_file(f)
            os.replace(f, outdir / f.name)
        staging.rmdir()
        report["outputs"] = outputs
        mark(stage, t0)
    except Exception as exc:  # any stage failure is reported, never raised
        report["status"] = "failed"
        report["errors"].append({"stage": stage, "message": f"{type(exc).__name__}: {exc}"})
        if staging is not None and staging.exists():
            shutil.rmtree(staging)
    return _finish(report, outdir, timings, t_start)


def _finish(report, outdir, timings, t_start):
    timings["total"] = round(time.perf_counter() - t_start, 6)
    report["timings"] = timings
    if outdir is not None:
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / REPORT_NAME).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as exc:
            report["status"] = "failed"
            report["errors"].append({"stage": "report", "message": str(exc)})
    return report
