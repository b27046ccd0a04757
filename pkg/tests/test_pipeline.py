from __future__ import annotations

import json
from pathlib import Path

import pytest

from oaindex import pipeline
from oaindex.classification import read_schemes
from oaindex.config import RunConfig
from oaindex.corpus import SubjectScheme, ZoneRegistry
from oaindex.export import read_table
from oaindex.synthetic import write_demo

from helpers import write_jsonl


@pytest.fixture()
def demo(tmp_path) -> RunConfig:
    path = write_demo(tmp_path / "demo", n_records=3000, seed=5)
    return RunConfig.load(path)


def test_full_run_writes_every_output(demo):
    report = pipeline.run(demo)
    assert report["status"] == "ok", report["errors"]
    out = Path(demo.output_dir)
    names = sorted(p.name for p in out.iterdir())
    assert "aggregates.csv" in names and "indicators.csv" in names and "schemes.json" in names
    for lv in ("country", "nuts1"):
        for fam in ("oa_share", "noai"):
            assert f"choropleth_{lv}_{fam}.csv" in names
            for period in ("2000-2003", "2008-2011", "2015-2018"):
                assert f"{lv}_{fam}_{period}.geojson" in names
    assert not any(n.startswith(".staging") for n in names)
    assert set(report["outputs"]) == set(names) - {pipeline.REPORT_NAME}
    schemes = read_schemes(out / "schemes.json")
    assert schemes["country/noai"].kind == "symmetric"
    assert schemes["country/oa_share"].kind == "jenks"
    rows = read_table(out / "choropleth_country_noai.csv")
    assert {r.period for r in rows} == {"2000-2003", "2008-2011", "2015-2018"}
    on_disk = json.loads((out / pipeline.REPORT_NAME).read_text())
    assert on_disk["ingest"] == report["ingest"]
    assert set(report["timings"]) >= {"validate", "load", "aggregate", "indicators", "classify", "export", "total"}
    assert report["inputs"][demo.corpus[0]] == pipeline.sha256_file(demo.corpus[0])
    diag = report["tables"][0]
    assert diag["unresolved_pct"].endswith("%")


def test_invalid_config_writes_only_report(demo, tmp_path):
    demo.corpus = [str(tmp_path / "nope.jsonl")]
    report = pipeline.run(demo)
    assert report["status"] == "failed"
    assert report["errors"][0]["stage"] == "validate"
    assert [p.name for p in Path(demo.output_dir).iterdir()] == [pipeline.REPORT_NAME]


def test_stage_failure_leaves_no_partial_outputs(demo):
    Path(demo.geometry["nuts1"]).write_text("{broken")
    report = pipeline.run(demo)
    assert report["status"] == "failed"
    assert report["errors"][0]["stage"] == "export"
    assert [p.name for p in Path(demo.output_dir).iterdir()] == [pipeline.REPORT_NAME]


def test_bad_registry_fails_in_load(demo):
    Path(demo.registry).write_text("code,name\n")
    report = pipeline.run(demo)
    assert report["errors"][0]["stage"] == "load"


def test_rejections_reported_not_fatal(demo):
    with open(demo.corpus[0], "a", encoding="utf-8") as fh:
        fh.write("{junk\n\n")
    report = pipeline.run(demo)
    assert report["status"] == "ok"
    assert report["ingest"]["rejections_by_reason"] == {"empty line": 1, "malformed JSON": 1}


def test_split_ranges_are_line_aligned(tmp_path, monkeypatch):
    monkeypatch.setattr(pipeline, "MIN_CHUNK_BYTES", 64)
    p = tmp_path / "x.jsonl"
    p.write_bytes(b"".join(b"line %03d....\n" % i for i in range(100)))
    ranges = pipeline.split_ranges(str(p), 4)
    assert len(ranges) == 4
    data = p.read_bytes()
    assert ranges[0][0] == 0 and ranges[-1][1] == len(data)
    for (a, b), (c, _) in zip(ranges, ranges[1:]):
        assert b == c and data[c - 1:c] == b"\n"


def test_parallel_ingest_matches_sequential(demo, monkeypatch):
    lines = Path(demo.corpus[0]).read_text().splitlines()
    # duplicates that land in later chunks, plus a rejected line
    lines = lines + lines[:5] + ["{junk"] + lines[100:103]
    write_jsonl(demo.corpus[0], lines)
    scheme = SubjectScheme.from_csv(demo.scheme)
    registry = ZoneRegistry.from_csv(demo.registry)
    seq, seq_rep = pipeline.ingest(demo, scheme, registry, workers=1)
    monkeypatch.setattr(pipeline, "MIN_CHUNK_BYTES", 4096)
    assert len(pipeline.split_ranges(demo.corpus[0], 3)) == 3
    par, par_rep = pipeline.ingest(demo, scheme, registry, workers=3)
    assert par.tables(scheme) == seq.tables(scheme)
    assert par_rep.to_dict() == seq_rep.to_dict()
    assert seq_rep.rejections["duplicate pub_id"] == 8
    for key, b in seq.builders.items():
        p = par.builders[key]
        assert (p.records, p.unresolved, p.zoneless) == (b.records, b.unresolved, b.zoneless)


def test_build_schemes_caps_jenks_classes():
    from oaindex.indicators import IndicatorResult

    results = [
        IndicatorResult(z, "2015-2018", v, 1.0, indicator="oa_share", level="country")
        for z, v in (("FR", 0.2), ("DE", 0.2), ("IT", 0.4))
    ]
    warnings = []
    schemes = pipeline.build_schemes(results, ["country"], ["oa_share"], 9, [0.5, 0.75, 0.9, 1.1, 1.5, 2.0], 0.0, warnings)
    assert schemes["country/oa_share"].n_classes == 2
    assert warnings and "distinct" in warnings[0]
