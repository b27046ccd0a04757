from __future__ import annotations

import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oaindex.classification import symmetric_scheme
from oaindex.errors import ExportError
from oaindex.export import (
    emit_table,
    fmt6,
    join_geojson,
    read_table,
    choropleth_rows,
    strip_joined,
)
from oaindex.indicators import IndicatorResult
from oaindex.synthetic import write_geometry

from helpers import REGISTRY

SYM = symmetric_scheme()


def res(zone, value, level="country", indicator="noai", period="2015-2018", support=10.0):
    return IndicatorResult(zone, period, value, support, indicator=indicator, level=level)


def test_fmt6():
    assert fmt6(1 / 3) == "0.333333"
    assert fmt6(1234567.0) == "1.23457e+06"
    assert fmt6(1.0) == "1"


def test_emit_table_round_trip_sorted():
    results = [res("IT", 1.234567891), res("FR", 0.4), res("DE", 2.5, period="2000-2003")]
    buf = io.StringIO()
    assert emit_table(results, SYM, REGISTRY, buf) == 3
    buf.seek(0)
    rows = read_table(buf)
    assert [(r.period, r.zone) for r in rows] == [("2000-2003", "DE"), ("2015-2018", "FR"), ("2015-2018", "IT")]
    assert rows[2].value == 1.23457
    assert rows[1].class_index == 0 and rows[1].class_label == "< 0.5"
    assert rows[0].zone_name == "Germany"
    assert rows == [r.rounded() for r in choropleth_rows(results, SYM, REGISTRY)]


def test_emit_table_unknown_zone():
    with pytest.raises(ExportError, match="unknown zone codes: XX"):
        emit_table([res("XX", 1.0)], SYM, REGISTRY, io.StringIO())


def test_read_table_bad_header():
    with pytest.raises(ExportError):
        read_table(io.StringIO("zone,value\n"))


def test_join_geojson(tmp_path):
    geo = tmp_path / "g.geojson"
    write_geometry(REGISTRY, "country", geo)
    dest = tmp_path / "out.geojson"
    rep = join_geojson([res("GB", 1.2), res("FR", 0.8), res("IT", 1.0)], SYM, geo, dest, registry=REGISTRY)
    assert sorted(rep.matched) == ["FR", "IT", "UK"]
    assert rep.unmatched_results == []
    assert len(rep.no_data) == rep.feature_count - 3
    out = json.loads(dest.read_text())
    props = {f["properties"]["NUTS_ID"]: f["properties"] for f in out["features"]}
    assert props["UK"]["oa_value"] == 1.2 and props["UK"]["oa_class_index"] == 4
    assert props["DE"]["oa_no_data"] is True and props["DE"]["oa_value"] is None
    assert props["DE"]["oa_indicator"] == "noai"
    assert strip_joined(out) == json.loads(geo.read_text())


def test_join_reports_unmatched_results(tmp_path):
    geo = tmp_path / "g.geojson"
    geo.write_text(json.dumps({"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"NUTS_ID": "FR"}, "geometry": None}]}))
    rep = join_geojson([res("FR", 1.0), res("DE", 1.0)], SYM, geo, tmp_path / "o.geojson")
    assert rep.unmatched_results == ["DE"]
    assert rep.to_dict()["matched"] == 1


def test_join_errors(tmp_path):
    geo = tmp_path / "g.geojson"
    with pytest.raises(ExportError, match="unreadable geometry"):
        join_geojson([], SYM, geo, tmp_path / "o")
    geo.write_text("{\"type\": \"Feature\"}")
    with pytest.raises(ExportError, match="not a FeatureCollection"):
        join_geojson([], SYM, geo, tmp_path / "o")
    geo.write_text(json.dumps({"type": "FeatureCollection", "features": [{"properties": {"id": "FR"}}]}))
    with pytest.raises(ExportError, match="feature #0 has no 'NUTS_ID' property"):
        join_geojson([], SYM, geo, tmp_path / "o")
    geo.write_text(json.dumps({"type": "FeatureCollection", "features": [
        {"properties": {"NUTS_ID": "FR", "oa_value": 3}}]}))
    with pytest.raises(ExportError, match="already has"):
        join_geojson([], SYM, geo, tmp_path / "o")
    with pytest.raises(ExportError, match="single indicator"):
        join_geojson([res("FR", 1.0), res("FR", 1.0, period="2000-2003")], SYM, geo, tmp_path / "o")


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e6, allow_nan=False))
def test_rounded_value_keeps_six_significant_digits(x):
    r = res("FR", x)
    (row,) = choropleth_rows([r], SYM, REGISTRY)
    back = row.rounded().value
    assert back == float(fmt6(x))
    if x:
        assert abs(back - x) <= 5e-6 * abs(x)
