"""Choropleth-ready exports: classed CSV tables and GeoJSON property joins.

Exported numbers carry 6 significant digits; internal values keep full
precision, and class indexes are computed from the full-precision value.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from oaindex.classification import ClassScheme, classify
from oaindex.corpus import ZoneRegistry
from oaindex.errors import ExportError
from oaindex.indicators import IndicatorResult

CHOROPLETH_COLUMNS = (
    "zone", "zone_name", "period", "indicator", "value", "class_index", "class_label", "support",
)
DEFAULT_ID_PROPERTY = "NUTS_ID"
DEFAULT_PREFIX = "oa_"
_ADDED = ("indicator", "period", "value", "class_index", "class_label", "support", "no_data")


def fmt6(x: float) -> str:
    return format(float(x), ".6g")


def round6(x: float) -> float:
    return float(fmt6(x))


@dataclass(frozen=True)
class ChoroplethRow:
    zone: str
    zone_name: str
    period: str
    indicator: str
    value: float
    class_index: int
    class_label: str
    support: float

    def as_csv(self) -> tuple:
        return (
            self.zone, self.zone_name, self.period, self.indicator,
            fmt6(self.value), self.class_index, self.class_label, fmt6(self.support),
        )

    def rounded(self) -> ChoroplethRow:
        """The row as it reads back from an exported file."""
        return ChoroplethRow(
            self.zone, self.zone_name, self.period, self.indicator,
            round6(self.value), self.class_index, self.class_label, round6(self.support),
        )


def _level_of(result: IndicatorResult, registry: ZoneRegistry) -> str:
    if result.level:
        return result.level
    return "country" if result.zone in registry.countries else "nuts1"


def choropleth_rows(
    results: Iterable[IndicatorResult], scheme: ClassScheme, registry: ZoneRegistry
) -> list[ChoroplethRow]:
    results = list(results)
    unknown = sorted({
        r.zone for r in results if not registry.has_zone(r.zone, _level_of(r, registry))
    })
    if unknown:
        raise ExportError(f"unknown zone codes: {', '.join(unknown)}")
    rows = []
    for r in results:
        idx = classify(r.value, scheme)
        rows.append(ChoroplethRow(
            r.zone, registry.zone_name(r.zone, _level_of(r, registry)), r.period,
            r.indicator, r.value, idx, scheme.labels[idx], r.support,
        ))
    rows.sort(key=lambda row: (row.period, row.zone, row.indicator))
    return rows


def emit_table(
    results: Iterable[IndicatorResult],
    scheme: ClassScheme,
    registry: ZoneRegistry,
    destination: str | Path | IO[str],
) -> int:
    """Write classed rows sorted by (period, zone); returns the number of rows."""
    rows = choropleth_rows(results, scheme, registry)
    if isinstance(destination, (str, Path)):
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            _write_rows(rows, fh)
    else:
        _write_rows(rows, destination)
    return len(rows)


def _write_rows(rows: list[ChoroplethRow], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CHOROPLETH_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())


def read_table(source: str | Path | IO[str]) -> list[ChoroplethRow]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_table(fh)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != CHOROPLETH_COLUMNS:
        raise ExportError(f"choropleth CSV must have columns {','.join(CHOROPLETH_COLUMNS)}")
    return [
        ChoroplethRow(
            r["zone"], r["zone_name"], r["period"], r["indicator"], float(r["value"]),
            int(r["class_index"]), r["class_label"], float(r["support"]),
        )
        for r in reader
    ]


@dataclass
class JoinReport:
    feature_count: int = 0
    matched: list[str] = field(default_factory=list)
    no_data: list[str] = field(default_factory=list)
    unmatched_results: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "feature_count": self.feature_count,
            "matched": len(self.matched),
            "no_data": self.no_data,
            "unmatched_results": self.unmatched_results,
        }


def join_geojson(
    results: Iterable[IndicatorResult],
    scheme: ClassScheme,
    geometry: str | Path,
    destination: str | Path,
    id_property: str = DEFAULT_ID_PROPERTY,
    registry: ZoneRegistry | None = None,
    prefix: str = DEFAULT_PREFIX,
) -> JoinReport:
    """Attach indicator value and class to each feature of a FeatureCollection.

    ``results`` must hold one indicator for one period. Features without a
    result get ``<prefix>no_data = true``. Result zones missing from the
    geometry are listed in the returned report. With a ``registry``, country
    codes are matched through their NUTS prefix (``GB`` joins ``UK``).
    Existing properties and geometries are copied untouched; a clash with the
    added property names is an error.
    """
    results = list(results)
    keys = {(r.indicator, r.period) for r in results}
    if len(keys) > 1:
        raise ExportError(f"join expects a single indicator and period, got {sorted(keys)}")
    try:
        with open(geometry, encoding="utf-8") as fh:
            collection = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ExportError(f"unreadable geometry {str(geometry)!r}: {exc}") from exc
    if not isinstance(collection, dict) or collection.get("type") != "FeatureCollection":
        raise ExportError(f"unreadable geometry {str(geometry)!r}: not a FeatureCollection")
    features = collection.get("features")
    if not isinstance(features, list):
        raise ExportError(f"unreadable geometry {str(geometry)!r}: missing features array")

    indicator, period = next(iter(keys)) if keys else (None, None)
    by_id: dict[str, IndicatorResult] = {}
    for r in results:
        gid = r.zone
        if registry is not None and r.level == "country" and r.zone in registry.countries:
            gid = registry.geometry_id(r.zone, "country")
        by_id[gid] = r

    names = {prefix + k for k in _ADDED}
    report = JoinReport(feature_count=len(features))
    seen = set()
    out_features = []
    for ordinal, feat in enumerate(features):
        props = feat.get("properties") if isinstance(feat, dict) else None
        if not isinstance(props, dict) or id_property not in props:
            raise ExportError(f"feature #{ordinal} has no {id_property!r} property")
        clash = names & props.keys()
        if clash:
            raise ExportError(f"feature #{ordinal} already has properties {sorted(clash)}")
        fid = str(props[id_property])
        r = by_id.get(fid)
        if r is None:
            added = {f"{prefix}indicator": indicator, f"{prefix}period": period,
                     f"{prefix}value": None, f"{prefix}class_index": None,
                     f"{prefix}class_label": None, f"{prefix}support": None,
                     f"{prefix}no_data": True}
            report.no_data.append(fid)
        else:
            idx = classify(r.value, scheme)
            added = {
                f"{prefix}indicator": r.indicator,
                f"{prefix}period": r.period,
                f"{prefix}value": round6(r.value),
                f"{prefix}class_index": idx,
                f"{prefix}class_label": scheme.labels[idx],
                f"{prefix}support": round6(r.support),
                f"{prefix}no_data": False,
            }
            report.matched.append(fid)
            seen.add(fid)
        new_feat = dict(feat)
        new_feat["properties"] = {**props, **added}
        out_features.append(new_feat)
    report.unmatched_results = sorted(set(by_id) - seen)

    out = dict(collection)
    out["features"] = out_features
    Path(destination).write_text(json.dumps(out, ensure_ascii=False) + "\n", encoding="utf-8")
    return report


def strip_joined(collection: dict, prefix: str = DEFAULT_PREFIX) -> dict:
    """Remove properties added by :func:`join_geojson` (for audits and tests)."""
    names = {prefix + k for k in _ADDED}
    out = dict(collection)
    out["features"] = [
        {**f, "properties": {k: v for k, v in f["properties"].items() if k not in names}}
        for f in collection["features"]
    ]
    return out
