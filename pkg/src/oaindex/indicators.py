"""OA share, per-SC OA index, NOAI and specialization index.

All indicators read fractional counts from an :class:`AggregateTable`.
Sums use :func:`math.fsum` over float conversions of the exact cells, so a
result does not depend on dict iteration order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from oaindex.corpus import SubjectScheme
from oaindex.counting import WORLD, AggregateCell, AggregateTable
from oaindex.errors import IndicatorError

INDICATORS = ("oa_share", "noai", "specialization", "discipline_share")
RESULT_COLUMNS = ("level", "period", "zone", "indicator", "value", "support", "excluded_sc_count")


@dataclass
class IndicatorResult:
    zone: str
    period: str
    value: float
    support: float
    excluded_scs: list[str] = field(default_factory=list)
    indicator: str = ""
    level: str = ""
    # Set when read back from CSV, where only the count of excluded SCs survives.
    excluded_count: int | None = None

    @property
    def excluded_sc_count(self) -> int:
        return len(self.excluded_scs) if self.excluded_count is None else self.excluded_count

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"indicator value must be non-negative, got {self.value}")
        if self.support < 0:
            raise ValueError("support must be non-negative")


def _cells(table: AggregateTable, zone: str, cells=None) -> dict[str, AggregateCell]:
    return table.zone_cells(zone) if cells is None else cells


def _share(cell: AggregateCell) -> float:
    return float(cell.n_oa) / float(cell.n)


def oa_share(table: AggregateTable, zone: str, cells=None) -> IndicatorResult:
    """``cells`` optionally supplies the zone's SC -> cell map, to skip a table scan."""
    cells = _cells(table, zone, cells).values()
    support = math.fsum(float(c.n) for c in cells)
    if support <= 0:
        raise IndicatorError(f"no publications for zone {zone!r}")
    opened = math.fsum(float(c.n_oa) for c in cells)
    return IndicatorResult(
        zone, table.period.name, opened / support, support,
        indicator="oa_share", level=table.level,
    )


def oa_share_by_discipline(
    table: AggregateTable, scheme: SubjectScheme, zone: str = WORLD
) -> dict[str, IndicatorResult]:
    """OA share per discipline, from the world row unless ``zone`` is given.

    Disciplines without support are left out of the map.
    """
    cells = _cells(table, zone)
    n_by: dict[str, list[float]] = {}
    oa_by: dict[str, list[float]] = {}
    for sc, c in cells.items():
        d = scheme.discipline_of(sc)
        n_by.setdefault(d, []).append(float(c.n))
        oa_by.setdefault(d, []).append(float(c.n_oa))
    out = {}
    for d in scheme.disciplines:
        support = math.fsum(n_by.get(d, ()))
        if support <= 0:
            continue
        value = math.fsum(oa_by[d]) / support
        out[d] = IndicatorResult(
            zone, table.period.name, value, support,
            indicator=f"discipline_share:{d}", level=table.level,
        )
    return out


def oai_sc(table: AggregateTable, zone: str, sc: str) -> float:
    """Zone OA share in one SC relative to the world OA share in that SC."""
    cell = table.world.get(sc) if zone == WORLD else table.cells.get((zone, sc))
    if cell is None or cell.n == 0:
        raise IndicatorError(f"no support for zone {zone!r} in SC {sc!r}")
    w = table.world.get(sc)
    if w is None or w.n == 0 or w.n_oa == 0:
        raise IndicatorError(f"undefined index: world OA share is zero for SC {sc!r}")
    return _share(cell) / _share(w)


def noai(table: AggregateTable, zone: str, cells=None) -> IndicatorResult:
    """Publication-weighted mean of the zone's per-SC OA indexes.

    SCs whose world OA share is zero have no index; they are dropped and the
    weights renormalized over the remaining SCs.
    """
    terms = []
    weights = []
    excluded = []
    world = table.world
    for sc, c in sorted(_cells(table, zone, cells).items()):
        if c.n == 0:
            continue
        w = world.get(sc)
        if w is None or w.n == 0 or w.n_oa == 0:
            excluded.append(sc)
            continue
        n = float(c.n)
        terms.append(_share(c) / _share(w) * n)
        weights.append(n)
    support = math.fsum(weights)
    if support <= 0:
        raise IndicatorError(f"NOAI undefined for zone {zone!r}")
    return IndicatorResult(
        zone, table.period.name, math.fsum(terms) / support, support, excluded,
        indicator="noai", level=table.level,
    )


def _discipline_totals(
    cells: dict[str, AggregateCell], scheme: SubjectScheme
) -> tuple[dict[str, float], float]:
    parts: dict[str, list[float]] = {}
    for sc, c in cells.items():
        parts.setdefault(scheme.discipline_of(sc), []).append(float(c.n))
    totals = {d: math.fsum(v) for d, v in parts.items()}
    return totals, math.fsum(totals.values())


def specialization_index(
    table: AggregateTable, scheme: SubjectScheme, zone: str, discipline: str
) -> float:
    """Zone share of a discipline divided by the world share of that discipline."""
    return specialization_profile(table, scheme, zone, [discipline])[discipline]


def specialization_profile(
    table: AggregateTable,
    scheme: SubjectScheme,
    zone: str,
    disciplines: Iterable[str] | None = None,
    cells=None,
) -> dict[str, float]:
    """Specialization index for several disciplines at once.

    With ``disciplines=None`` every discipline with positive world share is
    returned; explicitly requested undefined disciplines raise.
    """
    z_tot, z_all = _discipline_totals(_cells(table, zone, cells), scheme)
    if z_all <= 0:
        raise IndicatorError(f"no support for zone {zone!r}")
    w_tot, w_all = _discipline_totals(table.world, scheme)
    strict = disciplines is not None
    out = {}
    for d in (scheme.disciplines if disciplines is None else disciplines):
        if d not in scheme.disciplines:
            raise IndicatorError(f"unknown discipline {d!r}")
        w = w_tot.get(d, 0.0)
        if w_all <= 0 or w <= 0:
            if strict:
                raise IndicatorError(f"undefined: world share of {d!r} is zero")
            continue
        out[d] = (z_tot.get(d, 0.0) / z_all) / (w / w_all)
    return out


def world_discipline_shares(table: AggregateTable, scheme: SubjectScheme) -> dict[str, float]:
    totals, total = _discipline_totals(table.world, scheme)
    if total <= 0:
        return {}
    return {d: totals[d] / total for d in scheme.disciplines if totals.get(d, 0.0) > 0}


@dataclass
class IndicatorSummary:
    results: list[IndicatorResult]
    skipped: dict[str, list[str]]

    @property
    def excluded_sc_count(self) -> int:
        return len({sc for r in self.results if r.indicator == "noai" for sc in r.excluded_scs})


def compute_indicators(
    table: AggregateTable,
    scheme: SubjectScheme,
    indicators: Iterable[str] = INDICATORS,
) -> IndicatorSummary:
    """Evaluate the requested indicators for every zone of a table and for the world.

    Zones where an indicator is undefined are skipped and listed per indicator.
    """
    indicators = list(indicators)
    unknown = [i for i in indicators if i not in INDICATORS]
    if unknown:
        raise ValueError(f"unknown indicators: {unknown}")
    results: list[IndicatorResult] = []
    skipped: dict[str, list[str]] = {i: [] for i in indicators}
    period = table.period.name
    index = table.by_zone()
    index[WORLD] = dict(table.world)
    for zone in table.zones() + [WORLD]:
        cells = index[zone]
        if "oa_share" in indicators:
            try:
                results.append(oa_share(table, zone, cells))
            except IndicatorError:
                skipped["oa_share"].append(zone)
        if "noai" in indicators:
            try:
                results.append(noai(table, zone, cells))
            except IndicatorError:
                skipped["noai"].append(zone)
        if "specialization" in indicators:
            try:
                profile = specialization_profile(table, scheme, zone, cells=cells)
            except IndicatorError:
                skipped["specialization"].append(zone)
            else:
                support = math.fsum(float(c.n) for c in cells.values())
                for d, v in profile.items():
                    results.append(IndicatorResult(
                        zone, period, v, support,
                        indicator=f"specialization:{d}", level=table.level,
                    ))
    if "discipline_share" in indicators:
        results.extend(oa_share_by_discipline(table, scheme).values())
    return IndicatorSummary(results, skipped)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_results(results: Iterable[IndicatorResult], dest: str | Path | IO[str]) -> int:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            return write_results(results, fh)
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    rows = 0
    for r in results:
        writer.writerow((r.level, r.period, r.zone, r.indicator, _fmt(r.value), _fmt(r.support), r.excluded_sc_count))
        rows += 1
    return rows


def read_results(source: str | Path | IO[str]) -> list[IndicatorResult]:
    """Read results back; excluded SC codes are not serialized, only their count."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_results(fh)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
        raise ValueError(f"indicator CSV must have columns {','.join(RESULT_COLUMNS)}")
    out = []
    for row in reader:
        out.append(IndicatorResult(
            row["zone"], row["period"], float(row["value"]), float(row["support"]),
            [], row["indicator"], row["level"], int(row["excluded_sc_count"]),
        ))
    return out
