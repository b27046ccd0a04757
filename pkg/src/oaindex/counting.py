"""Disciplinary fractional counting, geographic counting and aggregate tables.

A publication listing ``k`` subject categories gives weight ``1/k`` to each.
Geographically it is credited in full to every zone where at least one
co-author is located (whole counting); an optional fractional mode splits
that unit over the distinct zones instead.

Accumulation is exact. Builders tally integer counts keyed by the weight's
denominator and resolve them to :class:`fractions.Fraction` once, so results
do not depend on input order or on how the corpus was partitioned.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable

from oaindex.corpus import PeriodSpec, PublicationRecord, SubjectScheme, ZoneRegistry
from oaindex.errors import IncompatibleTablesError, SchemeError

LEVELS = ("country", "nuts1")
COUNTING_MODES = ("whole", "fractional")
WORLD = "WORLD"
TABLE_COLUMNS = ("level", "period", "zone", "sc", "n", "n_oa")

_ZERO = Fraction(0)


def sc_fractions(record: PublicationRecord) -> dict[str, Fraction]:
    k = len(record.subject_categories)
    w = Fraction(1, k)
    return {sc: w for sc in record.subject_categories}


def discipline_fractions(record: PublicationRecord, scheme: SubjectScheme) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for sc, w in sc_fractions(record).items():
        d = scheme.discipline_of(sc)
        out[d] = out.get(d, _ZERO) + w
    return out


def zone_set(
    record: PublicationRecord, level: str, registry: ZoneRegistry
) -> tuple[frozenset[str], bool]:
    """Distinct registry zones of a record, and whether any address failed to resolve."""
    zones = set()
    unresolved = False
    if level == "country":
        known = registry.countries
        for a in record.affiliations:
            if a.country in known:
                zones.add(a.country)
            else:
                unresolved = True
    elif level == "nuts1":
        known = registry.regions
        for a in record.affiliations:
            if a.nuts1 is not None and a.nuts1 in known:
                zones.add(a.nuts1)
            else:
                unresolved = True
    else:
        raise ValueError(f"unknown level {level!r}")
    return frozenset(zones), unresolved


def _address_keys(record: PublicationRecord, level: str) -> int:
    if level == "country":
        return len({a.country for a in record.affiliations})
    return len({(a.country, a.nuts1) for a in record.affiliations})


@dataclass(frozen=True)
class AggregateCell:
    n: Fraction = _ZERO
    n_oa: Fraction = _ZERO

    def __post_init__(self):
        if not (0 <= self.n_oa <= self.n):
            raise ValueError(f"invalid cell: n={self.n}, n_oa={self.n_oa}")

    def __add__(self, other: AggregateCell) -> AggregateCell:
        return AggregateCell(self.n + other.n, self.n_oa + other.n_oa)

    def scaled(self, factor) -> AggregateCell:
        factor = Fraction(factor)
        return AggregateCell(self.n * factor, self.n_oa * factor)


@dataclass
class AggregateTable:
    """Fractional counts per (zone, SC) plus the world row for one level and period."""

    level: str
    period: PeriodSpec
    cells: dict[tuple[str, str], AggregateCell] = field(default_factory=dict)
    world: dict[str, AggregateCell] = field(default_factory=dict)
    counting: str = "whole"

    def zones(self) -> list[str]:
        return sorted({z for z, _ in self.cells})

    def zone_cells(self, zone: str) -> dict[str, AggregateCell]:
        """SC -> cell for one zone; the reserved ``WORLD`` code returns the world row."""
        if zone == WORLD:
            return dict(self.world)
        return {sc: c for (z, sc), c in self.cells.items() if z == zone}

    def by_zone(self) -> dict[str, dict[str, AggregateCell]]:
        out: dict[str, dict[str, AggregateCell]] = defaultdict(dict)
        for (z, sc), c in self.cells.items():
            out[z][sc] = c
        return dict(out)

    def __eq__(self, other):
        if not isinstance(other, AggregateTable):
            return NotImplemented
        return (
            self.level == other.level
            and self.period == other.period
            and self.counting == other.counting
            and _nonzero(self.cells) == _nonzero(other.cells)
            and _nonzero(self.world) == _nonzero(other.world)
        )


def _nonzero(d: dict) -> dict:
    return {k: v for k, v in d.items() if v.n != 0}


def _exact(tally: dict[int, int]) -> Fraction:
    """Sum of ``count / denominator`` over a denominator -> count map, exactly."""
    if not tally:
        return _ZERO
    lcm = math.lcm(*tally)
    return Fraction(sum(c * (lcm // d) for d, c in tally.items()), lcm)


class TableBuilder:
    """Streaming accumulator for one (level, period) table.

    Tallies are plain dicts of ints, so builders can be pickled between
    processes, merged with :meth:`update` and corrected with :meth:`retract`.
    """

    def __init__(
        self,
        level: str,
        period: PeriodSpec,
        registry: ZoneRegistry,
        counting: str = "whole",
    ):
        if level not in LEVELS:
            raise ValueError(f"unknown level {level!r}")
        if counting not in COUNTING_MODES:
            raise ValueError(f"unknown counting mode {counting!r}")
        self.level = level
        self.period = period
        self.registry = registry
        self.counting = counting
        self.cell: Counter[tuple[str, str, int]] = Counter()
        self.cell_oa: Counter[tuple[str, str, int]] = Counter()
        self.world: Counter[tuple[str, int]] = Counter()
        self.world_oa: Counter[tuple[str, int]] = Counter()
        self.records = 0
        self.unresolved = 0
        self.zoneless = 0

    def add(self, record: PublicationRecord, sign: int = 1) -> None:
        zones, flag = zone_set(record, self.level, self.registry)
        scs = record.subject_categories
        k = len(scs)
        is_oa = bool(record.oa_types)
        self.records += sign
        if flag:
            self.unresolved += sign
        if not zones:
            self.zoneless += sign
        wkeys = [(s, k) for s in scs]
        ckeys = None
        if zones:
            d = k * _address_keys(record, self.level) if self.counting == "fractional" else k
            ckeys = [(z, s, d) for z in zones for s in scs]
        # Counter.update counts in C; subtract is only used for rare retractions.
        bump = Counter.update if sign > 0 else Counter.subtract
        bump(self.world, wkeys)
        if is_oa:
            bump(self.world_oa, wkeys)
        if ckeys:
            bump(self.cell, ckeys)
            if is_oa:
                bump(self.cell_oa, ckeys)

    def retract(self, record: PublicationRecord) -> None:
        self.add(record, sign=-1)

    def update(self, other: TableBuilder) -> None:
        if (other.level, other.period, other.counting) != (self.level, self.period, self.counting):
            raise IncompatibleTablesError("incompatible tables")
        for mine, theirs in (
            (self.cell, other.cell),
            (self.cell_oa, other.cell_oa),
            (self.world, other.world),
            (self.world_oa, other.world_oa),
        ):
            mine.update(theirs)
        self.records += other.records
        self.unresolved += other.unresolved
        self.zoneless += other.zoneless

    def table(self, scheme: SubjectScheme | None = None) -> AggregateTable:
        """Resolve tallies into exact cells; ``scheme`` adds zero world rows for unseen SCs."""
        cell_n: dict[tuple[str, str], dict[int, int]] = defaultdict(dict)
        cell_oa: dict[tuple[str, str], dict[int, int]] = defaultdict(dict)
        for (z, s, d), c in self.cell.items():
            if c:
                cell_n[(z, s)][d] = c
        for (z, s, d), c in self.cell_oa.items():
            if c:
                cell_oa[(z, s)][d] = c
        world_n: dict[str, dict[int, int]] = defaultdict(dict)
        world_oa: dict[str, dict[int, int]] = defaultdict(dict)
        for (s, d), c in self.world.items():
            if c:
                world_n[s][d] = c
        for (s, d), c in self.world_oa.items():
            if c:
                world_oa[s][d] = c

        cells = {
            key: AggregateCell(_exact(tally), _exact(cell_oa.get(key, {})))
            for key, tally in sorted(cell_n.items())
        }
        world = {}
        if scheme is not None:
            world = {sc: AggregateCell() for sc in sorted(scheme.sc_to_discipline)}
        for s, tally in sorted(world_n.items()):
            world[s] = AggregateCell(_exact(tally), _exact(world_oa.get(s, {})))
        return AggregateTable(self.level, self.period, cells, world, self.counting)


def aggregate(
    records: Iterable[PublicationRecord],
    level: str,
    period: PeriodSpec,
    scheme: SubjectScheme,
    registry: ZoneRegistry,
    counting: str = "whole",
) -> AggregateTable:
    """Aggregate already-filtered records into a table.

    Records with no resolvable zone still contribute to the world row, which
    counts every record exactly once.
    """
    builder = TableBuilder(level, period, registry, counting)
    known = scheme.sc_to_discipline
    for r in records:
        for sc in r.subject_categories:
            if sc not in known:
                raise SchemeError(f"unknown SC: {sc!r}")
        builder.add(r)
    return builder.table(scheme)


def merge(a: AggregateTable, b: AggregateTable) -> AggregateTable:
    """Component-wise sum of two tables built from disjoint corpora."""
    if (a.level, a.period, a.counting) != (b.level, b.period, b.counting):
        raise IncompatibleTablesError("incompatible tables")
    cells = dict(a.cells)
    for key, c in b.cells.items():
        cells[key] = cells[key] + c if key in cells else c
    world = dict(a.world)
    for key, c in b.world.items():
        world[key] = world[key] + c if key in world else c
    return AggregateTable(
        a.level,
        a.period,
        dict(sorted(cells.items())),
        dict(sorted(world.items())),
        a.counting,
    )


def write_tables(tables: Iterable[AggregateTable], dest: str | Path | IO[str]) -> int:
    """Write tables as ``level,period,zone,sc,n,n_oa`` rows; returns rows written.

    Values use the shortest repr that round-trips the double, so reading the
    file back reproduces every cell's float value exactly.
    """
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            return write_tables(tables, fh)
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    rows = 0
    for t in tables:
        for sc, c in sorted(t.world.items()):
            writer.writerow((t.level, t.period.name, WORLD, sc, repr(float(c.n)), repr(float(c.n_oa))))
            rows += 1
        for (z, sc), c in sorted(t.cells.items()):
            writer.writerow((t.level, t.period.name, z, sc, repr(float(c.n)), repr(float(c.n_oa))))
            rows += 1
    return rows


def read_tables(
    source: str | Path | IO[str],
    periods: Iterable[PeriodSpec] = (),
    counting: str = "whole",
) -> list[AggregateTable]:
    """Read tables written by :func:`write_tables`, in first-seen order.

    Period names are resolved against ``periods``; unknown names must have
    the ``YYYY-YYYY`` form.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_tables(fh, periods, counting)
    by_name = {p.name: p for p in periods}
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise ValueError(f"aggregate CSV must have columns {','.join(TABLE_COLUMNS)}")
    tables: dict[tuple[str, str], AggregateTable] = {}
    for row in reader:
        key = (row["level"], row["period"])
        table = tables.get(key)
        if table is None:
            if row["level"] not in LEVELS:
                raise ValueError(f"unknown level {row['level']!r}")
            period = by_name.get(row["period"]) or PeriodSpec.parse(row["period"])
            table = tables[key] = AggregateTable(row["level"], period, counting=counting)
        cell = AggregateCell(Fraction(float(row["n"])), Fraction(float(row["n_oa"])))
        if row["zone"] == WORLD:
            table.world[row["sc"]] = cell
        else:
            table.cells[(row["zone"], row["sc"])] = cell
    return list(tables.values())
