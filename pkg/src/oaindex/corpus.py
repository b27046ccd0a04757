"""Publication data model, reference schemes and JSONL ingestion.

Input corpora are line-delimited JSON, one publication per line::

    {"pub_id": "P1", "year": 2016, "doc_type": "article",
     "oa_types": ["bronze"], "subject_categories": ["SC01", "SC02"],
     "affiliations": [{"country": "FR", "nuts1": "FR1"}, {"country": "DE", "nuts1": null}]}

Malformed lines are rejected and recorded in an :class:`IngestReport`; they
never abort the stream and are never repaired.
"""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple, Sequence

from oaindex.errors import SchemeError

DOC_TYPES = ("article", "letter", "review", "other")
DEFAULT_DOC_TYPES = frozenset({"article", "letter", "review"})
OA_TYPES = (
    "doaj_gold",
    "other_gold",
    "bronze",
    "hybrid",
    "green_published",
    "green_accepted",
    "green_other",
)

_DOC_TYPE_SET = frozenset(DOC_TYPES)
_OA_TYPE_SET = frozenset(OA_TYPES)
_decode = json.JSONDecoder().decode
_PERIOD_RE = re.compile(r"^\s*(\d{4})\s*-\s*(\d{4})\s*$")

# Cap on per-line rejection details kept in a report; counts stay complete.
MAX_REJECTION_SAMPLES = 1000


class Affiliation(NamedTuple):
    country: str
    nuts1: str | None = None


class PublicationRecord(NamedTuple):
    pub_id: str
    year: int
    doc_type: str
    oa_types: frozenset[str]
    subject_categories: tuple[str, ...]
    affiliations: tuple[Affiliation, ...] = ()

    @property
    def unattributable(self) -> bool:
        """True when the record carries no address at all."""
        return not self.affiliations


def is_open(record: PublicationRecord) -> bool:
    """A publication is open if it has any OA version, whatever the route."""
    return bool(record.oa_types)


@dataclass(frozen=True)
class PeriodSpec:
    name: str
    year_min: int
    year_max: int

    def __post_init__(self):
        if self.year_min > self.year_max:
            raise ValueError(f"period {self.name!r}: year_min > year_max")

    def __contains__(self, year: int) -> bool:
        return self.year_min <= year <= self.year_max

    @classmethod
    def parse(cls, text: str, name: str | None = None) -> PeriodSpec:
        """Build a period from ``"2000-2003"``; the name defaults to the text."""
        m = _PERIOD_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse period {text!r}, expected YYYY-YYYY")
        return cls(name or text.strip(), int(m.group(1)), int(m.group(2)))

    def overlaps(self, other: PeriodSpec) -> bool:
        return self.year_min <= other.year_max and other.year_min <= self.year_max


DEFAULT_PERIODS = (
    PeriodSpec("2000-2003", 2000, 2003),
    PeriodSpec("2008-2011", 2008, 2011),
    PeriodSpec("2015-2018", 2015, 2018),
)


def filter_corpus(
    records: Iterable[PublicationRecord],
    period: PeriodSpec,
    doc_types: Iterable[str] = DEFAULT_DOC_TYPES,
) -> list[PublicationRecord]:
    """Keep records published within ``period`` whose doc type is in ``doc_types``."""
    doc_types = frozenset(doc_types)
    lo, hi = period.year_min, period.year_max
    return [r for r in records if lo <= r.year <= hi and r.doc_type in doc_types]


@dataclass(frozen=True)
class SubjectScheme:
    """Total mapping from subject category codes to disciplines.

    ``disciplines`` is the declared discipline list. Every SC must map into it
    and every declared discipline must receive at least one SC.
    """

    sc_to_discipline: dict[str, str]
    disciplines: tuple[str, ...]

    def __post_init__(self):
        declared = set(self.disciplines)
        if len(declared) != len(self.disciplines):
            raise SchemeError("duplicate discipline in declared list")
        used = set(self.sc_to_discipline.values())
        unknown = sorted(used - declared)
        if unknown:
            raise SchemeError(f"SCs map to undeclared disciplines: {unknown}")
        orphans = sorted(declared - used)
        if orphans:
            raise SchemeError(f"orphan disciplines with no SC: {orphans}")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> SubjectScheme:
        disciplines = tuple(dict.fromkeys(mapping.values()))
        return cls(dict(mapping), disciplines)

    @classmethod
    def from_csv(cls, source: str | Path | IO[str]) -> SubjectScheme:
        """Read a ``sc_code,discipline`` CSV; disciplines keep first-seen order."""
        rows = _read_csv(source, ("sc_code", "discipline"))
        mapping: dict[str, str] = {}
        for lineno, row in rows:
            sc = row["sc_code"].strip()
            disc = row["discipline"].strip()
            if not sc or not disc:
                raise SchemeError(f"line {lineno}: empty sc_code or discipline")
            if sc in mapping:
                raise SchemeError(f"line {lineno}: duplicate sc_code {sc!r}")
            mapping[sc] = disc
        return cls.from_mapping(mapping)

    def __contains__(self, sc: str) -> bool:
        return sc in self.sc_to_discipline

    def discipline_of(self, sc: str) -> str:
        try:
            return self.sc_to_discipline[sc]
        except KeyError:
            raise SchemeError(f"unknown SC: {sc!r}") from None

    def scs_of(self, discipline: str) -> list[str]:
        return [sc for sc, d in self.sc_to_discipline.items() if d == discipline]


@dataclass(frozen=True)
class Region:
    code: str
    name: str
    parent: str


@dataclass
class ZoneRegistry:
    """Countries and NUTS1 regions with region-to-country containment.

    ``nuts_prefixes`` maps a country code to its NUTS prefix where the two
    differ (``GB -> UK``, ``GR -> EL``); other countries use their own code.
    """

    countries: dict[str, str]
    regions: dict[str, Region] = field(default_factory=dict)
    nuts_prefixes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for code in self.nuts_prefixes:
            if code not in self.countries:
                raise SchemeError(f"NUTS prefix given for unknown country {code!r}")
        for region in self.regions.values():
            if region.parent not in self.countries:
                raise SchemeError(
                    f"region {region.code!r} has unknown parent country {region.parent!r}"
                )
            prefix = self.nuts_prefix(region.parent)
            if not region.code.startswith(prefix):
                raise SchemeError(
                    f"region {region.code!r} does not start with NUTS prefix {prefix!r}"
                )
        self._country_by_prefix = {self.nuts_prefix(c): c for c in self.countries}

    @classmethod
    def from_csv(cls, source: str | Path | IO[str]) -> ZoneRegistry:
        """Read a ``code,name,parent[,nuts_prefix]`` CSV.

        Rows with an empty ``parent`` are countries; the others are NUTS1
        regions whose ``parent`` is a country code.
        """
        rows = _read_csv(source, ("code", "name", "parent"))
        countries: dict[str, str] = {}
        prefixes: dict[str, str] = {}
        pending: list[tuple[int, dict]] = []
        for lineno, row in rows:
            code = row["code"].strip()
            if not code:
                raise SchemeError(f"line {lineno}: empty code")
            if (row.get("parent") or "").strip():
                pending.append((lineno, row))
                continue
            if code in countries:
                raise SchemeError(f"line {lineno}: duplicate country code {code!r}")
            countries[code] = row["name"].strip()
            prefix = (row.get("nuts_prefix") or "").strip()
            if prefix and prefix != code:
                prefixes[code] = prefix
        regions: dict[str, Region] = {}
        for lineno, row in pending:
            code = row["code"].strip()
            if code in regions:
                raise SchemeError(f"line {lineno}: duplicate region code {code!r}")
            regions[code] = Region(code, row["name"].strip(), row["parent"].strip())
        return cls(countries, regions, prefixes)

    def nuts_prefix(self, country: str) -> str:
        return self.nuts_prefixes.get(country, country)

    def country_for_prefix(self, prefix: str) -> str | None:
        return self._country_by_prefix.get(prefix)

    def has_zone(self, code: str, level: str) -> bool:
        if level == "country":
            return code in self.countries
        if level == "nuts1":
            return code in self.regions
        raise ValueError(f"unknown level {level!r}")

    def zone_name(self, code: str, level: str) -> str:
        if level == "country":
            return self.countries[code]
        return self.regions[code].name

    def geometry_id(self, code: str, level: str) -> str:
        """Identifier used by Eurostat map layers for this zone."""
        if level == "country":
            return self.nuts_prefix(code)
        return code


def _read_csv(source, required: Sequence[str]) -> list[tuple[int, dict]]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _read_csv(fh, required)
    reader = csv.DictReader(source)
    missing = [c for c in required if c not in (reader.fieldnames or ())]
    if missing:
        raise SchemeError(f"CSV header missing columns: {missing}")
    return [(i + 2, row) for i, row in enumerate(reader)]


@dataclass
class IngestReport:
    total: int = 0
    accepted: int = 0
    rejections: Counter = field(default_factory=Counter)
    samples: list[tuple[str, int, str]] = field(default_factory=list)
    region_unattributable_records: int = 0
    region_unattributable_affiliations: int = 0
    no_address_records: int = 0

    @property
    def rejected(self) -> int:
        return sum(self.rejections.values())

    @property
    def region_unattributable_rate(self) -> float:
        """Share of accepted records with at least one address lacking a NUTS1 region."""
        return self.region_unattributable_records / self.accepted if self.accepted else 0.0

    def reject(self, source: str, lineno: int, reason: str) -> None:
        self.rejections[reason] += 1
        if len(self.samples) < MAX_REJECTION_SAMPLES:
            self.samples.append((source, lineno, reason))

    def note_accepted(self, record: PublicationRecord, missing: int | None = None) -> None:
        """Count an accepted record; ``missing`` is its number of region-unattributable addresses."""
        self._note(record, missing, 1)

    def note_retracted(self, record: PublicationRecord, missing: int | None = None) -> None:
        """Undo :meth:`note_accepted` for a record later found to be a duplicate."""
        self._note(record, missing, -1)

    def _note(self, record: PublicationRecord, missing: int | None, sign: int) -> None:
        self.accepted += sign
        if not record.affiliations:
            self.no_address_records += sign
            return
        if missing is None:
            missing = sum(1 for a in record.affiliations if a.nuts1 is None)
        if missing:
            self.region_unattributable_records += sign
            self.region_unattributable_affiliations += missing * sign

    def update(self, other: IngestReport) -> None:
        self.total += other.total
        self.accepted += other.accepted
        self.rejections.update(other.rejections)
        room = MAX_REJECTION_SAMPLES - len(self.samples)
        if room > 0:
            self.samples.extend(other.samples[:room])
        self.region_unattributable_records += other.region_unattributable_records
        self.region_unattributable_affiliations += other.region_unattributable_affiliations
        self.no_address_records += other.no_address_records

    def to_dict(self) -> dict:
        return {
            "total_lines": self.total,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejections_by_reason": dict(sorted(self.rejections.items())),
            "rejection_samples": [
                {"source": s, "line": n, "reason": r} for s, n, r in self.samples
            ],
            "region_unattributable_records": self.region_unattributable_records,
            "region_unattributable_affiliations": self.region_unattributable_affiliations,
            "region_unattributable_rate": self.region_unattributable_rate,
            "region_unattributable_pct": format_rate(self.region_unattributable_rate),
            "no_address_records": self.no_address_records,
        }


def format_rate(rate: float) -> str:
    return f"{100.0 * rate:.1f}%"


class RecordParser:
    """Validates JSONL lines into records, tracking duplicates and the report.

    A pub_id is remembered only once a record carrying it has been accepted,
    so a later valid record may reuse the id of an earlier rejected line.
    """

    def __init__(
        self,
        scheme: SubjectScheme | None = None,
        registry: ZoneRegistry | None = None,
        report: IngestReport | None = None,
    ):
        self.scheme = scheme
        self.registry = registry
        self.report = report if report is not None else IngestReport()
        self.seen: set[str] = set()
        if registry is not None:
            self._regional = {r.parent for r in registry.regions.values()}
            self._regions = registry.regions
        else:
            self._regional = self._regions = None

    def missing_regions(self, record: PublicationRecord) -> int:
        """Addresses that should resolve to a NUTS1 region but do not.

        With a registry only countries that have regions count, so addresses
        outside the registry or in region-less countries are not penalized.
        """
        if self._regional is None:
            return sum(1 for a in record.affiliations if a.nuts1 is None)
        regional, regions = self._regional, self._regions
        return sum(
            1 for a in record.affiliations
            if a.country in regional and (a.nuts1 is None or a.nuts1 not in regions)
        )

    def parse_line(self, line: str | bytes, lineno: int, source: str = "<stream>"):
        """Return a validated record, or None after recording the rejection."""
        self.report.total += 1
        try:
            record = self._build(line)
        except _Reject as exc:
            self.report.reject(source, lineno, exc.reason)
            return None
        if record.pub_id in self.seen:
            self.report.reject(source, lineno, "duplicate pub_id")
            return None
        self.seen.add(record.pub_id)
        self.report.note_accepted(record, self.missing_regions(record))
        return record

    def _build(self, line) -> PublicationRecord:
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                raise _Reject("invalid UTF-8") from None
        if not line.strip():
            raise _Reject("empty line")
        try:
            obj = _decode(line)
        except ValueError:
            raise _Reject("malformed JSON") from None
        if not isinstance(obj, dict):
            raise _Reject("not a JSON object")

        pub_id = obj.get("pub_id")
        if pub_id is None:
            raise _Reject("missing pub_id")
        if not isinstance(pub_id, str) or not pub_id:
            raise _Reject("invalid pub_id")

        year = obj.get("year")
        if year is None:
            raise _Reject("missing year")
        if type(year) is not int:
            raise _Reject("invalid year")

        doc_type = obj.get("doc_type")
        if doc_type is None or doc_type == "":
            raise _Reject("missing doc_type")
        if doc_type not in _DOC_TYPE_SET:
            raise _Reject("invalid doc_type")

        oa = obj.get("oa_types")
        if oa is None:
            oa = []
        try:
            if not isinstance(oa, list) or not _OA_TYPE_SET.issuperset(oa):
                raise _Reject("invalid oa_types")
        except TypeError:
            raise _Reject("invalid oa_types") from None

        scs = obj.get("subject_categories")
        if scs is None:
            raise _Reject("missing subject_categories")
        if not isinstance(scs, list):
            raise _Reject("invalid subject_categories")
        try:
            sc_set = set(scs)
        except TypeError:
            raise _Reject("invalid subject_categories") from None
        scheme = self.scheme
        if scheme is not None:
            if not scheme.sc_to_discipline.keys() >= sc_set:
                if all(type(x) is str and x for x in sc_set):
                    raise _Reject("unknown SC")
                raise _Reject("invalid subject_categories")
        elif not all(type(x) is str and x for x in sc_set):
            raise _Reject("invalid subject_categories")
        if not sc_set:
            raise _Reject("empty SC set")

        raw_affs = obj.get("affiliations")
        if raw_affs is None:
            raw_affs = []
        if not isinstance(raw_affs, list):
            raise _Reject("invalid affiliations")
        affs = []
        # Prefixes are only checkable against a registry (GB -> UK, GR -> EL).
        prefixes = self.registry.nuts_prefixes if self.registry is not None else None
        for a in raw_affs:
            if type(a) is not dict:
                raise _Reject("invalid affiliations")
            country = a.get("country")
            if type(country) is not str or not country:
                raise _Reject("invalid affiliations")
            nuts1 = a.get("nuts1")
            if nuts1 is not None:
                if type(nuts1) is not str:
                    raise _Reject("invalid nuts1")
                if prefixes is None:
                    if len(nuts1) < 3:
                        raise _Reject("invalid nuts1")
                else:
                    prefix = prefixes.get(country, country)
                    if not nuts1.startswith(prefix):
                        raise _Reject("nuts1 prefix mismatch")
                    if len(nuts1) != len(prefix) + 1:
                        raise _Reject("invalid nuts1")
            affs.append(Affiliation(country, nuts1))

        return PublicationRecord(
            pub_id,
            year,
            doc_type,
            frozenset(oa),
            tuple(sorted(sc_set)),
            tuple(affs),
        )


class _Reject(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def iter_publications(
    stream: Iterable[str | bytes],
    parser: RecordParser,
    source: str = "<stream>",
    first_lineno: int = 1,
) -> Iterator[PublicationRecord]:
    for lineno, line in enumerate(stream, first_lineno):
        record = parser.parse_line(line, lineno, source)
        if record is not None:
            yield record


def parse_publications(
    stream: IO[bytes] | IO[str] | Iterable[str | bytes],
    fmt: str = "jsonl",
    scheme: SubjectScheme | None = None,
    registry: ZoneRegistry | None = None,
    source: str = "<stream>",
) -> tuple[list[PublicationRecord], IngestReport]:
    """Parse a whole line-delimited stream into validated records.

    ``scheme`` enables the "unknown SC" check and ``registry`` supplies the
    country-to-NUTS-prefix mapping used to validate ``nuts1`` codes.
    """
    if fmt != "jsonl":
        raise ValueError(f"unsupported corpus format {fmt!r}")
    if isinstance(stream, (bytes, str)):
        stream = io.BytesIO(stream) if isinstance(stream, bytes) else io.StringIO(stream)
    parser = RecordParser(scheme, registry)
    records = list(iter_publications(stream, parser, source))
    return records, parser.report
