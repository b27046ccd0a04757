from __future__ import annotations

import json
import random

from oaindex.corpus import Affiliation, PublicationRecord, RecordParser, SubjectScheme, ZoneRegistry
from oaindex.synthetic import CorpusGenerator, make_registry, make_scheme

SCHEME = make_scheme(12)
REGISTRY = make_registry()
YEARS = (2015, 2018)
DOC_TYPES = frozenset({"article", "letter", "review"})


def rec(
    pub_id: str,
    scs,
    affs=(),
    oa=(),
    year: int = 2016,
    doc_type: str = "article",
) -> PublicationRecord:
    """Compact record builder; ``affs`` items are ``"FR"`` or ``("FR", "FR1")``."""
    parsed = []
    for a in affs:
        parsed.append(Affiliation(a) if isinstance(a, str) else Affiliation(*a))
    return PublicationRecord(pub_id, year, doc_type, frozenset(oa), tuple(sorted(set(scs))), tuple(parsed))


def raw_corpus(n: int, seed: int, scheme: SubjectScheme = SCHEME, registry: ZoneRegistry = REGISTRY, **kw) -> list[dict]:
    gen = CorpusGenerator(scheme, registry, seed=seed, years=YEARS, **kw)
    return [gen.record(i) for i in range(n)]


def to_records(raw: list[dict], scheme=SCHEME, registry=REGISTRY) -> list[PublicationRecord]:
    parser = RecordParser(scheme, registry)
    out = []
    for i, d in enumerate(raw, 1):
        r = parser.parse_line(json.dumps(d), i)
        assert r is not None, parser.report.samples
        out.append(r)
    return out


def random_split(items: list, rng: random.Random) -> tuple[list, list]:
    left, right = [], []
    for x in items:
        (left if rng.random() < 0.5 else right).append(x)
    return left, right


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(r if isinstance(r, str) else json.dumps(r))
            fh.write("\n")
