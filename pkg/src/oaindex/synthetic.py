"""Synthetic reference files and corpora for demos, tests and benchmarks.

Nothing here resembles real bibliometric data beyond its shape: the
subject categories are numbered placeholders rolled up into eleven
discipline names, and the zone registry uses real country codes with
invented region names.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import IO

from oaindex.corpus import OA_TYPES, Region, SubjectScheme, ZoneRegistry

DISCIPLINES = (
    "Fundamental biology",
    "Medical research",
    "Applied biology-ecology",
    "Earth sciences-astronomy",
    "Social sciences",
    "Physics",
    "Chemistry",
    "Mathematics",
    "Humanities",
    "Engineering",
    "Computer science",
)

# ISO code, name, NUTS prefix when it differs, number of NUTS1 regions
COUNTRIES = (
    ("AT", "Austria", None, 3),
    ("BE", "Belgium", None, 3),
    ("DE", "Germany", None, 16),
    ("DK", "Denmark", None, 1),
    ("ES", "Spain", None, 7),
    ("FI", "Finland", None, 2),
    ("FR", "France", None, 14),
    ("GB", "United Kingdom", "UK", 12),
    ("GR", "Greece", "EL", 4),
    ("IE", "Ireland", None, 1),
    ("IT", "Italy", None, 5),
    ("NL", "Netherlands", None, 4),
    ("PL", "Poland", None, 7),
    ("PT", "Portugal", None, 3),
    ("SE", "Sweden", None, 3),
    ("TR", "Turkey", None, 0),
)
OUTSIDE = ("US", "CN", "JP", "BR", "CA")
_REGION_CHARS = "123456789ABCDEFGHJKLMN"


def make_scheme(n_sc: int = 44) -> SubjectScheme:
    """``n_sc`` placeholder SCs dealt round-robin into the eleven disciplines."""
    mapping = {f"SC{i:03d}": DISCIPLINES[i % len(DISCIPLINES)] for i in range(n_sc)}
    return SubjectScheme(mapping, DISCIPLINES)


def make_registry() -> ZoneRegistry:
    countries = {code: name for code, name, _, _ in COUNTRIES}
    prefixes = {code: p for code, _, p, _ in COUNTRIES if p}
    regions = {}
    for code, name, prefix, n in COUNTRIES:
        prefix = prefix or code
        for i in range(n):
            rc = prefix + _REGION_CHARS[i]
            regions[rc] = Region(rc, f"{name} region {_REGION_CHARS[i]}", code)
    return ZoneRegistry(countries, regions, prefixes)


def write_scheme_csv(scheme: SubjectScheme, path: str | Path) -> None:
    lines = ["sc_code,discipline"] + [f"{sc},{d}" for sc, d in scheme.sc_to_discipline.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_registry_csv(registry: ZoneRegistry, path: str | Path) -> None:
    lines = ["code,name,parent,nuts_prefix"]
    for code, name in registry.countries.items():
        prefix = registry.nuts_prefixes.get(code, "")
        lines.append(f"{code},{name},,{prefix}")
    for r in registry.regions.values():
        lines.append(f"{r.code},{r.name},{r.parent},")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_geometry(registry: ZoneRegistry, level: str, path: str | Path, id_property: str = "NUTS_ID") -> None:
    """One unit square per zone, laid out on a grid; enough for join tests and demos."""
    codes = [registry.geometry_id(c, level) for c in
             (registry.countries if level == "country" else registry.regions)]
    feats = []
    for i, code in enumerate(sorted(codes)):
        x, y = i % 10, i // 10
        ring = [[x, y], [x + 1, y], [x + 1, y + 1], [x, y + 1], [x, y]]
        feats.append({
            "type": "Feature",
            "properties": {id_property: code, "NAME_LATN": code},
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        })
    Path(path).write_text(json.dumps({"type": "FeatureCollection", "features": feats}) + "\n", encoding="utf-8")


class CorpusGenerator:
    """Random records with zone- and discipline-dependent OA propensity.

    ``p_missing_nuts1`` is the chance that an in-registry affiliation lacks
    its region; ``p_outside`` the chance an affiliation is outside the registry.
    """

    def __init__(
        self,
        scheme: SubjectScheme,
        registry: ZoneRegistry,
        seed: int = 0,
        years: tuple[int, int] = (2000, 2018),
        p_missing_nuts1: float = 0.01,
        p_outside: float = 0.15,
        p_no_address: float = 0.005,
    ):
        self.rng = random.Random(seed)
        self.scs = list(scheme.sc_to_discipline)
        self.registry = registry
        self.years = years
        self.p_missing = p_missing_nuts1
        self.p_outside = p_outside
        self.p_no_address = p_no_address
        self.countries = list(registry.countries)
        self.regions_of = {c: [] for c in self.countries}
        for r in registry.regions.values():
            self.regions_of[r.parent].append(r.code)
        rng = random.Random(seed + 1)
        self.sc_oa = {sc: rng.choice((0.0, 0.05, 0.1, 0.2, 0.3, 0.45)) for sc in self.scs}
        self.country_boost = {c: rng.uniform(0.6, 1.6) for c in self.countries}

    def record(self, i: int) -> dict:
        rng = self.rng
        year = rng.randint(*self.years)
        doc_type = rng.choices(("article", "letter", "review", "other"), (80, 5, 8, 7))[0]
        scs = rng.sample(self.scs, rng.choice((1, 1, 2, 2, 3, 4)))
        affs = []
        if rng.random() >= self.p_no_address:
            for _ in range(rng.choice((1, 1, 1, 2, 2, 3))):
                if rng.random() < self.p_outside:
                    affs.append({"country": rng.choice(OUTSIDE), "nuts1": None})
                    continue
                c = rng.choice(self.countries)
                regions = self.regions_of[c]
                nuts1 = rng.choice(regions) if regions and rng.random() >= self.p_missing else None
                affs.append({"country": c, "nuts1": nuts1})
        p = sum(self.sc_oa[s] for s in scs) / len(scs) * (1 + (year - self.years[0]) / 10)
        home = [a["country"] for a in affs if a["country"] in self.country_boost]
        if home:
            p *= self.country_boost[home[0]]
        oa = []
        if rng.random() < min(p, 0.95):
            oa = rng.sample(OA_TYPES, rng.choice((1, 1, 2)))
        return {
            "pub_id": f"P{i:08d}",
            "year": year,
            "doc_type": doc_type,
            "oa_types": oa,
            "subject_categories": scs,
            "affiliations": affs,
        }

    def write(self, n: int, dest: str | Path | IO[str]) -> None:
        if isinstance(dest, (str, Path)):
            with open(dest, "w", encoding="utf-8") as fh:
                self.write(n, fh)
            return
        dumps = json.dumps
        for i in range(n):
            dest.write(dumps(self.record(i), separators=(",", ":")))
            dest.write("\n")


def write_demo(directory: str | Path, n_records: int = 10000, seed: int = 0) -> Path:
    """Write a complete runnable demo (inputs plus config.json); returns the config path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    scheme, registry = make_scheme(), make_registry()
    write_scheme_csv(scheme, d / "scheme.csv")
    write_registry_csv(registry, d / "registry.csv")
    write_geometry(registry, "country", d / "geometry_country.geojson")
    write_geometry(registry, "nuts1", d / "geometry_nuts1.geojson")
    CorpusGenerator(scheme, registry, seed).write(n_records, d / "corpus.jsonl")
    config = {
        "corpus": ["corpus.jsonl"],
        "scheme": "scheme.csv",
        "registry": "registry.csv",
        "geometry": {"country": "geometry_country.geojson", "nuts1": "geometry_nuts1.geojson"},
        "output_dir": "out",
    }
    path = d / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path
