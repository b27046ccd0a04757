"""Run configuration: JSON schema, defaults and validation.

A config file is a JSON object; every key is optional except the input
paths and ``output_dir``::

    {
      "corpus": ["pubs.jsonl"],
      "scheme": "subject_scheme.csv",
      "registry": "zones.csv",
      "output_dir": "out",
      "periods": ["2000-2003", {"name": "late", "year_min": 2015, "year_max": 2018}],
      "doc_types": ["article", "letter", "review"],
      "levels": ["country", "nuts1"],
      "indicators": ["oa_share", "noai", "specialization", "discipline_share"],
      "jenks_classes": 9,
      "noai_classes": 7,
      "symmetric_bounds": [0.5, 0.75, 0.9, 1.1, 1.5, 2.0],
      "geometry": {"country": "nuts0.geojson", "nuts1": "nuts1.geojson"},
      "geometry_id_property": "NUTS_ID",
      "geographic_counting": "whole",
      "min_support": 0,
      "workers": null
    }

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from oaindex.classification import DEFAULT_JENKS_CLASSES, DEFAULT_SYMMETRIC_BOUNDS, symmetric_scheme
from oaindex.corpus import DEFAULT_DOC_TYPES, DEFAULT_PERIODS, DOC_TYPES, PeriodSpec
from oaindex.counting import COUNTING_MODES, LEVELS
from oaindex.errors import ClassificationError, ConfigError
from oaindex.export import DEFAULT_ID_PROPERTY
from oaindex.indicators import INDICATORS

CONFIG_ENV = "OAINDEX_CONFIG"


def _default_periods():
    return [{"name": p.name, "year_min": p.year_min, "year_max": p.year_max} for p in DEFAULT_PERIODS]


@dataclass
class RunConfig:
    corpus: list = field(default_factory=list)
    scheme: str = ""
    registry: str = ""
    output_dir: str = ""
    periods: list = field(default_factory=_default_periods)
    doc_types: list = field(default_factory=lambda: sorted(DEFAULT_DOC_TYPES))
    levels: list = field(default_factory=lambda: list(LEVELS))
    indicators: list = field(default_factory=lambda: list(INDICATORS))
    jenks_classes: int = DEFAULT_JENKS_CLASSES
    noai_classes: int = len(DEFAULT_SYMMETRIC_BOUNDS) + 1
    symmetric_bounds: list = field(default_factory=lambda: list(DEFAULT_SYMMETRIC_BOUNDS))
    geometry: dict = field(default_factory=dict)
    geometry_id_property: str = DEFAULT_ID_PROPERTY
    geographic_counting: str = "whole"
    min_support: float = 0.0
    workers: int | None = None
    unknown_keys: list = field(default_factory=list, repr=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> RunConfig:
        names = {f.name for f in fields(cls)} - {"unknown_keys"}
        cfg = cls(**{k: v for k, v in data.items() if k in names})
        cfg.unknown_keys = sorted(k for k in data if k not in names)
        if isinstance(cfg.corpus, str):
            cfg.corpus = [cfg.corpus]
        if base_dir is not None:
            cfg.resolve_paths(Path(base_dir))
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError([f"cannot read config {str(path)!r}: {exc}"]) from exc
        if not isinstance(data, dict):
            raise ConfigError([f"config {str(path)!r} must be a JSON object"])
        return cls.from_dict(data, base_dir=path.parent)

    def resolve_paths(self, base: Path) -> None:
        def fix(p):
            return str(base / p) if isinstance(p, str) and p and not os.path.isabs(p) else p

        if isinstance(self.corpus, list):
            self.corpus = [fix(p) for p in self.corpus]
        self.scheme = fix(self.scheme)
        self.registry = fix(self.registry)
        self.output_dir = fix(self.output_dir)
        if isinstance(self.geometry, dict):
            self.geometry = {k: fix(v) for k, v in self.geometry.items()}

    def period_specs(self) -> list[PeriodSpec]:
        """Periods as :class:`PeriodSpec`; raises ValueError on malformed entries."""
        out = []
        for p in self.periods:
            if isinstance(p, str):
                out.append(PeriodSpec.parse(p))
            elif isinstance(p, dict):
                out.append(PeriodSpec(str(p["name"]), int(p["year_min"]), int(p["year_max"])))
            else:
                raise ValueError(f"cannot interpret period {p!r}")
        return out

    def effective_workers(self) -> int:
        return self.workers or os.cpu_count() or 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("unknown_keys")
        return d


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(config: RunConfig, check_files: bool = True) -> list[str]:
    """Every problem that would stop :func:`oaindex.pipeline.run`; empty means runnable."""
    diags: list[str] = []
    for key in config.unknown_keys:
        diags.append(f"unknown config key: {key!r}")

    corpus = config.corpus
    if not isinstance(corpus, list) or not corpus:
        diags.append("corpus: at least one corpus path is required")
    else:
        for p in corpus:
            if not isinstance(p, str) or not p:
                diags.append(f"corpus: invalid path {p!r}")
            elif check_files and not Path(p).is_file():
                diags.append(f"corpus: file not found: {p}")
    for name in ("scheme", "registry"):
        p = getattr(config, name)
        if not isinstance(p, str) or not p:
            diags.append(f"{name}: path is required")
        elif check_files and not Path(p).is_file():
            diags.append(f"{name}: file not found: {p}")
    if not isinstance(config.output_dir, str) or not config.output_dir:
        diags.append("output_dir: path is required")

    try:
        periods = config.period_specs()
    except (ValueError, KeyError, TypeError) as exc:
        diags.append(f"periods: {exc}")
    else:
        if not periods:
            diags.append("periods: at least one period is required")
        names = [p.name for p in periods]
        for dup in sorted({n for n in names if names.count(n) > 1}):
            diags.append(f"periods: duplicate period name {dup!r}")
        for i, a in enumerate(periods):
            for b in periods[i + 1:]:
                if a.overlaps(b):
                    diags.append(f"periods: {a.name!r} and {b.name!r} overlap")

    if not isinstance(config.doc_types, list) or not config.doc_types:
        diags.append("doc_types: at least one document type is required")
    else:
        for d in config.doc_types:
            if d not in DOC_TYPES:
                diags.append(f"doc_types: unknown document type {d!r}")

    if not isinstance(config.levels, list) or not config.levels:
        diags.append("levels: at least one level is required")
    else:
        for lv in config.levels:
            if lv not in LEVELS:
                diags.append(f"levels: unknown level {lv!r}")

    if not isinstance(config.indicators, list) or not config.indicators:
        diags.append("indicators: at least one indicator is required")
    else:
        for ind in config.indicators:
            if ind not in INDICATORS:
                diags.append(f"indicators: unknown indicator {ind!r}")

    if not _is_int(config.jenks_classes) or config.jenks_classes < 1:
        diags.append(f"jenks_classes: must be an integer >= 1, got {config.jenks_classes!r}")
    if not _is_int(config.noai_classes) or config.noai_classes < 1:
        diags.append(f"noai_classes: must be an integer >= 1, got {config.noai_classes!r}")
    bounds = config.symmetric_bounds
    if not isinstance(bounds, list) or not all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds):
        diags.append("symmetric_bounds: must be a list of numbers")
    else:
        try:
            symmetric_scheme(bounds)
        except ClassificationError as exc:
            diags.append(f"symmetric_bounds: {exc}")
        if _is_int(config.noai_classes) and config.noai_classes >= 1 and len(bounds) + 1 != config.noai_classes:
            diags.append(
                f"noai_classes: {config.noai_classes} classes need {config.noai_classes - 1} "
                f"symmetric bounds, got {len(bounds)}"
            )

    if not isinstance(config.geometry, dict):
        diags.append("geometry: must map level names to GeoJSON paths")
    else:
        for lv, p in config.geometry.items():
            if lv not in LEVELS:
                diags.append(f"geometry: unknown level {lv!r}")
            elif not isinstance(p, str) or not p:
                diags.append(f"geometry: invalid path for {lv!r}")
            elif check_files and not Path(p).is_file():
                diags.append(f"geometry: file not found: {p}")
    if not isinstance(config.geometry_id_property, str) or not config.geometry_id_property:
        diags.append("geometry_id_property: must be a non-empty string")

    if config.geographic_counting not in COUNTING_MODES:
        diags.append(f"geographic_counting: must be one of {list(COUNTING_MODES)}")
    if not isinstance(config.min_support, (int, float)) or isinstance(config.min_support, bool) or config.min_support < 0:
        diags.append("min_support: must be a non-negative number")
    if config.workers is not None and (not _is_int(config.workers) or config.workers < 1):
        diags.append("workers: must be a positive integer or null")
    return diags
