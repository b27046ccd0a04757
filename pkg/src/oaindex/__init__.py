"""Field-normalized open-access indicators over publication corpora."""

from oaindex.classification import (
    ClassScheme,
    classify,
    jenks_breaks,
    pooled_breaks,
    symmetric_scheme,
)
from oaindex.corpus import (
    Affiliation,
    IngestReport,
    PeriodSpec,
    PublicationRecord,
    SubjectScheme,
    ZoneRegistry,
    filter_corpus,
    is_open,
    parse_publications,
)
from oaindex.counting import (
    AggregateCell,
    AggregateTable,
    aggregate,
    discipline_fractions,
    merge,
    sc_fractions,
    zone_set,
)
from oaindex.errors import OAIndexError
from oaindex.indicators import (
    IndicatorResult,
    noai,
    oa_share,
    oa_share_by_discipline,
    oai_sc,
    specialization_index,
)

__version__ = "0.1.0"

__all__ = [
    "Affiliation",
    "AggregateCell",
    "AggregateTable",
    "ClassScheme",
    "IndicatorResult",
    "IngestReport",
    "OAIndexError",
    "PeriodSpec",
    "PublicationRecord",
    "SubjectScheme",
    "ZoneRegistry",
    "aggregate",
    "classify",
    "discipline_fractions",
    "filter_corpus",
    "is_open",
    "jenks_breaks",
    "merge",
    "noai",
    "oa_share",
    "oa_share_by_discipline",
    "oai_sc",
    "parse_publications",
    "pooled_breaks",
    "sc_fractions",
    "specialization_index",
    "symmetric_scheme",
    "zone_set",
]
