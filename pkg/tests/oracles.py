"""Independent reference evaluators used as test oracles.

Nothing here imports the package's counting, indicator or classification
code. Corpora are plain dicts as they appear in JSONL input, and every
quantity is recomputed record by record with floats and ``math.fsum``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

WORLD = "WORLD"


def record_zones(rec: dict, level: str, countries, regions) -> set[str]:
    if level == "country":
        return {a["country"] for a in rec["affiliations"] if a["country"] in countries}
    return {a["nuts1"] for a in rec["affiliations"] if a.get("nuts1") in regions}


class NaiveEvaluator:
    """Per-record float tallies for one level and year range.

    ``n[zone][sc]`` and ``oa[zone][sc]`` are lists of the individual 1/k
    contributions, summed with fsum only when an indicator is requested.
    """

    def __init__(self, records, level, years, doc_types, sc_to_discipline, countries, regions):
        lo, hi = years
        self.sc_to_discipline = sc_to_discipline
        self.n: dict[str, dict[str, list[float]]] = {}
        self.oa: dict[str, dict[str, list[float]]] = {}
        for rec in records:
            if not (lo <= rec["year"] <= hi) or rec["doc_type"] not in doc_types:
                continue
            scs = sorted(set(rec["subject_categories"]))
            w = 1.0 / len(scs)
            is_oa = len(rec["oa_types"]) > 0
            targets = [WORLD] + sorted(record_zones(rec, level, countries, regions))
            for z in targets:
                for sc in scs:
                    self.n.setdefault(z, {}).setdefault(sc, []).append(w)
                    self.oa.setdefault(z, {}).setdefault(sc, []).append(w if is_oa else 0.0)

    def zones(self) -> list[str]:
        return sorted(z for z in self.n if z != WORLD)

    def _n(self, z, sc):
        return math.fsum(self.n.get(z, {}).get(sc, ()))

    def _oa(self, z, sc):
        return math.fsum(self.oa.get(z, {}).get(sc, ()))

    def oa_share(self, zone: str) -> float:
        n = math.fsum(w for ws in self.n[zone].values() for w in ws)
        o = math.fsum(w for ws in self.oa[zone].values() for w in ws)
        return o / n

    def noai(self, zone: str) -> float | None:
        num, den = [], []
        for sc in self.n[zone]:
            wn, wo = self._n(WORLD, sc), self._oa(WORLD, sc)
            if wo == 0:
                continue
            zn, zo = self._n(zone, sc), self._oa(zone, sc)
            oai = (zo / zn) / (wo / wn)
            num.append(oai * zn)
            den.append(zn)
        if not den:
            return None
        return math.fsum(num) / math.fsum(den)

    def discipline_totals(self, zone: str) -> dict[str, float]:
        out: dict[str, list[float]] = {}
        for sc, ws in self.n.get(zone, {}).items():
            out.setdefault(self.sc_to_discipline[sc], []).extend(ws)
        return {d: math.fsum(v) for d, v in out.items()}

    def specialization(self, zone: str, discipline: str) -> float | None:
        zt, wt = self.discipline_totals(zone), self.discipline_totals(WORLD)
        if wt.get(discipline, 0.0) == 0:
            return None
        z_share = zt.get(discipline, 0.0) / math.fsum(zt.values())
        w_share = wt[discipline] / math.fsum(wt.values())
        return z_share / w_share

    def world_discipline_shares(self) -> dict[str, float]:
        wt = self.discipline_totals(WORLD)
        total = math.fsum(wt.values())
        return {d: v / total for d, v in wt.items()}


def within_ss(group: list[Fraction]) -> Fraction:
    mean = sum(group, Fraction(0)) / len(group)
    return sum(((x - mean) ** 2 for x in group), Fraction(0))


def brute_force_jenks(values, k: int) -> tuple[Fraction, tuple[int, ...]]:
    """Minimum within-class sum of squares over every contiguous k-partition.

    ``values`` are expanded with multiplicity, sorted, and only cuts between
    distinct values are allowed. Returns the exact minimum and the
    lexicographically smallest break vector achieving it, with breaks given
    as start indices into the sorted distinct values.
    """
    distinct = sorted(set(values))
    groups = {v: [Fraction(x) for x in values if x == v] for v in distinct}
    m = len(distinct)
    cost_of: dict[tuple[int, int], Fraction] = {}

    def seg(a, b):
        key = (a, b)
        if key not in cost_of:
            cost_of[key] = within_ss([x for v in distinct[a:b] for x in groups[v]])
        return cost_of[key]

    best = None
    best_breaks = None
    for cuts in itertools.combinations(range(1, m), k - 1):
        edges = (0, *cuts, m)
        c = sum((seg(a, b) for a, b in zip(edges, edges[1:])), Fraction(0))
        if best is None or c < best:
            best, best_breaks = c, cuts
    return best, tuple(best_breaks)


def grid_jenks_table(points: tuple[int, ...], kmax: int) -> dict[int, tuple[int, tuple[int, ...]]]:
    """Exhaustive Jenks optimum for distinct integer points, for every k <= kmax.

    Costs are scaled by ``L = lcm(1..n)`` so they stay integers and the
    enumeration runs without fractions. Returns ``k -> (L * cost, breaks)``.
    """
    n = len(points)
    L = math.lcm(*range(1, n + 1))
    seg = {}
    for a in range(n):
        s = q = 0
        for b in range(a + 1, n + 1):
            x = points[b - 1]
            s += x
            q += x * x
            w = b - a
            seg[(a, b)] = (w * q - s * s) * (L // w)
    out = {}
    for k in range(1, min(kmax, n) + 1):
        best = None
        best_cuts = None
        for cuts in itertools.combinations(range(1, n), k - 1):
            edges = (0, *cuts, n)
            c = 0
            for a, b in zip(edges, edges[1:]):
                c += seg[(a, b)]
            if best is None or c < best:
                best, best_cuts = c, cuts
        out[k] = (best, best_cuts)
    return out
