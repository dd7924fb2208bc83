"""Cross-house aggregation: medians, average ranks and location tests."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..metrics import median
from .significance import mann_whitney_u

SIGNIFICANCE_LEVEL = 0.05


def rank_methods(median_by_method: dict, tol: float = 1e-9) -> dict:
    """Ascending fractional ranks; values within `tol` share their average position."""
    if not median_by_method:
        raise ValueError("nothing to rank")
    items = sorted(median_by_method.items(), key=lambda kv: (kv[1], kv[0]))
    ranks = {}
    i = 0
    while i < len(items):
        j = i
        while j + 1 < len(items) and items[j + 1][1] - items[j][1] <= tol:
            j += 1
        avg = (i + 1 + j + 1) / 2
        for name, _ in items[i : j + 1]:
            ranks[name] = avg
        i = j + 1
    return {name: ranks[name] for name in median_by_method}


@dataclass(frozen=True)
class SignificanceResult:
    method: str
    pair: str
    group_a: tuple
    group_b: tuple
    U: float
    p: float

    @property
    def significant(self) -> bool:
        return self.p < SIGNIFICANCE_LEVEL


@dataclass
class EvaluationReport:
    house_results: list
    methods: tuple
    pairs: tuple
    medians: dict = field(default_factory=dict)  # pair -> method -> median
    ranks: dict = field(default_factory=dict)  # pair -> method -> rank
    final_rank: dict = field(default_factory=dict)
    significance: list = field(default_factory=list)
    location_groups: tuple = ()


def default_groups(location_map: dict, house_ids) -> tuple:
    """The two most populous locations (ties broken alphabetically)."""
    counts = Counter(location_map.get(h) for h in house_ids if location_map.get(h) is not None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(name for name, _ in ranked[:2])


def aggregate_report(house_results, location_map: dict | None = None, groups=None, methods=None, pairs=None) -> EvaluationReport:
    """Medians per (pair, method), ranks, final rank and group comparisons.

    `house_results` may mix several resolution/horizon pairs; each result's
    `pair` attribute keys the grouping.
    """
    results = list(house_results)
    if not results:
        raise ValueError("no house results to aggregate")
    methods = tuple(methods or results[0].methods)
    if pairs is None:
        pairs = tuple(dict.fromkeys(r.pair for r in results))
    location_map = location_map or {}
    report = EvaluationReport(results, methods, tuple(pairs))
    for pair in report.pairs:
        here = [r for r in results if r.pair == pair]
        if not here:
            continue
        report.medians[pair] = {m: median([r.mean_mase[m] for r in here]) for m in methods}
        report.ranks[pair] = rank_methods(report.medians[pair])
    ranked_pairs = [p for p in report.pairs if p in report.ranks]
    if ranked_pairs:
        mean_rank = {m: float(np.mean([report.ranks[p][m] for p in ranked_pairs])) for m in methods}
        report.final_rank = rank_methods(mean_rank)

    groups = tuple(groups) if groups else default_groups(location_map, {r.house_id for r in results})
    report.location_groups = groups
    if len(groups) == 2:
        for pair in ranked_pairs:
            here = [r for r in results if r.pair == pair]
            ga = [r for r in here if location_map.get(r.house_id) == groups[0]]
            gb = [r for r in here if location_map.get(r.house_id) == groups[1]]
            if not ga or not gb:
                continue
            for m in methods:
                U, p = mann_whitney_u([r.mean_mase[m] for r in ga], [r.mean_mase[m] for r in gb])
                report.significance.append(
                    SignificanceResult(m, pair, tuple(r.house_id for r in ga), tuple(r.house_id for r in gb), U, p)
                )
    return report
