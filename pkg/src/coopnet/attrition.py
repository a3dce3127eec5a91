"""Fitness-based pruning by repeated least-fit tournaments."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Collection, Mapping

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigError, PoolExhaustedError
from .net import Network


@dataclass(frozen=True)
class AttritionPolicy:
    x_percent: float = 2.5
    tournament_fraction: float = 0.01
    # drop every component except the largest, on top of isolated nodes
    remove_split_components: bool = False
    # never prune below this population; set by the harness to m + 1
    min_population: int = 0

    def __post_init__(self) -> None:
        if self.x_percent < 0 or self.x_percent > 100:
            raise InvalidConfigError(f"x_percent must lie in [0, 100], got {self.x_percent}")
        if not 0 < self.tournament_fraction <= 1:
            raise InvalidConfigError("tournament_fraction must lie in (0, 1]")

    @property
    def enabled(self) -> bool:
        return self.x_percent > 0

    def shortlist_size(self, population: int) -> int:
        return _round_half_up(self.x_percent / 100.0 * population)

    def tournament_size(self, population: int) -> int:
        return max(1, _round_half_up(self.tournament_fraction * population))


def _round_half_up(x: float) -> int:
    # nudge absorbs representation error, e.g. 2.5/100*1000 == 25.000000000000004
    return int(math.floor(x + 0.5 + 1e-9))


def tournament_least_fit(net: Network, fit: Mapping[int, float], tournament_size: int,
                         excluded: Collection[int], rng: np.random.Generator) -> int:
    """Draw ``tournament_size`` distinct eligible nodes; return the least fit.

    Ties on the minimum are broken uniformly. Ids absent from ``fit``
    score 0.
    """
    if tournament_size < 1:
        raise InvalidArgumentError("tournament_size must be >= 1")
    ids = net.ids_array()
    scores = _scores(fit, ids)
    pool = np.arange(len(ids))
    if excluded:
        pool = pool[~np.isin(ids, np.fromiter(excluded, dtype=np.int64, count=len(excluded)))]
    return int(ids[_tournament(pool, scores, tournament_size, rng)])


def _scores(fit: Mapping[int, float], ids: np.ndarray) -> np.ndarray:
    if hasattr(fit, "aligned"):
        return fit.aligned(ids)
    return np.array([fit.get(n, 0.0) for n in ids.tolist()], dtype=float)


def _tournament(pool: np.ndarray, scores: np.ndarray, size: int,
                rng: np.random.Generator) -> int:
    # pool holds positions into scores; returns the winning position
    if len(pool) < size:
        raise PoolExhaustedError(f"tournament of {size} from {len(pool)} eligible nodes")
    members = pool[rng.choice(len(pool), size=size, replace=False)]
    s = scores[members]
    lowest = np.flatnonzero(s == s.min())
    if len(lowest) == 1:
        return int(members[lowest[0]])
    return int(members[lowest[rng.integers(len(lowest))]])


def _isolated(net: Network, candidates) -> list[int]:
    return [n for n in candidates if n in net and not net.neighbors(n)]


def _non_largest_components(net: Network) -> list[int]:
    seen: set[int] = set()
    comps = []
    for start in net:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            for nb in net.neighbors(queue.popleft()):
                if nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    queue.append(nb)
        comps.append(comp)
    if len(comps) <= 1:
        return []
    # ties keep the component holding the oldest node
    keep = max(range(len(comps)), key=lambda i: (len(comps[i]), -min(comps[i])))
    return sorted(n for i, c in enumerate(comps) if i != keep for n in c)


def prune(net: Network, fit: Mapping[int, float], policy: AttritionPolicy,
          rng: np.random.Generator) -> set[int]:
    """Shortlist the least fit by tournament, delete them, then clear residue.

    Residue is every node left with no neighbours (and, if the policy asks,
    every component other than the largest). Deletion stops early rather
    than push the population under ``policy.min_population``.
    """
    removed: set[int] = set()
    if not policy.enabled or net.population == 0:
        return removed
    n = net.population
    target = min(policy.shortlist_size(n), n)
    tsize = policy.tournament_size(n)
    ids = net.ids_array()
    scores = _scores(fit, ids)
    eligible = np.ones(n, dtype=bool)
    shortlist: list[int] = []
    for _ in range(target):
        size = min(tsize, n - len(shortlist))
        pos = _tournament(np.flatnonzero(eligible), scores, size, rng)
        shortlist.append(int(ids[pos]))
        eligible[pos] = False

    def drop(node: int) -> bool:
        if net.population - 1 < policy.min_population:
            return False
        net.remove_node(node)
        removed.add(node)
        return True

    touched: set[int] = set()
    for node in shortlist:
        touched.update(net.neighbors(node))
        if not drop(node):
            return removed
    pending = sorted(touched - removed)
    while True:
        lonely = _isolated(net, pending)
        if policy.remove_split_components:
            lonely = sorted(set(lonely) | set(_non_largest_components(net)))
        if not lonely:
            break
        pending = []
        for node in lonely:
            pending.extend(net.neighbors(node))
            if not drop(node):
                return removed
    return removed
