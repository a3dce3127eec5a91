"""Weak prisoner's dilemma payoffs and per-generation fitness."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import InvalidConfigError, UndefinedMetricError
from .net import Network, Strategy


@dataclass(frozen=True)
class GameParams:
    """Temptation ``b``; payoffs are T=b, R=1, P=S=0."""

    b: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.b) or self.b < 1.0:
            raise InvalidConfigError(f"temptation b must be >= 1, got {self.b}")


def payoff(mine: Strategy, theirs: Strategy, params: GameParams) -> float:
    if theirs != Strategy.COOPERATE:
        return 0.0
    return 1.0 if mine == Strategy.COOPERATE else float(params.b)


class FitnessTable(Mapping[int, float]):
    """Fitness per node id, aligned with the snapshot it was computed from.

    Ids that were not scored (newcomers added after scoring) read as 0.
    """

    def __init__(self, ids: np.ndarray, values: np.ndarray) -> None:
        self.ids = ids
        self.values = values
        self._index: dict[int, int] | None = None

    def _lookup(self) -> dict[int, int]:
        if self._index is None:
            self._index = {int(n): i for i, n in enumerate(self.ids)}
        return self._index

    def __getitem__(self, node: int) -> float:
        return float(self.values[self._lookup()[node]])

    def get(self, node, default=0.0):
        i = self._lookup().get(node)
        return default if i is None else float(self.values[i])

    def __iter__(self) -> Iterator[int]:
        return (int(n) for n in self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def aligned(self, ids: np.ndarray) -> np.ndarray:
        """Fitness for ``ids`` in order, 0 for ids absent from the table."""
        ids = np.asarray(ids, dtype=np.int64)
        if len(ids) == len(self.ids) and np.array_equal(ids, self.ids):
            return self.values
        # both id arrays are ascending in practice, but do not rely on it
        order = np.argsort(self.ids, kind="stable")
        sorted_ids = self.ids[order]
        at = np.searchsorted(sorted_ids, ids)
        at = np.minimum(at, max(len(sorted_ids) - 1, 0))
        found = (sorted_ids[at] == ids) if len(sorted_ids) else np.zeros(len(ids), bool)
        out = np.zeros(len(ids), dtype=float)
        out[found] = self.values[order[at[found]]]
        return out


def score_all(net: Network, params: GameParams) -> FitnessTable:
    """Sum of payoffs against every neighbour, for every node."""
    snap = net.snapshot()
    coop = net.coop_array()
    n = len(snap.ids)
    if n == 0:
        return FitnessTable(snap.ids, np.zeros(0))
    # cooperating neighbours per node; payoff is 1 or b per such neighbour
    owner = np.repeat(np.arange(n), snap.degree)
    n_coop = np.bincount(owner, weights=coop[snap.indices], minlength=n)
    values = np.where(coop == 1, n_coop, params.b * n_coop)
    return FitnessTable(snap.ids, values)


def fraction_cooperators(net: Network) -> float:
    if net.population == 0:
        raise UndefinedMetricError("cooperator fraction of an empty network")
    return float(net.coop_array().sum()) / net.population
