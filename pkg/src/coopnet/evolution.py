"""Strategy imitation: compare with one random neighbour, copy if fitter."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError
from .game import FitnessTable, GameParams
from .net import Network, Snapshot

# Decisions are taken from a snapshot of the pre-update state and then
# applied together; recorded in run metadata.
UPDATE_MODE = "synchronous"


class UpdateDecision(NamedTuple):
    node: int
    adopt_from: int | None


def update_probability(f_i: float, f_j: float, k_i: int, k_j: int, b: float) -> float:
    """Chance that node i copies neighbour j.

    Zero unless j is strictly fitter; otherwise the fitness gap scaled by
    the largest gap reachable with these degrees, ``b * max(k_i, k_j)``.
    """
    if k_i < 1 or k_j < 1:
        raise InvalidArgumentError(f"degrees must be positive, got {k_i}, {k_j}")
    if b <= 0:
        raise InvalidArgumentError(f"b must be positive, got {b}")
    if f_i >= f_j:
        return 0.0
    return min(1.0, (f_j - f_i) / (b * max(k_i, k_j)))


def update_probabilities(f_i, f_j, k_i, k_j, b: float) -> np.ndarray:
    """Vectorised :func:`update_probability` (no argument checks)."""
    f_i = np.asarray(f_i, dtype=float)
    f_j = np.asarray(f_j, dtype=float)
    gap = np.maximum(f_j - f_i, 0.0)
    return np.minimum(gap / (b * np.maximum(k_i, k_j)), 1.0)


def decide_updates(snap: Snapshot, fitness: np.ndarray, b: float,
                   draws: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pick neighbours and accept/reject for every node of degree >= 1.

    ``draws`` has one row per such node (ascending id): column 0 chooses
    the neighbour, column 1 is the acceptance variate. Returns positions
    of adopting nodes and the positions they copy from.
    """
    active = np.flatnonzero(snap.degree > 0)
    deg = snap.degree[active]
    offset = np.minimum((draws[:, 0] * deg).astype(np.int64), deg - 1)
    chosen = snap.indices[snap.indptr[active] + offset]
    p = update_probabilities(fitness[active], fitness[chosen], deg,
                             snap.degree[chosen], b)
    adopt = draws[:, 1] < p
    return active[adopt], chosen[adopt]


def update_strategies(net: Network, fit: FitnessTable, params: GameParams,
                      rng: np.random.Generator) -> list[UpdateDecision]:
    """One synchronous imitation step; returns the strategy changes made.

    Random numbers are consumed in ascending node id, two per node with
    at least one neighbour (neighbour pick, then acceptance).
    """
    snap = net.snapshot()
    if len(snap.ids) == 0:
        return []
    fitness = fit.aligned(snap.ids)
    n_active = int(np.count_nonzero(snap.degree))
    draws = rng.random((n_active, 2))
    who, src = decide_updates(snap, fitness, params.b, draws)
    if len(who) == 0:
        return []
    coop = net.coop_array()
    # copying an identical strategy is a no-op and is not reported
    flips = coop[who] != coop[src]
    who, src = who[flips], src[flips]
    new = coop[src]
    ids = snap.ids
    out = []
    for w, s, strat in zip(ids[who].tolist(), ids[src].tolist(), new.tolist()):
        net.set_strategy(w, strat)
        out.append(UpdateDecision(w, s))
    return out
