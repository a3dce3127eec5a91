"""Network growth: newcomers wire ``m`` edges by fitness (EPA) or uniformly (CRA)."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientTargetsError, InvalidArgumentError, InvalidConfigError
from .game import FitnessTable
from .net import Network, Strategy


class ModelKind(str, enum.Enum):
    EPA = "epa"
    CRA = "cra"


@dataclass(frozen=True)
class GrowthModel:
    kind: ModelKind = ModelKind.CRA
    epsilon: float = 0.99
    m: int = 2
    nodes_per_generation: int = 10

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.m < 1:
            raise InvalidConfigError(f"m must be >= 1, got {self.m}")
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.nodes_per_generation < 0:
            raise InvalidConfigError("nodes_per_generation must be >= 0")


def epa_weights(fitnesses: Sequence[float] | np.ndarray, epsilon: float) -> np.ndarray:
    """Attachment probabilities proportional to ``1 - eps + eps * f``."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise InvalidArgumentError("epa_weights needs at least one fitness")
    if np.any(f < 0):
        raise InvalidArgumentError("fitness must be non-negative")
    raw = 1.0 - epsilon + epsilon * f
    return raw / raw.sum()


def _weighted_without_replacement(raw: np.ndarray, m: int,
                                  rng: np.random.Generator) -> list[int]:
    # sequential roulette draws; the winner's weight is zeroed so the rest
    # renormalise for the next draw
    w = raw.astype(float, copy=True)
    picked = []
    for _ in range(m):
        cum = np.cumsum(w)
        total = cum[-1]
        k = int(np.searchsorted(cum, rng.random() * total, side="right"))
        # guard against landing on a zeroed slot through rounding at the edge
        k = min(k, len(w) - 1)
        while w[k] == 0.0:
            k -= 1
        picked.append(k)
        w[k] = 0.0
    return picked


def select_targets_epa(net: Network, fit: FitnessTable | np.ndarray, m: int,
                       epsilon: float, rng: np.random.Generator) -> list[int]:
    """``m`` distinct nodes drawn by EPA weight without replacement.

    ``fit`` may be a fitness table (missing ids count as 0) or an array
    already aligned with ascending node ids.
    """
    ids = net.ids_array()
    if len(ids) < m:
        raise InsufficientTargetsError(f"need {m} targets, population is {len(ids)}")
    f = fit if isinstance(fit, np.ndarray) else fit.aligned(ids)
    raw = 1.0 - epsilon + epsilon * np.asarray(f, dtype=float)
    return [int(ids[k]) for k in _weighted_without_replacement(raw, m, rng)]


def select_targets_cra(net: Network, m: int, rng: np.random.Generator) -> list[int]:
    """Uniform random ``m``-subset of the current nodes."""
    ids = net.ids_array()
    if len(ids) < m:
        raise InsufficientTargetsError(f"need {m} targets, population is {len(ids)}")
    return [int(ids[k]) for k in rng.choice(len(ids), size=m, replace=False)]


def grow_step(net: Network, model: GrowthModel, fit: FitnessTable | None,
              max_size: int, rng: np.random.Generator) -> int:
    """Add up to ``nodes_per_generation`` newcomers without passing ``max_size``.

    Newcomers get a fair-coin strategy and are eligible targets for the
    ones added after them in the same call (with fitness 0 under EPA).
    """
    n_new = max(0, min(model.nodes_per_generation, max_size - net.population))
    if n_new == 0:
        return 0
    if model.kind is ModelKind.EPA:
        ids = net.ids_array()
        f = fit.aligned(ids) if fit is not None else np.zeros(len(ids))
        f = np.asarray(f, dtype=float)
    for _ in range(n_new):
        s = Strategy.COOPERATE if rng.random() < 0.5 else Strategy.DEFECT
        if model.kind is ModelKind.EPA:
            targets = select_targets_epa(net, f, model.m, model.epsilon, rng)
        else:
            targets = select_targets_cra(net, model.m, rng)
        node = net.add_node(s)
        for t in targets:
            net.add_edge(node, t)
        if model.kind is ModelKind.EPA:
            f = np.append(f, 0.0)
    return n_new
