"""Undirected simple graph with agents at the nodes.

Node ids are issued from a monotone counter and never recycled, so the
insertion order of the internal dicts is also ascending id order.
"""
from __future__ import annotations

import enum
from collections import Counter
from itertools import chain
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import GraphError, InvalidConfigError


class Strategy(enum.IntEnum):
    DEFECT = 0
    COOPERATE = 1

    @classmethod
    def parse(cls, text: str | "Strategy") -> "Strategy":
        if isinstance(text, Strategy):
            return text
        key = str(text).strip().lower()
        if key in ("c", "coop", "cooperate", "cooperator", "1"):
            return cls.COOPERATE
        if key in ("d", "defect", "defector", "0"):
            return cls.DEFECT
        raise InvalidConfigError(f"unknown strategy {text!r}")

    @property
    def letter(self) -> str:
        return "C" if self is Strategy.COOPERATE else "D"


C = Strategy.COOPERATE
D = Strategy.DEFECT


@dataclass(frozen=True)
class Snapshot:
    """Array view of a network at one structural version.

    ``indices`` holds neighbour *positions* (into ``ids``), CSR style.
    """

    ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    degree: np.ndarray

    def position(self) -> dict[int, int]:
        return {int(n): i for i, n in enumerate(self.ids)}


class Network:
    def __init__(self) -> None:
        self._adj: dict[int, set[int]] = {}
        # plain 0/1 ints; Strategy values are built on read
        self._strategy: dict[int, int] = {}
        self._next_id = 0
        self._n_edges = 0
        self._version = 0
        self._snapshot: Snapshot | None = None
        self._snapshot_version = -1
        self._members = 0
        self._ids: np.ndarray | None = None
        self._ids_version = -1

    # -- queries ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def __iter__(self) -> Iterator[int]:
        return iter(self._adj)

    @property
    def population(self) -> int:
        return len(self._adj)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def next_id(self) -> int:
        return self._next_id

    def nodes(self) -> list[int]:
        return list(self._adj)

    def neighbors(self, node: int) -> set[int]:
        self._require(node)
        return self._adj[node]

    def degree(self, node: int) -> int:
        self._require(node)
        return len(self._adj[node])

    def has_edge(self, a: int, b: int) -> bool:
        return a in self._adj and b in self._adj[a]

    def strategy(self, node: int) -> Strategy:
        self._require(node)
        return Strategy(self._strategy[node])

    def strategies(self) -> dict[int, Strategy]:
        return {n: Strategy(s) for n, s in self._strategy.items()}

    def set_strategy(self, node: int, s: Strategy) -> None:
        self._require(node)
        self._strategy[node] = int(Strategy(s))

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (low, high) pairs in ascending order."""
        out = [(a, b) for a, nbrs in self._adj.items() for b in nbrs if a < b]
        out.sort()
        return out

    def mean_degree(self) -> float:
        if not self._adj:
            return 0.0
        return 2.0 * self._n_edges / len(self._adj)

    def ids_array(self) -> np.ndarray:
        """Node ids, ascending. Cached until a node is added or removed."""
        if self._ids is None or self._ids_version != self._members:
            self._ids = np.fromiter(self._adj.keys(), dtype=np.int64, count=len(self._adj))
            self._ids_version = self._members
        return self._ids

    def coop_array(self, ids: Iterable[int] | None = None) -> np.ndarray:
        """1 for cooperators, 0 for defectors, in ascending id order."""
        if ids is None:
            return np.fromiter(self._strategy.values(), dtype=np.int8,
                               count=len(self._strategy))
        return np.array([self._strategy[int(i)] for i in ids], dtype=np.int8)

    def snapshot(self) -> Snapshot:
        if self._snapshot is not None and self._snapshot_version == self._version:
            return self._snapshot
        ids = self.ids_array()
        degree = np.fromiter(map(len, self._adj.values()), dtype=np.int64,
                             count=len(self._adj))
        indptr = np.zeros(len(ids) + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        flat = np.fromiter(chain.from_iterable(self._adj.values()), dtype=np.int64,
                           count=int(indptr[-1]))
        lookup = np.empty(self._next_id, dtype=np.int64)
        lookup[ids] = np.arange(len(ids))
        # neighbour positions, sorted within each node's row
        n = max(len(ids), 1)
        key = np.repeat(np.arange(len(ids)), degree) * n + lookup[flat]
        key.sort()
        indices = key % n
        self._snapshot = Snapshot(ids, indptr, indices, degree)
        self._snapshot_version = self._version
        return self._snapshot

    # -- mutation --------------------------------------------------------
    def add_node(self, s: Strategy) -> int:
        node = self._next_id
        self._next_id += 1
        self._adj[node] = set()
        self._strategy[node] = int(Strategy(s))
        fresh = self._ids is not None and self._ids_version == self._members
        self._version += 1
        self._members += 1
        if fresh:
            self._ids = np.append(self._ids, node)
            self._ids_version = self._members
        return node

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise GraphError(f"self-edge on node {a}")
        self._require(a)
        self._require(b)
        if b in self._adj[a]:
            raise GraphError(f"duplicate edge ({a}, {b})")
        self._adj[a].add(b)
        self._adj[b].add(a)
        self._n_edges += 1
        self._version += 1

    def remove_node(self, node: int) -> None:
        self._require(node)
        for other in self._adj.pop(node):
            self._adj[other].discard(node)
            self._n_edges -= 1
        del self._strategy[node]
        self._version += 1
        self._members += 1

    def copy(self) -> "Network":
        new = Network()
        new._adj = {n: set(v) for n, v in self._adj.items()}
        new._strategy = dict(self._strategy)
        new._next_id = self._next_id
        new._n_edges = self._n_edges
        return new

    def _require(self, node: int) -> None:
        if node not in self._adj:
            raise GraphError(f"unknown node {node}")


def new_founder_network(n0: int, founder_strategy: Strategy) -> Network:
    """Complete graph on ``n0`` agents sharing one strategy."""
    if n0 < 2:
        raise InvalidConfigError(f"founder size must be >= 2, got {n0}")
    net = Network()
    ids = [net.add_node(founder_strategy) for _ in range(n0)]
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            net.add_edge(a, b)
    return net


def degree_distribution(net: Network) -> dict[int, int]:
    """Histogram degree -> node count, sorted by degree."""
    counts = Counter(len(net.neighbors(n)) for n in net)
    return dict(sorted(counts.items()))


def degree_range(net: Network) -> tuple[int, int] | None:
    hist = degree_distribution(net)
    if not hist:
        return None
    return min(hist), max(hist)
