"""Directed subscription (watch) graph generators.

Four families: ring lattice, uniform random, Watts-Strogatz rewiring, and
Barabasi-Albert preferential attachment.  Edges point from watcher to
watched.  Graphs are stored in compressed sparse form (one flat int32
target array plus per-node offsets) with each node's targets sorted, so a
graph of 10^5 nodes with hundreds of subscriptions each stays within a few
hundred megabytes and two watch sets intersect by merge.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .config import SimulationConfig, TopologyKind


@dataclass
class SubscriptionGraph:
    """CSR-style directed graph: node i watches targets[offsets[i]:offsets[i+1]]."""

    n: int
    offsets: np.ndarray  # int64, len n+1
    targets: np.ndarray  # int32, len total edges, sorted within each node

    @property
    def n_edges(self) -> int:
        return int(self.offsets[-1])

    def out_edges(self, node: int) -> np.ndarray:
        return self.targets[self.offsets[node]:self.offsets[node + 1]]

    def out_degree(self, node: int) -> int:
        return int(self.offsets[node + 1] - self.offsets[node])

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @cached_property
    def reverse(self) -> tuple[np.ndarray, np.ndarray]:
        """Watchers of each node, as (offsets, watchers) in CSR form.

        Computed on demand; nothing in the event loop needs it, so large
        runs never pay for the extra arrays.
        """
        counts = np.bincount(self.targets, minlength=self.n)
        rev_offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=rev_offsets[1:])
        order = np.argsort(self.targets, kind="stable")
        watchers = np.searchsorted(self.offsets[1:], order, side="right")
        return rev_offsets, watchers.astype(np.int32)

    def watchers_of(self, node: int) -> np.ndarray:
        rev_offsets, watchers = self.reverse
        return watchers[rev_offsets[node]:rev_offsets[node + 1]]

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.targets, minlength=self.n)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(node, int(target))
                for node in range(self.n)
                for target in self.out_edges(node)}

    def dump_edges(self, path: str | Path) -> None:
        """Debug dump, one ``src,dst`` pair per line."""
        with open(path, "w", encoding="utf-8") as fh:
            for node in range(self.n):
                for target in self.out_edges(node):
                    fh.write(f"{node},{int(target)}\n")


def _uniform_offsets(n: int, k: int) -> np.ndarray:
    return np.arange(n + 1, dtype=np.int64) * k


def _check_degree(n: int, k: int) -> None:
    if not 0 < k < n:
        raise ValueError(f"degree {k} must satisfy 0 < k < n ({n})")


def gen_regular(n: int, k: int, rng: np.random.Generator) -> SubscriptionGraph:
    """Ring lattice: node i watches (i+1 .. i+k) mod n."""
    _check_degree(n, k)
    rows = (np.arange(n, dtype=np.int32)[:, None] + np.arange(1, k + 1, dtype=np.int32)) % n
    rows = np.sort(rows, axis=1)
    return SubscriptionGraph(n=n, offsets=_uniform_offsets(n, k), targets=rows.ravel())


def _draw_distinct(rng: np.random.Generator, n: int, k: int, exclude: int) -> np.ndarray:
    """k distinct uniform draws from [0, n) minus {exclude}, in draw order."""
    picked = np.empty(0, dtype=np.int64)
    while picked.size < k:
        need = k - picked.size
        batch = rng.integers(0, n, size=need + max(8, need // 4))
        pool = np.concatenate([picked, batch[batch != exclude]])
        _, first_seen = np.unique(pool, return_index=True)
        picked = pool[np.sort(first_seen)][:k]
    return picked


def gen_random(n: int, k: int, rng: np.random.Generator) -> SubscriptionGraph:
    """Every node watches k distinct uniformly chosen other nodes."""
    _check_degree(n, k)
    targets = np.empty(n * k, dtype=np.int32)
    for i in range(n):
        row = _draw_distinct(rng, n, k, exclude=i)
        row.sort()
        targets[i * k:(i + 1) * k] = row
    return SubscriptionGraph(n=n, offsets=_uniform_offsets(n, k), targets=targets)


def gen_watts_strogatz(n: int, k: int, beta: float, rng: np.random.Generator) -> SubscriptionGraph:
    """Ring lattice with each edge independently rewired with probability beta.

    A rewired edge gets a fresh uniform target that is neither the node
    itself nor one of its current targets.
    """
    _check_degree(n, k)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rewire probability {beta} outside [0, 1]")
    targets = np.empty(n * k, dtype=np.int32)
    for i in range(n):
        row = [(i + j) % n for j in range(1, k + 1)]
        current = set(row)
        for slot in range(k):
            if rng.random() >= beta:
                continue
            current.discard(row[slot])
            while True:
                candidate = int(rng.integers(0, n))
                if candidate != i and candidate not in current:
                    break
            row[slot] = candidate
            current.add(candidate)
        row.sort()
        targets[i * k:(i + 1) * k] = row
    return SubscriptionGraph(n=n, offsets=_uniform_offsets(n, k), targets=targets)


def gen_barabasi_albert(n: int, m: int, rng: np.random.Generator) -> SubscriptionGraph:
    """Preferential attachment: complete seed clique of m+1 nodes, then each
    new node watches m existing ones with probability proportional to total
    (in + out) degree, tracked with the usual repeated-node array."""
    _check_degree(n, m)
    seed_count = m + 1
    targets = np.empty(n * m, dtype=np.int32)
    repeated = np.empty(2 * n * m, dtype=np.int32)
    fill = 0

    seed_ids = np.arange(seed_count, dtype=np.int32)
    for i in range(seed_count):
        targets[i * m:(i + 1) * m] = seed_ids[seed_ids != i]
        repeated[fill:fill + 2 * m] = i
        fill += 2 * m

    for node in range(seed_count, n):
        chosen = np.empty(0, dtype=np.int32)
        while chosen.size < m:
            need = m - chosen.size
            batch = repeated[rng.integers(0, fill, size=need + max(8, need // 2))]
            pool = np.concatenate([chosen, batch])
            _, first_seen = np.unique(pool, return_index=True)
            chosen = pool[np.sort(first_seen)][:m]
        repeated[fill:fill + m] = chosen
        repeated[fill + m:fill + 2 * m] = node
        fill += 2 * m
        chosen.sort()
        targets[node * m:(node + 1) * m] = chosen
    return SubscriptionGraph(n=n, offsets=_uniform_offsets(n, m), targets=targets)


def generate(config: SimulationConfig, rng: np.random.Generator) -> SubscriptionGraph:
    """Build the subscription graph a config asks for."""
    n, k = config.n_services, config.mean_degree
    kind = config.topology_kind
    if kind is TopologyKind.REGULAR:
        return gen_regular(n, k, rng)
    if kind is TopologyKind.RANDOM:
        return gen_random(n, k, rng)
    if kind is TopologyKind.WATTS_STROGATZ:
        return gen_watts_strogatz(n, k, config.ws_rewire_prob, rng)
    return gen_barabasi_albert(n, k, rng)
