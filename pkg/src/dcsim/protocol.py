"""Service state and the two version-propagation protocols.

Service state lives in flat arrays owned by the world (versions, per-edge
views, failure flags); the functions here are the shared behavioural logic
over those arrays.  Version 0 encodes a failed service: it sends nothing,
learns nothing, and generates no load, but its update event keeps cycling
as a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ChangeMode, ProtocolKind
from .topology import communication_path


@dataclass(frozen=True)
class ServiceState:
    """Point-in-time snapshot of one service, for inspection and tests."""

    id: int
    current_version: int
    view: dict[int, int]  # watched id -> last-known version
    ever_failed: bool


def snapshot(world, service_id: int) -> ServiceState:
    graph = world.graph
    start, end = graph.offsets[service_id], graph.offsets[service_id + 1]
    view = {int(t): int(v) for t, v in zip(graph.targets[start:end], world.view[start:end])}
    return ServiceState(
        id=service_id,
        current_version=int(world.versions[service_id]),
        view=view,
        ever_failed=bool(world.ever_failed[service_id]),
    )


def is_consistent(world, service_id: int) -> bool:
    """True iff every view entry matches the watched service's actual version."""
    graph = world.graph
    start, end = graph.offsets[service_id], graph.offsets[service_id + 1]
    if start == end:
        return True
    return bool(np.array_equal(world.view[start:end],
                               world.versions[graph.targets[start:end]]))


def consistency_flags(world, chunk_edges: int = 2_000_000) -> np.ndarray:
    """Vectorised is_consistent over all services.

    Chunked by edge count so the temporaries stay small on large graphs.
    """
    graph = world.graph
    n = graph.n
    flags = np.ones(n, dtype=bool)
    offsets, targets, view = graph.offsets, graph.targets, world.view
    mean_degree = max(1, graph.n_edges // max(1, n))
    chunk_nodes = max(1, chunk_edges // mean_degree)
    for lo in range(0, n, chunk_nodes):
        hi = min(lo + chunk_nodes, n)
        e_lo, e_hi = int(offsets[lo]), int(offsets[hi])
        if e_lo == e_hi:
            continue
        mismatch = view[e_lo:e_hi] != world.versions[targets[e_lo:e_hi]]
        local = (offsets[lo:hi] - e_lo).astype(np.int64)
        # reduceat yields garbage for empty segments; fixed up below.
        any_bad = np.logical_or.reduceat(mismatch, np.minimum(local, e_hi - e_lo - 1))
        any_bad[offsets[lo:hi] == offsets[lo + 1:hi + 1]] = False
        flags[lo:hi] = ~any_bad
    return flags


def apply_change(world, service_id: int, mode: ChangeMode) -> None:
    """Fail the service (version 0) or increment its policy version."""
    if world.versions[service_id] == 0:
        return  # already failed; the engine draws only live targets
    if mode is ChangeMode.FAIL:
        world.versions[service_id] = 0
        world.ever_failed[service_id] = True
        world.failed_at[service_id] = world.clock
    else:
        world.versions[service_id] += 1


def _poll_all(world, service_id: int) -> None:
    graph = world.graph
    start, end = int(graph.offsets[service_id]), int(graph.offsets[service_id + 1])
    if start == end:
        return
    watched = graph.targets[start:end]
    world.view[start:end] = world.versions[watched]
    world.recorder.record(service_id, watched, world.ledger)


def _gossip_once(world, service_id: int) -> None:
    graph = world.graph
    start, end = int(graph.offsets[service_id]), int(graph.offsets[service_id + 1])
    degree = end - start
    if degree == 0:
        return
    slot = int(world.rng_protocol.integers(degree))
    peer = int(graph.targets[start + slot])

    path = communication_path(service_id, peer, world.spec)
    world.ledger.record(path, service_id)
    world.view[start + slot] = world.versions[peer]

    if world.versions[peer] == 0:
        return  # dead peers answer nothing; only their failure is observed
    p_start, p_end = int(graph.offsets[peer]), int(graph.offsets[peer + 1])
    if p_start == p_end:
        return
    # Shared subscriptions by merge on the sorted target slices.
    t_mine = graph.targets[start:end]
    t_peer = graph.targets[p_start:p_end]
    pos = np.searchsorted(t_peer, t_mine)
    pos[pos == t_peer.size] = 0  # out-of-range probes can never match
    match = t_peer[pos] == t_mine
    mine = np.nonzero(match)[0]
    if mine.size == 0:
        return
    theirs = pos[mine]
    # Version-dominance merge on the shared subscriptions: both parties keep
    # the higher number.  A relayed value may itself be stale, which is how
    # out-of-date aliveness information travels transitively.
    left = world.view[start + mine]
    right = world.view[p_start + theirs]
    high = np.maximum(left, right)
    world.view[start + mine] = high
    world.view[p_start + theirs] = high


def on_update_event(world, service_id: int) -> float:
    """Run one update for a service and return the next update time.

    DirectPolling refreshes every subscription with one message each;
    TransitiveP2P exchanges with a single random watched peer.  Failed
    services do nothing but still reschedule.
    """
    if world.versions[service_id] != 0:
        if world.config.protocol_kind is ProtocolKind.DIRECT_POLLING:
            _poll_all(world, service_id)
        else:
            _gossip_once(world, service_id)
    return world.clock + world.config.poll_interval
