"""World construction and the queue-driven event loop.

A run is deterministic in (config, seed): three independent random streams
are spawned from the seed (one for wiring the graph, one for the change
process, one for protocol draws), so the failure schedule of replicate k
is identical across topologies and protocols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import protocol, subscription
from .config import ChangeMode, SimulationConfig
from .eventqueue import CHANGE, END_OF_RUN, PROBE, Event, TwoTierQueue
from .stats import ProbeRecord
from .topology import BulkAccessRecorder, HierarchySpec, Level, LoadLedger


@dataclass
class World:
    """Everything one run owns; confined to a single thread."""

    config: SimulationConfig
    spec: HierarchySpec
    graph: subscription.SubscriptionGraph
    versions: np.ndarray      # int32, 0 = failed
    view: np.ndarray          # int32, parallel to graph.targets
    ever_failed: np.ndarray   # bool
    failed_at: np.ndarray     # float64, nan while alive
    ledger: LoadLedger
    recorder: BulkAccessRecorder
    queue: TwoTierQueue
    rng_changes: np.random.Generator
    rng_protocol: np.random.Generator
    clock: float = 0.0
    probe_count: int = 0
    last_probe_time: float = 0.0
    # uniform draws over never-failed services, O(1) removal
    _live_ids: list[int] = field(default_factory=list)
    _live_pos: list[int] = field(default_factory=list)

    def service_state(self, service_id: int) -> protocol.ServiceState:
        return protocol.snapshot(self, service_id)

    def n_never_failed(self) -> int:
        return len(self._live_ids)

    def draw_change_target(self) -> int | None:
        if not self._live_ids:
            return None
        index = int(self.rng_changes.integers(len(self._live_ids)))
        return self._live_ids[index]

    def retire(self, service_id: int) -> None:
        pos = self._live_pos[service_id]
        last = self._live_ids[-1]
        self._live_ids[pos] = last
        self._live_pos[last] = pos
        self._live_ids.pop()
        self._live_pos[service_id] = -1


def schedule_change_times(config: SimulationConfig, rng: np.random.Generator) -> list[float]:
    """Poisson arrival times with expected count change_fraction * n over the run."""
    if config.change_fraction == 0.0:
        return []
    rate = config.change_fraction * config.n_services / config.runtime
    times: list[float] = []
    t = rng.exponential(1.0 / rate)
    while t < config.runtime:
        times.append(t)
        t += rng.exponential(1.0 / rate)
    return times


def initialize(
    config: SimulationConfig,
    graph: subscription.SubscriptionGraph | None = None,
) -> World:
    """Build the world: hierarchy, graph, consistent views, seeded event queue.

    Passing a pre-built graph overrides the config's topology, for
    experiments with externally wired subscription networks.
    """
    if config.mean_degree <= 0 and graph is None:
        raise ValueError("config.mean_degree must be resolved before initialize")
    spec = HierarchySpec.from_config(config)
    n = spec.n_services

    seed_graph, seed_changes, seed_protocol = np.random.SeedSequence(config.rng_seed).spawn(3)
    if graph is None:
        graph = subscription.generate(config, np.random.default_rng(seed_graph))
    elif graph.n != n:
        raise ValueError(f"graph has {graph.n} nodes, config expects {n}")
    rng_changes = np.random.default_rng(seed_changes)
    rng_protocol = np.random.default_rng(seed_protocol)

    versions = np.ones(n, dtype=np.int32)
    view = versions[graph.targets]  # consistent start
    world = World(
        config=config,
        spec=spec,
        graph=graph,
        versions=versions,
        view=view,
        ever_failed=np.zeros(n, dtype=bool),
        failed_at=np.full(n, math.nan),
        ledger=LoadLedger(spec),
        recorder=BulkAccessRecorder(spec),
        queue=TwoTierQueue(),
        rng_changes=rng_changes,
        rng_protocol=rng_protocol,
        _live_ids=list(range(n)),
        _live_pos=list(range(n)),
    )

    # First poll of each service lands at a uniform offset inside one poll
    # interval; zero offsets are redrawn so no poll ever ties the run end.
    offsets = rng_protocol.random(n) * config.poll_interval
    while True:
        zero = offsets == 0.0
        if not zero.any():
            break
        offsets[zero] = rng_protocol.random(int(zero.sum())) * config.poll_interval
    for service_id in range(n):
        world.queue.insert(Event(float(offsets[service_id]), service_id + 1))
    for change_time in schedule_change_times(config, rng_changes):
        world.queue.insert(Event(change_time, CHANGE))
    world.queue.insert(Event(config.probe_interval, PROBE))
    world.queue.insert(Event(config.runtime, END_OF_RUN), last_among_ties=True)
    return world


def take_probe(world: World) -> ProbeRecord:
    """Measure consistency and the load accrued since the previous probe.

    Consistency counts partition the never-failed services; the unfiltered
    pair evaluates every service, failed ones on their frozen views.  Load
    is the interval total with a per-never-failed-service mean and the
    busiest single component at each hierarchy level.
    """
    flags = protocol.consistency_flags(world)
    never_failed = ~world.ever_failed
    n_never = int(never_failed.sum())
    n_consistent = int((flags & never_failed).sum())
    n_consistent_unfiltered = int(flags.sum())

    ledger = world.ledger
    total_load = ledger.interval_total()
    live_load = int(ledger.interval_services[never_failed].sum())
    mean_load = live_load / n_never if n_never else 0.0
    maxes = [int(ledger.interval[level].max()) for level in Level]
    ledger.fold_interval()

    record = ProbeRecord(
        time=world.clock,
        n_consistent=n_consistent,
        n_inconsistent=n_never - n_consistent,
        n_consistent_unfiltered=n_consistent_unfiltered,
        n_inconsistent_unfiltered=world.graph.n - n_consistent_unfiltered,
        total_load=total_load,
        mean_load_per_service=mean_load,
        max_load_blade=maxes[Level.BLADE],
        max_load_chassis=maxes[Level.CHASSIS],
        max_load_rack=maxes[Level.RACK],
        max_load_aisle=maxes[Level.AISLE],
        max_load_root=maxes[Level.ROOT],
    )
    world.last_probe_time = world.clock
    return record


def step(world: World) -> Event | None:
    """Pop and dispatch one event; None once the run has ended."""
    event = world.queue.pop_next()
    if event is None:
        return None
    world.clock = event.time
    code = event.code
    if code >= 1:
        # Polls at or past the end instant do nothing: the end event stops
        # the loop at this timestamp, so no load may land after the final probe.
        if world.clock < world.config.runtime:
            next_time = protocol.on_update_event(world, code - 1)
        else:
            next_time = world.clock + world.config.poll_interval
        world.queue.insert(Event(next_time, code))
    elif code == CHANGE:
        target = world.draw_change_target()
        if target is not None:
            protocol.apply_change(world, target, world.config.change_mode)
            if world.config.change_mode is ChangeMode.FAIL:
                world.retire(target)
    elif code == PROBE:
        world.probe_count += 1
        world.queue.insert(Event((world.probe_count + 1) * world.config.probe_interval, PROBE))
    return event


def run(
    world: World,
    sink: Callable[[ProbeRecord], None] | None = None,
) -> list[ProbeRecord]:
    """Drive the queue to the end event; returns the probe records in order.

    With a sink the records are streamed instead of collected, keeping
    memory flat over the run length.
    """
    records: list[ProbeRecord] = []
    emit = sink if sink is not None else records.append
    while True:
        event = step(world)
        if event is None:
            raise RuntimeError("event queue drained before the end-of-run event")
        if event.code == PROBE:
            emit(take_probe(world))
        elif event.code == END_OF_RUN:
            if world.clock > world.last_probe_time:
                # Partial final interval: flush it so the probe series
                # accounts for every access the ledger saw.
                emit(take_probe(world))
            break
    return records
