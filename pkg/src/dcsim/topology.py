"""Physical data-centre hierarchy: addressing, tree paths, and load accounting.

The five containment levels are aisle > rack > chassis > blade > service.
No per-component objects exist; each level is a flat count array indexed
by global component index, and services are identified by integer id in
tree order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .config import SimulationConfig


class Level(IntEnum):
    BLADE = 0
    CHASSIS = 1
    RACK = 2
    AISLE = 3
    ROOT = 4


@dataclass(frozen=True)
class HierarchySpec:
    """Counts per containment level plus derived per-level totals."""

    services_per_blade: int
    blades_per_chassis: int
    chasses_per_rack: int
    racks_per_aisle: int
    aisles: int

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "HierarchySpec":
        return cls(
            config.services_per_blade,
            config.blades_per_chassis,
            config.chasses_per_rack,
            config.racks_per_aisle,
            config.aisles,
        )

    @property
    def n_blades(self) -> int:
        return self.blades_per_chassis * self.chasses_per_rack * self.racks_per_aisle * self.aisles

    @property
    def n_chasses(self) -> int:
        return self.chasses_per_rack * self.racks_per_aisle * self.aisles

    @property
    def n_racks(self) -> int:
        return self.racks_per_aisle * self.aisles

    @property
    def n_aisles(self) -> int:
        return self.aisles

    @property
    def n_services(self) -> int:
        return self.services_per_blade * self.n_blades

    def level_sizes(self) -> tuple[int, int, int, int, int]:
        return (self.n_blades, self.n_chasses, self.n_racks, self.n_aisles, 1)


@dataclass(frozen=True)
class ServiceAddress:
    """Zero-based position of a service in the containment tree."""

    aisle: int
    rack: int
    chassis: int
    blade: int
    slot: int


def address_of(service_id: int, spec: HierarchySpec) -> ServiceAddress:
    """Mixed-radix decode of a service id into its tree position."""
    if not 0 <= service_id < spec.n_services:
        raise ValueError(f"service id {service_id} outside [0, {spec.n_services})")
    slot = service_id % spec.services_per_blade
    rest = service_id // spec.services_per_blade
    blade = rest % spec.blades_per_chassis
    rest //= spec.blades_per_chassis
    chassis = rest % spec.chasses_per_rack
    rest //= spec.chasses_per_rack
    rack = rest % spec.racks_per_aisle
    aisle = rest // spec.racks_per_aisle
    return ServiceAddress(aisle=aisle, rack=rack, chassis=chassis, blade=blade, slot=slot)


def service_id_of(address: ServiceAddress, spec: HierarchySpec) -> int:
    """Inverse of address_of."""
    rest = ((address.aisle * spec.racks_per_aisle + address.rack) * spec.chasses_per_rack
            + address.chassis)
    return (rest * spec.blades_per_chassis + address.blade) * spec.services_per_blade + address.slot


def component_indices(spec: HierarchySpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Global (blade, chassis, rack, aisle) component index per service id."""
    ids = np.arange(spec.n_services, dtype=np.int64)
    blades = ids // spec.services_per_blade
    chasses = blades // spec.blades_per_chassis
    racks = chasses // spec.chasses_per_rack
    aisles = racks // spec.racks_per_aisle
    return (blades.astype(np.int32), chasses.astype(np.int32),
            racks.astype(np.int32), aisles.astype(np.int32))


def _global_components(service_id: int, spec: HierarchySpec) -> tuple[int, int, int, int]:
    blade = service_id // spec.services_per_blade
    chassis = blade // spec.blades_per_chassis
    rack = chassis // spec.chasses_per_rack
    aisle = rack // spec.racks_per_aisle
    return blade, chassis, rack, aisle


def communication_path(src: int, dst: int, spec: HierarchySpec) -> list[tuple[Level, int]]:
    """Unique tree path between two services, endpoints excluded.

    Runs up from the source blade to the lowest common ancestor component
    and back down to the destination blade; two services on the same blade
    share just that blade.
    """
    if src == dst:
        raise ValueError("no path between a service and itself")
    s = _global_components(src, spec)
    d = _global_components(dst, spec)
    if s[Level.BLADE] == d[Level.BLADE]:
        return [(Level.BLADE, s[Level.BLADE])]
    up: list[tuple[Level, int]] = []
    down: list[tuple[Level, int]] = []
    for level in (Level.BLADE, Level.CHASSIS, Level.RACK, Level.AISLE):
        if s[level] == d[level]:
            return up + [(level, s[level])] + down
        up.append((level, s[level]))
        down.insert(0, (level, d[level]))
    return up + [(Level.ROOT, 0)] + down


def hop_cost(path: list[tuple[Level, int]]) -> int:
    """One unit per traversed component."""
    return len(path)


@dataclass
class LoadLedger:
    """Access counts per component, cumulative plus the current probe interval.

    ``record`` feeds the interval arrays; ``fold_interval`` rolls them into
    the cumulative arrays, so cumulative counts only ever grow.  A parallel
    per-service array attributes each message's full hop cost to its sender.
    """

    spec: HierarchySpec
    interval: list[np.ndarray] = field(init=False)
    cumulative: list[np.ndarray] = field(init=False)
    interval_services: np.ndarray = field(init=False)
    cumulative_services: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        sizes = self.spec.level_sizes()
        self.interval = [np.zeros(size, dtype=np.int64) for size in sizes]
        self.cumulative = [np.zeros(size, dtype=np.int64) for size in sizes]
        self.interval_services = np.zeros(self.spec.n_services, dtype=np.int64)
        self.cumulative_services = np.zeros(self.spec.n_services, dtype=np.int64)

    def record(self, path: list[tuple[Level, int]], sender: int) -> None:
        """Count one message: +1 on every path component, full cost to the sender."""
        for level, index in path:
            self.interval[level][index] += 1
        self.interval_services[sender] += len(path)

    def fold_interval(self) -> None:
        for level in Level:
            self.cumulative[level] += self.interval[level]
            self.interval[level][:] = 0
        self.cumulative_services += self.interval_services
        self.interval_services[:] = 0

    def interval_total(self) -> int:
        return int(sum(int(arr.sum()) for arr in self.interval))

    def grand_total(self) -> int:
        """All accesses ever recorded, folded or not."""
        folded = sum(int(arr.sum()) for arr in self.cumulative)
        return int(folded) + self.interval_total()

    def service_totals(self) -> np.ndarray:
        return self.cumulative_services + self.interval_services


class BulkAccessRecorder:
    """Vectorised load recording for one sender fanning out to many targets.

    Equivalent to calling ``ledger.record(communication_path(src, dst), src)``
    per target, but works on numpy index arrays so a poll event touching
    hundreds of subscriptions stays cheap.
    """

    def __init__(self, spec: HierarchySpec) -> None:
        self.spec = spec
        self.blade_of, self.chassis_of, self.rack_of, self.aisle_of = component_indices(spec)

    def record(self, src: int, dsts: np.ndarray, ledger: LoadLedger) -> None:
        if dsts.size == 0:
            return
        levels = (self.blade_of, self.chassis_of, self.rack_of, self.aisle_of)
        src_comp = [arr[src] for arr in levels]
        dst_comp = [arr[dsts] for arr in levels]

        # remaining: targets whose LCA sits above the level under scan.
        remaining = np.ones(dsts.shape, dtype=bool)
        total_cost = 0
        for level in (Level.BLADE, Level.CHASSIS, Level.RACK, Level.AISLE):
            same = remaining & (dst_comp[level] == src_comp[level])
            n_same = int(same.sum())
            if n_same:
                # LCA at this level: one shared component tops the path.
                ledger.interval[level][src_comp[level]] += n_same
                total_cost += n_same * (2 * level + 1)
            remaining &= ~same
            n_above = int(remaining.sum())
            if n_above:
                # Paths continuing upward traverse this level on both sides.
                ledger.interval[level][src_comp[level]] += n_above
                np.add.at(ledger.interval[level], dst_comp[level][remaining], 1)
            if not n_above:
                break
        n_root = int(remaining.sum())
        if n_root:
            ledger.interval[Level.ROOT][0] += n_root
            total_cost += n_root * 9
        ledger.interval_services[src] += total_cost
