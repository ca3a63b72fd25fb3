import numpy as np
import pytest

from dcsim import engine
from dcsim.config import ProtocolKind, SimulationConfig, TopologyKind
from dcsim.subscription import SubscriptionGraph


def flat_config(n: int, **overrides) -> SimulationConfig:
    """Single-blade config: every pair communicates at unit cost."""
    defaults = dict(
        services_per_blade=n,
        blades_per_chassis=1,
        chasses_per_rack=1,
        racks_per_aisle=1,
        aisles=1,
        topology_kind=TopologyKind.REGULAR,
        protocol_kind=ProtocolKind.DIRECT_POLLING,
        change_fraction=0.0,
        runtime=5.0,
        rng_seed=1,
        output_path="out.csv",
        mean_degree=max(1, min(n - 1, 4)),
    )
    defaults.update(overrides)
    return SimulationConfig(**defaults)


def graph_from_rows(rows: list[list[int]]) -> SubscriptionGraph:
    """Explicit adjacency (row i = ids watched by i), targets sorted per node."""
    n = len(rows)
    degrees = np.array([len(r) for r in rows], dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    targets = (np.concatenate([np.sort(np.asarray(r, dtype=np.int32)) for r in rows])
               if n and offsets[-1] else np.empty(0, dtype=np.int32))
    return SubscriptionGraph(n=n, offsets=offsets, targets=targets)


def make_world(config: SimulationConfig, rows: list[list[int]] | None = None) -> engine.World:
    graph = graph_from_rows(rows) if rows is not None else None
    return engine.initialize(config, graph=graph)


class ScriptedRng:
    """Stand-in generator whose integer draws follow a fixed script."""

    def __init__(self, picks: list[int]):
        self._picks = list(picks)

    def integers(self, *args, **kwargs) -> int:
        return self._picks.pop(0)


@pytest.fixture
def scripted_rng():
    return ScriptedRng
