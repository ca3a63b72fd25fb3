"""Run configuration: properties-file parsing, rendering, and sweep generation.

Configurations travel as plain ``key=value`` properties files (one pair per
line, ``#`` comments) so that whole parameter sweeps are just directories
of small text files, no database involved.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum


class TopologyKind(str, Enum):
    REGULAR = "Regular"
    RANDOM = "Random"
    WATTS_STROGATZ = "WattsStrogatz"
    BARABASI_ALBERT = "BarabasiAlbert"


class ProtocolKind(str, Enum):
    DIRECT_POLLING = "DirectPolling"
    TRANSITIVE_P2P = "TransitiveP2P"


class ChangeMode(str, Enum):
    FAIL = "Fail"
    INCREMENT = "Increment"


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class SimulationConfig:
    services_per_blade: int
    blades_per_chassis: int
    chasses_per_rack: int
    racks_per_aisle: int
    aisles: int
    topology_kind: TopologyKind
    protocol_kind: ProtocolKind
    change_fraction: float
    runtime: float
    rng_seed: int
    output_path: str
    mean_degree: int = 0  # 0 means "default to floor(sqrt(n))", resolved at parse
    ws_rewire_prob: float = 0.1
    poll_interval: float = 1.0
    change_mode: ChangeMode = ChangeMode.FAIL
    probe_interval: float = 1.0
    # Keys the source document set explicitly; everything else re-derives
    # its default when the config seeds a sweep.
    explicit_keys: frozenset[str] = field(default=frozenset(), compare=False, repr=False)

    @property
    def n_services(self) -> int:
        return (self.services_per_blade * self.blades_per_chassis
                * self.chasses_per_rack * self.racks_per_aisle * self.aisles)


# properties-file key -> config field
_KEY_TO_FIELD = {
    "servicesPerBlade": "services_per_blade",
    "bladesPerChassis": "blades_per_chassis",
    "chassesPerRack": "chasses_per_rack",
    "racksPerAisle": "racks_per_aisle",
    "aisles": "aisles",
    "topologyKind": "topology_kind",
    "meanDegree": "mean_degree",
    "wsRewireProb": "ws_rewire_prob",
    "protocolKind": "protocol_kind",
    "pollInterval": "poll_interval",
    "changeFraction": "change_fraction",
    "changeMode": "change_mode",
    "runtime": "runtime",
    "probeInterval": "probe_interval",
    "rngSeed": "rng_seed",
    "outputPath": "output_path",
}
_FIELD_TO_KEY = {f: k for k, f in _KEY_TO_FIELD.items()}

_REQUIRED_KEYS = (
    "servicesPerBlade", "bladesPerChassis", "chassesPerRack", "racksPerAisle",
    "aisles", "topologyKind", "protocolKind", "changeFraction", "runtime",
    "rngSeed", "outputPath",
)

# render/parse order for properties files
_KEY_ORDER = (
    "servicesPerBlade", "bladesPerChassis", "chassesPerRack", "racksPerAisle",
    "aisles", "topologyKind", "meanDegree", "wsRewireProb", "protocolKind",
    "pollInterval", "changeFraction", "changeMode", "runtime", "probeInterval",
    "rngSeed", "outputPath",
)


def _parse_positive_int(key: str, raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None
    if value <= 0:
        raise ConfigError(key, f"must be positive, got {value}")
    return value


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None


def _parse_enum(key: str, raw: str, enum_cls: type[Enum]) -> Enum:
    try:
        return enum_cls(raw)
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ConfigError(key, f"expected one of {{{choices}}}, got {raw!r}") from None


def parse_lines(text: str) -> dict[str, str]:
    """Split a properties document into a key -> raw-value map."""
    items: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(key, "unknown configuration key")
        if key in items:
            raise ConfigError(key, "duplicate key")
        items[key] = value.strip()
    return items


def config_from_items(items: dict[str, str]) -> SimulationConfig:
    """Validate a raw key map into a fully defaulted SimulationConfig."""
    for key in items:
        if key not in _KEY_TO_FIELD:
            raise ConfigError(key, "unknown configuration key")
    for key in _REQUIRED_KEYS:
        if key not in items:
            raise ConfigError(key, "required key missing")

    spb = _parse_positive_int("servicesPerBlade", items["servicesPerBlade"])
    bpc = _parse_positive_int("bladesPerChassis", items["bladesPerChassis"])
    cpr = _parse_positive_int("chassesPerRack", items["chassesPerRack"])
    rpa = _parse_positive_int("racksPerAisle", items["racksPerAisle"])
    aisles = _parse_positive_int("aisles", items["aisles"])
    n = spb * bpc * cpr * rpa * aisles
    if n < 2:
        raise ConfigError("servicesPerBlade", f"total services must be >= 2, got {n}")

    topology = _parse_enum("topologyKind", items["topologyKind"], TopologyKind)
    protocol = _parse_enum("protocolKind", items["protocolKind"], ProtocolKind)
    change_mode = (_parse_enum("changeMode", items["changeMode"], ChangeMode)
                   if "changeMode" in items else ChangeMode.FAIL)

    mean_degree = (_parse_positive_int("meanDegree", items["meanDegree"])
                   if "meanDegree" in items else math.isqrt(n))
    if mean_degree >= n:
        raise ConfigError("meanDegree", f"must be < total services ({n}), got {mean_degree}")

    ws_rewire = _parse_float("wsRewireProb", items.get("wsRewireProb", "0.1"))
    if not 0.0 <= ws_rewire <= 1.0:
        raise ConfigError("wsRewireProb", f"must be in [0, 1], got {ws_rewire}")

    poll_interval = _parse_float("pollInterval", items.get("pollInterval", "1.0"))
    if poll_interval <= 0:
        raise ConfigError("pollInterval", f"must be > 0, got {poll_interval}")

    change_fraction = _parse_float("changeFraction", items["changeFraction"])
    if not 0.0 <= change_fraction <= 1.0:
        raise ConfigError("changeFraction", f"must be in [0, 1], got {change_fraction}")

    runtime = _parse_float("runtime", items["runtime"])
    if runtime <= 0:
        raise ConfigError("runtime", f"must be > 0, got {runtime}")

    probe_interval = _parse_float("probeInterval", items.get("probeInterval", "1.0"))
    if probe_interval <= 0:
        raise ConfigError("probeInterval", f"must be > 0, got {probe_interval}")
    if probe_interval > runtime:
        raise ConfigError("probeInterval", f"must be <= runtime ({runtime}), got {probe_interval}")

    try:
        rng_seed = int(items["rngSeed"])
    except ValueError:
        raise ConfigError("rngSeed", f"expected an integer, got {items['rngSeed']!r}") from None
    if not 0 <= rng_seed < 2**64:
        raise ConfigError("rngSeed", "must fit an unsigned 64-bit integer")

    output_path = items["outputPath"]
    if not output_path:
        raise ConfigError("outputPath", "must not be empty")

    return SimulationConfig(
        services_per_blade=spb,
        blades_per_chassis=bpc,
        chasses_per_rack=cpr,
        racks_per_aisle=rpa,
        aisles=aisles,
        topology_kind=topology,
        protocol_kind=protocol,
        change_fraction=change_fraction,
        runtime=runtime,
        rng_seed=rng_seed,
        output_path=output_path,
        mean_degree=mean_degree,
        ws_rewire_prob=ws_rewire,
        poll_interval=poll_interval,
        change_mode=change_mode,
        probe_interval=probe_interval,
        explicit_keys=frozenset(items),
    )


def parse_config(text: str) -> SimulationConfig:
    return config_from_items(parse_lines(text))


def _render_value(field_name: str, value) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(config: SimulationConfig) -> str:
    """Properties-file form; ``parse_config(render_config(c)) == c``."""
    lines = []
    for key in _KEY_ORDER:
        field_name = _KEY_TO_FIELD[key]
        lines.append(f"{key}={_render_value(field_name, getattr(config, field_name))}")
    return "\n".join(lines) + "\n"


def derive_seed(base_seed: int, grid_index: int, replicate: int) -> int:
    """Stable per-run seed; adding replicates never reshuffles existing ones."""
    token = f"{base_seed}:{grid_index}:{replicate}".encode()
    return int.from_bytes(hashlib.sha256(token).digest()[:8], "little")


def generate_sweep(
    base: SimulationConfig,
    grid: dict[str, list[str]],
    replicates: int,
) -> list[tuple[SimulationConfig, str]]:
    """Cartesian product of grid values x replicates.

    Grid keys use the properties-file names and values are raw strings, so
    each combination re-runs full parsing: defaults the base file left
    implicit (like meanDegree) re-derive per grid point.  Every run gets a
    seed hashed from (base seed, grid index, replicate) and an output path
    matching its file name.
    """
    if replicates <= 0:
        raise ConfigError("replicates", f"must be positive, got {replicates}")
    for key in grid:
        if key not in _KEY_TO_FIELD:
            raise ConfigError(key, "unknown grid key")
        if not grid[key]:
            raise ConfigError(key, "empty value list")

    base_items = {
        key: _render_value(_KEY_TO_FIELD[key], getattr(base, _KEY_TO_FIELD[key]))
        for key in _KEY_ORDER
        if key in base.explicit_keys or key in _REQUIRED_KEYS
    }

    runs: list[tuple[SimulationConfig, str]] = []
    grid_keys = list(grid)
    combos = itertools.product(*(grid[key] for key in grid_keys)) if grid_keys else [()]
    for grid_index, combo in enumerate(combos):
        items = dict(base_items)
        point_parts = []
        for key, raw in zip(grid_keys, combo):
            items[key] = raw
            point_parts.append(f"{key}={raw}")
        point = "__".join(point_parts) if point_parts else "base"
        for replicate in range(replicates):
            stem = f"{point}__rep{replicate:02d}"
            run_items = dict(items)
            run_items["rngSeed"] = str(derive_seed(base.rng_seed, grid_index, replicate))
            run_items["outputPath"] = f"{stem}.csv"
            runs.append((config_from_items(run_items), f"{stem}.properties"))
    return runs


def grid_point_of_stem(stem: str) -> tuple[str, int]:
    """Split a run file stem into (grid point, replicate index)."""
    point, sep, rep = stem.rpartition("__rep")
    if not sep or not rep.isdigit():
        raise ValueError(f"file stem {stem!r} does not end in __rep<N>")
    return point, int(rep)
