"""Gateway layouts, node placements and YAML scenario files."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .airtime import PREAMBLE_EXTRA_SYMBOLS, ChannelParams, ParameterError
from .radio import (
    DEFAULT_SENSITIVITY_125K,
    DEFAULT_TX_POWER_DBM,
    PathLossModel,
    Position,
    RssiMatrix,
    SensitivityTable,
    build_rssi_matrix,
)
from .simulator import CollisionConfig, TrafficConfig

CENTRAL_FRACTION = 0.6
TOPOLOGIES = ("balanced", "unbalanced", "single")


class ScenarioError(ValueError):
    """A scenario file or object violates one of its invariants."""


def place_gateways(n_gw: int, spacing: float = 150.0) -> list[Position]:
    """Gateways on a rows x cols grid of pitch ``spacing`` centred on the origin.

    The grid uses the most square factorisation of ``n_gw`` with no more rows
    than columns, so 2 -> 1x2, 4 -> 2x2 and 8 -> 2x4.
    """
    if n_gw <= 0:
        raise ParameterError("n_gw must be positive")
    if spacing <= 0:
        raise ParameterError("spacing must be positive")
    rows = max(r for r in range(1, math.isqrt(n_gw) + 1) if n_gw % r == 0)
    cols = n_gw // rows
    xs = (np.arange(cols) - (cols - 1) / 2) * spacing
    ys = (np.arange(rows) - (rows - 1) / 2) * spacing
    return [Position(float(x), float(y)) for y in ys for x in xs]


def _uniform_disc(n: int, center: Position, radius: float, rng: np.random.Generator) -> list[Position]:
    r = radius * np.sqrt(rng.random(n))
    th = rng.uniform(0.0, 2 * np.pi, n)
    return [Position(center.x + a * np.cos(b), center.y + a * np.sin(b)) for a, b in zip(r, th)]


def _uniform_box(n: int, gateways: Sequence[Position], margin: float, rng: np.random.Generator) -> list[Position]:
    gx = [g.x for g in gateways]
    gy = [g.y for g in gateways]
    x = rng.uniform(min(gx) - margin, max(gx) + margin, n)
    y = rng.uniform(min(gy) - margin, max(gy) + margin, n)
    return [Position(float(a), float(b)) for a, b in zip(x, y)]


def _split(n_nodes: int) -> tuple[int, int]:
    if n_nodes <= 0:
        raise ParameterError("n_nodes must be positive")
    n_central = math.ceil(CENTRAL_FRACTION * n_nodes - 1e-9)
    return n_central, n_nodes - n_central


def centroid(gateways: Sequence[Position]) -> Position:
    return Position(float(np.mean([g.x for g in gateways])), float(np.mean([g.y for g in gateways])))


def gen_balanced(
    n_nodes: int,
    gateways: Sequence[Position],
    radius: float = 50.0,
    rng: np.random.Generator | None = None,
    margin: float = 100.0,
) -> list[Position]:
    """60% of nodes in a disc around the gateway centroid, the rest spread
    over the gateways' bounding box grown by ``margin``. Central nodes first."""
    rng = rng if rng is not None else np.random.default_rng()
    n_c, n_s = _split(n_nodes)
    return _uniform_disc(n_c, centroid(gateways), radius, rng) + _uniform_box(n_s, gateways, margin, rng)


def gen_unbalanced(
    n_nodes: int,
    gateways: Sequence[Position],
    hot_gw_index: int = 0,
    rng: np.random.Generator | None = None,
    radius: float = 50.0,
    margin: float = 100.0,
) -> list[Position]:
    """60% of nodes within ``radius`` of one gateway, the rest spread as in
    :func:`gen_balanced`."""
    if not 0 <= hot_gw_index < len(gateways):
        raise ParameterError(f"hot gateway index {hot_gw_index} out of range")
    rng = rng if rng is not None else np.random.default_rng()
    n_c, n_s = _split(n_nodes)
    hot = gateways[hot_gw_index]
    return _uniform_disc(n_c, hot, radius, rng) + _uniform_box(n_s, gateways, margin, rng)


def gen_single_gw(n_nodes: int, rng: np.random.Generator | None = None, radius: float = 50.0) -> "Scenario":
    if n_nodes <= 0:
        raise ParameterError("n_nodes must be positive")
    rng = rng if rng is not None else np.random.default_rng()
    gw = [Position(0.0, 0.0)]
    nodes = _uniform_disc(n_nodes, gw[0], radius, rng)
    return Scenario(gateways=gw, nodes=nodes)


@dataclass
class Scenario:
    gateways: list[Position]
    nodes: list[Position]
    radio: ChannelParams = field(default_factory=ChannelParams)
    path_loss: PathLossModel = field(default_factory=PathLossModel)
    sensitivity: SensitivityTable = field(default_factory=SensitivityTable)
    tx_power: float = DEFAULT_TX_POWER_DBM
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    collision: CollisionConfig = field(default_factory=CollisionConfig)
    seed: int | None = None
    carrier_mhz: float = 869.5
    node_params: list[ChannelParams] = field(default_factory=list)
    channels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.gateways:
            raise ScenarioError("scenario needs at least one gateway")
        if not self.nodes:
            raise ScenarioError("scenario needs at least one node")
        if not self.node_params:
            base = replace(self.radio, payload_bytes=self.traffic.payload_bytes)
            self.node_params = [base] * len(self.nodes)
        if len(self.node_params) != len(self.nodes):
            raise ScenarioError("node_params must have one entry per node")
        if self.channels is None:
            self.channels = np.zeros(len(self.nodes), dtype=int)
        self._rssi: RssiMatrix | None = None

    @property
    def bw(self) -> int:
        return self.radio.bw

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_gateways(self) -> int:
        return len(self.gateways)

    def rssi_matrix(self) -> RssiMatrix:
        """RSSI table, computed once; shadowing draws come from ``seed``."""
        if self._rssi is None:
            rng = np.random.default_rng(np.random.SeedSequence(self.seed).spawn(4)[1])
            self._rssi = build_rssi_matrix(self.nodes, self.gateways, self.path_loss, self.tx_power, rng)
        return self._rssi

    def to_csv(self, path: str | Path) -> None:
        """Positions as ``kind,id,x,y`` rows (kind is ``gateway`` or ``node``)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "id", "x", "y"])
            for i, g in enumerate(self.gateways):
                w.writerow(["gateway", i, f"{g.x:.6f}", f"{g.y:.6f}"])
            for i, p in enumerate(self.nodes):
                w.writerow(["node", i, f"{p.x:.6f}", f"{p.y:.6f}"])


# ---------------------------------------------------------------------------
# configuration files


@dataclass
class ScenarioConfig:
    """Everything needed to rebuild a scenario; mirrors the YAML schema."""

    n_nodes: int = 100
    n_gateways: int = 1
    topology: str = "balanced"
    gateway_spacing: float = 150.0
    central_radius: float = 50.0
    hot_radius: float = 50.0
    hot_gateway: int = 0
    spread_margin: float = 100.0
    seed: int = 0
    carrier_mhz: float = 869.5
    bw: int = 125_000
    cr: int = 1
    header_disabled: int = 0
    low_dr_opt: int | None = None
    n_preamble: int = 8
    preamble_extra: float = PREAMBLE_EXTRA_SYMBOLS
    tx_power_dbm: float = DEFAULT_TX_POWER_DBM
    sensitivity_dbm: list = field(default_factory=lambda: list(DEFAULT_SENSITIVITY_125K))
    l0: float = 127.41
    d0: float = 40.0
    gamma: float = 2.08
    sigma2: float = 0.0
    message_period: float = 10.0
    payload_bytes: int = 20
    duty_cycle_limit: float = 0.1
    sim_duration: float = 3600.0
    arrival: str = "exponential"
    capture_threshold_db: float = 6.0

    def validate(self) -> None:
        if self.n_nodes <= 0:
            raise ScenarioError("invariant violated: n_nodes > 0")
        if self.n_gateways <= 0:
            raise ScenarioError("invariant violated: n_gateways > 0")
        if self.topology not in TOPOLOGIES:
            raise ScenarioError(f"invariant violated: topology in {TOPOLOGIES}")
        if self.topology == "unbalanced" and not 0 <= self.hot_gateway < self.n_gateways:
            raise ScenarioError("invariant violated: 0 <= hot_gateway < n_gateways")
        try:
            self.sensitivity_table()
            self.radio_params()
            self.path_loss_model()
            self.traffic_config()
        except ParameterError as exc:
            raise ScenarioError(f"invariant violated: {exc}") from exc

    def sensitivity_table(self) -> SensitivityTable:
        s = np.asarray(self.sensitivity_dbm, dtype=float)
        if s.ndim == 1:
            return SensitivityTable.from_125k(s)
        return SensitivityTable(s)

    def radio_params(self) -> ChannelParams:
        return ChannelParams(
            bw=self.bw,
            cr=self.cr,
            payload_bytes=self.payload_bytes,
            header_disabled=self.header_disabled,
            low_dr_opt=self.low_dr_opt,
            n_preamble=self.n_preamble,
            preamble_extra=self.preamble_extra,
        )

    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(self.l0, self.d0, self.gamma, self.sigma2)

    def traffic_config(self) -> TrafficConfig:
        return TrafficConfig(
            self.message_period, self.payload_bytes, self.duty_cycle_limit, self.sim_duration, self.arrival
        )


_SECTIONS = {
    "topology": ("n_nodes", "n_gateways", "topology", "gateway_spacing", "central_radius",
                 "hot_radius", "hot_gateway", "spread_margin", "seed"),
    "radio": ("carrier_mhz", "bw", "cr", "header_disabled", "low_dr_opt", "n_preamble",
              "preamble_extra", "tx_power_dbm", "sensitivity_dbm"),
    "path_loss": ("l0", "d0", "gamma", "sigma2"),
    "traffic": ("message_period", "payload_bytes", "duty_cycle_limit", "sim_duration", "arrival"),
    "collision": ("capture_threshold_db",),
}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Accepts the sectioned layout or a flat mapping of field names."""
    known = {f.name for f in fields(ScenarioConfig)}
    flat: dict = {}
    for key, value in (data or {}).items():
        if key in _SECTIONS and isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    unknown = set(flat) - known
    if unknown:
        raise ScenarioError(f"unknown configuration keys: {sorted(unknown)}")
    cfg = ScenarioConfig(**flat)
    cfg.validate()
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    flat = asdict(cfg)
    return {section: {k: flat[k] for k in keys} for section, keys in _SECTIONS.items()}


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be a mapping")
    return config_from_dict(data or {})


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    cfg.validate()
    ss = np.random.SeedSequence(cfg.seed)
    rng = np.random.default_rng(ss.spawn(4)[0])
    if cfg.topology == "single":
        gateways = [Position(0.0, 0.0)]
        nodes = _uniform_disc(cfg.n_nodes, gateways[0], cfg.hot_radius, rng)
    else:
        gateways = place_gateways(cfg.n_gateways, cfg.gateway_spacing)
        if cfg.topology == "balanced":
            nodes = gen_balanced(cfg.n_nodes, gateways, cfg.central_radius, rng, cfg.spread_margin)
        else:
            nodes = gen_unbalanced(
                cfg.n_nodes, gateways, cfg.hot_gateway, rng, cfg.hot_radius, cfg.spread_margin
            )
    return Scenario(
        gateways=gateways,
        nodes=nodes,
        radio=cfg.radio_params(),
        path_loss=cfg.path_loss_model(),
        sensitivity=cfg.sensitivity_table(),
        tx_power=cfg.tx_power_dbm,
        traffic=cfg.traffic_config(),
        collision=CollisionConfig(cfg.capture_threshold_db),
        seed=cfg.seed,
        carrier_mhz=cfg.carrier_mhz,
    )


def load_scenario(path: str | Path) -> Scenario:
    return build_scenario(load_config(path))
