"""Log-distance path loss, RSSI matrices and sensitivity thresholds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .airtime import BANDWIDTHS, SPREADING_FACTORS, ParameterError

DEFAULT_TX_POWER_DBM = 14.0
MIN_DISTANCE_M = 1.0

#: SF7..SF12 demodulation thresholds in dBm for 125/250/500 kHz.
#: Wider bandwidths lose 3 dB per doubling.
DEFAULT_SENSITIVITY_125K = (-123.0, -126.0, -129.0, -132.0, -134.5, -137.0)


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ParameterError("position coordinates must be finite")

    def distance(self, other: "Position") -> float:
        return float(np.hypot(self.x - other.x, self.y - other.y))


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance model with optional log-normal shadowing.

    Defaults reproduce a dense urban deployment: 127.41 dB at 40 m,
    exponent 2.08, no shadowing.
    """

    l0: float = 127.41
    d0: float = 40.0
    gamma: float = 2.08
    sigma2: float = 0.0

    def __post_init__(self) -> None:
        if self.d0 <= 0:
            raise ParameterError("d0 must be positive")
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.sigma2 < 0:
            raise ParameterError("sigma2 must be non-negative")


@dataclass(frozen=True)
class SensitivityTable:
    """Thresholds in dBm, rows SF7..SF12, columns 125/250/500 kHz."""

    s: np.ndarray = field(
        default_factory=lambda: SensitivityTable.from_125k(DEFAULT_SENSITIVITY_125K).s
    )

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape[0] != len(SPREADING_FACTORS) or s.shape[1] > len(BANDWIDTHS):
            raise ParameterError(f"sensitivity table must be 6 x (1..3), got {s.shape}")
        if not np.all(np.diff(s, axis=0) < 0):
            raise ParameterError(
                "sensitivity table must strictly decrease with SF in every bandwidth column"
            )
        object.__setattr__(self, "s", s)

    @classmethod
    def from_125k(cls, values: Sequence[float]) -> "SensitivityTable":
        col = np.asarray(values, dtype=float)
        return cls(np.stack([col, col + 3.0, col + 6.0], axis=1))

    def threshold(self, sf: int, bw: int) -> float:
        return float(self.column(bw)[sf - SPREADING_FACTORS[0]])

    def column(self, bw: int) -> np.ndarray:
        """Thresholds for SF7..SF12 at one bandwidth."""
        if bw not in BANDWIDTHS or BANDWIDTHS.index(bw) >= self.s.shape[1]:
            raise ParameterError(f"no sensitivity column for bw={bw}")
        return self.s[:, BANDWIDTHS.index(bw)]


@dataclass(frozen=True)
class RssiMatrix:
    """Received power in dBm, ``r[gateway, node]``."""

    r: np.ndarray
    gateway_ids: tuple[int, ...] = ()
    node_ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        object.__setattr__(self, "r", r)
        if not self.gateway_ids:
            object.__setattr__(self, "gateway_ids", tuple(range(r.shape[0])))
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(range(r.shape[1])))
        if (len(self.gateway_ids), len(self.node_ids)) != r.shape:
            raise ParameterError("index maps do not match the matrix shape")

    @property
    def n_gateways(self) -> int:
        return self.r.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.r.shape[1]


def path_loss(model: PathLossModel, distance, rng: np.random.Generator | None = None):
    """Path loss in dB at ``distance`` metres (scalar or array)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ParameterError("distance must be positive")
    loss = model.l0 + 10.0 * model.gamma * np.log10(d / model.d0)
    if model.sigma2 > 0:
        if rng is None:
            raise ParameterError("shadowing requires an rng")
        loss = loss + rng.normal(0.0, np.sqrt(model.sigma2), size=d.shape)
    return float(loss) if loss.ndim == 0 else loss


def rssi(tx_power_dbm: float, model: PathLossModel, distance, rng: np.random.Generator | None = None):
    return tx_power_dbm - path_loss(model, distance, rng)


def build_rssi_matrix(
    nodes: Sequence[Position],
    gateways: Sequence[Position],
    model: PathLossModel = PathLossModel(),
    tx_power: float = DEFAULT_TX_POWER_DBM,
    rng: np.random.Generator | None = None,
) -> RssiMatrix:
    if len(nodes) == 0 or len(gateways) == 0:
        raise ParameterError("need at least one node and one gateway")
    nx = np.array([[p.x, p.y] for p in nodes])
    gx = np.array([[p.x, p.y] for p in gateways])
    d = np.hypot(gx[:, None, 0] - nx[None, :, 0], gx[:, None, 1] - nx[None, :, 1])
    d = np.maximum(d, MIN_DISTANCE_M)
    return RssiMatrix(rssi(tx_power, model, d, rng))


def audibility(rssi_matrix: RssiMatrix, sensitivity: SensitivityTable, bw: int) -> np.ndarray:
    """Boolean array ``[sf_index, gateway, node]``: gateway hears node at that SF."""
    thr = sensitivity.column(bw)
    return rssi_matrix.r[None, :, :] >= thr[:, None, None]


def reachable_sfs(
    rssi_matrix: RssiMatrix, sensitivity: SensitivityTable, node: int, bw: int
) -> list[set[int]]:
    """For each gateway, the SFs at which it can demodulate ``node``."""
    thr = sensitivity.column(bw)
    return [
        {sf for sf, t in zip(SPREADING_FACTORS, thr) if rssi_matrix.r[g, node] >= t}
        for g in range(rssi_matrix.n_gateways)
    ]
