"""Uplink-only LoRa network simulator.

Each node emits a Poisson stream of messages (mean spacing ``message_period``)
shaped by a duty-cycle gate. A gateway hears a frame when the received power
clears the sensitivity of the frame's SF. Frames on the same channel and SF
that overlap in time at a gateway collide; a frame survives a collision only
if it is at least ``capture_threshold_db`` stronger than every frame it
overlaps with. Frames on different SFs never interfere.

Times in the event stream are seconds; air-times are kept in ms to match the
rest of the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .airtime import SPREADING_FACTORS, ParameterError
from .allocation import DISCONNECTED, Assignment, ConsistencyError, node_airtimes

if TYPE_CHECKING:
    from .scenario import Scenario


@dataclass(frozen=True)
class TrafficConfig:
    message_period: float = 10.0
    payload_bytes: int = 20
    duty_cycle_limit: float = 0.1
    sim_duration: float = 3600.0
    arrival: str = "exponential"

    def __post_init__(self) -> None:
        if self.message_period <= 0:
            raise ParameterError("message_period must be positive")
        if not 0 < self.duty_cycle_limit <= 1:
            raise ParameterError("duty_cycle_limit must be in (0, 1]")
        if self.sim_duration < 0:
            raise ParameterError("sim_duration must be non-negative")
        if self.payload_bytes < 0:
            raise ParameterError("payload_bytes must be non-negative")
        if self.arrival not in ("exponential", "periodic"):
            raise ParameterError(f"unknown arrival law {self.arrival!r}")


@dataclass(frozen=True)
class CollisionConfig:
    capture_threshold_db: float = 6.0


@dataclass
class Transmissions:
    """Flat, start-ordered table of every frame sent during a run."""

    node: np.ndarray
    start: np.ndarray  # s
    airtime: np.ndarray  # ms
    sf: np.ndarray
    channel: np.ndarray

    def __len__(self) -> int:
        return len(self.node)

    @property
    def end(self) -> np.ndarray:
        return self.start + self.airtime / 1000.0


@dataclass
class EventLog:
    """One row per (frame, gateway) reception attempt."""

    tx: np.ndarray  # index into Transmissions
    time: np.ndarray
    end: np.ndarray
    node: np.ndarray
    sf: np.ndarray
    channel: np.ndarray
    gateway: np.ndarray
    power: np.ndarray
    received: np.ndarray
    transmissions: Transmissions | None = None

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "node", "sf", "gateway", "verdict"])
            for t, n, sf, g, ok in zip(self.time, self.node, self.sf, self.gateway, self.received):
                w.writerow([f"{t:.6f}", int(n), int(sf), int(g), "received" if ok else "lost"])


@dataclass
class SimMetrics:
    sent: int
    delivered: int
    per_gw_heard: np.ndarray
    per_gw_received: np.ndarray
    der: float
    per_gw_der: np.ndarray
    throughput: float
    collisions: int
    log: EventLog | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "sent": self.sent,
            "delivered": self.delivered,
            "der": self.der,
            "throughput": self.throughput,
            "collisions": self.collisions,
            "per_gw_heard": ";".join(str(int(v)) for v in self.per_gw_heard),
            "per_gw_received": ";".join(str(int(v)) for v in self.per_gw_received),
            "per_gw_der": ";".join(f"{v:.6f}" for v in self.per_gw_der),
        }


def duty_cycle_gate(prev_end: float, prev_airtime: float, start: float, limit: float) -> float:
    """Earliest start not inside the silence that follows the previous frame.

    The silence after a frame of length ``prev_airtime`` is
    ``prev_airtime * (1/limit - 1)``; all arguments share one time unit.
    """
    if not 0 < limit <= 1:
        raise ParameterError("duty cycle limit must be in (0, 1]")
    return max(start, prev_end + prev_airtime * (1.0 / limit - 1.0))


def _arrivals(cfg: TrafficConfig, rng: np.random.Generator) -> np.ndarray:
    horizon = cfg.sim_duration
    if horizon <= 0:
        return np.empty(0)
    mp = cfg.message_period
    if cfg.arrival == "periodic":
        return np.arange(rng.uniform(0, mp), horizon, mp)
    expected = horizon / mp
    size = int(expected + 6 * np.sqrt(expected) + 16)
    t = np.cumsum(rng.exponential(mp, size))
    while t[-1] < horizon:
        t = np.concatenate([t, t[-1] + np.cumsum(rng.exponential(mp, size))])
    return t[t < horizon]


def generate_traffic(
    airtimes_ms: np.ndarray,
    cfg: TrafficConfig,
    rng: np.random.Generator,
    sf: np.ndarray | None = None,
    channel: np.ndarray | None = None,
) -> Transmissions:
    """Gated frame schedule for nodes whose per-frame air-times are given.

    Raw arrivals are a Poisson process; a frame that would start inside its
    node's duty-cycle silence is deferred to the end of it. Frames pushed past
    ``sim_duration`` are never sent.
    """
    airtimes_ms = np.asarray(airtimes_ms, dtype=float)
    n = len(airtimes_ms)
    sf = np.zeros(n, dtype=int) if sf is None else np.asarray(sf)
    channel = np.zeros(n, dtype=int) if channel is None else np.asarray(channel)
    limit = cfg.duty_cycle_limit
    nodes, starts = [], []
    for j in range(n):
        arr = _arrivals(cfg, rng)
        at = airtimes_ms[j] / 1000.0
        spacing = at / limit  # frame plus mandatory silence
        if arr.size == 0:
            continue
        if spacing <= 0 or np.all(np.diff(arr) >= spacing):
            out = arr
        else:
            out = np.empty_like(arr)
            ready = -np.inf
            for i, a in enumerate(arr):
                s = a if a >= ready else ready
                out[i] = s
                ready = s + spacing
            out = out[out < cfg.sim_duration]
        nodes.append(np.full(out.size, j))
        starts.append(out)
    if not starts:
        empty = np.empty(0)
        return Transmissions(empty.astype(int), empty, empty, empty.astype(int), empty.astype(int))
    node = np.concatenate(nodes)
    start = np.concatenate(starts)
    order = np.lexsort((node, start))
    node, start = node[order], start[order]
    return Transmissions(node, start, airtimes_ms[node], sf[node], channel[node])


def resolve_collisions(
    start: np.ndarray, end: np.ndarray, power: np.ndarray, capture_threshold_db: float = 6.0
) -> tuple[np.ndarray, np.ndarray]:
    """Capture verdicts for frames that share one gateway, channel and SF.

    Returns ``(received, collided)`` boolean arrays aligned with the input.
    A frame is received if it overlaps nothing, or if its power beats the
    strongest frame it overlaps by at least the capture threshold.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    power = np.asarray(power, dtype=float)
    order = np.argsort(start, kind="stable")
    s, e, p = start[order], end[order], power[order]
    strongest = np.full(s.size, -np.inf)
    k = 1
    while k < s.size:
        # sorted starts: if no pair k apart overlaps, no pair further apart can
        i = np.flatnonzero(s[k:] < e[:-k])
        if i.size == 0:
            break
        strongest[i] = np.maximum(strongest[i], p[i + k])
        strongest[i + k] = np.maximum(strongest[i + k], p[i])
        k += 1
    ok = p - strongest >= capture_threshold_db
    received = np.empty_like(ok)
    collided = np.empty_like(ok)
    received[order] = ok
    collided[order] = np.isfinite(strongest)
    return received, collided


def run_simulation(
    scenario: "Scenario",
    assignment: Assignment,
    traffic: TrafficConfig | None = None,
    collision: CollisionConfig | None = None,
    seed: int | np.random.SeedSequence | None = None,
    keep_log: bool = False,
) -> SimMetrics:
    """Simulate ``scenario`` with nodes using the SFs of ``assignment``."""
    traffic = traffic or scenario.traffic
    collision = collision or scenario.collision
    rssi = scenario.rssi_matrix()
    sens_col = scenario.sensitivity.column(scenario.bw)
    n_gw, n = rssi.r.shape
    if len(assignment) != n:
        raise ConsistencyError("assignment size does not match the scenario")

    sf = assignment.sf.copy()
    disconnected = sf == DISCONNECTED
    # disconnected nodes still transmit, at the most robust SF
    tx_sf = np.where(disconnected, SPREADING_FACTORS[-1], sf)
    if np.any(~np.isin(tx_sf, SPREADING_FACTORS)):
        raise ConsistencyError("assignment contains invalid SF values")
    heard = rssi.r >= sens_col[tx_sf - SPREADING_FACTORS[0]][None, :]
    if np.any(~disconnected & ~heard.any(axis=0)):
        j = int(np.flatnonzero(~disconnected & ~heard.any(axis=0))[0])
        raise ConsistencyError(f"node {j} assigned SF{sf[j]} is not heard by any gateway")

    at_table = node_airtimes(scenario.node_params)
    at = at_table[tx_sf - SPREADING_FACTORS[0], np.arange(n)]
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    tx = generate_traffic(at, traffic, rng, tx_sf, scenario.channels)
    end = tx.end

    received_any = np.zeros(len(tx), dtype=bool)
    per_gw_heard = np.zeros(n_gw, dtype=int)
    per_gw_received = np.zeros(n_gw, dtype=int)
    collisions = 0
    log_parts = []
    for g in range(n_gw):
        idx = np.flatnonzero(heard[g, tx.node])
        per_gw_heard[g] = idx.size
        ok = np.zeros(idx.size, dtype=bool)
        keys = tx.sf[idx] * 1_000_003 + tx.channel[idx]
        for key in np.unique(keys):
            grp = np.flatnonzero(keys == key)
            sel = idx[grp]
            rec, _ = resolve_collisions(
                tx.start[sel], end[sel], rssi.r[g, tx.node[sel]], collision.capture_threshold_db
            )
            ok[grp] = rec
        per_gw_received[g] = int(ok.sum())
        collisions += int(idx.size - ok.sum())
        received_any[idx[ok]] = True
        if keep_log:
            log_parts.append((idx, np.full(idx.size, g), rssi.r[g, tx.node[idx]], ok))

    sent = len(tx)
    delivered = int(received_any.sum())
    der = delivered / sent if sent else 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        per_gw_der = np.where(per_gw_heard > 0, per_gw_received / np.maximum(per_gw_heard, 1), 1.0)
    log = None
    if keep_log:
        ti, gw, pw, ok = (np.concatenate([p[k] for p in log_parts]) for k in range(4))
        order = np.lexsort((gw, ti))
        ti = ti[order]
        log = EventLog(
            tx=ti,
            time=tx.start[ti],
            end=end[ti],
            node=tx.node[ti],
            sf=tx.sf[ti],
            channel=tx.channel[ti],
            gateway=gw[order],
            power=pw[order],
            received=ok[order],
            transmissions=tx,
        )
    return SimMetrics(
        sent=sent,
        delivered=delivered,
        per_gw_heard=per_gw_heard,
        per_gw_received=per_gw_received,
        der=der,
        per_gw_der=per_gw_der,
        throughput=throughput(delivered, traffic.payload_bytes, traffic.sim_duration)
        if traffic.sim_duration > 0
        else 0.0,
        collisions=collisions,
        log=log,
    )


def throughput(delivered: int, payload_bytes: int, sim_duration: float) -> float:
    """Delivered payload rate in bit/s."""
    if sim_duration <= 0:
        raise ParameterError("sim_duration must be positive")
    return delivered * payload_bytes * 8 / sim_duration


def offered_duty_cycle(assignment: Assignment, scenario: "Scenario", message_period: float) -> np.ndarray:
    """Per-node air-time fraction requested by the traffic before gating."""
    sf = np.where(assignment.sf == DISCONNECTED, SPREADING_FACTORS[-1], assignment.sf)
    at = node_airtimes(scenario.node_params)[sf - SPREADING_FACTORS[0], np.arange(len(sf))]
    return at / 1000.0 / message_period
