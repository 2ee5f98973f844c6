"""Spreading-factor allocators: ADR_MGW, probabilistic ADR and AD MAIORA.

The pressure table ``sfpress[sf_index, gateway]`` holds the summed air-time
(ms) of every node using that SF and audible at that gateway with it. AD
MAIORA repeatedly takes the most pressured (SF, gateway) cell, picks the
node in that cell with the most headroom at higher SFs on all gateways it
reaches, and promotes it to the SF with the largest worst-case headroom.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .airtime import LITERAL_SF_COST, SPREADING_FACTORS, ChannelParams, airtime_ms
from .radio import RssiMatrix, SensitivityTable, audibility

#: Marker SF for nodes that no gateway can hear even at SF12.
DISCONNECTED = 0

N_SF = len(SPREADING_FACTORS)


class ConsistencyError(RuntimeError):
    """An assignment uses an SF that no gateway can demodulate."""


@dataclass(frozen=True)
class AllocationStep:
    """One iteration of the AD MAIORA loop."""

    node: int
    from_sf: int
    to_sf: int | None
    next_at: float
    committed: bool


@dataclass
class Assignment:
    """Per-node SF (``DISCONNECTED`` for unreachable nodes)."""

    sf: np.ndarray
    provenance: str = ""
    history: list[AllocationStep] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.sf = np.asarray(self.sf, dtype=int)

    def __len__(self) -> int:
        return len(self.sf)

    @property
    def connected(self) -> np.ndarray:
        return self.sf != DISCONNECTED

    @property
    def n_disconnected(self) -> int:
        return int(np.count_nonzero(self.sf == DISCONNECTED))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "sf", "provenance"])
            for i, sf in enumerate(self.sf):
                w.writerow([i, int(sf), self.provenance])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Assignment":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["node_id"]))
        prov = rows[0]["provenance"] if rows else ""
        return cls(np.array([int(r["sf"]) for r in rows], dtype=int), prov)


@dataclass(frozen=True)
class CandidateMove:
    node: int
    wsf: int
    weight: float


def _sf_index(sf: int) -> int:
    return sf - SPREADING_FACTORS[0]


def node_airtimes(per_node_params: Sequence[ChannelParams]) -> np.ndarray:
    """Air-time (ms) of each node at every SF, shape ``[N_SF, N]``.

    Identical parameter sets are only evaluated once.
    """
    cache: dict[ChannelParams, np.ndarray] = {}
    out = np.empty((N_SF, len(per_node_params)))
    for j, p in enumerate(per_node_params):
        col = cache.get(p)
        if col is None:
            col = np.array([airtime_ms(p.with_sf(sf)) for sf in SPREADING_FACTORS])
            cache[p] = col
        out[:, j] = col
    return out


def _as_airtime_table(per_node, n_nodes: int) -> np.ndarray:
    if isinstance(per_node, np.ndarray):
        at = np.asarray(per_node, dtype=float)
        if at.ndim == 1:
            at = np.repeat(at[:, None], n_nodes, axis=1)
        return at
    if isinstance(per_node, ChannelParams):
        per_node = [per_node] * n_nodes
    return node_airtimes(per_node)


def adr_mgw(rssi_matrix: RssiMatrix, sensitivity: SensitivityTable, bw: int = 125_000) -> Assignment:
    """Lowest SF at which at least one gateway hears each node."""
    heard_any = audibility(rssi_matrix, sensitivity, bw).any(axis=1)  # [sf, node]
    first = np.argmax(heard_any, axis=0)
    sf = np.where(heard_any.any(axis=0), first + SPREADING_FACTORS[0], DISCONNECTED)
    return Assignment(sf, "adr_mgw")


def probabilistic_adr(
    rssi_matrix: RssiMatrix,
    sensitivity: SensitivityTable,
    bw: int = 125_000,
    sf_cost: Sequence[float] = LITERAL_SF_COST,
    rng: np.random.Generator | None = None,
) -> Assignment:
    """Draw each node's SF with probability proportional to ``1/sf_cost``.

    The support is restricted to SFs at or above the node's ADR_MGW SF and the
    weights are renormalized over it.
    """
    rng = rng if rng is not None else np.random.default_rng()
    base = adr_mgw(rssi_matrix, sensitivity, bw).sf
    inv = 1.0 / np.asarray(sf_cost, dtype=float)
    u = rng.random(len(base))
    out = base.copy()
    for j, b in enumerate(base):
        if b == DISCONNECTED:
            continue
        w = inv[_sf_index(b):]
        cdf = np.cumsum(w) / w.sum()
        k = min(int(np.searchsorted(cdf, u[j], side="right")), len(w) - 1)
        out[j] = b + k
    return Assignment(out, "prob_adr")


def compute_pressure(
    assignment: Assignment | np.ndarray,
    rssi_matrix: RssiMatrix,
    sensitivity: SensitivityTable,
    bw: int,
    per_node_params,
    rate: np.ndarray | None = None,
) -> np.ndarray:
    """Pressure table ``[N_SF, N_GW]`` in ms.

    ``per_node_params`` is a ChannelParams, a list of them, or a precomputed
    ``[N_SF, N]`` air-time table. ``rate`` optionally weights each node's
    air-time (e.g. messages per second); off by default.
    """
    sf = assignment.sf if isinstance(assignment, Assignment) else np.asarray(assignment)
    at = _as_airtime_table(per_node_params, rssi_matrix.n_nodes)
    aud = audibility(rssi_matrix, sensitivity, bw)
    return _pressure(sf, aud, at if rate is None else at * rate[None, :])


def _pressure(sf: np.ndarray, aud: np.ndarray, load: np.ndarray) -> np.ndarray:
    onehot = sf[None, :] == np.array(SPREADING_FACTORS)[:, None]  # [k, n]
    used = onehot[:, None, :] & aud  # [k, gw, n]
    orphan = onehot.any(axis=0) & ~used.any(axis=(0, 1))
    if orphan.any():
        j = int(np.flatnonzero(orphan)[0])
        raise ConsistencyError(f"node {j} assigned SF{sf[j]} is not heard by any gateway")
    return np.einsum("kgn,kn->kg", used, load)


def _worst_cell(sfpress: np.ndarray) -> tuple[int, int]:
    # gateway-major flattening: ties resolve to lowest gateway, then lowest SF
    flat = int(np.argmax(sfpress.T))
    gw, k = divmod(flat, sfpress.shape[0])
    return k, gw


def best_node(
    rssi_matrix: RssiMatrix,
    sfmap: np.ndarray,
    sfpress: np.ndarray,
    sensitivity: SensitivityTable,
    bw: int = 125_000,
    frozen: np.ndarray | None = None,
    aud: np.ndarray | None = None,
) -> CandidateMove | None:
    """Pick the node whose promotion out of the worst (SF, gateway) cell
    leaves the most headroom, summed over gateways.

    For each gateway the node's headroom is the smallest positive gap
    ``lambda_gw - sfpress[sf*, gw]`` over higher SFs ``sf*`` at which that
    gateway hears it; gateways with no such SF contribute 0. Ties go to the
    lowest node index.
    """
    if aud is None:
        aud = audibility(rssi_matrix, sensitivity, bw)
    sfmap = np.asarray(sfmap)
    k_w, gw_w = _worst_cell(sfpress)
    wsf = SPREADING_FACTORS[k_w]
    mask = (sfmap == wsf) & aud[k_w, gw_w, :]
    if frozen is not None:
        mask &= ~frozen
    stressing = np.flatnonzero(mask)
    if stressing.size == 0:
        return None

    lam = sfpress.max(axis=0)  # [gw]
    hi = sfpress[k_w + 1:, :]  # [k, gw]
    gap = lam[None, :] - hi
    ok = aud[k_w + 1:, :, :][:, :, stressing] & (gap > 0)[:, :, None]  # [k, gw, m]
    vals = np.where(ok, gap[:, :, None], np.inf)
    per_gw = vals.min(axis=0) if vals.shape[0] else np.full((sfpress.shape[1], stressing.size), np.inf)
    per_gw[np.isinf(per_gw)] = 0.0
    weights = per_gw.sum(axis=0)
    best = int(np.argmax(weights))
    return CandidateMove(int(stressing[best]), wsf, float(weights[best]))


def best_sf(
    candidate: CandidateMove,
    rssi_matrix: RssiMatrix,
    sfpress: np.ndarray,
    sf_cost: Sequence[float],
    sensitivity: SensitivityTable,
    bw: int = 125_000,
    strict: bool = True,
    aud: np.ndarray | None = None,
) -> tuple[float, int | None]:
    """Higher SF for ``candidate`` maximizing the worst gateway headroom
    ``lambda_gw - sfpress[sf*, gw] - sf_cost[sf*]``.

    Returns ``(next_at, sf)``; ``sf`` is None when no SF leaves positive
    headroom. With ``strict`` every gateway hearing the node at ``sf*`` takes
    part in the minimum, so a promotion can never raise any gateway's peak
    pressure. Otherwise gateways where ``sf*`` already carries the peak are
    skipped. Ties go to the lower SF.
    """
    if aud is None:
        aud = audibility(rssi_matrix, sensitivity, bw)
    n = candidate.node
    cost = np.asarray(sf_cost, dtype=float)
    lam = sfpress.max(axis=0)
    next_at, next_sf = 0.0, None
    for k in range(_sf_index(candidate.wsf) + 1, N_SF):
        heard = aud[k, :, n]
        if not strict:
            heard = heard & (lam > sfpress[k])
        if not heard.any():
            continue
        m = float(np.min(lam[heard] - sfpress[k, heard] - cost[k]))
        if m > next_at:
            next_at, next_sf = m, SPREADING_FACTORS[k]
    return next_at, next_sf


def _cost_table(cost_mode: str, at: np.ndarray) -> np.ndarray:
    if cost_mode == "computed":
        return at
    if cost_mode == "literal":
        return np.repeat(np.asarray(LITERAL_SF_COST)[:, None], at.shape[1], axis=1)
    raise ValueError(f"unknown cost mode {cost_mode!r}")


def ad_maiora(
    rssi_matrix: RssiMatrix,
    sensitivity: SensitivityTable,
    per_node_params=ChannelParams(),
    bw: int = 125_000,
    cost_mode: str = "computed",
    strict: bool = True,
    rate: np.ndarray | None = None,
) -> Assignment:
    """Air-time balancing allocation starting from ADR_MGW.

    Every node is considered at most once: it is either promoted (when some
    higher SF leaves positive headroom) or frozen at its current SF. The loop
    stops once the most pressured cell has no unfrozen nodes left. The step
    log is kept in ``Assignment.history``.
    """
    n = rssi_matrix.n_nodes
    at = _as_airtime_table(per_node_params, n)
    cost = _cost_table(cost_mode, at)
    load = at if rate is None else at * rate[None, :]
    aud = audibility(rssi_matrix, sensitivity, bw)

    sfmap = adr_mgw(rssi_matrix, sensitivity, bw).sf.copy()
    frozen = sfmap == DISCONNECTED
    history: list[AllocationStep] = []

    while True:
        press = _pressure(sfmap, aud, load)
        cand = best_node(rssi_matrix, sfmap, press, sensitivity, bw, frozen, aud)
        if cand is None:
            break
        j = cand.node
        next_at, next_sf = best_sf(cand, rssi_matrix, press, cost[:, j], sensitivity, bw, strict, aud)
        committed = next_sf is not None and next_at > 0
        if committed:
            sfmap[j] = next_sf
        frozen[j] = True
        history.append(AllocationStep(j, cand.wsf, next_sf, next_at, committed))

    return Assignment(sfmap, "ad_maiora", history)


def sf_histogram(assignment: Assignment | np.ndarray) -> np.ndarray:
    """Node counts for SF7..SF12; disconnected nodes are not counted."""
    sf = assignment.sf if isinstance(assignment, Assignment) else np.asarray(assignment)
    return np.array([np.count_nonzero(sf == s) for s in SPREADING_FACTORS], dtype=int)


def check_feasible(
    assignment: Assignment, rssi_matrix: RssiMatrix, sensitivity: SensitivityTable, bw: int
) -> None:
    """Raise ConsistencyError if any connected node is inaudible at its SF."""
    aud = audibility(rssi_matrix, sensitivity, bw)
    for j, sf in enumerate(assignment.sf):
        if sf == DISCONNECTED:
            continue
        if sf not in SPREADING_FACTORS or not aud[_sf_index(sf), :, j].any():
            raise ConsistencyError(f"node {j} assigned SF{sf} is not heard by any gateway")
