"""Slow, literal reference implementations used only by the tests.

Nothing here imports the package's computational code; inputs are plain
Python lists so the checks stay independent of the vectorised paths.
"""

from __future__ import annotations

import math

SFS = [7, 8, 9, 10, 11, 12]


def airtime_ms(sf, bw_hz, cr, pl, h, de, n_pream=8, extra=4.24):
    """Time-on-air from the closed-form frame-duration formulas, in ms."""
    t_sym = 2**sf / bw_hz * 1000.0
    num = 8 * pl - 4 * sf + 44 - 20 * h
    den = 4 * (sf - 2 * de)
    ceil = -((-num) // den)  # integer ceiling, exact for negatives
    n_payload = 8 + max(ceil * (cr + 4), 0)
    return (n_pream + extra) * t_sym + n_payload * t_sym


def pressure(sfmap, rssi, sens, airtime):
    """``press[sf][gw]`` by direct summation. ``airtime[sf][n]`` in ms."""
    n_gw, n = len(rssi), len(rssi[0])
    press = {sf: [0.0] * n_gw for sf in SFS}
    for g in range(n_gw):
        for sf in SFS:
            total = 0.0
            for j in range(n):
                if sfmap[j] == sf and rssi[g][j] >= sens[sf]:
                    total += airtime[sf][j]
            press[sf][g] = total
    return press


def worst_cell(press, n_gw):
    best = None
    for g in range(n_gw):
        for sf in SFS:
            if best is None or press[sf][g] > press[best[0]][best[1]]:
                best = (sf, g)
    return best


def best_node(rssi, sfmap, press, sens, frozen):
    """Choose-the-best-node, set by set. Returns (node, wsf, weight) or None."""
    n_gw, n = len(rssi), len(rssi[0])
    wsf, worst_gw = worst_cell(press, n_gw)
    stressing = [
        j for j in range(n)
        if sfmap[j] == wsf and rssi[worst_gw][j] >= sens[wsf] and not frozen[j]
    ]
    if not stressing:
        return None
    candidates = []
    for j in stressing:
        deltas = []
        for g in range(n_gw):
            lam = max(press[sf][g] for sf in SFS)
            d = {
                lam - press[s][g]
                for s in SFS
                if s > wsf and rssi[g][j] >= sens[s] and lam > press[s][g]
            }
            deltas.append(min(d) if d else 0.0)
        w = 0.0
        for v in deltas:
            w += v
        candidates.append((j, w))
    top = max(w for _, w in candidates)
    node = min(j for j, w in candidates if w == top)
    return node, wsf, top


def best_sf(node, wsf, rssi, press, cost, sens, strict=True):
    """Find-the-best-SF. ``cost[sf]`` for this node. Returns (next_at, sf|None)."""
    n_gw = len(rssi)
    next_at, next_sf = 0.0, None
    for s in SFS:
        if s <= wsf:
            continue
        d = []
        for g in range(n_gw):
            lam = max(press[sf][g] for sf in SFS)
            if rssi[g][node] >= sens[s] and (strict or lam > press[s][g]):
                d.append(lam - press[s][g] - cost[s])
        if d and min(d) > next_at:
            next_at, next_sf = min(d), s
    return next_at, next_sf


def collision_verdicts(frames, capture_db=6.0):
    """Per-frame reception at one gateway by pairwise overlap scan.

    ``frames`` is a list of dicts with start, end, sf, channel, power.
    """
    out = []
    for i, a in enumerate(frames):
        ok = True
        for j, b in enumerate(frames):
            if i == j or a["sf"] != b["sf"] or a["channel"] != b["channel"]:
                continue
            if a["start"] < b["end"] and b["start"] < a["end"]:
                if a["power"] - b["power"] < capture_db:
                    ok = False
        out.append(ok)
    return out


def log_distance_loss(d, l0=127.41, d0=40.0, gamma=2.08):
    return l0 + 10 * gamma * math.log10(d / d0)
