"""Single runs, parameter sweeps and the per-figure CSV reports."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .airtime import SPREADING_FACTORS, sf_cost_vector
from .allocation import Assignment, ad_maiora, adr_mgw, probabilistic_adr, sf_histogram
from .scenario import Scenario, ScenarioConfig, build_scenario
from .simulator import SimMetrics, offered_duty_cycle, run_simulation

log = logging.getLogger(__name__)

ALLOCATORS = ("adr", "prob-adr", "admaiora")
AXES = ("message_period", "n_nodes", "n_gateways")
_ALLOCATOR_ALIASES = {"adr_mgw": "adr", "prob_adr": "prob-adr", "ad_maiora": "admaiora"}
_AXIS_ALIASES = {"mp": "message_period", "nodes": "n_nodes", "gateways": "n_gateways"}

# SeedSequence children of a run seed
_ALLOC_STREAM = 2
_TRAFFIC_STREAM = 3


def allocate(scenario: Scenario, allocator: str, seed: int | None = None) -> Assignment:
    allocator = _ALLOCATOR_ALIASES.get(allocator, allocator)
    rssi = scenario.rssi_matrix()
    bw = scenario.bw
    if allocator == "adr":
        return adr_mgw(rssi, scenario.sensitivity, bw)
    if allocator == "prob-adr":
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(4)[_ALLOC_STREAM])
        return probabilistic_adr(rssi, scenario.sensitivity, bw, sf_cost_vector("literal"), rng)
    if allocator == "admaiora":
        return ad_maiora(rssi, scenario.sensitivity, scenario.node_params, bw)
    raise ValueError(f"unknown allocator {allocator!r}; expected one of {ALLOCATORS}")


@dataclass
class RunResult:
    config: ScenarioConfig
    allocator: str
    assignment: Assignment
    metrics: SimMetrics

    def row(self) -> dict:
        """Flat CSV row: every input parameter, then metrics and SF counts."""
        row = {"allocator": self.allocator}
        row.update({k: _fmt(v) for k, v in asdict(self.config).items()})
        row.update(self.metrics.as_dict())
        hist = sf_histogram(self.assignment)
        row.update({f"sf{sf}": int(c) for sf, c in zip(SPREADING_FACTORS, hist)})
        row["disconnected"] = self.assignment.n_disconnected
        scenario = build_scenario(self.config)
        load = offered_duty_cycle(self.assignment, scenario, self.config.message_period)
        row["dc_violation"] = bool(np.any(load > self.config.duty_cycle_limit))
        return row


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return "" if v is None else v


def simulate(cfg: ScenarioConfig, allocator: str, keep_log: bool = False) -> RunResult:
    """Build the scenario from ``cfg`` (seeded by ``cfg.seed``), allocate, simulate."""
    scenario = build_scenario(cfg)
    assignment = allocate(scenario, allocator, cfg.seed)
    traffic_ss = np.random.SeedSequence(cfg.seed).spawn(4)[_TRAFFIC_STREAM]
    metrics = run_simulation(scenario, assignment, seed=traffic_ss, keep_log=keep_log)
    return RunResult(cfg, allocator, assignment, metrics)


def run_once(cfg: ScenarioConfig, allocator: str, seed: int | None = None) -> dict:
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return simulate(cfg, allocator).row()


@dataclass
class SweepSpec:
    axis: str
    values: Sequence[float]
    allocators: Sequence[str] = ALLOCATORS
    topology: str = "balanced"
    seeds: Sequence[int] = (0,)
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self) -> None:
        self.axis = _AXIS_ALIASES.get(self.axis, self.axis)
        self.allocators = tuple(_ALLOCATOR_ALIASES.get(a, a) for a in self.allocators)
        if self.axis not in AXES:
            raise ValueError(f"sweep axis must be one of {AXES}")
        if not self.values or not self.allocators or not self.seeds:
            raise ValueError("sweep needs at least one value, allocator and seed")
        for a in self.allocators:
            if a not in ALLOCATORS:
                raise ValueError(f"unknown allocator {a!r}")

    def points(self) -> list[tuple[float, str, int]]:
        return [(v, a, s) for v in self.values for a in self.allocators for s in self.seeds]

    def config_for(self, value: float, seed: int) -> ScenarioConfig:
        v = int(value) if self.axis != "message_period" else float(value)
        return replace(self.base, topology=self.topology, seed=int(seed), **{self.axis: v})


def _run_point(args: tuple[ScenarioConfig, str]) -> dict:
    cfg, allocator = args
    try:
        return simulate(cfg, allocator).row()
    except Exception as exc:  # reported per point, the sweep goes on
        log.warning("sweep point failed: %s / %s: %s", allocator, cfg, exc)
        row = {"allocator": allocator, **{k: _fmt(v) for k, v in asdict(cfg).items()}}
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row


def run_sweep(spec: SweepSpec, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Full factorial over values x allocators x seeds.

    Returns the long-form rows (canonical point order) and one aggregate row
    per (value, allocator) with the mean and 95% Student-t half-width.
    """
    tasks = [(spec.config_for(v, s), a) for v, a, s in spec.points()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_point, tasks))
    else:
        rows = [_run_point(t) for t in tasks]
    for row, (v, a, s) in zip(rows, spec.points()):
        row["axis"] = spec.axis
        row["axis_value"] = v
    return rows, aggregate(rows, spec)


def confidence_interval(samples: Iterable[float], level: float = 0.95) -> tuple[float, float | None]:
    """Mean and Student-t half-width; the half-width is None for one sample."""
    x = np.asarray(list(samples), dtype=float)
    mean = float(x.mean()) if x.size else float("nan")
    if x.size < 2:
        return mean, None
    sem = x.std(ddof=1) / np.sqrt(x.size)
    return mean, float(stats.t.ppf(0.5 + level / 2, x.size - 1) * sem)


def aggregate(rows: list[dict], spec: SweepSpec) -> list[dict]:
    out = []
    for v in spec.values:
        for a in spec.allocators:
            pts = [r for r in rows if r["axis_value"] == v and r["allocator"] == a and "error" not in r]
            der_m, der_ci = confidence_interval(r["der"] for r in pts)
            th_m, th_ci = confidence_interval(r["throughput"] for r in pts)
            out.append(
                {
                    "axis": spec.axis,
                    "axis_value": v,
                    "allocator": a,
                    "topology": spec.topology,
                    "n_seeds": len(pts),
                    "der_mean": der_m,
                    "der_ci95": "" if der_ci is None else der_ci,
                    "throughput_mean": th_m,
                    "throughput_ci95": "" if th_ci is None else th_ci,
                    "dc_violation": any(r["dc_violation"] for r in pts),
                }
            )
    return out


def per_gw_report(result: RunResult | SimMetrics) -> list[dict]:
    """One row per gateway: frames heard, frames received, partial DER."""
    m = result.metrics if isinstance(result, RunResult) else result
    return [
        {"gateway": g, "heard": int(h), "received": int(r), "partial_der": float(d)}
        for g, (h, r, d) in enumerate(zip(m.per_gw_heard, m.per_gw_received, m.per_gw_der))
    ]


def sf_histogram_report(assignments: dict[str, Assignment]) -> list[dict]:
    """Node counts per SF for each allocator, long form."""
    rows = []
    for name, asg in assignments.items():
        for sf, c in zip(SPREADING_FACTORS, sf_histogram(asg)):
            rows.append({"allocator": name, "sf": sf, "nodes": int(c)})
    return rows


def write_csv(rows: Sequence[dict], path: str | Path) -> None:
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, restval="")
        w.writeheader()
        w.writerows(rows)
