"""
Per-gateway delivery in an unbalanced deployment
================================================

60% of the nodes crowd around gateway 0. That gateway hears the most
traffic and loses the largest share of it.
"""

from admaiora.experiments import per_gw_report, simulate
from admaiora.scenario import ScenarioConfig

for topology in ("unbalanced", "balanced"):
    cfg = ScenarioConfig(n_nodes=500, n_gateways=4, topology=topology, sim_duration=600.0, seed=1)
    for allocator in ("adr", "admaiora"):
        res = simulate(cfg, allocator)
        ders = [f"{r['partial_der']:.3f}" for r in per_gw_report(res)]
        print(f"{topology:10s} {allocator:9s} network DER {res.metrics.der:.3f}  per gateway {ders}")
