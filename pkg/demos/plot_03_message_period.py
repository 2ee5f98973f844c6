"""
Delivery ratio against message period
=====================================

Four gateways, 500 nodes, a few seeds per point. Shorter simulated time
than a full hour keeps this quick; set DURATION to 3600 for the real thing.
"""

from admaiora.experiments import SweepSpec, run_sweep
from admaiora.scenario import ScenarioConfig

DURATION = 600.0
base = ScenarioConfig(n_nodes=500, n_gateways=4, sim_duration=DURATION)
spec = SweepSpec("message_period", [10, 30, 100, 300, 900], seeds=range(3), base=base)
_, agg = run_sweep(spec)

for row in agg:
    print(f"MP {row['axis_value']:6.0f} s  {row['allocator']:9s}  DER {row['der_mean']:.3f} "
          f"+- {row['der_ci95']:.3f}  throughput {row['throughput_mean']:7.1f} bit/s")
