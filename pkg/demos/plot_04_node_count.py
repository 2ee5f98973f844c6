"""
Delivery ratio against network size
===================================

More nodes per gateway means more co-SF overlaps. Message period 10 s.
"""

from admaiora.experiments import SweepSpec, run_sweep
from admaiora.scenario import ScenarioConfig

base = ScenarioConfig(n_gateways=4, message_period=10.0, sim_duration=600.0)
spec = SweepSpec("n_nodes", [50, 100, 250, 500], allocators=("adr", "admaiora"), seeds=range(3), base=base)
_, agg = run_sweep(spec)
for row in agg:
    print(f"N {int(row['axis_value']):4d}  {row['allocator']:9s}  DER {row['der_mean']:.3f} +- {row['der_ci95']:.3f}")

# %%
# Gateway count works the same way; each gateway sits on a 150 m grid.
spec = SweepSpec("n_gateways", [1, 2, 4, 8], allocators=("adr", "admaiora"), seeds=range(3),
                 base=ScenarioConfig(n_nodes=500, sim_duration=600.0))
_, agg = run_sweep(spec)
for row in agg:
    print(f"GW {int(row['axis_value'])}  {row['allocator']:9s}  DER {row['der_mean']:.3f}")
