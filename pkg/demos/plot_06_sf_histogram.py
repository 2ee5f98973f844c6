"""
Spreading factor histograms
===========================

With eight gateways almost every node is within SF7 range of one of them,
so ADR leaves the other five SFs empty. The balancing loop spreads nodes
out into a decaying histogram; the probabilistic variant draws SFs in
inverse proportion to their cost.
"""

import numpy as np

from admaiora import SensitivityTable, ad_maiora, adr_mgw, probabilistic_adr, sf_histogram
from admaiora.airtime import LITERAL_SF_COST
from admaiora.scenario import ScenarioConfig, build_scenario

sc = build_scenario(ScenarioConfig(n_nodes=500, n_gateways=8, seed=0))
rssi, sens = sc.rssi_matrix(), SensitivityTable()

hists = {
    "adr": sf_histogram(adr_mgw(rssi, sens)),
    "prob-adr": sf_histogram(probabilistic_adr(rssi, sens, 125_000, LITERAL_SF_COST, np.random.default_rng(0))),
    "admaiora": sf_histogram(ad_maiora(rssi, sens, sc.node_params)),
}
print("          " + "".join(f"SF{sf:<5}" for sf in range(7, 13)))
for name, h in hists.items():
    print(f"{name:9s} " + "".join(f"{int(c):<7d}" for c in h))
