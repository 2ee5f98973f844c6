"""Air-time balancing spreading-factor allocation for multi-gateway LoRa."""

from .airtime import (
    ChannelParams,
    ParameterError,
    TimingBreakdown,
    airtime,
    airtime_ms,
    nominal_bitrate,
    payload_symbols,
    sf_cost_vector,
    symbol_time,
)
from .allocation import (
    DISCONNECTED,
    Assignment,
    CandidateMove,
    ConsistencyError,
    ad_maiora,
    adr_mgw,
    best_node,
    best_sf,
    compute_pressure,
    probabilistic_adr,
    sf_histogram,
)
from .radio import (
    PathLossModel,
    Position,
    RssiMatrix,
    SensitivityTable,
    build_rssi_matrix,
    path_loss,
    reachable_sfs,
    rssi,
)
from .scenario import (
    Scenario,
    ScenarioConfig,
    build_scenario,
    gen_balanced,
    gen_single_gw,
    gen_unbalanced,
    load_scenario,
    place_gateways,
)
from .simulator import CollisionConfig, SimMetrics, TrafficConfig, run_simulation

__version__ = "0.1.0"
