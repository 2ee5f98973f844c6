"""LoRa frame timing: symbol time, preamble, payload symbols and time-on-air.

All durations are in milliseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

SPREADING_FACTORS = (7, 8, 9, 10, 11, 12)
BANDWIDTHS = (125_000, 250_000, 500_000)

#: Fixed preamble overhead in symbols added to the programmed preamble length.
#: The Semtech datasheets use 4.25; 4.24 is kept as the default here.
PREAMBLE_EXTRA_SYMBOLS = 4.24

#: Normalized per-SF cost vector (SF7 == 1.0).
LITERAL_SF_COST = (1.0, 2.0, 3.56, 7.12, 14.23, 24.93)


class ParameterError(ValueError):
    """Raised for radio parameters outside their valid range."""


def default_low_dr_opt(sf: int, bw: int) -> int:
    """Low data-rate optimisation flag: on for SF11/SF12 at 125 kHz."""
    return 1 if (sf >= 11 and bw == 125_000) else 0


def _check_sf_bw(sf: int, bw: int) -> None:
    if sf not in SPREADING_FACTORS:
        raise ParameterError(f"sf must be one of {SPREADING_FACTORS}, got {sf!r}")
    if bw not in BANDWIDTHS:
        raise ParameterError(f"bw must be one of {BANDWIDTHS} Hz, got {bw!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Radio configuration of one uplink frame.

    ``cr`` is the code-rate index (1..4 meaning 4/5..4/8). ``header_disabled``
    is 0 when the explicit header is present. ``low_dr_opt`` defaults to the
    standard policy when left as ``None``.
    """

    sf: int = 7
    bw: int = 125_000
    cr: int = 1
    payload_bytes: int = 20
    header_disabled: int = 0
    low_dr_opt: int | None = None
    n_preamble: int = 8
    preamble_extra: float = PREAMBLE_EXTRA_SYMBOLS

    def __post_init__(self) -> None:
        _check_sf_bw(self.sf, self.bw)
        if self.cr not in (1, 2, 3, 4):
            raise ParameterError(f"cr must be in 1..4, got {self.cr!r}")
        if self.payload_bytes < 0:
            raise ParameterError("payload_bytes must be non-negative")
        if self.header_disabled not in (0, 1):
            raise ParameterError("header_disabled must be 0 or 1")
        if self.low_dr_opt is None:
            object.__setattr__(self, "low_dr_opt", default_low_dr_opt(self.sf, self.bw))
        elif self.low_dr_opt not in (0, 1):
            raise ParameterError("low_dr_opt must be 0 or 1")
        if self.n_preamble <= 0:
            raise ParameterError("n_preamble must be positive")

    def with_sf(self, sf: int) -> "ChannelParams":
        """Copy with a new SF; the DE flag is re-derived from the default policy."""
        return replace(self, sf=sf, low_dr_opt=default_low_dr_opt(sf, self.bw))


@dataclass(frozen=True)
class TimingBreakdown:
    t_sym: float
    t_pream: float
    payload_symbols: int
    t_payload: float
    airtime: float


def symbol_time(sf: int, bw: int) -> float:
    """Duration of one chirp, ``2**sf / bw``, in ms."""
    _check_sf_bw(sf, bw)
    return (2**sf) / bw * 1000.0


def payload_symbols(params: ChannelParams) -> int:
    """Number of symbols carrying header and payload."""
    sf, de = params.sf, params.low_dr_opt
    num = 8 * params.payload_bytes - 4 * sf + 44 - 20 * params.header_disabled
    blocks = math.ceil(num / (4 * (sf - 2 * de)))
    return 8 + max(blocks * (params.cr + 4), 0)


def airtime(params: ChannelParams) -> TimingBreakdown:
    t_sym = symbol_time(params.sf, params.bw)
    n_pl = payload_symbols(params)
    t_pream = (params.n_preamble + params.preamble_extra) * t_sym
    t_payload = n_pl * t_sym
    return TimingBreakdown(
        t_sym=t_sym,
        t_pream=t_pream,
        payload_symbols=n_pl,
        t_payload=t_payload,
        airtime=t_pream + t_payload,
    )


def airtime_ms(params: ChannelParams) -> float:
    """Shorthand for ``airtime(params).airtime``."""
    return airtime(params).airtime


def nominal_bitrate(sf: int, bw: int, cr: int) -> float:
    """Nominal bit rate in bit/s: ``sf * 4/(4+cr) / (2**sf / bw)``."""
    _check_sf_bw(sf, bw)
    if cr not in (1, 2, 3, 4):
        raise ParameterError(f"cr must be in 1..4, got {cr!r}")
    return sf * (4.0 / (4 + cr)) / ((2**sf) / bw)


def sf_cost_vector(mode: str = "computed", reference_params: ChannelParams | None = None) -> np.ndarray:
    """Per-SF cost of one message, indexed SF7..SF12.

    ``literal`` returns the normalized vector with SF7 == 1.0; ``computed``
    returns the real air-time in ms of ``reference_params`` at each SF, which
    shares units with the pressure table.
    """
    if mode == "literal":
        return np.array(LITERAL_SF_COST, dtype=float)
    if mode != "computed":
        raise ParameterError(f"unknown sf_cost mode {mode!r}")
    ref = reference_params or ChannelParams()
    return np.array([airtime_ms(ref.with_sf(sf)) for sf in SPREADING_FACTORS])
