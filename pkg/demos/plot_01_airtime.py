"""
Air time of a LoRa frame
========================

Each step up in spreading factor doubles the symbol time, so a 20-byte
frame at SF12 stays on air more than twenty times longer than at SF7.
"""

import numpy as np

from admaiora import ChannelParams, airtime, nominal_bitrate, sf_cost_vector

# The default channel: 125 kHz, coding rate 4/5, explicit header, 8 preamble symbols.
for sf in range(7, 13):
    t = airtime(ChannelParams(sf=sf, payload_bytes=20))
    print(f"SF{sf:<2}  T_sym {t.t_sym:7.3f} ms  payload symbols {t.payload_symbols:3d}  "
          f"air time {t.airtime:9.3f} ms  bit rate {nominal_bitrate(sf, 125_000, 1):7.1f} bit/s")

# Low data rate optimisation switches on by itself at SF11 and SF12 on 125 kHz.
print(ChannelParams(sf=11).low_dr_opt, ChannelParams(sf=11, bw=250_000).low_dr_opt)

# Relative costs used by the allocators: measured air time, or the fixed vector.
computed = sf_cost_vector("computed")
print(np.round(computed / computed[0], 2))
print(sf_cost_vector("literal"))
