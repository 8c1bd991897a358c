"""
Per-RAT propagation and link budgets
====================================

Each radio access technology has its own log-distance path loss, shadowing
spread and bandwidth.  This script prints the resulting link budget for a
typical V2V distance and shows how SINR and Shannon rate respond to an
interferer appearing on the same band.
"""

import numpy as np

from hetvnet import (
    Transmission,
    build_band_catalog,
    capacity,
    compute_sinr,
    path_loss,
    sample_fast_fading,
    sample_shadowing,
)
from hetvnet.channel import dbm_to_watts, watts_to_dbm
from hetvnet.streams import substream

bands = build_band_catalog(num_cellular=4, num_wifi_aps=3)

print(f"{'band':>4} {'rat':>9} {'carrier':>9} {'BW':>7} {'PL(50m)':>8} {'noise':>10}")
for band in bands:
    pl = path_loss(band.params, 50.0)
    print(f"{band.index:>4} {band.rat.value:>9} {band.params.carrier_hz/1e9:>7.1f}GHz "
          f"{band.params.bandwidth_hz/1e6:>5.0f}MHz {pl:>7.1f}dB "
          f"{watts_to_dbm(band.noise_watts()):>8.1f}dBm")

# a 23 dBm transmission over 50 m of DSRC, averaged over fading draws
dsrc = bands[4]
rng = substream(7, "channel-demo")
p_tx = dbm_to_watts(23.0)
rates = []
for _ in range(2000):
    shadow = sample_shadowing(rng, dsrc.params.shadow_sigma_db)
    fade = sample_fast_fading(rng)
    gain = 10 ** (-(path_loss(dsrc.params, 50.0) + shadow) / 10) * fade
    report = compute_sinr(0, dsrc, [Transmission(0, dsrc.index, p_tx, gain)])
    rates.append(capacity(report.sinr, dsrc.bandwidth_hz))
print(f"\nDSRC @50m, 23 dBm: median rate {np.median(rates)/1e6:.0f} Mbps")

# the same link with a co-channel interferer 120 m away
gain_own = 10 ** (-path_loss(dsrc.params, 50.0) / 10)
gain_int = 10 ** (-path_loss(dsrc.params, 120.0) / 10)
report = compute_sinr(0, dsrc, [
    Transmission(0, dsrc.index, p_tx, gain_own),
    Transmission(1, dsrc.index, p_tx, gain_int),
])
print(f"with an interferer at 120 m: SINR {10*np.log10(report.sinr):.1f} dB, "
      f"rate {capacity(report.sinr, dsrc.bandwidth_hz)/1e6:.0f} Mbps")

# cross-band transmissions do not interfere at all
report = compute_sinr(0, dsrc, [
    Transmission(0, dsrc.index, p_tx, gain_own),
    Transmission(1, bands[0].index, p_tx, gain_int),
])
print(f"same interferer on a cellular sub-band instead: interference "
      f"{report.interference_watts:.1e} W (orthogonal)")
