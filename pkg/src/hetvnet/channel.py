"""Radio propagation and rate model for the multi-RAT band catalog.

Log-distance path loss, log-normal shadowing, Rayleigh (exponential-power)
fast fading, SINR accounting with single-band interference coupling, and
Shannon capacity.  All stochastic draws come from explicit rng streams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# Reference distance for the log-distance model.
PL_REF_DISTANCE_M = 10.0
MIN_DISTANCE_M = 1.0

# Thermal noise spectral density.
NOISE_DBM_PER_HZ = -174.0


class RatKind(enum.Enum):
    CELLULAR_SUBBAND = "cellular"
    DSRC = "dsrc"
    WIFI_AP = "wifi"
    TV_WHITE_SPACE = "tvws"


@dataclass(frozen=True)
class RatParams:
    """Propagation parameters of one radio access technology."""
    carrier_hz: float
    bandwidth_hz: float
    alpha: float          # path-loss exponent
    pl0_db: float         # path loss at the reference distance
    shadow_sigma_db: float


# Defaults chosen so path-loss severity is ordered by carrier frequency,
# which creates the short-range-vs-cellular trade-off the agents explore.
DEFAULT_RAT_PARAMS: dict[RatKind, RatParams] = {
    RatKind.CELLULAR_SUBBAND: RatParams(2.0e9, 1.0e6, 3.0, 60.0, 8.0),
    RatKind.DSRC: RatParams(5.9e9, 10.0e6, 2.8, 63.0, 4.0),
    RatKind.WIFI_AP: RatParams(5.0e9, 20.0e6, 3.2, 62.0, 6.0),
    RatKind.TV_WHITE_SPACE: RatParams(600.0e6, 6.0e6, 2.5, 50.0, 6.0),
}


@dataclass(frozen=True)
class TvwsOccupancy:
    """Two-state Markov chain for the white-space primary user (per slot)."""
    p_off_to_on: float = 0.05
    p_on_to_off: float = 0.1

    def stationary_on(self) -> float:
        total = self.p_off_to_on + self.p_on_to_off
        return self.p_off_to_on / total if total > 0 else 0.0


@dataclass(frozen=True)
class Band:
    """One selectable radio resource."""
    index: int
    rat: RatKind
    params: RatParams
    wifi_ap_index: Optional[int] = None       # WIFI_AP only
    tvws_occupancy: Optional[TvwsOccupancy] = None  # TV_WHITE_SPACE only
    cellular_subband: Optional[int] = None     # CELLULAR_SUBBAND only

    @property
    def bandwidth_hz(self) -> float:
        return self.params.bandwidth_hz

    def noise_watts(self) -> float:
        return noise_power_watts(self.params.bandwidth_hz)


def build_band_catalog(
    num_cellular: int,
    num_wifi_aps: int,
    rat_params: Optional[dict[RatKind, RatParams]] = None,
    tvws_occupancy: TvwsOccupancy = TvwsOccupancy(),
    include_dsrc: bool = True,
    include_tvws: bool = True,
) -> tuple[Band, ...]:
    """Catalog layout: M cellular sub-bands, DSRC, one band per Wi-Fi AP, TVWS."""
    params = dict(DEFAULT_RAT_PARAMS)
    if rat_params:
        params.update(rat_params)
    bands = []
    for m in range(num_cellular):
        bands.append(Band(index=len(bands), rat=RatKind.CELLULAR_SUBBAND,
                          params=params[RatKind.CELLULAR_SUBBAND], cellular_subband=m))
    if include_dsrc:
        bands.append(Band(index=len(bands), rat=RatKind.DSRC, params=params[RatKind.DSRC]))
    for a in range(num_wifi_aps):
        bands.append(Band(index=len(bands), rat=RatKind.WIFI_AP,
                          params=params[RatKind.WIFI_AP], wifi_ap_index=a))
    if include_tvws:
        bands.append(Band(index=len(bands), rat=RatKind.TV_WHITE_SPACE,
                          params=params[RatKind.TV_WHITE_SPACE],
                          tvws_occupancy=tvws_occupancy))
    return tuple(bands)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0 if watts > 0 else -math.inf


def noise_power_watts(bandwidth_hz: float) -> float:
    return dbm_to_watts(NOISE_DBM_PER_HZ) * bandwidth_hz


def path_loss(rat: RatParams, distance_m: float) -> float:
    """Log-distance path loss in dB; distance clamped to 1 m."""
    d = max(distance_m, MIN_DISTANCE_M)
    return rat.pl0_db + 10.0 * rat.alpha * math.log10(d / PL_REF_DISTANCE_M)


def sample_shadowing(rng: np.random.Generator, sigma_db: float) -> float:
    """Zero-mean log-normal shadowing term in dB (one draw per link-band-episode)."""
    if sigma_db < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_db}")
    return float(rng.normal(0.0, sigma_db)) if sigma_db > 0 else 0.0


def sample_fast_fading(rng: np.random.Generator, size=None):
    """Rayleigh small-scale fading as a linear power gain, unit mean."""
    draw = rng.exponential(1.0, size=size)
    return float(draw) if size is None else draw


@dataclass(frozen=True)
class ChannelGain:
    path_loss_db: float
    shadowing_db: float
    fast_fading_db: float

    @property
    def linear(self) -> float:
        return 10.0 ** (-(self.path_loss_db + self.shadowing_db - self.fast_fading_db) / 10.0)


@dataclass(frozen=True)
class Transmission:
    """One concurrent transmission as seen by a receiver."""
    tx_id: int
    band_index: int
    power_watts: float
    gain: float   # linear power gain from this transmitter to the receiver


@dataclass(frozen=True)
class SinrReport:
    signal_watts: float
    interference_watts: float
    noise_watts: float

    @property
    def sinr(self) -> float:
        return self.signal_watts / (self.interference_watts + self.noise_watts)


def compute_sinr(own_tx_id: int, band: Band, transmissions: Sequence[Transmission]) -> SinrReport:
    """SINR at a receiver whose own transmitter is `own_tx_id` on `band`.

    Same-band transmissions from other transmitters add up as interference;
    entries on other band indices contribute nothing (orthogonal bands).
    """
    signal = None
    interference = 0.0
    for t in transmissions:
        if t.power_watts < 0:
            raise ValueError(f"negative transmit power: {t.power_watts}")
        if t.tx_id == own_tx_id and t.band_index == band.index:
            if signal is not None:
                raise ValueError(f"duplicate own-signal entry for transmitter {own_tx_id}")
            signal = t.power_watts * t.gain
        elif t.band_index == band.index:
            interference += t.power_watts * t.gain
    if signal is None:
        raise ValueError(f"transmissions list lacks the own-signal entry (tx {own_tx_id})")
    return SinrReport(signal_watts=signal, interference_watts=interference,
                      noise_watts=band.noise_watts())


def capacity(sinr: float, bandwidth_hz: float) -> float:
    """Shannon rate in bits/second."""
    if sinr < 0:
        raise ValueError(f"sinr must be >= 0, got {sinr}")
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz}")
    return bandwidth_hz * math.log2(1.0 + sinr)


def band_available(band: Band, tx_vehicle_id: int, scenario, tvws_on: bool) -> bool:
    """Whether a V2V transmitter may use this band right now.

    Cellular and DSRC are always usable; a Wi-Fi AP band needs both link
    endpoints inside the AP's coverage circle; TVWS needs the primary OFF.
    """
    if band.rat in (RatKind.CELLULAR_SUBBAND, RatKind.DSRC):
        return True
    if band.rat is RatKind.TV_WHITE_SPACE:
        return not tvws_on
    # Wi-Fi: locate this transmitter's link endpoints
    from .topology import pairwise_distance

    rx_id = None
    for tx, rx in scenario.v2v_links:
        if tx == tx_vehicle_id:
            rx_id = rx
            break
    if rx_id is None:
        return False
    ap = scenario.wifi_aps[band.wifi_ap_index]
    r = scenario.wifi_radius_m
    tx_pos = scenario.vehicles[tx_vehicle_id].position
    rx_pos = scenario.vehicles[rx_id].position
    return pairwise_distance(tx_pos, ap) <= r and pairwise_distance(rx_pos, ap) <= r
