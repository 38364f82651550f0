"""Log-distance propagation and the KPI maps derived from received power."""

import numpy as np

PATH_LOSS_EXPONENT = 3.5
REFERENCE_DISTANCE_M = 100.0
RSRP_MIN, RSRP_MAX = -140.0, -40.0
RSRQ_MIN, RSRQ_MAX = -20.0, -3.0
SNR_MIN, SNR_MAX = -10.0, 40.0

EARTH_RADIUS_M = 6_371_008.8


def path_rsrp(ref_power, distance, shadow=0.0):
    """Received power in dBm at ``distance`` metres, clamped to the LTE reporting range.

    Works elementwise on arrays.
    """
    d = np.maximum(np.asarray(distance, dtype=float), REFERENCE_DISTANCE_M)
    loss = 10.0 * PATH_LOSS_EXPONENT * np.log10(d / REFERENCE_DISTANCE_M)
    out = np.clip(ref_power - loss + shadow, RSRP_MIN, RSRP_MAX)
    return float(out) if np.ndim(out) == 0 else out


def rsrq_from_rsrp(rsrp, noise=0.0):
    return np.clip(-3.0 - (-40.0 - np.asarray(rsrp)) / 10.0 + noise, RSRQ_MIN, RSRQ_MAX)


def snr_from_rsrp(rsrp, noise=0.0):
    return np.clip((np.asarray(rsrp) + 110.0) / 2.0 + noise, SNR_MIN, SNR_MAX)


def haversine_m(lat1, lon1, lat2, lon2):
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dlat = p2 - p1
    dlon = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dlat / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))
