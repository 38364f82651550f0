"""Operator networks, serving-cell handover and per-link delay composition."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Tuple

import numpy as np

# samples over which a handover spike decays to zero
SPIKE_DECAY_SAMPLES = 3


@dataclass(frozen=True)
class CellSite:
    operator_id: int
    lat: float
    lon: float
    ref_power: float

    def __post_init__(self):
        if self.operator_id not in (1, 2, 3):
            raise ValueError(f"operator_id must be 1, 2 or 3, got {self.operator_id}")
        if not -70.0 <= self.ref_power <= -40.0:
            raise ValueError(f"ref_power {self.ref_power} dBm outside [-70, -40]")


@dataclass(frozen=True)
class OperatorNetwork:
    """One operator's sites and link-delay calibration.

    Link delay = ``base_delay`` + per-kind offset + signal-quality penalty
    + mobility penalty + lognormal jitter + handover spike residue. The
    quality penalty grows linearly once SNR drops below ``quality_knee_snr``;
    the mobility penalty is proportional to train speed.
    """

    sites: Tuple[CellSite, ...]
    base_delay: float = 20.0
    jitter_scale: float = 4.0
    handover_spike_mean: float = 300.0
    handover_hysteresis: float = 3.0
    shadowing_sigma: float = 6.0
    shadowing_corr: float = 0.9
    jitter_sigma: float = 0.6
    quality_ms_per_db: float = 0.0
    quality_knee_snr: float = 25.0
    mobility_ms_per_kmh: float = 0.0
    outage_rsrp: float = -140.0

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if not self.sites:
            raise ValueError("an operator needs at least one site")
        if not self.base_delay > 0:
            raise ValueError("base_delay must be > 0")
        if self.jitter_scale < 0 or self.handover_spike_mean < 0:
            raise ValueError("jitter_scale and handover_spike_mean must be >= 0")
        if not 0 <= self.shadowing_corr < 1:
            raise ValueError("shadowing_corr must lie in [0, 1)")
        if self.shadowing_sigma < 0 or self.handover_hysteresis < 0:
            raise ValueError("shadowing_sigma and handover_hysteresis must be >= 0")
        ids = {s.operator_id for s in self.sites}
        if len(ids) != 1:
            raise ValueError("all sites of an operator must share its operator_id")

    @property
    def operator_id(self) -> int:
        return self.sites[0].operator_id

    def quality_penalty(self, snr):
        if snr is None:
            return 0.0
        return self.quality_ms_per_db * np.maximum(0.0, self.quality_knee_snr - np.asarray(snr))

    def mobility_penalty(self, speed):
        return self.mobility_ms_per_kmh * np.asarray(speed)


@dataclass(frozen=True)
class LinkState:
    """Radio state of one operator link."""

    serving: int
    shadow: float = 0.0
    handover_pending: float = 0.0
    spike_amplitude: float = 0.0

    def advance(self) -> "LinkState":
        """Decay the spike residue by one sample."""
        if self.handover_pending <= 0.0:
            return self
        step = self.spike_amplitude / SPIKE_DECAY_SAMPLES
        remaining = self.handover_pending - step
        if remaining <= 1e-9 * max(self.spike_amplitude, 1.0):
            return replace(self, handover_pending=0.0, spike_amplitude=0.0)
        return replace(self, handover_pending=remaining)


def update_serving(state: LinkState, rsrp, hysteresis: float,
                   spike_mean: float = 0.0, rng=None):
    """Re-evaluate the serving site from per-site RSRP.

    Switches to the strongest site only if it beats the current serving
    site by more than ``hysteresis`` dB. A switch charges an exponentially
    distributed spike of mean ``spike_mean`` ms. Returns
    ``(new_state, handover_occurred)``.
    """
    rsrp = np.asarray(rsrp, dtype=float)
    if rsrp.size == 0:
        raise ValueError("update_serving needs at least one site")
    best = int(np.argmax(rsrp))
    if best != state.serving and rsrp[best] > rsrp[state.serving] + hysteresis:
        spike = 0.0
        if spike_mean > 0:
            spike = float(np.random.default_rng(rng).exponential(spike_mean))
        return LinkState(best, state.shadow, spike, spike), True
    return state, False


def compose_delay(base, offset, jitter_scale, jitter_sigma, z, residue=0.0,
                  penalty=0.0):
    """Link delay from its components; ``z`` is a standard-normal draw (or array)."""
    jitter = jitter_scale * np.exp(jitter_sigma * np.asarray(z))
    return base + offset + penalty + jitter + residue


def link_delay(operator: OperatorNetwork, state: LinkState, kind, rng,
               offsets: Optional[Mapping] = None, *, snr: Optional[float] = None,
               speed: float = 0.0) -> float:
    """One-way delay in ms of ``operator``'s link for one sample of ``kind``.

    ``offsets`` maps delay kinds to the scenario's additive service times;
    ``snr`` and ``speed`` feed the quality and mobility penalties (none when
    ``snr`` is None and ``speed`` is 0).
    """
    offset = (offsets or {}).get(kind, 0.0)
    z = rng.standard_normal() if operator.jitter_scale > 0 else 0.0
    penalty = operator.quality_penalty(snr) + operator.mobility_penalty(speed)
    value = compose_delay(operator.base_delay, offset, operator.jitter_scale,
                          operator.jitter_sigma, z, state.handover_pending, penalty)
    return float(value)
