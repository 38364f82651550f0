"""Run a measurement campaign in both routing modes over one random realisation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import (Dataset, DelayKind, MeasurementRecord, Mode, OperatorKpi)
from .network import LinkState, compose_delay, update_serving
from .radio import haversine_m, path_rsrp, rsrq_from_rsrp, snr_from_rsrp
from .routing import route_bq
from .scenario import ScenarioConfig, ScenarioError

KINDS = tuple(DelayKind)

RSRQ_NOISE_DB = 0.5
SNR_NOISE_DB = 1.0


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Paired datasets plus the per-link ground truth behind them.

    ``link_delays`` has shape ``(samples, 3, 5)`` (operator, delay kind in
    ``DelayKind`` order), NaN where a link was unavailable; ``selected`` is
    the best-quality router's operator index per sample.
    """

    bq: Dataset
    pr: Dataset
    link_delays: np.ndarray
    selected: np.ndarray
    handovers: np.ndarray
    timestamps: np.ndarray


def _shadow_series(rng, n, sigma, corr):
    z = rng.standard_normal(n)
    out = np.empty(n)
    if n == 0:
        return out
    innov = sigma * np.sqrt(1.0 - corr * corr)
    out[0] = sigma * z[0]
    for t in range(1, n):
        out[t] = corr * out[t - 1] + innov * z[t]
    return out


def run_simulation(config: ScenarioConfig) -> SimulationResult:
    run, track = config.run, config.track
    t_all = np.arange(run.duration, dtype=float)
    chain = run.chainage_at(t_all)
    # run truncates once the train reaches the end of the track
    n = int(np.searchsorted(chain, track.length_km, side="right"))
    if n == 0:
        raise ScenarioError("train run never lies on the track")
    t = t_all[:n]
    chain = chain[:n]
    speed = run.speed_at(t)
    lat, lon = track.position(chain)

    streams = np.random.SeedSequence(config.seed).spawn(3 * 4)
    n_ops = 3
    rsrp = np.empty((n, n_ops))
    rsrq = np.empty((n, n_ops))
    snr = np.empty((n, n_ops))
    residue = np.zeros((n, n_ops))
    handovers = np.zeros(n_ops, dtype=int)
    jitter_z = np.empty((n, n_ops, len(KINDS)))

    for j, op in enumerate(config.operators):
        shadow_rng, kpi_rng, spike_rng, jitter_rng = (
            np.random.default_rng(s) for s in streams[4 * j: 4 * j + 4])
        site_lat = np.array([s.lat for s in op.sites])
        site_lon = np.array([s.lon for s in op.sites])
        site_ref = np.array([s.ref_power for s in op.sites])
        dist = haversine_m(lat[:, None], lon[:, None], site_lat[None, :], site_lon[None, :])
        shadow = _shadow_series(shadow_rng, n, op.shadowing_sigma, op.shadowing_corr)
        # shadowing is common to all sites of the operator, so it never
        # changes which site is strongest
        geo = path_rsrp(site_ref[None, :], dist, 0.0)
        state = LinkState(int(np.argmax(geo[0])), float(shadow[0]))
        for i in range(n):
            if i > 0:
                state = state.advance()
                state, switched = update_serving(
                    state, geo[i], op.handover_hysteresis,
                    op.handover_spike_mean, spike_rng)
                handovers[j] += switched
            s = state.serving
            rsrp[i, j] = path_rsrp(site_ref[s], dist[i, s], shadow[i])
            residue[i, j] = state.handover_pending
        noise = kpi_rng.standard_normal((n, 2))
        rsrp[:, j] = np.round(rsrp[:, j], 1)
        rsrq[:, j] = np.round(rsrq_from_rsrp(rsrp[:, j], RSRQ_NOISE_DB * noise[:, 0]), 1)
        snr[:, j] = np.round(snr_from_rsrp(rsrp[:, j], SNR_NOISE_DB * noise[:, 1]), 1)
        jitter_z[:, j, :] = jitter_rng.standard_normal((n, len(KINDS)))

    links = np.empty((n, n_ops, len(KINDS)))
    for j, op in enumerate(config.operators):
        penalty = op.quality_penalty(snr[:, j]) + op.mobility_penalty(speed)
        for k, kind in enumerate(KINDS):
            links[:, j, k] = compose_delay(
                op.base_delay, config.delay_kind_offsets[kind], op.jitter_scale,
                op.jitter_sigma, jitter_z[:, j, k], residue[:, j], penalty)
        links[rsrp[:, j] < op.outage_rsrp, j, :] = np.nan
    links = np.round(links, 2)

    # packet replication: first arrival among available links
    with np.errstate(invalid="ignore"):
        pr = np.where(np.all(np.isnan(links), axis=1), np.nan,
                      np.nanmin(np.where(np.isnan(links), np.inf, links), axis=1))

    bq = np.full((n, len(KINDS)), np.nan)
    selected = np.empty(n, dtype=int)
    router = None
    for i in range(n):
        for k in range(len(KINDS)):
            delay, router = route_bq(links[i, :, k], rsrp[i], router, t[i],
                                     config.assessment_period,
                                     config.assessment_overhead)
            if delay is not None:
                bq[i, k] = round(delay, 2)
        selected[i] = router.selected

    records = {Mode.BEST_QUALITY: [], Mode.PACKET_REPLICATION: []}
    for i in range(n):
        kpis = tuple(OperatorKpi(float(rsrp[i, j]), float(rsrq[i, j]), float(snr[i, j]))
                     for j in range(n_ops))
        base = dict(timestamp=float(t[i]), lat=round(float(lat[i]), 6),
                    lon=round(float(lon[i]), 6), chainage=round(float(chain[i]), 4),
                    speed=float(speed[i]), kpis=kpis)
        for mode, values in ((Mode.BEST_QUALITY, bq), (Mode.PACKET_REPLICATION, pr)):
            delays = {}
            for k, kind in enumerate(KINDS):
                v = values[i, k]
                if kind.is_sampled_at(t[i]) and not np.isnan(v):
                    delays[kind] = float(v)
            records[mode].append(MeasurementRecord(mode=mode, delays=delays, **base))

    return SimulationResult(
        bq=Dataset(tuple(records[Mode.BEST_QUALITY]), Mode.BEST_QUALITY),
        pr=Dataset(tuple(records[Mode.PACKET_REPLICATION]), Mode.PACKET_REPLICATION),
        link_delays=links,
        selected=selected,
        handovers=handovers,
        timestamps=t,
    )


def simulate(config: ScenarioConfig):
    """Return ``(bq, pr)`` datasets sharing timestamps, positions, KPIs and link draws."""
    result = run_simulation(config)
    return result.bq, result.pr
