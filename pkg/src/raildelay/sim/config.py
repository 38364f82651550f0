"""Sectioned key-value scenario files.

Unknown sections or keys are errors so that a misspelt calibration constant
cannot be silently ignored. ``SCHEMA`` is the printed reference.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from importlib import resources

import numpy as np

from ..data import DEFAULT_BOUNDARY_LON, DelayKind
from .network import CellSite, OperatorNetwork
from .scenario import (DEFAULT_DELAY_OFFSETS, ScenarioConfig, ScenarioError,
                       SiteLayout, Track, TrainRun, place_sites)

SEED_ENV = "RAILDELAY_SEED"

SCHEMA = """\
[seed]
value                     64-bit unsigned seed for all random draws (RAILDELAY_SEED overrides)

[track]
vertices                  "lat lon; lat lon; ..." polyline, at least 2 vertices
boundary_lon              east/west split longitude in degrees (default 25.5)
layout_seed               seed for generated site layouts (default 1)

[operator.1] [operator.2] [operator.3]
base_delay_ms             fixed link delay (> 0)
jitter_scale_ms           median of the lognormal jitter (>= 0)
jitter_sigma              log-scale spread of the jitter (default 0.6)
handover_spike_mean_ms    mean of the exponential handover spike (>= 0)
handover_hysteresis_db    margin a new site must exceed to take over
shadowing_sigma_db        stationary std-dev of AR(1) shadowing
shadowing_corr            per-second AR(1) coefficient in [0, 1)
quality_ms_per_db         delay added per dB of SNR below the knee
quality_knee_snr_db       SNR above which no quality penalty applies
mobility_ms_per_kmh       delay added per km/h of train speed
outage_rsrp_dbm           link unavailable below this RSRP (default -140)
sites                     explicit "lat lon ref_dbm; ..." list, or generate with:
site_spacing_km           distance between consecutive sites along the track
site_offset_min_m         minimum lateral site offset from the track
site_offset_max_m         maximum lateral site offset from the track
ref_power_dbm             mean reference power at 100 m, within [-70, -40]
ref_power_spread_db       uniform +/- spread of reference power
east_ref_power_offset_db  reference power shift for sites east of boundary_lon

[run]
duration_s                run length in seconds (1 s sampling)
start_km                  starting chainage
speed_profile             "seconds@kmh, seconds@kmh, ..." piecewise-constant speeds

[routing]
assessment_period_s       best-quality reassessment interval (default 5)
assessment_overhead_ms    delay added to samples at assessment instants (default 20)

[delays]
position_ms ma_ms tcp_ms http_ms dns_ms   additive per-kind service time
"""

_OPERATOR_KEYS = {
    "base_delay_ms": "base_delay",
    "jitter_scale_ms": "jitter_scale",
    "jitter_sigma": "jitter_sigma",
    "handover_spike_mean_ms": "handover_spike_mean",
    "handover_hysteresis_db": "handover_hysteresis",
    "shadowing_sigma_db": "shadowing_sigma",
    "shadowing_corr": "shadowing_corr",
    "quality_ms_per_db": "quality_ms_per_db",
    "quality_knee_snr_db": "quality_knee_snr",
    "mobility_ms_per_kmh": "mobility_ms_per_kmh",
    "outage_rsrp_dbm": "outage_rsrp",
}
_LAYOUT_KEYS = {
    "site_spacing_km": "spacing_km",
    "site_offset_min_m": "offset_min_m",
    "site_offset_max_m": "offset_max_m",
    "ref_power_dbm": "ref_power",
    "ref_power_spread_db": "ref_power_spread",
    "east_ref_power_offset_db": "east_ref_power_offset",
}
_ALLOWED = {
    "seed": {"value"},
    "track": {"vertices", "boundary_lon", "layout_seed"},
    "run": {"duration_s", "start_km", "speed_profile"},
    "routing": {"assessment_period_s", "assessment_overhead_ms"},
    "delays": {f"{k.key}_ms" for k in DelayKind},
    **{f"operator.{i}": set(_OPERATOR_KEYS) | set(_LAYOUT_KEYS) | {"sites"}
       for i in (1, 2, 3)},
}
_REQUIRED_SECTIONS = ("seed", "track", "operator.1", "operator.2", "operator.3", "run")


def _float(section, key, text):
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(f"[{section}] {key}: not a number: {text!r}") from None


def _int(section, key, text):
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(f"[{section}] {key}: not an integer: {text!r}") from None


def _items(text):
    return [part.strip() for part in text.replace("\n", ";").split(";") if part.strip()]


def _parse_vertices(text):
    out = []
    for item in _items(text):
        parts = item.split()
        if len(parts) != 2:
            raise ScenarioError(f"[track] vertices: expected 'lat lon', got {item!r}")
        out.append((_float("track", "vertices", parts[0]), _float("track", "vertices", parts[1])))
    return out


def _parse_profile(text):
    segs = []
    for item in text.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        if "@" not in item:
            raise ScenarioError(f"[run] speed_profile: expected 'seconds@kmh', got {item!r}")
        dur, spd = item.split("@", 1)
        segs.append((_float("run", "speed_profile", dur), _float("run", "speed_profile", spd)))
    return segs


def parse_config(text: str, seed_override=None) -> ScenarioConfig:
    """Build a ScenarioConfig from config text.

    ``seed_override`` wins over the file; otherwise ``RAILDELAY_SEED`` from
    the environment wins over the file.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"unreadable config: {exc}") from None

    for section in parser.sections():
        if section not in _ALLOWED:
            raise ScenarioError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _ALLOWED[section]
        if unknown:
            raise ScenarioError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
    for section in _REQUIRED_SECTIONS:
        if not parser.has_section(section):
            raise ScenarioError(f"missing section [{section}]")

    seed = _int("seed", "value", parser["seed"].get("value", "0"))
    env = os.environ.get(SEED_ENV)
    if seed_override is not None:
        seed = int(seed_override)
    elif env:
        seed = _int(SEED_ENV, "value", env)

    tr = parser["track"]
    if "vertices" not in tr:
        raise ScenarioError("[track] vertices is required")
    track = Track(tuple(_parse_vertices(tr["vertices"])))
    boundary = _float("track", "boundary_lon", tr.get("boundary_lon", str(DEFAULT_BOUNDARY_LON)))
    layout_seed = _int("track", "layout_seed", tr.get("layout_seed", "1"))
    layout_streams = np.random.SeedSequence(layout_seed).spawn(3)

    operators = []
    for i in (1, 2, 3):
        name = f"operator.{i}"
        sec = parser[name]
        kwargs = {field: _float(name, key, sec[key])
                  for key, field in _OPERATOR_KEYS.items() if key in sec}
        if "sites" in sec:
            if any(k in sec for k in _LAYOUT_KEYS):
                raise ScenarioError(f"[{name}] give either sites or a site layout, not both")
            sites = []
            for item in _items(sec["sites"]):
                parts = item.split()
                if len(parts) != 3:
                    raise ScenarioError(f"[{name}] sites: expected 'lat lon ref_dbm', got {item!r}")
                lat_s, lon_s, ref_s = (_float(name, "sites", p) for p in parts)
                sites.append(CellSite(i, lat_s, lon_s, ref_s))
        else:
            layout = SiteLayout(**{field: _float(name, key, sec[key])
                                   for key, field in _LAYOUT_KEYS.items() if key in sec})
            sites = place_sites(track, layout, i, layout_streams[i - 1], boundary)
        try:
            operators.append(OperatorNetwork(tuple(sites), **kwargs))
        except ValueError as exc:
            raise ScenarioError(f"[{name}] {exc}") from None

    rn = parser["run"]
    for key in ("duration_s", "speed_profile"):
        if key not in rn:
            raise ScenarioError(f"[run] {key} is required")
    run = TrainRun(tuple(_parse_profile(rn["speed_profile"])),
                   _int("run", "duration_s", rn["duration_s"]),
                   _float("run", "start_km", rn.get("start_km", "0")))

    routing = parser["routing"] if parser.has_section("routing") else {}
    offsets = {}
    delays = parser["delays"] if parser.has_section("delays") else {}
    for kind in DelayKind:
        key = f"{kind.key}_ms"
        offsets[kind] = (_float("delays", key, delays[key]) if key in delays
                         else DEFAULT_DELAY_OFFSETS[kind])

    return ScenarioConfig(
        track=track,
        operators=tuple(operators),
        run=run,
        assessment_period=_int("routing", "assessment_period_s",
                               routing.get("assessment_period_s", "5")),
        assessment_overhead=_float("routing", "assessment_overhead_ms",
                                   routing.get("assessment_overhead_ms", "20")),
        delay_kind_offsets=offsets,
        seed=seed,
        boundary_lon=boundary,
    )


def load_config(path, seed_override=None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), seed_override)


def default_config_text() -> str:
    return resources.files("raildelay").joinpath("scenarios/default.ini").read_text("utf-8")


def default_scenario(seed_override=None) -> ScenarioConfig:
    """The bundled calibrated scenario (20,000 s run)."""
    return parse_config(default_config_text(), seed_override)


def _num(x):
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def dump_config(config: ScenarioConfig) -> str:
    """Fully resolved config text (explicit sites); parses back to an equal scenario."""
    lines = ["[seed]", f"value = {config.seed}", "", "[track]",
             "vertices = " + "; ".join(f"{_num(a)} {_num(b)}" for a, b in config.track.vertices),
             f"boundary_lon = {_num(config.boundary_lon)}", ""]
    for i, op in enumerate(config.operators, start=1):
        lines.append(f"[operator.{i}]")
        for key, field in _OPERATOR_KEYS.items():
            lines.append(f"{key} = {_num(getattr(op, field))}")
        lines.append("sites = " + "; ".join(
            f"{_num(s.lat)} {_num(s.lon)} {_num(s.ref_power)}" for s in op.sites))
        lines.append("")
    lines += ["[run]", f"duration_s = {config.run.duration}",
              f"start_km = {_num(config.run.start_km)}",
              "speed_profile = " + ", ".join(f"{_num(d)}@{_num(v)}" for d, v in config.run.segments),
              "", "[routing]",
              f"assessment_period_s = {config.assessment_period}",
              f"assessment_overhead_ms = {_num(config.assessment_overhead)}", "", "[delays]"]
    for kind in DelayKind:
        lines.append(f"{kind.key}_ms = {_num(config.delay_kind_offsets[kind])}")
    return "\n".join(lines) + "\n"


def config_digest(config: ScenarioConfig) -> str:
    return hashlib.sha256(dump_config(config).encode("utf-8")).hexdigest()
