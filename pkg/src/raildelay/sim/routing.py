"""Multi-operator routers: packet replication and best-quality selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


def route_pr(link_delays: Sequence[Optional[float]]) -> Optional[float]:
    """First arrival across replicated links.

    Unavailable links are ``None`` or NaN; returns ``None`` (a gap) when no
    link delivered.
    """
    available = [d for d in link_delays if d is not None and not math.isnan(d)]
    if not available:
        return None
    return min(available)


@dataclass(frozen=True)
class RouterState:
    """Operator chosen at the last assessment (0-based index) and when."""

    selected: int
    assessed_at: float


def route_bq(link_delays, rsrp, router_state: Optional[RouterState], t: float,
             assessment_period: float = 5.0, assessment_overhead: float = 20.0):
    """Best-quality routing for one sample at time ``t``.

    At assessment instants (``t`` a multiple of the period, or the first
    call) the operator with the strongest RSRP is selected (ties to the
    lowest index) and the sample pays ``assessment_overhead``. Between
    assessments the previous choice is kept however conditions change.
    Returns ``(delay or None, router_state)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    assess = router_state is None or t % assessment_period == 0
    if assess:
        router_state = RouterState(int(np.argmax(np.asarray(rsrp, dtype=float))), t)
    delay = link_delays[router_state.selected]
    if delay is None or math.isnan(delay):
        return None, router_state
    if assess:
        delay = delay + assessment_overhead
    return delay, router_state
