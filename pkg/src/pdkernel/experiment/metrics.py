"""Error metrics between solver time series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..solvers import TimeSeries

ARRIVAL_THRESHOLD = 0.05


def arrival_time(t, values, threshold: float = ARRIVAL_THRESHOLD) -> float:
    """First time |values| crosses threshold * peak; NaN for a silent series."""
    t = np.asarray(t, dtype=float)
    mag = np.abs(np.asarray(values, dtype=float))
    peak = float(np.max(mag)) if len(mag) else 0.0
    if peak == 0.0:
        return math.nan
    idx = int(np.argmax(mag >= threshold * peak))
    return float(t[idx])


@dataclass(frozen=True)
class MethodMetrics:
    """Errors of one test series against the reference."""

    rel_l2: float
    peak_error: float
    arrival_error: float
    wall_clock: float = 0.0

    def __post_init__(self):
        if self.rel_l2 < 0.0 or self.peak_error < 0.0:
            raise ValueError("errors must be nonnegative")


@dataclass
class ComparisonReport:
    """Aligned-metric summary of a multi-method comparison run."""

    reference: str = "resolved_fem"
    metrics: dict[str, MethodMetrics] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"reference = {self.reference}"]
        for method, m in self.metrics.items():
            lines.append(f"{method}.rel_l2 = {m.rel_l2:.6e}")
            lines.append(f"{method}.peak_error = {m.peak_error:.6e}")
            lines.append(f"{method}.arrival_error = {m.arrival_error:.6e}")
            lines.append(f"{method}.wall_clock = {m.wall_clock:.6e}")
        return "\n".join(lines) + "\n"


def _common_window(t_ref, t_test):
    start = max(t_ref[0], t_test[0])
    end = min(t_ref[-1], t_test[-1])
    if start > end:
        raise ConfigError(
            f"series time windows are disjoint: [{t_ref[0]}, {t_ref[-1]}] vs "
            f"[{t_test[0]}, {t_test[-1]}]")
    return start, end


def compare(reference: TimeSeries, test: TimeSeries, probe: int = 0,
            wall_clock: float = 0.0) -> MethodMetrics:
    """Error metrics of ``test`` against ``reference`` at one probe.

    The test series is resampled onto the reference grid by linear
    interpolation over the common time window.
    """
    t_ref = np.asarray(reference.t, dtype=float)
    y_ref = np.asarray(reference.values, dtype=float)[:, probe]
    t_test = np.asarray(test.t, dtype=float)
    y_test = np.asarray(test.values, dtype=float)[:, probe]
    start, end = _common_window(t_ref, t_test)
    mask = (t_ref >= start) & (t_ref <= end)
    tw = t_ref[mask]
    rw = y_ref[mask]
    tw_test = np.interp(tw, t_test, y_test)

    ref_norm = float(np.linalg.norm(rw))
    diff_norm = float(np.linalg.norm(tw_test - rw))
    if ref_norm == 0.0:
        rel_l2 = 0.0 if diff_norm == 0.0 else math.inf
    else:
        rel_l2 = diff_norm / ref_norm

    ref_peak = float(np.max(np.abs(rw)))
    test_peak = float(np.max(np.abs(tw_test)))
    peak_error = (abs(test_peak - ref_peak) / ref_peak if ref_peak > 0.0
                  else (0.0 if test_peak == 0.0 else math.inf))

    t_arr_ref = arrival_time(tw, rw)
    t_arr_test = arrival_time(tw, tw_test)
    if math.isnan(t_arr_ref) or math.isnan(t_arr_test):
        arrival_error = math.nan
    else:
        arrival_error = abs(t_arr_test - t_arr_ref)

    return MethodMetrics(rel_l2=rel_l2, peak_error=peak_error,
                         arrival_error=arrival_error, wall_clock=wall_clock)
