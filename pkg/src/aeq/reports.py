"""Verdict objects, decay policies, and deterministic CSV/JSON output.

Output files are golden-file friendly: floats are written as their shortest
round-trip decimal, JSON keys are sorted, and nothing time- or host-
dependent is ever emitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

#: default PASS threshold for decay verdicts; the underlying theory proves
#: limits, not rates, so this is engineering policy, not a derived constant.
DEFAULT_CHECK_TOL = 1e-4


@dataclass
class Verdict:
    """PASS/FAIL outcome of one named condition."""

    condition: str
    passed: bool
    worst_value: float
    at_t: float
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {"condition": self.condition, "pass": bool(self.passed),
               "worst_value": _jsonable(self.worst_value), "at_t": _jsonable(self.at_t)}
        for key, val in self.extra.items():
            out[key] = _jsonable(val)
        return out


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def decade_windows(times, values):
    """(late max, mid max, argmax time of late window).

    Late window is the final tenth of the span, mid window sits around the
    half point; comparing the two is the documented finite-horizon proxy
    for "decreasing over the last decade".
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    span = times[-1] - times[0]
    late = times >= times[-1] - 0.1 * span
    mid = (times >= times[0] + 0.45 * span) & (times <= times[0] + 0.5 * span)
    if not mid.any():
        mid = late
    late_vals = values[late]
    i = int(np.argmax(late_vals))
    return float(late_vals[i]), float(values[mid].max()), float(times[late][i])


def decay_verdict(condition, times, values, tol, strict=False, extra=None) -> Verdict:
    """PASS iff the late-window max is below tol and not above the mid-window max."""
    late, mid, at_t = decade_windows(times, values)
    decreasing = late < mid if strict else late <= mid
    verdict = Verdict(condition=condition, passed=bool(late < tol and decreasing),
                      worst_value=late, at_t=at_t, extra=extra or {})
    verdict.extra.setdefault("mid_window_max", mid)
    verdict.extra.setdefault("tol", tol)
    return verdict


def fmt_float(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def write_csv(path, header, columns):
    columns = [np.asarray(c) for c in columns]
    if len({len(c) for c in columns}) > 1:
        raise ValueError("CSV columns differ in length")
    lines = [",".join(header)]
    for i in range(len(columns[0])):
        lines.append(",".join(fmt_float(c[i]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def verdicts_to_json(name, params, verdicts):
    return {"scenario": name,
            "params": _jsonable(params),
            "verdicts": [v.to_json() for v in verdicts],
            "all_pass": bool(all(v.passed for v in verdicts))}
