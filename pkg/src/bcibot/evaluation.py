"""Session rating and the quantitative measures: run metrics, SNR, permutation test."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import GuiCommand

PHASE_MENU = "menu"
PHASE_CONFIRMATION = "confirmation"
PHASE_EXECUTING = "executing"
PHASE_INTERRUPTED = "interrupted"
PHASE_RECOVERING = "recovering"

CORRECT = "correct"
INCORRECT = "incorrect"
IGNORED = "ignored"


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class RatedEvent:
    """One decoded command with the context needed to rate it afterwards."""

    timestamp: float
    intended: GuiCommand | None
    emitted: GuiCommand
    phase: str
    # shortest remaining command count to the instructed goal, before/after the
    # emitted command was applied (menu phase only; -1 elsewhere)
    dist_before: int = -1
    dist_after: int = -1
    # the command the instructed path asks for in this state (non-menu phases)
    on_path: GuiCommand | None = None
    rating: str | None = None


@dataclass(frozen=True)
class RunLog:
    events: tuple[RatedEvent, ...]
    instructed_path: tuple[GuiCommand, ...]
    minimal_steps: int
    meta: dict = field(default_factory=dict, compare=False)

    def channel_accuracy(self) -> float:
        known = [e for e in self.events if e.intended is not None]
        if not known:
            return float("nan")
        return sum(1 for e in known if e.intended == e.emitted) / len(known)


def rate_run(log: RunLog) -> RunLog:
    """Rate every event: on-instructed-path steps (including remediation after
    an error) are correct; rest is correct while the robot runs, incorrect when
    an action awaits initialization, ignored during plan creation."""
    rated = []
    for e in log.events:
        if e.phase == PHASE_MENU:
            if e.emitted == GuiCommand.DO_NOTHING:
                rating = IGNORED
            else:
                rating = CORRECT if e.dist_after == e.dist_before - 1 else INCORRECT
        elif e.phase == PHASE_EXECUTING:
            rating = CORRECT if e.emitted == (e.on_path or GuiCommand.DO_NOTHING) else INCORRECT
        else:  # confirmation / interrupted / recovering: an action awaits a command
            rating = CORRECT if e.on_path is not None and e.emitted == e.on_path else INCORRECT
        rated.append(replace(e, rating=rating))
    return replace(log, events=tuple(rated))


@dataclass(frozen=True)
class RunMetrics:
    accuracy: float
    total_time: float
    steps: int
    path_optimality: float
    time_per_step: float

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise MetricsError(f"accuracy out of range: {self.accuracy}")
        if not 0.0 < self.path_optimality <= 1.0:
            raise MetricsError(f"path optimality out of range: {self.path_optimality}")


def metrics(log: RunLog, minimal_steps: int | None = None) -> RunMetrics:
    """Table-style measures of one rated run.

    ``steps`` counts non-ignored plan-creation events; time spans plan creation.
    """
    if any(e.rating is None for e in log.events):
        log = rate_run(log)
    if minimal_steps is None:
        minimal_steps = log.minimal_steps

    rated = [e for e in log.events if e.rating != IGNORED]
    correct = sum(1 for e in rated if e.rating == CORRECT)
    incorrect = len(rated) - correct

    menu_events = [e for e in log.events if e.phase == PHASE_MENU and e.rating != IGNORED]
    steps = len(menu_events)
    if steps == 0 or correct + incorrect == 0:
        raise MetricsError("run has zero rated steps; metrics undefined")

    total_time = max(e.timestamp for e in log.events if e.phase == PHASE_MENU)
    return RunMetrics(
        accuracy=correct / (correct + incorrect),
        total_time=total_time,
        steps=steps,
        path_optimality=minimal_steps / steps,
        time_per_step=total_time / steps,
    )


METRIC_FIELDS = ("accuracy", "total_time", "steps", "path_optimality", "time_per_step")


def aggregate(runs: list[RunMetrics]) -> dict[str, tuple[float, float]]:
    """Per-field mean and (population) std over runs."""
    out = {}
    for name in METRIC_FIELDS:
        values = np.array([getattr(m, name) for m in runs], dtype=float)
        out[name] = (float(values.mean()), float(values.std()))
    return out


def format_mean_std(mean: float, std: float, digits: int = 1) -> str:
    return f"{mean:.{digits}f}±{std:.{digits}f}"


def format_p_value(p: float) -> str:
    if p < 1e-6:
        return "p < 10^-6"
    return f"p = {p:.3g}"


def write_metrics_csv(path: str | Path, runs: list[RunMetrics]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("run",) + METRIC_FIELDS)
        for i, m in enumerate(runs):
            writer.writerow(
                [i]
                + [f"{getattr(m, name):.6f}" if name != "steps" else getattr(m, name) for name in METRIC_FIELDS]
            )


def write_metrics_json(path: str | Path, runs: list[RunMetrics], extra: dict | None = None) -> None:
    agg = aggregate(runs) if runs else {}
    payload = {
        "runs": [
            {name: getattr(m, name) for name in METRIC_FIELDS} for m in runs
        ],
        "aggregate": {
            name: {"mean": mean, "std": std, "pretty": format_mean_std(mean, std)}
            for name, (mean, std) in agg.items()
        },
    }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def write_run_logs(path: str | Path, logs: list[RunLog]) -> None:
    """Persist runs as newline-delimited JSON records (one meta line per run)."""
    with open(path, "w") as fh:
        for log in logs:
            fh.write(
                json.dumps(
                    {
                        "kind": "meta",
                        "instructed_path": [c.value for c in log.instructed_path],
                        "minimal_steps": log.minimal_steps,
                        **log.meta,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
            for e in log.events:
                fh.write(
                    json.dumps(
                        {
                            "kind": "event",
                            "t": e.timestamp,
                            "intended": e.intended.value if e.intended else None,
                            "emitted": e.emitted.value,
                            "phase": e.phase,
                            "dist_before": e.dist_before,
                            "dist_after": e.dist_after,
                            "on_path": e.on_path.value if e.on_path else None,
                            "rating": e.rating,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def read_run_logs(path: str | Path) -> list[RunLog]:
    logs: list[RunLog] = []
    meta: dict | None = None
    events: list[RatedEvent] = []

    def flush():
        if meta is not None:
            instructed = tuple(GuiCommand(c) for c in meta.pop("instructed_path"))
            minimal = meta.pop("minimal_steps")
            logs.append(
                RunLog(
                    events=tuple(events),
                    instructed_path=instructed,
                    minimal_steps=minimal,
                    meta=meta,
                )
            )

    with open(path) as fh:
        for line in fh:
            record = json.loads(line)
            kind = record.pop("kind")
            if kind == "meta":
                flush()
                meta = record
                events = []
            else:
                events.append(
                    RatedEvent(
                        timestamp=record["t"],
                        intended=GuiCommand(record["intended"]) if record["intended"] else None,
                        emitted=GuiCommand(record["emitted"]),
                        phase=record["phase"],
                        dist_before=record["dist_before"],
                        dist_after=record["dist_after"],
                        on_path=GuiCommand(record["on_path"]) if record["on_path"] else None,
                        rating=record["rating"],
                    )
                )
    flush()
    return logs


# -- spectral signal-to-noise ----------------------------------------------------


def _iqr(values: np.ndarray, axis: int = 0) -> np.ndarray:
    q75, q25 = np.percentile(values, [75, 25], axis=axis, method="linear")
    return q75 - q25


def snr(data: dict[object, np.ndarray] | list[np.ndarray]) -> np.ndarray:
    """Per-cell class separability of labeled spectral data.

    ``data`` maps each class to an array of repetitions with identical trailing
    dimensions, e.g. ``(reps, freq, time, electrode)``.  Per cell: the IQR of
    the class medians over the median of the class IQRs; 0/0 is 0 and x/0 for
    x > 0 is +inf.
    """
    arrays = list(data.values()) if isinstance(data, dict) else list(data)
    if len(arrays) < 2:
        raise ValueError("need at least two classes")
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    cell_shape = arrays[0].shape[1:]
    for a in arrays:
        if a.ndim < 1 or a.shape[1:] != cell_shape:
            raise ValueError("repetition arrays must share cell dimensions")

    medians = np.stack([np.median(a, axis=0) for a in arrays])
    iqrs = np.stack([_iqr(a, axis=0) for a in arrays])
    numerator = _iqr(medians, axis=0)
    denominator = np.median(iqrs, axis=0)

    with np.errstate(divide="ignore", invalid="ignore"):
        out = numerator / denominator
    out = np.where(denominator == 0.0, np.where(numerator == 0.0, 0.0, np.inf), out)
    return out


# -- permutation significance test ------------------------------------------------

EXACT_LIMIT = 1_000_000  # enumerate all label permutations while n! stays below this


def permutation_test(
    labels, predictions, k: int = 100_000, seed: int | None = None, method: str = "auto"
) -> float:
    """Fraction of label permutations scoring at least the observed accuracy.

    Exact enumeration when n! is small enough, otherwise ``k`` Monte-Carlo
    permutations drawn with ``seed``; ``method`` forces one of the two paths.
    """
    labels = list(labels)
    predictions = list(predictions)
    if not labels or len(labels) != len(predictions):
        raise ValueError("labels and predictions must be equal-length and non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if method not in ("auto", "exact", "monte-carlo"):
        raise ValueError(f"unknown method '{method}'")

    n = len(labels)
    observed = sum(1 for a, b in zip(labels, predictions) if a == b)

    use_exact = method == "exact" or (method == "auto" and math.factorial(n) <= EXACT_LIMIT)
    if use_exact and math.factorial(n) > EXACT_LIMIT:
        raise ValueError(f"exact enumeration infeasible for n = {n}")
    if use_exact:
        from itertools import permutations

        hits = 0
        total = 0
        for perm in permutations(labels):
            total += 1
            score = sum(1 for a, b in zip(perm, predictions) if a == b)
            if score >= observed:
                hits += 1
        return hits / total

    rng = np.random.default_rng(seed)
    symbols = sorted({*labels, *predictions}, key=repr)
    index = {s: i for i, s in enumerate(symbols)}
    lab = np.array([index[s] for s in labels])
    pred = np.array([index[s] for s in predictions])
    perms = rng.permuted(np.tile(lab, (k, 1)), axis=1)
    scores = (perms == pred).sum(axis=1)
    return float((scores >= observed).sum() / k)
