"""Simulated BCI command channel.

Five GUI commands stand in for five decoded mental tasks; a row-stochastic
confusion matrix maps each intended command to an emitted one.  The cued
training-paradigm schedule reproduces the decoder-training timing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class GuiCommand(str, Enum):
    GO_UP = "go_up"
    GO_DOWN = "go_down"
    SELECT = "select"
    GO_BACK = "go_back"
    DO_NOTHING = "do_nothing"


COMMANDS: tuple[GuiCommand, ...] = (
    GuiCommand.GO_UP,
    GuiCommand.GO_DOWN,
    GuiCommand.SELECT,
    GuiCommand.GO_BACK,
    GuiCommand.DO_NOTHING,
)

MENTAL_TASKS: tuple[str, ...] = (
    "right_hand",
    "feet",
    "rotation",
    "word_generation",
    "rest",
)

TASK_FOR_COMMAND = dict(zip(COMMANDS, MENTAL_TASKS))
COMMAND_FOR_TASK = dict(zip(MENTAL_TASKS, COMMANDS))

_INDEX = {c: i for i, c in enumerate(COMMANDS)}

ROW_SUM_TOL = 1e-9


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """5x5 row-stochastic matrix; rows = intended class, columns = emitted."""

    probabilities: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.probabilities, dtype=float)
        if m.shape != (5, 5):
            raise ChannelError(f"confusion matrix must be 5x5, got {m.shape}")
        if (m < 0).any():
            raise ChannelError("confusion matrix entries must be non-negative")
        if not np.allclose(m.sum(axis=1), 1.0, rtol=0.0, atol=ROW_SUM_TOL):
            raise ChannelError("confusion matrix rows must sum to 1")
        object.__setattr__(self, "probabilities", m)

    def row(self, intended: GuiCommand) -> np.ndarray:
        return self.probabilities[_INDEX[intended]]

    @staticmethod
    def identity() -> "ConfusionMatrix":
        return ConfusionMatrix(np.eye(5))

    @staticmethod
    def symmetric(error_rate: float) -> "ConfusionMatrix":
        if not 0.0 <= error_rate < 1.0:
            raise ChannelError(f"error rate must be in [0, 1), got {error_rate}")
        m = np.full((5, 5), error_rate / 4.0)
        np.fill_diagonal(m, 1.0 - error_rate)
        return ConfusionMatrix(m)

    @staticmethod
    def from_json(path: str | Path) -> "ConfusionMatrix":
        data = json.loads(Path(path).read_text())
        classes = data.get("classes")
        m = np.asarray(data["matrix"], dtype=float)
        if classes is not None:
            order = [classes.index(c.value) for c in COMMANDS]
            m = m[np.ix_(order, order)]
        return ConfusionMatrix(m)

    def to_json(self, path: str | Path) -> None:
        payload = {
            "classes": [c.value for c in COMMANDS],
            "matrix": self.probabilities.tolist(),
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def symmetric_matrix(error_rate: float) -> ConfusionMatrix:
    """Diagonal 1-e, off-diagonal e/4 (errors uniform over the 4 wrong classes)."""
    return ConfusionMatrix.symmetric(error_rate)


def emit(intended: GuiCommand, matrix: ConfusionMatrix, rng: np.random.Generator) -> GuiCommand:
    """Draw the emitted command from the intended command's confusion row."""
    idx = rng.choice(5, p=matrix.row(intended))
    return COMMANDS[idx]


@dataclass(frozen=True)
class DecodedEvent:
    """One decoder output: what the user meant (if known) and what came out."""

    timestamp: float
    intended: GuiCommand | None
    emitted: GuiCommand


@dataclass(frozen=True)
class TrialCue:
    task: str                 # cued mental task
    cue_onset: float          # cue image shown here, for cue_duration
    action_time: float        # end marker + GUI action fire here
    command: GuiCommand


@dataclass(frozen=True)
class ParadigmSchedule:
    """Cued-training timing: 0.5 s cue, 1-7 s task interval, 0.2 s end marker."""

    cues: tuple[str, ...]
    cue_duration: float = 0.5
    end_marker_duration: float = 0.2
    inter_trial: tuple[float, float] = (1.0, 7.0)
    trials: tuple[TrialCue, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.cue_duration <= 0 or self.end_marker_duration <= 0:
            raise ChannelError("durations must be positive")
        lo, hi = self.inter_trial
        if not (0 < lo <= hi):
            raise ChannelError("inter-trial interval must be a positive range")
        for task in self.cues:
            if task not in COMMAND_FOR_TASK:
                raise ChannelError(f"unknown mental task '{task}'")

    @staticmethod
    def generate(cues: list[str], rng: np.random.Generator, **kwargs) -> "ParadigmSchedule":
        sched = ParadigmSchedule(cues=tuple(cues), **kwargs)
        trials = []
        t = 0.0
        lo, hi = sched.inter_trial
        for task in sched.cues:
            onset = t
            action = onset + sched.cue_duration + rng.uniform(lo, hi)
            trials.append(
                TrialCue(task=task, cue_onset=onset, action_time=action, command=COMMAND_FOR_TASK[task])
            )
            t = action + sched.end_marker_duration
        return ParadigmSchedule(
            cues=sched.cues,
            cue_duration=sched.cue_duration,
            end_marker_duration=sched.end_marker_duration,
            inter_trial=sched.inter_trial,
            trials=tuple(trials),
        )


def training_run(
    cues: list[str], matrix: ConfusionMatrix, rng: np.random.Generator, **kwargs
) -> list[DecodedEvent]:
    """Simulated-feedback training block: cued commands emitted through the matrix."""
    schedule = ParadigmSchedule.generate(cues, rng, **kwargs)
    return [
        DecodedEvent(
            timestamp=trial.action_time,
            intended=trial.command,
            emitted=emit(trial.command, matrix, rng),
        )
        for trial in schedule.trials
    ]
