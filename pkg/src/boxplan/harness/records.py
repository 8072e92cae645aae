"""Episode records, CSV persistence, and learning-curve aggregation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

SMOOTHING_WINDOW = 100

EPISODE_COLUMNS = (
    "trial",
    "episode",
    "train_return",
    "eval_return",
    "median_unc_error",
    "wallclock_s",
)


@dataclass(frozen=True)
class EpisodeRecord:
    trial: int
    episode: int
    train_return: float
    eval_return: float
    median_unc_error: float | None = None
    wallclock_s: float = 0.0


def _fmt(x: float) -> str:
    return repr(float(x))


def write_records(records: list[EpisodeRecord], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(EPISODE_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.trial,
                    r.episode,
                    _fmt(r.train_return),
                    _fmt(r.eval_return),
                    "" if r.median_unc_error is None else _fmt(r.median_unc_error),
                    _fmt(r.wallclock_s),
                ]
            )


def read_records(path) -> list[EpisodeRecord]:
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            records.append(
                EpisodeRecord(
                    trial=int(row["trial"]),
                    episode=int(row["episode"]),
                    train_return=float(row["train_return"]),
                    eval_return=float(row["eval_return"]),
                    median_unc_error=(
                        None if row["median_unc_error"] == "" else float(row["median_unc_error"])
                    ),
                    wallclock_s=float(row["wallclock_s"]),
                )
            )
    return records


def returns_matrix(records: list[EpisodeRecord], column: str = "eval_return") -> np.ndarray:
    """Records as a (trials, episodes) array, trials in id order."""
    trials = sorted({r.trial for r in records})
    episodes = sorted({r.episode for r in records})
    index = {t: i for i, t in enumerate(trials)}
    out = np.full((len(trials), len(episodes)), np.nan)
    for r in records:
        out[index[r.trial], r.episode] = getattr(r, column)
    if np.isnan(out).any():
        raise ValueError("records do not form a full (trial, episode) grid")
    return out


def smooth_trailing(values: np.ndarray, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Trailing-window mean along the last axis; early points average the
    available prefix."""
    values = np.asarray(values, dtype=np.float64)
    csum = np.cumsum(values, axis=-1)
    out = np.empty_like(values, dtype=np.float64)
    n = values.shape[-1]
    for e in range(n):
        start = max(0, e - window + 1)
        total = csum[..., e] - (csum[..., start - 1] if start > 0 else 0.0)
        out[..., e] = total / (e - start + 1)
    return out


def aggregate(
    records: list[EpisodeRecord],
    column: str = "eval_return",
    window: int = SMOOTHING_WINDOW,
) -> list[tuple[int, float, float]]:
    """Smoothed learning curve: per episode, the cross-trial mean of each
    trial's trailing-window average, with its standard error (0 for a single
    trial).  Returns (episode, mean, stderr) rows."""
    matrix = returns_matrix(records, column)
    smoothed = smooth_trailing(matrix, window)
    n_trials = smoothed.shape[0]
    mean = smoothed.mean(axis=0)
    if n_trials > 1:
        stderr = smoothed.std(axis=0, ddof=1) / math.sqrt(n_trials)
    else:
        stderr = np.zeros(smoothed.shape[1])
    return [(e, float(mean[e]), float(stderr[e])) for e in range(smoothed.shape[1])]


def write_curve(rows: list[tuple[int, float, float]], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["episode", "mean", "stderr"])
        for episode, mean, stderr in rows:
            writer.writerow([episode, _fmt(mean), _fmt(stderr)])


def read_curve(path) -> list[tuple[int, float, float]]:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            rows.append((int(row["episode"]), float(row["mean"]), float(row["stderr"])))
    return rows
