"""Joint stepsize/temperature grid search with a baseline-anchored selection rule.

Each configuration runs a fixed number of trials; its final performance is
the average return over the last 100 episodes.  The baseline is the best
stepsize for the model-free (horizon-1) agent.  Among configurations whose
final performance beats the baseline's, the winner maximizes the summed
pointwise difference between its smoothed curve and the baseline's; if none
beat the baseline, the highest final performance wins.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass

import numpy as np

from ..planning import ConfigurationError
from .config import AgentConfig, ExperimentConfig
from .records import aggregate, returns_matrix

FINAL_WINDOW = 100

GORIGHT_ALPHA_GRID = (1e-2, 5e-2, 1e-1, 2e-1)
GORIGHT_TAU_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1)
ACROBOT_ALPHA_GRID = (5e-2, 1e-1, 2e-1, 5e-1)
ACROBOT_TAU_GRID = (1e-2, 1e-1, 1.0, 1e1, 1e2)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    tau: float | None
    final_perf: float
    improvement_sum: float | None
    selected: bool


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    baseline_alpha: float
    baseline_final: float
    selected_alpha: float
    selected_tau: float | None


def final_performance(records, column: str = "eval_return", window: int = FINAL_WINDOW) -> float:
    """Average return over the last `window` episodes across all trials."""
    matrix = returns_matrix(records, column)
    return float(matrix[:, -min(window, matrix.shape[1]) :].mean())


def curve_mean(records, column: str = "eval_return") -> np.ndarray:
    return np.array([m for _, m, _ in aggregate(records, column)])


def choose_configuration(
    candidates: list[tuple[float, float | None, float, np.ndarray]],
    baseline_final: float,
    baseline_curve: np.ndarray,
) -> tuple[int, list[SweepRow]]:
    """Apply the selection rule to evaluated (alpha, tau, final, curve) rows."""
    if not candidates:
        raise ConfigurationError("sweep grid is empty")
    beating = [i for i, c in enumerate(candidates) if c[2] > baseline_final]
    improvements: dict[int, float] = {
        i: float((candidates[i][3] - baseline_curve).sum()) for i in beating
    }
    if beating:
        best = max(beating, key=lambda i: improvements[i])
    else:
        best = max(range(len(candidates)), key=lambda i: candidates[i][2])
    rows = [
        SweepRow(
            alpha=c[0],
            tau=c[1],
            final_perf=c[2],
            improvement_sum=improvements.get(i),
            selected=(i == best),
        )
        for i, c in enumerate(candidates)
    ]
    return best, rows


def sweep_and_select(
    cfg: ExperimentConfig,
    alphas=None,
    taus=None,
    trials: int = 10,
) -> SweepResult:
    """Run the grid for cfg's agent plus the model-free baseline, and select."""
    from .runner import run_experiment  # deferred to avoid a cycle

    is_goright = cfg.env.startswith("goright")
    if alphas is None:
        alphas = GORIGHT_ALPHA_GRID if is_goright else ACROBOT_ALPHA_GRID
    if taus is None:
        taus = GORIGHT_TAU_GRID if is_goright else ACROBOT_TAU_GRID
    if cfg.agent.mode == "none":
        taus = (None,)
    if not alphas or not taus:
        raise ConfigurationError("sweep grids must be nonempty")

    base = cfg.replace(trials=trials, out_dir=None)

    def run_with(agent: AgentConfig):
        return run_experiment(dataclasses.replace(base, agent=agent))

    # Model-free baseline over the same stepsize grid.
    baseline_agent = AgentConfig(label="baseline", model="none", mode="none", horizon=1)
    baseline_evals = []
    for alpha in alphas:
        records = run_with(dataclasses.replace(baseline_agent, alpha=alpha))
        baseline_evals.append((alpha, final_performance(records), curve_mean(records)))
    b_alpha, b_final, b_curve = max(baseline_evals, key=lambda t: t[1])

    candidates = []
    for alpha in alphas:
        for tau in taus:
            agent = dataclasses.replace(
                cfg.agent, alpha=alpha, tau=(cfg.agent.tau if tau is None else tau)
            )
            records = run_with(agent)
            candidates.append((alpha, tau, final_performance(records), curve_mean(records)))
    best, rows = choose_configuration(candidates, b_final, b_curve)
    return SweepResult(
        rows=rows,
        baseline_alpha=b_alpha,
        baseline_final=b_final,
        selected_alpha=candidates[best][0],
        selected_tau=candidates[best][1],
    )


def write_selection(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["alpha", "tau", "final_perf", "improvement_sum", "selected"])
        for r in result.rows:
            writer.writerow(
                [
                    repr(r.alpha),
                    "" if r.tau is None else repr(r.tau),
                    repr(r.final_perf),
                    "" if r.improvement_sum is None else repr(r.improvement_sum),
                    int(r.selected),
                ]
            )
