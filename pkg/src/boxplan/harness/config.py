"""Experiment configuration: agent/environment specs, YAML files, presets.

A config plus a seed fully determines a run.  Shipped presets carry the
selected (alpha, tau) for each agent/problem pairing; ``load_preset``
resolves ``"<group>/<agent>"`` names against the packaged presets file.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ..planning import MC_MODES, MODES, ConfigurationError

ENV_NAMES = ("goright", "goright10", "acrobot", "acrobot-distractor")
MODEL_NAMES = ("none", "perfect", "expect", "sample", "tree", "nn")
HANDCODED_MODELS = ("perfect", "expect", "sample")

_DEFAULT_GAMMA = {
    "goright": 0.9,
    "goright10": 0.9,
    "acrobot": 1.0,
    "acrobot-distractor": 1.0,
}
_DEFAULT_EPISODES = {
    "goright": 600,
    "goright10": 600,
    "acrobot": 1000,
    "acrobot-distractor": 1000,
}


@dataclass(frozen=True)
class AgentConfig:
    label: str = "agent"
    model: str = "none"  # none | perfect | expect | sample | tree | nn
    mode: str = "none"
    horizon: int = 5
    rollouts: int = 40
    alpha: float = 0.1
    tau: float = 1.0
    full_state: bool = False  # learned Go-Right models also see the previous status
    model_samples: int = 10  # draws behind network variance/range queries
    hidden: int = 64
    stochastic_rollouts: bool | None = None  # override for learned "sample" agents

    def __post_init__(self) -> None:
        if self.model not in MODEL_NAMES:
            raise ConfigurationError(f"unknown model {self.model!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.model == "none" and self.horizon != 1:
            raise ConfigurationError("model-free agents must use horizon 1")

    @property
    def stochastic(self) -> bool:
        """Whether rollout steps sample rather than take expectations."""
        if self.stochastic_rollouts is not None:
            return self.stochastic_rollouts
        return self.model == "sample" or self.mode in MC_MODES


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    agent: AgentConfig
    gamma: float | None = None
    episodes: int | None = None
    trials: int = 1
    seed: int = 0
    interaction_length: int = 500
    out_dir: str | None = None
    threads: int = 1
    diag: bool = False
    init_noise: float = 0.0  # acrobot initial-state noise half-range

    def __post_init__(self) -> None:
        if self.env not in ENV_NAMES:
            raise ConfigurationError(f"unknown environment {self.env!r}")
        if self.env.startswith("acrobot") and self.agent.model in HANDCODED_MODELS:
            raise ConfigurationError("hand-coded models exist only for the Go-Right family")
        if self.trials < 1 or self.interaction_length < 1:
            raise ConfigurationError("trials and interaction_length must be positive")

    @property
    def resolved_gamma(self) -> float:
        return _DEFAULT_GAMMA[self.env] if self.gamma is None else self.gamma

    @property
    def resolved_episodes(self) -> int:
        return _DEFAULT_EPISODES[self.env] if self.episodes is None else self.episodes

    @property
    def num_prize_indicators(self) -> int:
        return {"goright": 2, "goright10": 10}.get(self.env, 0)

    def trial_seed(self, trial: int) -> int:
        return self.seed + trial

    def replace(self, **kwargs) -> "ExperimentConfig":
        if "agent" in kwargs and isinstance(kwargs["agent"], dict):
            kwargs["agent"] = dataclasses.replace(self.agent, **kwargs["agent"])
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        agent = data.pop("agent", {})
        if isinstance(agent, dict):
            agent = AgentConfig(**agent)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(agent=agent, **data)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(cfg.to_dict(), f, sort_keys=False)


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return ExperimentConfig.from_dict(yaml.safe_load(f))


def _presets_data() -> dict:
    text = resources.files("boxplan").joinpath("presets.yaml").read_text()
    return yaml.safe_load(text)


def preset_names() -> list[str]:
    data = _presets_data()
    return [f"{group}/{agent}" for group, spec in data.items() for agent in spec["agents"]]


def load_preset(name: str) -> ExperimentConfig:
    """Resolve '<group>/<agent>' into a full experiment config."""
    data = _presets_data()
    try:
        group_name, agent_name = name.split("/")
        group = data[group_name]
        agent_spec = dict(group["agents"][agent_name])
    except (ValueError, KeyError):
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    agent_spec.setdefault("label", agent_name)
    agent = AgentConfig(**agent_spec)
    return ExperimentConfig(
        env=group["env"],
        agent=agent,
        gamma=group.get("gamma"),
        episodes=group.get("episodes"),
    )
