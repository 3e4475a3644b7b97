"""Experiment configuration and its JSON form."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .ddpg import DdpgConfig
from .idm import IdmParams
from .model import Setup
from .scenario import ScenarioRanges
from .sim import SimConfig

SCHEMA_VERSION = 1
MODES = ("baseline", "limited", "combined", "model")


@dataclass
class ExperimentConfig:
    """One falsification run. Defaults reproduce the desk-scale experiment."""

    mode: str = "combined"
    episodes: int = 350
    seed: int = 0
    sim: SimConfig = field(default_factory=SimConfig)
    idm: IdmParams = field(default_factory=IdmParams)
    ranges: ScenarioRanges = field(default_factory=ScenarioRanges)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    # limited/combined: project agent actions onto safe starts
    guards: bool = True
    # combined: local-search iterations per episode and bootstrap starts
    model_iters: int = 5
    bootstrap_starts: int = 4
    # model mode: multi-start budget
    model_starts: int = 32
    model_max_iters: int = 30
    combine_rule: str = "verbatim"
    # reward fed to the agent: "log" trains on log(R), "raw" on R
    agent_reward: str = "log"
    out: str = "runs/out"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.episodes < 1 or self.model_starts < 1 or self.model_iters < 1:
            raise ValueError("episodes, model_starts and model_iters must be >= 1")
        if self.combine_rule not in ("verbatim", "correction"):
            raise ValueError(f"unknown combine_rule {self.combine_rule!r}")
        if self.agent_reward not in ("log", "raw"):
            raise ValueError(f"unknown agent_reward {self.agent_reward!r}")

    @property
    def setup(self) -> Setup:
        return Setup(self.sim, self.idm, self.ranges)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version {version}")
        nested = {"sim": SimConfig, "idm": IdmParams, "ranges": ScenarioRanges, "ddpg": DdpgConfig}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            if k in nested:
                if not isinstance(v, dict):
                    raise ValueError(f"config section {k!r} must be an object")
                sub = nested[k]
                bad = set(v) - {f.name for f in dataclasses.fields(sub)}
                if bad:
                    raise ValueError(f"unknown keys in {k!r}: {sorted(bad)}")
                kw[k] = sub(**v)
            else:
                kw[k] = v
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(d)
