"""Run configuration: structured, strictly validated, dumped beside outputs.

A config file is YAML with one section per subsystem.  Unknown keys are
rejected at every level so typos fail loudly instead of silently running
defaults.  Command-line flags override individual fields after the file
is applied; the fully resolved config is written next to each run's
outputs for provenance.
"""

from dataclasses import asdict, dataclass, field, fields

import yaml

from .demos import DatasetSpec
from .env import Layout
from .ppo import PPOConfig
from .train import TrainConfig


class ConfigError(ValueError):
    pass


SERVE_MODES = ("collect_two_human", "play_vs_policy")
EVAL_PROTOCOLS = ("replay", "interp")


@dataclass
class EvalConfig:
    protocol: str = "replay"
    n_codes: int = 100
    seed: int = 0
    demos: str = ""
    checkpoint: str = ""
    runs: tuple = ()
    all_checkpoints: bool = False
    out: str = ""

    def validate(self):
        if self.protocol not in EVAL_PROTOCOLS:
            raise ConfigError("eval protocol must be one of %r"
                              % (EVAL_PROTOCOLS,))
        if self.n_codes < 1:
            raise ConfigError("n_codes must be positive")
        self.runs = tuple(self.runs)
        return self


@dataclass
class ServeConfig:
    mode: str = "play_vs_policy"
    checkpoints: tuple = ()
    rounds: int = 20
    host: str = "127.0.0.1"
    port: int = 8000
    tick_hz: float = 20.0
    seed: int = 0
    out_dir: str = ""

    def validate(self):
        if self.mode not in SERVE_MODES:
            raise ConfigError("serve mode must be one of %r" % (SERVE_MODES,))
        if self.rounds < 1:
            raise ConfigError("rounds must be positive")
        if self.tick_hz <= 0:
            raise ConfigError("tick_hz must be positive")
        self.checkpoints = tuple(self.checkpoints)
        return self

    def validate_for_launch(self):
        """Checks that only matter when actually starting the service."""
        self.validate()
        if self.mode == "play_vs_policy" and not self.checkpoints:
            raise ConfigError("play_vs_policy requires at least one checkpoint")
        return self


@dataclass
class RunConfig:
    out_dir: str = "runs/run"
    layout: Layout = field(default_factory=Layout)
    dataset: DatasetSpec = field(default_factory=lambda: DatasetSpec(
        n=60, proportions=(0.17, 0.17, 0.33, 0.33), seed=7))
    train: TrainConfig = field(default_factory=TrainConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    serve: ServeConfig = field(default_factory=ServeConfig)

    def validate(self):
        self.layout.validate()
        self.dataset.validate()
        self.train.validate()
        self.ppo.validate()
        self.eval.validate()
        self.serve.validate()
        return self

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(v):
    """Recursively turn tuples into lists so YAML can represent them."""
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


_SECTIONS = {"layout": Layout, "dataset": DatasetSpec, "train": TrainConfig,
             "ppo": PPOConfig, "eval": EvalConfig, "serve": ServeConfig}


def _build(cls, d: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigError("section %r must be a mapping" % (where,))
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError("unknown key%s in %s: %s"
                          % ("s" if len(unknown) > 1 else "", where,
                             ", ".join(unknown)))
    try:
        if cls is Layout:
            return Layout.from_dict(d)    # deep tuple conversion
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)
    except (TypeError, ValueError) as e:
        raise ConfigError("bad %s section: %s" % (where, e))


def from_dict(d: dict) -> RunConfig:
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError("unknown top-level key%s: %s"
                          % ("s" if len(unknown) > 1 else "",
                             ", ".join(unknown)))
    cfg = RunConfig()
    for name, cls in _SECTIONS.items():
        if name in d:
            setattr(cfg, name, _build(cls, d[name], name))
    if "out_dir" in d:
        if not isinstance(d["out_dir"], str):
            raise ConfigError("out_dir must be a string")
        cfg.out_dir = d["out_dir"]
    return cfg.validate()


def load_config(path) -> RunConfig:
    with open(path) as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError("cannot parse %s: %s" % (path, e))
    return from_dict(raw)


def dump_resolved(cfg: RunConfig, path):
    """Write the fully resolved config; deterministic byte-for-byte."""
    with open(path, "w") as f:
        yaml.safe_dump(cfg.to_dict(), f, sort_keys=True,
                       default_flow_style=False)
