"""Flat key=value run configuration with dotted section prefixes.

Example file::

    # walk section
    walk.p = 0.5
    walk.walk_length = 40
    sgns.dim = 64
    strategy = node2vec
    combiner = concatenate
    seed = 7

Unknown keys and unparseable values fail loudly with the offending line
number. Command-line flags override file values, which override defaults.
"""

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields

from .fusion import TrainConfig
from .multigraph import DEFAULT_TYPES
from .sgns import SgnsConfig
from .walks import STRATEGIES, WalkConfig


class ConfigError(ValueError):
    """Bad key, bad value, or unparseable config line."""


@dataclass
class EvalSection:
    k: int = 5
    neg_ratio: float = 1.0


@dataclass
class ServingSection:
    pool_size: int = 100
    k: int = 5


@dataclass
class PipelineConfig:
    """Every knob of the end-to-end pipeline, with sane defaults."""

    seed: int = 0
    threads: int = 1
    strategy: str = "node2vec"
    combiner: str = "concatenate"
    model: str = "mtn"
    types: tuple = DEFAULT_TYPES
    walk: WalkConfig = field(default_factory=WalkConfig)
    sgns: SgnsConfig = field(default_factory=SgnsConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalSection = field(default_factory=EvalSection)
    serving: ServingSection = field(default_factory=ServingSection)


# Section keys that are controlled at the top level instead.
_SHADOWED = {"walk.strategy", "walk.seed", "sgns.seed", "train.seed"}

_TOP_FIELDS = {"seed": int, "threads": int, "strategy": str,
               "combiner": str, "model": str, "types": "types"}


def _convert(raw, kind, key):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "types":
            parts = tuple(p.strip() for p in raw.split(",") if p.strip())
            if not parts:
                raise ValueError("empty type list")
            return parts
        return raw
    except ValueError as e:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({e})") from None


def _section_field(section, name):
    for f in fields(section):
        if f.name == name:
            return f
    return None


def set_key(cfg: PipelineConfig, key, raw):
    """Apply one dotted key=value override onto cfg, with type coercion."""
    if key in _SHADOWED:
        top = key.split(".")[1] if key != "walk.strategy" else "strategy"
        raise ConfigError(f"{key!r} is controlled by the top-level {top!r} key")
    if "." in key:
        section_name, _, name = key.partition(".")
        section = getattr(cfg, section_name, None)
        if section is None or not dataclasses.is_dataclass(section):
            raise ConfigError(f"unknown config section {section_name!r}")
        f = _section_field(section, name)
        if f is None:
            raise ConfigError(f"unknown key {key!r}")
        setattr(section, name, _convert(raw, f.type if isinstance(f.type, type)
                                        else type(getattr(section, name)), key))
        return
    if key not in _TOP_FIELDS:
        raise ConfigError(f"unknown key {key!r}")
    value = _convert(raw, _TOP_FIELDS[key], key)
    if key == "strategy" and value not in STRATEGIES:
        raise ConfigError(f"unknown strategy {value!r} (one of {STRATEGIES})")
    setattr(cfg, key, value)


def load_config(path, base: PipelineConfig = None) -> PipelineConfig:
    """Parse a key=value file into a PipelineConfig (over `base` or defaults)."""
    cfg = base if base is not None else PipelineConfig()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
            key, _, raw = text.partition("=")
            try:
                set_key(cfg, key.strip(), raw.strip())
            except ConfigError as e:
                raise ConfigError(f"{path}:{lineno}: {e}") from None
    return cfg


def validate(cfg: PipelineConfig):
    """Cross-field checks that individual setters cannot see."""
    from .edgeops import COMBINERS
    if cfg.combiner not in COMBINERS:
        raise ConfigError(f"unknown combiner {cfg.combiner!r} (one of {COMBINERS})")
    if cfg.model not in ("logreg", "mtn"):
        raise ConfigError(f"unknown model {cfg.model!r} (one of ('logreg', 'mtn'))")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {cfg.strategy!r} (one of {STRATEGIES})")
    return cfg


def derive_seed(seed, label):
    """Stable per-stage sub-seed: hash of (master seed, stage label)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")
