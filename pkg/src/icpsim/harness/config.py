"""Plain-text experiment configs with dotted sections.

A config file is `key = value` lines; `#` starts a comment.  Top-level
keys describe the experiment (pipeline, seeds, output_dir), while
`env.*`, `channel.*` and `learner.*` fill the matching dataclasses.
Field names and value types come straight from dataclass introspection,
so unknown keys are rejected by name and new dataclass fields become
config keys automatically.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..core import ConfigError
from ..envs.guessing import GuessConfig, GuessingEnv
from ..envs.hanabi_lite import HanabiLiteConfig, HanabiLiteEnv
from ..envs.revealing import RevealConfig, RevealingEnv
from ..learn import LearnerConfig

ENVIRONMENTS = {
    "guessing": (GuessConfig, GuessingEnv),
    "revealing": (RevealConfig, RevealingEnv),
    "hanabi_lite": (HanabiLiteConfig, HanabiLiteEnv),
}

PIPELINES = ("none", "rm", "delayed_map", "cheat")

# channel modes each pipeline may legally declare
PIPELINE_MODES = {
    "none": ("none",),
    "rm": ("one_to_one",),
    "delayed_map": ("one_to_one", "hat"),
    "cheat": ("direct_cheat",),
}


@dataclass
class ExperimentConfig:
    env_name: str
    env_params: dict
    learner: LearnerConfig
    pipeline: str | None = None
    channel_mode: str = "none"
    map_seed: int = 1
    cluster_k: int | None = None
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    output_dir: str | None = None


def build_env(config: ExperimentConfig):
    config_cls, env_cls = ENVIRONMENTS[config.env_name]
    return env_cls(config_cls(**config.env_params))


# ---------------------------------------------------------------------------
# value conversion driven by dataclass field annotations


def _convert(raw: str, type_name: str, field: str):
    t = type_name.replace(" ", "")
    optional = t.endswith("|None")
    if optional:
        if raw.lower() in ("none", ""):
            return None
        t = t[: -len("|None")]
    try:
        if t == "int":
            return int(raw)
        if t == "float":
            return float(raw)
        if t == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if t.startswith("tuple[int"):
            parts = raw.replace(",", " ").split()
            return tuple(int(p) for p in parts)
        if t == "str":
            return raw
    except ValueError:
        raise ConfigError(f"field {field!r}: cannot read {raw!r} as {t}") from None
    raise ConfigError(f"field {field!r} has unsupported type {type_name!r}")


def _field_types(config_cls) -> dict[str, str]:
    return {f.name: f.type for f in dataclasses.fields(config_cls)}


def convert_params(pairs: dict[str, str], config_cls, section: str) -> dict:
    """Turn raw string values into typed kwargs for one config dataclass."""
    types = _field_types(config_cls)
    out = {}
    for name, raw in pairs.items():
        if name not in types:
            raise ConfigError(f"unknown config field '{section}.{name}'")
        out[name] = _convert(raw, types[name], f"{section}.{name}")
    return out


# ---------------------------------------------------------------------------
# file parsing


_TOP_KEYS = ("pipeline", "seeds", "output_dir")
_CHANNEL_KEYS = ("mode", "map_seed", "cluster_k")


def parse_config(text: str) -> ExperimentConfig:
    top: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {"env": {}, "channel": {}, "learner": {}}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (p.strip() for p in body.split("=", 1))
        if "." in key:
            section, name = key.split(".", 1)
            if section not in sections:
                raise ConfigError(f"unknown config section {section!r} (line {lineno})")
            sections[section][name] = raw
        else:
            if key not in _TOP_KEYS:
                raise ConfigError(f"unknown config field {key!r} (line {lineno})")
            top[key] = raw

    env_pairs = dict(sections["env"])
    env_name = env_pairs.pop("name", None)
    if env_name is None:
        raise ConfigError("missing required field 'env.name'")
    if env_name not in ENVIRONMENTS:
        raise ConfigError(
            f"field 'env.name': unknown environment {env_name!r}"
            f" (choose from {', '.join(sorted(ENVIRONMENTS))})")
    env_params = convert_params(env_pairs, ENVIRONMENTS[env_name][0], "env")

    for name in sections["channel"]:
        if name not in _CHANNEL_KEYS:
            raise ConfigError(f"unknown config field 'channel.{name}'")
    channel = sections["channel"]
    learner = LearnerConfig(
        **convert_params(sections["learner"], LearnerConfig, "learner"))

    config = ExperimentConfig(
        env_name=env_name,
        env_params=env_params,
        learner=learner,
        pipeline=top.get("pipeline"),
        channel_mode=channel.get("mode", "none"),
        map_seed=_convert(channel.get("map_seed", "1"), "int", "channel.map_seed"),
        cluster_k=_convert(channel.get("cluster_k", "none"), "int | None",
                           "channel.cluster_k"),
        seeds=_convert(top.get("seeds", "1 2 3 4 5"), "tuple[int, ...]", "seeds"),
        output_dir=top.get("output_dir"),
    )
    if config.pipeline is not None:
        validate_pipeline(config)
    if not config.seeds:
        raise ConfigError("field 'seeds' must list at least one seed")
    build_env(config)   # surface bad env params now, with the env's message
    return config


def validate_pipeline(config: ExperimentConfig) -> None:
    if config.pipeline not in PIPELINES:
        raise ConfigError(
            f"field 'pipeline': unknown pipeline {config.pipeline!r}"
            f" (choose from {', '.join(PIPELINES)})")
    allowed = PIPELINE_MODES[config.pipeline]
    if config.channel_mode not in allowed:
        raise ConfigError(
            f"field 'channel.mode': pipeline {config.pipeline!r} needs mode"
            f" in {{{', '.join(allowed)}}}, got {config.channel_mode!r}")


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
