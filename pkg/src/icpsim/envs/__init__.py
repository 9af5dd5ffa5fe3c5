"""Environment registry."""

from __future__ import annotations

from ..core import ConfigError
from .guessing import GuessConfig, GuessingEnv, SEGMENT_TABLE, segment_state
from .hanabi_lite import HanabiLiteConfig, HanabiLiteEnv
from .revealing import RevealConfig, RevealingEnv

ENV_NAMES = ("guessing", "revealing", "hanabi_lite")


def make_env(name: str, config):
    if name == "guessing":
        return GuessingEnv(config)
    if name == "revealing":
        return RevealingEnv(config)
    if name == "hanabi_lite":
        return HanabiLiteEnv(config)
    raise ConfigError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")


__all__ = [
    "ENV_NAMES", "GuessConfig", "GuessingEnv", "HanabiLiteConfig",
    "HanabiLiteEnv", "RevealConfig", "RevealingEnv", "SEGMENT_TABLE",
    "make_env", "segment_state",
]
