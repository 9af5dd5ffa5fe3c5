"""Simulator and learning library for implicit-channel coordination games."""

from .channel import (Channel, ChannelMode, CheatChannelEnv, HatCodec,
                      InfoMap, cheat_wrap, hat_decode, hat_encode,
                      map_decode, map_encode, map_from_line, map_new,
                      map_shuffle, map_to_line, receiver_order)
from .core import (ActionSpace, ConfigError, Environment,
                   EpisodeFinishedError, Episode, IllegalActionError,
                   NO_ACTION, Observation, Transition, UnsupportedModeError,
                   canonical, format_replay, make_rng, mix_seeds, obs_key,
                   parse_replay)
from .envs import ENV_NAMES, make_env

__version__ = "0.1.0"

__all__ = [
    "Channel", "ChannelMode", "CheatChannelEnv", "HatCodec", "InfoMap",
    "cheat_wrap", "hat_decode", "hat_encode", "map_decode", "map_encode",
    "map_from_line", "map_new", "map_shuffle", "map_to_line",
    "receiver_order",
    "ActionSpace", "ConfigError", "Environment", "EpisodeFinishedError",
    "Episode", "IllegalActionError", "NO_ACTION", "Observation",
    "Transition", "UnsupportedModeError", "canonical", "format_replay",
    "make_rng", "mix_seeds", "obs_key", "parse_replay",
    "ENV_NAMES", "make_env",
    "__version__",
]
