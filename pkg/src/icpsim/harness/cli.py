"""Command-line entry point: run experiments, evaluate, verify, replay."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from ..channel import hat_decode, hat_encode
from ..core import ConfigError, mix_seeds, parse_replay
from ..envs.guessing import GuessingEnv
from ..learn import (EVAL_SEED_BASE, Rollout, ScriptedGuessingConvention,
                     load_bundle, oracle_decision_tree_depth,
                     oracle_exhaustive_eval, oracle_injective_hint_map,
                     uniform_random_decide)
from .config import ENVIRONMENTS, build_env, convert_params, load_config
from .runner import run_experiment


def _parse_alphabet(raw: str) -> tuple[int, ...]:
    return tuple(int(p) for p in raw.replace(",", " ").split())


def _write_fixture(path, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.output_dir:
        config.output_dir = args.output_dir
    if config.pipeline is None:
        raise ConfigError("missing required field 'pipeline'")
    if config.output_dir is None:
        raise ConfigError("missing required field 'output_dir'")
    summary = run_experiment(config, workers=args.workers)
    for row in summary.rows:
        print(f"seed {row.seed}: return {row.final_return:.4f} "
              f"length {row.final_ep_len:.4f} ({row.wall_time:.1f} s)")
    mean_r, std_r = summary.return_stats
    mean_l, std_l = summary.ep_len_stats
    print(f"mean return {mean_r:.4f} +- {std_r:.4f}, "
          f"mean length {mean_l:.4f} +- {std_l:.4f}")
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_eval(args) -> int:
    if args.episodes <= 0:
        raise ConfigError("field 'episodes' must be positive")
    config = load_config(args.env_config)
    env = build_env(config)
    if args.scripted:
        if not isinstance(env, GuessingEnv):
            raise ConfigError("--scripted plays the digit-guessing convention"
                              " and needs env.name = guessing")
        hint_map = oracle_injective_hint_map(env.config.digit_alphabet)
        if hint_map is None:
            raise ConfigError("no injective hint map exists for this alphabet")
        player = ScriptedGuessingConvention(env, hint_map)
    else:
        player = Rollout(env, load_bundle(args.bundle))
    try:
        starts = [("token", t) for t in env.initial_conditions(args.exhaustive_bound)]
        exact = True
    except Exception:
        base = mix_seeds(EVAL_SEED_BASE, args.seed)
        starts = [("seed", mix_seeds(base, i)) for i in range(args.episodes)]
        exact = False
    total_return, total_length = 0.0, 0
    for start in starts:
        episode, _ = player.run(start)
        total_return += episode.return_
        total_length += episode.length
    n = len(starts)
    kind = "exhaustive" if exact else "sampled"
    print(f"{kind} over {n} episodes: mean_return {total_return / n!r} "
          f"mean_ep_len {total_length / n!r}")
    return 0


def cmd_oracle(args) -> int:
    if args.task == "tree-depth":
        alphabet = _parse_alphabet(args.alphabet)
        depth = oracle_decision_tree_depth(alphabet)
        print(f"worst-case segment queries for {list(alphabet)}: {depth}")
        _write_fixture(args.out, {"task": "tree_depth",
                                  "alphabet": list(alphabet), "depth": depth})
        return 0
    if args.task == "hint-map":
        alphabet = _parse_alphabet(args.alphabet)
        mapping = oracle_injective_hint_map(alphabet)
        if mapping is None:
            print(f"no injective hint map exists for {list(alphabet)}")
        else:
            print(f"injective hint map for {list(alphabet)}: {mapping}")
        _write_fixture(args.out, {
            "task": "hint_map", "alphabet": list(alphabet),
            "map": None if mapping is None
            else {str(d): s for d, s in sorted(mapping.items())}})
        return 0
    # exhaustive-eval: exact random-policy expectation on a tiny env
    config = load_config(args.env_config)
    env = build_env(config)
    mean_return, mean_len = oracle_exhaustive_eval(
        env, uniform_random_decide, bound=args.bound)
    print(f"uniform-random policy on {config.env_name}: "
          f"mean_return {mean_return!r} mean_ep_len {mean_len!r}")
    _write_fixture(args.out, {
        "task": "exhaustive_eval", "env": config.env_name,
        "params": {k: list(v) if isinstance(v, tuple) else v
                   for k, v in config.env_params.items()},
        "mean_return": mean_return, "mean_ep_len": mean_len})
    return 0


def cmd_codec_check(args) -> int:
    if args.corrupt_order:
        # designed negative: decode against a transposed receiver order
        k, r = 5, 3
        mismatches = 0
        for locals_ in itertools.product(range(k), repeat=r):
            public = hat_encode(list(locals_), k)
            swapped = [locals_[1], locals_[0], locals_[2]]
            for i in range(r):
                others = [m for j, m in enumerate(swapped) if j != i]
                if hat_decode(public, others, k) != locals_[i]:
                    mismatches += 1
        print(f"corrupted receiver order: {mismatches} mismatches "
              f"over {k ** r * r} decodes")
        if mismatches == 0:
            print("codec-check FAILED: corruption went unnoticed")
            return 1
        print("codec-check failed as designed (nonzero exit)")
        return 1
    failures = 0
    checked = 0
    for k in range(args.k_min, args.k_max + 1):
        if k < 2:
            print(f"K={k} skipped: the modulo code needs at least two symbols")
            continue
        for r in range(1, args.receivers + 1):
            for locals_ in itertools.product(range(k), repeat=r):
                public = hat_encode(list(locals_), k)
                for i in range(r):
                    others = [m for j, m in enumerate(locals_) if j != i]
                    checked += 1
                    if hat_decode(public, others, k) != locals_[i]:
                        failures += 1
    print(f"codec-check: {checked} decodes, {failures} failures")
    return 0 if failures == 0 else 1


def cmd_replay(args) -> int:
    header, records = parse_replay(Path(args.file).read_text())
    env_name = header.pop("env", None)
    if env_name not in ENVIRONMENTS:
        raise ConfigError(f"replay header names unknown env {env_name!r}")
    try:
        seed = int(header.pop("seed"))
    except (KeyError, ValueError):
        raise ConfigError("replay header needs an integer seed") from None
    params = convert_params(header, ENVIRONMENTS[env_name][0], "env")
    env = ENVIRONMENTS[env_name][1](ENVIRONMENTS[env_name][0](**params))
    env.reset(seed)
    total = 0.0
    for step, joint, reward, done in records:
        transition = env.step(list(joint))
        total += transition.reward
        if transition.reward != reward or transition.done != done:
            print(f"replay diverged at step {step}: "
                  f"reward {transition.reward!r} vs {reward!r}, "
                  f"done {transition.done} vs {done}")
            return 1
    if not env.done:
        print("replay ended before the episode did")
        return 1
    print(f"replay verified: {len(records)} steps, return {total!r}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icpsim",
        description="scouting-action communication experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train every seed of an experiment config")
    p.add_argument("config", help="experiment config file")
    p.add_argument("--output-dir", help="override the config's output_dir")
    p.add_argument("--workers", type=int, default=None,
                   help="process fan-out (default: ICP_SIM_THREADS or 1)")

    p = sub.add_parser("eval", help="greedy evaluation of a saved bundle")
    p.add_argument("--env-config", required=True,
                   help="config file providing the env.* section")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--bundle", help="path to a saved policy bundle")
    who.add_argument("--scripted", action="store_true",
                     help="play the scripted digit-guessing convention")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive-bound", type=int, default=2048)

    p = sub.add_parser("oracle", help="brute-force reference computations")
    tasks = p.add_subparsers(dest="task", required=True)
    t = tasks.add_parser("tree-depth", help="minimax segment-query depth")
    t.add_argument("--alphabet", required=True)
    t.add_argument("--out", help="write a JSON fixture here")
    t = tasks.add_parser("hint-map", help="injective digit->segment search")
    t.add_argument("--alphabet", required=True)
    t.add_argument("--out")
    t = tasks.add_parser("exhaustive-eval",
                         help="exact random-policy expectation")
    t.add_argument("--env-config", required=True)
    t.add_argument("--bound", type=int, default=2048)
    t.add_argument("--out")

    p = sub.add_parser("codec-check", help="exhaustive hat-code round-trips")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=13)
    p.add_argument("--receivers", type=int, default=5)
    p.add_argument("--corrupt-order", action="store_true",
                   help="run the designed ordering-corruption negative")

    p = sub.add_parser("replay", help="re-execute and verify a replay file")
    p.add_argument("file")
    return parser


COMMANDS = {
    "run": cmd_run,
    "eval": cmd_eval,
    "oracle": cmd_oracle,
    "codec-check": cmd_codec_check,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
