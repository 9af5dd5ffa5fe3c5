"""Config parsing, artifact layout, reproducibility and the CLI surface."""

import json
from pathlib import Path

import pytest

from icpsim.core import ConfigError
from icpsim.harness import (CURVE_HEADER, build_env, load_summary, main,
                            parse_config, run_experiment, run_pipeline_seed)
from icpsim.harness.runner import worker_cap
from icpsim.learn import load_bundle

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TINY_RM = """
pipeline = rm
output_dir = {out}
seeds = 1 2
env.name = guessing
env.n_agents = 2
env.hint_limit = 6
env.digit_alphabet = 0 1 2 3
channel.mode = one_to_one
channel.map_seed = 7
learner.episodes = 120
learner.episodes_per_step = 10
learner.batch_size = 8
learner.buffer_capacity = 60
learner.eval_every = 4
learner.eval_episodes = 16
"""


def tiny_config(tmp_path, name="run"):
    return parse_config(TINY_RM.format(out=tmp_path / name))


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_fills_every_section(tmp_path):
    cfg = tiny_config(tmp_path)
    assert cfg.pipeline == "rm"
    assert cfg.seeds == (1, 2)
    assert cfg.env_name == "guessing"
    assert cfg.env_params["digit_alphabet"] == (0, 1, 2, 3)
    assert cfg.channel_mode == "one_to_one"
    assert cfg.map_seed == 7
    assert cfg.learner.episodes == 120
    assert cfg.learner.epsilon == 0.1   # untouched defaults survive
    env = build_env(cfg)
    assert env.n_agents == 2


def test_unknown_keys_are_named():
    with pytest.raises(ConfigError, match="learner.warp"):
        parse_config("env.name = guessing\nlearner.warp = 9\n")
    with pytest.raises(ConfigError, match="wheels"):
        parse_config("env.name = guessing\nwheels = 4\n")
    with pytest.raises(ConfigError, match="motor"):
        parse_config("env.name = guessing\nmotor.volts = 12\n")
    with pytest.raises(ConfigError, match="env.name"):
        parse_config("env.name = parcheesi\n")
    with pytest.raises(ConfigError, match="env.name"):
        parse_config("pipeline = rm\n")


def test_bad_values_are_named():
    with pytest.raises(ConfigError, match="learner.alpha"):
        parse_config("env.name = guessing\nlearner.alpha = fast\n")
    with pytest.raises(ConfigError, match="env.n_agents"):
        parse_config("env.name = guessing\nenv.n_agents = two\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("env.name = guessing\nnonsense line\n")


def test_pipeline_channel_compatibility():
    base = "env.name = guessing\npipeline = {p}\nchannel.mode = {m}\n"
    with pytest.raises(ConfigError, match="channel.mode"):
        parse_config(base.format(p="cheat", m="one_to_one"))
    with pytest.raises(ConfigError, match="channel.mode"):
        parse_config(base.format(p="delayed_map", m="none"))
    with pytest.raises(ConfigError, match="channel.mode"):
        parse_config(base.format(p="rm", m="hat"))
    with pytest.raises(ConfigError, match="pipeline"):
        parse_config(base.format(p="warp", m="none"))
    parse_config(base.format(p="delayed_map", m="hat"))   # valid pair


def test_shipped_config_grid():
    files = sorted(CONFIG_DIR.glob("*.cfg"))
    assert len(files) == 15
    combos = set()
    for path in files:
        cfg = parse_config(path.read_text())
        build_env(cfg)
        mode = cfg.channel_mode if cfg.pipeline == "delayed_map" else ""
        combos.add((cfg.env_name, cfg.pipeline, mode))
    assert len(combos) == 15
    assert {c[0] for c in combos} == {"guessing", "revealing", "hanabi_lite"}
    assert {c[1] for c in combos} == {"none", "rm", "delayed_map", "cheat"}


# ---------------------------------------------------------------------------
# run artifacts and determinism


def test_run_experiment_writes_the_artifact_set(tmp_path):
    cfg = tiny_config(tmp_path)
    summary = run_experiment(cfg)
    out = Path(cfg.output_dir)
    assert {p.name for p in out.iterdir()} == {
        "curve_s1.csv", "curve_s2.csv", "bundle_s1.json", "bundle_s2.json",
        "summary.csv", "timings.txt"}
    curve = (out / "curve_s1.csv").read_text().splitlines()
    assert curve[0] == CURVE_HEADER
    assert all(line.split(", ")[4] == "1" for line in curve[1:])
    bundle = load_bundle(out / "bundle_s1.json")
    assert bundle.imap is not None
    assert len(summary.rows) == 2


def test_summary_aggregates_recompute_exactly(tmp_path):
    cfg = tiny_config(tmp_path)
    run_experiment(cfg)
    rows, aggregates = load_summary(Path(cfg.output_dir) / "summary.csv")
    returns = [r.final_return for r in rows]
    lengths = [r.final_ep_len for r in rows]
    n = len(returns)
    mean_r = sum(returns) / n
    mean_l = sum(lengths) / n
    var_r = sum((v - mean_r) ** 2 for v in returns) / (n - 1)
    var_l = sum((v - mean_l) ** 2 for v in lengths) / (n - 1)
    assert abs(aggregates["mean"][0] - mean_r) <= 1e-12
    assert abs(aggregates["mean"][1] - mean_l) <= 1e-12
    assert abs(aggregates["std"][0] - var_r ** 0.5) <= 1e-12
    assert abs(aggregates["std"][1] - var_l ** 0.5) <= 1e-12


def test_rerun_is_byte_identical(tmp_path):
    cfg_a = tiny_config(tmp_path, "a")
    cfg_b = tiny_config(tmp_path, "b")
    run_experiment(cfg_a)
    run_experiment(cfg_b)
    for name in ("curve_s1.csv", "curve_s2.csv", "summary.csv"):
        a = (Path(cfg_a.output_dir) / name).read_bytes()
        b = (Path(cfg_b.output_dir) / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_every_pipeline_dispatches(tmp_path):
    text = TINY_RM.format(out=tmp_path / "x").replace("seeds = 1 2", "seeds = 1")
    cases = [
        ("pipeline = rm", "channel.mode = one_to_one", "rm"),
        ("pipeline = none", "channel.mode = none", "none"),
        ("pipeline = cheat", "channel.mode = direct_cheat", "cheat"),
        ("pipeline = delayed_map", "channel.mode = one_to_one", "delayed_map"),
    ]
    for pipeline_line, mode_line, name in cases:
        body = text.replace("pipeline = rm", pipeline_line)
        body = body.replace("channel.mode = one_to_one", mode_line)
        body += "learner.full_obs_episodes = 300\n"
        cfg = parse_config(body)
        result = run_pipeline_seed(cfg, seed=1)
        assert result.curve, name
        if name == "delayed_map":
            assert result.bundle.strategy is not None
            assert result.bundle.strategy.frozen


def test_worker_cap_reads_the_environment(monkeypatch):
    monkeypatch.setenv("ICP_SIM_THREADS", "3")
    assert worker_cap() == 3
    monkeypatch.setenv("ICP_SIM_THREADS", "junk")
    assert worker_cap() == 1
    monkeypatch.delenv("ICP_SIM_THREADS")
    assert worker_cap() == 1


# ---------------------------------------------------------------------------
# command-line interface


def write_env_config(tmp_path, body: str) -> Path:
    path = tmp_path / "env.cfg"
    path.write_text(body)
    return path


def test_cli_run_and_eval_round_trip(tmp_path, capsys):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(TINY_RM.format(out=tmp_path / "out"))
    assert main(["run", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "mean return" in out and "artifacts in" in out
    bundle = tmp_path / "out" / "bundle_s1.json"
    env_cfg = write_env_config(
        tmp_path,
        "env.name = guessing\nenv.n_agents = 2\nenv.hint_limit = 6\n"
        "env.digit_alphabet = 0 1 2 3\n")
    assert main(["eval", "--env-config", str(env_cfg),
                 "--bundle", str(bundle)]) == 0
    assert "exhaustive over 16 episodes" in capsys.readouterr().out


def test_cli_rejects_invalid_configs(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("env.name = guessing\nlearner.warp = 9\n")
    assert main(["run", str(bad)]) == 2
    assert "learner.warp" in capsys.readouterr().err
    incomplete = tmp_path / "np.cfg"
    incomplete.write_text("env.name = guessing\n")
    assert main(["run", str(incomplete)]) == 2
    assert "pipeline" in capsys.readouterr().err


def test_cli_eval_scripted_three_agents(tmp_path, capsys):
    env_cfg = write_env_config(
        tmp_path, "env.name = guessing\nenv.n_agents = 3\nenv.hint_limit = 11\n")
    assert main(["eval", "--env-config", str(env_cfg), "--scripted"]) == 0
    first = capsys.readouterr().out
    assert "mean_ep_len 6.0" in first
    assert "exhaustive over 1000 episodes" in first
    assert main(["eval", "--env-config", str(env_cfg), "--scripted"]) == 0
    assert capsys.readouterr().out == first   # determinism
    assert main(["eval", "--env-config", str(env_cfg), "--scripted",
                 "--episodes", "0"]) == 2
    assert "episodes" in capsys.readouterr().err


def test_cli_oracle_fixture_files(tmp_path, capsys):
    depth_out = tmp_path / "depth.json"
    assert main(["oracle", "tree-depth", "--alphabet", "0,1,2,3,4,5,6,7,8,9",
                 "--out", str(depth_out)]) == 0
    assert json.loads(depth_out.read_text())["depth"] == 4
    map_out = tmp_path / "map.json"
    assert main(["oracle", "hint-map", "--alphabet", "0 1 2 3",
                 "--out", str(map_out)]) == 0
    fixture = json.loads(map_out.read_text())
    assert set(fixture["map"]) == {"0", "1", "2", "3"}
    env_cfg = write_env_config(
        tmp_path,
        "env.name = guessing\nenv.n_agents = 2\nenv.hint_limit = 6\n"
        "env.digit_alphabet = 0 1 2 3\n")
    eval_out = tmp_path / "eval.json"
    assert main(["oracle", "exhaustive-eval", "--env-config", str(env_cfg),
                 "--out", str(eval_out)]) == 0
    fixture = json.loads(eval_out.read_text())
    assert fixture["mean_return"] == pytest.approx(4.59, abs=0.05)
    capsys.readouterr()


def test_cli_codec_check_paths(capsys):
    assert main(["codec-check", "--k-min", "1", "--k-max", "5",
                 "--receivers", "3"]) == 0
    out = capsys.readouterr().out
    assert "K=1 skipped" in out and "0 failures" in out
    assert main(["codec-check", "--corrupt-order"]) == 1
    assert "mismatches" in capsys.readouterr().out


def test_cli_replay_verifies_and_detects_corruption(tmp_path, capsys):
    from icpsim.core import Episode, NO_ACTION, format_replay, make_rng
    from icpsim.envs.guessing import GuessConfig, GuessingEnv

    env = GuessingEnv(GuessConfig(n_agents=2, hint_limit=6,
                                  digit_alphabet=(0, 1, 2, 3)))
    env.reset(42)
    rng = make_rng(9)
    episode = Episode(seed=42)
    while not env.done:
        joint = [NO_ACTION] * env.n_agents
        for agent in env.acting_agents():
            legal = sorted(env.legal_actions(agent))
            joint[agent] = legal[int(rng.integers(len(legal)))]
        episode.transitions.append(env.step(joint))
    path = tmp_path / "episode.replay"
    path.write_text(format_replay(episode, "guessing", {
        "n_agents": 2, "hint_limit": 6, "digit_alphabet": "0,1,2,3"}))
    assert main(["replay", str(path)]) == 0
    assert "replay verified" in capsys.readouterr().out
    corrupted = path.read_text().replace(", 10.0,", ", 7.5,", 1)
    path.write_text(corrupted)
    assert main(["replay", str(path)]) == 1
    assert "diverged" in capsys.readouterr().out
