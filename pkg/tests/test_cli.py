import json

import pytest

from mathsynth.cli import ConfigError, load_config, main, split_config
from mathsynth.environment import Environment
from mathsynth.problems import load_dataset_file


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# desk-scale run\n"
        "modules = numbers__gcd\n"
        "total_steps = 500   # short\n"
        "n_inputs = 3\n"
    )
    mapping = load_config(path)
    env_cfg, train_cfg, _ = split_config(mapping)
    assert train_cfg.modules == ("numbers__gcd",)
    assert train_cfg.total_steps == 500
    assert env_cfg.n_inputs == 3


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("volume = 11\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_range_checks(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("gamma = 3.5\n")
    with pytest.raises(ConfigError):
        split_config(load_config(path))


def test_generate_writes_dataset_and_sidecar(tmp_path, capsys):
    out = tmp_path / "data"
    code, _, _ = run(
        capsys, "generate", "--module", "numbers__gcd", "--count", "20", "--seed", "3",
        "--out", str(out),
    )
    assert code == 0
    data = (out / "numbers__gcd.txt").read_text()
    assert len(data.splitlines()) == 40  # question/answer alternating
    problems = load_dataset_file(out / "numbers__gcd.txt")
    sidecar = [json.loads(l) for l in (out / "numbers__gcd.truth.jsonl").read_text().splitlines()]
    env = Environment()
    assert len(sidecar) == 20
    for p, rec in zip(problems, sidecar):
        reward, _ = env.replay(p, rec["truth_graph"])
        assert reward == 1


def test_generate_is_byte_identical_given_seed(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code, _, _ = run(
            capsys, "generate", "--module", "numbers__lcm", "--count", "15", "--seed", "9",
            "--out", str(out),
        )
        assert code == 0
    assert (a / "numbers__lcm.txt").read_bytes() == (b / "numbers__lcm.txt").read_bytes()
    assert (a / "numbers__lcm.truth.jsonl").read_bytes() == (b / "numbers__lcm.truth.jsonl").read_bytes()


def test_generate_unknown_module_is_a_data_error(tmp_path, capsys):
    code, _, err = run(
        capsys, "generate", "--module", "numbers__bogus", "--count", "1", "--out", str(tmp_path)
    )
    assert code == 1
    assert "unsupported module" in err


def test_episode_prints_the_trajectory(capsys):
    code, out, _ = run(
        capsys, "episode",
        "--question", "What is the first derivative of 6*k**2 - 101*k + 2548?",
        "--answer", "12*k - 101",
        "--actions", "5,15",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("state  t=0 : What is the first derivative")
    assert "action t=0 : 5" in lines
    assert "reward t=1 : 0" in lines
    assert "reward t=2 : 1" in lines
    assert any(l.startswith("output : 12*k - 101") for l in lines)


def test_episode_empty_action_list(capsys):
    code, out, _ = run(capsys, "episode", "--question", "Is 10 a prime number?")
    assert code == 0
    assert out.splitlines() == ["state  t=0 : Is 10 a prime number?; "]


def test_episode_stops_at_done_on_overlong_list(capsys):
    code, out, _ = run(
        capsys, "episode", "--question", "Is 10 a prime number?", "--answer", "False",
        "--actions", "9,15,3,3,3",
    )
    assert code == 0
    assert "reward t=2 : 1" in out
    assert "action t=2" not in out


def test_episode_bad_action_index(capsys):
    code, _, err = run(
        capsys, "episode", "--question", "Is 10 a prime number?", "--actions", "99"
    )
    assert code == 1


def test_episode_from_dataset_file(tmp_path, capsys):
    path = tmp_path / "numbers__is_prime.txt"
    path.write_text("Is 10 a prime number?\nFalse\nIs 7 prime?\nTrue\n")
    code, out, _ = run(
        capsys, "episode", "--file", str(path), "--index", "1", "--actions", "9,15"
    )
    assert code == 0
    assert "state  t=0 : Is 7 prime?; " in out
    assert "reward t=2 : 1" in out
    code, _, err = run(capsys, "episode", "--file", str(path), "--index", "5")
    assert code == 1 and "out of range" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["bogus-command"])
    assert exc.value.code == 2


def test_train_eval_resume_cycle(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "modules = numbers__is_prime\n"
        "learning_rate = 0.05\n"
        "batch_size = 16\n"
        "init_steps = 100\n"
        "total_steps = 300\n"
        "train_problems_per_module = 30\n"
        "eval_problems_per_module = 8\n"
        "eval_interval = 150\n"
        "feature_dim = 4096\n"
        "target_sync = 50\n"
    )
    out = tmp_path / "run"
    code, stdout, err = run(capsys, "train", "--config", str(cfg), "--out", str(out))
    assert code == 0, err
    metrics = [json.loads(l) for l in (out / "metrics.jsonl").read_text().splitlines()]
    assert metrics and metrics[-1]["step"] >= 300
    assert (out / "checkpoint.npz").exists()

    code, stdout, err = run(
        capsys, "eval", "--checkpoint", str(out / "checkpoint.npz"),
        "--module", "numbers__is_prime", "--count", "10",
    )
    assert code == 0, err
    assert "numbers__is_prime" in stdout
    assert "Mean Reward across Modules" in stdout

    # resuming continues the environment step count
    out2 = tmp_path / "resumed"
    cfg.write_text(cfg.read_text().replace("total_steps = 300", "total_steps = 450"))
    code, stdout, err = run(
        capsys, "train", "--config", str(cfg), "--out", str(out2),
        "--checkpoint", str(out / "checkpoint.npz"),
    )
    assert code == 0, err
    resumed = [json.loads(l) for l in (out2 / "metrics.jsonl").read_text().splitlines()]
    assert all(m["step"] >= 300 for m in resumed)


def test_train_multi_seed_reports_the_median_trial(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "modules = numbers__is_prime\n"
        "learning_rate = 0.05\n"
        "batch_size = 8\n"
        "init_steps = 60\n"
        "total_steps = 150\n"
        "train_problems_per_module = 20\n"
        "eval_problems_per_module = 5\n"
        "eval_interval = 100\n"
        "feature_dim = 2048\n"
        "target_sync = 25\n"
    )
    out = tmp_path / "batch"
    code, stdout, err = run(
        capsys, "train", "--config", str(cfg), "--out", str(out), "--seeds", "3"
    )
    assert code == 0, err
    for seed in (0, 1, 2):
        assert (out / f"metrics_seed{seed}.jsonl").exists()
        assert (out / f"checkpoint_seed{seed}.npz").exists()
    assert "median trial: seed" in stdout


def test_mine_command(tmp_path, capsys):
    from mathsynth.environment import EnvConfig
    from mathsynth.operators import full_registry
    from mathsynth.problems import differentiate_wrt_problems
    from mathsynth.search import run_episode

    reg = full_registry()
    env = Environment(reg, EnvConfig(univariate_differentiate_only=False))
    log = tmp_path / "episodes.jsonl"
    with open(log, "w") as fh:
        for gp in differentiate_wrt_problems(12, 0, reg, order=2, multivariate=True):
            actions = iter(gp.truth_graph)
            fh.write(run_episode(env, gp.problem, lambda o, m: next(actions)).to_json_line() + "\n")
    out = tmp_path / "mined.txt"
    code, stdout, _ = run(
        capsys, "mine", "--log", str(log), "--min-support", "10", "--min-size", "2",
        "--out", str(out),
    )
    assert code == 0
    assert "differentiate_wrt_2" in stdout
    assert "= differentiate_wrt(differentiate_wrt(p0,p1),p1)" in out.read_text()
    assert "support=12" in stdout


def test_mine_empty_log(tmp_path, capsys):
    log = tmp_path / "empty.jsonl"
    log.write_text("")
    code, stdout, _ = run(capsys, "mine", "--log", str(log))
    assert code == 0 and stdout == ""
