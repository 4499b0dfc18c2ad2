import json
import math

import pytest

import hvrs


def test_default_config_round_trips():
    cfg = json.loads(hvrs.default_config())
    assert set(cfg) >= {"sim", "rewards", "amp", "stages", "dagger", "eval"}
    assert cfg["rewards"]["success_radius"] == 0.5
    assert cfg["sim"]["dt"] == pytest.approx(1.0 / 30.0)


def test_reward_surface():
    out = json.loads(hvrs.task_reward(json.dumps({
        "d_robot2object": 0.0, "d_hand2object": 0.0, "d_object2goal": 0.0,
        "d_object2guide": 0.0, "dhat": [1.0, 0.0], "v_r_proj": 1.5, "v_o_proj": 1.5,
        "z_o": 1.0, "z_init": 0.0, "z_target": 1.0, "delta_rot": 0.0,
        "carrying_target": True,
    })))
    assert len(out["terms"]) == 8
    assert out["task"] == pytest.approx(1.0)

    assert hvrs.stage2_reward(1.5, 0.6, 0.2) == pytest.approx(1.0)
    assert hvrs.stage2_reward(0.5, 0.2, 0.2) == pytest.approx(0.158181, abs=1e-6)
    assert hvrs.total_reward(0.25, 0.5) == 0.75
    assert hvrs.style_reward(0.5, "") == pytest.approx(0.5 * -math.log(0.5))


def test_switch_decision():
    assert hvrs.switch_decision(0.01, 0.3, 1.5, 100) == 2
    assert hvrs.switch_decision(0.10, 0.3, 1.5, 100) == 1
    assert hvrs.switch_decision(0.01, 0.3, 0.5, 100) == 1


def test_task_generation_and_cli(tmp_path):
    tasks = tmp_path / "tasks.json"
    n = hvrs.generate_tasks(str(tasks), 4, 2, seed=7)
    assert n == 6
    singles = tmp_path / "singles.json"
    assert hvrs.split_pretrain(str(tasks), str(singles)) == 8

    code, out, err = hvrs.run_cli(["gen-tasks", "--n-train", "2", "--n-unseen", "0",
                                   "--seed", "1", "--out", str(tmp_path / "t2.json")])
    assert code == 0, err
    assert "2 train" in out

    code, out, err = hvrs.run_cli(["eval", "--tasks", str(tasks)])
    assert code == 1  # neither --policy nor --teachers

    code, out, err = hvrs.run_cli(["--print-config"])
    assert code == 0
    assert json.loads(out)["eval"]["episode_cap"] == 1800


def test_oracle_evaluation(tmp_path):
    tasks = tmp_path / "tasks.json"
    hvrs.generate_tasks(str(tasks), 3, 0, seed=11)
    report = json.loads(hvrs.evaluate_oracle(str(tasks), split="train", seed=0))
    assert report["episodes"] == 3
    assert report["success_all_pct"] <= min(report["success1_pct"], report["success2_pct"])
