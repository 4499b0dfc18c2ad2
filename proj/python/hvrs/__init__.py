"""Python surface of the rearrangement simulator and training harness.

The heavy lifting lives in the compiled ``_hvrs`` module; this package just
re-exports it under a stable name.
"""

try:
    from . import _hvrs as _core  # installed layout: extension inside the package
except ImportError:  # pragma: no cover - build-tree layout
    import _hvrs as _core

default_config = _core.default_config
generate_tasks = _core.generate_tasks
split_pretrain = _core.split_pretrain
task_reward = _core.task_reward
stage2_reward = _core.stage2_reward
style_reward = _core.style_reward
total_reward = _core.total_reward
switch_decision = _core.switch_decision
evaluate_oracle = _core.evaluate_oracle
run_cli = _core.run_cli

__all__ = [
    "default_config",
    "generate_tasks",
    "split_pretrain",
    "task_reward",
    "stage2_reward",
    "style_reward",
    "total_reward",
    "switch_decision",
    "evaluate_oracle",
    "run_cli",
]
