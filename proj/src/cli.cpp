#include "hvrs/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hvrs/checkpoint.hpp"
#include "hvrs/config.hpp"
#include "hvrs/dagger.hpp"
#include "hvrs/eval.hpp"
#include "hvrs/trainer.hpp"

namespace hvrs {

namespace {

Config resolve_config(const std::string& flag_path) {
  if (!flag_path.empty()) return load_config(flag_path);
  const char* env = std::getenv("HVRS_CONFIG");
  if (env && *env) return load_config(env);
  return Config{};
}

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*f) throw std::runtime_error("cannot open log file: " + path);
  return f;
}

// Loads either a student checkpoint or full trainer artifacts and wraps it
// in the matching controller.
std::unique_ptr<Controller> controller_from_checkpoint(const std::string& path,
                                                       const Config& cfg) {
  const TensorMap t = load_checkpoint(path);
  if (is_student_checkpoint(t)) {
    return std::make_unique<StudentController>(student_from_tensors(t), cfg);
  }
  return std::make_unique<PolicyController>(artifacts_from_tensors(t).policy, cfg);
}

struct GenTasksArgs {
  std::vector<std::string> layouts;
  int n_train = 48;
  int n_unseen = 12;
  uint64_t seed = 0;
  std::string out;
};

int cmd_gen_tasks(const GenTasksArgs& a, std::ostream& out) {
  std::vector<RoomLayout> layouts;
  if (a.layouts.empty()) {
    layouts = builtin_layouts();
  } else {
    for (const std::string& name : a.layouts) layouts.push_back(layout_by_name(name));
  }
  const std::vector<TaskSpec> tasks = generate_dataset(layouts, a.n_train, a.n_unseen, a.seed);
  save_tasks(a.out, tasks);
  out << "wrote " << tasks.size() << " tasks (" << a.n_train << " train, " << a.n_unseen
      << " unseen) to " << a.out << "\n";
  return 0;
}

struct SplitArgs {
  std::string in;
  std::string out;
};

int cmd_split_pretrain(const SplitArgs& a, std::ostream& out) {
  const std::vector<TaskSpec> tasks = load_tasks(a.in);
  const std::vector<SingleTask> singles = split_pretraining(tasks);
  save_single_tasks(a.out, singles);
  out << "split " << tasks.size() << " tasks into " << singles.size()
      << " pretraining episodes at " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  int stage = 1;
  std::string config;
  std::string tasks;
  std::string init;
  std::string teacher1;
  std::string resume;
  std::string log;
  uint64_t seed = 0;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.stage == 2 && a.init.empty()) {
    err << "train --stage 2 requires --init (stage-1 checkpoint)\n";
    return 1;
  }
  if (a.stage == 3 && (a.init.empty() || a.teacher1.empty())) {
    err << "train --stage 3 requires --init (stage-1 checkpoint) and --teacher1 (stage-2 "
           "checkpoint)\n";
    return 1;
  }
  const Config cfg = resolve_config(a.config);
  auto log = open_log(a.log);
  std::optional<TrainerArtifacts> resume;
  if (!a.resume.empty()) resume = load_artifacts(a.resume);

  StageRunResult res;
  if (a.stage == 1) {
    const std::vector<SingleTask> singles = load_single_tasks(a.tasks);
    res = run_stage1(singles, cfg, a.seed, resume ? &*resume : nullptr, log.get(), a.out);
  } else if (a.stage == 2) {
    const std::vector<SingleTask> singles = load_single_tasks(a.tasks);
    const TrainerArtifacts init = load_artifacts(a.init);
    res = run_stage2(init, singles, cfg, a.seed, log.get(), a.out,
                     resume ? &*resume : nullptr);
  } else {
    const std::vector<TaskSpec> tasks = load_tasks(a.tasks);
    const TrainerArtifacts teacher1 = load_artifacts(a.teacher1);
    const TrainerArtifacts init = load_artifacts(a.init);
    res = run_stage3(teacher1, init, tasks, cfg, a.seed, log.get(), a.out,
                     resume ? &*resume : nullptr);
  }
  out << "stage " << a.stage << " finished at epoch " << res.art.epoch << ", checkpoint at "
      << a.out << "\n";
  return 0;
}

struct DistillArgs {
  std::string teacher1;
  std::string teacher2;
  std::string config;
  std::string tasks;
  std::string log;
  uint64_t seed = 0;
  std::string out;
};

int cmd_distill(const DistillArgs& a, std::ostream& out) {
  const Config cfg = resolve_config(a.config);
  auto log = open_log(a.log);
  const TrainerArtifacts t1 = load_artifacts(a.teacher1);
  const TrainerArtifacts t2 = load_artifacts(a.teacher2);
  const std::vector<TaskSpec> tasks = load_tasks(a.tasks);
  DistillResult res = run_stage4(t1.policy, t2.policy, tasks, cfg, a.seed, log.get());
  save_student(a.out, res.student);
  out << "distilled student over " << cfg.dagger.rounds << " rounds, checkpoint at " << a.out
      << "\n";
  return 0;
}

struct EvalArgs {
  std::string policy;
  std::vector<std::string> teachers;
  std::string config;
  std::string tasks;
  std::string split = "train";
  std::string format = "text";
  std::string out_path;
  uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.policy.empty() == a.teachers.empty()) {
    err << "eval requires exactly one of --policy or --teachers\n";
    return 1;
  }
  const Config cfg = resolve_config(a.config);
  std::vector<TaskSpec> tasks;
  for (TaskSpec& t : load_tasks(a.tasks)) {
    if (t.split == a.split) tasks.push_back(std::move(t));
  }
  if (tasks.empty()) throw std::runtime_error("no tasks with split=" + a.split + " in " + a.tasks);

  std::unique_ptr<Controller> ctl;
  if (!a.policy.empty()) {
    ctl = controller_from_checkpoint(a.policy, cfg);
  } else {
    ctl = std::make_unique<PolicyController>(load_artifacts(a.teachers[0]).policy,
                                             load_artifacts(a.teachers[1]).policy, cfg);
  }
  const MetricsReport report = evaluate(*ctl, tasks, cfg, a.seed);
  const std::string rendered = render_report(report, parse_report_format(a.format));
  out << rendered;
  if (!a.out_path.empty()) {
    std::ofstream f(a.out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + a.out_path);
    f << rendered;
  }
  return 0;
}

struct RunArgs {
  std::string policy;
  std::string task_file;
  int task_index = 0;
  bool interactive = false;
  std::string config;
  uint64_t seed = 0;
};

void print_run_summary(std::ostream& out, const SimState& state, const TaskSpec& task,
                       const LifecycleState& lc) {
  const GoalSpec& g1 = task.sub_tasks[0].goal;
  const GoalSpec& g2 = task.sub_tasks[1].goal;
  const SceneObject* o1 = find_object(state, g1.object_id);
  const SceneObject* o2 = find_object(state, g2.object_id);
  out << "step=" << state.step_count << " m=" << lc.m << " agent=(" << state.agent.root.x << ", "
      << state.agent.root.y << ", yaw " << state.agent.root.yaw << ")"
      << " carrying=" << (state.agent.carrying.empty() ? "-" : state.agent.carrying)
      << " d1=" << (o1 ? (o1->pose.xy() - g1.pose.xy()).norm() : -1.0)
      << " d2=" << (o2 ? (o2->pose.xy() - g2.pose.xy()).norm() : -1.0) << "\n";
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err, std::istream& in) {
  const Config cfg = resolve_config(a.config);
  const std::vector<TaskSpec> tasks = load_tasks(a.task_file);
  if (a.task_index < 0 || a.task_index >= static_cast<int>(tasks.size())) {
    err << "task index " << a.task_index << " out of range (file has " << tasks.size()
        << " tasks)\n";
    return 1;
  }
  const TaskSpec& task = tasks[a.task_index];
  std::unique_ptr<Controller> ctl = controller_from_checkpoint(a.policy, cfg);

  SimState state = reset(task, 0, a.seed, std::nullopt, cfg.sim);
  LifecycleState lc;
  bool auto_switch = true;
  const GoalSpec& goal1 = task.sub_tasks[0].goal;
  const GoalSpec& goal2 = task.sub_tasks[1].goal;

  auto advance = [&](int n) {
    for (int i = 0; i < n && state.step_count < cfg.eval.episode_cap; ++i) {
      if (auto_switch) {
        const SceneObject* obj1 = find_object(state, goal1.object_id);
        const double s = obj1 ? obj1->vel.norm() : 0.0;
        const double d = obj1 ? (obj1->pose.xy() - goal1.pose.xy()).norm() : 1e9;
        const double r = obj1 ? (state.agent.root.xy() - obj1->pose.xy()).norm() : 0.0;
        switch_instruction(s, d, r, static_cast<int>(state.step_count), cfg.dagger.thresholds,
                           lc);
      }
      state.active_goal = lc.m - 1;
      const ActionCommand cmd = ctl->act(state, task, lc.m);
      step_mut(state, cmd, cfg.sim.dt, cfg.sim);
      const RewardContext ctx = distances(state, goal2);
      if (lc.m == 2 && ctx.d_object2goal < goal2.success_radius &&
          state.agent.carrying.empty() && ctx.d_robot2object >= cfg.rewards.stage2_robot_cap) {
        return true;
      }
    }
    return false;
  };

  if (!a.interactive) {
    const bool done = advance(cfg.eval.episode_cap);
    print_run_summary(out, state, task, lc);
    out << (done ? "completed both placements\n" : "episode ended without completion\n");
    return 0;
  }

  out << "interactive runner on task " << task.id << " (layout " << task.layout << ")\n"
      << "commands: step [n], next, auto, status, quit\n";
  print_run_summary(out, state, task, lc);
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    std::istringstream ls(line);
    std::string cmd;
    ls >> cmd;
    if (cmd == "quit") break;
    if (cmd == "next") {
      lc.m = 2;
      lc.latched = true;
      lc.switched_at = static_cast<int>(state.step_count);
      auto_switch = false;
      out << "instruction 2 issued manually\n";
    } else if (cmd == "auto") {
      auto_switch = true;
      out << "instruction switching deferred to the speed/distance rule\n";
    } else if (cmd == "status") {
      // summary printed below
    } else if (cmd == "step" || cmd.empty()) {
      int n = 30;
      std::string narg;
      if (ls >> narg) n = std::atoi(narg.c_str());
      if (n <= 0) n = 30;
      if (advance(n)) {
        print_run_summary(out, state, task, lc);
        out << "completed both placements\n";
        break;
      }
      if (state.step_count >= cfg.eval.episode_cap) {
        print_run_summary(out, state, task, lc);
        out << "episode cap reached\n";
        break;
      }
    } else {
      out << "unknown command: " << cmd << "\n";
    }
    print_run_summary(out, state, task, lc);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             std::istream& in) {
  CLI::App app{"desk-scale object rearrangement: simulator, trainers, and evaluation"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  std::string top_config;
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");
  app.add_option("--config", top_config, "configuration JSON (overrides HVRS_CONFIG)");

  GenTasksArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-tasks", "generate a task dataset");
  gen_cmd->add_option("--layouts", gen.layouts, "layout names (default: all built-ins)")
      ->delimiter(',');
  gen_cmd->add_option("--n-train", gen.n_train, "number of train tasks");
  gen_cmd->add_option("--n-unseen", gen.n_unseen, "number of unseen tasks");
  gen_cmd->add_option("--seed", gen.seed, "dataset seed");
  gen_cmd->add_option("--out", gen.out, "output task file")->required();

  SplitArgs split;
  CLI::App* split_cmd =
      app.add_subcommand("split-pretrain", "expand tasks into single-object pretraining episodes");
  split_cmd->add_option("--in", split.in, "task file")->required();
  split_cmd->add_option("--out", split.out, "output single-task file")->required();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train one curriculum stage");
  train_cmd->add_option("--stage", train.stage, "curriculum stage")
      ->check(CLI::IsMember({1, 2, 3}))
      ->required();
  train_cmd->add_option("--config", train.config, "configuration JSON");
  train_cmd->add_option("--tasks", train.tasks, "single-task file (stages 1-2) or task file (3)")
      ->required();
  train_cmd->add_option("--init", train.init, "initialization checkpoint (stages 2-3)");
  train_cmd->add_option("--teacher1", train.teacher1, "frozen first-teacher checkpoint (stage 3)");
  train_cmd->add_option("--resume", train.resume, "checkpoint to resume from");
  train_cmd->add_option("--log", train.log, "JSONL metrics log path");
  train_cmd->add_option("--seed", train.seed, "training seed");
  train_cmd->add_option("--out", train.out, "output checkpoint path")->required();

  DistillArgs distill;
  CLI::App* distill_cmd =
      app.add_subcommand("distill", "distill the teacher pair into an egocentric student");
  distill_cmd->add_option("--teacher1", distill.teacher1, "first teacher checkpoint")->required();
  distill_cmd->add_option("--teacher2", distill.teacher2, "second teacher checkpoint")
      ->required();
  distill_cmd->add_option("--config", distill.config, "configuration JSON");
  distill_cmd->add_option("--tasks", distill.tasks, "task file")->required();
  distill_cmd->add_option("--log", distill.log, "JSONL metrics log path");
  distill_cmd->add_option("--seed", distill.seed, "distillation seed");
  distill_cmd->add_option("--out", distill.out, "output student checkpoint")->required();

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint over a task split");
  eval_cmd->add_option("--policy", ev.policy, "student or single-policy checkpoint");
  eval_cmd->add_option("--teachers", ev.teachers, "teacher pair checkpoints")->expected(2);
  eval_cmd->add_option("--config", ev.config, "configuration JSON");
  eval_cmd->add_option("--tasks", ev.tasks, "task file")->required();
  eval_cmd->add_option("--split", ev.split, "task split")
      ->check(CLI::IsMember({"train", "unseen"}));
  eval_cmd->add_option("--format", ev.format, "report format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  eval_cmd->add_option("--out", ev.out_path, "also write the report to this file");
  eval_cmd->add_option("--seed", ev.seed, "evaluation seed");

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "roll a policy on one task");
  run_cmd->add_option("--policy", run.policy, "checkpoint to run")->required();
  run_cmd->add_option("--task", run.task_file, "task file")->required();
  run_cmd->add_option("--task-index", run.task_index, "index into the task file");
  run_cmd->add_flag("--interactive", run.interactive, "drive the episode from a REPL");
  run_cmd->add_option("--config", run.config, "configuration JSON");
  run_cmd->add_option("--seed", run.seed, "episode seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    const int code = app.exit(e, msg, msg);
    (code == 0 ? out : err) << msg.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (print_config) {
      out << config_to_json(resolve_config(top_config)) << "\n";
      return 0;
    }
    if (gen_cmd->parsed()) return cmd_gen_tasks(gen, out);
    if (split_cmd->parsed()) return cmd_split_pretrain(split, out);
    if (train_cmd->parsed()) return cmd_train(train, out, err);
    if (distill_cmd->parsed()) return cmd_distill(distill, out);
    if (eval_cmd->parsed()) return cmd_eval(ev, out, err);
    if (run_cmd->parsed()) return cmd_run(run, out, err, in);
    err << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr, std::cin);
}

}  // namespace hvrs
