#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvrs/cli.hpp"
#include "hvrs/config.hpp"
#include "hvrs/dagger.hpp"
#include "hvrs/eval.hpp"
#include "hvrs/oracle.hpp"
#include "hvrs/rewards.hpp"
#include "hvrs/tasks.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

hvrs::Config config_from(const std::string& cfg_json) {
  if (cfg_json.empty()) return hvrs::Config{};
  return hvrs::config_from_json(cfg_json);
}

std::string default_config() { return hvrs::config_to_json(hvrs::Config{}); }

int generate_tasks(const std::string& out_path, int n_train, int n_unseen, uint64_t seed,
                   const std::vector<std::string>& layout_names) {
  std::vector<hvrs::RoomLayout> layouts;
  if (layout_names.empty()) {
    layouts = hvrs::builtin_layouts();
  } else {
    for (const std::string& name : layout_names) layouts.push_back(hvrs::layout_by_name(name));
  }
  const auto tasks = hvrs::generate_dataset(layouts, n_train, n_unseen, seed);
  hvrs::save_tasks(out_path, tasks);
  return static_cast<int>(tasks.size());
}

int split_pretrain(const std::string& in_path, const std::string& out_path) {
  const auto singles = hvrs::split_pretraining(hvrs::load_tasks(in_path));
  hvrs::save_single_tasks(out_path, singles);
  return static_cast<int>(singles.size());
}

std::string task_reward(const std::string& ctx_json, const std::string& cfg_json) {
  const json j = json::parse(ctx_json);
  hvrs::RewardContext ctx;
  ctx.d_robot2object = j.value("d_robot2object", 0.0);
  ctx.d_hand2object = j.value("d_hand2object", 0.0);
  ctx.d_object2goal = j.value("d_object2goal", 0.0);
  ctx.d_object2guide = j.value("d_object2guide", 0.0);
  if (j.contains("dhat")) {
    ctx.dhat = {j["dhat"].at(0).get<double>(), j["dhat"].at(1).get<double>()};
  }
  ctx.v_r_proj = j.value("v_r_proj", 0.0);
  ctx.v_o_proj = j.value("v_o_proj", 0.0);
  ctx.z_o = j.value("z_o", 0.0);
  ctx.z_init = j.value("z_init", 0.0);
  ctx.z_target = j.value("z_target", 0.0);
  ctx.delta_rot = j.value("delta_rot", 0.0);
  ctx.carrying_target = j.value("carrying_target", false);
  const hvrs::Config cfg = config_from(cfg_json);
  const hvrs::RewardBreakdown rb = hvrs::task_reward_terms(ctx, cfg.rewards);
  json out;
  out["terms"] = rb.terms;
  out["task"] = rb.task;
  return out.dump();
}

double stage2_reward_py(double d_r, double d_h, double d_goal, const std::string& cfg_json) {
  const hvrs::Config cfg = config_from(cfg_json);
  return hvrs::stage2_reward(d_r, d_h, d_goal, cfg.rewards);
}

double style_reward_py(double disc_out, const std::string& cfg_json) {
  const hvrs::Config cfg = config_from(cfg_json);
  return hvrs::style_reward(disc_out, cfg.rewards);
}

int switch_decision(double s, double d, double r, int p, const std::string& cfg_json) {
  const hvrs::Config cfg = config_from(cfg_json);
  hvrs::LifecycleState lc;
  return hvrs::switch_instruction(s, d, r, p, cfg.dagger.thresholds, lc);
}

std::string evaluate_oracle(const std::string& tasks_path, const std::string& split,
                            uint64_t seed, const std::string& cfg_json,
                            const std::string& format) {
  const hvrs::Config cfg = config_from(cfg_json);
  std::vector<hvrs::TaskSpec> tasks;
  for (auto& t : hvrs::load_tasks(tasks_path)) {
    if (t.split == split) tasks.push_back(std::move(t));
  }
  hvrs::OracleController ctl(cfg);
  const hvrs::MetricsReport report = hvrs::evaluate(ctl, tasks, cfg, seed);
  return hvrs::render_report(report, hvrs::parse_report_format(format));
}

py::tuple run_cli(const std::vector<std::string>& args, const std::string& stdin_text) {
  std::vector<const char*> argv;
  argv.push_back("hvrs");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  const int code =
      hvrs::cli_main(static_cast<int>(argv.size()), argv.data(), out, err, in);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_hvrs, m) {
  m.doc() = "desk-scale rearrangement simulator and training harness";

  m.def("default_config", &default_config, "effective default configuration as a JSON string");
  m.def("generate_tasks", &generate_tasks, py::arg("out_path"), py::arg("n_train"),
        py::arg("n_unseen"), py::arg("seed"), py::arg("layouts") = std::vector<std::string>{},
        "generate a task dataset file; returns the task count");
  m.def("split_pretrain", &split_pretrain, py::arg("in_path"), py::arg("out_path"),
        "expand a task file into single-object pretraining episodes; returns the episode count");
  m.def("task_reward", &task_reward, py::arg("context_json"), py::arg("config_json") = "",
        "evaluate the eight task reward terms on a JSON context; returns JSON");
  m.def("stage2_reward", &stage2_reward_py, py::arg("d_robot2object"), py::arg("d_hand2object"),
        py::arg("d_object2goal"), py::arg("config_json") = "",
        "release-and-step-back fine-tuning reward");
  m.def("style_reward", &style_reward_py, py::arg("discriminator_out"),
        py::arg("config_json") = "", "adversarial style reward from a discriminator output");
  m.def("total_reward", &hvrs::total_reward, py::arg("task_reward"), py::arg("style_reward"),
        "task + style");
  m.def("switch_decision", &switch_decision, py::arg("speed"), py::arg("distance_to_goal"),
        py::arg("robot_distance"), py::arg("progress_step"), py::arg("config_json") = "",
        "single-step instruction switch decision (1 or 2)");
  m.def("evaluate_oracle", &evaluate_oracle, py::arg("tasks_path"), py::arg("split") = "train",
        py::arg("seed") = 0, py::arg("config_json") = "", py::arg("format") = "json",
        "run the scripted oracle over a task split and render a metrics report");
  m.def("run_cli", &run_cli, py::arg("args"), py::arg("stdin_text") = "",
        "invoke the command-line interface; returns (exit_code, stdout, stderr)");
}
