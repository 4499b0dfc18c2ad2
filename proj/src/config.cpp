#include "hvrs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace hvrs {

using nlohmann::json;

namespace {

json grid_to_json(const GridSpec& g) { return {{"cells", g.cells}, {"extent", g.extent}}; }

json sim_to_json(const SimConfig& s) {
  return {
      {"dt", s.dt},
      {"v_max", s.v_max},
      {"yaw_rate_max", s.yaw_rate_max},
      {"bent_speed_scale", s.bent_speed_scale},
      {"reach_radius", s.reach_radius},
      {"grasp_radius", s.grasp_radius},
      {"carry_height", s.carry_height},
      {"torso_height", s.torso_height},
      {"agent_radius", s.agent_radius},
      {"hand_speed", s.hand_speed},
      {"standup_steps", s.standup_steps},
      {"standup_lift_min", s.standup_lift_min},
      {"settle_decel", s.settle_decel},
      {"settle_z_speed", s.settle_z_speed},
      {"guide_pass_radius", s.guide_pass_radius},
      {"feature_pcd_points", s.feature_pcd_points},
      {"grid", grid_to_json(s.grid)},
  };
}

json rewards_to_json(const RewardConfig& r) {
  return {
      {"alpha", r.alpha},
      {"v_t", r.v_t},
      {"v_o_target", r.v_o_target},
      {"stage2_robot_cap", r.stage2_robot_cap},
      {"stage2_hand_cap", r.stage2_hand_cap},
      {"thresh_object2goal", r.thresh_object2goal},
      {"success_radius", r.success_radius},
      {"lambda_amp", r.lambda_amp},
      {"style_eps", r.style_eps},
      {"clamp_height_term", r.clamp_height_term},
  };
}

json amp_to_json(const AmpConfig& a) {
  return {
      {"hidden", a.hidden},
      {"hidden_layers", a.hidden_layers},
      {"lr", a.lr},
      {"logit_clamp", a.logit_clamp},
      {"batch", a.batch},
      {"buffer_capacity", a.buffer_capacity},
      {"ref_transitions", a.ref_transitions},
      {"updates_per_epoch", a.updates_per_epoch},
  };
}

std::string mode_name(RewardMode m) { return m == RewardMode::kStage2 ? "stage2" : "task_and_style"; }

json stage_to_json(const StageConfig& s) {
  return {
      {"epochs", s.epochs},
      {"envs", s.envs},
      {"steps_per_env", s.steps_per_env},
      {"episode_steps", s.episode_steps},
      {"ppo_epochs", s.ppo_epochs},
      {"minibatch", s.minibatch},
      {"lr", s.lr},
      {"gamma", s.gamma},
      {"lam", s.lam},
      {"clip", s.clip},
      {"vf_coef", s.vf_coef},
      {"ent_coef", s.ent_coef},
      {"max_grad_norm", s.max_grad_norm},
      {"hidden", s.hidden},
      {"hidden_layers", s.hidden_layers},
      {"log_std_init", s.log_std_init},
      {"reward_mode", mode_name(s.reward_mode)},
  };
}

json thresholds_to_json(const SwitchThresholds& t) {
  return {
      {"speed", t.speed},
      {"success", t.success},
      {"distance", t.distance},
      {"time_steps", t.time_steps},
  };
}

json dagger_to_json(const DaggerConfig& d) {
  return {
      {"rounds", d.rounds},
      {"student_epochs", d.student_epochs},
      {"minibatch", d.minibatch},
      {"lr", d.lr},
      {"dataset_cap", d.dataset_cap},
      {"student_hidden", d.student_hidden},
      {"student_layers", d.student_layers},
      {"pool", d.pool},
      {"holdout_frac", d.holdout_frac},
      {"thresholds", thresholds_to_json(d.thresholds)},
  };
}

json full_scale_to_json(const FullScaleReference& f) {
  return {
      {"tasks_train", f.tasks_train},
      {"tasks_unseen", f.tasks_unseen},
      {"stage1_epochs", f.stage1_epochs},
      {"stage2_epochs", f.stage2_epochs},
      {"stage3_epochs", f.stage3_epochs},
      {"distill_epochs", f.distill_epochs},
  };
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::runtime_error("config: " + where + ": " + what);
}

// Applies json object j onto the given fields, checking every key against the
// whitelist implied by the setter map.
class Strict {
 public:
  Strict(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(where_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) pending_.push_back(it.key());
  }

  template <typename T>
  void field(const char* key, T& out) {
    take(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(where_ + "." + key, e.what());
    }
  }

  const json* sub(const char* key) {
    take(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  ~Strict() noexcept(false) {
    if (!pending_.empty() && !std::uncaught_exceptions())
      fail(where_ + "." + pending_.front(), "unknown field");
  }

 private:
  void take(const char* key) {
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
      if (*it == key) {
        pending_.erase(it);
        return;
      }
    }
  }

  const json& j_;
  std::string where_;
  std::vector<std::string> pending_;
};

void grid_from(const json& j, GridSpec& g) {
  Strict s(j, "sim.grid");
  s.field("cells", g.cells);
  s.field("extent", g.extent);
}

void sim_from(const json& j, SimConfig& c) {
  Strict s(j, "sim");
  s.field("dt", c.dt);
  s.field("v_max", c.v_max);
  s.field("yaw_rate_max", c.yaw_rate_max);
  s.field("bent_speed_scale", c.bent_speed_scale);
  s.field("reach_radius", c.reach_radius);
  s.field("grasp_radius", c.grasp_radius);
  s.field("carry_height", c.carry_height);
  s.field("torso_height", c.torso_height);
  s.field("agent_radius", c.agent_radius);
  s.field("hand_speed", c.hand_speed);
  s.field("standup_steps", c.standup_steps);
  s.field("standup_lift_min", c.standup_lift_min);
  s.field("settle_decel", c.settle_decel);
  s.field("settle_z_speed", c.settle_z_speed);
  s.field("guide_pass_radius", c.guide_pass_radius);
  s.field("feature_pcd_points", c.feature_pcd_points);
  if (const json* g = s.sub("grid")) grid_from(*g, c.grid);
}

void rewards_from(const json& j, RewardConfig& c) {
  Strict s(j, "rewards");
  s.field("alpha", c.alpha);
  s.field("v_t", c.v_t);
  s.field("v_o_target", c.v_o_target);
  s.field("stage2_robot_cap", c.stage2_robot_cap);
  s.field("stage2_hand_cap", c.stage2_hand_cap);
  s.field("thresh_object2goal", c.thresh_object2goal);
  s.field("success_radius", c.success_radius);
  s.field("lambda_amp", c.lambda_amp);
  s.field("style_eps", c.style_eps);
  s.field("clamp_height_term", c.clamp_height_term);
}

void amp_from(const json& j, AmpConfig& c) {
  Strict s(j, "amp");
  s.field("hidden", c.hidden);
  s.field("hidden_layers", c.hidden_layers);
  s.field("lr", c.lr);
  s.field("logit_clamp", c.logit_clamp);
  s.field("batch", c.batch);
  s.field("buffer_capacity", c.buffer_capacity);
  s.field("ref_transitions", c.ref_transitions);
  s.field("updates_per_epoch", c.updates_per_epoch);
}

void stage_from(const json& j, const std::string& where, StageConfig& c) {
  Strict s(j, where);
  s.field("epochs", c.epochs);
  s.field("envs", c.envs);
  s.field("steps_per_env", c.steps_per_env);
  s.field("episode_steps", c.episode_steps);
  s.field("ppo_epochs", c.ppo_epochs);
  s.field("minibatch", c.minibatch);
  s.field("lr", c.lr);
  s.field("gamma", c.gamma);
  s.field("lam", c.lam);
  s.field("clip", c.clip);
  s.field("vf_coef", c.vf_coef);
  s.field("ent_coef", c.ent_coef);
  s.field("max_grad_norm", c.max_grad_norm);
  s.field("hidden", c.hidden);
  s.field("hidden_layers", c.hidden_layers);
  s.field("log_std_init", c.log_std_init);
  std::string mode = mode_name(c.reward_mode);
  s.field("reward_mode", mode);
  if (mode == "stage2")
    c.reward_mode = RewardMode::kStage2;
  else if (mode == "task_and_style")
    c.reward_mode = RewardMode::kTaskAndStyle;
  else
    fail(where + ".reward_mode", "expected 'task_and_style' or 'stage2'");
}

void thresholds_from(const json& j, SwitchThresholds& t) {
  Strict s(j, "dagger.thresholds");
  s.field("speed", t.speed);
  s.field("success", t.success);
  s.field("distance", t.distance);
  s.field("time_steps", t.time_steps);
}

void dagger_from(const json& j, DaggerConfig& c) {
  Strict s(j, "dagger");
  s.field("rounds", c.rounds);
  s.field("student_epochs", c.student_epochs);
  s.field("minibatch", c.minibatch);
  s.field("lr", c.lr);
  s.field("dataset_cap", c.dataset_cap);
  s.field("student_hidden", c.student_hidden);
  s.field("student_layers", c.student_layers);
  s.field("pool", c.pool);
  s.field("holdout_frac", c.holdout_frac);
  if (const json* t = s.sub("thresholds")) thresholds_from(*t, c.thresholds);
}

}  // namespace

std::string config_to_json(const Config& c) {
  json j = {
      {"sim", sim_to_json(c.sim)},
      {"rewards", rewards_to_json(c.rewards)},
      {"amp", amp_to_json(c.amp)},
      {"stages",
       {{"stage1", stage_to_json(c.stages.stage1)},
        {"stage2", stage_to_json(c.stages.stage2)},
        {"stage3", stage_to_json(c.stages.stage3)}}},
      {"dagger", dagger_to_json(c.dagger)},
      {"eval", {{"episode_cap", c.eval.episode_cap}}},
      {"tasks", {{"n_train", c.tasks.n_train}, {"n_unseen", c.tasks.n_unseen}}},
      {"full_scale_reference", full_scale_to_json(c.full_scale_reference)},
  };
  return j.dump(2);
}

Config config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: parse error: ") + e.what());
  }
  Config c;
  Strict s(j, "config");
  if (const json* x = s.sub("sim")) sim_from(*x, c.sim);
  if (const json* x = s.sub("rewards")) rewards_from(*x, c.rewards);
  if (const json* x = s.sub("amp")) amp_from(*x, c.amp);
  if (const json* x = s.sub("stages")) {
    Strict st(*x, "stages");
    if (const json* y = st.sub("stage1")) stage_from(*y, "stages.stage1", c.stages.stage1);
    if (const json* y = st.sub("stage2")) stage_from(*y, "stages.stage2", c.stages.stage2);
    if (const json* y = st.sub("stage3")) stage_from(*y, "stages.stage3", c.stages.stage3);
  }
  if (const json* x = s.sub("dagger")) dagger_from(*x, c.dagger);
  if (const json* x = s.sub("eval")) {
    Strict ev(*x, "eval");
    ev.field("episode_cap", c.eval.episode_cap);
  }
  if (const json* x = s.sub("tasks")) {
    Strict tk(*x, "tasks");
    tk.field("n_train", c.tasks.n_train);
    tk.field("n_unseen", c.tasks.n_unseen);
  }
  if (const json* x = s.sub("full_scale_reference")) {
    Strict fs(*x, "full_scale_reference");
    fs.field("tasks_train", c.full_scale_reference.tasks_train);
    fs.field("tasks_unseen", c.full_scale_reference.tasks_unseen);
    fs.field("stage1_epochs", c.full_scale_reference.stage1_epochs);
    fs.field("stage2_epochs", c.full_scale_reference.stage2_epochs);
    fs.field("stage3_epochs", c.full_scale_reference.stage3_epochs);
    fs.field("distill_epochs", c.full_scale_reference.distill_epochs);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("HVRS_CONFIG")) p = env;
  }
  if (p.empty()) return Config{};
  std::ifstream in(p);
  if (!in) throw std::runtime_error("config: cannot open " + p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace hvrs
