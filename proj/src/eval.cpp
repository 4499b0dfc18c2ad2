#include "hvrs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hvrs/oracle.hpp"
#include "hvrs/rewards.hpp"

namespace hvrs {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

bool subtask_complete(const SimState& state, const GoalSpec& goal, const RewardConfig& rcfg) {
  const RewardContext ctx = distances(state, goal);
  return ctx.d_object2goal < goal.success_radius && state.agent.carrying.empty() &&
         ctx.d_robot2object >= rcfg.stage2_robot_cap && ctx.d_hand2object >= rcfg.stage2_hand_cap;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kCsvHeader =
    "mode,seed,success_radius,task_id,layout,success1,success2,success_all,dist1,dist2,"
    "disturbance,steps,switched_at";

}  // namespace

ActionCommand OracleController::act(const SimState& state, const TaskSpec& task,
                                    int instruction) {
  // While on the second sub-task, never plow the already-placed first object.
  const std::string protect =
      instruction == 2 ? task.sub_tasks[0].goal.object_id : std::string{};
  return scripted_oracle(state, task.sub_tasks[instruction - 1].goal, cfg_.sim, cfg_.rewards,
                         protect);
}

PolicyController::PolicyController(GaussianPolicy model, const Config& cfg)
    : model1_(std::move(model)), dual_(false), cfg_(cfg) {}

PolicyController::PolicyController(GaussianPolicy model1, GaussianPolicy model2,
                                   const Config& cfg)
    : model1_(std::move(model1)), model2_(std::move(model2)), dual_(true), cfg_(cfg) {}

ActionCommand PolicyController::act(const SimState& state, const TaskSpec& task,
                                    int instruction) {
  const GoalSpec& goal = task.sub_tasks[instruction - 1].goal;
  const GaussianPolicy& model = dual_ && instruction == 2 ? model2_ : model1_;
  const std::vector<float> obs = privileged_features(state, goal, cfg_.sim);
  const std::vector<double> u = mean_action(model, std::vector<double>(obs.begin(), obs.end()));
  return decode_action(u, cfg_.sim);
}

StudentController::StudentController(StudentPolicy s, const Config& cfg)
    : student_(std::move(s)), cfg_(cfg) {}

ActionCommand StudentController::act(const SimState& state, const TaskSpec& task,
                                     int instruction) {
  const StudentObservation obs = build_student_observation(state, instruction, task, cfg_.sim);
  return decode_action(student_mean_action(student_, obs), cfg_.sim);
}

void recount(MetricsReport& report) {
  report.episodes = static_cast<int>(report.results.size());
  report.success1_pct = report.success2_pct = report.success_all_pct = 0.0;
  report.mean_dist1 = report.mean_dist2 = report.mean_disturbance = report.mean_steps = 0.0;
  report.per_layout.clear();
  if (report.results.empty()) return;

  std::map<std::string, LayoutStats> by_layout;
  for (const EpisodeResult& r : report.results) {
    report.success1_pct += r.success1 ? 1.0 : 0.0;
    report.success2_pct += r.success2 ? 1.0 : 0.0;
    report.success_all_pct += r.success_all ? 1.0 : 0.0;
    report.mean_dist1 += r.dist1;
    report.mean_dist2 += r.dist2;
    report.mean_disturbance += r.disturbance;
    report.mean_steps += r.steps;
    LayoutStats& ls = by_layout[r.layout];
    ls.layout = r.layout;
    ls.episodes += 1;
    ls.success_all_pct += r.success_all ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(report.results.size());
  report.success1_pct *= 100.0 / n;
  report.success2_pct *= 100.0 / n;
  report.success_all_pct *= 100.0 / n;
  report.mean_dist1 /= n;
  report.mean_dist2 /= n;
  report.mean_disturbance /= n;
  report.mean_steps /= n;
  for (auto& [name, ls] : by_layout) {
    ls.success_all_pct *= 100.0 / ls.episodes;
    report.per_layout.push_back(ls);
  }
}

MetricsReport evaluate(Controller& ctl, const std::vector<TaskSpec>& tasks, const Config& cfg,
                       uint64_t seed) {
  std::vector<TaskSpec> ordered = tasks;
  std::sort(ordered.begin(), ordered.end(),
            [](const TaskSpec& a, const TaskSpec& b) { return a.id < b.id; });

  MetricsReport report;
  report.mode = ctl.name();
  report.seed = seed;
  report.success_radius = cfg.rewards.success_radius;

  for (const TaskSpec& task : ordered) {
    const GoalSpec& goal1 = task.sub_tasks[0].goal;
    const GoalSpec& goal2 = task.sub_tasks[1].goal;
    SimState state = reset(task, 0, hash_combine(seed, hash_str(0xE7A1ull, task.id.c_str())),
                           std::nullopt, cfg.sim);
    LifecycleState lc;
    bool placed = false;
    Vec2 placed_xy{};

    for (int t = 0; t < cfg.eval.episode_cap; ++t) {
      const SceneObject* obj1 = find_object(state, goal1.object_id);
      const double s = obj1 ? obj1->vel.norm() : 0.0;
      const double d = obj1 ? (obj1->pose.xy() - goal1.pose.xy()).norm() : 1e9;
      const double r = obj1 ? (state.agent.root.xy() - obj1->pose.xy()).norm() : 0.0;
      const int m = switch_instruction(s, d, r, static_cast<int>(state.step_count),
                                       cfg.dagger.thresholds, lc);
      state.active_goal = m - 1;

      const ActionCommand cmd = ctl.act(state, task, m);
      step_mut(state, cmd, cfg.sim.dt, cfg.sim);

      if (!placed) {
        const SceneObject* o = find_object(state, goal1.object_id);
        if (o && state.agent.carrying != o->id &&
            o->vel.norm() < cfg.dagger.thresholds.speed &&
            (o->pose.xy() - goal1.pose.xy()).norm() < goal1.success_radius) {
          placed = true;
          placed_xy = o->pose.xy();
        }
      }
      if (lc.m == 2 && subtask_complete(state, goal2, cfg.rewards)) break;
    }

    EpisodeResult er;
    er.task_id = task.id;
    er.layout = task.layout;
    const SceneObject* obj1 = find_object(state, goal1.object_id);
    const SceneObject* obj2 = find_object(state, goal2.object_id);
    er.dist1 = obj1 ? (obj1->pose.xy() - goal1.pose.xy()).norm() : 1e9;
    er.dist2 = obj2 ? (obj2->pose.xy() - goal2.pose.xy()).norm() : 1e9;
    er.success1 = obj1 && er.dist1 < goal1.success_radius && state.agent.carrying != obj1->id;
    er.success2 = obj2 && er.dist2 < goal2.success_radius && state.agent.carrying != obj2->id &&
                  lc.m == 2;
    er.success_all = er.success1 && er.success2;
    er.disturbance = (placed && obj1) ? (obj1->pose.xy() - placed_xy).norm() : 0.0;
    er.steps = static_cast<int>(state.step_count);
    er.switched_at = lc.switched_at;
    report.results.push_back(std::move(er));
  }

  recount(report);
  return report;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  throw std::invalid_argument("unknown report format: " + s);
}

namespace {

std::string render_text(const MetricsReport& r) {
  std::ostringstream os;
  os << "rearrangement evaluation  mode=" << r.mode << "  seed=" << r.seed
     << "  episodes=" << r.episodes << "  success_radius=" << fmt3(r.success_radius) << "\n";
  struct Row {
    const char* label;
    double value;
    const char* arrow;
  };
  const Row rows[] = {
      {"Success 1 (%)", r.success1_pct, "\u2191"},
      {"Success 2 (%)", r.success2_pct, "\u2191"},
      {"Success All (%)", r.success_all_pct, "\u2191"},
      {"Dist 1 (m)", r.mean_dist1, "\u2193"},
      {"Dist 2 (m)", r.mean_dist2, "\u2193"},
      {"Disturbance (m)", r.mean_disturbance, "\u2193"},
      {"Steps", r.mean_steps, "\u2193"},
  };
  size_t label_w = 0, value_w = 0;
  for (const Row& row : rows) {
    label_w = std::max(label_w, std::string(row.label).size());
    value_w = std::max(value_w, fmt3(row.value).size());
  }
  for (const Row& row : rows) {
    std::string label = row.label;
    label.resize(label_w, ' ');
    std::string value = fmt3(row.value);
    os << label << "  " << std::string(value_w - value.size(), ' ') << value << "  "
       << row.arrow << "\n";
  }
  if (!r.per_layout.empty()) {
    os << "per-layout Success All (%):\n";
    size_t name_w = 0;
    for (const LayoutStats& ls : r.per_layout) name_w = std::max(name_w, ls.layout.size());
    for (const LayoutStats& ls : r.per_layout) {
      std::string name = ls.layout;
      name.resize(name_w, ' ');
      os << "  " << name << "  " << fmt3(ls.success_all_pct) << "  (" << ls.episodes
         << " episodes)\n";
    }
  }
  return os.str();
}

json episode_to_json(const EpisodeResult& e) {
  json j;
  j["task_id"] = e.task_id;
  j["layout"] = e.layout;
  j["success1"] = e.success1;
  j["success2"] = e.success2;
  j["success_all"] = e.success_all;
  j["dist1"] = e.dist1;
  j["dist2"] = e.dist2;
  j["disturbance"] = e.disturbance;
  j["steps"] = e.steps;
  j["switched_at"] = e.switched_at;
  return j;
}

EpisodeResult episode_from_json(const json& j) {
  EpisodeResult e;
  e.task_id = j.at("task_id").get<std::string>();
  e.layout = j.at("layout").get<std::string>();
  e.success1 = j.at("success1").get<bool>();
  e.success2 = j.at("success2").get<bool>();
  e.success_all = j.at("success_all").get<bool>();
  e.dist1 = j.at("dist1").get<double>();
  e.dist2 = j.at("dist2").get<double>();
  e.disturbance = j.at("disturbance").get<double>();
  e.steps = j.at("steps").get<int>();
  e.switched_at = j.at("switched_at").get<int>();
  return e;
}

std::string render_json(const MetricsReport& r) {
  json j;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["success_radius"] = r.success_radius;
  j["episodes"] = r.episodes;
  j["success1_pct"] = r.success1_pct;
  j["success2_pct"] = r.success2_pct;
  j["success_all_pct"] = r.success_all_pct;
  j["mean_dist1"] = r.mean_dist1;
  j["mean_dist2"] = r.mean_dist2;
  j["mean_disturbance"] = r.mean_disturbance;
  j["mean_steps"] = r.mean_steps;
  j["per_layout"] = json::array();
  for (const LayoutStats& ls : r.per_layout) {
    json lj;
    lj["layout"] = ls.layout;
    lj["episodes"] = ls.episodes;
    lj["success_all_pct"] = ls.success_all_pct;
    j["per_layout"].push_back(lj);
  }
  j["results"] = json::array();
  for (const EpisodeResult& e : r.results) j["results"].push_back(episode_to_json(e));
  return j.dump(2) + "\n";
}

std::string render_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const EpisodeResult& e : r.results) {
    os << r.mode << "," << r.seed << "," << fmt17(r.success_radius) << "," << e.task_id << ","
       << e.layout << "," << (e.success1 ? 1 : 0) << "," << (e.success2 ? 1 : 0) << ","
       << (e.success_all ? 1 : 0) << "," << fmt17(e.dist1) << "," << fmt17(e.dist2) << ","
       << fmt17(e.disturbance) << "," << e.steps << "," << e.switched_at << "\n";
  }
  return os.str();
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText:
      return render_text(report);
    case ReportFormat::kJson:
      return render_json(report);
    case ReportFormat::kCsv:
      return render_csv(report);
  }
  throw std::logic_error("unreachable report format");
}

MetricsReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  MetricsReport r;
  r.mode = j.at("mode").get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  r.success_radius = j.at("success_radius").get<double>();
  for (const json& e : j.at("results")) r.results.push_back(episode_from_json(e));
  recount(r);
  return r;
}

MetricsReport report_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  MetricsReport r;
  bool first = true;
  bool have_meta = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header: " + line);
      continue;
    }
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 13) {
      throw std::invalid_argument("csv: expected 13 fields, got " + std::to_string(f.size()));
    }
    if (!have_meta) {
      r.mode = f[0];
      r.seed = std::strtoull(f[1].c_str(), nullptr, 10);
      r.success_radius = std::strtod(f[2].c_str(), nullptr);
      have_meta = true;
    }
    EpisodeResult e;
    e.task_id = f[3];
    e.layout = f[4];
    e.success1 = f[5] == "1";
    e.success2 = f[6] == "1";
    e.success_all = f[7] == "1";
    e.dist1 = std::strtod(f[8].c_str(), nullptr);
    e.dist2 = std::strtod(f[9].c_str(), nullptr);
    e.disturbance = std::strtod(f[10].c_str(), nullptr);
    e.steps = std::atoi(f[11].c_str());
    e.switched_at = std::atoi(f[12].c_str());
    r.results.push_back(std::move(e));
  }
  if (first) throw std::invalid_argument("csv: missing header");
  recount(r);
  return r;
}

}  // namespace hvrs
