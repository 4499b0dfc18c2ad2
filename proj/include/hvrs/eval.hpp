#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hvrs/config.hpp"
#include "hvrs/dagger.hpp"
#include "hvrs/policy.hpp"
#include "hvrs/sim.hpp"
#include "hvrs/tasks.hpp"

namespace hvrs {

// A deterministic action source for evaluation rollouts. instruction is the
// currently active sub-task index (1-based, from the switch rule).
class Controller {
 public:
  virtual ~Controller() = default;
  virtual ActionCommand act(const SimState& state, const TaskSpec& task, int instruction) = 0;
  virtual std::string name() const = 0;
};

class OracleController : public Controller {
 public:
  explicit OracleController(const Config& cfg) : cfg_(cfg) {}
  ActionCommand act(const SimState& state, const TaskSpec& task, int instruction) override;
  std::string name() const override { return "oracle"; }

 private:
  Config cfg_;
};

// Mean-action rollout of one policy (applied to whichever sub-task is
// active) or of a teacher pair (model m handles sub-task m).
class PolicyController : public Controller {
 public:
  PolicyController(GaussianPolicy model, const Config& cfg);
  PolicyController(GaussianPolicy model1, GaussianPolicy model2, const Config& cfg);
  ActionCommand act(const SimState& state, const TaskSpec& task, int instruction) override;
  std::string name() const override { return dual_ ? "teachers" : "policy"; }

 private:
  GaussianPolicy model1_;
  GaussianPolicy model2_;
  bool dual_ = false;
  Config cfg_;
};

class StudentController : public Controller {
 public:
  StudentController(StudentPolicy s, const Config& cfg);
  ActionCommand act(const SimState& state, const TaskSpec& task, int instruction) override;
  std::string name() const override { return "student"; }

 private:
  StudentPolicy student_;
  Config cfg_;
};

struct EpisodeResult {
  std::string task_id;
  std::string layout;
  bool success1 = false;
  bool success2 = false;
  bool success_all = false;
  double dist1 = 0.0;        // object 1 to its goal at episode end
  double dist2 = 0.0;        // object 2 to its goal at episode end
  double disturbance = 0.0;  // object-1 drift after its first settled placement
  int steps = 0;
  int switched_at = -1;
};

struct LayoutStats {
  std::string layout;
  int episodes = 0;
  double success_all_pct = 0.0;
};

struct MetricsReport {
  std::string mode;
  uint64_t seed = 0;
  double success_radius = 0.0;
  int episodes = 0;
  double success1_pct = 0.0;
  double success2_pct = 0.0;
  double success_all_pct = 0.0;
  double mean_dist1 = 0.0;
  double mean_dist2 = 0.0;
  double mean_disturbance = 0.0;
  double mean_steps = 0.0;
  std::vector<LayoutStats> per_layout;  // sorted by layout name
  std::vector<EpisodeResult> results;   // sorted by task id
};

// Recomputes every aggregate from the episode list in place.
void recount(MetricsReport& report);

// One episode per task, tasks in id order, switch rule applied every step,
// episodes capped at cfg.eval.episode_cap steps.
MetricsReport evaluate(Controller& ctl, const std::vector<TaskSpec>& tasks, const Config& cfg,
                       uint64_t seed);

enum class ReportFormat { kText, kJson, kCsv };
ReportFormat parse_report_format(const std::string& s);  // throws on unknown name

std::string render_report(const MetricsReport& report, ReportFormat format);
MetricsReport report_from_json(const std::string& text);
MetricsReport report_from_csv(const std::string& text);

}  // namespace hvrs
