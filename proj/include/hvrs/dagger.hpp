#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvrs/amp.hpp"
#include "hvrs/checkpoint.hpp"
#include "hvrs/config.hpp"
#include "hvrs/mlp.hpp"
#include "hvrs/policy.hpp"
#include "hvrs/sim.hpp"
#include "hvrs/tasks.hpp"

namespace hvrs {

// Which sub-task the agent is currently instructed to do. The switch from
// 1 to 2 fires once all four conditions hold and then latches.
struct LifecycleState {
  int m = 1;
  bool latched = false;
  int switched_at = -1;  // step_count at the moment the latch fired
};

// s: object-1 speed, d: object-1 distance to its goal, r: agent distance to
// object 1, p: elapsed steps. Returns the instruction index (1 or 2).
int switch_instruction(double s, double d, double r, int p, const SwitchThresholds& th,
                       LifecycleState& st);

// Everything the student is allowed to see: the forward occupancy grid, the
// same proprioceptive channels the discriminator uses, and the instruction
// tokens for the current sub-task.
struct StudentObservation {
  std::vector<float> grid;  // cells x cells x 3, from egocentric_observation
  std::array<float, kAmpStateDim> proprio{};
  int object_token = 0;
  int source_token = 0;
  int target_token = 0;
};

StudentObservation build_student_observation(const SimState& state, int instruction,
                                             const TaskSpec& task, const SimConfig& cfg);

struct StudentPolicy {
  MlpParams trunk;
  int pool = 2;        // average-pool factor applied to the grid
  int grid_cells = 0;  // unpooled grid side length
};

int student_input_dim(int grid_cells, int pool);
// Pooled grid + proprio + one-hot object/source/target tokens.
std::vector<double> student_input(const StudentObservation& obs, int grid_cells, int pool);
std::vector<double> student_mean_action(const StudentPolicy& s, const StudentObservation& obs);

StudentPolicy make_student(const Config& cfg, uint64_t seed);

// One imitation sample: the assembled student input and the teacher's
// squashed mean action.
struct DaggerRecord {
  std::vector<float> input;
  std::array<float, kActionDim> action{};
  int teacher_id = 0;
};

// Reservoir-capped aggregate across rounds.
struct AggregatedDataset {
  std::vector<DaggerRecord> records;
  size_t cap = 0;
  uint64_t seen = 0;  // total records ever offered

  void add(DaggerRecord r, Rng& rng);
};

struct RoundStats {
  int episodes = 0;
  int completed = 0;  // episodes that finished both sub-tasks
  uint64_t offered = 0;
};

// Runs every task once, executing a beta-mixture of teacher and student
// actions while labeling every visited state with the active teacher's mean
// action. beta=1 is pure teacher execution, beta=0 pure student.
RoundStats dagger_round(const StudentPolicy& student, const GaussianPolicy& teacher1,
                        const GaussianPolicy& teacher2, const std::vector<TaskSpec>& tasks,
                        double beta, AggregatedDataset& ds, uint64_t seed, const Config& cfg);

// Minibatch MSE regression onto the teacher actions. A stable hash of the
// record index holds out holdout_frac of the dataset; returns the held-out
// loss after the last epoch (training loss when the holdout is empty).
// Throws on an empty dataset.
double train_student(StudentPolicy& s, const AggregatedDataset& ds, const DaggerConfig& dcfg,
                     uint64_t seed, AdamState& opt);

struct DistillResult {
  StudentPolicy student;
  std::vector<std::string> log_lines;  // one JSON object per round
};

DistillResult run_stage4(const GaussianPolicy& teacher1, const GaussianPolicy& teacher2,
                         const std::vector<TaskSpec>& tasks, const Config& cfg, uint64_t seed,
                         std::ostream* log);

// Student checkpoint layout ("student.*" tensors plus pooling metadata).
TensorMap student_to_tensors(const StudentPolicy& s);
StudentPolicy student_from_tensors(const TensorMap& t);
void save_student(const std::string& path, const StudentPolicy& s);
StudentPolicy load_student(const std::string& path);
bool is_student_checkpoint(const TensorMap& t);

}  // namespace hvrs
