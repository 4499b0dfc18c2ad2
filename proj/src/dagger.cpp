#include "hvrs/dagger.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hvrs/checkpoint.hpp"
#include "hvrs/rewards.hpp"

namespace hvrs {

namespace {

using nlohmann::json;

constexpr int kGridChannels = 3;

bool subtask_complete(const SimState& state, const GoalSpec& goal, const RewardConfig& rcfg) {
  const RewardContext ctx = distances(state, goal);
  return ctx.d_object2goal < goal.success_radius && state.agent.carrying.empty() &&
         ctx.d_robot2object >= rcfg.stage2_robot_cap && ctx.d_hand2object >= rcfg.stage2_hand_cap;
}

void one_hot(std::vector<double>& out, int token, int vocab, const char* what) {
  if (token < 0 || token >= vocab) {
    throw std::invalid_argument(std::string("dagger: ") + what + " token " +
                                std::to_string(token) + " outside vocabulary of " +
                                std::to_string(vocab));
  }
  const size_t base = out.size();
  out.resize(base + vocab, 0.0);
  out[base + token] = 1.0;
}

}  // namespace

int switch_instruction(double s, double d, double r, int p, const SwitchThresholds& th,
                       LifecycleState& st) {
  if (!st.latched && s < th.speed && d < th.success && r > th.distance && p > th.time_steps) {
    st.latched = true;
    st.m = 2;
    st.switched_at = p;
  }
  return st.m;
}

StudentObservation build_student_observation(const SimState& state, int instruction,
                                             const TaskSpec& task, const SimConfig& cfg) {
  if (instruction < 1 || instruction > static_cast<int>(task.sub_tasks.size())) {
    throw std::invalid_argument("dagger: instruction index " + std::to_string(instruction) +
                                " out of range");
  }
  StudentObservation obs;
  obs.grid = egocentric_observation(state, cfg.grid);
  const auto proprio = amp_state_features(state);
  for (int i = 0; i < kAmpStateDim; ++i) obs.proprio[i] = static_cast<float>(proprio[i]);
  const InstructionSpec& instr = task.sub_tasks[instruction - 1].instruction;
  obs.object_token = instr.object_token;
  obs.source_token = instr.source_token;
  obs.target_token = instr.target_token;
  return obs;
}

int student_input_dim(int grid_cells, int pool) {
  if (pool <= 0 || grid_cells % pool != 0) {
    throw std::invalid_argument("dagger: pool " + std::to_string(pool) +
                                " does not divide grid side " + std::to_string(grid_cells));
  }
  const int p = grid_cells / pool;
  return p * p * kGridChannels + kAmpStateDim + category_vocab_size() + 2 * region_vocab_size();
}

std::vector<double> student_input(const StudentObservation& obs, int grid_cells, int pool) {
  if (pool <= 0 || grid_cells % pool != 0) {
    throw std::invalid_argument("dagger: pool " + std::to_string(pool) +
                                " does not divide grid side " + std::to_string(grid_cells));
  }
  const size_t expect = static_cast<size_t>(grid_cells) * grid_cells * kGridChannels;
  if (obs.grid.size() != expect) {
    throw std::invalid_argument("dagger: grid size " + std::to_string(obs.grid.size()) +
                                " does not match " + std::to_string(expect));
  }
  const int P = grid_cells / pool;
  std::vector<double> in;
  in.reserve(static_cast<size_t>(student_input_dim(grid_cells, pool)));
  in.resize(static_cast<size_t>(P) * P * kGridChannels, 0.0);
  const double inv = 1.0 / (pool * pool);
  for (int x = 0; x < grid_cells; ++x) {
    for (int y = 0; y < grid_cells; ++y) {
      const int px = x / pool, py = y / pool;
      for (int c = 0; c < kGridChannels; ++c) {
        in[(static_cast<size_t>(px) * P + py) * kGridChannels + c] +=
            inv * obs.grid[(static_cast<size_t>(x) * grid_cells + y) * kGridChannels + c];
      }
    }
  }
  for (int i = 0; i < kAmpStateDim; ++i) in.push_back(obs.proprio[i]);
  one_hot(in, obs.object_token, category_vocab_size(), "object");
  one_hot(in, obs.source_token, region_vocab_size(), "source");
  one_hot(in, obs.target_token, region_vocab_size(), "target");
  return in;
}

std::vector<double> student_mean_action(const StudentPolicy& s, const StudentObservation& obs) {
  MlpWorkspace ws;
  const std::vector<double> in = student_input(obs, s.grid_cells, s.pool);
  std::vector<double> u = mlp_forward(s.trunk, in, ws);
  for (auto& v : u) v = std::tanh(v);
  return u;
}

StudentPolicy make_student(const Config& cfg, uint64_t seed) {
  StudentPolicy s;
  s.pool = cfg.dagger.pool;
  s.grid_cells = cfg.sim.grid.cells;
  std::vector<int> sizes;
  sizes.push_back(student_input_dim(s.grid_cells, s.pool));
  for (int l = 0; l < cfg.dagger.student_layers; ++l) sizes.push_back(cfg.dagger.student_hidden);
  sizes.push_back(kActionDim);
  s.trunk = make_mlp(sizes, seed);
  return s;
}

void AggregatedDataset::add(DaggerRecord r, Rng& rng) {
  ++seen;
  if (records.size() < cap) {
    records.push_back(std::move(r));
    return;
  }
  if (cap == 0) return;
  const uint64_t j = rng.next_below(static_cast<uint32_t>(std::min<uint64_t>(seen, 0xFFFFFFFFull)));
  if (j < cap) records[static_cast<size_t>(j)] = std::move(r);
}

RoundStats dagger_round(const StudentPolicy& student, const GaussianPolicy& teacher1,
                        const GaussianPolicy& teacher2, const std::vector<TaskSpec>& tasks,
                        double beta, AggregatedDataset& ds, uint64_t seed, const Config& cfg) {
  if (tasks.empty()) throw std::invalid_argument("dagger: empty task list");
  RoundStats stats;
  MlpWorkspace ws;

  for (const TaskSpec& task : tasks) {
    Rng rng(seed, hash_str(0xDA66ull, task.id.c_str()));
    SimState state = reset(task, 0, hash_combine(seed, hash_str(1, task.id.c_str())),
                           std::nullopt, cfg.sim);
    LifecycleState lc;
    const GoalSpec& goal1 = task.sub_tasks[0].goal;
    const GoalSpec& goal2 = task.sub_tasks[1].goal;
    stats.episodes += 1;

    for (int t = 0; t < cfg.eval.episode_cap; ++t) {
      const SceneObject* obj = find_object(state, goal1.object_id);
      const double s = obj ? obj->vel.norm() : 0.0;
      const double d = obj ? (obj->pose.xy() - goal1.pose.xy()).norm() : 1e9;
      const double r = obj ? (state.agent.root.xy() - obj->pose.xy()).norm() : 0.0;
      const int m = switch_instruction(s, d, r, static_cast<int>(state.step_count),
                                       cfg.dagger.thresholds, lc);
      state.active_goal = m - 1;
      const GoalSpec& goal = m == 1 ? goal1 : goal2;
      const GaussianPolicy& teacher = m == 1 ? teacher1 : teacher2;

      const std::vector<float> priv = privileged_features(state, goal, cfg.sim);
      const std::vector<double> teacher_u =
          mean_action(teacher, std::vector<double>(priv.begin(), priv.end()));

      const StudentObservation obs = build_student_observation(state, m, task, cfg.sim);
      DaggerRecord rec;
      {
        const std::vector<double> in = student_input(obs, student.grid_cells, student.pool);
        rec.input.assign(in.begin(), in.end());
      }
      for (int i = 0; i < kActionDim; ++i) rec.action[i] = static_cast<float>(teacher_u[i]);
      rec.teacher_id = m;
      ds.add(std::move(rec), rng);
      stats.offered += 1;

      std::vector<double> u = teacher_u;
      if (!(rng.uniform() < beta)) {
        const std::vector<double> in = student_input(obs, student.grid_cells, student.pool);
        u = mlp_forward(student.trunk, in, ws);
        for (auto& v : u) v = std::tanh(v);
      }
      step_mut(state, decode_action(u, cfg.sim), cfg.sim.dt, cfg.sim);

      if (lc.m == 2 && subtask_complete(state, goal2, cfg.rewards)) {
        stats.completed += 1;
        break;
      }
    }
  }
  return stats;
}

double train_student(StudentPolicy& s, const AggregatedDataset& ds, const DaggerConfig& dcfg,
                     uint64_t seed, AdamState& opt) {
  if (ds.records.empty()) throw std::invalid_argument("dagger: empty dataset");

  std::vector<size_t> train_idx, hold_idx;
  const uint64_t cut = static_cast<uint64_t>(dcfg.holdout_frac * 1000000.0);
  for (size_t i = 0; i < ds.records.size(); ++i) {
    if (mix64(hash_combine(0xD474ull, i)) % 1000000ull < cut) {
      hold_idx.push_back(i);
    } else {
      train_idx.push_back(i);
    }
  }
  if (train_idx.empty()) train_idx = hold_idx;

  MlpWorkspace ws;
  MlpGrads g;
  g.match(s.trunk);
  std::vector<double> in, dpred;

  for (int epoch = 0; epoch < dcfg.student_epochs; ++epoch) {
    Rng rng(seed, hash_combine(0x57D3ull, static_cast<uint64_t>(epoch)));
    for (size_t i = train_idx.size(); i > 1; --i) {
      const size_t j = rng.next_below(static_cast<uint32_t>(i));
      std::swap(train_idx[i - 1], train_idx[j]);
    }
    for (size_t start = 0; start < train_idx.size();
         start += static_cast<size_t>(dcfg.minibatch)) {
      const size_t end = std::min(train_idx.size(), start + static_cast<size_t>(dcfg.minibatch));
      const double m = static_cast<double>(end - start);
      g.zero();
      double loss = 0.0;
      for (size_t k = start; k < end; ++k) {
        const DaggerRecord& rec = ds.records[train_idx[k]];
        in.assign(rec.input.begin(), rec.input.end());
        const std::vector<double>& raw = mlp_forward(s.trunk, in, ws);
        dpred.assign(raw.size(), 0.0);
        for (size_t j = 0; j < raw.size(); ++j) {
          const double pred = std::tanh(raw[j]);
          const double err = pred - rec.action[j];
          loss += err * err / m;
          dpred[j] = 2.0 * err * (1.0 - pred * pred) / m;
        }
        mlp_backward(s.trunk, ws, dpred, g);
      }
      if (!std::isfinite(loss)) throw std::runtime_error("training diverged: student loss");
      adam_step(s.trunk, g, opt, dcfg.lr);
    }
  }

  const std::vector<size_t>& eval_idx = hold_idx.empty() ? train_idx : hold_idx;
  double hold_loss = 0.0;
  for (const size_t i : eval_idx) {
    const DaggerRecord& rec = ds.records[i];
    in.assign(rec.input.begin(), rec.input.end());
    const std::vector<double>& raw = mlp_forward(s.trunk, in, ws);
    for (size_t j = 0; j < raw.size(); ++j) {
      const double err = std::tanh(raw[j]) - rec.action[j];
      hold_loss += err * err;
    }
  }
  return hold_loss / static_cast<double>(eval_idx.size());
}

DistillResult run_stage4(const GaussianPolicy& teacher1, const GaussianPolicy& teacher2,
                         const std::vector<TaskSpec>& tasks, const Config& cfg, uint64_t seed,
                         std::ostream* log) {
  DistillResult result;
  result.student = make_student(cfg, hash_combine(seed, 0x4544ull));
  AdamState opt;
  opt.match(result.student.trunk);
  AggregatedDataset ds;
  ds.cap = static_cast<size_t>(cfg.dagger.dataset_cap);

  const int rounds = cfg.dagger.rounds;
  for (int k = 0; k < rounds; ++k) {
    const double beta = rounds > 1 ? 1.0 - static_cast<double>(k) / (rounds - 1) : 1.0;
    const RoundStats stats = dagger_round(result.student, teacher1, teacher2, tasks, beta, ds,
                                          hash_combine(seed, static_cast<uint64_t>(k)), cfg);
    const double hold_loss =
        train_student(result.student, ds, cfg.dagger,
                      hash_combine(seed, hash_combine(0x7EAC4ull, static_cast<uint64_t>(k))), opt);
    json line;
    line["round"] = k;
    line["beta"] = beta;
    line["dataset"] = ds.records.size();
    line["seen"] = ds.seen;
    line["holdout_loss"] = hold_loss;
    line["episodes"] = stats.episodes;
    line["completed"] = stats.completed;
    result.log_lines.push_back(line.dump());
    if (log) (*log) << result.log_lines.back() << "\n" << std::flush;
  }
  return result;
}

TensorMap student_to_tensors(const StudentPolicy& s) {
  TensorMap t;
  pack_mlp(t, "student", s.trunk);
  pack_scalar(t, "student.pool", static_cast<double>(s.pool));
  pack_scalar(t, "student.grid_cells", static_cast<double>(s.grid_cells));
  return t;
}

StudentPolicy student_from_tensors(const TensorMap& t) {
  StudentPolicy s;
  s.trunk = unpack_mlp(t, "student");
  s.pool = static_cast<int>(unpack_scalar(t, "student.pool"));
  s.grid_cells = static_cast<int>(unpack_scalar(t, "student.grid_cells"));
  return s;
}

void save_student(const std::string& path, const StudentPolicy& s) {
  save_checkpoint(path, student_to_tensors(s));
}

StudentPolicy load_student(const std::string& path) {
  return student_from_tensors(load_checkpoint(path));
}

bool is_student_checkpoint(const TensorMap& t) { return t.count("student.pool") > 0; }

}  // namespace hvrs
