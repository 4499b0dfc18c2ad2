#include "hvrs/tasks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hvrs/rng.hpp"

namespace hvrs {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCategoryVocab = 8;
constexpr int kRegionVocab = 24;
constexpr double kWallMargin = 0.75;       // sampled poses keep this from walls
constexpr double kObstacleClearance = 0.75; // beyond the obstacle radius
constexpr double kMinStartGoalDist = 1.0;
constexpr double kGuideSpacing = 1.0;
constexpr double kGridStep = 0.25;
constexpr double kPathInflation = 0.35;    // agent radius + margin

int category_token(const std::string& cat) {
  static const std::array<const char*, kCategoryVocab> cats = {
      "box", "vase", "lamp", "plant", "bin", "stool", "kettle", "tray"};
  for (int i = 0; i < kCategoryVocab; ++i)
    if (cat == cats[i]) return i;
  throw std::runtime_error("unknown object category: " + cat);
}

std::vector<Vec3> make_cloud(double footprint, double height) {
  std::vector<Vec3> pts;
  pts.reserve(24);
  for (int k = 0; k < 16; ++k) {
    double a = 2.0 * kPi * k / 16.0;
    pts.push_back({footprint * std::cos(a), footprint * std::sin(a), 0.04});
  }
  for (int k = 0; k < 8; ++k) {
    double a = 2.0 * kPi * k / 8.0 + kPi / 8.0;
    pts.push_back({0.55 * footprint * std::cos(a), 0.55 * footprint * std::sin(a), height});
  }
  return pts;
}

ObjectTemplate make_object(const std::string& id, const std::string& cat, double footprint,
                           double rest_z) {
  ObjectTemplate t;
  t.id = id;
  t.category = cat;
  t.category_token = category_token(cat);
  t.footprint_radius = footprint;
  t.rest_z = rest_z;
  t.points = make_cloud(footprint, std::min(0.16, 1.2 * footprint));
  return t;
}

RoomLayout make_bedroom() {
  RoomLayout l;
  l.name = "bedroom";
  l.bounds = {0.0, 9.0, 0.0, 7.0};
  l.obstacles = {{{2.0, 5.0}, 0.75}, {{6.5, 6.0}, 0.5}, {{4.5, 2.6}, 0.4}};
  l.regions = {{"bed_side", {3.4, 4.2}, 0.85, 0},  {"wardrobe", {7.7, 4.6}, 0.85, 1},
               {"desk", {7.3, 1.3}, 0.85, 2},      {"window", {1.3, 1.3}, 0.85, 3},
               {"door", {4.8, 0.9}, 0.80, 4},      {"rug", {1.2, 3.2}, 0.85, 5}};
  l.objects = {make_object("box_a", "box", 0.22, 0.12),
               make_object("vase_a", "vase", 0.16, 0.45),
               make_object("lamp_a", "lamp", 0.18, 0.42),
               make_object("plant_a", "plant", 0.24, 0.10),
               make_object("bin_a", "bin", 0.26, 0.14),
               make_object("tray_a", "tray", 0.20, 0.40)};
  l.default_spawn = {4.5, 1.2, 0.0, kPi / 2.0};
  return l;
}

RoomLayout make_kitchen() {
  RoomLayout l;
  l.name = "kitchen";
  l.bounds = {0.0, 9.0, 0.0, 7.0};
  l.obstacles = {{{4.5, 3.5}, 0.85}, {{8.1, 6.2}, 0.5}, {{1.4, 5.6}, 0.45}};
  l.regions = {{"counter", {1.1, 1.2}, 0.85, 6},    {"sink", {3.4, 6.1}, 0.80, 7},
               {"table", {6.9, 1.5}, 0.85, 8},      {"pantry", {8.0, 4.0}, 0.85, 9},
               {"stove", {1.0, 3.8}, 0.80, 10},     {"island_side", {5.9, 5.7}, 0.80, 11}};
  l.objects = {make_object("kettle_a", "kettle", 0.14, 0.48),
               make_object("tray_b", "tray", 0.20, 0.42),
               make_object("box_b", "box", 0.24, 0.10),
               make_object("bin_b", "bin", 0.28, 0.12),
               make_object("vase_b", "vase", 0.15, 0.44),
               make_object("plant_b", "plant", 0.22, 0.08)};
  l.default_spawn = {4.5, 0.9, 0.0, kPi / 2.0};
  return l;
}

RoomLayout make_living_room() {
  RoomLayout l;
  l.name = "living_room";
  l.bounds = {0.0, 9.0, 0.0, 7.0};
  l.obstacles = {{{2.2, 5.4}, 0.85}, {{4.4, 3.9}, 0.6}, {{7.6, 6.2}, 0.5}};
  l.regions = {{"sofa_side", {1.1, 3.5}, 0.80, 12}, {"tv", {5.9, 5.8}, 0.80, 13},
               {"shelf", {8.0, 3.4}, 0.85, 14},     {"corner", {1.2, 1.2}, 0.85, 15},
               {"balcony", {6.6, 1.1}, 0.85, 16},   {"center", {4.3, 1.9}, 0.85, 17}};
  l.objects = {make_object("lamp_b", "lamp", 0.17, 0.40),
               make_object("plant_c", "plant", 0.26, 0.10),
               make_object("box_c", "box", 0.22, 0.12),
               make_object("tray_c", "tray", 0.19, 0.38),
               make_object("stool_a", "stool", 0.27, 0.06),
               make_object("vase_c", "vase", 0.14, 0.46)};
  l.default_spawn = {3.3, 0.85, 0.0, kPi / 2.0};
  return l;
}

RoomLayout make_warehouse() {
  RoomLayout l;
  l.name = "warehouse";
  l.bounds = {0.0, 9.0, 0.0, 7.0};
  l.obstacles = {{{3.0, 4.9}, 0.7}, {{6.2, 2.3}, 0.7}, {{1.6, 2.2}, 0.35}};
  l.regions = {{"dock", {1.1, 5.9}, 0.85, 18},   {"rack_a", {4.4, 6.1}, 0.80, 19},
               {"rack_b", {7.9, 5.5}, 0.85, 20}, {"office", {8.0, 1.2}, 0.85, 21},
               {"gate", {4.4, 0.9}, 0.80, 22},   {"yard", {1.0, 0.9}, 0.80, 23}};
  l.objects = {make_object("box_d", "box", 0.28, 0.10),
               make_object("bin_c", "bin", 0.30, 0.10),
               make_object("tray_d", "tray", 0.22, 0.44),
               make_object("stool_b", "stool", 0.26, 0.05),
               make_object("kettle_b", "kettle", 0.15, 0.45),
               make_object("plant_d", "plant", 0.25, 0.08)};
  l.default_spawn = {4.5, 3.0, 0.0, 0.0};
  return l;
}

std::string region_display(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

// Dijkstra on a 0.25 m grid with obstacle inflation, then arc-length
// resampling every meter. Returns empty if unreachable. `extra` adds virtual
// discs (e.g. where an earlier sub-task parks its object) so later paths keep
// enough clearance for the agent carrying a payload, not just the payload.
std::vector<Vec2> plan_guides(const RoomLayout& l, const Vec2& start, const Vec2& goal,
                              const std::vector<Obstacle>& extra = {}) {
  const int nx = static_cast<int>(std::floor((l.bounds.x_max - l.bounds.x_min) / kGridStep)) + 1;
  const int ny = static_cast<int>(std::floor((l.bounds.y_max - l.bounds.y_min) / kGridStep)) + 1;
  auto cell_pos = [&](int ix, int iy) {
    return Vec2{l.bounds.x_min + ix * kGridStep, l.bounds.y_min + iy * kGridStep};
  };
  auto blocked = [&](int ix, int iy) {
    const Vec2 p = cell_pos(ix, iy);
    if (!l.bounds.contains(p, kPathInflation)) return true;
    for (const auto& ob : l.obstacles)
      if ((p - ob.center).norm() < ob.radius + kPathInflation) return true;
    for (const auto& ob : extra)
      if ((p - ob.center).norm() < ob.radius + kPathInflation) return true;
    return false;
  };
  auto to_cell = [&](const Vec2& p, int& ix, int& iy) {
    ix = std::clamp(static_cast<int>(std::lround((p.x - l.bounds.x_min) / kGridStep)), 0, nx - 1);
    iy = std::clamp(static_cast<int>(std::lround((p.y - l.bounds.y_min) / kGridStep)), 0, ny - 1);
  };

  int sx, sy, gx, gy;
  to_cell(start, sx, sy);
  to_cell(goal, gx, gy);

  const double inf = 1e30;
  std::vector<double> dist(static_cast<size_t>(nx) * ny, inf);
  std::vector<int> prev(static_cast<size_t>(nx) * ny, -1);
  auto idx = [&](int ix, int iy) { return iy * nx + ix; };

  using Node = std::pair<double, int>;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
  dist[idx(sx, sy)] = 0.0;
  pq.push({0.0, idx(sx, sy)});
  const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!pq.empty()) {
    auto [d, at] = pq.top();
    pq.pop();
    if (d > dist[at]) continue;
    if (at == idx(gx, gy)) break;
    const int ix = at % nx, iy = at / nx;
    for (int k = 0; k < 8; ++k) {
      const int jx = ix + dxs[k], jy = iy + dys[k];
      if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
      if (blocked(jx, jy)) continue;
      const double step = (k < 4) ? 1.0 : std::numbers::sqrt2;
      const double nd = d + step;
      if (nd < dist[idx(jx, jy)]) {
        dist[idx(jx, jy)] = nd;
        prev[idx(jx, jy)] = at;
        pq.push({nd, idx(jx, jy)});
      }
    }
  }
  if (dist[idx(gx, gy)] >= inf) return {};

  std::vector<Vec2> path;
  for (int at = idx(gx, gy); at != -1; at = prev[at]) path.push_back(cell_pos(at % nx, at / nx));
  std::reverse(path.begin(), path.end());
  path.front() = start;
  path.back() = goal;

  std::vector<Vec2> guides;
  double carried = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    Vec2 a = path[i - 1], b = path[i];
    double seg = (b - a).norm();
    while (carried + seg >= kGuideSpacing) {
      const double need = kGuideSpacing - carried;
      const Vec2 dir = normalized_or(b - a, {1.0, 0.0});
      a = a + dir * need;
      guides.push_back(a);
      seg = (b - a).norm();
      carried = 0.0;
    }
    carried += seg;
  }
  guides.push_back(goal);
  return guides;
}

struct Combo {
  int object = 0, src = 0, tgt = 0;
};

struct ComboPools {
  std::vector<Combo> train, unseen;
};

ComboPools combo_pools(const RoomLayout& l, uint64_t seed) {
  std::vector<Combo> all;
  for (int o = 0; o < static_cast<int>(l.objects.size()); ++o)
    for (int s = 0; s < static_cast<int>(l.regions.size()); ++s)
      for (int t = 0; t < static_cast<int>(l.regions.size()); ++t)
        if (s != t) all.push_back({o, s, t});
  Rng rng(seed, hash_str(0x636f6d626fULL, l.name.c_str()));
  for (size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.next_below(static_cast<uint32_t>(i))]);
  const size_t held = all.size() / 4;
  ComboPools pools;
  pools.unseen.assign(all.begin(), all.begin() + held);
  pools.train.assign(all.begin() + held, all.end());
  return pools;
}

bool clear_of_obstacles(const RoomLayout& l, const Vec2& p) {
  for (const auto& ob : l.obstacles)
    if ((p - ob.center).norm() < ob.radius + kObstacleClearance) return false;
  return true;
}

Vec2 sample_in_region(Rng& rng, const Region& r) {
  const double a = rng.uniform(0.0, 2.0 * kPi);
  const double rad = r.radius * std::sqrt(rng.uniform());
  return {r.center.x + rad * std::cos(a), r.center.y + rad * std::sin(a)};
}

// Samples one task on the given layout from the given combo pool. Throws
// after too many rejected attempts (generation parameters keep this rare).
TaskSpec sample_task(const RoomLayout& l, const std::vector<Combo>& pool, uint64_t seed,
                     const std::string& id, const std::string& split) {
  Rng rng(seed, hash_str(0x7461736bULL, id.c_str()));
  for (int attempt = 0; attempt < 400; ++attempt) {
    const Combo c0 = pool[rng.next_below(static_cast<uint32_t>(pool.size()))];
    Combo c1 = pool[rng.next_below(static_cast<uint32_t>(pool.size()))];
    if (c1.object == c0.object) continue;

    const auto& obj0 = l.objects[c0.object];
    const auto& obj1 = l.objects[c1.object];
    const Vec2 s0 = sample_in_region(rng, l.regions[c0.src]);
    const Vec2 g0 = sample_in_region(rng, l.regions[c0.tgt]);
    const Vec2 s1 = sample_in_region(rng, l.regions[c1.src]);
    const Vec2 g1 = sample_in_region(rng, l.regions[c1.tgt]);

    bool ok = true;
    for (const Vec2& p : {s0, g0, s1, g1})
      ok = ok && l.bounds.contains(p, kWallMargin) && clear_of_obstacles(l, p);
    ok = ok && (g0 - s0).norm() >= kMinStartGoalDist && (g1 - s1).norm() >= kMinStartGoalDist;
    ok = ok && (s1 - s0).norm() >= 1.0 && (g1 - g0).norm() >= 1.2;
    ok = ok && (s1 - g0).norm() >= 1.0 && (g1 - s0).norm() >= 0.6;
    const Vec2 spawn = l.default_spawn.xy();
    for (const Vec2& p : {s0, g0, s1, g1}) ok = ok && (p - spawn).norm() >= 0.8;
    if (!ok) continue;

    const auto guides0 = plan_guides(l, s0, g0);
    // By the time the second object moves, the first one sits at its goal and
    // must not be grazed; plan around it with room for the carrying agent.
    const auto guides1 = plan_guides(l, s1, g1, {{g0, obj0.footprint_radius + 0.25}});
    if (guides0.empty() || guides1.empty()) continue;

    auto build_sub = [&](const Combo& c, const ObjectTemplate& obj, const Vec2& s, const Vec2& g,
                         const std::vector<Vec2>& guides) {
      SubTask st;
      st.object_id = obj.id;
      st.start_pose = {s.x, s.y, obj.rest_z, rng.uniform(-kPi, kPi)};
      st.goal.object_id = obj.id;
      st.goal.pose = {g.x, g.y, obj.rest_z + rng.uniform(0.18, 0.5), rng.uniform(-kPi, kPi)};
      st.goal.guides = guides;
      st.goal.success_radius = 0.5;
      st.instruction.object_token = obj.category_token;
      st.instruction.source_token = l.regions[c.src].token;
      st.instruction.target_token = l.regions[c.tgt].token;
      st.instruction.text = "move the " + obj.category + " from the " +
                            region_display(l.regions[c.src].name) + " to the " +
                            region_display(l.regions[c.tgt].name);
      return st;
    };

    TaskSpec t;
    t.id = id;
    t.layout = l.name;
    t.split = split;
    t.sub_tasks.push_back(build_sub(c0, obj0, s0, g0, guides0));
    t.sub_tasks.push_back(build_sub(c1, obj1, s1, g1, guides1));
    return t;
  }
  throw std::runtime_error("task generation failed to place a task on layout " + l.name);
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw std::runtime_error("task file: " + where + ": " + what);
}

void check_known_keys(const json& j, const std::string& where,
                      std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known) schema_fail(where + "." + it.key(), "unknown field");
  }
}

Pose2Z pose_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) schema_fail(where, "expected [x, y, z, yaw]");
  Pose2Z p;
  try {
    p.x = j[0].get<double>();
    p.y = j[1].get<double>();
    p.z = j[2].get<double>();
    p.yaw = j[3].get<double>();
  } catch (const json::exception& e) {
    schema_fail(where, e.what());
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.yaw))
    schema_fail(where, "non-finite value");
  p.yaw = wrap_angle(p.yaw);
  return p;
}

json pose_to(const Pose2Z& p) { return json::array({p.x, p.y, p.z, p.yaw}); }

SubTask sub_task_from(const json& j, const std::string& where, const RoomLayout& l) {
  if (!j.is_object()) schema_fail(where, "expected an object");
  check_known_keys(j, where, {"object_id", "start_pose", "goal", "instruction"});
  SubTask st;
  try {
    st.object_id = j.at("object_id").get<std::string>();
  } catch (const json::exception& e) {
    schema_fail(where + ".object_id", e.what());
  }
  const ObjectTemplate* obj = l.find_object(st.object_id);
  if (!obj) schema_fail(where + ".object_id", "no object '" + st.object_id + "' in layout " + l.name);
  if (!j.contains("start_pose")) schema_fail(where + ".start_pose", "missing");
  st.start_pose = pose_from(j.at("start_pose"), where + ".start_pose");

  if (!j.contains("goal") || !j.at("goal").is_object()) schema_fail(where + ".goal", "missing or not an object");
  const json& g = j.at("goal");
  check_known_keys(g, where + ".goal", {"pose", "guides", "success_radius"});
  st.goal.object_id = st.object_id;
  if (!g.contains("pose")) schema_fail(where + ".goal.pose", "missing");
  st.goal.pose = pose_from(g.at("pose"), where + ".goal.pose");
  if (!g.contains("guides") || !g.at("guides").is_array() || g.at("guides").empty())
    schema_fail(where + ".goal.guides", "expected a non-empty array");
  for (size_t i = 0; i < g.at("guides").size(); ++i) {
    const json& v = g.at("guides")[i];
    if (!v.is_array() || v.size() != 2) schema_fail(where + ".goal.guides", "expected [x, y] pairs");
    st.goal.guides.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  if (!g.contains("success_radius")) schema_fail(where + ".goal.success_radius", "missing");
  st.goal.success_radius = g.at("success_radius").get<double>();
  if (!(st.goal.success_radius > 0.0)) schema_fail(where + ".goal.success_radius", "must be > 0");
  if ((st.goal.guides.back() - st.goal.pose.xy()).norm() > 0.5)
    schema_fail(where + ".goal.guides", "terminal vertex farther than 0.5 m from the goal");
  if ((st.goal.pose.xy() - st.start_pose.xy()).norm() < kMinStartGoalDist)
    schema_fail(where + ".goal.pose", "start and goal closer than 1 m");

  if (!j.contains("instruction") || !j.at("instruction").is_object())
    schema_fail(where + ".instruction", "missing or not an object");
  const json& ins = j.at("instruction");
  check_known_keys(ins, where + ".instruction",
                   {"object_token", "source_token", "target_token", "text"});
  try {
    st.instruction.object_token = ins.at("object_token").get<int>();
    st.instruction.source_token = ins.at("source_token").get<int>();
    st.instruction.target_token = ins.at("target_token").get<int>();
    st.instruction.text = ins.at("text").get<std::string>();
  } catch (const json::exception& e) {
    schema_fail(where + ".instruction", e.what());
  }
  if (st.instruction.object_token < 0 || st.instruction.object_token >= kCategoryVocab)
    schema_fail(where + ".instruction.object_token", "outside the category vocabulary");
  for (int tok : {st.instruction.source_token, st.instruction.target_token})
    if (tok < 0 || tok >= kRegionVocab)
      schema_fail(where + ".instruction", "region token outside the vocabulary");
  return st;
}

json sub_task_to(const SubTask& st) {
  json guides = json::array();
  for (const Vec2& g : st.goal.guides) guides.push_back(json::array({g.x, g.y}));
  return {
      {"object_id", st.object_id},
      {"start_pose", pose_to(st.start_pose)},
      {"goal",
       {{"pose", pose_to(st.goal.pose)}, {"guides", guides}, {"success_radius", st.goal.success_radius}}},
      {"instruction",
       {{"object_token", st.instruction.object_token},
        {"source_token", st.instruction.source_token},
        {"target_token", st.instruction.target_token},
        {"text", st.instruction.text}}},
  };
}

TaskSpec task_from(const json& j, const std::string& where) {
  if (!j.is_object()) schema_fail(where, "expected an object");
  check_known_keys(j, where, {"id", "layout", "split", "sub_tasks"});
  TaskSpec t;
  try {
    t.id = j.at("id").get<std::string>();
    t.layout = j.at("layout").get<std::string>();
    t.split = j.at("split").get<std::string>();
  } catch (const json::exception& e) {
    schema_fail(where, e.what());
  }
  if (t.split != "train" && t.split != "unseen")
    schema_fail(where + ".split", "expected 'train' or 'unseen'");
  const RoomLayout& l = layout_by_name(t.layout);
  if (!j.contains("sub_tasks") || !j.at("sub_tasks").is_array() || j.at("sub_tasks").size() != 2)
    schema_fail(where + ".sub_tasks", "expected exactly two sub-tasks");
  for (size_t i = 0; i < 2; ++i)
    t.sub_tasks.push_back(sub_task_from(j.at("sub_tasks")[i], where + ".sub_tasks[" + std::to_string(i) + "]", l));
  if (t.sub_tasks[0].object_id == t.sub_tasks[1].object_id)
    schema_fail(where + ".sub_tasks", "sub-tasks reference the same object");
  return t;
}

json task_to(const TaskSpec& t) {
  return {
      {"id", t.id},
      {"layout", t.layout},
      {"split", t.split},
      {"sub_tasks", json::array({sub_task_to(t.sub_tasks[0]), sub_task_to(t.sub_tasks[1])})},
  };
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("task file: " + path + ": " + e.what());
  }
}

}  // namespace

const ObjectTemplate* RoomLayout::find_object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const Region* RoomLayout::find_region_token(int token) const {
  for (const auto& r : regions)
    if (r.token == token) return &r;
  return nullptr;
}

int category_vocab_size() { return kCategoryVocab; }
int region_vocab_size() { return kRegionVocab; }

const std::vector<RoomLayout>& builtin_layouts() {
  static const std::vector<RoomLayout> layouts = {make_bedroom(), make_kitchen(),
                                                  make_living_room(), make_warehouse()};
  return layouts;
}

const RoomLayout& layout_by_name(const std::string& name) {
  for (const auto& l : builtin_layouts())
    if (l.name == name) return l;
  throw std::runtime_error("unknown layout: " + name);
}

std::vector<TaskSpec> generate_dataset(const std::vector<RoomLayout>& layouts, int n_train,
                                       int n_unseen, uint64_t seed) {
  if (layouts.empty()) throw std::runtime_error("generate_dataset: no layouts given");
  for (const auto& l : layouts) {
    if (l.objects.size() < 3)
      throw std::runtime_error("layout " + l.name + " has fewer than 3 movable objects");
    if (l.regions.size() < 3)
      throw std::runtime_error("layout " + l.name + " has fewer than 3 regions");
  }
  std::vector<ComboPools> pools;
  pools.reserve(layouts.size());
  for (const auto& l : layouts) pools.push_back(combo_pools(l, seed));

  std::vector<TaskSpec> out;
  out.reserve(n_train + n_unseen);
  char buf[32];
  for (int i = 0; i < n_train + n_unseen; ++i) {
    const bool unseen = i >= n_train;
    const size_t li = static_cast<size_t>(i) % layouts.size();
    std::snprintf(buf, sizeof buf, "t%03d_%s", i, layouts[li].name.c_str());
    out.push_back(sample_task(layouts[li], unseen ? pools[li].unseen : pools[li].train,
                              hash_combine(seed, static_cast<uint64_t>(i)), buf,
                              unseen ? "unseen" : "train"));
  }
  return out;
}

std::vector<SingleTask> split_pretraining(const std::vector<TaskSpec>& tasks) {
  std::vector<SingleTask> out;
  out.reserve(tasks.size() * 2);
  for (const TaskSpec& t : tasks) {
    if (t.split != "train") continue;  // held-out tasks must never seed training
    if (t.sub_tasks.size() != 2) throw std::runtime_error("task " + t.id + " lacks two sub-tasks");
    out.push_back({t, 0, std::nullopt});

    const RoomLayout& l = layout_by_name(t.layout);
    const Vec2 g0 = t.sub_tasks[0].goal.pose.xy();
    const Vec2 obj1 = t.sub_tasks[1].start_pose.xy();
    Rng rng(hash_str(0x73706c6974ULL, t.id.c_str()), 17);
    const double base = rng.uniform(-kPi, kPi);
    Vec2 spawn = g0;
    for (int k = 0; k < 12; ++k) {
      const double a = base + k * (kPi / 6.0);
      const Vec2 cand = {g0.x + 0.7 * std::cos(a), g0.y + 0.7 * std::sin(a)};
      if (!l.bounds.contains(cand, 0.45)) continue;
      if (!clear_of_obstacles(l, cand)) continue;
      spawn = cand;
      break;
    }
    AgentInit init;
    const double yaw = std::atan2(obj1.y - spawn.y, obj1.x - spawn.x);
    init.pose = {spawn.x, spawn.y, 0.0, yaw};
    init.standing = false;
    out.push_back({t, 1, init});
  }
  return out;
}

void save_tasks(const std::string& path, const std::vector<TaskSpec>& tasks) {
  json arr = json::array();
  for (const TaskSpec& t : tasks) arr.push_back(task_to(t));
  const json j = {{"version", 1}, {"tasks", arr}};
  atomic_write(path, j.dump(2) + "\n");
}

std::vector<TaskSpec> load_tasks(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object()) schema_fail("$", "expected an object");
  check_known_keys(j, "$", {"version", "tasks"});
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
    schema_fail("$.version", "expected 1");
  if (!j.contains("tasks") || !j.at("tasks").is_array()) schema_fail("$.tasks", "expected an array");
  std::vector<TaskSpec> out;
  for (size_t i = 0; i < j.at("tasks").size(); ++i)
    out.push_back(task_from(j.at("tasks")[i], "$.tasks[" + std::to_string(i) + "]"));
  return out;
}

void save_single_tasks(const std::string& path, const std::vector<SingleTask>& singles) {
  json arr = json::array();
  for (const SingleTask& s : singles) {
    json e = {{"task", task_to(s.task)}, {"sub_task_index", s.sub_task_index}};
    if (s.initial_agent) {
      e["initial_agent"] = {{"pose", pose_to(s.initial_agent->pose)},
                            {"standing", s.initial_agent->standing}};
    } else {
      e["initial_agent"] = nullptr;
    }
    arr.push_back(e);
  }
  const json j = {{"version", 1}, {"single_tasks", arr}};
  atomic_write(path, j.dump(2) + "\n");
}

std::vector<SingleTask> load_single_tasks(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object()) schema_fail("$", "expected an object");
  check_known_keys(j, "$", {"version", "single_tasks"});
  if (!j.contains("version") || j.at("version") != 1) schema_fail("$.version", "expected 1");
  if (!j.contains("single_tasks") || !j.at("single_tasks").is_array())
    schema_fail("$.single_tasks", "expected an array");
  std::vector<SingleTask> out;
  for (size_t i = 0; i < j.at("single_tasks").size(); ++i) {
    const std::string where = "$.single_tasks[" + std::to_string(i) + "]";
    const json& e = j.at("single_tasks")[i];
    if (!e.is_object()) schema_fail(where, "expected an object");
    check_known_keys(e, where, {"task", "sub_task_index", "initial_agent"});
    SingleTask s;
    if (!e.contains("task")) schema_fail(where + ".task", "missing");
    s.task = task_from(e.at("task"), where + ".task");
    if (!e.contains("sub_task_index")) schema_fail(where + ".sub_task_index", "missing");
    s.sub_task_index = e.at("sub_task_index").get<int>();
    if (s.sub_task_index < 0 || s.sub_task_index > 1)
      schema_fail(where + ".sub_task_index", "expected 0 or 1");
    if (e.contains("initial_agent") && !e.at("initial_agent").is_null()) {
      const json& a = e.at("initial_agent");
      check_known_keys(a, where + ".initial_agent", {"pose", "standing"});
      AgentInit init;
      init.pose = pose_from(a.at("pose"), where + ".initial_agent.pose");
      init.standing = a.at("standing").get<bool>();
      s.initial_agent = init;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hvrs
