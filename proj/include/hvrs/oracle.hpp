#pragma once

#include "hvrs/sim.hpp"

namespace hvrs {

// Deterministic finite-state controller for one sub-task: stand up when bent,
// walk to the object, grasp, carry along the guide polyline, align and
// release at the goal, then step back past the release/step-back caps. Always
// emits an in-range command; never throws on any reachable state.
// `protect_id` names an already-placed object the walk must not plow.
ActionCommand scripted_oracle(const SimState& state, const GoalSpec& goal, const SimConfig& cfg,
                              const RewardConfig& rcfg, const std::string& protect_id = {});

}  // namespace hvrs
