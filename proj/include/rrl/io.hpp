#pragma once

#include <string>
#include <vector>

#include "rrl/curve.hpp"
#include "rrl/env.hpp"

namespace rrl {

// Round-trip-safe decimal rendering of a double.
std::string format_double(double v);

// Trajectory CSV: one row per executed 30 s interval, state at the row's
// timestamp with the input held over the preceding interval. When
// `recipe_columns` is set, appends phase,step_c,exit_reason.
void write_trajectory_csv(const std::string& path, const PhysicalState& x0,
                          const std::vector<IntervalLog>& logs, bool recipe_columns);

// Flattened transition log: s*, a*, r, s_next*, terminated, truncated.
void write_transitions_csv(const std::string& path,
                           const std::vector<TransitionRecord>& transitions);

void write_episode_summary_json(const std::string& path, const EpisodeSummary& s);

// Learning-curve CSV: steps,mean_return,std_return.
void write_learning_curve_csv(const std::string& path, const LearningCurve& curve);

// Scripted input sequence for replay: columns m_dot_feed,T_J_in,T_CW_EHE_in
// (one row per control interval; an optional leading t_s column is ignored).
std::vector<ControlInput> read_input_csv(const std::string& path);

}  // namespace rrl
