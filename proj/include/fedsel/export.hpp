#pragma once

// Flat-file outputs. Numbers are printed with a fixed format, so identical inputs give
// byte-identical files. Every writer throws IoError naming the path on failure.

#include <cstddef>
#include <span>
#include <string>

#include "fedsel/harness.hpp"

namespace fedsel {

// slot,arm,members,reward,regret,theorem_bound,accuracy
void write_trace_csv(const EpisodeTrace& trace, const Scenario& scenario, const std::string& path);
// slot,selected,gossip_rounds,client,mean,pulls,belief_term,bonus,index (bp_ucb traces)
void write_gossip_csv(const EpisodeTrace& trace, const Scenario& scenario, const std::string& path);
// slot,accuracy_mean,accuracy_std,reward_mean,reward_std,regret_mean,regret_std,bound
void write_report_csv(const MetricsReport& report, const std::string& path);
// t,regret,theorem_bound for every slot, or only `slots` when non-empty
void write_bounds_csv(const MetricsReport& report, std::span<const std::size_t> slots, const std::string& path);
// trial,slot,iterations,residual,converged,degenerate,lambda,lambda_scaled
void write_bp_diagnostics_csv(std::span<const EpisodeTrace> traces, const std::string& path);
// client,mean_selections
void write_selection_csv(const MetricsReport& report, const std::string& path);
// target,tta_of_mean,tta_mean,reached,trials,final_accuracy_mean,final_accuracy_std
void write_tta_csv(const MetricsReport& report, const std::string& path);
// Line plot: accuracy (federated) or regret against its bound (oracle).
void write_report_svg(const MetricsReport& report, const std::string& path);

// %.10g, NaN as an empty field.
std::string format_number(double v);

}  // namespace fedsel
