#pragma once

#include <set>

#include "oscrowd/crowd.hpp"

namespace oscrowd::crowd {

// Batch selection per pool. Exposed so the routing rules can be tested
// against sort oracles without driving a whole simulation.
//   unplaced  -> open machine-labelled tasks, fewest annotations first
//   W_r       -> open machine-labelled tasks, lowest completion first
//   W_u       -> completed tasks only (audit; answers are never aggregated)
//   W_e       -> unknown-pool tasks without an expert label, one visit each
std::vector<int> assign_batch(const Worker& worker, const std::vector<CrowdTask>& tasks,
                              const std::set<int>& answered_by_worker,
                              const EngineConfig& cfg);

}  // namespace oscrowd::crowd
