#pragma once

#include <vector>

#include <Eigen/Dense>

namespace topicstab {

/// Minimum-cost perfect assignment on a square cost matrix via shortest
/// augmenting paths with dual potentials (Jonker-Volgenant style, O(n^3)).
/// Returns row -> column. Deterministic: scanning order breaks internal
/// ties, so equal inputs give equal outputs, though not necessarily the
/// lexicographically smallest optimum — callers needing that refine on top.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

} // namespace topicstab
