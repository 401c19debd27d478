#pragma once

#include <vector>

#include <fhmor/metrics.hpp>
#include <fhmor/types.hpp>

namespace fhmor {

// State snapshots x(t_k) = e^{A t_k} B(:, j) on a uniform grid over [0, tf],
// one trajectory per input column.
struct SnapshotSet {
    Eigen::MatrixXd X;              // n x (K * m)
    Eigen::VectorXd times;          // the K grid instants
    std::vector<int> input_column;  // provenance per snapshot column
};

struct PodResult {
    StateSpaceModel model;
    Eigen::VectorXd singular_values;  // all snapshot singular values
};

struct BalancingData {
    Eigen::VectorXd hankel_values;  // time-limited Hankel-type singular values
    bool quadrature_fallback = false;
    bool best_effort_unstable = false;
};

struct TlbtResult {
    StateSpaceModel model;
    BalancingData data;
};

SnapshotSet pod_snapshots(const StateSpaceModel& model, Horizon horizon, int per_input = 200);

// Galerkin projection onto the leading r left singular vectors of the
// snapshot matrix. Propagation uses one matrix exponential per grid step, so
// the snapshots carry no time-integration error.
PodResult pod_reduce(const StateSpaceModel& model, Horizon horizon, int r,
                     int snapshots_per_input = 200);

// Square-root balanced truncation on the time-limited Gramians. Works for
// unstable models too (the Gramians stay finite over [0, tf]); such results
// are flagged best-effort.
TlbtResult tlbt_reduce(const StateSpaceModel& model, Horizon horizon, int r);

}  // namespace fhmor
