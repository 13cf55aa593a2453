#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lrla/probit.hpp"

namespace lrla {

struct ClusterResult {
  std::vector<int> assignments;        // per input point
  std::vector<Eigen::Vector3d> modes;  // one per cluster
  double bandwidth = 0.0;
};

// Gaussian-kernel mean shift: each point iterates to its density mode;
// converged modes closer than bandwidth/2 are merged.
ClusterResult mean_shift(const std::vector<Eigen::Vector3d>& points, double bandwidth);

// Per-dimension Silverman bandwidth, averaged over the three coefficient
// dimensions; used when no bandwidth is supplied.
double silverman_bandwidth(const std::vector<Eigen::Vector3d>& points);

// Index of the member fit whose coefficients lie closest to the cluster mode
// (ties to the lower index).
int prototype_of(const ClusterResult& clusters, const std::vector<ProbitFit>& fits,
                 int cluster_id);

}  // namespace lrla
