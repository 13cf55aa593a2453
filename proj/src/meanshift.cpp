#include "lrla/meanshift.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrla {

namespace {

Eigen::Vector3d shift_once(const Eigen::Vector3d& point,
                           const std::vector<Eigen::Vector3d>& points, double bandwidth) {
  const double inv_two_bw_sq = 1.0 / (2.0 * bandwidth * bandwidth);
  Eigen::Vector3d numerator = Eigen::Vector3d::Zero();
  double total_weight = 0.0;
  for (const Eigen::Vector3d& p : points) {
    const double weight = std::exp(-(point - p).squaredNorm() * inv_two_bw_sq);
    numerator += weight * p;
    total_weight += weight;
  }
  if (total_weight <= 0.0) return point;  // isolated far outlier; stays put
  return numerator / total_weight;
}

}  // namespace

ClusterResult mean_shift(const std::vector<Eigen::Vector3d>& points, double bandwidth) {
  if (points.empty()) throw std::invalid_argument("mean_shift: need at least one point");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mean_shift: bandwidth must be > 0");

  constexpr double kTolerance = 1e-6;
  constexpr int kMaxIterations = 1000;

  std::vector<Eigen::Vector3d> converged(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    Eigen::Vector3d x = points[i];
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      const Eigen::Vector3d next = shift_once(x, points, bandwidth);
      const double displacement = (next - x).norm();
      x = next;
      if (displacement < kTolerance) break;
    }
    converged[i] = x;
  }

  ClusterResult result;
  result.bandwidth = bandwidth;
  result.assignments.resize(points.size());
  const double merge_radius = bandwidth / 2.0;
  for (size_t i = 0; i < converged.size(); ++i) {
    int assigned = -1;
    double best_dist = merge_radius;
    for (size_t m = 0; m < result.modes.size(); ++m) {
      const double dist = (converged[i] - result.modes[m]).norm();
      if (dist < best_dist) {
        best_dist = dist;
        assigned = static_cast<int>(m);
      }
    }
    if (assigned < 0) {
      assigned = static_cast<int>(result.modes.size());
      result.modes.push_back(converged[i]);
    }
    result.assignments[i] = assigned;
  }
  return result;
}

double silverman_bandwidth(const std::vector<Eigen::Vector3d>& points) {
  const double n = static_cast<double>(points.size());
  if (points.size() < 2) return 1.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= n;
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const auto& p : points) var += (p - mean).cwiseProduct(p - mean);
  var /= (n - 1.0);

  // h_j = sd_j * (4 / ((d + 2) n))^(1/(d+4)), d = 3
  const double factor = std::pow(4.0 / (5.0 * n), 1.0 / 7.0);
  const double bandwidth = factor * var.cwiseSqrt().mean();
  return bandwidth > 0.0 ? bandwidth : 1e-6;
}

int prototype_of(const ClusterResult& clusters, const std::vector<ProbitFit>& fits,
                 int cluster_id) {
  if (cluster_id < 0 || cluster_id >= static_cast<int>(clusters.modes.size()))
    throw std::out_of_range("prototype_of: no such cluster");
  if (fits.size() != clusters.assignments.size())
    throw std::invalid_argument("prototype_of: fits/assignments length mismatch");

  const Eigen::Vector3d& mode = clusters.modes[cluster_id];
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < fits.size(); ++i) {
    if (clusters.assignments[i] != cluster_id) continue;
    const double dist = (fits[i].w - mode).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::invalid_argument("prototype_of: empty cluster");
  return best;
}

}  // namespace lrla
