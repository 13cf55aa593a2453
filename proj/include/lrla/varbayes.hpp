#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lrla/net.hpp"
#include "lrla/rng.hpp"

namespace lrla {

// Group horseshoe prior over network weights:
//   s_l ~ C+(0, tau0)   one global scale per layer,
//   z_g ~ C+(0, 1)      one scale per group (matrix row / unit),
//   theta~_k ~ N(0, 1),
//   theta_k = theta~_k * z_{group(k)} * s_{layer(k)}.
struct HorseshoePrior {
  double tau0 = 1e-5;

  void validate() const;
};

// Fixed enumeration of the network's parameter arrays and the assignment of
// every flat weight to a scale group and a layer. Matrix rows form groups;
// bias element i joins the group of row i of its companion input matrix.
class ParamLayout {
 public:
  struct ArrayInfo {
    std::string name;
    int offset = 0;  // into the flat weight vector
    int rows = 0;
    int cols = 0;  // 1 for biases
    int layer = 0;
    int group_base = 0;   // first group id (matrices)
    int companion = -1;   // array whose groups a bias joins
  };

  explicit ParamLayout(const NetShape& shape);

  const NetShape& shape() const { return shape_; }
  int num_weights() const { return num_weights_; }
  int num_groups() const { return num_groups_; }
  int num_layers() const { return 2; }
  int group_of(int flat_index) const { return group_of_[flat_index]; }
  int layer_of(int flat_index) const { return layer_of_[flat_index]; }
  const std::vector<ArrayInfo>& arrays() const { return arrays_; }
  int layer_of_group(int group) const { return group_layer_[group]; }

 private:
  NetShape shape_;
  int num_weights_ = 0;
  int num_groups_ = 0;
  std::vector<ArrayInfo> arrays_;
  std::vector<int> group_of_;
  std::vector<int> layer_of_;
  std::vector<int> group_layer_;
};

// All variational parameters, in the shapes the optimizer sees. Gaussian
// (location, log-scale) per weight; log-normal (location, log-scale) per
// group scale and per layer scale.
struct PosteriorVec {
  Eigen::VectorXd theta_loc, theta_log_scale;
  Eigen::VectorXd group_loc, group_log_scale;
  Eigen::VectorXd scale_loc, scale_log_scale;

  int flat_size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  void setZero(const ParamLayout& layout);
};

struct VariationalPosterior {
  NetShape shape;
  ParamLayout layout;
  PosteriorVec phi;

  explicit VariationalPosterior(const NetShape& s) : shape(s), layout(s) {}
};

// A reparametrized draw: realized weights plus the auxiliary factors that
// compose them. theta = theta~ * z_group * s_layer holds exactly.
struct PosteriorSample {
  NetParams params;
  Eigen::VectorXd theta_tilde;   // per weight
  Eigen::VectorXd group_scales;  // z, per group
  Eigen::VectorXd layer_scales;  // s, per layer
};

// Raw unit noises behind a sample; exposed so tests can hold them fixed.
struct NoiseVec {
  Eigen::VectorXd theta;  // standard normal, per weight
  Eigen::VectorXd group;  // standard normal, per group
  Eigen::VectorXd layer;  // standard normal, per layer
};

VariationalPosterior init_posterior(const NetShape& shape, const HorseshoePrior& prior,
                                    RandomStream& rng);

NoiseVec draw_noise(const ParamLayout& layout, RandomStream& rng);
PosteriorSample sample_with_noise(const VariationalPosterior& q, const NoiseVec& noise);
PosteriorSample sample_params(const VariationalPosterior& q, RandomStream& rng);

// Factor-wise posterior mode: Gaussian -> location, log-normal ->
// exp(loc - scale^2), composed multiplicatively.
NetParams map_params(const VariationalPosterior& q);

// Closed-form sum of KL(N(m, s^2) || N(0, 1)) over all weights; always >= 0.
double gaussian_kl(const VariationalPosterior& q);

// Single-sample estimate of the scale-factor KL terms (log q - log p at the
// realized z and s values of `sample`).
double scale_kl_at_sample(const VariationalPosterior& q, const HorseshoePrior& prior,
                          const PosteriorSample& sample);

// Gaussian part in closed form plus a fresh n_mc-sample Monte Carlo estimate
// of the scale-factor parts. Returns nats.
double kl_divergence(const VariationalPosterior& q, const HorseshoePrior& prior,
                     RandomStream& rng, int n_mc);

// d(loss)/d(phi) for a likelihood term whose weight-space gradient is
// `dloss_dtheta` (flat, pack order), chained through the sample.
PosteriorVec likelihood_grads(const VariationalPosterior& q, const PosteriorSample& sample,
                              const Eigen::VectorXd& dloss_dtheta);

// d(KL)/d(phi): analytic for the Gaussian component, pathwise through the
// realized sample for the scale components.
PosteriorVec kl_grads(const VariationalPosterior& q, const HorseshoePrior& prior,
                      const PosteriorSample& sample);

// Full single-sample objective gradient: likelihood part + kl_weight * KL part.
PosteriorVec grad_elbo_terms(const VariationalPosterior& q, const PosteriorSample& sample,
                             const Eigen::VectorXd& dloss_dtheta,
                             const HorseshoePrior& prior, double kl_weight);

// Per-group composed prior scale s_layer * z_group, drawn through the same
// group/layer structure the posterior uses.
std::vector<double> sample_prior_group_scales(const ParamLayout& layout,
                                              const HorseshoePrior& prior, RandomStream& rng);

// log C+(x; 0, gamma) for x > 0
double half_cauchy_log_pdf(double x, double gamma);

// log LogNormal(x; loc, scale) for x > 0
double log_normal_log_pdf(double x, double loc, double scale);

}  // namespace lrla
