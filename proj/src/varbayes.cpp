#include "lrla/varbayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrla {

void HorseshoePrior::validate() const {
  if (!(tau0 > 0.0)) throw std::invalid_argument("HorseshoePrior: tau0 must be > 0");
}

ParamLayout::ParamLayout(const NetShape& shape) : shape_(shape) {
  shape.validate();
  const int in = shape.input_dim, hid = shape.hidden_dim, out = shape.output_dim;

  // pack order must match pack_params()
  struct Spec {
    const char* name;
    int rows, cols, layer, companion;
  };
  const Spec specs[] = {
      {"update_in", hid, in, 0, -1},   {"update_rec", hid, hid, 0, -1},
      {"update_bias", hid, 1, 0, 0},   {"reset_in", hid, in, 0, -1},
      {"reset_rec", hid, hid, 0, -1},  {"reset_bias", hid, 1, 0, 3},
      {"cand_in", hid, in, 0, -1},     {"cand_rec", hid, hid, 0, -1},
      {"cand_bias", hid, 1, 0, 6},     {"head_weight", out, hid, 1, -1},
      {"head_bias", out, 1, 1, 9},
  };

  int offset = 0;
  int group_base = 0;
  for (const Spec& s : specs) {
    ArrayInfo info;
    info.name = s.name;
    info.offset = offset;
    info.rows = s.rows;
    info.cols = s.cols;
    info.layer = s.layer;
    info.companion = s.companion;
    if (s.companion < 0) {
      info.group_base = group_base;
      group_base += s.rows;
    }
    arrays_.push_back(info);
    offset += s.rows * s.cols;
  }
  num_weights_ = offset;
  num_groups_ = group_base;

  group_of_.resize(num_weights_);
  layer_of_.resize(num_weights_);
  group_layer_.assign(num_groups_, 0);
  for (const ArrayInfo& info : arrays_) {
    const int base =
        info.companion < 0 ? info.group_base : arrays_[info.companion].group_base;
    for (int i = 0; i < info.rows * info.cols; ++i) {
      const int row = i % info.rows;  // column-major, matching Eigen storage
      group_of_[info.offset + i] = base + row;
      layer_of_[info.offset + i] = info.layer;
    }
    if (info.companion < 0)
      for (int r = 0; r < info.rows; ++r) group_layer_[info.group_base + r] = info.layer;
  }
}

int PosteriorVec::flat_size() const {
  return static_cast<int>(theta_loc.size() + theta_log_scale.size() + group_loc.size() +
                          group_log_scale.size() + scale_loc.size() + scale_log_scale.size());
}

Eigen::VectorXd PosteriorVec::flatten() const {
  Eigen::VectorXd flat(flat_size());
  int offset = 0;
  for (const Eigen::VectorXd* v :
       {&theta_loc, &theta_log_scale, &group_loc, &group_log_scale, &scale_loc, &scale_log_scale}) {
    flat.segment(offset, v->size()) = *v;
    offset += static_cast<int>(v->size());
  }
  return flat;
}

void PosteriorVec::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != flat_size())
    throw std::invalid_argument("PosteriorVec: flat size mismatch");
  int offset = 0;
  for (Eigen::VectorXd* v :
       {&theta_loc, &theta_log_scale, &group_loc, &group_log_scale, &scale_loc, &scale_log_scale}) {
    *v = flat.segment(offset, v->size());
    offset += static_cast<int>(v->size());
  }
}

void PosteriorVec::setZero(const ParamLayout& layout) {
  theta_loc = Eigen::VectorXd::Zero(layout.num_weights());
  theta_log_scale = Eigen::VectorXd::Zero(layout.num_weights());
  group_loc = Eigen::VectorXd::Zero(layout.num_groups());
  group_log_scale = Eigen::VectorXd::Zero(layout.num_groups());
  scale_loc = Eigen::VectorXd::Zero(layout.num_layers());
  scale_log_scale = Eigen::VectorXd::Zero(layout.num_layers());
}

VariationalPosterior init_posterior(const NetShape& shape, const HorseshoePrior& prior,
                                    RandomStream& rng) {
  prior.validate();
  VariationalPosterior q(shape);
  q.phi.setZero(q.layout);

  RandomStream loc_rng = rng.derive("theta_loc_init");
  for (int k = 0; k < q.layout.num_weights(); ++k)
    q.phi.theta_loc[k] = 0.1 * loc_rng.normal();
  q.phi.theta_log_scale.setConstant(std::log(0.1));

  // sparse start: median z = 1, median s = tau0, so the induced
  // posterior-median |theta| begins near tau0
  q.phi.group_loc.setZero();
  q.phi.group_log_scale.setConstant(std::log(0.1));
  q.phi.scale_loc.setConstant(std::log(prior.tau0));
  q.phi.scale_log_scale.setConstant(std::log(0.1));
  return q;
}

NoiseVec draw_noise(const ParamLayout& layout, RandomStream& rng) {
  NoiseVec noise;
  noise.theta.resize(layout.num_weights());
  noise.group.resize(layout.num_groups());
  noise.layer.resize(layout.num_layers());
  for (int k = 0; k < noise.theta.size(); ++k) noise.theta[k] = rng.normal();
  for (int g = 0; g < noise.group.size(); ++g) noise.group[g] = rng.normal();
  for (int l = 0; l < noise.layer.size(); ++l) noise.layer[l] = rng.normal();
  return noise;
}

PosteriorSample sample_with_noise(const VariationalPosterior& q, const NoiseVec& noise) {
  const ParamLayout& layout = q.layout;
  if (noise.theta.size() != layout.num_weights() || noise.group.size() != layout.num_groups() ||
      noise.layer.size() != layout.num_layers())
    throw std::invalid_argument("sample_with_noise: noise size mismatch");

  PosteriorSample sample;
  sample.theta_tilde =
      q.phi.theta_loc.array() + q.phi.theta_log_scale.array().exp() * noise.theta.array();
  sample.group_scales =
      (q.phi.group_loc.array() + q.phi.group_log_scale.array().exp() * noise.group.array()).exp();
  sample.layer_scales =
      (q.phi.scale_loc.array() + q.phi.scale_log_scale.array().exp() * noise.layer.array()).exp();

  Eigen::VectorXd theta(layout.num_weights());
  for (int k = 0; k < theta.size(); ++k)
    theta[k] = sample.theta_tilde[k] * sample.group_scales[layout.group_of(k)] *
               sample.layer_scales[layout.layer_of(k)];
  sample.params = unpack_params(q.shape, theta);
  return sample;
}

PosteriorSample sample_params(const VariationalPosterior& q, RandomStream& rng) {
  return sample_with_noise(q, draw_noise(q.layout, rng));
}

NetParams map_params(const VariationalPosterior& q) {
  const ParamLayout& layout = q.layout;
  const Eigen::ArrayXd group_mode =
      (q.phi.group_loc.array() - q.phi.group_log_scale.array().exp().square()).exp();
  const Eigen::ArrayXd layer_mode =
      (q.phi.scale_loc.array() - q.phi.scale_log_scale.array().exp().square()).exp();
  Eigen::VectorXd theta(layout.num_weights());
  for (int k = 0; k < theta.size(); ++k)
    theta[k] = q.phi.theta_loc[k] * group_mode[layout.group_of(k)] *
               layer_mode[layout.layer_of(k)];
  return unpack_params(q.shape, theta);
}

double gaussian_kl(const VariationalPosterior& q) {
  // sum of KL(N(m, s^2) || N(0,1)) = 0.5*(s^2 + m^2 - 1) - log s
  const Eigen::ArrayXd var = q.phi.theta_log_scale.array().exp().square();
  return (0.5 * (var + q.phi.theta_loc.array().square() - 1.0) -
          q.phi.theta_log_scale.array())
      .sum();
}

double half_cauchy_log_pdf(double x, double gamma) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double ratio = x / gamma;
  return std::log(2.0) - std::log(M_PI) - std::log(gamma) - std::log1p(ratio * ratio);
}

double log_normal_log_pdf(double x, double loc, double scale) {
  const double lx = std::log(x);
  const double zscore = (lx - loc) / scale;
  return -lx - std::log(scale) - 0.5 * std::log(2.0 * M_PI) - 0.5 * zscore * zscore;
}

double scale_kl_at_sample(const VariationalPosterior& q, const HorseshoePrior& prior,
                          const PosteriorSample& sample) {
  double kl = 0.0;
  for (int g = 0; g < q.layout.num_groups(); ++g) {
    const double z = sample.group_scales[g];
    kl += log_normal_log_pdf(z, q.phi.group_loc[g], std::exp(q.phi.group_log_scale[g])) -
          half_cauchy_log_pdf(z, 1.0);
  }
  for (int l = 0; l < q.layout.num_layers(); ++l) {
    const double s = sample.layer_scales[l];
    kl += log_normal_log_pdf(s, q.phi.scale_loc[l], std::exp(q.phi.scale_log_scale[l])) -
          half_cauchy_log_pdf(s, prior.tau0);
  }
  return kl;
}

double kl_divergence(const VariationalPosterior& q, const HorseshoePrior& prior,
                     RandomStream& rng, int n_mc) {
  if (n_mc < 1) throw std::invalid_argument("kl_divergence: n_mc must be >= 1");
  prior.validate();

  double scale_kl = 0.0;
  RandomStream mc = rng.derive("kl_mc");
  for (int draw = 0; draw < n_mc; ++draw) {
    for (int g = 0; g < q.layout.num_groups(); ++g) {
      const double sigma = std::exp(q.phi.group_log_scale[g]);
      const double z = std::exp(q.phi.group_loc[g] + sigma * mc.normal());
      scale_kl += log_normal_log_pdf(z, q.phi.group_loc[g], sigma) - half_cauchy_log_pdf(z, 1.0);
    }
    for (int l = 0; l < q.layout.num_layers(); ++l) {
      const double sigma = std::exp(q.phi.scale_log_scale[l]);
      const double s = std::exp(q.phi.scale_loc[l] + sigma * mc.normal());
      scale_kl +=
          log_normal_log_pdf(s, q.phi.scale_loc[l], sigma) - half_cauchy_log_pdf(s, prior.tau0);
    }
  }
  return gaussian_kl(q) + scale_kl / n_mc;
}

PosteriorVec likelihood_grads(const VariationalPosterior& q, const PosteriorSample& sample,
                              const Eigen::VectorXd& dloss_dtheta) {
  const ParamLayout& layout = q.layout;
  if (dloss_dtheta.size() != layout.num_weights())
    throw std::invalid_argument("likelihood_grads: gradient size mismatch");

  PosteriorVec grads;
  grads.setZero(layout);

  Eigen::VectorXd dz = Eigen::VectorXd::Zero(layout.num_groups());
  Eigen::VectorXd ds = Eigen::VectorXd::Zero(layout.num_layers());
  for (int k = 0; k < layout.num_weights(); ++k) {
    const int g = layout.group_of(k);
    const int l = layout.layer_of(k);
    const double z = sample.group_scales[g];
    const double s = sample.layer_scales[l];
    const double dtheta = dloss_dtheta[k];
    const double dtilde = dtheta * z * s;
    grads.theta_loc[k] = dtilde;
    // d theta~ / d log_scale = sigma*eps = theta~ - loc
    grads.theta_log_scale[k] = dtilde * (sample.theta_tilde[k] - q.phi.theta_loc[k]);
    dz[g] += dtheta * sample.theta_tilde[k] * s;
    ds[l] += dtheta * sample.theta_tilde[k] * z;
  }
  for (int g = 0; g < layout.num_groups(); ++g) {
    const double z = sample.group_scales[g];
    const double sigma_eps = std::log(z) - q.phi.group_loc[g];
    grads.group_loc[g] = dz[g] * z;
    grads.group_log_scale[g] = dz[g] * z * sigma_eps;
  }
  for (int l = 0; l < layout.num_layers(); ++l) {
    const double s = sample.layer_scales[l];
    const double sigma_eps = std::log(s) - q.phi.scale_loc[l];
    grads.scale_loc[l] = ds[l] * s;
    grads.scale_log_scale[l] = ds[l] * s * sigma_eps;
  }
  return grads;
}

namespace {

// pathwise d/d(loc), d/d(log_scale) of [log q(x) - log p(x)] at a realized
// log-normal draw x = exp(loc + sigma*eps) against a half-Cauchy prior
void scale_factor_kl_grad(double x, double loc, double log_scale, double gamma,
                          double& dloc, double& dlog_scale) {
  const double sigma = std::exp(log_scale);
  const double sigma_eps = std::log(x) - loc;
  const double ratio_sq = (x / gamma) * (x / gamma);
  const double tail = 2.0 * ratio_sq / (1.0 + ratio_sq);
  dloc = -1.0 + tail;
  dlog_scale = -sigma_eps - 1.0 + sigma_eps * tail;
}

}  // namespace

PosteriorVec kl_grads(const VariationalPosterior& q, const HorseshoePrior& prior,
                      const PosteriorSample& sample) {
  PosteriorVec grads;
  grads.setZero(q.layout);

  // Gaussian component, closed form
  grads.theta_loc = q.phi.theta_loc;
  grads.theta_log_scale =
      (q.phi.theta_log_scale.array().exp().square() - 1.0).matrix();

  for (int g = 0; g < q.layout.num_groups(); ++g)
    scale_factor_kl_grad(sample.group_scales[g], q.phi.group_loc[g], q.phi.group_log_scale[g],
                         1.0, grads.group_loc[g], grads.group_log_scale[g]);
  for (int l = 0; l < q.layout.num_layers(); ++l)
    scale_factor_kl_grad(sample.layer_scales[l], q.phi.scale_loc[l], q.phi.scale_log_scale[l],
                         prior.tau0, grads.scale_loc[l], grads.scale_log_scale[l]);
  return grads;
}

PosteriorVec grad_elbo_terms(const VariationalPosterior& q, const PosteriorSample& sample,
                             const Eigen::VectorXd& dloss_dtheta,
                             const HorseshoePrior& prior, double kl_weight) {
  PosteriorVec grads = likelihood_grads(q, sample, dloss_dtheta);
  if (kl_weight != 0.0) {
    const PosteriorVec kl = kl_grads(q, prior, sample);
    grads.theta_loc += kl_weight * kl.theta_loc;
    grads.theta_log_scale += kl_weight * kl.theta_log_scale;
    grads.group_loc += kl_weight * kl.group_loc;
    grads.group_log_scale += kl_weight * kl.group_log_scale;
    grads.scale_loc += kl_weight * kl.scale_loc;
    grads.scale_log_scale += kl_weight * kl.scale_log_scale;
  }
  return grads;
}

std::vector<double> sample_prior_group_scales(const ParamLayout& layout,
                                              const HorseshoePrior& prior, RandomStream& rng) {
  prior.validate();
  std::vector<double> layer_scales(layout.num_layers());
  for (auto& s : layer_scales) s = rng.half_cauchy(prior.tau0);
  std::vector<double> composed(layout.num_groups());
  for (int g = 0; g < layout.num_groups(); ++g)
    composed[g] = layer_scales[layout.layer_of_group(g)] * rng.half_cauchy(1.0);
  return composed;
}

}  // namespace lrla
