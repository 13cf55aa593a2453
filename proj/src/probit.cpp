#include "lrla/probit.hpp"

#include <cmath>
#include <stdexcept>

namespace lrla {

namespace {

std::vector<ChoiceObservation> extract_impl(
    const std::vector<std::pair<int, double>>& episode, const TaskDistribution& dist) {
  BeliefState belief = init_belief(dist);
  std::vector<ChoiceObservation> obs;
  obs.reserve(episode.size());
  for (const auto& [choice, reward] : episode) {
    if (!std::isfinite(reward))
      throw std::invalid_argument("extract_observations: missing or non-finite reward");
    ChoiceObservation o;
    o.factors = compute_factors(belief);
    o.choice = choice;
    obs.push_back(o);
    belief = update_belief(belief, choice, reward);
  }
  return obs;
}

// inverse Mills ratio phi(u)/Phi(u), stable for very negative u
double inv_mills(double u) {
  const double log_pdf = -0.5 * u * u - 0.5 * std::log(2.0 * M_PI);
  return std::exp(log_pdf - log_phi(u));
}

struct NewtonEval {
  double penalized_ll = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  Eigen::Matrix3d neg_hessian = Eigen::Matrix3d::Zero();
};

NewtonEval evaluate(const Eigen::Vector3d& w, const std::vector<ChoiceObservation>& obs,
                    double ridge, bool want_derivatives) {
  NewtonEval eval;
  for (const ChoiceObservation& o : obs) {
    const Eigen::Vector3d x = o.regressors();
    const double sign = o.choice == 0 ? 1.0 : -1.0;
    const double u = sign * w.dot(x);
    eval.penalized_ll += log_phi(u);
    if (want_derivatives) {
      const double lambda = inv_mills(u);
      eval.gradient += sign * lambda * x;
      eval.neg_hessian += lambda * (lambda + u) * x * x.transpose();
    }
  }
  eval.penalized_ll -= 0.5 * ridge * w.squaredNorm();
  if (want_derivatives) {
    eval.gradient -= ridge * w;
    eval.neg_hessian += ridge * Eigen::Matrix3d::Identity();
  }
  return eval;
}

bool newton_solve(const std::vector<ChoiceObservation>& obs, double ridge,
                  Eigen::Vector3d& w_out, Eigen::Matrix3d& cov_out) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  NewtonEval eval = evaluate(w, obs, ridge, true);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    if (eval.gradient.lpNorm<Eigen::Infinity>() < 1e-8) {
      converged = true;
      break;
    }
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(eval.neg_hessian);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::Vector3d direction = ldlt.solve(eval.gradient);
    if (!direction.allFinite()) return false;

    // backtrack if the full Newton step overshoots
    double step = 1.0;
    NewtonEval next = evaluate(w + step * direction, obs, ridge, true);
    const double accept_floor = eval.penalized_ll - 1e-12 * (1.0 + std::abs(eval.penalized_ll));
    for (int halving = 0;
         halving < 30 && !(std::isfinite(next.penalized_ll) && next.penalized_ll >= accept_floor);
         ++halving) {
      step *= 0.5;
      next = evaluate(w + step * direction, obs, ridge, true);
    }
    if (!std::isfinite(next.penalized_ll)) return false;
    w += step * direction;
    eval = next;
  }
  if (!converged) return false;

  const Eigen::LDLT<Eigen::Matrix3d> ldlt(eval.neg_hessian);
  if (ldlt.info() != Eigen::Success) return false;
  cov_out = ldlt.solve(Eigen::Matrix3d::Identity());
  if (!cov_out.allFinite()) return false;
  w_out = w;
  return true;
}

}  // namespace

std::vector<ChoiceObservation> extract_observations(
    const std::vector<std::pair<int, double>>& episode, const TaskDistribution& dist) {
  return extract_impl(episode, dist);
}

std::vector<ChoiceObservation> extract_observations(const Trajectory& traj,
                                                    const TaskDistribution& dist) {
  std::vector<std::pair<int, double>> episode;
  episode.reserve(traj.steps.size());
  for (const StepRecord& s : traj.steps) episode.emplace_back(s.action, s.reward);
  return extract_impl(episode, dist);
}

double probit_log_likelihood(const Eigen::Vector3d& w,
                             const std::vector<ChoiceObservation>& obs) {
  double ll = 0.0;
  for (const ChoiceObservation& o : obs) {
    const double sign = o.choice == 0 ? 1.0 : -1.0;
    ll += log_phi(sign * w.dot(o.regressors()));
  }
  return ll;
}

ProbitFit fit_probit(const std::vector<ChoiceObservation>& obs, double ridge) {
  if (obs.size() < 3) throw std::invalid_argument("fit_probit: need at least 3 observations");
  if (ridge < 0.0) throw std::invalid_argument("fit_probit: ridge must be >= 0");

  ProbitFit fit;
  fit.n_obs = static_cast<int>(obs.size());
  fit.ridge_used = ridge;
  fit.converged = newton_solve(obs, ridge, fit.w, fit.covariance);
  if (!fit.converged) {
    // separable or ill-conditioned data; refit under a stronger prior
    fit.ridge_used = std::max(ridge, 0.1);
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    if (newton_solve(obs, fit.ridge_used, w, cov)) {
      fit.w = w;
      fit.covariance = cov;
    }
  }
  fit.log_likelihood = probit_log_likelihood(fit.w, obs);
  return fit;
}

Eigen::Vector3d coefficient_sd(const ProbitFit& fit) {
  Eigen::Vector3d sd;
  for (int i = 0; i < 3; ++i) {
    const double variance = fit.covariance(i, i);
    if (variance < 0.0)
      throw std::runtime_error("coefficient_sd: negative variance, fit failed");
    sd[i] = std::sqrt(variance);
  }
  return sd;
}

}  // namespace lrla
