#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lrla/bandit.hpp"

namespace lrla {

struct NetShape {
  int input_dim = 3;  // one-hot previous action + scaled previous reward
  int hidden_dim = 64;
  int output_dim = 2;

  void validate() const;
  bool operator==(const NetShape&) const = default;
};

// GRU cell plus linear Q-value head. Gate convention:
//   z = sigmoid(Wz x + Uz h + bz)          update gate
//   r = sigmoid(Wr x + Ur h + br)          reset gate
//   c = tanh(Wc x + Uc (r .* h) + bc)      candidate
//   h' = (1 - z) .* h + z .* c
struct NetParams {
  Eigen::MatrixXd update_in, update_rec;
  Eigen::VectorXd update_bias;
  Eigen::MatrixXd reset_in, reset_rec;
  Eigen::VectorXd reset_bias;
  Eigen::MatrixXd cand_in, cand_rec;
  Eigen::VectorXd cand_bias;
  Eigen::MatrixXd head_weight;
  Eigen::VectorXd head_bias;

  static NetParams zeros(const NetShape& shape);
  NetShape shape() const;
  void check_shape(const NetShape& shape) const;
};

// Gradient accumulator with the same named-group structure.
using ParamGradients = NetParams;

// Intermediates retained by forward_episode for the backward pass.
struct EpisodeTape {
  NetShape shape;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> h_prev;
  std::vector<Eigen::VectorXd> update_gate;
  std::vector<Eigen::VectorXd> reset_gate;
  std::vector<Eigen::VectorXd> candidate;
  std::vector<Eigen::VectorXd> hidden;

  int length() const { return static_cast<int>(inputs.size()); }
};

// Input encoding: one-hot of the previous action followed by the previous
// reward divided by reward_scale; all zeros on the first trial.
Eigen::VectorXd encode_input(std::optional<int> prev_action,
                             std::optional<double> prev_reward,
                             double reward_scale, int num_arms = 2);

Eigen::VectorXd gru_step(const NetParams& params, const Eigen::VectorXd& hidden,
                         const Eigen::VectorXd& input);

Eigen::VectorXd q_values(const NetParams& params, const Eigen::VectorXd& hidden);

// argmax with ties broken toward the lowest index
int greedy_action(const Eigen::VectorXd& q);

// Runs the recurrence from a zero hidden state over the whole episode.
// Returns one Q-vector per step; fills `tape` when non-null.
std::vector<Eigen::VectorXd> forward_episode(const NetParams& params,
                                             const std::vector<Eigen::VectorXd>& inputs,
                                             EpisodeTape* tape = nullptr);

// Exact reverse-mode gradient of sum_t <q_grads[t], Q[t]> w.r.t. all
// parameters, accumulated through time.
ParamGradients backward_episode(const NetParams& params, const EpisodeTape& tape,
                                const std::vector<Eigen::VectorXd>& q_grads);

// Flat packing in a fixed array order; used by the variational machinery,
// the optimizer, and checkpoints.
int param_count(const NetShape& shape);
Eigen::VectorXd pack_params(const NetParams& params);
NetParams unpack_params(const NetShape& shape, const Eigen::VectorXd& flat);

// Greedy policy of a fixed parameter set (Q-argmax, no sampling).
class GreedyNetPolicy : public ActionChooser {
 public:
  GreedyNetPolicy(NetParams params, double reward_scale);

  void reset() override;
  int choose(RandomStream& rng) override;
  void observe(int action, double reward) override;
  const std::vector<double>* last_q() const override { return &last_q_; }

  const std::vector<Eigen::VectorXd>& episode_inputs() const { return inputs_; }

 private:
  NetParams params_;
  double reward_scale_;
  Eigen::VectorXd hidden_;
  std::optional<int> prev_action_;
  std::optional<double> prev_reward_;
  std::vector<double> last_q_;
  std::vector<Eigen::VectorXd> inputs_;
};

}  // namespace lrla
