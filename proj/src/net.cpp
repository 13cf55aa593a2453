#include "lrla/net.hpp"

#include <stdexcept>

namespace lrla {

namespace {

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
  return 1.0 / (1.0 + (-x).exp());
}

}  // namespace

void NetShape::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
    throw std::invalid_argument("NetShape: all dimensions must be >= 1");
}

NetParams NetParams::zeros(const NetShape& shape) {
  shape.validate();
  const int in = shape.input_dim, hid = shape.hidden_dim, out = shape.output_dim;
  NetParams p;
  p.update_in = Eigen::MatrixXd::Zero(hid, in);
  p.update_rec = Eigen::MatrixXd::Zero(hid, hid);
  p.update_bias = Eigen::VectorXd::Zero(hid);
  p.reset_in = Eigen::MatrixXd::Zero(hid, in);
  p.reset_rec = Eigen::MatrixXd::Zero(hid, hid);
  p.reset_bias = Eigen::VectorXd::Zero(hid);
  p.cand_in = Eigen::MatrixXd::Zero(hid, in);
  p.cand_rec = Eigen::MatrixXd::Zero(hid, hid);
  p.cand_bias = Eigen::VectorXd::Zero(hid);
  p.head_weight = Eigen::MatrixXd::Zero(out, hid);
  p.head_bias = Eigen::VectorXd::Zero(out);
  return p;
}

NetShape NetParams::shape() const {
  NetShape s;
  s.input_dim = static_cast<int>(update_in.cols());
  s.hidden_dim = static_cast<int>(update_in.rows());
  s.output_dim = static_cast<int>(head_weight.rows());
  return s;
}

void NetParams::check_shape(const NetShape& shape) const {
  const int in = shape.input_dim, hid = shape.hidden_dim, out = shape.output_dim;
  const bool ok =
      update_in.rows() == hid && update_in.cols() == in &&
      update_rec.rows() == hid && update_rec.cols() == hid && update_bias.size() == hid &&
      reset_in.rows() == hid && reset_in.cols() == in &&
      reset_rec.rows() == hid && reset_rec.cols() == hid && reset_bias.size() == hid &&
      cand_in.rows() == hid && cand_in.cols() == in &&
      cand_rec.rows() == hid && cand_rec.cols() == hid && cand_bias.size() == hid &&
      head_weight.rows() == out && head_weight.cols() == hid && head_bias.size() == out;
  if (!ok) throw std::invalid_argument("NetParams: shape mismatch");
}

Eigen::VectorXd encode_input(std::optional<int> prev_action,
                             std::optional<double> prev_reward,
                             double reward_scale, int num_arms) {
  if (!(reward_scale > 0.0))
    throw std::invalid_argument("encode_input: reward_scale must be > 0");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_arms + 1);
  if (prev_action) {
    if (*prev_action < 0 || *prev_action >= num_arms)
      throw std::out_of_range("encode_input: prev_action out of range");
    x[*prev_action] = 1.0;
  }
  if (prev_reward) x[num_arms] = *prev_reward / reward_scale;
  return x;
}

Eigen::VectorXd gru_step(const NetParams& params, const Eigen::VectorXd& hidden,
                         const Eigen::VectorXd& input) {
  if (hidden.size() != params.update_rec.rows() || input.size() != params.update_in.cols())
    throw std::invalid_argument("gru_step: shape mismatch");
  const Eigen::ArrayXd z =
      sigmoid((params.update_in * input + params.update_rec * hidden + params.update_bias).array());
  const Eigen::ArrayXd r =
      sigmoid((params.reset_in * input + params.reset_rec * hidden + params.reset_bias).array());
  const Eigen::VectorXd gated = (r * hidden.array()).matrix();
  const Eigen::ArrayXd c =
      (params.cand_in * input + params.cand_rec * gated + params.cand_bias).array().tanh();
  return ((1.0 - z) * hidden.array() + z * c).matrix();
}

Eigen::VectorXd q_values(const NetParams& params, const Eigen::VectorXd& hidden) {
  return params.head_weight * hidden + params.head_bias;
}

int greedy_action(const Eigen::VectorXd& q) {
  int best = 0;
  for (int a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

std::vector<Eigen::VectorXd> forward_episode(const NetParams& params,
                                             const std::vector<Eigen::VectorXd>& inputs,
                                             EpisodeTape* tape) {
  if (inputs.empty()) throw std::invalid_argument("forward_episode: empty input sequence");
  const NetShape shape = params.shape();
  if (tape) {
    *tape = EpisodeTape{};
    tape->shape = shape;
  }
  Eigen::VectorXd h = Eigen::VectorXd::Zero(shape.hidden_dim);
  std::vector<Eigen::VectorXd> qs;
  qs.reserve(inputs.size());
  for (const Eigen::VectorXd& x : inputs) {
    const Eigen::ArrayXd z =
        sigmoid((params.update_in * x + params.update_rec * h + params.update_bias).array());
    const Eigen::ArrayXd r =
        sigmoid((params.reset_in * x + params.reset_rec * h + params.reset_bias).array());
    const Eigen::VectorXd gated = (r * h.array()).matrix();
    const Eigen::ArrayXd c =
        (params.cand_in * x + params.cand_rec * gated + params.cand_bias).array().tanh();
    Eigen::VectorXd h_next = ((1.0 - z) * h.array() + z * c).matrix();
    if (tape) {
      tape->inputs.push_back(x);
      tape->h_prev.push_back(h);
      tape->update_gate.push_back(z.matrix());
      tape->reset_gate.push_back(r.matrix());
      tape->candidate.push_back(c.matrix());
      tape->hidden.push_back(h_next);
    }
    h = std::move(h_next);
    qs.push_back(q_values(params, h));
  }
  return qs;
}

ParamGradients backward_episode(const NetParams& params, const EpisodeTape& tape,
                                const std::vector<Eigen::VectorXd>& q_grads) {
  const int steps = tape.length();
  if (static_cast<int>(q_grads.size()) != steps)
    throw std::invalid_argument("backward_episode: q_grads length mismatch");

  ParamGradients grads = NetParams::zeros(tape.shape);
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(tape.shape.hidden_dim);

  for (int t = steps - 1; t >= 0; --t) {
    const Eigen::VectorXd& x = tape.inputs[t];
    const Eigen::VectorXd& h_prev = tape.h_prev[t];
    const Eigen::ArrayXd z = tape.update_gate[t].array();
    const Eigen::ArrayXd r = tape.reset_gate[t].array();
    const Eigen::ArrayXd c = tape.candidate[t].array();

    // head at step t
    grads.head_weight.noalias() += q_grads[t] * tape.hidden[t].transpose();
    grads.head_bias += q_grads[t];
    dh.noalias() += params.head_weight.transpose() * q_grads[t];

    // h' = (1 - z) .* h_prev + z .* c
    const Eigen::ArrayXd dz = dh.array() * (c - h_prev.array());
    const Eigen::ArrayXd dc = dh.array() * z;
    Eigen::VectorXd dh_prev = (dh.array() * (1.0 - z)).matrix();

    // candidate branch: a_c = Wc x + Uc (r .* h_prev) + bc, c = tanh(a_c)
    const Eigen::VectorXd da_c = (dc * (1.0 - c * c)).matrix();
    grads.cand_in.noalias() += da_c * x.transpose();
    grads.cand_rec.noalias() += da_c * (r * h_prev.array()).matrix().transpose();
    grads.cand_bias += da_c;
    const Eigen::VectorXd dgated = params.cand_rec.transpose() * da_c;
    const Eigen::ArrayXd dr = dgated.array() * h_prev.array();
    dh_prev.array() += dgated.array() * r;

    // gates
    const Eigen::VectorXd da_z = (dz * z * (1.0 - z)).matrix();
    grads.update_in.noalias() += da_z * x.transpose();
    grads.update_rec.noalias() += da_z * h_prev.transpose();
    grads.update_bias += da_z;
    dh_prev.noalias() += params.update_rec.transpose() * da_z;

    const Eigen::VectorXd da_r = (dr * r * (1.0 - r)).matrix();
    grads.reset_in.noalias() += da_r * x.transpose();
    grads.reset_rec.noalias() += da_r * h_prev.transpose();
    grads.reset_bias += da_r;
    dh_prev.noalias() += params.reset_rec.transpose() * da_r;

    dh = std::move(dh_prev);
  }
  return grads;
}

int param_count(const NetShape& shape) {
  const int in = shape.input_dim, hid = shape.hidden_dim, out = shape.output_dim;
  return 3 * (hid * in + hid * hid + hid) + out * hid + out;
}

Eigen::VectorXd pack_params(const NetParams& params) {
  const NetShape shape = params.shape();
  Eigen::VectorXd flat(param_count(shape));
  int offset = 0;
  auto put_mat = [&](const Eigen::MatrixXd& m) {
    flat.segment(offset, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    offset += static_cast<int>(m.size());
  };
  auto put_vec = [&](const Eigen::VectorXd& v) {
    flat.segment(offset, v.size()) = v;
    offset += static_cast<int>(v.size());
  };
  put_mat(params.update_in);
  put_mat(params.update_rec);
  put_vec(params.update_bias);
  put_mat(params.reset_in);
  put_mat(params.reset_rec);
  put_vec(params.reset_bias);
  put_mat(params.cand_in);
  put_mat(params.cand_rec);
  put_vec(params.cand_bias);
  put_mat(params.head_weight);
  put_vec(params.head_bias);
  return flat;
}

NetParams unpack_params(const NetShape& shape, const Eigen::VectorXd& flat) {
  if (flat.size() != param_count(shape))
    throw std::invalid_argument("unpack_params: flat size mismatch");
  NetParams p = NetParams::zeros(shape);
  int offset = 0;
  auto get_mat = [&](Eigen::MatrixXd& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(offset, m.size());
    offset += static_cast<int>(m.size());
  };
  auto get_vec = [&](Eigen::VectorXd& v) {
    v = flat.segment(offset, v.size());
    offset += static_cast<int>(v.size());
  };
  get_mat(p.update_in);
  get_mat(p.update_rec);
  get_vec(p.update_bias);
  get_mat(p.reset_in);
  get_mat(p.reset_rec);
  get_vec(p.reset_bias);
  get_mat(p.cand_in);
  get_mat(p.cand_rec);
  get_vec(p.cand_bias);
  get_mat(p.head_weight);
  get_vec(p.head_bias);
  return p;
}

GreedyNetPolicy::GreedyNetPolicy(NetParams params, double reward_scale)
    : params_(std::move(params)), reward_scale_(reward_scale) {
  reset();
}

void GreedyNetPolicy::reset() {
  hidden_ = Eigen::VectorXd::Zero(params_.shape().hidden_dim);
  prev_action_.reset();
  prev_reward_.reset();
  last_q_.clear();
  inputs_.clear();
}

int GreedyNetPolicy::choose(RandomStream&) {
  const int num_arms = params_.shape().output_dim;
  const Eigen::VectorXd x = encode_input(prev_action_, prev_reward_, reward_scale_, num_arms);
  inputs_.push_back(x);
  hidden_ = gru_step(params_, hidden_, x);
  const Eigen::VectorXd q = q_values(params_, hidden_);
  last_q_.assign(q.data(), q.data() + q.size());
  return greedy_action(q);
}

void GreedyNetPolicy::observe(int action, double reward) {
  prev_action_ = action;
  prev_reward_ = reward;
}

}  // namespace lrla
