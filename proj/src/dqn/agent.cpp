#include "fedsplit/dqn/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fedsplit/errors.hpp"

namespace fedsplit {

double AgentHyperparams::epsilon_at(std::size_t epoch) const {
  return std::max(epsilon_end, epsilon_start * std::pow(epsilon_decay, static_cast<double>(epoch)));
}

void AgentHyperparams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (!(lr >= 0.0)) throw std::invalid_argument("lr must be >= 0");
  for (double e : {epsilon_start, epsilon_end, epsilon_decay}) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon parameters must be in [0,1]");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
  if (buffer_capacity == 0) throw std::invalid_argument("buffer_capacity must be > 0");
  if (!(effective_reward_scale() > 0.0)) throw std::invalid_argument("reward_scale must be > 0");
}

Agent::Agent(std::string id, SplitModel model, AgentHyperparams hp, std::uint64_t seed)
    : id_(std::move(id)),
      model_(std::move(model)),
      hp_(hp),
      buffer_(hp.buffer_capacity),
      action_rng_(derive_seed(seed, "act")),
      replay_rng_(derive_seed(seed, "replay")) {
  hp_.validate();
  if (model_.input_dim() != kObservationDim || model_.output_dim() != kActionCount) {
    throw DimensionError("agent model must map 4 observations to 2 actions");
  }
}

int select_action(const SplitModel& model, const Observation& obs, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0,1]");
  if (rng.uniform() < epsilon) return static_cast<int>(rng.below(kActionCount));
  const Vector q = forward(model, obs);
  // max_element returns the first maximum, so ties go to action 0.
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

RolloutResult rollout(Agent& agent, const EnvConfig& config, std::uint64_t env_seed,
                      double epsilon) {
  RolloutResult result;
  EnvState state = reset(config, env_seed);
  while (!state.done) {
    const Observation obs = observe(state);
    const int action = select_action(agent.model(), obs, epsilon, agent.action_rng());
    const StepResult r = step(config, state, action);
    Transition t{obs, action, r.reward, observe(r.next), r.done};
    agent.buffer().push(t);
    result.transitions.push_back(t);
    result.episode_return += r.reward;
    state = r.next;
  }
  return result;
}

GradientBundle td_gradient(const SplitModel& model, std::span<const Transition> batch,
                           double gamma, double reward_scale, double* loss, double* min_target,
                           double* max_target) {
  GradientBundle total;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double sum_sq = 0.0;
  Tape tape;
  Vector output_grad(model.output_dim());
  for (const auto& t : batch) {
    const Vector q = forward(model, t.state, &tape);
    double target = reward_scale * t.reward;
    if (!t.done) {
      const Vector q_next = forward(model, t.next_state);
      target += gamma * *std::max_element(q_next.begin(), q_next.end());
    }
    if (min_target) *min_target = std::min(*min_target, target);
    if (max_target) *max_target = std::max(*max_target, target);

    const double err = q[static_cast<std::size_t>(t.action)] - target;
    sum_sq += err * err;
    std::fill(output_grad.begin(), output_grad.end(), 0.0);
    output_grad[static_cast<std::size_t>(t.action)] = 2.0 * err * inv_n;
    backward_into(model, tape, output_grad, total);
  }
  if (loss) *loss = sum_sq * inv_n;
  return total;
}

TrainResult train_offline(Agent& agent) {
  const auto& hp = agent.hyperparams();
  DenseLayer& global = agent.model().global_layer();
  TrainResult result;
  result.global_delta = {global.id, Matrix(global.in_dim(), global.out_dim()),
                         Vector(global.out_dim(), 0.0)};
  if (agent.buffer().empty()) return result;

  const Matrix w_before = global.weights;
  const Vector b_before = global.bias;
  double min_t = std::numeric_limits<double>::infinity();
  double max_t = -std::numeric_limits<double>::infinity();
  double loss_sum = 0.0;

  for (std::size_t s = 0; s < hp.train_steps_per_epoch; ++s) {
    const auto batch = agent.buffer().sample(hp.batch_size, agent.replay_rng());
    double loss = 0.0;
    const GradientBundle g = td_gradient(agent.model(), batch, hp.gamma,
                                         hp.effective_reward_scale(), &loss, &min_t, &max_t);
    apply_update(agent.model(), g, hp.lr);
    loss_sum += loss;
    ++result.steps;
  }

  // Re-derive the global layer as before + (after - before) so that this
  // replica performs the identical floating-point addition remote replicas do.
  DenseLayer& after = agent.model().global_layer();
  auto dw = result.global_delta.weights.data();
  auto wa = after.weights.data();
  auto wb = w_before.data();
  for (std::size_t i = 0; i < dw.size(); ++i) {
    dw[i] = wa[i] - wb[i];
    wa[i] = wb[i] + dw[i];
  }
  for (std::size_t i = 0; i < after.bias.size(); ++i) {
    result.global_delta.bias[i] = after.bias[i] - b_before[i];
    after.bias[i] = b_before[i] + result.global_delta.bias[i];
  }

  result.min_target = min_t;
  result.max_target = max_t;
  result.mean_loss = loss_sum / static_cast<double>(result.steps);
  return result;
}

}  // namespace fedsplit
